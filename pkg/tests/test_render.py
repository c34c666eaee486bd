import re
import xml.etree.ElementTree as ET

import pytest

from cordon.errors import ContractViolation
from cordon.mapio import parse_map
from cordon.render import FILLS, render_ascii, render_svg
from helpers import bundled

NS = "{http://www.w3.org/2000/svg}"


def test_svg_structure():
    g = bundled("pathologic")
    robots = {(6, 5), (6, 6)}
    root = ET.fromstring(render_svg(g, robots, cell=8, title="pathologic"))
    rects = root.findall(f"{NS}rect")
    kinds = {}
    for r in rects:
        kinds.setdefault(r.get("class"), []).append(r)
    assert len(kinds["robot"]) == 2
    assert len(kinds["target"]) == 3
    assert len(kinds["obstacle"]) == int(g.obstacle_mask.sum())
    assert len(kinds["border"]) == int(g.border_mask.sum())
    fills = {k: {r.get("fill") for r in v} for k, v in kinds.items()}
    assert all(len(v) == 1 for v in fills.values())
    assert len({next(iter(v)) for v in fills.values()}) == len(fills)
    legend = root.find(f"{NS}g[@class='legend']")
    labels = [t.text for t in legend.findall(f"{NS}text")]
    assert labels == ["Free", "Border entry", "Obstacle", "Target", "Robot"]
    assert root.find(f"{NS}title").text == "pathologic"
    assert root.get("width") == str(13 * 8)


def test_distinct_fills():
    assert len(set(FILLS.values())) == len(FILLS)


def test_ascii_round_trips():
    g = bundled("pathologic")
    text = render_ascii(g, [(6, 5), (6, 6)])
    assert re.search(r"^\.####RR#####\.$", text, re.M)
    doc = parse_map(text)
    assert doc.grid == g and doc.robots == {(6, 5), (6, 6)}


def test_out_of_bounds_robot():
    with pytest.raises(ContractViolation):
        render_svg(bundled("pathologic"), [(40, 1)])
