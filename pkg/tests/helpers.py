from importlib import resources

from cordon.mapio import parse_map


def bundled(name):
    text = resources.files("cordon").joinpath("data", f"{name}.map").read_text(encoding="ascii")
    return parse_map(text).grid


def bundled_path(name):
    return str(resources.files("cordon").joinpath("data", f"{name}.map"))
