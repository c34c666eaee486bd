"""
A small obstacle sweep
======================

Runs a reduced open-environment sweep, then prints the per-point summary and
the trend checks. The bundled ``exp2`` config is the same sweep at desk scale.
"""

import dataclasses
import sys

from cordon.experiments import bundled_config, records_to_csv, run_experiment, summarize, trend_checks

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 8
cfg = dataclasses.replace(bundled_config("exp2"), trials=trials)
records = run_experiment(cfg)

##############################################################################
# Raw records: one CSV row per environment.

print("\n".join(records_to_csv(records).splitlines()[:4]))

##############################################################################
# Per-point savings and the holistic / parallel-individual time ratio.

summary = summarize(records)
for p in summary.points:
    print(f"obstacles {p.sweep_value:4d}  median savings {p.savings.median:5.1f}  "
          f"p95 {p.savings.p95:5.1f}  time ratio {p.time_ratio.median:.2f}")

for line in trend_checks(summary, cfg.sweep).lines():
    print(line)
