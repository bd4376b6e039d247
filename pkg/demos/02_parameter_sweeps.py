"""
Latency and throughput versus ppr, cable length and data rate
=============================================================

Each sweep varies one parameter around the reference link and writes the
curve to CSV next to this script. Plot the CSVs with any tool you like.
"""

from pathlib import Path

import numpy as np

from vrnet.cli import write_csv
from vrnet.sweep import SweepSpec, sweep

out_dir = Path(__file__).with_name("output")
out_dir.mkdir(exist_ok=True)

for parameter in ("ppr", "cable_length", "data_rate"):
    series = sweep(SweepSpec.default(parameter))
    lat = series.column("total_latency") * 1e6
    tput = series.column("throughput") / 1e9
    print(f"\n{parameter}")
    for value, l, t in zip(series.values, lat, tput):
        print(f"  {value:>14.6g}   {l:8.3f} us   {t:.4f} Gbit/s")
    write_csv(series, out_dir / f"sweep_{parameter}.csv")

###############################################################################
# Latency grows by exactly 2 * 100 m / 2e8 m/s = 1 us per 100 m step.

cable = sweep(SweepSpec.default("cable_length"))
print("\nlatency step per 100 m:", np.unique(np.round(np.diff(cable.column("total_latency")) * 1e6, 9)), "us")

###############################################################################
# The data-rate curve flattens: its second differences are all negative.

rate = sweep(SweepSpec.default("data_rate"))
print("throughput 2nd differences <= 0:", bool(np.all(np.diff(rate.column("throughput"), 2) <= 0)))
