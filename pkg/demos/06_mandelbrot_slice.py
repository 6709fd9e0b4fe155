"""Escape-rate heatmaps: the classical Mandelbrot picture and beyond.

The CLI renders a grid of truncated escape rates of the critical divisor
as CSV plus an 8-bit PGM (black = rate below 1e-3, i.e. the connectedness
locus silhouette).  This demo drives the same code in-process and prints a
coarse ASCII view.
"""

import tempfile
import os

import numpy as np

from relesc.cli import main as relesc_main

with tempfile.TemporaryDirectory() as tmp:
    base = os.path.join(tmp, "mandel")
    relesc_main(["mandel-slice", "--d", "2", "--grid=-2.2:0.8:1.2:60",
                 "--max-iter", "60", "--out", base])
    rows = [line.split(",") for line in open(base + ".csv")
            if not line.startswith("#")]
    vals = np.array([[float(x) for x in row] for row in rows])
    print(f"grid {vals.shape[1]}x{vals.shape[0]}, "
          f"min {vals.min():.3g}, max {vals.max():.3g}")
    for row in vals[::3]:
        print("".join("#" if x < 1e-3 else ("+" if x < 0.05 else ".")
                      for x in row[::1]))
