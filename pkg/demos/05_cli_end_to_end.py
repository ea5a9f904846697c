"""Drive the command-line interface end to end.

Prepares a bitmap pair and a line-list map, then invokes the CLI the
way a shell user would: align with artifacts, interpret with a
rendering, and a failure case with its exit code.
"""

import math
import subprocess
import sys
from pathlib import Path

import numpy as np

from mapalign.synthetic import random_grid_plan, save_pgm, transformed_copy

OUT = Path(__file__).parent / "demo_out"
OUT.mkdir(exist_ok=True)


def run(*args):
    cmd = [sys.executable, "-m", "mapalign.cli", *args]
    print(f"\n$ mapalign {' '.join(args)}")
    proc = subprocess.run(cmd, capture_output=True, text=True)
    for stream in (proc.stdout, proc.stderr):
        if stream:
            print(stream.rstrip())
    print(f"(exit code {proc.returncode})")
    return proc


image, _ = random_grid_plan(
    seed=44, size=320, margin=24, outer_walls=True, min_span=90, n_cols=2, n_rows=2
)
warped, _, _ = transformed_copy(image, scale=1.3, angle=math.radians(20), translation=(25, 5))
p1, p2 = OUT / "cli1.pgm", OUT / "cli2.pgm"
save_pgm(image, p1)
save_pgm(warped, p2)

run(
    "align", str(p1), str(p2),
    "--out", str(OUT / "alignment.txt"),
    "--dump-pool", str(OUT / "pool.txt"),
    "--overlay", str(OUT / "cli_overlay.png"),
    "--thr-s", "1.2",
)
print("\nresult document:")
print((OUT / "alignment.txt").read_text())

# layout maps can come in as plain line lists: x1 y1 x2 y2 per row
lines = OUT / "layout.txt"
lines.write_text(
    "# a square room with an inner wall\n"
    "20 20 220 20\n220 20 220 170\n220 170 20 170\n20 170 20 20\n"
    "120 20 120 170\n"
)
run("interpret", str(lines), "--render", str(OUT / "layout_faces.png"))

# a blank bitmap has nothing to detect: distinct exit code, message on stderr
blank = OUT / "blank.pgm"
save_pgm(np.full((80, 80), 255, dtype=np.uint8), blank)
run("interpret", str(blank))
