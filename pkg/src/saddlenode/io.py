"""Text outputs: every file starts with comment lines naming the tool version
and the resolved configuration, and floats are written with 17 significant
digits so reruns are byte-identical."""
from __future__ import annotations

import json

import numpy as np

from . import __version__


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def header_lines(config: dict, prefix: str = "# ") -> str:
    cfg = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return f"{prefix}saddlenode {__version__}\n{prefix}config {cfg}\n"


def scan_csv(smap, config: dict) -> str:
    lines = [header_lines(config), "a,b,S_N,sign\n"]
    for i, a in enumerate(smap.a_values):
        for j, b in enumerate(smap.b_values):
            v = smap.values[i, j]
            lines.append(f"{fmt(a)},{fmt(b)},{fmt(v)},{int(np.sign(v))}\n")
    return "".join(lines)


def scan_pgm(smap, config: dict) -> str:
    """P2 image, maxval 2, pixel = sign + 1; a runs left to right, b bottom to top."""
    signs = np.sign(smap.values).astype(int) + 1  # shape (na, nb)
    img = signs.T[::-1]  # rows: b descending
    h, w = img.shape
    out = ["P2\n", header_lines(config), f"{w} {h}\n2\n"]
    out.extend(" ".join(str(v) for v in row) + "\n" for row in img)
    return "".join(out)


def contours_csv(contours, config: dict) -> str:
    lines = [header_lines(config), "contour_id,a,b\n"]
    for cid, line in enumerate(contours):
        for a, b in line:
            lines.append(f"{cid},{fmt(a)},{fmt(b)}\n")
    return "".join(lines)


def profile_csv(profile, config: dict, extra: dict | None = None) -> str:
    lines = [header_lines(config)]
    if extra:
        lines.append("# summary " + json.dumps(extra, sort_keys=True, separators=(",", ":")) + "\n")
    lines.append("n,Phi_n,Z_n\n")
    for n, (p, z) in enumerate(zip(profile.Phi_n, profile.Z_n)):
        lines.append(f"{n},{fmt(p)},{fmt(z)}\n")
    return "".join(lines)
