"""CSV, key=value and SVG emitters."""

from __future__ import annotations

import contextlib
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np


def fmt(x):
    """17 significant digits for floats: round-trips exactly."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".16e")
    return str(x)


@contextlib.contextmanager
def _open_out(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def write_csv(header, rows, path=None):
    with _open_out(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def read_csv(path):
    """Header and float rows of a CSV written by :func:`write_csv`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return header, rows


def format_kv(mapping, style="kv"):
    if style == "json":
        return json.dumps({k: (float(v) if isinstance(v, np.floating) else v) for k, v in mapping.items()}, indent=2) + "\n"
    return "".join(f"{k}={fmt(v)}\n" for k, v in mapping.items())


def write_kv(mapping, path=None, style="kv", stream=None):
    text = format_kv(mapping, style)
    if stream is not None:
        stream.write(text)
        return
    with _open_out(path) as fh:
        fh.write(text)


def parse_kv(text):
    out = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def svg_loglog(x, y, path, fit=None, title="", xlabel="lambda", ylabel="resolvent norm",
               width=640, height=440):
    """Log-log polyline of (x, y) with an optional fitted line (slope, intercept)
    in natural-log coordinates.  Plain SVG, no plotting dependency."""
    lx, ly = np.log10(np.asarray(x, float)), np.log10(np.asarray(y, float))
    pad_l, pad_r, pad_t, pad_b = 70, 20, 40, 50
    x0, x1 = lx.min(), lx.max()
    y0, y1 = ly.min(), ly.max()
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5

    def px(v):
        return pad_l + (v - x0) / (x1 - x0) * (width - pad_l - pad_r)

    def py(v):
        return height - pad_b - (v - y0) / (y1 - y0) * (height - pad_t - pad_b)

    pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(lx, ly))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{pad_l}" y="{pad_t}" width="{width - pad_l - pad_r}" '
        f'height="{height - pad_t - pad_b}" fill="none" stroke="black"/>',
        f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="1.5"/>',
    ]
    if fit is not None:
        slope, intercept = fit[:2]
        lo, hi = (fit[2] if len(fit) > 2 else (10**x0, 10**x1))
        fx = np.log10([lo, hi])
        fy = (slope * np.log([lo, hi]) + intercept) / math.log(10)
        parts.append(
            f'<polyline points="{px(fx[0]):.2f},{py(fy[0]):.2f} {px(fx[1]):.2f},{py(fy[1]):.2f}" '
            f'fill="none" stroke="firebrick" stroke-dasharray="6,4"/>'
        )
        parts.append(
            f'<text x="{width - pad_r - 5}" y="{pad_t + 18}" text-anchor="end" '
            f'font-size="13">fitted slope {slope:.4f}</text>'
        )
    for v in range(math.ceil(x0), math.floor(x1) + 1):
        parts.append(f'<text x="{px(v):.2f}" y="{height - pad_b + 18}" text-anchor="middle" font-size="12">1e{v}</text>')
    for v in range(math.ceil(y0), math.floor(y1) + 1):
        parts.append(f'<text x="{pad_l - 6}" y="{py(v) + 4:.2f}" text-anchor="end" font-size="12">1e{v}</text>')
    parts += [
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle" font-size="13">{xlabel}</text>',
        f'<text x="16" y="{height / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {height / 2})">{ylabel}</text>',
        f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="14">{title}</text>',
        "</svg>",
    ]
    Path(path).write_text("\n".join(parts) + "\n")
