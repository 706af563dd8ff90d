#!/usr/bin/env python3
"""Writes crates/core/fixtures/torus.toml: the degree-one U1 bundle on the flat
torus R^2/Z^2 with four box charts and one overlap per lattice shift."""

import itertools
import pathlib

HALF = 0.35
CENTERS = {f"C{i}{j}": (i / 2, j / 2) for i in (0, 1) for j in (0, 1)}
E = "[[0, -1], [1, 0]]"


def box(c):
    return [c[0] - HALF, c[1] - HALF], [c[0] + HALF, c[1] + HALF]


def fmt(v):
    return "[" + ", ".join(f"{x:g}" for x in v) + "]"


def overlaps():
    for (a, ca), (b, cb) in itertools.permutations(CENTERS.items(), 2):
        la, ua = box(ca)
        lb, ub = box(cb)
        for n in itertools.product((-1, 0, 1), repeat=2):
            lo = [max(la[k], lb[k] - n[k]) for k in range(2)]
            hi = [min(ua[k], ub[k] - n[k]) for k in range(2)]
            if all(l < h for l, h in zip(lo, hi)):
                yield a, b, n, lo, hi


def main():
    out = [
        'description = "Flat torus R^2/Z^2, four box charts, U1 bundle of degree one with A = 2 pi x0 e dx1; generated by tools/torus_fixture.py."',
        "",
        "[atlas]",
        "dim = 2",
        "charts = [",
    ]
    for name, c in CENTERS.items():
        lo, hi = box(c)
        out.append(f'  {{ name = "{name}", lower = {fmt(lo)}, upper = {fmt(hi)} }},')
    out.append("]")
    transitions = []
    for a, b, n, lo, hi in overlaps():
        oid = f"{a}_{b}_{n[0]:+d}{n[1]:+d}".replace("+", "p").replace("-", "m")
        out += [
            "",
            "[[atlas.overlaps]]",
            f'id = "{oid}"',
            f'source = "{a}"',
            f'target = "{b}"',
            f"lower = {fmt(lo)}",
            f"upper = {fmt(hi)}",
            f'map = ["x0 + {n[0]}", "x1 + {n[1]}"]',
        ]
        transitions.append(f'{oid} = "expm({2 * n[0]} * pi * x1 * {E})"')
    out += ["", "[connection]", 'group = "U1"', "", "[connection.forms]"]
    for name in CENTERS:
        out.append(f'{name} = ["zeros(2, 2)", "2 * pi * x0 * {E}"]')
    out += ["", "[connection.transitions]", *transitions]
    out += [
        "",
        "[paths.origin]",
        'constant = { chart = "C00", point = [0, 0] }',
        "",
        "[paths.to_c10]",
        "sitting = 0.05",
        "segments = [",
        '  { chart = "C00", map = ["0.25*beta(2*x0)", "0"] },',
        '  { chart = "C10", map = ["0.25 + 0.25*beta(2*x0 - 1)", "0"] },',
        "]",
        "",
        "[paths.to_c01]",
        "sitting = 0.05",
        "segments = [",
        '  { chart = "C00", map = ["0", "0.25*beta(2*x0)"] },',
        '  { chart = "C01", map = ["0", "0.25 + 0.25*beta(2*x0 - 1)"] },',
        "]",
        "",
        "[paths.to_c11]",
        "sitting = 0.05",
        "segments = [",
        '  { chart = "C00", map = ["0.25*beta(2*x0)", "0.25*beta(2*x0)"] },',
        '  { chart = "C11", map = ["0.25 + 0.25*beta(2*x0 - 1)", "0.25 + 0.25*beta(2*x0 - 1)"] },',
        "]",
        "",
        "# Circle of radius 0.1 about (0.2, 0.2), counterclockwise.",
        "[paths.plaquette]",
        'segments = [{ chart = "C00", map = ["0.2 + 0.1*cos(2*pi*beta(x0))", "0.2 + 0.1*sin(2*pi*beta(x0))"] }]',
        "",
        "[families.circles]",
        "lower = [0.02]",
        "upper = [0.12]",
        'segments = [{ chart = "C00", map = ["0.2 + x0*cos(2*pi*beta(x1))", "0.2 + x0*sin(2*pi*beta(x1))"] }]',
        "",
        "[homotopies.reparam_plaquette]",
        'kind = "reparam"',
        'path = "plaquette"',
        "",
        "[gauges.wave]",
    ]
    for name in CENTERS:
        out.append(f'{name} = "expm(0.3 * sin(2*pi*x0) * cos(2*pi*x1) * {E})"')
    out += [
        "",
        "[access]",
        'basepoint = { chart = "C00", point = [0, 0] }',
        'paths = { C00 = "origin", C10 = "to_c10", C01 = "to_c01", C11 = "to_c11" }',
        "",
    ]
    target = pathlib.Path(__file__).resolve().parent.parent / "crates/core/fixtures/torus.toml"
    target.write_text("\n".join(out))
    print(f"wrote {target} ({len(transitions)} overlaps)")


if __name__ == "__main__":
    main()
