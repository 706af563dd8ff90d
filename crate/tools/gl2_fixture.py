"""Writes crates/core/fixtures/gl2_three_chart.toml: a GL2 connection on three
boxes of the plane, pulled back from the global form B by k_a = M_a R(c_a x0)."""

import pathlib

import numpy as np

B = ("[[0, x1], [0.2, 0]]", "[[x0, 0], [0, -x0]]")
CHARTS = {
    "A": ([-2, -2], [0.5, 2], [[1, 0], [0, 1]], 0.5),
    "B": ([-0.5, -2], [2, 0.5], [[2, 0.5], [0, 1]], -0.3),
    "C": ([-0.5, -0.5], [2, 2], [[1, 0], [0.7, 1.5]], 1.0),
}
J = "[[0, -1], [1, 0]]"


def num(x):
    return repr(float(x)).rstrip("0").rstrip(".") if float(x) != int(x) else str(int(x))


def mat(m):
    return "[" + ", ".join("[" + ", ".join(num(v) for v in row) + "]" for row in np.asarray(m)) + "]"


def rot(c):
    a = f"{num(c)}*x0"
    return f"[[cos({a}), -sin({a})], [sin({a}), cos({a})]]"


def k(name):
    _, _, m, c = CHARTS[name]
    return f"{mat(m)} * {rot(c)}"


def k_inv(name):
    _, _, m, c = CHARTS[name]
    return f"{rot(-c)} * {mat(np.linalg.inv(m))}"


def box(a, b):
    lo = np.maximum(CHARTS[a][0], CHARTS[b][0])
    hi = np.minimum(CHARTS[a][1], CHARTS[b][1])
    return lo, hi


def main():
    out = [
        'description = "Three overlapping boxes of the plane with a GL2 connection A_a = Ad(k_a^-1) B + k_a^-1 dk_a, '
        'k_a = M_a R(c_a x0), and transitions k_a^-1 k_b; generated by tools/gl2_fixture.py."',
        "",
        "[atlas]",
        "dim = 2",
        "charts = [",
    ]
    for name, (lo, hi, _, _) in CHARTS.items():
        out.append(f'  {{ name = "{name}", lower = [{num(lo[0])}, {num(lo[1])}], upper = [{num(hi[0])}, {num(hi[1])}] }},')
    out.append("]")
    pairs = [("A", "B"), ("B", "A"), ("A", "C"), ("C", "A"), ("B", "C"), ("C", "B")]
    for a, b in pairs:
        lo, hi = box(a, b)
        out += [
            "",
            "[[atlas.overlaps]]",
            f'id = "{a}{b}"',
            f'source = "{a}"',
            f'target = "{b}"',
            f"lower = [{num(lo[0])}, {num(lo[1])}]",
            f"upper = [{num(hi[0])}, {num(hi[1])}]",
            'map = ["x0", "x1"]',
        ]
    out += ["", "[connection]", 'group = "GL2"', "", "[connection.forms]"]
    for name, (_, _, _, c) in CHARTS.items():
        # k^-1 dk = c J dx0 since M is constant and R(s)^-1 R'(s) = J.
        f0 = f"{k_inv(name)} * {B[0]} * {k(name)} + {num(c)} * {J}"
        f1 = f"{k_inv(name)} * {B[1]} * {k(name)}"
        out.append(f'{name} = ["{f0}", "{f1}"]')
    out += ["", "[connection.transitions]"]
    for a, b in pairs:
        out.append(f'{a}{b} = "{k_inv(a)} * {k(b)}"')
    out.append("")
    target = pathlib.Path(__file__).resolve().parent.parent / "crates/core/fixtures/gl2_three_chart.toml"
    old = target.read_text()
    tail = old[old.index("[paths.through]"):]
    target.write_text("\n".join(out) + "\n" + tail)
    print(f"wrote {target}")


if __name__ == "__main__":
    main()
