"""Reference holonomies for the sphere latitude fixtures.

Integrates g' = -A(gamma') g with classical RK4 on 2x2 matrices, 10^6 uniform
steps, using the stereographic Levi-Civita form written out by hand and the
uniformly parameterized circle. Writes crates/core/fixtures/oracles/sphere_latitudes.json.
"""

import json
import math
import sys
from pathlib import Path

STEPS = 1_000_000


def generator(rho, u):
    x0, x1 = rho * math.cos(2 * math.pi * u), rho * math.sin(2 * math.pi * u)
    v0, v1 = -2 * math.pi * x1, 2 * math.pi * x0
    a = (2 * x1 * v0 - 2 * x0 * v1) / (1 + x0 * x0 + x1 * x1)
    # -a * e with e = [[0, -1], [1, 0]]
    return (0.0, a, -a, 0.0)


def mul(m, g):
    return (
        m[0] * g[0] + m[1] * g[2],
        m[0] * g[1] + m[1] * g[3],
        m[2] * g[0] + m[3] * g[2],
        m[2] * g[1] + m[3] * g[3],
    )


def axpy(g, k, h):
    return tuple(a + h * b for a, b in zip(g, k))


def holonomy(rho):
    g = (1.0, 0.0, 0.0, 1.0)
    h = 1.0 / STEPS
    for i in range(STEPS):
        t = i * h
        k1 = mul(generator(rho, t), g)
        k2 = mul(generator(rho, t + h / 2), axpy(g, k1, h / 2))
        k3 = mul(generator(rho, t + h / 2), axpy(g, k2, h / 2))
        k4 = mul(generator(rho, t + h), axpy(g, k3, h))
        g = tuple(a + h / 6 * (b + 2 * c + 2 * d + e) for a, b, c, d, e in zip(g, k1, k2, k3, k4))
    return math.atan2(g[2], g[0]), g


def main():
    out = []
    for name, theta in [("latitude_30", math.pi / 6), ("latitude_60", math.pi / 3), ("latitude_90", math.pi / 2)]:
        angle, g = holonomy(math.tan(theta / 2))
        out.append({"path": name, "theta": theta, "angle": angle, "matrix": list(g)})
        print(name, angle, 2 * math.pi * (1 - math.cos(theta)), file=sys.stderr)
    target = Path(__file__).resolve().parent.parent / "crates/core/fixtures/oracles/sphere_latitudes.json"
    target.write_text(json.dumps({"steps": STEPS, "method": "rk4", "latitudes": out}, indent=2) + "\n")


if __name__ == "__main__":
    main()
