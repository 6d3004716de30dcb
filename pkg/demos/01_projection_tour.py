"""Tour of the metric projections behind the input operators.

Each block builds one constraint set, projects a couple of points and
verifies the variational characterization of the projection: for every
feasible c the angle condition <x - Px, c - Px> <= 0 must hold.
"""

import numpy as np

from strav.sets import AffineSubspace, Ball, Box, Halfspace, Hyperplane


def show(name, S, points, feasible):
    print(f"\n{name}")
    for x in points:
        p = S.project(x)
        gap = float((x - p) @ (feasible - p))
        print(
            f"  x = {np.round(x, 3)}  ->  Px = {np.round(p, 6)}"
            f"   dist = {S.distance(x):.6f}   angle term = {gap:+.2e}"
        )
        assert gap <= 1e-12


def main():
    rng = np.random.default_rng(0)
    pts = [rng.uniform(-2.0, 2.0, size=3) for _ in range(3)]

    show("halfspace x0 + x1 <= 1", Halfspace([1.0, 1.0, 0.0], 1.0), pts, np.zeros(3))
    show("hyperplane x2 = 0.5", Hyperplane([0.0, 0.0, 1.0], 0.5), pts, np.array([0.0, 0.0, 0.5]))
    show("ball of radius 1 at the origin", Ball(np.zeros(3), 1.0), pts, np.zeros(3))
    show("unit box", Box(np.zeros(3), np.ones(3)), pts, 0.5 * np.ones(3))
    show(
        "line through the origin along e0",
        AffineSubspace([[1.0, 0.0, 0.0]], np.zeros(3)),
        pts,
        np.array([0.7, 0.0, 0.0]),
    )

    print("\nevery projection satisfied the angle condition")


if __name__ == "__main__":
    main()
