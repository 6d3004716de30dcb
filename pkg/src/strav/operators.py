"""Operator trees with a confidence calculus for contraction-type moduli.

A node is one of five kinds: a relaxed metric projection onto a convex set
(``Primitive``), the identity, a relaxation of a child, a convex
combination of children, or a composition applied left to right.  Nodes
are immutable; the quantitative constants below are derived once at
construction and never recomputed.

Constants attached to a node
----------------------------
``sqne_rho``
    The node T satisfies ``||T(x)-z||^2 <= ||x-z||^2 - rho*||T(x)-x||^2``
    for every fixed point z of T, with ``rho = sqne_rho``.  ``None`` means
    the calculus gives no guarantee.
``fne_rho``
    The node satisfies the two-point strengthening
    ``||T(x)-T(y)||^2 <= ||x-y||^2 - rho*||(x-T(x))-(y-T(y))||^2``.
``is_cutter``
    Every fixed point z obeys ``<z - T(x), x - T(x)> <= 0``; equivalent to
    ``sqne_rho >= 1``.
``is_nonexpansive``
    Plain Lipschitz-1 guarantee.

The identity carries ``+inf`` for both constants (it satisfies the
inequalities for every rho) and is skipped when counting composition or
combination factors, so padding a tree with identities never degrades a
derived modulus.

Derivation rules
----------------
* projection with relaxation ``gamma`` in (0, 4/3]: both constants equal
  ``(2-gamma)/gamma``;
* ``alpha``-relaxation of a child with constant ``rho``: ``(1+rho-alpha)/alpha``
  for ``alpha`` in (0, 1+rho], no guarantee beyond;
* convex combination: minimum over non-identity children;
* composition of m non-identity children: minimum over them divided by m.

Where both the direct rule and the two-point route apply, ``sqne_rho``
takes the larger certified value, so ``fne_rho`` set implies ``sqne_rho``
set with ``sqne_rho >= fne_rho``.

The sampling checkers at the bottom probe these inequalities empirically
on seeded points and report the worst violation found.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numeric import DEFAULT_TOL, as_vector, norm

__all__ = [
    "OperatorNode",
    "Primitive",
    "Identity",
    "Relaxation",
    "ConvexComb",
    "Composition",
    "structurally_equal",
    "SampleBudget",
    "CheckReport",
    "check_sqne",
    "check_fne",
    "check_nonexpansive",
]


def _relaxed_constant(rho, alpha):
    # alpha-relaxation of a child carrying constant rho; alpha = 0 is the
    # identity, and the rule is only valid up to alpha = 1 + rho.
    if alpha == 0.0:
        return math.inf
    if rho is None:
        return None
    if alpha <= 1.0 + rho:
        return (1.0 + rho - alpha) / alpha
    return None


def _best(*values):
    known = [v for v in values if v is not None]
    return max(known) if known else None


def _min_over(values):
    # None propagates: a single unknown child voids the guarantee.
    out = math.inf
    for v in values:
        if v is None:
            return None
        out = min(out, v)
    return out


class OperatorNode:
    """Abstract immutable operator; concrete kinds derive the constants."""

    kind = "abstract"

    sqne_rho = None
    fne_rho = None
    is_cutter = False
    is_nonexpansive = False
    dim = None

    def apply(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.apply(x)

    def residual(self, x):
        """Norm of ``T(x) - x`` along the last axis."""
        x = np.asarray(x, dtype=float)
        return norm(self.apply(x) - x)

    def children(self):
        return ()

    def __repr__(self):
        return f"<{type(self).__name__} sqne={self.sqne_rho} fne={self.fne_rho}>"


class Primitive(OperatorNode):
    """Relaxed metric projection ``x + gamma*(P_C(x) - x)`` onto a convex set.

    Parameters
    ----------
    set_ : ProjectableSet
        Target set; only its ``project`` method and ``dim`` are used.
    gamma : float
        Relaxation in (0, 4/3].  gamma = 1 is the plain projection.
    """

    kind = "primitive"

    def __init__(self, set_, gamma=1.0):
        gamma = float(gamma)
        if not 0.0 < gamma <= 4.0 / 3.0:
            raise ValueError(f"gamma must lie in (0, 4/3], got {gamma}")
        rho = (2.0 - gamma) / gamma
        self.set = set_
        self.gamma = gamma
        self.dim = set_.dim
        self.sqne_rho = rho
        self.fne_rho = rho
        self.is_cutter = gamma <= 1.0
        self.is_nonexpansive = True

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        p = self.set.project(x)
        if self.gamma == 1.0:
            return p
        return x + self.gamma * (p - x)


class Identity(OperatorNode):
    """The identity; fixed by everything, inert in every derivation."""

    kind = "identity"

    def __init__(self, dim=None):
        self.dim = dim
        self.sqne_rho = math.inf
        self.fne_rho = math.inf
        self.is_cutter = True
        self.is_nonexpansive = True

    def apply(self, x):
        return np.asarray(x, dtype=float)


class Relaxation(OperatorNode):
    """``x + alpha*(child(x) - x)`` for ``alpha`` in [0, 2].

    Fixed points of the child are preserved for every alpha > 0; alpha = 2
    is the reflection.
    """

    kind = "relaxation"

    def __init__(self, child, alpha):
        alpha = float(alpha)
        if not 0.0 <= alpha <= 2.0:
            raise ValueError(f"relaxation parameter must lie in [0, 2], got {alpha}")
        self.child = child
        self.alpha = alpha
        self.dim = child.dim
        direct = _relaxed_constant(child.sqne_rho, alpha)
        two_point = _relaxed_constant(child.fne_rho, alpha)
        self.fne_rho = two_point
        self.sqne_rho = _best(direct, two_point)
        self.is_nonexpansive = (two_point is not None) or (
            child.is_nonexpansive and alpha <= 1.0
        )
        self.is_cutter = self.sqne_rho is not None and self.sqne_rho >= 1.0

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if self.alpha == 0.0:
            return x
        if self.alpha == 1.0:
            return self.child.apply(x)
        return x + self.alpha * (self.child.apply(x) - x)

    def children(self):
        return (self.child,)


def _common_dim(children):
    dims = {c.dim for c in children if c.dim is not None}
    if len(dims) > 1:
        raise ValueError(f"dim-mismatch: children of dimensions {sorted(dims)}")
    return dims.pop() if dims else None


class ConvexComb(OperatorNode):
    """Weighted average ``sum_j w_j * child_j(x)`` with positive weights summing to 1."""

    kind = "convex_comb"

    def __init__(self, children, weights, *, tol=DEFAULT_TOL):
        children = tuple(children)
        weights = tuple(float(w) for w in weights)
        if not children:
            raise ValueError("convex combination needs at least one child")
        if len(children) != len(weights):
            raise ValueError("one weight per child required")
        if any(w <= 0.0 or w > 1.0 for w in weights):
            raise ValueError("weights must lie in (0, 1]")
        if abs(sum(weights) - 1.0) > tol.abs_eps:
            raise ValueError(f"weights must sum to 1, got {sum(weights)}")
        self.children_ = children
        self.weights = weights
        self.dim = _common_dim(children)
        active = [c for c in children if c.kind != "identity"]
        self.sqne_rho = _best(
            _min_over(c.sqne_rho for c in active),
            _min_over(c.fne_rho for c in active),
        )
        self.fne_rho = _min_over(c.fne_rho for c in active)
        self.is_nonexpansive = all(c.is_nonexpansive for c in children)
        self.is_cutter = self.sqne_rho is not None and self.sqne_rho >= 1.0

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        out = self.weights[0] * self.children_[0].apply(x)
        for w, child in zip(self.weights[1:], self.children_[1:]):
            out = out + w * child.apply(x)
        return out

    def children(self):
        return self.children_


class Composition(OperatorNode):
    """Composition of children applied left to right (first listed, first applied)."""

    kind = "composition"

    def __init__(self, children):
        children = tuple(children)
        if not children:
            raise ValueError("composition needs at least one child")
        self.children_ = children
        self.dim = _common_dim(children)
        active = [c for c in children if c.kind != "identity"]
        m = len(active)
        if m == 0:
            self.sqne_rho = math.inf
            self.fne_rho = math.inf
        else:
            sqne = _best(
                _min_over(c.sqne_rho for c in active),
                _min_over(c.fne_rho for c in active),
            )
            fne = _min_over(c.fne_rho for c in active)
            self.sqne_rho = None if sqne is None else sqne / m
            self.fne_rho = None if fne is None else fne / m
        self.is_nonexpansive = all(c.is_nonexpansive for c in children)
        self.is_cutter = self.sqne_rho is not None and self.sqne_rho >= 1.0

    def apply(self, x):
        out = np.asarray(x, dtype=float)
        for child in self.children_:
            out = child.apply(out)
        return out

    def children(self):
        return self.children_


def structurally_equal(a, b):
    """True when two trees have the same shape and parameters, leaves included."""
    if a.kind != b.kind:
        return False
    if a.kind == "primitive":
        return a.gamma == b.gamma and a.set.same_as(b.set)
    if a.kind == "identity":
        return True
    if a.kind == "relaxation":
        return a.alpha == b.alpha and structurally_equal(a.child, b.child)
    if a.kind == "convex_comb":
        return (
            a.weights == b.weights
            and len(a.children_) == len(b.children_)
            and all(structurally_equal(u, v) for u, v in zip(a.children_, b.children_))
        )
    if a.kind == "composition":
        return len(a.children_) == len(b.children_) and all(
            structurally_equal(u, v) for u, v in zip(a.children_, b.children_)
        )
    return False


# ---------------------------------------------------------------------------
# sampling checkers


@dataclass(frozen=True)
class SampleBudget:
    """How much random probing a checker may spend.

    ``radius`` bounds the sampling ball around the anchor point (the
    declared fixed point for the one-point check, a caller-supplied center
    otherwise).
    """

    count: int = 500
    seed: int = 0
    radius: float = 2.0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("sample count must be positive")
        if self.radius <= 0.0:
            raise ValueError("sampling radius must be positive")


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one empirical inequality check."""

    name: str
    passed: bool
    max_violation: float
    samples: int
    worst: tuple | None = None

    def __str__(self):
        verdict = "pass" if self.passed else "FAIL"
        return f"{self.name}: {verdict} (max violation {self.max_violation:.3e}, {self.samples} samples)"


def _ball_samples(rng, center, radius, count):
    d = center.shape[0]
    g = rng.standard_normal((count, d))
    lengths = np.linalg.norm(g, axis=1)
    lengths[lengths == 0.0] = 1.0
    radii = radius * rng.random(count) ** (1.0 / d)
    return center + (g / lengths[:, None]) * radii[:, None]


def _resolve_center(node, center):
    if center is not None:
        return as_vector(center, node.dim)
    if node.dim is None:
        raise ValueError("node has no intrinsic dimension; pass an explicit center")
    return np.zeros(node.dim)


def check_sqne(node, rho, z, budget=SampleBudget(), tol=DEFAULT_TOL):
    """Probe the one-point inequality at modulus ``rho`` around fixed point ``z``.

    ``z`` must actually be fixed by the node (within ``tol.abs_eps``);
    otherwise the check is vacuous and a ``witness-not-fixed`` error is
    raised instead of reporting anything.
    """
    z = as_vector(z, node.dim)
    rz = float(node.residual(z))
    if rz > tol.abs_eps:
        raise ValueError(f"witness-not-fixed: residual {rz:.3e} at the declared fixed point")
    rng = np.random.default_rng(budget.seed)
    xs = _ball_samples(rng, z, budget.radius, budget.count)
    tx = node.apply(xs)
    viol = norm(tx - z) ** 2 - norm(xs - z) ** 2 + float(rho) * norm(tx - xs) ** 2
    worst = int(np.argmax(viol))
    max_v = float(viol[worst])
    return CheckReport(
        name=f"sqne(rho={rho})",
        passed=max_v <= tol.abs_eps,
        max_violation=max_v,
        samples=budget.count,
        worst=(xs[worst].copy(),) if max_v > tol.abs_eps else None,
    )


def check_fne(node, rho, budget=SampleBudget(), tol=DEFAULT_TOL, center=None):
    """Probe the two-point inequality at modulus ``rho`` on sampled pairs."""
    c = _resolve_center(node, center)
    rng = np.random.default_rng(budget.seed)
    pts = _ball_samples(rng, c, budget.radius, 2 * budget.count)
    xs, ys = pts[: budget.count], pts[budget.count :]
    tx, ty = node.apply(xs), node.apply(ys)
    viol = (
        norm(tx - ty) ** 2
        - norm(xs - ys) ** 2
        + float(rho) * norm((xs - tx) - (ys - ty)) ** 2
    )
    worst = int(np.argmax(viol))
    max_v = float(viol[worst])
    return CheckReport(
        name=f"fne(rho={rho})",
        passed=max_v <= tol.abs_eps,
        max_violation=max_v,
        samples=budget.count,
        worst=(xs[worst].copy(), ys[worst].copy()) if max_v > tol.abs_eps else None,
    )


def check_nonexpansive(node, budget=SampleBudget(), tol=DEFAULT_TOL, center=None):
    """Probe plain Lipschitz-1 behavior on sampled pairs."""
    c = _resolve_center(node, center)
    rng = np.random.default_rng(budget.seed)
    pts = _ball_samples(rng, c, budget.radius, 2 * budget.count)
    xs, ys = pts[: budget.count], pts[budget.count :]
    viol = norm(node.apply(xs) - node.apply(ys)) - norm(xs - ys)
    worst = int(np.argmax(viol))
    max_v = float(viol[worst])
    return CheckReport(
        name="nonexpansive",
        passed=max_v <= tol.abs_eps,
        max_violation=max_v,
        samples=budget.count,
        worst=(xs[worst].copy(), ys[worst].copy()) if max_v > tol.abs_eps else None,
    )
