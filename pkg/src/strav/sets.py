"""Projectable convex sets and the lazily materialized input-operator family.

Every set variant carries an exact nearest-point rule.  ``project`` accepts
a single vector or a row-stacked batch and returns the same shape; a point
already inside comes back unchanged (bitwise for the polyhedral variants).
``distance`` is always the norm of ``x - project(x)`` so the two operations
can never disagree.
"""

from __future__ import annotations

import numpy as np

from .numeric import DEFAULT_TOL, as_vector, norm
from .operators import Identity, OperatorNode, Primitive

__all__ = [
    "ProjectableSet",
    "Halfspace",
    "Hyperplane",
    "Ball",
    "Box",
    "AffineSubspace",
    "OperatorFamily",
]


class ProjectableSet:
    """Base class: a nonempty closed convex subset of R^dim with exact projection."""

    dim = None

    def project(self, x):
        raise NotImplementedError

    def distance(self, x):
        x = np.asarray(x, dtype=float)
        return norm(x - self.project(x))

    def contains(self, x, tol=DEFAULT_TOL):
        return self.distance(x) <= tol.abs_eps

    def same_as(self, other):
        raise NotImplementedError

    def _check_dim(self, x):
        if x.shape[-1] != self.dim:
            raise ValueError(f"dim-mismatch: point of dimension {x.shape[-1]}, set of {self.dim}")


class Halfspace(ProjectableSet):
    """``{x : <a, x> <= b}`` with a != 0."""

    def __init__(self, a, b):
        self.a = as_vector(a)
        self.b = float(b)
        self._asq = float(self.a @ self.a)
        if self._asq == 0.0:
            raise ValueError("halfspace normal must be nonzero")
        self.dim = self.a.shape[0]

    def project(self, x):
        x = np.asarray(x, dtype=float)
        self._check_dim(x)
        excess = np.maximum(x @ self.a - self.b, 0.0)
        return x - (excess / self._asq)[..., None] * self.a

    def same_as(self, other):
        return (
            isinstance(other, Halfspace)
            and np.array_equal(self.a, other.a)
            and self.b == other.b
        )


class Hyperplane(ProjectableSet):
    """``{x : <a, x> = b}`` with a != 0."""

    def __init__(self, a, b):
        self.a = as_vector(a)
        self.b = float(b)
        self._asq = float(self.a @ self.a)
        if self._asq == 0.0:
            raise ValueError("hyperplane normal must be nonzero")
        self.dim = self.a.shape[0]

    def project(self, x):
        x = np.asarray(x, dtype=float)
        self._check_dim(x)
        offset = x @ self.a - self.b
        return x - (offset / self._asq)[..., None] * self.a

    def same_as(self, other):
        return (
            isinstance(other, Hyperplane)
            and np.array_equal(self.a, other.a)
            and self.b == other.b
        )


class Ball(ProjectableSet):
    """Closed Euclidean ball of positive radius."""

    def __init__(self, center, radius):
        self.center = as_vector(center)
        self.radius = float(radius)
        if self.radius <= 0.0:
            raise ValueError("ball radius must be positive")
        self.dim = self.center.shape[0]

    def project(self, x):
        x = np.asarray(x, dtype=float)
        self._check_dim(x)
        diff = x - self.center
        dist = norm(diff)
        outside = dist > self.radius
        safe = np.where(dist == 0.0, 1.0, dist)
        pulled = self.center + (self.radius / safe)[..., None] * diff
        return np.where(np.asarray(outside)[..., None], pulled, x)

    def same_as(self, other):
        return (
            isinstance(other, Ball)
            and np.array_equal(self.center, other.center)
            and self.radius == other.radius
        )


class Box(ProjectableSet):
    """Coordinate box ``{x : lo <= x <= hi}``."""

    def __init__(self, lo, hi):
        self.lo = as_vector(lo)
        self.hi = as_vector(hi, self.lo.shape[0])
        if np.any(self.lo > self.hi):
            raise ValueError("box needs lo <= hi coordinatewise")
        self.dim = self.lo.shape[0]

    def project(self, x):
        x = np.asarray(x, dtype=float)
        self._check_dim(x)
        return np.clip(x, self.lo, self.hi)

    def same_as(self, other):
        return (
            isinstance(other, Box)
            and np.array_equal(self.lo, other.lo)
            and np.array_equal(self.hi, other.hi)
        )


class AffineSubspace(ProjectableSet):
    """``offset + span(basis)`` for an orthonormal basis, given row-wise."""

    def __init__(self, basis, offset, tol=DEFAULT_TOL):
        basis = np.asarray(basis, dtype=float)
        if basis.ndim != 2 or basis.size == 0:
            raise ValueError("basis must be a nonempty 2-D array of row vectors")
        gram = basis @ basis.T
        if np.max(np.abs(gram - np.eye(basis.shape[0]))) > tol.abs_eps:
            raise ValueError("basis rows must be orthonormal")
        self.basis = basis
        self.offset = as_vector(offset, basis.shape[1])
        self.dim = basis.shape[1]

    def project(self, x):
        x = np.asarray(x, dtype=float)
        self._check_dim(x)
        shifted = x - self.offset
        return self.offset + (shifted @ self.basis.T) @ self.basis

    def same_as(self, other):
        return (
            isinstance(other, AffineSubspace)
            and np.array_equal(self.basis, other.basis)
            and np.array_equal(self.offset, other.offset)
        )


class OperatorFamily:
    """Lazily materialized, memoized family ``n -> U_n`` of input operators.

    Parameters
    ----------
    generator : callable
        Maps a natural number to either a :class:`ProjectableSet` (wrapped
        as a relaxed projection) or a prebuilt :class:`~strav.operators.OperatorNode`.
    witness : array_like
        Declared common point.  Materializing index n spot-checks that the
        witness is fixed by U_n within ``tol.abs_eps``; a violation is a
        construction error, not a silent degradation.
    gammas : float or callable, optional
        Per-index projection relaxation (default 1.0); ignored for indices
        whose generator already returns an operator node.

    Two concurrent materializations of the same index are harmless: the
    memo insert is idempotent and nodes are immutable.
    """

    def __init__(self, generator, witness, *, gammas=None, tol=DEFAULT_TOL):
        self._generator = generator
        self.witness = as_vector(witness)
        self.dim = self.witness.shape[0]
        self._gammas = gammas
        self._tol = tol
        self._ops = {}

    def gamma(self, n):
        if self._gammas is None:
            return 1.0
        if callable(self._gammas):
            return float(self._gammas(n))
        return float(self._gammas)

    def operator(self, n):
        """Materialize (once) and return the input operator U_n."""
        n = int(n)
        if n < 0:
            raise ValueError(f"family-error: operator index must be a natural number, got {n}")
        node = self._ops.get(n)
        if node is not None:
            return node
        try:
            raw = self._generator(n)
        except Exception as exc:
            raise ValueError(f"family-error: generator failed at index {n}: {exc}") from exc
        if isinstance(raw, OperatorNode):
            node = raw
        elif isinstance(raw, ProjectableSet):
            node = Primitive(raw, gamma=self.gamma(n))
        else:
            raise ValueError(
                f"family-error: generator returned {type(raw).__name__} at index {n}"
            )
        if node.dim is not None and node.dim != self.dim:
            raise ValueError(
                f"family-error: operator {n} has dimension {node.dim}, family has {self.dim}"
            )
        rz = float(node.residual(self.witness))
        if rz > self._tol.abs_eps:
            raise ValueError(
                f"family-error: declared common point not fixed by operator {n} (residual {rz:.3e})"
            )
        self._ops.setdefault(n, node)
        return self._ops[n]

    def set_for(self, n):
        """The projectable set behind index n, if the operator is projection-backed."""
        op = self.operator(n)
        if isinstance(op, Primitive):
            return op.set
        raise ValueError(f"family-error: index {n} is not backed by a projectable set")

    def distance(self, n, x):
        """Distance from x to the n-th set (0 for an identity pad)."""
        op = self.operator(n)
        if isinstance(op, Primitive):
            return op.set.distance(x)
        if isinstance(op, Identity):
            x = np.asarray(x, dtype=float)
            return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0
        raise ValueError(f"family-error: no set distance available for index {n}")

    @property
    def materialized(self):
        return sorted(self._ops)

    def check_common_point(self, z, tol=None):
        """Max residual of z over all materialized operators vs the slack."""
        tol = tol or self._tol
        z = as_vector(z, self.dim)
        worst = 0.0
        for n in self.materialized:
            worst = max(worst, float(self._ops[n].residual(z)))
        return worst <= tol.abs_eps

    @classmethod
    def from_sets(cls, sets, witness, *, gammas=None, tol=DEFAULT_TOL):
        """Finite family over an explicit list of sets (or operator nodes)."""
        sets = list(sets)

        def generator(n):
            if n >= len(sets):
                raise IndexError(f"finite family of size {len(sets)} has no index {n}")
            return sets[n]

        fam = cls(generator, witness, gammas=gammas, tol=tol)
        fam.size = len(sets)
        return fam
