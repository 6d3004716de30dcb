"""Control schedules: which plan runs at iteration k, and coverage audits.

A schedule maps k to an :class:`~strav.gmsa.IterationPlan` and declares,
per input index n, a window bound M_n: every M_n consecutive iterations
must touch index n.  ``verify_admissible`` checks that promise exhaustively
over a finite horizon; it refuses to guess bounds that were not declared.
"""

from __future__ import annotations

import numpy as np

from .gmsa import IterationPlan, StepSpec

__all__ = [
    "f_value",
    "ControlSchedule",
    "ExplicitSchedule",
    "CyclicSchedule",
    "PowerOfTwoSchedule",
    "CustomSchedule",
    "AdmissibilityReport",
    "verify_admissible",
    "fit_check",
]


def f_value(i):
    """Largest v with 2^v dividing i + 1.

    The sequence 0, 1, 0, 2, 0, 1, 0, 3, ... visits every n >= 0 exactly
    once in each block of 2^{n+1} consecutive indices, which is what makes
    the power-of-two schedule cover an infinite family with finite windows.
    """
    i = int(i)
    if i < 0:
        raise ValueError(f"index must be a natural number, got {i}")
    v = i + 1
    return (v & -v).bit_length() - 1


def _normalize_bounds(bounds):
    if bounds is None:
        return lambda n: None
    if callable(bounds):
        return bounds
    table = {int(n): int(m) for n, m in dict(bounds).items()}
    return lambda n: table.get(int(n))


class ControlSchedule:
    """Base schedule; subclasses fill in ``plan_at``."""

    def plan_at(self, k):
        raise NotImplementedError

    def window_bound(self, n):
        """Declared window M_n for input index n, or None when unknown."""
        return None

    def plan_metadata(self):
        """(K, M) = (max step count, max step width) over all plans, or None."""
        return None


class ExplicitSchedule(ControlSchedule):
    """Finite list of plans; asking beyond the list is a horizon error."""

    def __init__(self, plans, window_bounds=None):
        self.plans = list(plans)
        if not self.plans:
            raise ValueError("explicit schedule needs at least one plan")
        self._bound = _normalize_bounds(window_bounds)

    def plan_at(self, k):
        k = int(k)
        if not 0 <= k < len(self.plans):
            raise ValueError(
                f"horizon-exceeded: plan {k} requested, schedule ends at {len(self.plans) - 1}"
            )
        return self.plans[k]

    def window_bound(self, n):
        return self._bound(n)

    def plan_metadata(self):
        return _metadata_from(self.plans)


class CyclicSchedule(ControlSchedule):
    """Template plans cycled: iteration k runs template ``k mod len``.

    Without an explicit declaration the window bound for any index used
    somewhere in the cycle defaults to the period, which is always sound.
    """

    def __init__(self, templates, window_bounds=None):
        self.templates = list(templates)
        if not self.templates:
            raise ValueError("cyclic schedule needs at least one template plan")
        self._bound = _normalize_bounds(window_bounds)
        self._covered = None

    def plan_at(self, k):
        k = int(k)
        return self.templates[k % len(self.templates)].replaced(k=k)

    def window_bound(self, n):
        declared = self._bound(n)
        if declared is not None:
            return declared
        if self._covered is None:
            self._covered = frozenset().union(
                *(t.output_indices() for t in self.templates)
            )
        return len(self.templates) if n in self._covered else None

    def plan_metadata(self):
        return _metadata_from(self.templates)

    @classmethod
    def over_indices(cls, indices, eps=1.0, alpha=1.0):
        """One relaxation step per index, cycled in the given order."""
        templates = [
            IterationPlan(k=i, N=1, eps=eps, steps=[StepSpec.relaxation(-int(n), alpha)])
            for i, n in enumerate(indices)
        ]
        return cls(templates)


class PowerOfTwoSchedule(ControlSchedule):
    """Iteration k relaxes the single input ``f_value(k)``; window M_n = 2^{n+1}."""

    def __init__(self, eps=1.0, alpha=1.0):
        if not 0.0 < eps <= 1.0:
            raise ValueError(f"eps must lie in (0, 1], got {eps}")
        self.eps = float(eps)
        self.alpha = float(alpha)

    def plan_at(self, k):
        return IterationPlan(
            k=int(k),
            N=1,
            eps=self.eps,
            steps=[StepSpec.relaxation(-f_value(k), self.alpha)],
        )

    def window_bound(self, n):
        return 2 ** (int(n) + 1)

    def plan_metadata(self):
        return (1, 1)


class CustomSchedule(ControlSchedule):
    """Arbitrary rule k -> plan; the caller declares window bounds and metadata."""

    def __init__(self, rule, window_bounds=None, metadata=None):
        self._rule = rule
        self._bound = _normalize_bounds(window_bounds)
        self._metadata = metadata

    def plan_at(self, k):
        return self._rule(int(k))

    def window_bound(self, n):
        return self._bound(n)

    def plan_metadata(self):
        return self._metadata


def _metadata_from(plans):
    K = max(p.N for p in plans)
    M = max(max(p.steps[n].P for n in range(1, p.N + 1)) for p in plans)
    return (K, M)


def uniform_modulus(schedule, eps):
    """``rho_uniform`` fed from the schedule's own (K, M) metadata."""
    from .gmsa import rho_uniform

    meta = schedule.plan_metadata()
    if meta is None:
        raise ValueError("schedule declares no (K, M) metadata; pass rho explicitly")
    K, M = meta
    return rho_uniform(K, M, eps)


class AdmissibilityReport:
    """Outcome of a finite-horizon window audit."""

    def __init__(self, passed, horizon, windows, violations):
        self.passed = passed
        self.horizon = horizon
        self.windows = windows  # {n: M_n actually used}
        self.violations = violations  # [(n, window start i)], first per index

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None

    def __str__(self):
        if self.passed:
            return f"admissible up to horizon {self.horizon} (exhaustive)"
        n, i = self.first_violation
        return f"index {n} missed by the window starting at {i} (horizon {self.horizon})"


def _window_audit(hit_sets, indices, bound_of, horizon):
    windows, violations = {}, []
    for n in sorted(int(n) for n in indices):
        M = bound_of(n)
        if M is None:
            raise ValueError(f"window bound for index {n} not declared; refusing to guess")
        M = int(M)
        if M < 1 or M - 1 > horizon:
            raise ValueError(f"window {M} for index {n} does not fit horizon {horizon}")
        windows[n] = M
        hits = np.fromiter((n in s for s in hit_sets), dtype=np.int64, count=len(hit_sets))
        cum = np.concatenate(([0], np.cumsum(hits)))
        counts = cum[M:] - cum[: len(hit_sets) - M + 1]  # one entry per window start
        miss = np.flatnonzero(counts == 0)
        if miss.size:
            violations.append((n, int(miss[0])))
    return AdmissibilityReport(not violations, horizon, windows, violations)


def verify_admissible(schedule, horizon, indices):
    """Exhaustively audit every full window of every requested index.

    For each n in ``indices`` and each window start i with
    ``i + M_n - 1 <= horizon``, the union of the plans' output index sets
    over the window must contain n.  All plans for k = 0..horizon are
    materialized and validated along the way.
    """
    horizon = int(horizon)
    if horizon < 0:
        raise ValueError("horizon must be a natural number")
    hit_sets = []
    for k in range(horizon + 1):
        plan = schedule.plan_at(k)
        hit_sets.append(plan.output_indices())
    return _window_audit(hit_sets, indices, schedule.window_bound, horizon)


def _stage_indices(stage):
    # a string stage (has .strings), or a bare iterable of index strings
    strings = getattr(stage, "strings", stage)
    out = set()
    for s in strings:
        out.update(int(i) for i in getattr(s, "indices", s))
    return frozenset(out)


def fit_check(stages, horizon, window_bounds, indices):
    """Window audit for string stages: per-k union of string images covers n.

    ``stages`` is a callable k -> stage or a sequence cycled over the
    horizon; a stage is anything with ``.strings`` (each with ``.indices``)
    or a bare iterable of index sequences.
    """
    horizon = int(horizon)
    if callable(stages):
        stage_at = stages
    else:
        seq = list(stages)
        stage_at = lambda k: seq[k % len(seq)]
    hit_sets = [_stage_indices(stage_at(k)) for k in range(horizon + 1)]
    return _window_audit(hit_sets, indices, _normalize_bounds(window_bounds), horizon)
