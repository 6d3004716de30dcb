"""Relaxed fixed-point drivers, plain and perturbed, with trace audits.

One private kernel runs the recurrence

    x^{k+1} = u^k + lambda_k * (T_k(u^k) - u^k),      u^k = x^k + beta_k v^k,

where T_k is the k-th plan's output operator and the perturbation term is
optional (u^k = x^k exactly when beta_k = 0).  The plain, perturbed, and
superiorized entry points all share this kernel, so reductions between
them hold bitwise, not just to rounding.

Scalar diagnostics (residual, step, witness distance, monotonicity slack,
per-set distances) are recorded every iteration; full iterates are thinned
by ``record_stride`` to bound memory, with the final iterate always kept.
"""

from __future__ import annotations

import inspect
from dataclasses import dataclass

import numpy as np

from .gmsa import output_operator
from .numeric import DEFAULT_TOL, as_vector, norm

__all__ = [
    "RelaxationSchedule",
    "PerturbationSchedule",
    "StopRule",
    "Trace",
    "run",
    "run_perturbed",
    "FejerReport",
    "check_fejer",
    "ConvergenceReport",
    "convergence_report",
]

_SLACK = 1e-12


class RelaxationSchedule:
    """Step sizes lambda_k kept inside the certified interval.

    The monotonicity theory needs ``lambda_k in [eps, 1 + rho - eps]`` for a
    uniform modulus ``rho`` of the plan outputs; every value the rule emits
    is checked against that interval at use.  ``permissive=True`` widens
    the interval to ``[eps, 2 - eps]`` and zeroes the strong-monotonicity
    constant, since no quantitative guarantee survives out there.
    """

    def __init__(self, rule, eps, rho, *, permissive=False):
        eps, rho = float(eps), float(rho)
        if not 0.0 < eps <= 1.0:
            raise ValueError(f"eps must lie in (0, 1], got {eps}")
        if rho < 0.0:
            raise ValueError(f"rho must be nonnegative, got {rho}")
        if not permissive and eps > (1.0 + rho) / 2.0 + _SLACK:
            raise ValueError(
                f"empty step range: eps={eps} exceeds (1 + rho)/2 with rho={rho}"
            )
        self.eps = eps
        self.rho = rho
        self.permissive = bool(permissive)
        self._rule = rule if callable(rule) else (lambda k, v=float(rule): v)
        self.lo = eps
        self.hi = (2.0 - eps) if permissive else (1.0 + rho - eps)

    def lam(self, k):
        v = float(self._rule(int(k)))
        if not self.lo - _SLACK <= v <= self.hi + _SLACK:
            raise ValueError(
                f"step size {v} at iteration {k} outside [{self.lo}, {self.hi}]"
            )
        return v

    @property
    def fejer_constant(self):
        """Strong-monotonicity constant eps/(1 + rho - eps); 0 in permissive mode."""
        if self.permissive:
            return 0.0
        return self.eps / (1.0 + self.rho - self.eps)

    @classmethod
    def constant(cls, value, eps, rho, **kw):
        return cls(float(value), eps, rho, **kw)

    @classmethod
    def cycle(cls, values, eps, rho, **kw):
        vals = [float(v) for v in values]
        return cls(lambda k: vals[k % len(vals)], eps, rho, **kw)

    @classmethod
    def sweep(cls, eps, rho, points=17, **kw):
        """Cycle a uniform grid over the whole admissible interval."""
        lo = eps
        hi = (2.0 - eps) if kw.get("permissive") else (1.0 + rho - eps)
        pts = [lo + (hi - lo) * i / (points - 1) for i in range(points)]
        return cls(lambda k: pts[k % len(pts)], eps, rho, **kw)


class PerturbationSchedule:
    """Summable magnitudes beta_k paired with unit-ball directions.

    ``direction`` may take ``(k)`` or ``(k, x)``; the two-argument form
    lets adversarial rules react to the current iterate.  Direction norms
    are clamped-checked at use (<= 1 within slack).
    """

    def __init__(self, beta, direction, *, tol=DEFAULT_TOL):
        self._beta = beta
        self._tol = tol
        try:
            n_params = len(inspect.signature(direction).parameters)
        except (TypeError, ValueError):
            n_params = 1
        if n_params >= 2:
            self._direction = direction
        else:
            self._direction = lambda k, x: direction(k)

    def at(self, k, x):
        b = float(self._beta(int(k)))
        if b < 0.0:
            raise ValueError(f"perturbation magnitude must be nonnegative, got {b} at k={k}")
        v = np.asarray(self._direction(int(k), x), dtype=float)
        nv = float(norm(v))
        if nv > 1.0 + self._tol.abs_eps:
            raise ValueError(f"direction norm {nv} exceeds 1 at k={k}")
        return b, v

    @classmethod
    def power(cls, c, p, direction, **kw):
        """beta_k = c / (k+1)^p with p > 1 (summable); c = 0 is the unperturbed limit."""
        c, p = float(c), float(p)
        if c < 0.0:
            raise ValueError("magnitude scale must be nonnegative")
        if c > 0.0 and p <= 1.0:
            raise ValueError(f"exponent must exceed 1 for a summable series, got {p}")
        return cls(lambda k: c / (k + 1) ** p, direction, **kw)

    @classmethod
    def from_lists(cls, betas, vectors, **kw):
        """Replay recorded (beta_k, v^k) pairs verbatim."""
        betas = [float(b) for b in betas]
        vectors = [np.asarray(v, dtype=float) for v in vectors]

        def beta(k):
            return betas[k] if k < len(betas) else 0.0

        def direction(k, x):
            return vectors[k] if k < len(vectors) else np.zeros_like(x)

        return cls(beta, direction, **kw)


def constant_direction(v):
    v = as_vector(v)
    return lambda k, x: v


def away_from(z):
    """Unit direction pointing from the current iterate away from ``z``."""
    z = as_vector(z)

    def direction(k, x):
        d = np.asarray(x, dtype=float) - z
        n = float(norm(d))
        return d / n if n > 0.0 else np.zeros_like(d)

    return direction


def random_unit_directions(dim, seed):
    rng = np.random.default_rng(seed)

    def direction(k, x):
        g = rng.standard_normal(dim)
        n = float(np.linalg.norm(g))
        return g / n if n > 0.0 else g

    return direction


@dataclass(frozen=True)
class StopRule:
    """First criterion to fire wins; ``None`` disables a criterion."""

    max_iters: int = 100_000
    residual_tol: float | None = 1e-10
    step_tol: float | None = 1e-12

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("iteration cap must be nonnegative")


class Trace:
    """Complete record of one driver run.

    Rows cover iterates 0..K (K updates executed); the final row carries
    step = slack = 0 since no update follows it.  ``residual[k]`` is
    ``||T_k(u^k) - u^k||`` at the k-th input point (perturbed if a
    perturbation was applied), ``dist_witness[k] = ||x^k - z||``, and
    ``fejer_slack[k]`` is the strong-monotonicity surplus at the run's own
    constant.  ``pert_betas``/``pert_vectors`` hold the aggregate
    perturbations actually applied, for bitwise replay.
    """

    def __init__(self, **fields):
        self.__dict__.update(fields)

    @property
    def n_rows(self):
        return len(self.residual)

    @property
    def final_x(self):
        return self.xs[-1]

    def csv_header(self):
        cols = ["k", "residual", "step", "dist_witness", "fejer_slack"]
        cols += [f"d{i}" for i in range(len(self.monitored))]
        if self.phi is not None:
            cols.append("phi")
        if self.pert_mag is not None:
            cols.append("pert_mag")
        return ",".join(cols)

    def to_csv(self, path):
        """Write the scalar diagnostics, one row per iterate, full precision."""
        lines = [self.csv_header()]
        for k in range(self.n_rows):
            row = [
                str(k),
                repr(float(self.residual[k])),
                repr(float(self.step[k])),
                repr(float(self.dist_witness[k])),
                repr(float(self.fejer_slack[k])),
            ]
            for j in range(len(self.monitored)):
                row.append(repr(float(self.set_distances[k, j])))
            if self.phi is not None:
                row.append(repr(float(self.phi[k])))
            if self.pert_mag is not None:
                row.append(repr(float(self.pert_mag[k])))
            lines.append(",".join(row))
        text = "\n".join(lines) + "\n"
        if hasattr(path, "write"):
            path.write(text)
        else:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _drive(
    family,
    schedule,
    relax,
    x0,
    stop,
    *,
    pert=None,
    objective=None,
    monitored=(),
    record_stride=1,
):
    record_stride = int(record_stride)
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    x = as_vector(x0, family.dim)
    z = family.witness
    c_fejer = relax.fejer_constant
    monitored = tuple(int(n) for n in monitored)

    residual, step, dist_w, slack = [], [], [], []
    dists, phis, mags = [], [], []
    betas_log, vecs_log = [], []
    xs, xs_k = [], []

    pending = None
    reason = None
    k = 0
    while True:
        plan = schedule.plan_at(k)
        T = output_operator(plan, family)
        if pert is not None:
            b, v = pert(k, x)
            betas_log.append(b)
            vecs_log.append(np.array(v, dtype=float))
            if b != 0.0:
                p = b * v
                u = x + p
                mag = float(norm(p))
            else:
                u = x
                mag = 0.0
            mags.append(mag)
        else:
            u = x
        tu = T.apply(u)
        res = float(norm(tu - u))
        if not np.all(np.isfinite(tu)):
            raise ValueError(f"numerical-divergence: non-finite iterate at k={k}")

        residual.append(res)
        dist_w.append(float(norm(x - z)))
        if monitored:
            dists.append([float(family.distance(n, x)) for n in monitored])
        if objective is not None:
            phis.append(float(objective.value(x)))
        if k % record_stride == 0:
            xs.append(x.copy())
            xs_k.append(k)

        if pending is not None:
            reason = pending
        elif stop.residual_tol is not None and res <= stop.residual_tol:
            reason = "residual"
        elif k >= stop.max_iters:
            reason = "max_iters"
        if reason is not None:
            step.append(0.0)
            slack.append(0.0)
            break

        lam = relax.lam(k)
        x_next = tu if lam == 1.0 else u + lam * (tu - u)
        st = float(norm(x_next - x))
        slack.append(dist_w[-1] ** 2 - float(norm(x_next - z)) ** 2 - c_fejer * st**2)
        step.append(st)
        x = x_next
        k += 1
        if stop.step_tol is not None and st <= stop.step_tol:
            pending = "step"

    if not xs_k or xs_k[-1] != k:
        xs.append(x.copy())
        xs_k.append(k)

    return Trace(
        n_updates=k,
        stop_reason=reason,
        residual=np.asarray(residual),
        step=np.asarray(step),
        dist_witness=np.asarray(dist_w),
        fejer_slack=np.asarray(slack),
        set_distances=np.asarray(dists) if monitored else np.zeros((k + 1, 0)),
        monitored=monitored,
        phi=np.asarray(phis) if objective is not None else None,
        pert_mag=np.asarray(mags) if pert is not None else None,
        pert_betas=betas_log if pert is not None else None,
        pert_vectors=vecs_log if pert is not None else None,
        xs=np.asarray(xs),
        xs_k=np.asarray(xs_k),
        witness=z.copy(),
        fejer_constant=c_fejer,
        eps=relax.eps,
        rho=relax.rho,
        record_stride=record_stride,
        family=family,
    )


def run(family, schedule, relax, x0, stop=StopRule(), *, monitored=(), record_stride=1):
    """Plain driver: x^{k+1} = x^k + lambda_k (T_k(x^k) - x^k).

    Parameters
    ----------
    family : OperatorFamily
        Input operators with their declared common point.
    schedule : ControlSchedule
        Supplies the per-iteration plan.
    relax : RelaxationSchedule
        Step sizes, validated against the certified interval.
    x0 : array_like
        Starting point.
    stop : StopRule
        Cap / residual / step criteria; first hit wins.
    monitored : iterable of int
        Set indices whose distances are recorded every iteration.
    record_stride : int
        Keep every stride-th full iterate (final always kept).

    Returns
    -------
    Trace
    """
    return _drive(
        family, schedule, relax, x0, stop, monitored=monitored, record_stride=record_stride
    )


def run_perturbed(
    family, schedule, relax, perturb, y0, stop=StopRule(), *, monitored=(), record_stride=1
):
    """Perturbation-resilient variant: each update starts from y^k + beta_k v^k.

    The k-th update applies the lambda_k-relaxation of T_k to the perturbed
    point; with beta identically 0 the arithmetic path is the plain run's,
    so the traces agree bitwise.
    """
    return _drive(
        family,
        schedule,
        relax,
        y0,
        stop,
        pert=perturb.at,
        monitored=monitored,
        record_stride=record_stride,
    )


@dataclass
class FejerReport:
    """Monotonicity audit at a caller-chosen constant."""

    passed: bool
    constant: float
    max_violation: float
    first_violating_k: int | None
    checked: int

    def __str__(self):
        verdict = "pass" if self.passed else "FAIL"
        return (
            f"fejer(c={self.constant:.6g}): {verdict} "
            f"(max violation {self.max_violation:.3e} over {self.checked} steps)"
        )


def check_fejer(trace, z, constant, tol=DEFAULT_TOL):
    """Audit ``||x^{k+1}-z||^2 <= ||x^k-z||^2 - c * ||x^{k+1}-x^k||^2`` on a trace.

    ``z`` must be fixed by every operator materialized during the run.  For
    the run's own witness the stored per-iteration scalars suffice; any
    other z needs a stride-1 trace (full iterates).
    """
    z = as_vector(z, trace.witness.shape[0])
    if not trace.family.check_common_point(z, tol):
        raise ValueError("witness-not-fixed: z is not fixed by the materialized operators")
    K = trace.n_updates
    if np.array_equal(z, trace.witness):
        d = trace.dist_witness
    else:
        if trace.record_stride != 1:
            raise ValueError("full iterates unavailable (record_stride > 1); rerun with stride 1")
        d = norm(trace.xs - z)
    steps = trace.step[:K]
    slack = d[:K] ** 2 - d[1 : K + 1] ** 2 - float(constant) * steps**2
    if K == 0:
        return FejerReport(True, float(constant), 0.0, None, 0)
    viol = -slack
    worst = int(np.argmax(viol))
    max_v = float(viol[worst])
    bad = np.flatnonzero(viol > tol.abs_eps)
    return FejerReport(
        passed=bad.size == 0,
        constant=float(constant),
        max_violation=max_v,
        first_violating_k=int(bad[0]) if bad.size else None,
        checked=K,
    )


@dataclass
class ConvergenceReport:
    """Post-run summary: where the final iterate stands and how the tail behaved."""

    stop_reason: str
    iterations: int
    final_residual: float
    final_distances: dict
    max_distance: float
    final_step: float
    tail_decreasing: bool | None
    cauchy_tail: float

    def lines(self):
        out = [
            f"stop_reason: {self.stop_reason}",
            f"iterations: {self.iterations}",
            f"final_residual: {self.final_residual:.6e}",
            f"max_monitored_distance: {self.max_distance:.6e}",
            f"final_step: {self.final_step:.6e}",
            f"tail_decreasing: {self.tail_decreasing}",
            f"cauchy_tail: {self.cauchy_tail:.6e}",
        ]
        return out


def convergence_report(trace, family, monitored, tol=DEFAULT_TOL):
    """Distances of the final iterate plus step-tail diagnostics.

    The Cauchy tail is the summed step norm over the last quarter of the
    run, an upper bound on how far the iterate can still have moved there.
    """
    xK = trace.final_x
    finals = {int(n): float(family.distance(int(n), xK)) for n in monitored}
    max_d = max(finals.values()) if finals else 0.0
    K = trace.n_updates
    steps = trace.step[:K]
    if K >= 8:
        q = K // 4
        tail_dec = bool(np.max(steps[-q:]) <= np.max(steps[:q]) + tol.abs_eps)
        cauchy = float(np.sum(steps[-q:]))
    else:
        tail_dec = None
        cauchy = float(np.sum(steps))
    return ConvergenceReport(
        stop_reason=trace.stop_reason,
        iterations=K,
        final_residual=float(trace.residual[-1]),
        final_distances=finals,
        max_distance=max_d,
        final_step=float(steps[-1]) if K else 0.0,
        tail_decreasing=tail_dec,
        cauchy_tail=cauchy,
    )
