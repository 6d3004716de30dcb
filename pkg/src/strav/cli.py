"""Command line front end: ``strav solve | superiorize | verify``.

Every subcommand reads one JSON config file (``--config``).  Output is a
block of ``key: value`` lines on stdout plus an optional CSV trace; given
an identical config and seed the CSV is reproduced bit for bit.

Exit codes: 0 when the run stopped on a residual or step criterion (for
``verify``: all audits passed), 2 when the iteration cap cut it off, and
1 for any error, including an invalid config.

Config grammar
--------------
Top-level fields::

    ambient_dim        positive int, the dimension of every vector below
    seed               int, the single source of randomness (default 0)
    start              starting point, ``ambient_dim`` numbers
    family             input operators, see below
    schedule           which plan runs at iteration k
    relaxation         step-size rule and certified interval
    perturbation       optional, enables the perturbed driver
    objective          optional, required by ``superiorize``
    superiorization    optional inner-loop sizes, ``superiorize`` only
    stop               {"max_iters", "residual_tol", "step_tol"}
    monitored_indices  list of input indices to track distances for
    output             {"trace": path or null, "stride": int}

``family`` is either explicit sets with a declared common point::

    {"witness": [0, 0],
     "sets": [{"kind": "halfspace", "a": [1, 0], "b": 0},
              {"kind": "hyperplane", "a": ..., "b": ...},
              {"kind": "ball", "center": ..., "radius": ...},
              {"kind": "box", "lo": ..., "hi": ...},
              {"kind": "affine", "basis": [[...]], "offset": ...}],
     "gammas": [1.0, 0.5]}          # optional relaxation per index, cycled

or a named generator for an infinite family::

    {"witness": [0, 0, 0, 0, 0], "generator": {"kind": "axis_halfspaces"}}

``schedule`` variants::

    {"variant": "power_of_two", "eps": 1.0, "alpha": 1.0}
    {"variant": "cyclic", "indices": [0, 1, 2], "eps": 1.0, "alpha": 1.0}
    {"variant": "cyclic", "plans": [PLAN, ...]}
    {"variant": "explicit", "plans": [PLAN, ...]}
    {"variant": "stages", "stages": [
        {"strings": [[0, 1], [2]], "weights": [0.5, 0.5]}, ...]}

The ``stages`` variant cycles string-averaging stages: each string is an
index list applied first-to-last, and the stage averages its strings
with the given weights.

A PLAN names its iteration index ``k``, its step count ``N``, its floor
``eps`` and one record per step ``n`` in 1..N::

    {"k": 0, "N": 3, "eps": 0.25, "steps": [
        {"n": 1, "c": 0, "J": [0], "alpha": 1.0},
        {"n": 2, "c": 1, "J": [-1, 1], "weights": {"-1": 0.5, "1": 0.5}},
        {"n": 3, "c": 2, "J": [-2, 2], "order": [2, -2, 2]}]}

Step kinds: ``c = 0`` relaxes one input by ``alpha``; ``c = 1`` takes the
convex combination with the given ``weights`` (keys are index strings);
``c = 2`` composes the referenced operators, ``order[0]`` applied first.
Entries of ``J``: 0 or negative means input operator ``-j``; positive
means the output of that earlier step of the same plan.  ``P`` may be
given and is cross-checked against the step's width.

``relaxation``::

    {"eps": 0.1,
     "rho": 0.05,                   # omit to derive from the schedule
     "permissive": false,           # true widens to (0, 2) and voids the
                                    # strong monotonicity constant
     "lambda": {"kind": "constant", "value": 1.0}
                | {"kind": "cycle", "values": [...]}
                | {"kind": "sweep", "points": 17}}

``perturbation``::

    {"beta": {"form": "power", "c": 1e-2, "p": 2.0},
     "direction": {"kind": "constant", "v": [...]}
                  | {"kind": "away_from_witness"}
                  | {"kind": "random_unit", "seed": 7}}

``objective``::

    {"kind": "linear", "c": [...], "argmin": [[...], ...]}
    {"kind": "squared_distance", "target": [...]}
    {"kind": "max_affine", "rows": [[...]], "offsets": [...], "argmin": ...}

``superiorization``::

    {"inner_steps": 2, "scale": 0.5, "zero_tol": 1e-12}
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, parse_config
from .control import verify_admissible
from .gmsa import fne_bound, output_operator, sqne_bound
from .operators import SampleBudget, check_fne, check_nonexpansive, check_sqne
from .solver import check_fejer, run, run_perturbed
from .superiorize import alternatives_diagnostic, run_superiorized

__all__ = ["main", "console_main"]

_PROBE_PLANS = 8
_PROBE_SAMPLES = 200


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="strav",
        description="feasibility seeking by relaxed string averaging",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler, doc in (
        ("solve", cmd_solve, "run the feasibility iteration and report the trace"),
        ("superiorize", cmd_superiorize, "run with objective-reducing perturbations"),
        ("verify", cmd_verify, "audit schedule coverage and operator inequalities"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", help="write the CSV trace here (overrides output.trace)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--stride", type=int, help="override output.stride")
        p.add_argument(
            "--horizon",
            type=int,
            default=200,
            help="verify: audit iterations 0..N inclusive (default 200)",
        )
        p.add_argument(
            "--indices",
            help="verify: comma separated input indices to audit "
            "(default: monitored_indices from the config)",
        )
        p.set_defaults(handler=handler)
    return parser


def _load_config(args):
    with open(args.config) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ConfigError([("document", "top level must be a record")])
    if args.seed is not None:
        doc["seed"] = args.seed
    out = doc.setdefault("output", {})
    if args.stride is not None:
        out["stride"] = args.stride
    if args.out is not None:
        out["trace"] = args.out
    return parse_config(doc)


def _emit(key, value):
    print(f"{key}: {value}")


def _finish(cfg, trace):
    _emit("stop reason", trace.stop_reason)
    _emit("iterations", trace.n_updates)
    _emit("final residual", f"{trace.residual[-1]:.6e}")
    _emit("distance to witness", f"{trace.dist_witness[-1]:.6e}")
    for j, n in enumerate(trace.monitored):
        _emit(f"distance to set {n}", f"{trace.set_distances[-1, j]:.6e}")
    if cfg.trace_path:
        trace.to_csv(cfg.trace_path)
        _emit("trace written", f"{cfg.trace_path} ({trace.n_rows} rows)")
    return 0 if trace.stop_reason in ("residual", "step") else 2


def cmd_solve(cfg, args):
    if cfg.perturb is not None:
        trace = run_perturbed(
            cfg.family, cfg.schedule, cfg.relax, cfg.perturb, cfg.start,
            cfg.stop, monitored=cfg.monitored, record_stride=cfg.stride,
        )
        _emit("driver", "perturbed")
        _emit("total perturbation", f"{float(trace.pert_mag.sum()):.6e}")
    else:
        trace = run(
            cfg.family, cfg.schedule, cfg.relax, cfg.start,
            cfg.stop, monitored=cfg.monitored, record_stride=cfg.stride,
        )
        _emit("driver", "plain")
        rep = check_fejer(trace, cfg.family.witness, trace.fejer_constant)
        _emit("fejer audit", rep)
    return _finish(cfg, trace)


def cmd_superiorize(cfg, args):
    if cfg.oracle is None or cfg.grid is None:
        print(
            "error: superiorize needs both 'objective' and 'superiorization' "
            "sections in the config",
            file=sys.stderr,
        )
        return 1
    baseline = run(
        cfg.family, cfg.schedule, cfg.relax, cfg.start,
        cfg.stop, monitored=cfg.monitored, record_stride=cfg.stride,
    )
    trace = run_superiorized(
        cfg.family, cfg.schedule, cfg.relax, cfg.oracle, cfg.grid, cfg.start,
        cfg.stop, zero_tol=cfg.zero_tol, monitored=cfg.monitored,
        record_stride=cfg.stride,
    )
    _emit("driver", "superiorized")
    _emit("objective at plain final", f"{cfg.oracle.value(baseline.final_x):.6e}")
    _emit("objective at superiorized final", f"{cfg.oracle.value(trace.final_x):.6e}")
    _emit(
        "objective reduction",
        f"{cfg.oracle.value(baseline.final_x) - cfg.oracle.value(trace.final_x):.6e}",
    )
    if cfg.oracle.argmin_witnesses and cfg.stride == 1:
        _emit("behavior", alternatives_diagnostic(trace, cfg.oracle))
    return _finish(cfg, trace)


def _verify_indices(cfg, args):
    if args.indices:
        return [int(tok) for tok in args.indices.split(",") if tok.strip()]
    if cfg.monitored:
        return list(cfg.monitored)
    raise ValueError("no indices to audit; pass --indices or set monitored_indices")


def cmd_verify(cfg, args):
    indices = _verify_indices(cfg, args)
    report = verify_admissible(cfg.schedule, args.horizon, indices)
    _emit("coverage", report)
    all_passed = report.passed

    budget = SampleBudget(count=_PROBE_SAMPLES, seed=cfg.seed)
    for k in range(min(args.horizon, _PROBE_PLANS - 1) + 1):
        plan = cfg.schedule.plan_at(k)
        T = output_operator(plan, cfg.family)
        rep = check_sqne(T, sqne_bound(plan), cfg.family.witness, budget)
        all_passed = all_passed and rep.passed
        _emit(f"plan {k} sqne", rep)
        try:
            bound = fne_bound(plan)
        except ValueError as exc:
            _emit(f"plan {k} fne", f"skipped ({exc})")
        else:
            rep = check_fne(T, bound, budget, center=cfg.family.witness)
            all_passed = all_passed and rep.passed
            _emit(f"plan {k} fne", rep)
        if T.is_nonexpansive:
            rep = check_nonexpansive(T, budget, center=cfg.family.witness)
            all_passed = all_passed and rep.passed
            _emit(f"plan {k} nonexpansive", rep)
    _emit("verdict", "pass" if all_passed else "FAIL")
    return 0 if all_passed else 1


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        return args.handler(cfg, args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
