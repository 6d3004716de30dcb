"""Bounded perturbations, and putting them to work.

Part one injects summable adversarial pushes into a feasibility run and
shows convergence survive them.  Part two chooses the pushes to descend
an objective instead (superiorization) and classifies the resulting
behavior against the objective's declared minimizer.
"""

import numpy as np

from strav.control import CyclicSchedule, uniform_modulus
from strav.fixtures import box_linear_fixture, two_halfspace_family
from strav.solver import (
    PerturbationSchedule,
    RelaxationSchedule,
    StopRule,
    constant_direction,
    run,
    run_perturbed,
)
from strav.superiorize import BetaGrid, alternatives_diagnostic, run_superiorized


def resilience():
    print("perturbation resilience")
    family = two_halfspace_family()
    sched = CyclicSchedule.over_indices([0, 1])
    relax = RelaxationSchedule.constant(0.9, 0.25, uniform_modulus(sched, 1.0))
    stop = StopRule(100000, 1e-10, None)
    x0 = np.array([2.0, 1.0])

    clean = run(family, sched, relax, x0, stop)
    print(f"  unperturbed: {clean.n_updates} updates to residual {clean.residual[-1]:.1e}")

    v = np.array([1.0, 1.0]) / np.sqrt(2.0)
    for c in (1e-2, 1e-1, 5e-1):
        pert = PerturbationSchedule.power(c, 2.0, constant_direction(v))
        tr = run_perturbed(family, sched, relax, pert, x0, stop)
        print(
            f"  c = {c:<5} total push {tr.pert_mag.sum():.4f}  "
            f"{tr.n_updates} updates, final distance {tr.dist_witness[-1]:.2e}"
        )


def superiorization():
    print("\nsuperiorization on the unit box, objective x0 + x1")
    family, oracle = box_linear_fixture()
    sched = CyclicSchedule.over_indices([0])
    relax = RelaxationSchedule.constant(1.0, 0.25, uniform_modulus(sched, 1.0))
    stop = StopRule(2000, None, None)
    x0 = np.array([0.5, 0.5])

    plain = run(family, sched, relax, x0, stop)
    sup = run_superiorized(
        family, sched, relax, oracle, BetaGrid.geometric(0.5, M=2),
        x0, stop, record_stride=1,
    )
    print(f"  objective at plain final        {oracle.value(plain.final_x):.6f}")
    print(f"  objective at superiorized final {oracle.value(sup.final_x):.6f}")
    print(f"  behavior: {alternatives_diagnostic(sup, oracle)}")


if __name__ == "__main__":
    resilience()
    superiorization()
