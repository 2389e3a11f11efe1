"""Full verification sweep behind the ``verify-all`` subcommand.

Runs every protocol invariant over seeded grids and random draws, printing
one PASS/FAIL line per check.  All randomness comes from the counter streams
in :mod:`pbrlab.rng` keyed on the report seed, so the report text is a pure
function of (seed, n_runs): byte-identical across repeats, platforms, and
worker counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .coupling_solver import solve_by_root_finding, solve_closed_form
from .errors import DegeneracyError, PbrlabError
from .hamiltonian import (
    CouplingSet,
    analytic_spectrum_soc,
    analytic_spectrum_xyz,
    bell_states,
    build_soc,
    build_xyz,
    evolve,
    numeric_spectrum,
    pair_spectra,
    soc_alpha,
)
from .ontology import (
    Relation,
    SupportProfile,
    build_problem,
    deduce,
    lp_feasible,
    overlap_bound,
    problem_from_zeroed,
    subset_rule_feasible,
)
from .protocol import (
    Variant,
    born_probabilities,
    forbidden_rate,
    make_protocol,
    orthogonality_residuals,
    simulate,
)
from .qstate import OverlapParams

#: b values tried in turn when building default spin-orbit couplings; a fixed
#: (theta, d, split) can make any single b degenerate.
DEFAULT_B_CANDIDATES = (0.5, 0.8, 1.3)


def default_soc_couplings(theta: float, d: float = 1.0, split: float = 2.0) -> CouplingSet:
    """Constraint-satisfying couplings with the first non-degenerate default b."""
    last: DegeneracyError | None = None
    for b in DEFAULT_B_CANDIDATES:
        try:
            return solve_closed_form(theta, d, split, b=b).couplings
        except DegeneracyError as exc:
            last = exc
    raise last


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}: {self.detail}"


def _theta_grid(n: int) -> list[float]:
    lo, hi = 0.05, math.pi / 2.0 - 0.05
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def _draws(seed: int, purpose: int, count: int, width: int) -> np.ndarray:
    # Distinct purposes get disjoint counter blocks of the same seed stream.
    return rng.run_uniforms(seed, purpose * 1_000_000, purpose * 1_000_000 + count, width)


def _random_xyz_couplings(seed: int, purpose: int, n: int, min_gap: float = 1e-3):
    out = []
    block = 0
    while len(out) < n:
        rows = _draws(seed, purpose + block, 4 * n, 3)
        for row in rows:
            c = CouplingSet(*(6.0 * x - 3.0 for x in row))
            try:
                analytic_spectrum_xyz(c, gap_tol=min_gap)
            except PbrlabError:
                continue
            out.append(c)
            if len(out) == n:
                break
        block += 1
    return out


def _random_soc_couplings(seed: int, purpose: int, n: int, min_gap: float = 1e-3):
    out = []
    block = 0
    while len(out) < n:
        rows = _draws(seed, purpose + block, 4 * n, 4)
        for row in rows:
            d = 6.0 * row[3] - 3.0
            if abs(d) < 0.05:
                continue
            c = CouplingSet(6.0 * row[0] - 3.0, 6.0 * row[1] - 3.0, 6.0 * row[2] - 3.0, d)
            try:
                analytic_spectrum_soc(c, gap_tol=min_gap)
            except PbrlabError:
                continue
            out.append(c)
            if len(out) == n:
                break
        block += 1
    return out


def check_xyz_spectrum(seed: int, n: int = 250) -> CheckResult:
    max_de, max_infid = 0.0, 0.0
    for c in _random_xyz_couplings(seed, 10, n):
        pairs = pair_spectra(analytic_spectrum_xyz(c), numeric_spectrum(build_xyz(c)))
        max_de = max(max_de, max(p.abs_diff for p in pairs))
        max_infid = max(max_infid, max(1.0 - p.fidelity for p in pairs))
    ok = max_de <= 1e-10 and max_infid <= 1e-10
    return CheckResult(
        "xyz-spectrum-agreement",
        ok,
        f"{n} random couplings, max |dE| {max_de:.3e}, max infidelity {max_infid:.3e}",
    )


def check_soc_spectrum(seed: int, n: int = 250) -> CheckResult:
    max_de, max_infid, max_cross = 0.0, 0.0, 0.0
    bells = bell_states()
    exact_fixed = True
    for c in _random_soc_couplings(seed, 20, n):
        spec = analytic_spectrum_soc(c)
        pairs = pair_spectra(spec, numeric_spectrum(build_soc(c)))
        max_de = max(max_de, max(p.abs_diff for p in pairs))
        max_infid = max(max_infid, max(1.0 - p.fidelity for p in pairs))
        exact_fixed = exact_fixed and spec.eigenvectors[0].amps == bells[1].amps
        exact_fixed = exact_fixed and spec.eigenvectors[1].amps == bells[2].amps
        cross = abs(np.vdot(spec.eigenvectors[2].vector, spec.eigenvectors[3].vector))
        max_cross = max(max_cross, float(cross))
    ok = max_de <= 1e-10 and max_infid <= 1e-10 and exact_fixed and max_cross <= 1e-12
    return CheckResult(
        "soc-spectrum-agreement",
        ok,
        f"{n} random couplings, max |dE| {max_de:.3e}, max infidelity {max_infid:.3e}, "
        f"fixed Bell eigenvectors exact: {exact_fixed}, max |<e'3|e'4>| {max_cross:.3e}",
    )


def check_xyz_orthogonality(seed: int) -> CheckResult:
    worst = 0.0
    couplings = CouplingSet(1.0, 2.0, 3.0)
    phis = [2.0 * math.pi * k / 8.0 for k in range(8)]
    for theta in _theta_grid(24):
        for phi in phis:
            res = orthogonality_residuals(Variant.XYZ, OverlapParams(theta, phi), couplings)
            worst = max(worst, max(res.values()))
    ok = worst <= 1e-12
    return CheckResult(
        "xyz-orthogonality", ok, f"24x8 (theta, phi) grid, max residual {worst:.3e}"
    )


def check_soc_orthogonality(seed: int) -> CheckResult:
    worst = 0.0
    for theta in _theta_grid(24):
        couplings = default_soc_couplings(theta)
        res = orthogonality_residuals(Variant.SOC, OverlapParams(theta), couplings)
        worst = max(worst, max(res.values()))
    ok = worst <= 1e-12
    return CheckResult(
        "soc-orthogonality", ok, f"24 theta grid, constraint couplings, max residual {worst:.3e}"
    )


def check_soc_negative_control(seed: int) -> CheckResult:
    weakest = math.inf
    for theta in _theta_grid(12):
        good = default_soc_couplings(theta)
        bad = CouplingSet(good.a + 0.25, good.b, good.c + 0.25, good.d)
        violation = abs(math.cos(soc_alpha(bad) + theta))
        if violation < 1e-3:
            return CheckResult(
                "soc-negative-control", False, f"violation {violation:.3e} too small at theta {theta:.3f}"
            )
        res = orthogonality_residuals(Variant.SOC, OverlapParams(theta), bad)
        weakest = min(weakest, max(res.values()))
    ok = weakest > 1e-4
    return CheckResult(
        "soc-negative-control",
        ok,
        f"12 theta grid, off-constraint couplings, min of max residuals {weakest:.3e} > 1e-4",
    )


def check_solver_agreement(seed: int, n: int = 60) -> CheckResult:
    max_gap = 0.0
    rows = _draws(seed, 30, n, 4)
    done = 0
    for row in rows:
        theta = 0.1 + (math.pi / 2.0 - 0.2) * row[0]
        d = 0.1 + 2.9 * row[1]
        split = (0.5 + 2.0 * row[2]) * (1.0 if row[3] < 0.5 else -1.0)
        b = 0.2 + 0.6 * row[3]
        try:
            closed = solve_closed_form(theta, d, split, b=b)
            rooted = solve_by_root_finding(theta, d, split, b=b)
        except DegeneracyError:
            continue
        done += 1
        gap = abs(
            (closed.couplings.a + closed.couplings.c)
            - (rooted.couplings.a + rooted.couplings.c)
        )
        max_gap = max(max_gap, gap)
    special = solve_closed_form(math.pi / 4.0, 1.0, 2.0, b=0.5)
    special_sum = abs(special.couplings.a + special.couplings.c)
    ok = max_gap <= 1e-8 and special_sum <= 1e-12 and done >= n - 5
    return CheckResult(
        "solver-agreement",
        ok,
        f"{done} samples, max |s_closed - s_root| {max_gap:.3e}; "
        f"theta=pi/4 sum {special_sum:.3e}",
    )


def _instances_for_grid(seed: int):
    for theta in _theta_grid(12):
        yield make_protocol(Variant.XYZ, OverlapParams(theta), CouplingSet(1.0, 2.0, 3.0))
        yield make_protocol(Variant.SOC, OverlapParams(theta), default_soc_couplings(theta))


def check_exclusion_feasibility(seed: int) -> CheckResult:
    checked = 0
    for inst in _instances_for_grid(seed):
        both = lp_feasible(build_problem(inst, SupportProfile(True, True)))
        if both.feasible:
            return CheckResult("exclusion-feasibility", False, f"both-overlap feasible for {inst.variant}")
        for prof, side in ((SupportProfile(True, False), "bob"), (SupportProfile(False, True), "alice")):
            branches = sorted(
                {lab.split("*")[1 if side == "bob" else 0] for lab in inst.prep_labels}
            )
            for branch in branches:
                single = lp_feasible(build_problem(inst, prof, branch=branch))
                if not single.feasible:
                    return CheckResult(
                        "exclusion-feasibility",
                        False,
                        f"single-overlap problem infeasible ({inst.variant}, branch {branch})",
                    )
        checked += 1
    return CheckResult(
        "exclusion-feasibility",
        True,
        f"{checked} instances: both-overlap infeasible, all single-overlap branches feasible",
    )


def check_simplex_oracle(seed: int, n: int = 200) -> CheckResult:
    inst = make_protocol(Variant.XYZ, OverlapParams(math.pi / 3.0), CouplingSet(1.0, 2.0, 3.0))
    rows = _draws(seed, 40, n, 4)
    agreements = 0
    for row in rows:
        zeroed = tuple(
            lab for lab, x in zip(inst.outcome_labels, row) if x < 0.5
        )
        prob = problem_from_zeroed(inst, zeroed)
        if lp_feasible(prob).feasible == subset_rule_feasible(prob):
            agreements += 1
    ok = agreements == n
    return CheckResult(
        "simplex-vs-subset-rule", ok, f"{agreements}/{n} randomized problems agree"
    )


def check_special_case_verdicts(seed: int) -> CheckResult:
    soc_special = make_protocol(
        Variant.SOC, OverlapParams(math.pi / 4.0), default_soc_couplings(math.pi / 4.0)
    )
    v_special = deduce(soc_special, lp_feasible(build_problem(soc_special, SupportProfile(True, True))))
    soc_generic = make_protocol(
        Variant.SOC, OverlapParams(math.pi / 3.0), default_soc_couplings(math.pi / 3.0)
    )
    v_generic = deduce(soc_generic, lp_feasible(build_problem(soc_generic, SupportProfile(True, True))))
    xyz = make_protocol(Variant.XYZ, OverlapParams(math.pi / 3.0), CouplingSet(1.0, 2.0, 3.0))
    v_xyz = deduce(xyz, lp_feasible(build_problem(xyz, SupportProfile(True, True))))
    ok = (
        len(v_special) == 1
        and v_special[0].relation is Relation.DISJOINT
        and v_special[0].pairs == (("u", "v"),)
        and len(v_generic) == 1
        and v_generic[0].relation is Relation.AT_LEAST_ONE_DISJOINT
        and v_generic[0].pairs == (("u", "v"), ("u", "w"))
        and len(v_xyz) == 1
        and v_xyz[0].relation is Relation.AT_LEAST_ONE_DISJOINT
        and v_xyz[0].pairs == (("u", "v"), ("u", "vbar"))
    )
    return CheckResult(
        "special-case-verdicts",
        ok,
        "theta=pi/4 gives disjoint(u, v); theta=pi/3 gives only the disjunctions",
    )


def check_cross_protocol(seed: int) -> CheckResult:
    theta = math.pi / 4.0
    xyz = make_protocol(Variant.XYZ, OverlapParams(theta), CouplingSet(1.0, 2.0, 3.0))
    soc = make_protocol(Variant.SOC, OverlapParams(theta), default_soc_couplings(theta))
    v_xyz = deduce(xyz, lp_feasible(build_problem(xyz, SupportProfile(True, True))))[0]
    v_soc = deduce(soc, lp_feasible(build_problem(soc, SupportProfile(True, True))))[0]
    # disjoint(u, v) from one procedure satisfies the other's disjunction over
    # (u, v), (u, vbar): the same pair is one of its disjuncts.
    implies = (
        v_soc.relation is Relation.DISJOINT
        and v_xyz.relation is Relation.AT_LEAST_ONE_DISJOINT
        and v_soc.pairs[0] in v_xyz.pairs
    )
    return CheckResult(
        "cross-protocol-consistency",
        implies,
        "at theta=pi/4 the spin-orbit disjoint(u, v) settles the exchange disjunction",
    )


def check_simulation_stats(seed: int, n_runs: int = 200_000, n_workers: int = 1) -> CheckResult:
    inst = make_protocol(Variant.XYZ, OverlapParams(math.pi / 3.0), CouplingSet(1.0, 2.0, 3.0))
    clean = simulate(inst, n_runs, seed=seed, noise_eps=0.0, prep_policy="roundrobin", n_workers=n_workers)
    forbidden_hits = sum(
        clean.counts[clean.prep_labels.index(p)][clean.outcome_labels.index(o)]
        for p, o in clean.forbidden
    )
    born = born_probabilities(inst.preparation("u*u"), inst.spectrum)
    row = clean.counts[clean.prep_labels.index("u*u")]
    n_uu = sum(row)
    born_ok = True
    for k, p in enumerate(born):
        sigma = math.sqrt(p * (1.0 - p) / n_uu) if 0.0 < p < 1.0 else 0.0
        if abs(row[k] / n_uu - p) > max(3.0 * sigma, 1e-12):
            born_ok = False
    noisy = simulate(inst, n_runs, seed=seed + 1, noise_eps=0.04, prep_policy="roundrobin", n_workers=n_workers)
    rates = forbidden_rate(noisy)
    expected = 0.04 / 4.0
    sigma = math.sqrt(expected * (1.0 - expected) / (n_runs / 4.0))
    noise_ok = all(abs(rate - expected) <= 3.0 * sigma for _, rate in rates.per_preparation)
    bound = overlap_bound(rates.eps_hat)
    bound_ok = abs(bound - 0.04) <= 12.0 * sigma
    ok = forbidden_hits == 0 and born_ok and noise_ok and bound_ok
    return CheckResult(
        "simulation-statistics",
        ok,
        f"{n_runs} clean runs: forbidden hits {forbidden_hits}; Born within 3 sigma: {born_ok}; "
        f"noise 0.04 -> eps_hat {rates.eps_hat:.5f}, bound {bound:.5f}",
    )


def check_phi_independence(seed: int) -> CheckResult:
    worst = 0.0
    for variant, make_couplings in (
        (Variant.XYZ, lambda theta: CouplingSet(1.0, 2.0, 3.0)),
        (Variant.SOC, default_soc_couplings),
    ):
        for theta in _theta_grid(8):
            reference = None
            for phi in [2.0 * math.pi * k / 6.0 for k in range(6)]:
                inst = make_protocol(variant, OverlapParams(theta, phi), make_couplings(theta))
                born = inst.born_matrix()
                if reference is None:
                    reference = born
                else:
                    worst = max(worst, float(np.max(np.abs(born - reference))))
    ok = worst <= 1e-12
    return CheckResult(
        "phi-independence", ok, f"max Born deviation across phi grid {worst:.3e}"
    )


def check_evolution_invariance(seed: int) -> CheckResult:
    worst = 0.0
    for inst in _instances_for_grid(seed):
        for t in (0.0, 0.37, 2.5, -4.0):
            for _, prep in inst.preparations:
                before = born_probabilities(prep, inst.spectrum)
                after = born_probabilities(evolve(prep, inst.spectrum, t), inst.spectrum)
                worst = max(worst, max(abs(x - y) for x, y in zip(before, after)))
    ok = worst <= 1e-12
    return CheckResult(
        "evolution-invariance", ok, f"max Born shift under exp(-iHt) {worst:.3e}"
    )


def check_determinism(seed: int, n_runs: int = 50_000) -> CheckResult:
    inst = make_protocol(Variant.SOC, OverlapParams(1.0), default_soc_couplings(1.0))
    one = simulate(inst, n_runs, seed=seed, noise_eps=0.02, prep_policy="uniform", n_workers=1)
    again = simulate(inst, n_runs, seed=seed, noise_eps=0.02, prep_policy="uniform", n_workers=1)
    split3 = simulate(inst, n_runs, seed=seed, noise_eps=0.02, prep_policy="uniform", n_workers=3)
    ok = one == again and one == split3
    return CheckResult(
        "determinism", ok, f"{n_runs} runs: repeat identical {one == again}, 3-worker identical {one == split3}"
    )


def run_all(seed: int = 42, n_runs: int = 200_000, n_workers: int = 1) -> tuple[str, bool]:
    """Execute every check; returns (report text, all passed)."""
    checks = [
        check_xyz_spectrum(seed),
        check_soc_spectrum(seed),
        check_xyz_orthogonality(seed),
        check_soc_orthogonality(seed),
        check_soc_negative_control(seed),
        check_solver_agreement(seed),
        check_exclusion_feasibility(seed),
        check_simplex_oracle(seed),
        check_special_case_verdicts(seed),
        check_cross_protocol(seed),
        check_simulation_stats(seed, n_runs=n_runs, n_workers=n_workers),
        check_phi_independence(seed),
        check_evolution_invariance(seed),
        check_determinism(seed),
    ]
    passed = sum(1 for c in checks if c.ok)
    lines = [f"verification sweep (seed {seed})"]
    lines += [c.line() for c in checks]
    lines.append(f"{passed}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n", passed == len(checks)
