"""Shared-ontic-state feasibility and the exclusion deductions.

The question asked here: if Alice's prepared states could share a physical
state (her two alternatives have overlapping supports), and likewise Bob's,
can any assignment of outcome probabilities p(k | shared state) satisfy
quantum statistics?  Supports are modeled abstractly — all the argument uses
is *which preparations' supports contain the shared state* — and each such
preparation forbids its own outcome exactly (Born weight zero), so the
constraint system is

    p(k) = 0   for every forbidden outcome k of a support preparation,
    p(1) + p(2) + p(3) + p(4) = 1,       0 <= p(k) <= 1.

With overlaps on both sides the four forbidden outcomes cover all four
outcomes (the forbidden map is a bijection) and the system is infeasible:
some outcome always occurs, so the two overlaps cannot coexist.  The decision
is made by a general phase-1 simplex; the trivial subset rule ("infeasible
iff every outcome is zeroed") is kept alongside purely as an oracle.

A noise-robust form: if every preparation shows its forbidden outcome with
frequency at most eps_hat, then for the shared state class of joint weight
q_a * q_b the total forbidden probability across the four preparations equals
sum_k p(k | shared) = 1, so q_a * q_b <= sum over preparations of
P(forbidden | prep) <= 4 * eps_hat.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import LogicError, ValidationError
from .protocol import ProtocolInstance, Variant, forbidden_map_for
from .simplex import phase1_feasible

#: theta window in which the spin-orbit states v and w are treated as equal.
SPECIAL_CASE_ATOL = 1e-10

LP_TOL = 1e-9


class Relation(str, enum.Enum):
    DISJOINT = "disjoint"
    AT_LEAST_ONE_DISJOINT = "at-least-one-disjoint"
    CONJOINT_POSSIBLE = "conjoint-possible"


@dataclass(frozen=True)
class SupportProfile:
    """Which party's state pair shares ontic support, with the shared weights."""

    alice_overlap: bool
    bob_overlap: bool
    q_a: float = 1.0
    q_b: float = 1.0

    def __post_init__(self):
        if self.alice_overlap and not 0.0 < self.q_a <= 1.0:
            raise ValidationError(f"q_a must lie in (0, 1] when alice_overlap, got {self.q_a}")
        if self.bob_overlap and not 0.0 < self.q_b <= 1.0:
            raise ValidationError(f"q_b must lie in (0, 1] when bob_overlap, got {self.q_b}")


@dataclass(frozen=True)
class FeasibilityProblem:
    """Response-probability constraints induced by a support profile."""

    outcome_labels: tuple[str, ...]
    zeroed: tuple[str, ...]
    supports: tuple[str, ...]
    variant: str
    theta: float

    def zeroed_indices(self) -> tuple[int, ...]:
        return tuple(self.outcome_labels.index(lab) for lab in self.zeroed)

    def to_json(self) -> dict:
        return {
            "outcome_labels": list(self.outcome_labels),
            "zeroed": list(self.zeroed),
            "supports": list(self.supports),
            "variant": self.variant,
            "theta": self.theta,
        }


@dataclass(frozen=True)
class FeasibilityDecision:
    feasible: bool
    witness: tuple[tuple[str, float], ...] | None
    certificate: tuple[str, ...] | None
    problem: FeasibilityProblem
    method: str = "phase1-simplex"

    def to_json(self) -> dict:
        out = {
            "feasible": self.feasible,
            "method": self.method,
            "problem": self.problem.to_json(),
        }
        if self.witness is not None:
            out["witness"] = {label: p for label, p in self.witness}
        if self.certificate is not None:
            out["certificate"] = list(self.certificate)
        return out


def _party_states(label: str) -> tuple[str, str]:
    alice, bob = label.split("*")
    return alice, bob


def build_problem(
    inst: ProtocolInstance, prof: SupportProfile, *, branch: str = "u"
) -> FeasibilityProblem:
    """Constraints on the shared state implied by a support profile.

    With both overlaps the shared state sits in the support of all four
    preparations.  With a single overlap the other party's state is definite;
    ``branch`` names it, and only the two preparations using that state
    contribute their forbidden outcomes.
    """
    forbidden = inst.forbidden_map
    if prof.alice_overlap and prof.bob_overlap:
        supports = inst.prep_labels
    elif prof.alice_overlap:
        choices = {_party_states(lab)[1] for lab in inst.prep_labels}
        if branch not in choices:
            raise ValidationError(f"branch {branch!r} is not one of Bob's states {sorted(choices)}")
        supports = tuple(
            lab for lab in inst.prep_labels if _party_states(lab)[1] == branch
        )
    elif prof.bob_overlap:
        choices = {_party_states(lab)[0] for lab in inst.prep_labels}
        if branch not in choices:
            raise ValidationError(f"branch {branch!r} is not one of Alice's states {sorted(choices)}")
        supports = tuple(
            lab for lab in inst.prep_labels if _party_states(lab)[0] == branch
        )
    else:
        raise ValidationError("no overlap flag set: there is no shared ontic state to test")
    zeroed = tuple(
        lab for lab in inst.outcome_labels if lab in {forbidden[p] for p in supports}
    )
    return FeasibilityProblem(
        outcome_labels=inst.outcome_labels,
        zeroed=zeroed,
        supports=supports,
        variant=inst.variant.value,
        theta=inst.params.theta,
    )


def lp_feasible(
    prob: FeasibilityProblem, *, tol: float = LP_TOL, exact: bool = False
) -> FeasibilityDecision:
    """Decide the problem with the phase-1 simplex (no special-casing).

    Variables are the four response probabilities plus four slacks for the
    p(k) <= 1 bounds; rows are the zero equalities, normalization, and the
    bound rows.  A feasible problem is reported with the uniform witness over
    the outcomes not forced to zero; an infeasible one with the textual
    contradiction certificate.  ``exact=True`` pivots over rationals instead
    of floats.
    """
    labels = prob.outcome_labels
    if len(labels) != 4 or len(set(labels)) != 4:
        raise ValidationError(f"expected 4 distinct outcome labels, got {labels}")
    zeroed_idx = prob.zeroed_indices()
    rows, rhs = [], []
    for k in zeroed_idx:
        row = [0.0] * 8
        row[k] = 1.0
        rows.append(row)
        rhs.append(0.0)
    rows.append([1.0] * 4 + [0.0] * 4)
    rhs.append(1.0)
    for k in range(4):
        row = [0.0] * 8
        row[k] = 1.0
        row[4 + k] = 1.0
        rows.append(row)
        rhs.append(1.0)
    result = phase1_feasible(np.array(rows), np.array(rhs), tol=tol, exact=exact)
    method = "phase1-simplex-exact" if exact else "phase1-simplex"

    if result.feasible:
        live = [lab for lab in labels if lab not in prob.zeroed]
        witness = tuple((lab, 1.0 / len(live)) for lab in live)
        return FeasibilityDecision(
            feasible=True, witness=witness, certificate=None, problem=prob, method=method
        )
    forbidden_of = {out: prep for prep, out in _supports_forbidden(prob)}
    certificate = tuple(
        f"p({lab}) = 0  (forbidden outcome of preparation {forbidden_of[lab]}, "
        "whose support contains the shared state)"
        for lab in prob.zeroed
    ) + (
        "p(" + ") + p(".join(labels) + ") = 1  (some outcome occurs in every run)",
        "summing the zero equalities over all four outcomes gives 0 = 1",
    )
    return FeasibilityDecision(
        feasible=False, witness=None, certificate=certificate, problem=prob, method=method
    )


def _supports_forbidden(prob: FeasibilityProblem) -> list[tuple[str, str]]:
    fmap = dict(forbidden_map_for(Variant(prob.variant)))
    return [(prep, fmap[prep]) for prep in prob.supports]


def problem_from_zeroed(
    inst: ProtocolInstance, zeroed: tuple[str, ...]
) -> FeasibilityProblem:
    """Problem with an arbitrary zeroed set (for randomized solver checks).

    The supporting preparations are reconstructed through the forbidden
    bijection, so degenerate sets (empty, partial, full) stay self-consistent.
    """
    unknown = set(zeroed) - set(inst.outcome_labels)
    if unknown:
        raise ValidationError(f"unknown outcome labels {sorted(unknown)}")
    supports = tuple(
        prep for prep, out in inst.forbidden if out in set(zeroed)
    )
    return FeasibilityProblem(
        outcome_labels=inst.outcome_labels,
        zeroed=tuple(lab for lab in inst.outcome_labels if lab in set(zeroed)),
        supports=supports,
        variant=inst.variant.value,
        theta=inst.params.theta,
    )


def subset_rule_feasible(prob: FeasibilityProblem) -> bool:
    """Oracle: feasible iff the zero equalities do not cover every outcome."""
    return len(set(prob.zeroed)) < len(prob.outcome_labels)


@dataclass(frozen=True)
class Verdict:
    """What the exclusion argument concludes about state pairs.

    ``pairs`` holds one pair for a definite relation, or the two pairs of a
    disjunction for AT_LEAST_ONE_DISJOINT.
    """

    pairs: tuple[tuple[str, str], ...]
    relation: Relation
    variant: str
    theta: float
    note: str

    def to_json(self) -> dict:
        return {
            "pairs": [list(p) for p in self.pairs],
            "relation": self.relation.value,
            "variant": self.variant,
            "theta": self.theta,
            "note": self.note,
        }


def deduce(
    inst: ProtocolInstance,
    both_overlap: FeasibilityDecision,
    *,
    special_case_atol: float = SPECIAL_CASE_ATOL,
) -> list[Verdict]:
    """Turn the both-overlap infeasibility into a state-pair verdict.

    Exchange variant: u conjoint with v would force u disjoint from vbar, so
    at least one of (u, v), (u, vbar) is disjoint.  Spin-orbit variant: same
    for (u, v), (u, w); and at theta = pi/4 the states v and w coincide, so
    the disjunction collapses to an unconditional disjoint(u, v).
    """
    if set(both_overlap.problem.supports) != set(inst.prep_labels):
        raise ValidationError("decision does not come from the both-overlap problem")
    if both_overlap.feasible:
        raise LogicError(
            "both-overlap problem reported feasible; the forbidden bijection makes "
            "that impossible for a valid instance"
        )
    theta = inst.params.theta
    if inst.variant is Variant.XYZ:
        pairs = (("u", "v"), ("u", "vbar"))
    else:
        pairs = (("u", "v"), ("u", "w"))
        if abs(theta - math.pi / 4.0) <= special_case_atol:
            return [
                Verdict(
                    pairs=(("u", "v"),),
                    relation=Relation.DISJOINT,
                    variant=inst.variant.value,
                    theta=theta,
                    note=(
                        "w coincides with v at this overlap (|<u|v>|^2 = 1/2), so the "
                        "disjunction collapses; backed by the shared-support "
                        "infeasibility certificate"
                    ),
                )
            ]
    return [
        Verdict(
            pairs=pairs,
            relation=Relation.AT_LEAST_ONE_DISJOINT,
            variant=inst.variant.value,
            theta=theta,
            note="backed by the shared-support infeasibility certificate",
        )
    ]


def overlap_bound(eps_hat: float) -> float:
    """Upper bound 4*eps_hat on the joint shared weight q_a * q_b.

    Derivation: for the shared state class, the forbidden map being a
    bijection makes the four forbidden-outcome probabilities sum to
    sum_k p(k | shared) = 1.  Averaging over ontic states, each preparation's
    observed forbidden frequency is at least q_a * q_b times its share, so
    q_a * q_b <= sum over preparations of P(forbidden | prep) <= 4 * eps_hat.
    """
    if not 0.0 <= eps_hat <= 1.0:
        raise ValidationError(f"eps_hat must lie in [0, 1], got {eps_hat}")
    return 4.0 * eps_hat
