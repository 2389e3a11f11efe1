"""Solve the spin-orbit coupling constraint cos(alpha + theta) = 0.

With d > 0 the mixing angle alpha lies in (0, π/2) and is strictly increasing
in the sum s = a + c, so cos(alpha(s) + theta) is strictly decreasing in s and
crosses zero exactly once.  Setting tan(alpha) = cot(theta) and solving gives
the closed form

    a + c = d (cot θ − tan θ) = 2 d cot 2θ,

which the bisection route re-derives numerically as an independent check.
The free directions of the four-parameter coupling family are d and the
difference split = a − c (split = 0 would violate a ≠ c); b does not enter
the constraint and defaults to 0, but some (theta, d, split) combinations
make the b = 0 spectrum degenerate, in which case the caller must pick a
different b explicitly — nothing is perturbed silently.

For d < 0 the principal-branch alpha lies in (−π/2, 0), so alpha + theta
stays inside (−π/2, π/2) and the constraint has no solution; both solvers
therefore require d > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegeneracyError, DomainError, LogicError, SolverError
from .hamiltonian import GAP_TOL, CouplingSet, analytic_spectrum_soc

#: Bracket search is abandoned beyond |a + c| = BRACKET_SPAN * d.
BRACKET_SPAN = 1e3

CLOSED_FORM_RESIDUAL_TOL = 1e-12
ROOT_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class SolverResult:
    """Couplings satisfying the constraint, with the achieved residual."""

    couplings: CouplingSet
    alpha: float
    residual: float
    theta: float
    method: str

    def to_json(self) -> dict:
        c = self.couplings
        return {
            "a": c.a,
            "b": c.b,
            "c": c.c,
            "d": c.d,
            "sum_ac": c.a + c.c,
            "alpha": self.alpha,
            "residual": self.residual,
            "theta": self.theta,
            "method": self.method,
        }


def _validate_inputs(theta: float, d: float, split: float) -> None:
    if not 0.0 < theta < math.pi / 2.0:
        raise DomainError(f"theta must lie strictly inside (0, pi/2), got {theta!r}")
    if d <= 0.0:
        raise DomainError(
            f"d must be positive, got {d!r}: with d <= 0 the principal-branch "
            "mixing angle never reaches pi/2 - theta"
        )
    if split == 0.0:
        raise DomainError("split = a - c must be nonzero (a = c is degenerate)")


def _finish(
    theta: float, d: float, split: float, b: float, ssum: float, method: str, gap_tol: float
) -> SolverResult:
    a = 0.5 * (ssum + split)
    c = 0.5 * (ssum - split)
    couplings = CouplingSet(a=a, b=b, c=c, d=d)
    try:
        spectrum = analytic_spectrum_soc(couplings, gap_tol=gap_tol)
    except DegeneracyError as exc:
        raise DegeneracyError(
            f"{exc}; supply a different b (b does not affect the constraint)",
            pairs=exc.pairs,
        ) from exc
    residual = abs(math.cos(spectrum.alpha + theta))
    limit = CLOSED_FORM_RESIDUAL_TOL if method == "closed-form" else ROOT_RESIDUAL_TOL
    if residual > limit:
        raise LogicError(f"{method} residual {residual!r} exceeds {limit}")
    return SolverResult(
        couplings=couplings,
        alpha=spectrum.alpha,
        residual=residual,
        theta=theta,
        method=method,
    )


def solve_closed_form(
    theta: float,
    d: float,
    split: float,
    b: float = 0.0,
    *,
    gap_tol: float = GAP_TOL,
) -> SolverResult:
    """Couplings with a + c = 2 d cot 2θ, which makes alpha + theta = π/2."""
    _validate_inputs(theta, d, split)
    ssum = 2.0 * d * math.cos(2.0 * theta) / math.sin(2.0 * theta)
    return _finish(theta, d, split, b, ssum, "closed-form", gap_tol)


def _constraint(ssum: float, d: float, theta: float) -> float:
    alpha = math.atan((ssum + math.hypot(ssum, 2.0 * d)) / (2.0 * d))
    return math.cos(alpha + theta)


def solve_by_root_finding(
    theta: float,
    d: float,
    split: float,
    b: float = 0.0,
    *,
    gap_tol: float = GAP_TOL,
    residual_tol: float = ROOT_RESIDUAL_TOL,
) -> SolverResult:
    """Bisection on s = a + c; independent oracle for :func:`solve_closed_form`."""
    _validate_inputs(theta, d, split)
    # cos(alpha(s) + theta) decreases from cos(theta) > 0 toward -sin(theta) < 0.
    lo, hi = -d, d
    while _constraint(lo, d, theta) <= 0.0:
        lo *= 2.0
        if -lo > BRACKET_SPAN * d:
            raise SolverError(f"no lower bracket within |s| <= {BRACKET_SPAN}*d")
    while _constraint(hi, d, theta) >= 0.0:
        hi *= 2.0
        if hi > BRACKET_SPAN * d:
            raise SolverError(f"no upper bracket within |s| <= {BRACKET_SPAN}*d")
    mid = 0.5 * (lo + hi)
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        f = _constraint(mid, d, theta)
        if abs(f) <= 1e-15 or (hi - lo) <= 1e-14 * max(1.0, abs(mid)):
            break
        if f > 0.0:
            lo = mid
        else:
            hi = mid
    if abs(_constraint(mid, d, theta)) > residual_tol:
        raise SolverError(
            f"bisection stalled at s={mid!r} with |cos(alpha+theta)| > {residual_tol}"
        )
    return _finish(theta, d, split, b, mid, "bisection", gap_tol)
