"""Protocol assembly, Born statistics, and seeded measurement simulation.

A protocol instance fixes the two parties' state choices, the interaction
Hamiltonian, and the resulting forbidden-outcome map:

- exchange variant: Alice prepares u or v, Bob prepares u or vbar, and the
  four joint preparations are each orthogonal to exactly one Bell state
  (u⊗u → e4, u⊗vbar → e2, v⊗u → e3, v⊗vbar → e1);
- spin-orbit variant: Bob prepares u or w, and provided the couplings satisfy
  cos(alpha + theta) = 0 the map is u⊗u → e'2, u⊗w → e'4, v⊗u → e'3,
  v⊗w → e'1.

Simulation draws each run's preparation and outcome from counter-based
streams (see :mod:`pbrlab.rng`), so a tally table is a pure function of
(instance, n_runs, seed, noise_eps, policy) no matter how the runs are
partitioned across workers.  Noise is a symmetric outcome flip: with
probability noise_eps the sampled outcome is replaced by one of the four
outcomes chosen uniformly, so each forbidden outcome shows up with frequency
noise_eps / 4.
"""

from __future__ import annotations

import concurrent.futures
import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError, ValidationError
from .hamiltonian import (
    GAP_TOL,
    CouplingSet,
    Spectrum,
    analytic_spectrum_soc,
    analytic_spectrum_xyz,
)
from .qstate import JointState, OverlapParams, build_pair_soc, build_pair_xyz, joint_overlap, tensor
from .rng import run_uniforms, validate_seed

#: Instance-level bound on |⟨forbidden outcome|preparation⟩|.
ORTHO_ATOL = 1e-12

#: Advertised tolerance on |cos(alpha + theta)| for spin-orbit couplings.
CONSTRAINT_ATOL = 1e-10

_DRAWS_PER_RUN = 4


class Variant(str, enum.Enum):
    XYZ = "xyz"
    SOC = "soc"


class PrepPolicy(str, enum.Enum):
    UNIFORM = "uniform"
    ROUND_ROBIN = "roundrobin"


_FORBIDDEN = {
    Variant.XYZ: (("u*u", "e4"), ("u*vbar", "e2"), ("v*u", "e3"), ("v*vbar", "e1")),
    Variant.SOC: (("u*u", "e'2"), ("u*w", "e'4"), ("v*u", "e'3"), ("v*w", "e'1")),
}


def forbidden_map_for(variant: Variant) -> tuple[tuple[str, str], ...]:
    """The fixed preparation → forbidden-outcome pairs of a variant."""
    return _FORBIDDEN[Variant(variant)]


def _build_preparations(
    variant: Variant, params: OverlapParams
) -> tuple[tuple[str, JointState], ...]:
    if variant is Variant.XYZ:
        u, v, other = build_pair_xyz(params)
        other_label = "vbar"
    else:
        u, v, other = build_pair_soc(params)
        other_label = "w"
    return (
        ("u*u", tensor(u, u)),
        (f"u*{other_label}", tensor(u, other)),
        ("v*u", tensor(v, u)),
        (f"v*{other_label}", tensor(v, other)),
    )


@dataclass(frozen=True)
class ProtocolInstance:
    """A verified protocol: states, spectrum, and the forbidden bijection."""

    variant: Variant
    params: OverlapParams
    couplings: CouplingSet
    spectrum: Spectrum
    preparations: tuple[tuple[str, JointState], ...]
    forbidden: tuple[tuple[str, str], ...]

    @property
    def prep_labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.preparations)

    @property
    def outcome_labels(self) -> tuple[str, ...]:
        return self.spectrum.labels

    @property
    def forbidden_map(self) -> dict[str, str]:
        return dict(self.forbidden)

    def preparation(self, label: str) -> JointState:
        for lab, state in self.preparations:
            if lab == label:
                return state
        raise ValidationError(f"unknown preparation {label!r}")

    def born_matrix(self) -> np.ndarray:
        """Row p = Born probabilities of preparation p over the outcome labels."""
        return np.array(
            [born_probabilities(state, self.spectrum) for _, state in self.preparations]
        )


def born_probabilities(prep: JointState, spectrum: Spectrum) -> tuple[float, float, float, float]:
    """p_k = |⟨e_k|prep⟩|² in the spectrum's label order."""
    return tuple(
        abs(joint_overlap(vec, prep)) ** 2 for vec in spectrum.eigenvectors
    )


def orthogonality_residuals(
    variant: Variant,
    params: OverlapParams,
    couplings: CouplingSet,
    *,
    gap_tol: float = GAP_TOL,
) -> dict[tuple[str, str], float]:
    """|⟨e_k|prep⟩| for each (preparation, nominally forbidden outcome) pair.

    Does not require the spin-orbit constraint to hold, so it doubles as the
    negative control: couplings off the constraint surface leave two of the
    four residuals at |cos(alpha + theta)| / sqrt(2).
    """
    variant = Variant(variant)
    if variant is Variant.XYZ:
        spectrum = analytic_spectrum_xyz(couplings, gap_tol=gap_tol)
    else:
        spectrum = analytic_spectrum_soc(couplings, gap_tol=gap_tol)
    preps = dict(_build_preparations(variant, params))
    vecs = dict(zip(spectrum.labels, spectrum.eigenvectors))
    return {
        (prep_label, outcome_label): abs(joint_overlap(vecs[outcome_label], preps[prep_label]))
        for prep_label, outcome_label in _FORBIDDEN[variant]
    }


def make_protocol(
    variant: Variant,
    params: OverlapParams,
    couplings: CouplingSet,
    *,
    gap_tol: float = GAP_TOL,
    ortho_atol: float = ORTHO_ATOL,
    constraint_atol: float = CONSTRAINT_ATOL,
) -> ProtocolInstance:
    """Assemble and verify a protocol instance.

    Raises :class:`ConstraintError` when the spin-orbit couplings miss
    cos(alpha + theta) = 0, or when any forbidden-outcome overlap exceeds
    ``ortho_atol``; degeneracy errors from the spectrum propagate.
    """
    variant = Variant(variant)
    if variant is Variant.XYZ:
        spectrum = analytic_spectrum_xyz(couplings, gap_tol=gap_tol)
    else:
        spectrum = analytic_spectrum_soc(couplings, gap_tol=gap_tol)
        residual = abs(np.cos(spectrum.alpha + params.theta))
        if residual > constraint_atol:
            raise ConstraintError(
                f"couplings violate cos(alpha + theta) = 0: |cos| = {residual!r} "
                f"(tolerance {constraint_atol})",
                residual=float(residual),
            )
    preparations = _build_preparations(variant, params)
    forbidden = _FORBIDDEN[variant]
    vecs = dict(zip(spectrum.labels, spectrum.eigenvectors))
    preps = dict(preparations)
    for prep_label, outcome_label in forbidden:
        residual = abs(joint_overlap(vecs[outcome_label], preps[prep_label]))
        if residual > ortho_atol:
            raise ConstraintError(
                f"⟨{outcome_label}|{prep_label}⟩ = {residual!r} exceeds {ortho_atol}",
                residual=float(residual),
            )
    return ProtocolInstance(
        variant=variant,
        params=params,
        couplings=couplings,
        spectrum=spectrum,
        preparations=preparations,
        forbidden=forbidden,
    )


@dataclass(frozen=True)
class TallyTable:
    """Counts per (preparation, outcome) from one simulated experiment."""

    prep_labels: tuple[str, ...]
    outcome_labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]
    n_runs: int
    seed: int
    noise_eps: float
    policy: str
    forbidden: tuple[tuple[str, str], ...]

    def __post_init__(self):
        total = sum(sum(row) for row in self.counts)
        if total != self.n_runs:
            raise ValidationError(
                f"tally counts sum to {total}, expected n_runs = {self.n_runs}"
            )
        if any(c < 0 for row in self.counts for c in row):
            raise ValidationError("tally counts must be nonnegative")

    def runs_for(self, prep_label: str) -> int:
        return sum(self.counts[self.prep_labels.index(prep_label)])

    def frequency(self, prep_label: str, outcome_label: str) -> float:
        p = self.prep_labels.index(prep_label)
        k = self.outcome_labels.index(outcome_label)
        runs = sum(self.counts[p])
        return self.counts[p][k] / runs if runs else 0.0

    def is_forbidden(self, prep_label: str, outcome_label: str) -> bool:
        return (prep_label, outcome_label) in self.forbidden

    def to_csv_rows(self) -> list[list]:
        rows = []
        for p, prep in enumerate(self.prep_labels):
            runs = sum(self.counts[p])
            for k, outcome in enumerate(self.outcome_labels):
                freq = self.counts[p][k] / runs if runs else 0.0
                rows.append(
                    [prep, outcome, self.counts[p][k], freq, self.is_forbidden(prep, outcome)]
                )
        return rows

    def to_json(self) -> dict:
        return {
            "prep_labels": list(self.prep_labels),
            "outcome_labels": list(self.outcome_labels),
            "counts": [list(row) for row in self.counts],
            "n_runs": self.n_runs,
            "seed": self.seed,
            "noise_eps": self.noise_eps,
            "policy": self.policy,
            "forbidden": [list(pair) for pair in self.forbidden],
        }


def _tally_chunk(
    lo: int,
    hi: int,
    seed: int,
    cum: np.ndarray,
    last_live: np.ndarray,
    noise_eps: float,
    policy: PrepPolicy,
) -> np.ndarray:
    draws = run_uniforms(seed, lo, hi, _DRAWS_PER_RUN)
    if policy is PrepPolicy.UNIFORM:
        prep_idx = np.minimum((draws[:, 0] * 4.0).astype(np.int64), 3)
    else:
        prep_idx = np.arange(lo, hi, dtype=np.int64) % 4
    outcome = np.empty(hi - lo, dtype=np.int64)
    for p in range(4):
        mask = prep_idx == p
        if not np.any(mask):
            continue
        # side="right" keeps zero-probability outcomes unreachable even when a
        # draw lands exactly on a cumulative boundary.
        idx = np.searchsorted(cum[p], draws[mask, 1], side="right")
        outcome[mask] = np.minimum(idx, last_live[p])
    if noise_eps > 0.0:
        flips = draws[:, 2] < noise_eps
        outcome[flips] = np.minimum((draws[flips, 3] * 4.0).astype(np.int64), 3)
    return np.bincount(prep_idx * 4 + outcome, minlength=16).reshape(4, 4)


def simulate(
    inst: ProtocolInstance,
    n_runs: int,
    seed: int,
    noise_eps: float = 0.0,
    prep_policy: PrepPolicy | str = PrepPolicy.UNIFORM,
    *,
    n_workers: int = 1,
) -> TallyTable:
    """Run the experiment n_runs times; deterministic in (seed, inputs).

    Run i consumes exactly the four draws of its own counter stream
    (preparation, outcome, noise flip, noise replacement), so any n_workers
    yields the same table as sequential execution.
    """
    if n_runs < 1:
        raise ValidationError(f"n_runs must be >= 1, got {n_runs}")
    validate_seed(seed)
    if not 0.0 <= noise_eps <= 1.0:
        raise ValidationError(f"noise_eps must lie in [0, 1], got {noise_eps}")
    policy = PrepPolicy(prep_policy)
    if n_workers < 1:
        raise ValidationError(f"n_workers must be >= 1, got {n_workers}")

    born = inst.born_matrix()
    cum = np.cumsum(born, axis=1)
    # Highest outcome index with nonzero Born weight; rounding can leave
    # cum[-1] a hair under 1, and such draws belong to the last live outcome.
    last_live = np.array([int(np.max(np.nonzero(row)[0])) for row in born])

    bounds = np.linspace(0, n_runs, n_workers + 1, dtype=np.int64)
    chunks = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    if len(chunks) == 1:
        total = _tally_chunk(*chunks[0], seed, cum, last_live, noise_eps, policy)
    else:
        total = np.zeros((4, 4), dtype=np.int64)
        with concurrent.futures.ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            futures = [
                pool.submit(_tally_chunk, lo, hi, seed, cum, last_live, noise_eps, policy)
                for lo, hi in chunks
            ]
            for fut in futures:
                total = total + fut.result()
    return TallyTable(
        prep_labels=inst.prep_labels,
        outcome_labels=inst.outcome_labels,
        counts=tuple(tuple(int(x) for x in row) for row in total),
        n_runs=n_runs,
        seed=seed,
        noise_eps=float(noise_eps),
        policy=policy.value,
        forbidden=inst.forbidden,
    )


@dataclass(frozen=True)
class ForbiddenRates:
    """Per-preparation forbidden-outcome frequency and its maximum."""

    per_preparation: tuple[tuple[str, float], ...]
    eps_hat: float

    def to_json(self) -> dict:
        return {
            "per_preparation": {label: rate for label, rate in self.per_preparation},
            "eps_hat": self.eps_hat,
        }


def forbidden_rate(table: TallyTable) -> ForbiddenRates:
    """Frequency of each preparation's forbidden outcome; eps_hat is the max."""
    if not table.counts or table.n_runs < 1:
        raise ValidationError("tally table has no counts")
    rates = []
    for prep_label, outcome_label in table.forbidden:
        rates.append((prep_label, table.frequency(prep_label, outcome_label)))
    return ForbiddenRates(
        per_preparation=tuple(rates), eps_hat=max(rate for _, rate in rates)
    )
