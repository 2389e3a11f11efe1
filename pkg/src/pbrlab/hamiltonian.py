"""Two-spin interaction Hamiltonians and their spectra.

Two 4x4 Hermitian families are built from Pauli Kronecker products over the
fixed basis (|++⟩, |+−⟩, |−+⟩, |−−⟩):

- anisotropic exchange: a XX + b YY + c ZZ, diagonalized by the four Bell
  states with eigenvalues (a−b+c, −a+b+c, a+b−c, −(a+b+c));
- the same plus an antisymmetric spin-orbit term d (XZ − ZX), which leaves
  Φ⁻ and Ψ⁺ untouched and mixes Φ⁺ with Ψ⁻ through an angle alpha with
  tan(alpha) = (a + c + sqrt((a+c)² + 4d²)) / (2d).

Analytic spectra keep the protocol's outcome labels (e1..e4, e'1..e'4); the
independent numeric route is a self-contained cyclic Jacobi diagonalization
that orders eigenvalues ascending, so spectra from the two routes are matched
by eigenvector fidelity, never by index.

The protocols only need four *distinguishable* outcomes, so every spectrum
operation enforces pairwise eigenvalue gaps above ``gap_tol`` (the
non-degeneracy conditions a ≠ ±b resp. a ≠ c are necessary but not
sufficient for that).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    DegeneracyError,
    DomainError,
    LogicError,
    ValidationError,
)
from .qstate import JointState

#: Default minimum pairwise eigenvalue gap.
GAP_TOL = 1e-9

_RT2 = math.sqrt(0.5)

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

#: Bell states in label order (Φ⁺, Φ⁻, Ψ⁺, Ψ⁻).
BELL_NAMES = ("Phi+", "Phi-", "Psi+", "Psi-")


def bell_states() -> tuple[JointState, JointState, JointState, JointState]:
    return (
        JointState((_RT2, 0.0, 0.0, _RT2)),
        JointState((_RT2, 0.0, 0.0, -_RT2)),
        JointState((0.0, _RT2, _RT2, 0.0)),
        JointState((0.0, _RT2, -_RT2, 0.0)),
    )


@dataclass(frozen=True)
class CouplingSet:
    """Real, dimensionless coupling strengths; d is the spin-orbit term."""

    a: float
    b: float
    c: float
    d: float | None = None

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.d is not None:
            object.__setattr__(self, "d", float(self.d))

    @property
    def d_or_zero(self) -> float:
        return 0.0 if self.d is None else self.d


@dataclass(frozen=True)
class HamiltonianMatrix:
    """A 4x4 Hermitian matrix over the (++, +−, −+, −−) basis."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape != (4, 4):
            raise ValidationError(f"expected a 4x4 matrix, got shape {m.shape}")
        if not np.array_equal(m, m.conj().T):
            raise ValidationError("matrix is not Hermitian (entries != conjugate transpose)")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def to_json(self) -> list[list[list[float]]]:
        return [[[z.real, z.imag] for z in row] for row in self.entries.tolist()]


@dataclass(frozen=True)
class Spectrum:
    """Four (eigenvalue, eigenvector) pairs plus the mixing angle when defined."""

    eigenvalues: tuple[float, float, float, float]
    eigenvectors: tuple[JointState, JointState, JointState, JointState]
    labels: tuple[str, str, str, str]
    alpha: float | None = None

    def min_gap(self) -> float:
        vals = self.eigenvalues
        return min(
            abs(vals[i] - vals[j]) for i in range(4) for j in range(i + 1, 4)
        )

    def to_json(self) -> dict:
        out = {
            "labels": list(self.labels),
            "eigenvalues": list(self.eigenvalues),
            "eigenvectors": [v.to_json() for v in self.eigenvectors],
        }
        if self.alpha is not None:
            out["alpha"] = self.alpha
        return out


def build_xyz(c: CouplingSet) -> HamiltonianMatrix:
    """a XX + b YY + c ZZ as an explicit matrix (any d on c is ignored)."""
    m = (
        c.a * np.kron(PAULI_X, PAULI_X)
        + c.b * np.kron(PAULI_Y, PAULI_Y)
        + c.c * np.kron(PAULI_Z, PAULI_Z)
    )
    return HamiltonianMatrix(m)


def build_soc(c: CouplingSet) -> HamiltonianMatrix:
    """The exchange matrix plus the antisymmetric term d (XZ − ZX)."""
    m = (
        c.a * np.kron(PAULI_X, PAULI_X)
        + c.b * np.kron(PAULI_Y, PAULI_Y)
        + c.c * np.kron(PAULI_Z, PAULI_Z)
        + c.d_or_zero * (np.kron(PAULI_X, PAULI_Z) - np.kron(PAULI_Z, PAULI_X))
    )
    return HamiltonianMatrix(m)


def xyz_eigenvalues(c: CouplingSet) -> tuple[float, float, float, float]:
    return (
        c.a - c.b + c.c,
        -c.a + c.b + c.c,
        c.a + c.b - c.c,
        -(c.a + c.b + c.c),
    )


def soc_eigenvalues(c: CouplingSet) -> tuple[float, float, float, float]:
    root = math.hypot(c.a + c.c, 2.0 * c.d_or_zero)
    return (-c.a + c.b + c.c, c.a + c.b - c.c, -c.b - root, -c.b + root)


def soc_alpha(c: CouplingSet) -> float:
    """Mixing angle of the Φ⁺/Ψ⁻ block, principal branch of the arctangent."""
    d = c.d_or_zero
    if d == 0.0:
        raise DomainError("mixing angle is undefined at d = 0")
    s = c.a + c.c
    return math.atan((s + math.hypot(s, 2.0 * d)) / (2.0 * d))


def _check_gaps(values, labels, gap_tol: float) -> None:
    if gap_tol <= 0.0:
        return
    colliding = [
        (labels[i], labels[j])
        for i in range(4)
        for j in range(i + 1, 4)
        if abs(values[i] - values[j]) < gap_tol
    ]
    if colliding:
        detail = ", ".join(
            f"{li} = {values[labels.index(li)]!r} vs {lj} = {values[labels.index(lj)]!r}"
            for li, lj in colliding
        )
        raise DegeneracyError(
            f"degenerate spectrum (gap_tol={gap_tol}): {detail}",
            pairs=tuple(colliding),
        )


def analytic_spectrum_xyz(c: CouplingSet, gap_tol: float = GAP_TOL) -> Spectrum:
    """Bell-state spectrum of the exchange Hamiltonian, labels e1..e4."""
    if c.d_or_zero != 0.0:
        raise ValidationError(f"exchange variant requires d absent or zero, got d={c.d}")
    labels = ("e1", "e2", "e3", "e4")
    values = xyz_eigenvalues(c)
    _check_gaps(values, labels, gap_tol)
    return Spectrum(values, bell_states(), labels)


def analytic_spectrum_soc(c: CouplingSet, gap_tol: float = GAP_TOL) -> Spectrum:
    """Spin-orbit spectrum: e'1 = Φ⁻, e'2 = Ψ⁺, e'3/e'4 the alpha-mixtures."""
    alpha = soc_alpha(c)  # raises DomainError at d = 0
    labels = ("e'1", "e'2", "e'3", "e'4")
    values = soc_eigenvalues(c)
    _check_gaps(values, labels, gap_tol)
    ca, sa = math.cos(alpha), math.sin(alpha)
    _, phi_minus, psi_plus, _ = bell_states()
    e3 = JointState((_RT2 * ca, _RT2 * sa, -_RT2 * sa, _RT2 * ca))
    e4 = JointState((-_RT2 * sa, _RT2 * ca, -_RT2 * ca, -_RT2 * sa))
    return Spectrum(values, (phi_minus, psi_plus, e3, e4), labels, alpha=alpha)


def _jacobi_rotation(a: np.ndarray, p: int, q: int) -> np.ndarray:
    """Unitary equal to identity outside the (p, q) plane that zeroes a[p, q]."""
    apq = a[p, q]
    mag = abs(apq)
    phase = apq / mag
    theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
    sign = 1.0 if theta >= 0.0 else -1.0
    t = sign / (abs(theta) + math.hypot(1.0, theta))
    c = 1.0 / math.hypot(1.0, t)
    s = t * c
    u = np.eye(4, dtype=complex)
    u[p, p] = c
    u[p, q] = s
    u[q, p] = -s * phase.conjugate()
    u[q, q] = c * phase.conjugate()
    return u


def numeric_spectrum(
    m,
    gap_tol: float = GAP_TOL,
    *,
    sweep_budget: int = 60,
    off_tol: float = 1e-14,
) -> Spectrum:
    """Diagonalize by cyclic Jacobi rotations; independent of the analytic route.

    Accepts a :class:`HamiltonianMatrix` or a raw 4x4 Hermitian array.
    Eigenvalues are sorted ascending with labels n1..n4; each eigenvector is
    gauged so its largest component is real and positive.  Passing
    ``gap_tol=0`` skips the degeneracy check (the zero matrix is a legitimate
    input for the solver even though no protocol can use it).
    """
    if not isinstance(m, HamiltonianMatrix):
        m = HamiltonianMatrix(m)
    a = np.array(m.entries, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    v = np.eye(4, dtype=complex)
    mask = ~np.eye(4, dtype=bool)
    converged = False
    for _ in range(sweep_budget):
        off = math.sqrt(float(np.sum(np.abs(a[mask]) ** 2)))
        if off <= off_tol * scale:
            converged = True
            break
        for p in range(3):
            for q in range(p + 1, 4):
                if abs(a[p, q]) <= 1e-300:
                    continue
                u = _jacobi_rotation(a, p, q)
                a = u.conj().T @ a @ u
                v = v @ u
    if not converged:
        raise ConvergenceError(
            f"Jacobi sweep budget ({sweep_budget}) exhausted; off-diagonal norm {off!r}"
        )
    values = np.diag(a).real
    order = np.argsort(values, kind="stable")
    values = values[order]
    vecs = []
    for k in order:
        col = v[:, k]
        col = col / np.linalg.norm(col)
        pivot = col[int(np.argmax(np.abs(col)))]
        col = col * (abs(pivot) / pivot)
        vecs.append(JointState.from_vector(col))
    labels = ("n1", "n2", "n3", "n4")
    _check_gaps(tuple(values), labels, gap_tol)
    return Spectrum(tuple(float(x) for x in values), tuple(vecs), labels)


def evolve(s: JointState, spec: Spectrum, t: float) -> JointState:
    """Apply exp(-iHt) through the spectral decomposition of H."""
    vec = s.vector
    out = np.zeros(4, dtype=complex)
    for energy, eigvec in zip(spec.eigenvalues, spec.eigenvectors):
        e = eigvec.vector
        out += cmath.exp(-1j * energy * t) * np.vdot(e, vec) * e
    return JointState.from_vector(out)


@dataclass(frozen=True)
class SpectrumPairing:
    """One matched (analytic, numeric) eigenpair."""

    label: str
    analytic_eigenvalue: float
    numeric_eigenvalue: float
    fidelity: float

    @property
    def abs_diff(self) -> float:
        return abs(self.analytic_eigenvalue - self.numeric_eigenvalue)


def pair_spectra(analytic: Spectrum, numeric: Spectrum) -> tuple[SpectrumPairing, ...]:
    """Match spectra by eigenvector fidelity; requires the match to be a bijection."""
    amat = np.array([v.vector for v in analytic.eigenvectors])
    nmat = np.array([v.vector for v in numeric.eigenvectors])
    fid = np.abs(amat.conj() @ nmat.T) ** 2
    assignment = [int(np.argmax(fid[i])) for i in range(4)]
    if sorted(assignment) != [0, 1, 2, 3]:
        raise LogicError(f"fidelity pairing is not a bijection: {assignment}")
    return tuple(
        SpectrumPairing(
            label=analytic.labels[i],
            analytic_eigenvalue=analytic.eigenvalues[i],
            numeric_eigenvalue=numeric.eigenvalues[j],
            fidelity=float(fid[i, j]),
        )
        for i, j in enumerate(assignment)
    )
