"""Single- and two-qubit pure states in the z spin basis.

Conventions used throughout the package:

- |+⟩ = spin up along z, |−⟩ = spin down; a :class:`PureState` stores the two
  complex amplitudes in that order.
- Two-qubit amplitudes are ordered (|++⟩, |+−⟩, |−+⟩, |−−⟩), first factor A,
  second factor B.
- A pair of distinct, non-orthogonal states is parametrized by
  theta = arccos|⟨u|v⟩| in the open interval (0, π/2) and phi = arg⟨u|v⟩.
- States carry their constructed global phase (the u states carry e^{-i phi});
  physical comparisons go through :func:`fidelity`, which ignores phase.

Two state families are provided: the x-z Bloch-plane pair (u, v) with the
companion state vbar orthogonal to v inside span{u, v}, and the pair (u, v)
with companion w obtained by swapping the roles of cos(theta) and sin(theta),
used by the spin-orbit protocol.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError

#: Absolute tolerance for normalization and orthogonality checks.
NORM_ATOL = 1e-12

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PureState:
    """A normalized single-qubit state (amp_plus |+⟩ + amp_minus |−⟩)."""

    amp_plus: complex
    amp_minus: complex

    def __post_init__(self):
        object.__setattr__(self, "amp_plus", complex(self.amp_plus))
        object.__setattr__(self, "amp_minus", complex(self.amp_minus))
        _check_normalized(self.norm_sq(), "PureState")

    def norm_sq(self) -> float:
        return abs(self.amp_plus) ** 2 + abs(self.amp_minus) ** 2

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.amp_plus, self.amp_minus], dtype=complex)

    def to_json(self) -> list[list[float]]:
        """Amplitudes as [re, im] pairs (full double precision round-trips)."""
        return [[z.real, z.imag] for z in (self.amp_plus, self.amp_minus)]

    @classmethod
    def from_json(cls, pairs) -> "PureState":
        if len(pairs) != 2:
            raise ValidationError(f"PureState needs 2 amplitude pairs, got {len(pairs)}")
        return cls(*(complex(re, im) for re, im in pairs))


@dataclass(frozen=True)
class JointState:
    """A normalized two-qubit state over (|++⟩, |+−⟩, |−+⟩, |−−⟩)."""

    amps: tuple[complex, complex, complex, complex]

    def __post_init__(self):
        if len(self.amps) != 4:
            raise ValidationError(f"JointState needs 4 amplitudes, got {len(self.amps)}")
        object.__setattr__(self, "amps", tuple(complex(a) for a in self.amps))
        _check_normalized(self.norm_sq(), "JointState")

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amps))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.amps, dtype=complex)

    def to_json(self) -> list[list[float]]:
        return [[a.real, a.imag] for a in self.amps]

    @classmethod
    def from_json(cls, pairs) -> "JointState":
        if len(pairs) != 4:
            raise ValidationError(f"JointState needs 4 amplitude pairs, got {len(pairs)}")
        return cls(tuple(complex(re, im) for re, im in pairs))

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "JointState":
        return cls(tuple(complex(z) for z in np.asarray(vec, dtype=complex).reshape(4)))


@dataclass(frozen=True)
class OverlapParams:
    """Overlap parameters of a distinct, non-orthogonal state pair.

    theta must lie strictly inside (0, π/2): theta = 0 would make the pair
    identical and theta = π/2 orthogonal, and orthogonal pairs are already
    settled (they never share an ontic state).  phi is reduced mod 2π.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        if not 0.0 < theta < math.pi / 2.0:
            raise DomainError(
                f"theta must lie strictly inside (0, pi/2), got {theta!r}"
            )
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)


def _check_normalized(norm_sq: float, what: str, atol: float = NORM_ATOL) -> None:
    if not math.isfinite(norm_sq) or abs(norm_sq - 1.0) > atol:
        raise ValidationError(
            f"{what} is not normalized: |amps|^2 = {norm_sq!r} (tolerance {atol})"
        )


def overlap(u: PureState, v: PureState, *, atol: float = NORM_ATOL) -> complex:
    """Inner product ⟨u|v⟩ = conj(u)·v."""
    for name, s in (("u", u), ("v", v)):
        ns = s.norm_sq()
        if abs(ns - 1.0) > atol:
            raise ValidationError(f"state {name} is not normalized: |amps|^2 = {ns!r}")
    return (
        u.amp_plus.conjugate() * v.amp_plus + u.amp_minus.conjugate() * v.amp_minus
    )


def joint_overlap(x: JointState, y: JointState) -> complex:
    """Inner product ⟨x|y⟩ of two-qubit states."""
    return complex(np.vdot(x.vector, y.vector))


def fidelity(x, y) -> float:
    """Phase-insensitive |⟨x|y⟩|² for two states of the same kind."""
    if isinstance(x, PureState):
        return abs(overlap(x, y)) ** 2
    return abs(joint_overlap(x, y)) ** 2


def build_pair_xyz(p: OverlapParams) -> tuple[PureState, PureState, PureState]:
    """States (u, v, vbar) of the Bloch-plane family.

    u = e^{-i phi}(cos(θ/2)|+⟩ − sin(θ/2)|−⟩), v = cos(θ/2)|+⟩ + sin(θ/2)|−⟩,
    and vbar = −sin(θ/2)|+⟩ + cos(θ/2)|−⟩ is orthogonal to v within span{u, v}.
    """
    half = p.theta / 2.0
    c, s = math.cos(half), math.sin(half)
    phase = cmath.exp(-1j * p.phi)
    u = PureState(phase * c, -phase * s)
    v = PureState(c, s)
    vbar = PureState(-s, c)
    return u, v, vbar


def build_pair_soc(p: OverlapParams) -> tuple[PureState, PureState, PureState]:
    """States (u, v, w) of the spin-orbit family.

    u = e^{-i phi}|+⟩, v = cos θ|+⟩ + sin θ|−⟩, w = sin θ|+⟩ + cos θ|−⟩.
    At theta = π/4 the states v and w coincide.
    """
    c, s = math.cos(p.theta), math.sin(p.theta)
    phase = cmath.exp(-1j * p.phi)
    u = PureState(phase, 0.0)
    v = PureState(c, s)
    w = PureState(s, c)
    return u, v, w


def tensor(a: PureState, b: PureState, *, atol: float = NORM_ATOL) -> JointState:
    """Product state a ⊗ b in the fixed (++, +−, −+, −−) order."""
    for name, s in (("a", a), ("b", b)):
        ns = s.norm_sq()
        if abs(ns - 1.0) > atol:
            raise ValidationError(f"state {name} is not normalized: |amps|^2 = {ns!r}")
    return JointState(
        (
            a.amp_plus * b.amp_plus,
            a.amp_plus * b.amp_minus,
            a.amp_minus * b.amp_plus,
            a.amp_minus * b.amp_minus,
        )
    )


def params_from_overlap(ov: complex) -> OverlapParams:
    """Recover (theta, phi) from an overlap value cos(θ)·e^{i phi}."""
    mag = abs(ov)
    if mag > 1.0 + NORM_ATOL:
        raise ValidationError(f"|overlap| = {mag!r} exceeds 1")
    theta = math.acos(min(mag, 1.0))
    return OverlapParams(theta=theta, phi=cmath.phase(ov) % TWO_PI)
