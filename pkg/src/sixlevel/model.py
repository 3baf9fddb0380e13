"""Parameter records for a six-level atomic ladder driven by five laser fields.

The level scheme couples three ground levels |1>, |3>, |5> and three excited
levels |2>, |4>, |6> in a chain

    |1> --P-- |2> --C-- |3> --S-- |4> --B-- |5> --T-- |6>

where P (probe), S (signal), T (trigger) are weak pulsed fields and C, B are
strong cw control fields.  Everything downstream (steady states,
susceptibilities, group velocities, phase tables) is a pure function of the
two records defined here.

Unit conventions
----------------
SI throughout.  All rates, Rabi frequencies and detunings are angular
(rad/s == s^-1); quoted literature values in s^-1 are taken as angular.
Dipole matrix elements in C*m, atomic density in m^-3, optical frequencies
in rad/s.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi

from scipy.constants import c as _c, epsilon_0 as _epsilon_0, hbar as _hbar


@dataclass(frozen=True)
class PhysicalConstants:
    """Fixed CODATA constants (not user-configurable)."""

    hbar: float = _hbar        # J*s
    epsilon0: float = _epsilon_0  # F/m
    c: float = _c              # m/s


CONSTANTS = PhysicalConstants()

#: Effective |5S_1/2> -> |5P_1/2> dipole moment of Rb-87, C*m.  The absolute
#: scale of velocities and interaction lengths depends on this choice.
RB87_D1_DIPOLE = 2.54e-29

#: Rb-87 D1 line, 794.98 nm, as angular frequency.  Zeeman sublevels are
#: treated as degenerate at optical scale.
RB87_D1_OMEGA = 2 * pi * _c / 794.98e-9


@dataclass(frozen=True)
class AtomParams:
    """Static properties of the atomic medium.

    Parameters
    ----------
    gamma : tuple of 6 floats
        Decay rate of each level |1>..|6| in s^-1.  For the excited levels
        (indices 1, 3, 5 here, i.e. |2>, |4>, |6>) these are spontaneous
        decay rates; for the ground levels they model dephasing.
    dipole_12, dipole_34, dipole_56 : float
        Magnitudes of the electric-dipole matrix elements |D_ij| on the
        three weak transitions, C*m.
    density : float
        Atomic number density, m^-3.
    omega_P, omega_S, omega_T : float
        Optical angular frequencies of the three weak fields, rad/s.
    """

    gamma: tuple[float, float, float, float, float, float]
    density: float
    dipole_12: float = RB87_D1_DIPOLE
    dipole_34: float = RB87_D1_DIPOLE
    dipole_56: float = RB87_D1_DIPOLE
    omega_P: float = RB87_D1_OMEGA
    omega_S: float = RB87_D1_OMEGA
    omega_T: float = RB87_D1_OMEGA

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        if len(self.gamma) != 6:
            raise ValueError("gamma must contain exactly six rates")
        if any(g < 0 for g in self.gamma):
            raise ValueError("decay/dephasing rates must be >= 0")
        for name in ("dipole_12", "dipole_34", "dipole_56"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.density <= 0:
            raise ValueError("density must be > 0")
        for name in ("omega_P", "omega_S", "omega_T"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class DriveParams:
    """Complex Rabi frequencies and one-photon detunings of the five fields.

    Rabi frequencies follow Omega_k = -D_ij E_k / hbar and are stored as
    complex numbers; only |Omega|^2 enters the closed-form susceptibilities,
    but the amplitude equations use the phases and conjugations explicitly.
    """

    rabi_P: complex
    rabi_C: complex
    rabi_S: complex
    rabi_B: complex
    rabi_T: complex
    delta: tuple[float, float, float, float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", tuple(float(d) for d in self.delta))
        if len(self.delta) != 5:
            raise ValueError("delta must contain exactly five detunings")
        for name in ("rabi_P", "rabi_C", "rabi_S", "rabi_B", "rabi_T"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def is_weak_field(self) -> bool:
        """True when each pulsed intensity is below both control intensities."""
        ctrl = min(abs(self.rabi_C) ** 2, abs(self.rabi_B) ** 2)
        return all(
            abs(r) ** 2 < ctrl for r in (self.rabi_P, self.rabi_S, self.rabi_T)
        )


@dataclass(frozen=True)
class CompositeDetunings:
    """Chained multi-photon detunings delta_12 .. delta_15, s^-1."""

    delta12: float
    delta13: float
    delta14: float
    delta15: float


@dataclass(frozen=True)
class ComplexDenominators:
    """Complex resonance denominators d_2 .. d_6, s^-1.

    d_n = (composite detuning reached at level n) - i*Gamma_n/2, so the
    imaginary part is always -Gamma_n/2 regardless of the detunings.
    """

    d2: complex
    d3: complex
    d4: complex
    d5: complex
    d6: complex

    def as_tuple(self) -> tuple[complex, complex, complex, complex, complex]:
        return (self.d2, self.d3, self.d4, self.d5, self.d6)


def composite_detunings(drive: DriveParams) -> CompositeDetunings:
    """Chain the one-photon detunings along the ladder.

    delta12 = delta1 - delta2, delta13 = delta12 + delta3,
    delta14 = delta13 - delta4, delta15 = delta14 + delta5.
    """
    d1, d2, d3, d4, d5 = drive.delta
    delta12 = d1 - d2
    delta13 = delta12 + d3
    delta14 = delta13 - d4
    delta15 = delta14 + d5
    return CompositeDetunings(delta12, delta13, delta14, delta15)


def complex_denominators(drive: DriveParams, atom: AtomParams) -> ComplexDenominators:
    """Resonance denominators d_n = detuning - i*Gamma_n/2 for levels 2..6."""
    cd = composite_detunings(drive)
    g = atom.gamma
    return ComplexDenominators(
        d2=drive.delta[0] - 0.5j * g[1],
        d3=cd.delta12 - 0.5j * g[2],
        d4=cd.delta13 - 0.5j * g[3],
        d5=cd.delta14 - 0.5j * g[4],
        d6=cd.delta15 - 0.5j * g[5],
    )
