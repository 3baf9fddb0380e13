"""Closed-form susceptibilities of the probe, signal and trigger fields.

In the weak-field (undepleted ground state) limit the three total
susceptibilities organize as

    chi_P = chi1_P + chi3_PS |E_S|^2 + chi3_PT |E_T|^2 + chi5_PST |E_S|^2 |E_T|^2
    chi_S = chi3_SP |E_P|^2 + chi5_SPT |E_P|^2 |E_T|^2
    chi_T = chi5_TPS |E_P|^2 |E_S|^2

with coefficients that are rational functions of the complex denominators
d_2..d_6 and the control intensities.  When the two-photon resonances are
met and the ground-state dephasings vanish (d3 = d5 = 0), the linear and
third-order coefficients vanish identically while the fifth-order ones
survive with near-resonantly enhanced magnitudes: the medium is then a pure
fifth-order (three-field cross-phase) nonlinearity.

Note: the signal susceptibility has no linear term by construction - level
|3>, the source of the signal transition, is unpopulated at zeroth order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EITPoleError
from .model import CONSTANTS, AtomParams, DriveParams, complex_denominators

#: Denominators whose SI magnitude falls below this are treated as poles.
EIT_POLE_FLOOR = 1e-30


@dataclass(frozen=True)
class SusceptibilitySet:
    """The seven order-by-order coefficients (SI; m^2/V^2 per intensity order)."""

    chi1_P: complex
    chi3_PS: complex
    chi3_PT: complex
    chi5_PST: complex
    chi3_SP: complex
    chi5_SPT: complex
    chi5_TPS: complex

    def as_dict(self) -> dict[str, complex]:
        return {
            "chi1_P": self.chi1_P,
            "chi3_PS": self.chi3_PS,
            "chi3_PT": self.chi3_PT,
            "chi5_PST": self.chi5_PST,
            "chi3_SP": self.chi3_SP,
            "chi5_SPT": self.chi5_SPT,
            "chi5_TPS": self.chi5_TPS,
        }


@dataclass(frozen=True)
class FieldIntensities:
    """Squared field amplitudes |E_k|^2 in V^2/m^2."""

    e2_P: float
    e2_S: float
    e2_T: float

    def __post_init__(self) -> None:
        if min(self.e2_P, self.e2_S, self.e2_T) < 0:
            raise ValueError("intensities must be >= 0")

    @classmethod
    def from_drive(cls, drive: DriveParams, atom: AtomParams) -> "FieldIntensities":
        """|E_k|^2 = hbar^2 |Omega_k|^2 / |D_ij|^2."""
        h2 = CONSTANTS.hbar**2
        return cls(
            e2_P=h2 * abs(drive.rabi_P) ** 2 / atom.dipole_12**2,
            e2_S=h2 * abs(drive.rabi_S) ** 2 / atom.dipole_34**2,
            e2_T=h2 * abs(drive.rabi_T) ** 2 / atom.dipole_56**2,
        )


def _guarded_denominators(drive: DriveParams, atom: AtomParams):
    d = complex_denominators(drive, atom)
    qC = d.d2 * d.d3 - abs(drive.rabi_C) ** 2
    qB = d.d4 * d.d5 - abs(drive.rabi_B) ** 2
    for name, value in (("d2*d3 - |Omega_C|^2", qC),
                        ("d4*d5 - |Omega_B|^2", qB),
                        ("d6", d.d6)):
        if abs(value) < EIT_POLE_FLOOR:
            raise EITPoleError(f"denominator {name} vanished ({value!r})")
    return d, qC, qB


def analytic_susceptibilities(drive: DriveParams, atom: AtomParams) -> SusceptibilitySet:
    """Evaluate all seven closed-form coefficients.

    Raises
    ------
    EITPoleError
        If `d2*d3 - |Omega_C|^2`, `d4*d5 - |Omega_B|^2` or `d6` vanishes;
        the message names the offending denominator.
    """
    d, qC, qB = _guarded_denominators(drive, atom)
    hbar, eps0 = CONSTANTS.hbar, CONSTANTS.epsilon0
    n = atom.density
    D12, D34, D56 = atom.dipole_12, atom.dipole_34, atom.dipole_56
    oC2 = abs(drive.rabi_C) ** 2
    oB2 = abs(drive.rabi_B) ** 2

    k1 = n * D12**2 / (hbar * eps0)
    k3s = n * D12**2 * D34**2 / (hbar**3 * eps0)
    k3t = n * D12**2 * D56**2 / (hbar**3 * eps0)
    k5 = n * D12**2 * D34**2 * D56**2 / (hbar**5 * eps0)

    return SusceptibilitySet(
        chi1_P=k1 * d.d3 / qC,
        chi3_PS=-k3s * d.d5 / (qB * qC),
        chi3_PT=-k3t * d.d3 * d.d4 / (d.d6 * qB * qC),
        chi5_PST=k5 / (d.d6 * qB * qC),
        chi3_SP=k3s * d.d5 * oC2 / (qB * abs(qC) ** 2),
        chi5_SPT=-k5 * (
            oC2 / (d.d6 * qB * abs(qC) ** 2)
            + d.d4.conjugate() * d.d5 * oC2
            / (d.d6.conjugate() * abs(qB) ** 2 * abs(qC) ** 2)
        ),
        chi5_TPS=k5 * oB2 * oC2 / (d.d6 * abs(qB) ** 2 * abs(qC) ** 2),
    )


def signal_trigger_kerr(drive: DriveParams, atom: AtomParams) -> complex:
    """Cross-Kerr coefficient of the signal conditioned on the trigger alone.

    The phase-table bookkeeping carries a third-order signal shift driven by
    the trigger intensity, even though the total signal susceptibility has
    no such term.  The coefficient used for it is the mirror image of
    `chi3_SP` under reflection of the chain (P <-> T, C <-> B, d3 <-> d5,
    d2 <-> d6): it vanishes proportionally to d3 at the two-photon
    resonance, so it contributes nothing at the intended operating point.
    """
    d, qC, qB = _guarded_denominators(drive, atom)
    hbar, eps0 = CONSTANTS.hbar, CONSTANTS.epsilon0
    k3 = atom.density * atom.dipole_34**2 * atom.dipole_56**2 / (hbar**3 * eps0)
    qC_mirror = d.d4 * d.d3 - abs(drive.rabi_C) ** 2
    qB_mirror = d.d6 * d.d5 - abs(drive.rabi_B) ** 2
    if abs(qC_mirror) < EIT_POLE_FLOOR or abs(qB_mirror) < EIT_POLE_FLOOR:
        raise EITPoleError("mirror denominator vanished in signal-trigger coefficient")
    return k3 * d.d3 * abs(drive.rabi_B) ** 2 / (qC_mirror * abs(qB_mirror) ** 2)


def total_susceptibilities(
    chi: SusceptibilitySet, f: FieldIntensities
) -> tuple[complex, complex, complex]:
    """Assemble (chi_P, chi_S, chi_T) at the given field intensities."""
    chi_p = (chi.chi1_P + chi.chi3_PS * f.e2_S + chi.chi3_PT * f.e2_T
             + chi.chi5_PST * f.e2_S * f.e2_T)
    chi_s = chi.chi3_SP * f.e2_P + chi.chi5_SPT * f.e2_P * f.e2_T
    chi_t = chi.chi5_TPS * f.e2_P * f.e2_S
    return chi_p, chi_s, chi_t


@dataclass(frozen=True)
class SuppressionReport:
    """How close the working point is to the pure-fifth-order regime."""

    abs_d3: float
    abs_d5: float
    linear_magnitude: float       # |chi1_P|
    third_magnitude: float        # |chi3_PS| e2_S + |chi3_PT| e2_T
    fifth_magnitude: float        # |chi5_PST| e2_S e2_T
    fifth_order_dominant: bool


def suppression_report(drive: DriveParams, atom: AtomParams) -> SuppressionReport:
    """Term-by-term magnitudes of chi_P at the drive's own intensities.

    The `fifth_order_dominant` flag is set when the fifth-order contribution
    exceeds the linear and third-order contributions combined.
    """
    d = complex_denominators(drive, atom)
    chi = analytic_susceptibilities(drive, atom)
    f = FieldIntensities.from_drive(drive, atom)
    linear = abs(chi.chi1_P)
    third = abs(chi.chi3_PS) * f.e2_S + abs(chi.chi3_PT) * f.e2_T
    fifth = abs(chi.chi5_PST) * f.e2_S * f.e2_T
    return SuppressionReport(
        abs_d3=abs(d.d3),
        abs_d5=abs(d.d5),
        linear_magnitude=linear,
        third_magnitude=third,
        fifth_magnitude=fifth,
        fifth_order_dominant=fifth > linear + third,
    )
