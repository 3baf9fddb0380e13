"""Group velocities, pulse-overlap factors and the conditional phase table.

Near the two-photon resonances the probe, signal and trigger travel at
strongly reduced group velocities.  Because the scheme is asymmetric the
three velocities generally differ; imperfect matching reduces the usable
cross-phase shift through walk-off factors erf(xi)/xi, where the xi combine
medium length, pulse durations and velocity mismatches.

The per-polarization truth table collects, for each of the eight
|P,S,T> polarization combinations, the vacuum (k L), linear, third-order
and fifth-order phase contributions of each field:

    sigma^- probe           -> vacuum phases only, for all three fields
    sigma^+ P, sigma^- S    -> probe adds its linear (transparency) phase
    sigma^+ P,S, sigma^- T  -> P and S add third-order cross-phase shifts
    sigma^+ P,S,T           -> all trigger-conditioned shifts switch on

Phase convention: the linear probe phase is written k L (1 + 2 pi Re chi1),
keeping the Gaussian-units refractive form so tabulated literature values
are reproducible; all nonlinear shifts use Re chi of the matching order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.special import erf

from .errors import NumericalError
from .model import CONSTANTS, AtomParams, DriveParams, composite_detunings
from .susceptibility import (
    SusceptibilitySet,
    analytic_susceptibilities,
    signal_trigger_kerr,
)

TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)

FIELDS = ("P", "S", "T")
PARTS = ("vacuum", "linear", "third", "fifth")


@dataclass(frozen=True)
class GroupVelocities:
    """Group velocities of the three pulsed fields, m/s (inf = undefined)."""

    vg_P: float
    vg_S: float
    vg_T: float

    def as_array(self) -> np.ndarray:
        return np.array([self.vg_P, self.vg_S, self.vg_T])

    @property
    def all_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.as_array())))

    @property
    def max_mismatch(self) -> float:
        """max over ordered pairs of |v_i - v_j| / v_i."""
        v = self.as_array()
        if not self.all_finite:
            return math.inf
        return float(max(abs(v[i] - v[j]) / v[i]
                         for i in range(3) for j in range(3) if i != j))


@dataclass(frozen=True)
class BetaFactors:
    """Velocity-formula factors built from delta_1, delta_3, delta_5 and Gamma."""

    beta1: float
    beta2: float
    beta: float


@dataclass(frozen=True)
class PulseGeometry:
    """Medium length (m) and pulse durations (s)."""

    length: float
    tau_P: float
    tau_S: float
    tau_T: float

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ValueError("length must be >= 0")
        if min(self.tau_P, self.tau_S, self.tau_T) <= 0:
            raise ValueError("pulse durations must be > 0")


@dataclass(frozen=True)
class XiFactors:
    """Walk-off arguments; two-field values keep the sign of the mismatch."""

    xi_PS: float
    xi_PT: float
    xi_ST: float
    xi_PST: float
    xi_SPT: float
    xi_TPS: float


def _mean_gamma(atom: AtomParams, warn: bool) -> float:
    g2, g4, g6 = atom.gamma[1], atom.gamma[3], atom.gamma[5]
    if warn and not (g2 == g4 == g6):
        warnings.warn(
            "excited-state decay rates differ; using their mean in the "
            "group-velocity formulas",
            stacklevel=3,
        )
    return (g2 + g4 + g6) / 3.0


def _check_resonances(drive: DriveParams, warn: bool) -> None:
    cd = composite_detunings(drive)
    scale = max(abs(d) for d in drive.delta) or 1.0
    if warn and (abs(cd.delta12) > 1e-9 * scale or abs(cd.delta14) > 1e-9 * scale):
        warnings.warn(
            "group-velocity formulas assume delta12 = delta14 = 0; "
            f"got delta12={cd.delta12:.3e}, delta14={cd.delta14:.3e}",
            stacklevel=3,
        )


def beta_factors(drive: DriveParams, atom: AtomParams, warn: bool = True) -> BetaFactors:
    """Evaluate beta1, beta2 and beta exactly as defined.

    beta1 = (d3 d5 + G^2/4) / (d5^2 + G^2/4)
    beta2 = [ (d3 d5 + G^2/4)(d5^2 + G^2/4)/|Omega_B|^2
            + (d1 d5 + G^2/4)(d5^2 + G^2/4)/|Omega_C|^2
            - (d5^2 - G^2/4) ] / (d5^2 + G^2/4)^2
    beta  = (d5^2 - G^2/4) / (d5^2 + G^2/4)^2

    with d_i the bare detunings delta_i and G the common excited decay rate.
    """
    _check_resonances(drive, warn)
    g = _mean_gamma(atom, warn)
    d1, _, d3, _, d5 = drive.delta
    g24 = g * g / 4.0
    den = d5 * d5 + g24
    beta1 = (d3 * d5 + g24) / den
    beta = (d5 * d5 - g24) / den**2
    beta2 = (
        (d3 * d5 + g24) * den / abs(drive.rabi_B) ** 2
        + (d1 * d5 + g24) * den / abs(drive.rabi_C) ** 2
        - (d5 * d5 - g24)
    ) / den**2
    return BetaFactors(beta1=beta1, beta2=beta2, beta=beta)


def group_velocities(
    drive: DriveParams, atom: AtomParams, warn: bool = True
) -> GroupVelocities:
    """Group velocities of the three pulsed fields.

    A vanishing denominator (for instance Omega_P = 0 in the signal and
    trigger expressions) yields inf rather than a spurious finite value.
    """
    b = beta_factors(drive, atom, warn=warn)
    hbar, eps0, c = CONSTANTS.hbar, CONSTANTS.epsilon0, CONSTANTS.c
    oC2 = abs(drive.rabi_C) ** 2
    oB2 = abs(drive.rabi_B) ** 2
    oP2 = abs(drive.rabi_P) ** 2
    oS2 = abs(drive.rabi_S) ** 2
    oT2 = abs(drive.rabi_T) ** 2
    num = 2.0 * hbar * eps0 * c * oC2 * oB2
    n = atom.density

    def ratio(numer: float, denom: float) -> float:
        return numer / denom if denom != 0 else math.inf

    vg_p = ratio(num, n * atom.dipole_12**2 * atom.omega_P
                 * (oB2 + oS2 + oT2 * b.beta1 - oS2 * oT2 * b.beta2))
    vg_s = ratio(num, n * atom.dipole_34**2 * atom.omega_S
                 * oP2 * (1.0 + oT2 * b.beta))
    vg_t = ratio(num, n * atom.dipole_56**2 * atom.omega_T
                 * oP2 * oS2 * b.beta)
    return GroupVelocities(vg_P=vg_p, vg_S=vg_s, vg_T=vg_t)


def xi_factors(g: GroupVelocities, p: PulseGeometry) -> XiFactors:
    """Walk-off arguments for the two- and three-field overlap factors.

    xi_XY  = sqrt(2) L (1 - v_X/v_Y) / (tau_Y v_X)
    xi_ijk = sqrt(2) L sqrt[ (1 - v_i/v_j)^2/(tau_j v_i)^2
                           + (1 - v_i/v_k)^2/(tau_k v_i)^2 ]
    """
    L = p.length
    s2 = math.sqrt(2.0)

    def two(v_x: float, v_y: float, tau_y: float) -> float:
        return s2 * L * (1.0 - v_x / v_y) / (tau_y * v_x)

    def three(v_i: float, v_j: float, v_k: float, tau_j: float, tau_k: float) -> float:
        return s2 * L * math.sqrt(
            (1.0 - v_i / v_j) ** 2 / (tau_j * v_i) ** 2
            + (1.0 - v_i / v_k) ** 2 / (tau_k * v_i) ** 2
        )

    return XiFactors(
        xi_PS=two(g.vg_P, g.vg_S, p.tau_S),
        xi_PT=two(g.vg_P, g.vg_T, p.tau_T),
        xi_ST=two(g.vg_S, g.vg_T, p.tau_T),
        xi_PST=three(g.vg_P, g.vg_S, g.vg_T, p.tau_S, p.tau_T),
        xi_SPT=three(g.vg_S, g.vg_P, g.vg_T, p.tau_P, p.tau_T),
        xi_TPS=three(g.vg_T, g.vg_P, g.vg_S, p.tau_P, p.tau_S),
    )


def erf_overlap(xi: float) -> float:
    """erf(xi)/xi, continued through xi = 0 with its limit 2/sqrt(pi).

    Strictly decreasing on xi >= 0; requires xi >= 0.
    """
    if xi < 0:
        raise ValueError("xi must be >= 0")
    if xi < 1e-6:
        x2 = xi * xi
        return TWO_OVER_SQRT_PI * (1.0 - x2 / 3.0 + x2 * x2 / 10.0)
    return float(erf(xi)) / xi


@dataclass(frozen=True)
class PhaseParts:
    """One field's accumulated phase in one truth-table row, radians."""

    vacuum: float
    linear: float
    third: float
    fifth: float

    @property
    def total(self) -> float:
        return self.vacuum + self.linear + self.third + self.fifth


@dataclass(frozen=True)
class PhaseTable:
    """Accumulated phases for all 8 polarization rows and 3 fields.

    Row index is the basis integer of |P S T> with P the most significant
    bit and 1 = sigma^+.  `parts[row, field, part]` is indexed by FIELDS
    and PARTS order.
    """

    parts: np.ndarray  # (8, 3, 4) float

    def __post_init__(self) -> None:
        if self.parts.shape != (8, 3, 4):
            raise ValueError("parts must have shape (8, 3, 4)")

    def phase_parts(self, row: int, field: str) -> PhaseParts:
        v = self.parts[row, FIELDS.index(field)]
        return PhaseParts(vacuum=v[0], linear=v[1], third=v[2], fifth=v[3])

    def field_phase(self, row: int, field: str) -> float:
        return float(self.parts[row, FIELDS.index(field)].sum())

    def total_phase(self, row: int) -> float:
        """phi^P + phi^S + phi^T of one row."""
        return float(self.parts[row].sum())

    def three_body_phase(self) -> float:
        """Genuinely three-conditional phase (alternating-sign row sum).

        Local (single-qubit) phase contributions cancel in this
        combination, leaving exactly the trigger-switched nonlinear shifts.
        """
        total = 0.0
        for row in range(8):
            sign = (-1) ** (3 - bin(row).count("1"))
            total += sign * self.total_phase(row)
        return total

    def to_dict(self) -> dict:
        rows = {}
        for row in range(8):
            key = format(row, "03b")
            rows[key] = {
                f: {p: float(self.parts[row, fi, pi]) for pi, p in enumerate(PARTS)}
                for fi, f in enumerate(FIELDS)
            }
        return {"basis_order": "|P S T>, 1 = sigma+", "rows": rows}

    @classmethod
    def from_dict(cls, data: dict) -> "PhaseTable":
        try:
            rows = data["rows"]
            parts = np.zeros((8, 3, 4))
            for row in range(8):
                entry = rows[format(row, "03b")]
                for fi, f in enumerate(FIELDS):
                    for pi, p in enumerate(PARTS):
                        parts[row, fi, pi] = float(entry[f][p])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"incomplete phase table: missing {exc}") from exc
        return cls(parts=parts)


def _phase_ingredients(drive: DriveParams, atom: AtomParams):
    chi = analytic_susceptibilities(drive, atom)
    chi_st = signal_trigger_kerr(drive, atom)
    vel = group_velocities(drive, atom, warn=False)
    k = (atom.omega_P / CONSTANTS.c, atom.omega_S / CONSTANTS.c,
         atom.omega_T / CONSTANTS.c)
    return chi, chi_st, vel, k


def _assemble_table(
    chi: SusceptibilitySet,
    chi_st: complex,
    vel: GroupVelocities,
    k: tuple[float, float, float],
    drive: DriveParams,
    atom: AtomParams,
    geom: PulseGeometry,
) -> PhaseTable:
    hbar = CONSTANTS.hbar
    L = geom.length
    kP, kS, kT = k
    xi = xi_factors(vel, geom)
    pref = math.pi**1.5 / 4.0
    oP2 = abs(drive.rabi_P) ** 2
    oS2 = abs(drive.rabi_S) ** 2
    oT2 = abs(drive.rabi_T) ** 2
    d12_2 = atom.dipole_12**2
    d34_2 = atom.dipole_34**2
    d56_2 = atom.dipole_56**2

    def overlap(x: float) -> float:
        return erf_overlap(abs(x))

    # the six cross-phase shifts, each proportional to k L Re chi
    phi_PS = kP * L * pref * hbar**2 * oS2 / d34_2 * chi.chi3_PS.real * overlap(xi.xi_PS)
    phi_PT = kP * L * pref * hbar**2 * oT2 / d56_2 * chi.chi3_PT.real * overlap(xi.xi_PT)
    phi_PST = (kP * L * pref * hbar**4 * oS2 * oT2 / (d34_2 * d56_2)
               * chi.chi5_PST.real * overlap(xi.xi_PST))
    phi_ST = kS * L * pref * hbar**2 * oT2 / d56_2 * chi_st.real * overlap(xi.xi_ST)
    phi_SPT = (kS * L * pref * hbar**4 * oP2 * oT2 / (d12_2 * d56_2)
               * chi.chi5_SPT.real * overlap(xi.xi_SPT))
    phi_TPS = (kT * L * pref * hbar**4 * oP2 * oS2 / (d12_2 * d34_2)
               * chi.chi5_TPS.real * overlap(xi.xi_TPS))
    # signal counterpart of phi_PS (switched on in the sigma+ P,S rows);
    # same two-field structure with the roles of P and S swapped
    xi_SP = math.sqrt(2.0) * L * (1.0 - vel.vg_S / vel.vg_P) / (geom.tau_P * vel.vg_S)
    phi_SP = kS * L * pref * hbar**2 * oP2 / d12_2 * chi.chi3_SP.real * overlap(xi_SP)

    vac = (kP * L, kS * L, kT * L)
    lin_P = kP * L * 2.0 * math.pi * chi.chi1_P.real

    parts = np.zeros((8, 3, 4))
    parts[:, 0, 0] = vac[0]
    parts[:, 1, 0] = vac[1]
    parts[:, 2, 0] = vac[2]
    for row in range(8):
        alpha, beta_, gamma_ = (row >> 2) & 1, (row >> 1) & 1, row & 1
        if not alpha:
            continue  # sigma^- probe: vacuum phases only, all fields
        parts[row, 0, 1] = lin_P
        if not beta_:
            continue  # sigma^- signal: probe keeps only its linear shift
        parts[row, 0, 2] = phi_PS
        parts[row, 1, 2] = phi_SP
        if not gamma_:
            continue  # sigma^- trigger: third-order pair shifts only
        parts[row, 0, 2] += phi_PT
        parts[row, 0, 3] = phi_PST
        parts[row, 1, 2] += phi_ST
        parts[row, 1, 3] = phi_SPT
        parts[row, 2, 3] = phi_TPS
    return PhaseTable(parts=parts)


def phase_table(drive: DriveParams, atom: AtomParams, geom: PulseGeometry) -> PhaseTable:
    """Build the full truth table of accumulated phases.

    Errors from the susceptibility evaluation (transparency poles)
    propagate unchanged.
    """
    chi, chi_st, vel, k = _phase_ingredients(drive, atom)
    return _assemble_table(chi, chi_st, vel, k, drive, atom, geom)


def find_length_for_phase(
    drive: DriveParams,
    atom: AtomParams,
    geom: PulseGeometry,
    target: float,
    max_length: float = 1.0,
) -> float:
    """Medium length at which the three-body conditional phase hits `target`.

    The walk-off factors saturate the attainable phase, so a root may not
    exist below `max_length`; that raises `NumericalError`.
    """
    if target <= 0:
        raise ValueError("target phase must be > 0")
    chi, chi_st, vel, k = _phase_ingredients(drive, atom)

    def phase_at(L: float) -> float:
        table = _assemble_table(chi, chi_st, vel, k, drive, atom,
                                replace(geom, length=L))
        return table.three_body_phase()

    lo, hi = 0.0, 1e-6
    while phase_at(hi) < target:
        lo, hi = hi, hi * 2.0
        if hi > max_length:
            raise NumericalError(
                f"conditional phase saturates below {target:.6f} rad "
                f"for lengths up to {max_length} m"
            )
    return float(brentq(lambda L: phase_at(L) - target, lo, hi,
                        xtol=1e-18, rtol=8.9e-16))


_FREE_FIELDS = ("rabi_P", "rabi_C", "rabi_S", "rabi_B", "rabi_T",
                "delta_1", "delta_2", "delta_3", "delta_4", "delta_5")


@dataclass(frozen=True)
class MatchResult:
    """Outcome of a group-velocity matching search."""

    drive: DriveParams
    mismatch: float
    converged: bool
    iterations: int


def _apply_free(drive: DriveParams, names: tuple[str, ...], values: np.ndarray) -> DriveParams:
    kwargs: dict = {}
    deltas = list(drive.delta)
    for name, value in zip(names, values):
        if name.startswith("delta_"):
            deltas[int(name.split("_")[1]) - 1] = float(value)
        else:
            old = getattr(drive, name)
            phase = old / abs(old) if abs(old) > 0 else 1.0
            kwargs[name] = phase * float(value)
    kwargs["delta"] = tuple(deltas)
    return replace(drive, **kwargs)


def match_velocities(
    drive: DriveParams,
    atom: AtomParams,
    free: tuple[str, ...],
    bounds: dict[str, tuple[float, float]],
    target: float = 0.05,
    max_iter: int = 1000,
) -> MatchResult:
    """Minimize the group-velocity mismatch over a subset of drive fields.

    Runs a deterministic derivative-free (Nelder-Mead) local search from
    the supplied drive.  Rabi-frequency entries vary in magnitude with
    their phase preserved.  Returns best-so-far with `converged=False`
    when the target relative mismatch is not reached.
    """
    names = tuple(free)
    if not names:
        raise ValueError("free parameter set must not be empty")
    for name in names:
        if name not in _FREE_FIELDS:
            raise ValueError(f"unknown free parameter {name!r}")
        if name not in bounds:
            raise ValueError(f"missing bounds for free parameter {name!r}")

    initial = group_velocities(drive, atom, warn=False).max_mismatch
    if initial <= target:
        return MatchResult(drive=drive, mismatch=initial, converged=True, iterations=0)

    def start_value(name: str) -> float:
        if name.startswith("delta_"):
            return drive.delta[int(name.split("_")[1]) - 1]
        return abs(getattr(drive, name))

    x0 = np.array([start_value(n) for n in names], dtype=float)
    scales = np.array([abs(v) if abs(v) > 0 else (bounds[n][1] - bounds[n][0])
                       for n, v in zip(names, x0)])

    def objective(z: np.ndarray) -> float:
        trial = _apply_free(drive, names, z * scales)
        v = group_velocities(trial, atom, warn=False)
        if not v.all_finite or min(v.as_array()) <= 0:
            return 1e6
        return v.max_mismatch

    res = minimize(
        objective,
        x0 / scales,
        method="Nelder-Mead",
        bounds=[(bounds[n][0] / s, bounds[n][1] / s) for n, s in zip(names, scales)],
        options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": max_iter,
                 "maxfev": 4 * max_iter},
    )
    best = _apply_free(drive, names, res.x * scales)
    mismatch = objective(res.x)
    return MatchResult(
        drive=best,
        mismatch=float(mismatch),
        converged=bool(mismatch <= target),
        iterations=int(res.nit),
    )
