"""Time evolution and steady states of the six amplitude equations.

The probability amplitudes a_1..a_6 of the chain obey the linear system

    da1/dt = -(G1/2) a1 - i conj(Omega_P) a2
    da2/dt = -(G2/2 + i d1 ) a2 - i Omega_P a1 - i Omega_C a3
    da3/dt = -(G3/2 + i d12) a3 - i conj(Omega_C) a2 - i conj(Omega_S) a4
    da4/dt = -(G4/2 + i d13) a4 - i Omega_S a3 - i Omega_B a5
    da5/dt = -(G5/2 + i d14) a5 - i conj(Omega_B) a4 - i conj(Omega_T) a6
    da6/dt = -(G6/2 + i d15) a6 - i Omega_T a5

With all decay rates zero the generator is -i times a Hermitian matrix and
the norm sum(|a_i|^2) is conserved; with decay the norm is non-increasing.

This module is also the numerical authority for the closed-form
susceptibilities: `numeric_susceptibilities` extracts the order-by-order
coefficients from steady-state solves alone, without using any of the
closed-form expressions, and is used to validate them.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, NonperturbativeFitError, SingularSteadyStateError
from .model import CONSTANTS, AtomParams, DriveParams, composite_detunings, complex_denominators

WEAK_FIELD_WARNING = (
    "pulsed-field intensities are not small against both control intensities; "
    "the undepleted-ground-state steady state may not be meaningful"
)


def evolution_matrix(drive: DriveParams, atom: AtomParams) -> np.ndarray:
    """6x6 complex matrix M with da/dt = M a."""
    cd = composite_detunings(drive)
    g = atom.gamma
    oP, oC, oS, oB, oT = (drive.rabi_P, drive.rabi_C, drive.rabi_S,
                          drive.rabi_B, drive.rabi_T)
    M = np.zeros((6, 6), dtype=complex)
    M[0, 0] = -0.5 * g[0]
    M[0, 1] = -1j * np.conj(oP)
    M[1, 1] = -(0.5 * g[1] + 1j * drive.delta[0])
    M[1, 0] = -1j * oP
    M[1, 2] = -1j * oC
    M[2, 2] = -(0.5 * g[2] + 1j * cd.delta12)
    M[2, 1] = -1j * np.conj(oC)
    M[2, 3] = -1j * np.conj(oS)
    M[3, 3] = -(0.5 * g[3] + 1j * cd.delta13)
    M[3, 2] = -1j * oS
    M[3, 4] = -1j * oB
    M[4, 4] = -(0.5 * g[4] + 1j * cd.delta14)
    M[4, 3] = -1j * np.conj(oB)
    M[4, 5] = -1j * np.conj(oT)
    M[5, 5] = -(0.5 * g[5] + 1j * cd.delta15)
    M[5, 4] = -1j * oT
    return M


def rhs(state: np.ndarray, drive: DriveParams, atom: AtomParams) -> np.ndarray:
    """Right-hand side da/dt for a single amplitude vector (length 6)."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (6,):
        raise ValueError("state must have shape (6,)")
    return evolution_matrix(drive, atom) @ state


@dataclass(frozen=True)
class Trajectory:
    """Integrated amplitudes on a strictly increasing time grid."""

    times: np.ndarray          # (n,), s
    states: np.ndarray         # (n, 6), complex amplitudes

    def __post_init__(self) -> None:
        if self.times.ndim != 1 or self.states.shape != (self.times.size, 6):
            raise ValueError("times (n,) and states (n, 6) must be consistent")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("time grid must be strictly increasing")

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def norms(self) -> np.ndarray:
        """sum_i |a_i|^2 at every stored time."""
        return np.sum(np.abs(self.states) ** 2, axis=1)

    def to_csv(self, path: str | Path) -> None:
        """Write columns t, Re/Im of a1..a6 (RFC-4180, 12-digit scientific)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["t"]
            for i in range(1, 7):
                header += [f"re_a{i}", f"im_a{i}"]
            writer.writerow(header)
            for t, row in zip(self.times, self.states):
                cells = [f"{t:.12e}"]
                for a in row:
                    cells += [f"{a.real:.12e}", f"{a.imag:.12e}"]
                writer.writerow(cells)


def default_max_step(drive: DriveParams, atom: AtomParams) -> float:
    """Conservative step bound 0.01 / max(|Omega_C|, |Omega_B|, Gamma, |delta|)."""
    scale = max(
        abs(drive.rabi_C),
        abs(drive.rabi_B),
        max(atom.gamma),
        max(abs(d) for d in drive.delta),
    )
    if scale == 0:
        return np.inf
    return 0.01 / scale


def evolve(
    state0: np.ndarray,
    drive: DriveParams,
    atom: AtomParams,
    t_end: float,
    dt_max: float | None = None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    n_points: int | None = None,
) -> Trajectory:
    """Integrate the amplitude equations from `state0` to `t_end`.

    Uses an adaptive high-order explicit Runge-Kutta scheme (DOP853) with
    PI step control.  `dt_max` bounds the step size and defaults to
    `default_max_step`; pass a larger value for long, smooth runs.

    Parameters
    ----------
    n_points : int, optional
        When given, sample the solution on a uniform grid of this many
        points (first point t=0); otherwise the solver's own accepted steps
        are returned.

    Raises
    ------
    IntegrationError
        If the step-size underflows (stiffness); the message carries the
        time reached.
    """
    if t_end <= 0:
        raise ValueError("t_end must be > 0")
    if dt_max is None:
        dt_max = default_max_step(drive, atom)
    if dt_max <= 0:
        raise ValueError("dt_max must be > 0")
    state0 = np.asarray(state0, dtype=complex)
    if state0.shape != (6,):
        raise ValueError("state0 must have shape (6,)")
    M = evolution_matrix(drive, atom)
    t_eval = np.linspace(0.0, t_end, n_points) if n_points else None
    sol = solve_ivp(
        lambda t, y: M @ y,
        (0.0, t_end),
        state0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        max_step=dt_max,
        t_eval=t_eval,
    )
    if not sol.success:
        t_reached = sol.t[-1] if sol.t.size else 0.0
        raise IntegrationError(
            f"integrator failed at t = {t_reached:.6e} s: {sol.message}"
        )
    states = sol.y.T.copy()
    if t_eval is None:
        states[0] = state0  # the solver stores the initial point verbatim anyway
    return Trajectory(times=sol.t.copy(), states=states)


def steady_state(drive: DriveParams, atom: AtomParams, warn: bool = True) -> np.ndarray:
    """Undepleted-ground-state fixed point of the amplitude equations.

    Pins a1 = 1 (ground level undepleted, its decay ignored) and solves the
    5x5 complex linear system obtained from da2..da6/dt = 0.  Returns the
    full six-component amplitude vector (a1 = 1).

    Raises
    ------
    SingularSteadyStateError
        If the linear system is singular (measure-zero parameter sets).
    """
    if warn and not drive.is_weak_field:
        warnings.warn(WEAK_FIELD_WARNING, stacklevel=2)
    d = complex_denominators(drive, atom)
    oP, oC, oS, oB, oT = (drive.rabi_P, drive.rabi_C, drive.rabi_S,
                          drive.rabi_B, drive.rabi_T)
    A = np.array(
        [
            [d.d2, oC, 0, 0, 0],
            [np.conj(oC), d.d3, np.conj(oS), 0, 0],
            [0, oS, d.d4, oB, 0],
            [0, 0, np.conj(oB), d.d5, np.conj(oT)],
            [0, 0, 0, oT, d.d6],
        ],
        dtype=complex,
    )
    b = np.array([-oP, 0, 0, 0, 0], dtype=complex)
    try:
        excited = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSteadyStateError(
            f"steady-state system singular: {exc}"
        ) from exc
    return np.concatenate([[1.0 + 0.0j], excited])


def default_intensity_grid(drive: DriveParams, n: int = 6) -> np.ndarray:
    """Log-spaced pulsed-field intensities, 1e-3 .. 1e-1 of |Omega_C|^2 (s^-2)."""
    return np.geomspace(1e-3, 1e-1, n) * abs(drive.rabi_C) ** 2


def _lstsq_scaled(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Least squares with per-column scaling; returns (coeffs, relative residual)."""
    norms = np.max(np.abs(X), axis=0)
    norms[norms == 0] = 1.0
    coef, *_ = np.linalg.lstsq(X / norms, y, rcond=None)
    resid = X / norms @ coef - y
    scale = np.max(np.abs(y)) or 1.0
    return coef / norms, float(np.max(np.abs(resid)) / scale)


def numeric_susceptibilities(
    drive: DriveParams,
    atom: AtomParams,
    intensity_grid: np.ndarray | None = None,
    residual_tol: float = 0.05,
):
    """Extract the seven susceptibility coefficients from steady states alone.

    For every point of a Cartesian grid of pulsed-field intensities the 5x5
    steady state is solved and the three total susceptibilities are read off
    the coherences,

        chi_P = -(N |D12|^2 / (hbar eps0)) a2 / Omega_P          (source a1 = 1)
        chi_S = -(N |D34|^2 / (hbar eps0)) a4 conj(a3) / Omega_S (source a3)
        chi_T = -(N |D56|^2 / (hbar eps0)) a6 conj(a5) / Omega_T (source a5)

    and the order-by-order coefficients are recovered by a linear
    least-squares fit with the bases

        chi_P : 1, |E_S|^2, |E_T|^2, |E_S|^2 |E_T|^2
        chi_S : |E_P|^2, |E_P|^2 |E_T|^2
        chi_T : |E_P|^2 |E_S|^2

    A pulsed field whose base Rabi frequency is zero stays switched off
    across the grid and its coefficients fit to zero.  The grid must be
    small enough that contributions beyond these orders are negligible;
    a large fit residual raises `NonperturbativeFitError`.

    Parameters
    ----------
    intensity_grid : array, optional
        Intensity values |Omega|^2 in s^-2 applied to each active pulsed
        field axis (>= 4 values).  Defaults to `default_intensity_grid`.

    Returns
    -------
    SusceptibilitySet
    """
    from .susceptibility import SusceptibilitySet  # one-way import at call time

    if intensity_grid is None:
        intensity_grid = default_intensity_grid(drive)
    grid = np.asarray(intensity_grid, dtype=float)
    if grid.size < 4 or np.any(grid <= 0):
        raise ValueError("intensity_grid needs >= 4 positive intensity values")

    hbar, eps0 = CONSTANTS.hbar, CONSTANTS.epsilon0
    kP = atom.density * atom.dipole_12**2 / (hbar * eps0)
    kS = atom.density * atom.dipole_34**2 / (hbar * eps0)
    kT = atom.density * atom.dipole_56**2 / (hbar * eps0)

    def phase_or_zero(z: complex) -> complex | None:
        return z / abs(z) if abs(z) > 0 else None

    phP, phS, phT = (phase_or_zero(drive.rabi_P), phase_or_zero(drive.rabi_S),
                     phase_or_zero(drive.rabi_T))
    # chi_P is exactly independent of the probe amplitude (a1 is pinned), so a
    # sentinel probe keeps the extraction defined when the base probe is off.
    sentinel_P = np.sqrt(grid[0])

    axes = [grid if ph is not None else np.array([0.0]) for ph in (phP, phS, phT)]
    XP, yP, XS, yS, XT, yT = [], [], [], [], [], []
    for gp in axes[0]:
        for gu in axes[1]:
            for gy in axes[2]:
                oP = phP * np.sqrt(gp) if phP is not None else sentinel_P
                oS = phS * np.sqrt(gu) if phS is not None else 0.0
                oT = phT * np.sqrt(gy) if phT is not None else 0.0
                point = DriveParams(
                    rabi_P=oP, rabi_C=drive.rabi_C, rabi_S=oS,
                    rabi_B=drive.rabi_B, rabi_T=oT, delta=drive.delta,
                )
                a = steady_state(point, atom, warn=False)
                chiP = -kP * a[1] / oP
                XP.append([1.0, gu, gy, gu * gy])
                yP.append(chiP)
                if phS is not None:
                    XS.append([gp, gp * gy])
                    yS.append(-kS * a[3] * np.conj(a[2]) / oS)
                if phT is not None:
                    XT.append([gp * gu])
                    yT.append(-kT * a[5] * np.conj(a[4]) / oT)

    cP, rP = _lstsq_scaled(np.array(XP), np.array(yP))
    if XS:
        cS, rS = _lstsq_scaled(np.array(XS), np.array(yS))
    else:
        cS, rS = np.zeros(2, dtype=complex), 0.0
    if XT:
        cT, rT = _lstsq_scaled(np.array(XT), np.array(yT))
    else:
        cT, rT = np.zeros(1, dtype=complex), 0.0

    worst = max(rP, rS, rT)
    if worst > residual_tol:
        raise NonperturbativeFitError(
            f"fit residual {worst:.2e} exceeds {residual_tol:.2e}; "
            "intensity grid reaches beyond the perturbative regime"
        )

    # convert from Rabi-intensity units (s^-2) to field-intensity units (V^2/m^2)
    fS = atom.dipole_34**2 / hbar**2
    fT = atom.dipole_56**2 / hbar**2
    fP = atom.dipole_12**2 / hbar**2
    return SusceptibilitySet(
        chi1_P=complex(cP[0]),
        chi3_PS=complex(cP[1] * fS),
        chi3_PT=complex(cP[2] * fT),
        chi5_PST=complex(cP[3] * fS * fT),
        chi3_SP=complex(cS[0] * fP),
        chi5_SPT=complex(cS[1] * fP * fT),
        chi5_TPS=complex(cT[0] * fP * fS),
    )
