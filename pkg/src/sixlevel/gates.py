"""Three-qubit polarization phase gates and Toffoli synthesis.

Qubits are the polarization states of the probe, signal and trigger
(|0> = sigma^-, |1> = sigma^+), ordered P, S, T with P the most
significant bit.  A phase table turns into a diagonal 8x8 unitary; a
single-qubit rotation applied to the trigger conjugates the
conditional-sign gate into a Toffoli-class gate, and the equivalence
checker decides (by brute force, with explicit witnesses) whether two
unitaries coincide up to global or per-qubit diagonal phases.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .propagation import PhaseTable

UNITARY_TOL = 1e-12
NORM_TOL = 1e-12


def validate_state(amp: np.ndarray) -> np.ndarray:
    """Check an 8-amplitude vector is normalized; returns it as complex."""
    amp = np.asarray(amp, dtype=complex)
    if amp.shape != (8,):
        raise ValueError("state must have 8 amplitudes")
    norm = np.sum(np.abs(amp) ** 2)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state norm deviates from 1 by {abs(norm - 1.0):.2e}")
    return amp


def assert_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("operator must be square")
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if dev > tol:
        raise ValueError(f"operator deviates from unitarity by {dev:.2e}")
    return u


def build_qpg(table: PhaseTable) -> np.ndarray:
    """Diagonal gate exp(-i (phi^P + phi^S + phi^T)) per truth-table row."""
    phases = np.array([table.total_phase(row) for row in range(8)])
    return np.diag(np.exp(-1j * phases))


@dataclass(frozen=True)
class SingleQubitRotation:
    """The rotation R(theta, phi) used on the trigger qubit.

    matrix = [[ cos(theta/2),            i e^{-i phi} sin(theta/2)],
              [-i e^{i phi} sin(theta/2), -cos(theta/2)          ]]

    Unitary with determinant -1 for every (theta, phi).
    """

    theta: float
    phi: float
    matrix: np.ndarray


def rotation(theta: float, phi: float) -> SingleQubitRotation:
    ct = math.cos(theta / 2.0)
    st = math.sin(theta / 2.0)
    m = np.array(
        [
            [ct, 1j * cmath.exp(-1j * phi) * st],
            [-1j * cmath.exp(1j * phi) * st, -ct],
        ],
        dtype=complex,
    )
    return SingleQubitRotation(theta=theta, phi=phi, matrix=m)


def conjugate_on_trigger(u: np.ndarray, r: SingleQubitRotation) -> np.ndarray:
    """(I x I x R) U (I x I x R)^-1 acting on the trigger qubit."""
    u = assert_unitary(u)
    big = np.kron(np.eye(4), r.matrix)
    return big @ u @ big.conj().T


def toffoli_reference() -> np.ndarray:
    """The CCX permutation matrix: swaps |110> and |111>."""
    t = np.eye(8, dtype=complex)
    t[6, 6] = t[7, 7] = 0.0
    t[6, 7] = t[7, 6] = 1.0
    return t


def apply_gate(u: np.ndarray, amp: np.ndarray) -> np.ndarray:
    """Apply an 8x8 gate to a normalized 3-qubit state."""
    amp = validate_state(amp)
    u = np.asarray(u, dtype=complex)
    if u.shape != (8, 8):
        raise ValueError("gate must be 8x8")
    return u @ amp


@dataclass(frozen=True)
class EquivalenceResult:
    """Verdict and witnesses of an up-to-phases gate comparison.

    For mode "global" only `global_phase` is set; for "local-diagonal" the
    left/right per-qubit phases (P, S, T order) define diagonal gates
    diag(1, e^{i phase}) such that A = e^{i global} D_left B D_right within
    `residual`.
    """

    equivalent: bool
    mode: str
    global_phase: float | None
    left_phases: tuple[float, float, float] | None
    right_phases: tuple[float, float, float] | None
    residual: float


def _local_diag(phases: tuple[float, float, float]) -> np.ndarray:
    d = np.ones(1, dtype=complex)
    for ph in phases:
        d = np.kron(d, np.array([1.0, cmath.exp(1j * ph)]))
    return np.diag(d)


def _phase_model_matrix(rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Design matrix for angle(A/B) = lam + sum_q j_q a_q + sum_q k_q b_q."""
    m = np.zeros((rows.size, 7))
    m[:, 0] = 1.0
    for q in range(3):
        shift = 2 - q
        m[:, 1 + q] = (rows >> shift) & 1
        m[:, 4 + q] = (cols >> shift) & 1
    return m


def equivalent_up_to_phase(
    a: np.ndarray,
    b: np.ndarray,
    mode: str = "global",
    tol: float = 1e-12,
) -> EquivalenceResult:
    """Decide whether A equals B up to the declared family of phases.

    mode "global": exists e^{i lam} with max|A - e^{i lam} B| < tol.
    mode "local-diagonal": exists a global phase and per-qubit diagonal
    phase gates on both sides with max|A - e^{i lam} D_L B D_R| < tol.
    The witness phases are found by least-squares phase alignment on the
    common support and the candidate is verified by reconstruction.
    """
    a = assert_unitary(a)
    b = assert_unitary(b)
    if a.shape != (8, 8) or b.shape != (8, 8):
        raise ValueError("gates must be 8x8")
    failed = EquivalenceResult(False, mode, None, None, None, math.inf)

    # any phase alignment preserves entry magnitudes, so supports must agree
    mag_mismatch = np.max(np.abs(np.abs(a) - np.abs(b)))
    if mag_mismatch > tol:
        return failed
    # entries below the threshold are effectively zero on both sides; they
    # contribute at most 0.5 * tol to the final residual and carry no phase
    support = (np.abs(b) > 0.25 * tol) & (np.abs(a) > 0.25 * tol)
    if not support.any():
        return failed

    rows, cols = np.nonzero(support)
    weights = np.abs(b[rows, cols])
    target = np.angle(a[rows, cols] / b[rows, cols])

    if mode == "global":
        anchor = np.argmax(weights)
        lam = float(target[anchor])
        residual = float(np.max(np.abs(a - cmath.exp(1j * lam) * b)))
        if residual < tol:
            return EquivalenceResult(True, mode, lam, None, None, residual)
        return failed

    if mode != "local-diagonal":
        raise ValueError(f"unknown comparison mode {mode!r}")

    design = _phase_model_matrix(rows, cols)
    # angles live on a circle: iterate magnitude-weighted least squares,
    # re-lifting the targets to the nearest 2*pi branch each round
    shifted = target.copy()
    x = np.zeros(7)
    for _ in range(64):
        x, *_ = np.linalg.lstsq(design * weights[:, None], shifted * weights,
                                rcond=None)
        wraps = np.round((design @ x - target) / (2.0 * math.pi))
        new_shifted = target + 2.0 * math.pi * wraps
        if np.allclose(new_shifted, shifted):
            break
        shifted = new_shifted
    lam = float(x[0])
    left = tuple(float(v) for v in x[1:4])
    right = tuple(float(v) for v in x[4:7])
    rebuilt = cmath.exp(1j * lam) * _local_diag(left) @ b @ _local_diag(right)
    residual = float(np.max(np.abs(a - rebuilt)))
    if residual < tol:
        return EquivalenceResult(True, mode, lam, left, right, residual)
    return failed
