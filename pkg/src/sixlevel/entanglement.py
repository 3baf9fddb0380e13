"""Three-way entanglement of pure three-qubit states.

Two independent routes to the same quantity:

* `residual_entanglement` follows the concurrence construction: reduce the
  pure state over the trigger and over the signal, build the spin-flipped
  partners rho~ = (sy x sy) rho* (sy x sy), take the square-rooted
  eigenvalues lambda_1 >= lambda_2 >= ... of rho rho~, and return
  2 (lambda1 lambda2 [PS] + lambda1 lambda2 [PT]).

* `three_tangle` evaluates the degree-4 hyperdeterminant polynomial of the
  eight amplitudes, 4 |d1 - 2 d2 + 4 d3|.

For every pure three-qubit state the two agree; GHZ gives 1, W and all
product states give 0.  Qubit order is P, S, T with P the most significant
bit of the amplitude index.
"""

from __future__ import annotations

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_FLOOR = -1e-10
EIGENVALUE_IMAG_TOL = 1e-8
NORM_TOL = 1e-12

_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_SYSY = np.kron(_SIGMA_Y, _SIGMA_Y)


def _as_state(amp: np.ndarray) -> np.ndarray:
    amp = np.asarray(amp, dtype=complex)
    if amp.shape != (8,):
        raise ValueError("state must have 8 amplitudes")
    norm = float(np.sum(np.abs(amp) ** 2))
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state norm deviates from 1 by {abs(norm - 1.0):.2e}")
    return amp


def validate_density_matrix(rho: np.ndarray) -> np.ndarray:
    """Check Hermiticity, unit trace and positive semidefiniteness."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_TOL:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise ValueError("density matrix trace deviates from 1")
    if np.min(np.linalg.eigvalsh(rho)) < PSD_FLOOR:
        raise ValueError("density matrix has a significantly negative eigenvalue")
    return rho


def density_matrix(amp: np.ndarray) -> np.ndarray:
    """Rank-1 projector |psi><psi| of a normalized 8-amplitude state."""
    amp = _as_state(amp)
    return np.outer(amp, amp.conj())


def partial_trace(rho: np.ndarray, keep: str) -> np.ndarray:
    """Trace an 8x8 three-qubit density matrix down to a kept pair.

    keep is "PS" (trace out T), "PT" (trace out S) or "ST" (trace out P).
    Trace and Hermiticity are preserved exactly.
    """
    rho = validate_density_matrix(rho)
    if rho.shape != (8, 8):
        raise ValueError("expected an 8x8 three-qubit density matrix")
    r = rho.reshape(2, 2, 2, 2, 2, 2)  # (P, S, T, P', S', T')
    if keep == "PS":
        out = np.einsum("abtcdt->abcd", r)
    elif keep == "PT":
        out = np.einsum("asbcsd->abcd", r)
    elif keep == "ST":
        out = np.einsum("pabpcd->abcd", r)
    else:
        raise ValueError("keep must be one of 'PS', 'PT', 'ST'")
    return out.reshape(4, 4)


def spin_flip(rho: np.ndarray) -> np.ndarray:
    """Two-qubit spin flip (sy x sy) rho* (sy x sy)."""
    rho = validate_density_matrix(rho)
    if rho.shape != (4, 4):
        raise ValueError("spin flip expects a 4x4 density matrix")
    return _SYSY @ rho.conj() @ _SYSY


def lambda_spectrum(rho: np.ndarray, rho_tilde: np.ndarray) -> np.ndarray:
    """Square roots of the eigenvalues of rho rho~, sorted descending.

    The product is not Hermitian but has a real non-negative spectrum for
    valid inputs; eigenvalues with imaginary part above 1e-8 signal invalid
    input and raise.  Negative numerical dust above -1e-10 is clipped to 0.
    """
    rho = np.asarray(rho, dtype=complex)
    rho_tilde = np.asarray(rho_tilde, dtype=complex)
    if rho.shape != (4, 4) or rho_tilde.shape != (4, 4):
        raise ValueError("lambda spectrum expects 4x4 matrices")
    ev = np.linalg.eigvals(rho @ rho_tilde)
    if np.max(np.abs(ev.imag)) > EIGENVALUE_IMAG_TOL:
        raise ValueError(
            f"eigenvalues of rho rho~ are not real (max imag {np.max(np.abs(ev.imag)):.2e})"
        )
    real = ev.real
    if np.min(real) < PSD_FLOOR:
        raise ValueError("rho rho~ has a significantly negative eigenvalue")
    real = np.where(real < 0.0, 0.0, real)
    return np.sqrt(np.sort(real)[::-1])


def residual_entanglement(amp: np.ndarray) -> float:
    """Three-way entanglement 2 (l1 l2 [PS] + l1 l2 [PT]) of a pure state."""
    amp = _as_state(amp)
    rho = density_matrix(amp)
    total = 0.0
    for keep in ("PS", "PT"):
        reduced = partial_trace(rho, keep)
        lam = lambda_spectrum(reduced, spin_flip(reduced))
        total += lam[0] * lam[1]
    return float(2.0 * total)


def three_tangle(amp: np.ndarray) -> float:
    """Hyperdeterminant route: tau = 4 |d1 - 2 d2 + 4 d3|."""
    a = _as_state(amp).reshape(2, 2, 2)
    d1 = (a[0, 0, 0] ** 2 * a[1, 1, 1] ** 2
          + a[0, 0, 1] ** 2 * a[1, 1, 0] ** 2
          + a[0, 1, 0] ** 2 * a[1, 0, 1] ** 2
          + a[1, 0, 0] ** 2 * a[0, 1, 1] ** 2)
    d2 = (a[0, 0, 0] * a[1, 1, 1] * a[0, 1, 1] * a[1, 0, 0]
          + a[0, 0, 0] * a[1, 1, 1] * a[1, 0, 1] * a[0, 1, 0]
          + a[0, 0, 0] * a[1, 1, 1] * a[1, 1, 0] * a[0, 0, 1]
          + a[0, 1, 1] * a[1, 0, 0] * a[1, 0, 1] * a[0, 1, 0]
          + a[0, 1, 1] * a[1, 0, 0] * a[1, 1, 0] * a[0, 0, 1]
          + a[1, 0, 1] * a[0, 1, 0] * a[1, 1, 0] * a[0, 0, 1])
    d3 = (a[0, 0, 0] * a[1, 1, 0] * a[1, 0, 1] * a[0, 1, 1]
          + a[1, 1, 1] * a[0, 0, 1] * a[0, 1, 0] * a[1, 0, 0])
    return float(4.0 * abs(d1 - 2.0 * d2 + 4.0 * d3))


def pair_concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence max(0, l1 - l2 - l3 - l4) of a two-qubit state."""
    lam = lambda_spectrum(rho, spin_flip(rho))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def one_to_rest_tangle(amp: np.ndarray, qubit: str = "P") -> float:
    """Bipartite tangle C^2 = 4 det(rho_single) of one qubit vs the rest."""
    amp = _as_state(amp)
    psi = amp.reshape(2, 2, 2)
    axis = {"P": 0, "S": 1, "T": 2}[qubit]
    mat = np.moveaxis(psi, axis, 0).reshape(2, 4)
    rho_single = mat @ mat.conj().T
    return float(4.0 * np.linalg.det(rho_single).real)


def haar_random_state(rng: np.random.Generator) -> np.ndarray:
    """Normalized 8-amplitude state with Haar-uniform direction."""
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    return v / np.linalg.norm(v)
