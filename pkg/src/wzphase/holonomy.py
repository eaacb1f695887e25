"""Path-ordered exponentials over closed loops, dynamical phases, and
verification of the adiabatic prediction against direct time evolution.

Ordering convention: later-time factors compose on the left, matching the
time-ordered propagator, so the predicted degenerate-block evolution
dyn2 * gamma2 is directly comparable to the simulated one.  Products are
reduced over a fixed pairwise tree, so results are bit-stable for a given
step count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .loops import Loop
from .spectral import frame


@dataclass(frozen=True)
class HolonomyResult:
    """Geometric and dynamical factors of one closed-loop evolution."""

    gamma1: complex
    gamma2: np.ndarray
    dyn1: complex
    dyn2: complex
    steps: int


@dataclass(frozen=True)
class ErrorReport:
    """Distance between predicted and simulated degenerate-block evolution."""

    T: float
    unitary_distance: float
    subspace_leakage: float
    n_steps: int

    def __post_init__(self):
        if self.unitary_distance < 0 or self.subspace_leakage < 0:
            raise ValidationError("error report entries must be non-negative")


def exp_herm2(M: np.ndarray, tau) -> np.ndarray:
    """exp(i * M * tau) for a batch (n, 2, 2) of Hermitian matrices, exactly,
    via the identity-plus-Pauli decomposition."""
    M = np.asarray(M, dtype=complex)
    single = M.ndim == 2
    if single:
        M = M[None]
    a = 0.5 * (M[:, 0, 0].real + M[:, 1, 1].real)
    b3 = 0.5 * (M[:, 0, 0].real - M[:, 1, 1].real)
    b1 = M[:, 1, 0].real
    b2 = M[:, 1, 0].imag
    beta = np.sqrt(b1 ** 2 + b2 ** 2 + b3 ** 2)
    phase = np.exp(1j * a * tau)
    cosb = np.cos(beta * tau)
    # sin(beta*tau)/beta, finite at beta = 0
    sfac = tau * np.sinc(beta * tau / np.pi)
    out = np.empty_like(M)
    out[:, 0, 0] = phase * (cosb + 1j * sfac * b3)
    out[:, 1, 1] = phase * (cosb - 1j * sfac * b3)
    out[:, 0, 1] = phase * 1j * sfac * (b1 - 1j * b2)
    out[:, 1, 0] = phase * 1j * sfac * (b1 + 1j * b2)
    return out[0] if single else out


def ordered_product(mats: np.ndarray) -> np.ndarray:
    """Product of a time-ordered stack (n, k, k), later factors on the left.

    Pairwise reduction tree: fixed shape for a given n, hence bit-stable.
    """
    arr = np.asarray(mats)
    if arr.ndim != 3 or arr.shape[0] == 0:
        raise ValidationError("expected a non-empty stack of matrices")
    while arr.shape[0] > 1:
        hold = None
        if arr.shape[0] % 2 == 1:
            hold = arr[-1]
            arr = arr[:-1]
        arr = np.matmul(arr[1::2], arr[0::2])
        if hold is not None:
            arr = np.concatenate([arr, hold[None]])
    return arr[0]


def _midpoints(T: float, n_steps: int) -> tuple[np.ndarray, float]:
    if n_steps < 2:
        raise ValidationError(f"n_steps must be >= 2, got {n_steps}")
    dt = T / n_steps
    return (np.arange(n_steps) + 0.5) * dt, dt


def path_ordered_exp(loop: Loop, n_steps: int) -> HolonomyResult:
    """Second-order product integral of the connection over a closed loop.

    Evaluates the pulled-back connection at the n_steps interval midpoints
    and composes exp(i * a * dt) factors later-on-left.  gamma1 carries the
    simple level's phase, gamma2 the degenerate block's U(2) matrix;
    dynamical phases exp(-i * integral of E_n) are returned separately.
    """
    loop.check_closed()
    ts, dt = _midpoints(loop.T, n_steps)
    a1, a2 = loop.connection_batch(ts)
    e1, e2 = loop.energies_batch(ts)
    gamma1 = complex(np.exp(1j * dt * math.fsum(a1)))
    gamma2 = ordered_product(exp_herm2(a2, dt))
    dyn1 = complex(np.exp(-1j * dt * math.fsum(e1)))
    dyn2 = complex(np.exp(-1j * dt * math.fsum(e2)))
    return HolonomyResult(gamma1, gamma2, dyn1, dyn2, n_steps)


def dynamical_phase(loop: Loop, level: int, n_steps: int) -> complex:
    """exp(-i * integral of E_level over the loop), by midpoint quadrature."""
    if level not in (1, 2):
        raise ValidationError(f"level must be 1 or 2, got {level}")
    ts, dt = _midpoints(loop.T, n_steps)
    e1, e2 = loop.energies_batch(ts)
    e = e1 if level == 1 else e2
    return complex(np.exp(-1j * dt * math.fsum(e)))


def schrodinger_propagator(loop: Loop, n_steps: int) -> np.ndarray:
    """Direct time-ordered propagator of the loop's Hamiltonian.

    Midpoint-exponential product with exact step exponentials from the
    eigendecomposition of each 3x3 Hermitian sample.  Requires
    max ||H|| * dt < 0.1 so the second-order step error stays controlled.
    """
    ts, dt = _midpoints(loop.T, n_steps)
    H = loop.matrix_batch(ts)
    evals, evecs = np.linalg.eigh(H)
    hmax = float(np.max(np.abs(evals)))
    if hmax * dt >= 0.1:
        raise ValidationError(
            f"step too large: max||H||*dt = {hmax * dt:.3f} >= 0.1; raise n_steps")
    phases = np.exp(-1j * evals * dt)
    steps = np.einsum("nik,nk,njk->nij", evecs, phases, evecs.conj())
    return ordered_product(steps)


def verify_adiabatic(loop: Loop, T_values, n_steps: int,
                     prediction_steps: int = 4096) -> list[ErrorReport]:
    """Compare the predicted cyclic evolution against the simulated one.

    For each duration T the loop is traversed at the corresponding speed;
    the simulated propagator is expressed in the t=0 eigenframe and its
    degenerate block compared (spectral norm) against dyn2 * gamma2.
    Leakage is the norm of the simple/degenerate off-blocks.  Errors must
    shrink as T grows if the adiabatic theorem applies.
    """
    loop.check_closed()
    s0 = loop.sample(0.0)
    F0 = frame(s0.canonical, s0.label).matrix()
    hol = path_ordered_exp(loop, prediction_steps)
    reports = []
    for T in T_values:
        loop_T = loop.with_duration(float(T))
        U = schrodinger_propagator(loop_T, n_steps)
        dyn2 = dynamical_phase(loop_T, 2, prediction_steps)
        W = F0.conj().T @ U @ F0
        dist = float(np.linalg.norm(W[1:, 1:] - dyn2 * hol.gamma2, 2))
        leak = max(float(np.linalg.norm(W[0, 1:])), float(np.linalg.norm(W[1:, 0])))
        reports.append(ErrorReport(float(T), dist, leak, n_steps))
    return reports
