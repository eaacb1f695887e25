"""Closed-form eigenframes of doubly degenerate Hamiltonians, a brute-force
Jacobi eigensolver used as ground truth, and gauge smoothing of frames.

Frames are ordered as {simple |1>, degenerate |2,1>, |2,2>}.  The Case1
frame fixes the phase convention exp(-i*gamma) on first components and
exp(i*theta) on third components; Case3 and Case4 frames are obtained from
the Case2 frame by an involutive component permutation plus a parameter
relabeling, which keeps every closed-form connection coefficient consistent
with these exact frames.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .degeneracy import Canonical, CaseLabel
from .errors import NumericalError, ValidationError


@dataclass(frozen=True)
class Frame:
    """Orthonormal eigenbasis: simple eigenvector v1, degenerate pair w1, w2."""

    v1: np.ndarray
    w1: np.ndarray
    w2: np.ndarray

    def __post_init__(self):
        for name in ("v1", "w1", "w2"):
            vec = np.asarray(getattr(self, name), dtype=complex)
            if vec.shape != (3,):
                raise ValidationError(f"frame vector {name} must have shape (3,)")
            object.__setattr__(self, name, vec)

    def matrix(self) -> np.ndarray:
        """3x3 unitary with columns (v1, w1, w2)."""
        return np.stack([self.v1, self.w1, self.w2], axis=1)

    def degenerate_block(self) -> np.ndarray:
        """3x2 matrix with columns (w1, w2)."""
        return np.stack([self.w1, self.w2], axis=1)


@dataclass(frozen=True)
class CaseTransform:
    """Involutive component permutation plus parameter relabeling that maps
    the Case2 frame onto the Case3 or Case4 frame."""

    permutation: np.ndarray
    slots: Callable[[Canonical], tuple[float, float, float]]

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=float)
        if not np.array_equal(perm @ perm, np.eye(3)):
            raise ValidationError("case transform permutation must be an involution")
        object.__setattr__(self, "permutation", perm)


T1 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)
T2 = np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]], dtype=float)

# Case3: the first canonical entry takes the Case2 "s" slot and the phase
# slot receives -(theta + gamma); Case4: the first entry takes the "t" slot
# and the phase slot receives -gamma.
CASE3_TRANSFORM = CaseTransform(T1, lambda c: (c.rp, c.tp, -(c.theta + c.gamma)))
CASE4_TRANSFORM = CaseTransform(T2, lambda c: (c.sp, c.rp, -c.gamma))


def _frame_case2(s: float, t: float, ang: float) -> Frame:
    if s <= 0.0 or t <= 0.0:
        raise ValidationError(
            f"Case2-style frame needs positive block entries, got ({s}, {t})")
    n = 1.0 / math.sqrt(s + t)
    ph = cmath.exp(1j * ang)
    v1 = np.array([0.0, math.sqrt(s), math.sqrt(t) * ph], dtype=complex) * n
    w1 = np.array([1.0, 0.0, 0.0], dtype=complex)
    w2 = np.array([0.0, math.sqrt(t), -math.sqrt(s) * ph], dtype=complex) * n
    return Frame(v1, w1, w2)


def frame(c: Canonical, label: CaseLabel) -> Frame:
    """Closed-form orthonormal eigenframe of the degenerate Hamiltonian.

    The simple eigenvector belongs to eigenvalue c.e1p of the shifted
    matrix; w1, w2 span its kernel.  Raises ValidationError when the label
    does not match the canonical zero pattern (misrouted case) or a
    normalization denominator vanishes.
    """
    if c.label is not label:
        raise ValidationError(
            f"canonical point is {c.label.value} but was routed as {label.value}")
    if label is CaseLabel.CASE1:
        rp, sp, tp = c.rp, c.sp, c.tp
        P = rp + sp
        E = P + tp
        eg = cmath.exp(-1j * c.gamma)
        et = cmath.exp(1j * c.theta)
        v1 = np.array([math.sqrt(rp) * eg, math.sqrt(sp), math.sqrt(tp) * et]) / math.sqrt(E)
        w1 = np.array([-math.sqrt(sp) * eg, math.sqrt(rp), 0.0]) / math.sqrt(P)
        w2 = np.array([math.sqrt(rp * tp) * eg, math.sqrt(sp * tp), -P * et]) / math.sqrt(P * E)
        return Frame(v1, w1, w2)
    if label is CaseLabel.CASE2:
        return _frame_case2(c.sp, c.tp, c.theta)
    if label in (CaseLabel.CASE3, CaseLabel.CASE4):
        tr = CASE3_TRANSFORM if label is CaseLabel.CASE3 else CASE4_TRANSFORM
        s, t, ang = tr.slots(c)
        base = _frame_case2(s, t, ang)
        return Frame(tr.permutation @ base.v1,
                     tr.permutation @ base.w1,
                     tr.permutation @ base.w2)
    raise ValidationError(f"{label.value} has no closed-form frame")


def eig3_oracle(H, tol: float = 1e-13) -> tuple[np.ndarray, np.ndarray]:
    """Brute-force 3x3 Hermitian eigensolver by cyclic two-sided rotations.

    Returns eigenvalues in ascending order and the matching unitary of
    column eigenvectors.  Deterministic: fixed pivot order, each
    eigenvector phase-fixed so its largest component is real positive.
    Raises NumericalError if the off-diagonal norm has not dropped below
    tol * scale after 100 sweeps (the symptom of non-Hermitian input).
    """
    H = np.asarray(H, dtype=complex)
    if H.shape != (3, 3):
        raise ValidationError(f"expected a 3x3 matrix, got shape {H.shape}")
    a = [[complex(H[i, j]) for j in range(3)] for i in range(3)]
    v = [[1.0 + 0j, 0j, 0j], [0j, 1.0 + 0j, 0j], [0j, 0j, 1.0 + 0j]]
    scale = max(max(abs(x) for row in a for x in row), 1e-300)
    target = tol * scale
    converged = False
    for _ in range(100):
        off = math.sqrt(abs(a[0][1]) ** 2 + abs(a[0][2]) ** 2 + abs(a[1][2]) ** 2
                        + abs(a[1][0]) ** 2 + abs(a[2][0]) ** 2 + abs(a[2][1]) ** 2)
        if off <= target:
            converged = True
            break
        for i, j in ((0, 1), (0, 2), (1, 2)):
            apq = a[i][j]
            m = abs(apq)
            if m == 0.0:
                continue
            eia = apq / m
            emia = eia.conjugate()
            tau = (a[j][j].real - a[i][i].real) / (2.0 * m)
            if tau == 0.0:
                t = 1.0
            else:
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
            cth = 1.0 / math.sqrt(1.0 + t * t)
            sth = t * cth
            for k in range(3):  # columns: A <- A U
                aki, akj = a[k][i], a[k][j]
                a[k][i] = cth * aki - sth * emia * akj
                a[k][j] = sth * aki + cth * emia * akj
                vki, vkj = v[k][i], v[k][j]
                v[k][i] = cth * vki - sth * emia * vkj
                v[k][j] = sth * vki + cth * emia * vkj
            for k in range(3):  # rows: A <- U^dag A
                aik, ajk = a[i][k], a[j][k]
                a[i][k] = cth * aik - sth * eia * ajk
                a[j][k] = sth * aik + cth * eia * ajk
    if not converged:
        raise NumericalError(
            "eigensolver did not converge in 100 sweeps (non-Hermitian input?)")
    evals = np.array([a[0][0].real, a[1][1].real, a[2][2].real])
    vecs = np.array(v, dtype=complex)
    order = np.argsort(evals, kind="stable")
    evals = evals[order]
    vecs = vecs[:, order]
    for k in range(3):  # deterministic phase: largest component real positive
        idx = int(np.argmax(np.abs(vecs[:, k])))
        z = vecs[idx, k]
        if z != 0:
            vecs[:, k] *= z.conjugate() / abs(z)
    return evals, vecs


def align_frames(prev: Frame, next_frame: Frame) -> Frame:
    """Gauge-smooth ``next_frame`` against ``prev``.

    The degenerate block is right-multiplied by the inverse unitary polar
    factor of the block overlap, the unique closest unitary, so spans are
    unchanged while continuity with ``prev`` is maximized; v1 is rephased to
    make its overlap with prev real positive.  Raises NumericalError when
    the frames are not comparable (overlap determinant magnitude < 0.5).
    """
    Wp = prev.degenerate_block()
    Wn = next_frame.degenerate_block()
    overlap = Wp.conj().T @ Wn
    if abs(np.linalg.det(overlap)) < 0.5:
        raise NumericalError(
            "frames are not comparable: degenerate-block overlap determinant "
            f"magnitude {abs(np.linalg.det(overlap)):.3f} < 0.5")
    u_svd, _, vh_svd = np.linalg.svd(overlap)
    polar_u = u_svd @ vh_svd
    Wa = Wn @ polar_u.conj().T
    ip = np.vdot(prev.v1, next_frame.v1)
    if abs(ip) < 0.5:
        raise NumericalError("frames are not comparable: simple-level overlap too small")
    v1a = next_frame.v1 * (ip.conjugate() / abs(ip))
    return Frame(v1a, Wa[:, 0], Wa[:, 1])
