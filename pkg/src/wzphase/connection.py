"""Connection one-forms of the degenerate eigenframes.

A1 (real) governs the simple level, A2 (2x2 Hermitian-matrix valued) the
degenerate pair.  Both are expressed in the cotangent basis (dgamma, dtheta,
d(sp/rp)); the closed forms are the exact derivatives A = i F^dag dF of the
frames produced by :func:`wzphase.spectral.frame`, so the definitional
finite-difference oracle reproduces them coefficient by coefficient.  All
coefficients depend only on the ratios of (rp, sp, tp).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .degeneracy import Canonical, CaseLabel
from .errors import NumericalError, ValidationError
from .spectral import frame


@dataclass(frozen=True)
class TangentSample:
    """Velocities of the canonical coordinates along a path.

    ``dratio`` is the velocity of sp/rp, derivable from the raw velocities
    when rp > 0; the raw velocities are kept for the finite-difference
    oracle.
    """

    drp: float
    dsp: float
    dtp: float
    dgamma: float
    dtheta: float
    dratio: float

    @classmethod
    def from_raw(cls, c: Canonical, drp: float, dsp: float, dtp: float,
                 dgamma: float, dtheta: float) -> "TangentSample":
        dratio = (dsp * c.rp - c.sp * drp) / c.rp ** 2 if c.rp > 0.0 else 0.0
        return cls(drp, dsp, dtp, dgamma, dtheta, dratio)


@dataclass(frozen=True)
class ConnectionCoeffs:
    """Coefficients of A1 and A2 along (dgamma, dtheta, d(sp/rp))."""

    a1_gamma: float
    a1_theta: float
    a1_ratio: float
    a2_gamma: np.ndarray
    a2_theta: np.ndarray
    a2_ratio: np.ndarray

    def a1(self, tan: TangentSample) -> float:
        return (self.a1_gamma * tan.dgamma + self.a1_theta * tan.dtheta
                + self.a1_ratio * tan.dratio)

    def a2(self, tan: TangentSample) -> np.ndarray:
        return (self.a2_gamma * tan.dgamma + self.a2_theta * tan.dtheta
                + self.a2_ratio * tan.dratio)


def _zero2() -> np.ndarray:
    return np.zeros((2, 2), dtype=complex)


def connection_forms(c: Canonical, label: CaseLabel) -> ConnectionCoeffs:
    """Closed-form connection coefficients at a canonical point.

    Case2 carries only dtheta terms and Case4 only dgamma terms; Case3
    responds to dgamma and dtheta equally because its frame depends on the
    angles through -(theta + gamma) alone.  Case2-4 have purely diagonal A2
    (Abelian holonomy on the degenerate level).
    """
    if c.label is not label:
        raise ValidationError(
            f"canonical point is {c.label.value} but was routed as {label.value}")
    if label is CaseLabel.CASE1:
        p, q, u = c.rp, c.sp, c.tp
        P = p + q
        E = P + u
        W = math.sqrt(p * q * u / E) / P
        a2_gamma = np.array([[q / P, -W], [-W, p * u / (P * E)]], dtype=complex)
        a2_theta = np.array([[0.0, 0.0], [0.0, -P / E]], dtype=complex)
        od = 0.5j * W * p / q
        a2_ratio = np.array([[0.0, od], [-od, 0.0]], dtype=complex)
        return ConnectionCoeffs(p / E, -u / E, 0.0, a2_gamma, a2_theta, a2_ratio)
    if label is CaseLabel.CASE2:
        f1 = -c.tp / (c.sp + c.tp)
        a2 = np.array([[0.0, 0.0], [0.0, -c.sp / (c.sp + c.tp)]], dtype=complex)
        return ConnectionCoeffs(0.0, f1, 0.0, _zero2(), a2, _zero2())
    if label is CaseLabel.CASE3:
        f1 = c.tp / (c.rp + c.tp)
        a2 = np.array([[0.0, 0.0], [0.0, c.rp / (c.rp + c.tp)]], dtype=complex)
        return ConnectionCoeffs(f1, f1, 0.0, a2, a2.copy(), _zero2())
    if label is CaseLabel.CASE4:
        f1 = c.rp / (c.rp + c.sp)
        a2 = np.array([[0.0, 0.0], [0.0, c.sp / (c.rp + c.sp)]], dtype=complex)
        return ConnectionCoeffs(f1, 0.0, 0.0, a2, _zero2(), _zero2())
    raise ValidationError(f"{label.value} has no connection closed form")


def pullback(loop, t: float) -> tuple[float, np.ndarray]:
    """Connection pulled back along a loop at time t.

    Contracts the closed-form coefficients with the loop's tangent sample;
    propagates a CaseTransitionError if the sample leaves the loop's case.
    """
    s = loop.sample(t)
    cf = connection_forms(s.canonical, s.label)
    return cf.a1(s.tangent), cf.a2(s.tangent)


def _displaced(c: Canonical, direction: TangentSample, step: float) -> Canonical:
    fields = {}
    for name, d in (("rp", direction.drp), ("sp", direction.dsp),
                    ("tp", direction.dtp), ("gamma", direction.dgamma),
                    ("theta", direction.dtheta)):
        val = getattr(c, name) + step * d
        if name in ("rp", "sp", "tp"):
            base = getattr(c, name)
            if base == 0.0 and d != 0.0:
                raise ValidationError(
                    f"direction moves {name} off its case-zero value")
            if base > 0.0 and val <= 0.0:
                raise ValidationError(
                    f"displaced point leaves the case region: {name} = {val}")
        fields[name] = val
    return replace(c, **fields)


def fd_connection_oracle(c: Canonical, label: CaseLabel, direction: TangentSample,
                         h: float | None = None) -> tuple[float, np.ndarray]:
    """Definitional connection by central differences of the exact frames.

    Evaluates i F(c)^dag [F(c + h/2 dir) - F(c - h/2 dir)] / h and
    Hermitizes the blocks, an O(h^2) approximation of the contraction of
    the connection with ``direction``.  This is the ground-truth check for
    :func:`connection_forms`.
    """
    if h is None:
        h = 1e-4 * (1.0 + math.sqrt(c.rp ** 2 + c.sp ** 2 + c.tp ** 2))
    if h <= 0.0:
        raise ValidationError(f"step must be positive, got {h}")
    f0 = frame(c, label)
    fp = frame(_displaced(c, direction, +0.5 * h), label)
    fm = frame(_displaced(c, direction, -0.5 * h), label)
    for fd in (fp, fm):  # comparability guard: reject steps that swing the frame
        overlap = f0.degenerate_block().conj().T @ fd.degenerate_block()
        if abs(np.linalg.det(overlap)) < 0.5:
            raise NumericalError("finite-difference step too large: frames not comparable")
    M = 1j * f0.matrix().conj().T @ (fp.matrix() - fm.matrix()) / h
    M = 0.5 * (M + M.conj().T)
    return M[0, 0].real, M[1:, 1:]
