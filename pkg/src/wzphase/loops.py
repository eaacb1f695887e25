"""Closed parameter loops through the degenerate strata.

A loop samples canonical coordinates, case label, and tangent velocities at
any time in [0, T], and exposes batch evaluation of the Hamiltonian matrix
and of the pulled-back connection for the integrators.  Three families:

* CanonicalLoop: canonical coordinates as truncated Fourier series of t/T
  (angles may carry integer windings), closed by construction;
* ParamsLoop: any periodic map t -> Params, canonicalized per sample;
* SampledLoop: an explicit closed list of Params, interpolated linearly in
  canonical coordinates (which keeps every interpolated point exactly
  degenerate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .connection import TangentSample, connection_forms
from .degeneracy import (DEFAULT_TOL, Canonical, CaseLabel, canonicalize, classify,
                         synthesize)
from .errors import CaseTransitionError, ValidationError
from .hamiltonian import Params, matrix_from_params

TWO_PI = 2.0 * math.pi

CLOSURE_TOL = 1e-12


@dataclass(frozen=True)
class FourierSeries:
    """Real truncated Fourier series f(x) on x in [0, 1]; harmonic k>=1."""

    const: float = 0.0
    cos: tuple = ()
    sin: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "const", float(self.const))
        object.__setattr__(self, "cos", tuple(float(v) for v in self.cos))
        object.__setattr__(self, "sin", tuple(float(v) for v in self.sin))

    @property
    def is_zero(self) -> bool:
        return (self.const == 0.0 and not any(self.cos) and not any(self.sin))

    def eval(self, x):
        out = self.const + np.zeros_like(np.asarray(x, dtype=float))
        for k, ck in enumerate(self.cos, start=1):
            out = out + ck * np.cos(TWO_PI * k * np.asarray(x))
        for k, sk in enumerate(self.sin, start=1):
            out = out + sk * np.sin(TWO_PI * k * np.asarray(x))
        return out

    def deriv(self, x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for k, ck in enumerate(self.cos, start=1):
            out = out - ck * TWO_PI * k * np.sin(TWO_PI * k * np.asarray(x))
        for k, sk in enumerate(self.sin, start=1):
            out = out + sk * TWO_PI * k * np.cos(TWO_PI * k * np.asarray(x))
        return out

    @classmethod
    def from_dict(cls, d) -> "FourierSeries":
        if isinstance(d, (int, float)):
            return cls(const=float(d))
        return cls(const=d.get("const", 0.0), cos=d.get("cos", ()), sin=d.get("sin", ()))


@dataclass(frozen=True)
class AngleSeries(FourierSeries):
    """Fourier series plus an integer winding: f(1) = f(0) + 2*pi*winding."""

    winding: int = 0

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "winding", int(self.winding))

    @property
    def is_zero(self) -> bool:
        return super().is_zero and self.winding == 0

    def eval(self, x):
        return super().eval(x) + self.winding * TWO_PI * np.asarray(x, dtype=float)

    def deriv(self, x):
        return super().deriv(x) + self.winding * TWO_PI

    @classmethod
    def from_dict(cls, d) -> "AngleSeries":
        if isinstance(d, (int, float)):
            return cls(const=float(d))
        return cls(const=d.get("const", 0.0), cos=d.get("cos", ()),
                   sin=d.get("sin", ()), winding=d.get("winding", 0))


class LoopSample(NamedTuple):
    canonical: Canonical
    label: CaseLabel
    tangent: TangentSample


def _continue_angle(a: float, ref: float) -> float:
    """Shift a by a multiple of 2*pi to the branch nearest ref."""
    return a + TWO_PI * round((ref - a) / TWO_PI)


class Loop:
    """Base class: a closed path through one degeneracy case region."""

    label: CaseLabel

    def __init__(self, T: float, tol: float = DEFAULT_TOL):
        if not (T > 0.0 and math.isfinite(T)):
            raise ValidationError(f"loop duration must be positive, got {T}")
        self.T = float(T)
        self.tol = float(tol)

    def canonical_at(self, t: float, ref: Canonical | None = None) -> Canonical:
        raise NotImplementedError

    def tangent_at(self, t: float) -> TangentSample:
        """Central-difference velocities of the canonical coordinates."""
        h = max(self.T * 1e-6, 1e-9)
        c0 = self.canonical_at(t)
        cp = self.canonical_at(t + 0.5 * h, ref=c0)
        cm = self.canonical_at(t - 0.5 * h, ref=c0)
        return TangentSample.from_raw(
            c0,
            (cp.rp - cm.rp) / h, (cp.sp - cm.sp) / h, (cp.tp - cm.tp) / h,
            (cp.gamma - cm.gamma) / h, (cp.theta - cm.theta) / h)

    def sample(self, t: float, ref: Canonical | None = None) -> LoopSample:
        c = self.canonical_at(t, ref=ref)
        if c.label is not self.label:
            raise CaseTransitionError(
                f"loop left its case region at t = {t}: {c.label.value} != {self.label.value}")
        return LoopSample(c, self.label, self.tangent_at(t))

    def params_at(self, t: float) -> Params:
        c = self.canonical_at(t)
        return synthesize(c, offset=c.e2)

    def matrix_batch(self, ts: np.ndarray) -> np.ndarray:
        return np.stack([matrix_from_params(self.params_at(float(t))) for t in ts])

    def connection_batch(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Pulled-back (a1, a2) at the given times, angle branches chained."""
        a1 = np.empty(len(ts))
        a2 = np.empty((len(ts), 2, 2), dtype=complex)
        ref = None
        for k, t in enumerate(ts):
            s = self.sample(float(t), ref=ref)
            cf = connection_forms(s.canonical, s.label)
            a1[k] = cf.a1(s.tangent)
            a2[k] = cf.a2(s.tangent)
            ref = s.canonical
        return a1, a2

    def energies_batch(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(E1, E2) of the unshifted Hamiltonian at the given times."""
        e1 = np.empty(len(ts))
        e2 = np.empty(len(ts))
        for k, t in enumerate(ts):
            c = self.canonical_at(float(t))
            e2[k] = c.e2
            e1[k] = c.e2 + c.e1p
        return e1, e2

    def check_closed(self) -> None:
        """Reject open loops: endpoint matrices must agree to 1e-12 relative."""
        H0 = self.matrix_batch(np.array([0.0]))[0]
        HT = self.matrix_batch(np.array([self.T]))[0]
        scale = max(np.max(np.abs(H0)), 1.0)
        gap = np.max(np.abs(H0 - HT))
        if gap > CLOSURE_TOL * scale:
            raise ValidationError(
                f"loop is not closed: endpoint mismatch {gap:.3e} at scale {scale:.3e}")

    def with_duration(self, T: float) -> "Loop":
        raise NotImplementedError


class CanonicalLoop(Loop):
    """Canonical coordinates as Fourier series of t/T; closed by construction."""

    def __init__(self, T: float, rp: FourierSeries, sp: FourierSeries,
                 tp: FourierSeries, gamma: AngleSeries, theta: AngleSeries,
                 e2: FourierSeries = FourierSeries(), sign: int = 1,
                 tol: float = DEFAULT_TOL):
        super().__init__(T, tol)
        self.rp, self.sp, self.tp = rp, sp, tp
        self.gamma, self.theta = gamma, theta
        self.e2 = e2
        self.sign = int(sign)
        zeros = (rp.is_zero, sp.is_zero, tp.is_zero)
        nz = sum(zeros)
        if nz == 0:
            self.label = CaseLabel.CASE1
        elif nz == 1:
            self.label = (CaseLabel.CASE2, CaseLabel.CASE3,
                          CaseLabel.CASE4)[zeros.index(True)]
        else:
            raise ValidationError(
                "at most one canonical coordinate series may vanish identically")

    def _coords(self, x):
        return (self.rp.eval(x), self.sp.eval(x), self.tp.eval(x),
                self.gamma.eval(x), self.theta.eval(x), self.e2.eval(x))

    def canonical_at(self, t: float, ref: Canonical | None = None) -> Canonical:
        x = t / self.T
        rp, sp, tp, g, th, e2 = (float(v) for v in self._coords(x))
        return Canonical(rp, sp, tp, g, th, self.sign, e2)

    def tangent_at(self, t: float) -> TangentSample:
        x = t / self.T
        c = self.canonical_at(t)
        return TangentSample.from_raw(
            c,
            float(self.rp.deriv(x)) / self.T, float(self.sp.deriv(x)) / self.T,
            float(self.tp.deriv(x)) / self.T,
            float(self.gamma.deriv(x)) / self.T, float(self.theta.deriv(x)) / self.T)

    def matrix_batch(self, ts: np.ndarray) -> np.ndarray:
        x = np.asarray(ts, dtype=float) / self.T
        rp, sp, tp, g, th, e2 = self._coords(x)
        self._require_region(rp, sp, tp)
        sign = float(self.sign)
        n = len(x)
        H = np.zeros((n, 3, 3), dtype=complex)
        xi = sign * np.sqrt(rp * sp) * np.exp(1j * g)
        kappa = sign * np.sqrt(sp * tp) * np.exp(1j * th)
        if self.label is CaseLabel.CASE3:
            zeta = sign * np.sqrt(rp * tp) * np.exp(-1j * (th + g))
        else:
            zeta = sign * np.sqrt(rp * tp) * np.exp(1j * (g + th))
        H[:, 0, 0] = sign * rp + e2
        H[:, 1, 1] = sign * sp + e2
        H[:, 2, 2] = sign * tp + e2
        H[:, 1, 0] = xi
        H[:, 0, 1] = np.conj(xi)
        H[:, 2, 0] = zeta
        H[:, 0, 2] = np.conj(zeta)
        H[:, 2, 1] = kappa
        H[:, 1, 2] = np.conj(kappa)
        return H

    def _require_region(self, rp, sp, tp) -> None:
        for name, series, arr in (("rp", self.rp, rp), ("sp", self.sp, sp),
                                  ("tp", self.tp, tp)):
            if series.is_zero:
                continue
            if np.min(arr) <= 0.0:
                raise CaseTransitionError(
                    f"canonical coordinate {name} is not positive along the loop")

    def connection_batch(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(ts, dtype=float) / self.T
        rp, sp, tp, g, th, _ = self._coords(x)
        self._require_region(rp, sp, tp)
        drp = self.rp.deriv(x) / self.T
        dsp = self.sp.deriv(x) / self.T
        dtp = self.tp.deriv(x) / self.T
        dg = self.gamma.deriv(x) / self.T + np.zeros_like(x)
        dth = self.theta.deriv(x) / self.T + np.zeros_like(x)
        n = len(x)
        a1 = np.zeros(n)
        a2 = np.zeros((n, 2, 2), dtype=complex)
        if self.label is CaseLabel.CASE1:
            P = rp + sp
            E = P + tp
            W = np.sqrt(rp * sp * tp / E) / P
            dratio = (dsp * rp - sp * drp) / rp ** 2
            a1 = (rp / E) * dg - (tp / E) * dth
            a2[:, 0, 0] = (sp / P) * dg
            a2[:, 1, 1] = (rp * tp / (P * E)) * dg - (P / E) * dth
            od = -W * dg + 0.5j * W * (rp / sp) * dratio
            a2[:, 0, 1] = od
            a2[:, 1, 0] = np.conj(od)
        elif self.label is CaseLabel.CASE2:
            a1 = -(tp / (sp + tp)) * dth
            a2[:, 1, 1] = -(sp / (sp + tp)) * dth
        elif self.label is CaseLabel.CASE3:
            a1 = (tp / (rp + tp)) * (dth + dg)
            a2[:, 1, 1] = (rp / (rp + tp)) * (dth + dg)
        else:
            a1 = (rp / (rp + sp)) * dg
            a2[:, 1, 1] = (sp / (rp + sp)) * dg
        return a1, a2

    def energies_batch(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(ts, dtype=float) / self.T
        rp, sp, tp, _, _, e2 = self._coords(x)
        gap = self.sign * (rp + sp + tp)
        zero = np.zeros_like(x)
        return e2 + gap + zero, e2 + zero

    def check_closed(self) -> None:
        pass  # Fourier series of t/T with integer windings close exactly

    def with_duration(self, T: float) -> "CanonicalLoop":
        return CanonicalLoop(T, self.rp, self.sp, self.tp, self.gamma,
                             self.theta, self.e2, self.sign, self.tol)


class ParamsLoop(Loop):
    """Generic periodic Params-valued path, canonicalized per sample."""

    def __init__(self, params_fn: Callable[[float], Params], T: float,
                 tol: float = DEFAULT_TOL):
        super().__init__(T, tol)
        self._fn = params_fn
        label = classify(params_fn(0.0), tol)
        if not label.is_canonical_case:
            raise ValidationError(
                f"loop basepoint is {label.value}; holonomy needs Case1-Case4")
        self.label = label

    def params_at(self, t: float) -> Params:
        return self._fn(t)

    def matrix_batch(self, ts: np.ndarray) -> np.ndarray:
        return np.stack([matrix_from_params(self._fn(float(t))) for t in ts])

    def canonical_at(self, t: float, ref: Canonical | None = None) -> Canonical:
        p = self._fn(t)
        lab = classify(p, self.tol)
        if lab is not self.label:
            raise CaseTransitionError(
                f"loop left its case region at t = {t}: {lab.value}")
        c = canonicalize(p, lab, self.tol)
        if ref is not None:
            c = replace(c, gamma=_continue_angle(c.gamma, ref.gamma),
                        theta=_continue_angle(c.theta, ref.theta))
        return c

    def with_duration(self, T: float) -> "ParamsLoop":
        scale = self.T / T
        fn = self._fn
        return ParamsLoop(lambda t: fn(t * scale), T, self.tol)


class SampledLoop(Loop):
    """Closed list of degenerate Params, interpolated in canonical coordinates."""

    def __init__(self, samples: Sequence[Params], T: float, tol: float = DEFAULT_TOL):
        super().__init__(T, tol)
        if len(samples) < 2:
            raise ValidationError("a sampled loop needs at least two samples")
        H0 = matrix_from_params(samples[0])
        HT = matrix_from_params(samples[-1])
        scale = max(np.max(np.abs(H0)), 1.0)
        if np.max(np.abs(H0 - HT)) > CLOSURE_TOL * scale:
            raise ValidationError("sample list does not close")
        labels = [classify(p, tol) for p in samples]
        if not labels[0].is_canonical_case:
            raise ValidationError(
                f"samples are {labels[0].value}; holonomy needs Case1-Case4")
        if any(lab is not labels[0] for lab in labels):
            raise CaseTransitionError("samples cross between case regions")
        self.label = labels[0]
        nodes = [canonicalize(p, labels[0], tol) for p in samples]
        if any(c.sign != nodes[0].sign for c in nodes):
            raise CaseTransitionError("samples cross between gap-sign branches")
        gammas = [nodes[0].gamma]
        thetas = [nodes[0].theta]
        for c in nodes[1:]:
            gammas.append(_continue_angle(c.gamma, gammas[-1]))
            thetas.append(_continue_angle(c.theta, thetas[-1]))
        self.sign = nodes[0].sign
        self._times = np.linspace(0.0, self.T, len(nodes))
        self._coords = {
            "rp": np.array([c.rp for c in nodes]),
            "sp": np.array([c.sp for c in nodes]),
            "tp": np.array([c.tp for c in nodes]),
            "gamma": np.array(gammas),
            "theta": np.array(thetas),
            "e2": np.array([c.e2 for c in nodes]),
        }

    def canonical_at(self, t: float, ref: Canonical | None = None) -> Canonical:
        tm = math.fmod(t, self.T)
        if tm < 0.0:
            tm += self.T
        vals = {k: float(np.interp(tm, self._times, v)) for k, v in self._coords.items()}
        c = Canonical(vals["rp"], vals["sp"], vals["tp"], vals["gamma"],
                      vals["theta"], self.sign, vals["e2"])
        if ref is not None:
            c = replace(c, gamma=_continue_angle(c.gamma, ref.gamma),
                        theta=_continue_angle(c.theta, ref.theta))
        return c

    def check_closed(self) -> None:
        pass  # verified against the raw samples at construction

    def with_duration(self, T: float) -> "SampledLoop":
        clone = object.__new__(SampledLoop)
        Loop.__init__(clone, T, self.tol)
        clone.label = self.label
        clone.sign = self.sign
        clone._times = self._times * (T / self.T)
        clone._coords = self._coords
        return clone
