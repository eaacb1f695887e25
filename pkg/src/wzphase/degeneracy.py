"""Double-degeneracy detection, classification, and canonical coordinates.

A 3x3 Hermitian H has a doubly degenerate eigenvalue E2 exactly when the
shifted matrix H' = H - E2*I has rank <= 1, i.e. H' = E1' * (rank-1
projector) with E1' the gap to the simple level.  That structure reduces the
eigenproblem to quadratic conditions on the matrix entries, classified by
which off-diagonal entries vanish:

* TrivialDiagonal: xi = zeta = kappa = 0 (diagonal matrix);
* Case1: all of xi, zeta, kappa nonzero;
* Case2: xi = zeta = 0, kappa != 0;
* Case3: xi = kappa = 0, zeta != 0;
* Case4: zeta = kappa = 0, xi != 0;
* Case5: exactly one of the three vanishes (never doubly degenerate);
* NonDegenerate: a zero pattern matches Case1-4 but the degeneracy
  condition fails.

Canonical coordinates store the non-negative shifted diagonal (r', s', t')
with the overall sign of the gap kept separately, plus the two independent
phase angles gamma = arg(xi) and theta = arg(kappa) (sign-stripped).  The
remaining phase satisfies arg(zeta) = gamma + theta on the Case1 stratum.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .errors import ValidationError
from .hamiltonian import Params

TWO_PI = 2.0 * math.pi

DEFAULT_TOL = 1e-9


class CaseLabel(enum.Enum):
    """Degeneracy class of a three-level Hamiltonian."""

    TRIVIAL_DIAGONAL = "TrivialDiagonal"
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3 = "Case3"
    CASE4 = "Case4"
    CASE5 = "Case5"
    NON_DEGENERATE = "NonDegenerate"

    @property
    def is_canonical_case(self) -> bool:
        """True for the four cases that admit canonical coordinates."""
        return self in _CANONICAL_CASES


_CANONICAL_CASES = frozenset(
    {CaseLabel.CASE1, CaseLabel.CASE2, CaseLabel.CASE3, CaseLabel.CASE4})


@dataclass(frozen=True)
class Canonical:
    """Canonical coordinates of a doubly degenerate Hamiltonian.

    ``rp, sp, tp`` are the magnitudes of the shifted diagonal entries
    (all zero entries exactly zero), ``sign`` is the common sign of the
    shifted diagonal and of the gap ``e1p = sign * (rp + sp + tp)``, and
    ``e2`` is the degenerate eigenvalue of the unshifted matrix.  Angles are
    stored as plain floats and interpreted mod 2*pi; canonicalize() returns
    them in [0, 2*pi).
    """

    rp: float
    sp: float
    tp: float
    gamma: float
    theta: float
    sign: int = 1
    e2: float = 0.0

    def __post_init__(self):
        for name in ("rp", "sp", "tp", "gamma", "theta", "e2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.sign not in (1, -1):
            raise ValidationError(f"sign must be +1 or -1, got {self.sign}")
        if not all(math.isfinite(getattr(self, n))
                   for n in ("rp", "sp", "tp", "gamma", "theta", "e2")):
            raise ValidationError("non-finite canonical coordinates")
        if self.rp < 0 or self.sp < 0 or self.tp < 0:
            raise ValidationError(
                f"canonical diagonal must be non-negative, got {(self.rp, self.sp, self.tp)}")
        if self.rp + self.sp + self.tp == 0.0:
            raise ValidationError("degenerate gap vanishes: rp = sp = tp = 0")

    @property
    def e1p(self) -> float:
        """Signed gap between the simple and the degenerate level."""
        return self.sign * (self.rp + self.sp + self.tp)

    @property
    def label(self) -> CaseLabel:
        """Case implied by which canonical diagonal entries vanish."""
        zeros = (self.rp == 0.0, self.sp == 0.0, self.tp == 0.0)
        n = sum(zeros)
        if n == 0:
            return CaseLabel.CASE1
        if n == 1:
            return (CaseLabel.CASE2, CaseLabel.CASE3, CaseLabel.CASE4)[zeros.index(True)]
        return CaseLabel.TRIVIAL_DIAGONAL


@dataclass(frozen=True)
class ChartPoint:
    """Local coordinates of a degenerate Hamiltonian on the projective
    parameter space, in one of the three standard charts O1, O2, O3."""

    chart: str
    rho_a: float
    rho_b: float
    phi_a: float
    phi_b: float


@dataclass(frozen=True)
class CubicCoeffs:
    """Coefficients of the characteristic cubic c3*E^3 + c2*E^2 + c1*E + c0."""

    c2: float
    c1: float
    c0: float
    c3: float = -1.0

    def eval(self, e: float) -> float:
        return ((self.c3 * e + self.c2) * e + self.c1) * e + self.c0


def characteristic_coeffs(p: Params) -> CubicCoeffs:
    """Characteristic polynomial det(H - E*I) of the induced matrix."""
    ax2 = abs(p.xi) ** 2
    az2 = abs(p.zeta) ** 2
    ak2 = abs(p.kappa) ** 2
    cross = p.kappa * p.xi * p.zeta.conjugate()
    return CubicCoeffs(
        c2=p.r + p.s + p.t,
        c1=-(p.r * p.s + p.s * p.t + p.t * p.r) + ax2 + az2 + ak2,
        c0=(p.r * p.s * p.t + 2.0 * cross.real
            - p.r * ak2 - p.s * az2 - p.t * ax2),
    )


def _case1_branch(p: Params, tol: float, scale: float):
    """Try both gap-sign branches of the all-entries-nonzero conditions.

    Returns (sign, e2, spread) for the branch whose three candidate values
    of the degenerate eigenvalue agree, or None.  The ratio xi*kappa/zeta
    must be real; its sign matches the sign of the gap (negative gap means
    the simple level lies below the degenerate one).
    """
    q = p.xi * p.kappa / p.zeta
    if abs(q.imag) > tol * scale:
        return None
    a = abs(p.xi * p.zeta / p.kappa)
    b = abs(q)
    c = abs(p.zeta * p.kappa / p.xi)
    best = None
    for sign in (1, -1):
        cand = (p.r - sign * a, p.s - sign * b, p.t - sign * c)
        spread = max(cand) - min(cand)
        # the middle condition also pins sign = sign(Re q)
        if spread <= tol * scale and sign * q.real > 0:
            if best is None or spread < best[2]:
                e2 = (p.r + p.s + p.t - sign * (a + b + c)) / 3.0
                best = (sign, e2, spread)
    return best


def _pair_condition(p: Params, label: CaseLabel) -> tuple[float, float]:
    """Degeneracy condition residual and candidate E2 for Cases 2-4.

    Case2: |kappa|^2 = (s - r)(t - r) with E2 = r, and cyclic analogues.
    """
    if label is CaseLabel.CASE2:
        return (p.s - p.r) * (p.t - p.r) - abs(p.kappa) ** 2, p.r
    if label is CaseLabel.CASE3:
        return (p.r - p.s) * (p.t - p.s) - abs(p.zeta) ** 2, p.s
    if label is CaseLabel.CASE4:
        return (p.r - p.t) * (p.s - p.t) - abs(p.xi) ** 2, p.t
    raise ValidationError(f"no pair condition for {label}")


def classify(p: Params, tol: float = DEFAULT_TOL) -> CaseLabel:
    """Classify a Hamiltonian by off-diagonal zero pattern and degeneracy.

    ``tol`` is relative; magnitudes are compared against tol times the
    largest entry magnitude (floored at 1).  Total function: every input
    maps to exactly one label.
    """
    if tol <= 0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    scale = p.scale
    thr = tol * scale
    zx, zz, zk = abs(p.xi) <= thr, abs(p.zeta) <= thr, abs(p.kappa) <= thr
    nzero = zx + zz + zk
    if nzero == 3:
        return CaseLabel.TRIVIAL_DIAGONAL
    if nzero == 1:
        return CaseLabel.CASE5
    if nzero == 0:
        if _case1_branch(p, tol, scale) is not None:
            return CaseLabel.CASE1
        return CaseLabel.NON_DEGENERATE
    # exactly one nonzero off-diagonal entry
    label = CaseLabel.CASE2 if not zk else (CaseLabel.CASE3 if not zz else CaseLabel.CASE4)
    residual, _ = _pair_condition(p, label)
    if abs(residual) <= tol * scale * scale:
        return label
    return CaseLabel.NON_DEGENERATE


def condition_residual(p: Params, label: CaseLabel, tol: float = DEFAULT_TOL) -> float:
    """Scaled residual of the degeneracy condition for the given label.

    Case1 reports the spread of the three candidate degenerate eigenvalues
    over the better sign branch (in units of scale); Cases 2-4 report the
    pair condition residual in units of scale^2.  Other labels report 0.
    """
    scale = p.scale
    if label is CaseLabel.CASE1:
        br = _case1_branch(p, tol, scale)
        if br is not None:
            return br[2] / scale
        q = p.xi * p.kappa / p.zeta
        a = abs(p.xi * p.zeta / p.kappa)
        c = abs(p.zeta * p.kappa / p.xi)
        spreads = []
        for sign in (1, -1):
            cand = (p.r - sign * a, p.s - sign * abs(q), p.t - sign * c)
            spreads.append(max(cand) - min(cand))
        return max(abs(q.imag), min(spreads)) / scale
    if label in (CaseLabel.CASE2, CaseLabel.CASE3, CaseLabel.CASE4):
        residual, _ = _pair_condition(p, label)
        return abs(residual) / scale ** 2
    return 0.0


def degenerate_spectrum(p: Params, label: CaseLabel,
                        tol: float = DEFAULT_TOL) -> tuple[float, float, int]:
    """Simple and degenerate eigenvalues (E1, E2, sign) of a degenerate H.

    ``sign`` is the sign of the gap E1 - E2.  Raises ValidationError for
    labels without a double degeneracy or when the degeneracy condition is
    violated beyond tolerance (signals misclassification).
    """
    scale = p.scale
    if label is CaseLabel.TRIVIAL_DIAGONAL:
        d = (p.r, p.s, p.t)
        pairs = [(abs(d[i] - d[j]), i, j) for i, j in ((0, 1), (0, 2), (1, 2))]
        gap, i, j = min(pairs)
        if gap > tol * scale:
            raise ValidationError("diagonal matrix has no repeated entry")
        k = 3 - i - j
        e2 = 0.5 * (d[i] + d[j])
        e1 = d[k]
        if abs(e1 - e2) <= tol * scale:
            raise ValidationError("triply degenerate matrix has no simple level")
        return e1, e2, (1 if e1 > e2 else -1)
    if label is CaseLabel.CASE1:
        br = _case1_branch(p, tol, scale)
        if br is None:
            raise ValidationError(
                "no sign branch satisfies the Case1 degeneracy conditions")
        sign, e2, _ = br
        e1 = p.r + p.s + p.t - 2.0 * e2
        return e1, e2, sign
    if label in (CaseLabel.CASE2, CaseLabel.CASE3, CaseLabel.CASE4):
        residual, e2 = _pair_condition(p, label)
        if abs(residual) > tol * scale * scale:
            raise ValidationError(
                f"{label.value} degeneracy condition violated: residual {residual:.3e}")
        e1 = p.r + p.s + p.t - 2.0 * e2
        if abs(e1 - e2) <= tol * scale:
            raise ValidationError("vanishing gap: matrix is triply degenerate")
        return e1, e2, (1 if e1 > e2 else -1)
    raise ValidationError(f"{label.value} has no doubly degenerate eigenvalue")


def _mod_2pi(a: float) -> float:
    a = math.fmod(a, TWO_PI)
    return a + TWO_PI if a < 0.0 else a


def canonicalize(p: Params, label: CaseLabel, tol: float = DEFAULT_TOL) -> Canonical:
    """Extract canonical coordinates from a degenerate Hamiltonian.

    gamma = arg(sign * xi) and theta = arg(sign * kappa); entries that the
    case forces to vanish contribute angle 0.  For Case3 the angle is
    recovered from arg(sign * zeta) through the relabeling theta ->
    -(theta + gamma) that maps Case2 onto Case3.  On Case1 the phase
    consistency arg(sign * zeta) = gamma + theta is enforced within
    tolerance.
    """
    if not label.is_canonical_case:
        raise ValidationError(f"{label.value} has no canonical coordinates")
    e1, e2, sign = degenerate_spectrum(p, label, tol)
    scale = p.scale
    if label is CaseLabel.CASE1:
        rp = max(sign * (p.r - e2), 0.0)
        sp = max(sign * (p.s - e2), 0.0)
        tp = max(sign * (p.t - e2), 0.0)
        gamma = _mod_2pi(cmath.phase(sign * p.xi))
        theta = _mod_2pi(cmath.phase(sign * p.kappa))
        resid = sign * p.zeta * cmath.exp(-1j * (gamma + theta))
        if abs(resid.imag) > tol * scale or resid.real <= 0:
            raise ValidationError(
                f"phase consistency arg(zeta) = gamma + theta violated: {resid:.3e}")
        return Canonical(rp, sp, tp, gamma, theta, sign, e2)
    if label is CaseLabel.CASE2:
        sp = max(sign * (p.s - e2), 0.0)
        tp = max(sign * (p.t - e2), 0.0)
        theta = _mod_2pi(cmath.phase(sign * p.kappa))
        return Canonical(0.0, sp, tp, 0.0, theta, sign, e2)
    if label is CaseLabel.CASE3:
        rp = max(sign * (p.r - e2), 0.0)
        tp = max(sign * (p.t - e2), 0.0)
        theta = _mod_2pi(-cmath.phase(sign * p.zeta))
        return Canonical(rp, 0.0, tp, 0.0, theta, sign, e2)
    rp = max(sign * (p.r - e2), 0.0)
    sp = max(sign * (p.s - e2), 0.0)
    gamma = _mod_2pi(cmath.phase(sign * p.xi))
    return Canonical(rp, sp, 0.0, gamma, 0.0, sign, e2)


def synthesize(c: Canonical, offset: float = 0.0) -> Params:
    """Build the degenerate Hamiltonian with the given canonical coordinates.

    The result has doubly degenerate eigenvalue ``offset`` and simple
    eigenvalue ``offset + c.e1p``; the shifted matrix equals the gap times a
    rank-1 projector.  Exact inverse of canonicalize (up to e2 = offset).
    """
    sign = float(c.sign)
    xi = sign * math.sqrt(c.rp * c.sp) * cmath.exp(1j * c.gamma)
    kappa = sign * math.sqrt(c.sp * c.tp) * cmath.exp(1j * c.theta)
    if c.sp == 0.0:
        # Case3 phase relabeling: the zeta angle maps to -(theta + gamma)
        zeta = sign * math.sqrt(c.rp * c.tp) * cmath.exp(-1j * (c.theta + c.gamma))
    else:
        zeta = sign * math.sqrt(c.rp * c.tp) * cmath.exp(1j * (c.gamma + c.theta))
    return Params(r=sign * c.rp + offset, s=sign * c.sp + offset,
                  t=sign * c.tp + offset, xi=xi, zeta=zeta, kappa=kappa)


_CHART_RATIOS = {
    # chart -> (numerator indices of |z_nu / z_mu|) expressed via (rp, sp, tp)
    "O1": lambda c: (math.sqrt(c.tp / c.sp), math.sqrt(c.tp / c.rp)),
    "O2": lambda c: (math.sqrt(c.sp / c.tp), math.sqrt(c.sp / c.rp)),
    "O3": lambda c: (math.sqrt(c.rp / c.tp), math.sqrt(c.rp / c.sp)),
}


def chart_coords(c: Canonical) -> ChartPoint:
    """Local chart coordinates on the projective parameter space.

    The homogeneous coordinates are the off-diagonal entries (xi, zeta,
    kappa); chart O_mu requires the mu-th of these to be nonzero and is
    chosen in the fixed order O1 > O2 > O3.  Moduli come from the canonical
    diagonal ratios; phases are the arguments of the literal entry ratios.
    """
    nonzero = (c.rp > 0.0, c.sp > 0.0, c.tp > 0.0)
    if sum(nonzero) < 2:
        raise ValidationError(
            "chart coordinates need at least two nonzero canonical entries "
            "(otherwise the eigenvectors are parameter-independent)")
    p = synthesize(c)
    z = (p.xi, p.zeta, p.kappa)
    for chart, mu in (("O1", 0), ("O2", 1), ("O3", 2)):
        if z[mu] != 0:
            others = [nu for nu in range(3) if nu != mu]
            rho_a, rho_b = _CHART_RATIOS[chart](c)
            phi_a = _mod_2pi(cmath.phase(z[others[0]] / z[mu])) if z[others[0]] != 0 else 0.0
            phi_b = _mod_2pi(cmath.phase(z[others[1]] / z[mu])) if z[others[1]] != 0 else 0.0
            return ChartPoint(chart, rho_a, rho_b, phi_a, phi_b)
    raise ValidationError("no chart applies: all off-diagonal entries vanish")
