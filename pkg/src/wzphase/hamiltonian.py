"""Three-level Hamiltonians: matrix-element and Gell-Mann parameterizations,
spin-1 operators, and multipole interaction builders.

Units: energies are dimensionless (hbar = 1, overall coupling constant 1).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Params:
    """Matrix-element parameters of a 3x3 Hermitian Hamiltonian.

    The induced matrix is::

        [[r,    xi*,   zeta*],
         [xi,   s,     kappa*],
         [zeta, kappa, t    ]]

    with r, s, t real and xi, zeta, kappa complex, so it is Hermitian by
    construction.
    """

    r: float
    s: float
    t: float
    xi: complex = 0j
    zeta: complex = 0j
    kappa: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "xi", complex(self.xi))
        object.__setattr__(self, "zeta", complex(self.zeta))
        object.__setattr__(self, "kappa", complex(self.kappa))
        vals = (self.r, self.s, self.t, self.xi, self.zeta, self.kappa)
        if not all(np.isfinite(v) for v in vals):
            raise ValidationError(f"non-finite Hamiltonian parameters: {vals}")

    @property
    def scale(self) -> float:
        """Largest entry magnitude, floored at 1; used to scale tolerances."""
        return max(abs(self.r), abs(self.s), abs(self.t),
                   abs(self.xi), abs(self.zeta), abs(self.kappa), 1.0)


@dataclass(frozen=True)
class MultipoleTensor:
    """Real, fully symmetric rank-n coupling tensor over indices 1..3.

    Order 1 is a dipole vector, order 2 a quadrupole tensor; higher orders
    are contracted the same way.
    """

    order: int
    components: np.ndarray

    def __post_init__(self):
        if self.order < 1:
            raise ValidationError(f"tensor order must be >= 1, got {self.order}")
        comp = np.asarray(self.components, dtype=float)
        if comp.shape != (3,) * self.order:
            raise ValidationError(
                f"order-{self.order} tensor needs shape {(3,) * self.order}, got {comp.shape}")
        object.__setattr__(self, "components", comp)
        amax = np.max(np.abs(comp))
        tol = 1e-12 * max(amax, 1e-300)
        for perm in itertools.permutations(range(self.order)):
            if np.max(np.abs(np.transpose(comp, perm) - comp)) > tol:
                raise ValidationError("tensor is not symmetric under index permutations")


def params_from_gellmann(R) -> Params:
    """Convert nine real Gell-Mann expansion coefficients R^0..R^8 to Params."""
    R = np.asarray(R, dtype=float)
    if R.shape != (9,):
        raise ValidationError(f"expected 9 Gell-Mann coefficients, got shape {R.shape}")
    if not np.all(np.isfinite(R)):
        raise ValidationError("non-finite Gell-Mann coefficients")
    return Params(
        r=R[0] + R[3] + R[8] / SQRT3,
        s=R[0] - R[3] + R[8] / SQRT3,
        t=R[0] - 2.0 * R[8] / SQRT3,
        xi=complex(R[1], R[2]),
        zeta=complex(R[4], R[5]),
        kappa=complex(R[6], R[7]),
    )


def gellmann_from_params(p: Params) -> np.ndarray:
    """Exact inverse of :func:`params_from_gellmann`."""
    return np.array([
        (p.r + p.s + p.t) / 3.0,
        p.xi.real, p.xi.imag,
        (p.r - p.s) / 2.0,
        p.zeta.real, p.zeta.imag,
        p.kappa.real, p.kappa.imag,
        (p.r + p.s - 2.0 * p.t) / (2.0 * SQRT3),
    ])


def matrix_from_params(p: Params) -> np.ndarray:
    """Build the (exactly Hermitian) 3x3 matrix for the given parameters."""
    return np.array([
        [p.r, np.conj(p.xi), np.conj(p.zeta)],
        [p.xi, p.s, np.conj(p.kappa)],
        [p.zeta, p.kappa, p.t],
    ], dtype=complex)


def params_from_matrix(H, tol: float = 1e-12) -> Params:
    """Read parameters back from a 3x3 Hermitian matrix.

    Rejects matrices whose Hermiticity deviation exceeds ``tol`` times the
    largest entry magnitude (signals malformed ingestion); smaller deviations
    are averaged away.
    """
    H = np.asarray(H, dtype=complex)
    if H.shape != (3, 3):
        raise ValidationError(f"expected a 3x3 matrix, got shape {H.shape}")
    scale = np.max(np.abs(H))
    dev = np.max(np.abs(H - H.conj().T))
    if dev > tol * scale:
        raise ValidationError(
            f"matrix is not Hermitian: deviation {dev:.3e} exceeds {tol:.1e} * {scale:.3e}")
    Hh = 0.5 * (H + H.conj().T)
    return Params(r=Hh[0, 0].real, s=Hh[1, 1].real, t=Hh[2, 2].real,
                  xi=Hh[1, 0], zeta=Hh[2, 0], kappa=Hh[2, 1])


def shift_params(p: Params, e: float) -> Params:
    """Subtract e times the identity; eigenvectors are unchanged."""
    return Params(r=p.r - e, s=p.s - e, t=p.t - e,
                  xi=p.xi, zeta=p.zeta, kappa=p.kappa)


def spin1_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-1 angular momentum matrices (J1, J2, J3) in the Jz eigenbasis.

    They satisfy [J_i, J_j] = i eps_ijk J_k and J^2 = 2 * identity.
    """
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    J1 = inv_sqrt2 * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
    J2 = inv_sqrt2 * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
    J3 = np.array([[1, 0, 0], [0, 0, 0], [0, 0, -1]], dtype=complex)
    return J1, J2, J3


# J1, J2 carry a 1/sqrt(2) scale; keeping the integer cores separate lets
# even powers of that scale stay exact (powers of two), e.g. Q = identity
# contracts to exactly 2*I.
_J_CORES = (
    np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex),
    np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex),
    np.array([[1, 0, 0], [0, 0, 0], [0, 0, -1]], dtype=complex),
)
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def multipole_matrix(terms) -> np.ndarray:
    """Contract symmetric coupling tensors with spin-1 operator products.

    Each order-n term contributes sum_{i1..in} Q[i1..in] J_i1 ... J_in.
    """
    H = np.zeros((3, 3), dtype=complex)
    for term in terms:
        if not isinstance(term, MultipoleTensor):
            comp = np.asarray(term, dtype=float)
            term = MultipoleTensor(order=comp.ndim, components=comp)
        for idx in np.ndindex(term.components.shape):
            coeff = term.components[idx]
            if coeff == 0.0:
                continue
            prod = _J_CORES[idx[0]]
            for i in idx[1:]:
                prod = prod @ _J_CORES[i]
            nroot = sum(1 for i in idx if i < 2)
            scale = 2.0 ** -(nroot // 2)
            if nroot % 2:
                scale *= _INV_SQRT2
            H = H + (coeff * scale) * prod
    return H


def multipole_params(terms) -> Params:
    """Build Params for a sum of multipole interaction terms."""
    return params_from_matrix(multipole_matrix(terms))
