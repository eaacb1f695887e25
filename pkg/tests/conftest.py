import numpy as np
import pytest

from wzphase.degeneracy import Canonical, CaseLabel


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_hermitian(rng, scale=1.0):
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    return scale * 0.5 * (A + A.conj().T)


def random_canonical(rng, label=CaseLabel.CASE1, lo=0.3, hi=3.0, sign=1, e2=0.0):
    """Random canonical point in the bulk of the given case region."""
    vals = rng.uniform(lo, hi, 3)
    zero_at = {CaseLabel.CASE1: None, CaseLabel.CASE2: 0,
               CaseLabel.CASE3: 1, CaseLabel.CASE4: 2}[label]
    if zero_at is not None:
        vals[zero_at] = 0.0
    gamma = rng.uniform(0, 2 * np.pi) if label in (CaseLabel.CASE1, CaseLabel.CASE4) else 0.0
    theta = rng.uniform(0, 2 * np.pi) if label is not CaseLabel.CASE4 else 0.0
    return Canonical(vals[0], vals[1], vals[2], gamma, theta, sign, e2)


def random_direction(rng, label=CaseLabel.CASE1):
    """Unit tangent direction respecting the case's zero pattern."""
    d = rng.normal(size=5)
    zero_at = {CaseLabel.CASE1: None, CaseLabel.CASE2: 0,
               CaseLabel.CASE3: 1, CaseLabel.CASE4: 2}[label]
    if zero_at is not None:
        d[zero_at] = 0.0
    return d / np.linalg.norm(d)
