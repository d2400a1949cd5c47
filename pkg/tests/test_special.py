import mpmath
import numpy as np
import pytest

from qme.special import ei, ei_complex, eiexp

mpmath.mp.dps = 30


def test_ei_real_against_mpmath():
    xs = np.concatenate([
        np.linspace(-60.0, -0.01, 97),
        np.linspace(0.01, 60.0, 101),
        [-700.0, -120.0, 120.0, 300.0, -1e-6, 1e-6, -3.01, -2.99, 34.9, 35.1],
    ])
    for x in xs:
        ref = float(mpmath.ei(x))
        assert abs(ei(x) - ref) <= 1e-12 * max(abs(ref), 1e-300)


def test_eiexp_scaled_product():
    xs = [-500.0, -80.0, -10.0, -0.3, 0.4, 7.0, 80.0, 500.0]
    for x in xs:
        ref = float(mpmath.ei(x) * mpmath.exp(-x))
        assert abs(eiexp(x) - ref) <= 1e-12 * abs(ref)


def test_ei_complex_against_mpmath():
    zs = []
    for r in [0.05, 0.5, 2.0, 8.0, 11.0, 13.0, 20.0, 34.0, 36.0, 80.0, 400.0]:
        for th in np.linspace(-np.pi + 1e-3, np.pi - 1e-3, 17):
            zs.append(r * np.exp(1j * th))
    zs += [0.1 + 800j, 0.1 - 800j, -0.5 + 0.001j, -0.5 - 0.001j, 13 + 1e-4j, 13 - 1e-4j]
    for z in zs:
        ref = complex(mpmath.ei(complex(z)))
        assert abs(ei_complex(z) - ref) <= 1e-11 * max(abs(ref), 1.0)


def test_ei_complex_branch_limits():
    # principal branch: +/- i pi jump across the negative real axis
    up = ei_complex(-2.0 + 1e-12j)
    dn = ei_complex(-2.0 - 1e-12j)
    mid = ei(-2.0)
    assert abs(up - (mid + 1j * np.pi)) < 1e-10
    assert abs(dn - (mid - 1j * np.pi)) < 1e-10


def test_vectorized_matches_scalar():
    xs = np.array([-40.0, -5.0, -0.1, 0.2, 3.0, 50.0])
    vec = ei(xs)
    for i, x in enumerate(xs):
        assert vec[i] == pytest.approx(ei(float(x)), rel=1e-14)
