import numpy as np
import pytest

from qme.errors import NonPositiveData
from qme.metrics import fit_exponential, negativity_sum, purity, trace_distance, trace_norm


def rand_state(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def test_trace_distance_reference_values():
    rho = np.diag([0.7, 0.3])
    assert trace_distance(rho, rho) == 0.0
    assert trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])) == pytest.approx(1.0)
    assert trace_distance(np.diag([0.7, 0.3]), np.diag([0.5, 0.5])) == pytest.approx(0.2)


def test_trace_distance_triangle_inequality():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a, b, c = (rand_state(rng, 4) for _ in range(3))
        assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-12


def test_purity_range():
    rng = np.random.default_rng(5)
    for _ in range(10):
        rho = rand_state(rng, 5)
        assert 0.0 < purity(rho) <= 1.0 + 1e-12
    v = np.zeros(5)
    v[2] = 1.0
    assert purity(np.outer(v, v)) == pytest.approx(1.0)
    assert purity(np.eye(5) / 5) == pytest.approx(0.2)


def test_negativity_sum():
    rng = np.random.default_rng(7)
    assert negativity_sum(rand_state(rng, 4)) == 0.0
    assert negativity_sum(np.diag([1.1, -0.1])) == pytest.approx(-0.1)


def test_negativity_trace_norm_identity():
    # ||rho||_1 = 1 - 2 * negativity_sum for unit-trace Hermitian rho
    rng = np.random.default_rng(9)
    for _ in range(10):
        m = rng.standard_normal((4, 4))
        m = m + m.T
        m = m / np.trace(m)
        lhs = trace_norm(m)
        rhs = 1.0 - 2.0 * negativity_sum(m)
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_fit_exponential_synthetic():
    t = np.linspace(0, 30, 400)
    y = 1.7 * np.exp(-0.22 * t)
    fit = fit_exponential(t, y)
    assert fit.rate == pytest.approx(0.22, abs=1e-10)
    assert fit.amplitude == pytest.approx(1.7, rel=1e-8)
    assert fit.residual < 1e-12


def test_fit_exponential_constant_series():
    t = np.linspace(0, 10, 50)
    fit = fit_exponential(t, np.ones(50))
    assert abs(fit.rate) < 1e-12


def test_fit_exponential_rejects_nonpositive():
    with pytest.raises(NonPositiveData):
        fit_exponential(np.array([0.0, 1.0, 2.0]), np.array([1.0, 0.95, -0.5]))
    with pytest.raises(NonPositiveData):
        fit_exponential(np.array([0.0, 1.0]), np.array([-1.0, 0.5]))


def test_relaxation_rate_stationary_state():
    from qme.bath import BathModel
    from qme.generators import CouplingSet, DenseForm, game_generator
    from qme.hilbert import diagonalize
    from qme.metrics import relaxation_rate

    # a pure commutator with the bare Hamiltonian leaves any of its
    # stationary states at exactly zero interaction-picture rate
    h0 = np.diag([0.0, 0.5, 1.3])
    commutator = DenseForm(h0.astype(complex), None, None, None, None, None)
    ground = np.diag([1.0, 0.0, 0.0]).astype(complex)
    assert relaxation_rate(commutator, ground, np.diag(h0)) < 1e-14

    es = diagonalize(h0)
    rng = np.random.default_rng(11)
    A = rng.standard_normal((3, 3))
    coupling = CouplingSet.build([A + A.T], BathModel("ohmic_exp", 0.05, 1.0))
    form = game_generator(coupling, es).runtime()
    excited = np.diag([0.0, 0.0, 1.0]).astype(complex)
    assert relaxation_rate(form, excited, es.energies) > 1e-4
    # the rate decays as the state relaxes toward (renormalized) ground
    from qme.propagate import evolve

    traj = evolve(form, excited, 100.0, 0.5, record=(), store_every=50)
    late = relaxation_rate(form, traj.states[-1], es.energies)
    assert late < relaxation_rate(form, excited, es.energies)
