import numpy as np
import pytest

from qme import bath as bm
from qme.bath import BathModel
from qme.errors import StepTooLarge, UnsupportedBathKind
from qme.generators import game_generator, lamb_shift
from qme.jc3 import (
    Jc3Model,
    exact_evolve,
    interaction_picture,
    lambda_scan,
    renormalized_block,
    renormalized_levels,
)


def test_model_presets():
    a = Jc3Model.case_a()
    assert (a.e1, a.e2) == (0.095, 0.105)
    b = Jc3Model.case_b()
    assert (b.e1, b.e2) == (0.09975, 0.10025)
    assert a.bath.g == 0.001


def test_exact_evolve_guards():
    m = Jc3Model.case_a()
    with pytest.raises(StepTooLarge):
        exact_evolve(m, 10.0, 0.2)
    md = Jc3Model(0.095, 0.105, BathModel("ohmic_drude", 0.001, 1.0))
    with pytest.raises(UnsupportedBathKind):
        exact_evolve(md, 10.0, 0.02)


def test_exact_evolve_decoupled_limit():
    # vanishing coupling: c1 stays put (bath g must stay positive, so use a
    # tiny value standing in for g = 0)
    m = Jc3Model(0.095, 0.105, BathModel("ohmic_exp", 1e-14, 1.0))
    sol = exact_evolve(m, 50.0, 0.02)
    assert np.abs(np.abs(sol.c1) ** 2 - 1.0).max() < 1e-10
    assert np.abs(sol.c2).max() < 1e-6


def test_exact_evolve_norm_nonincreasing_and_beating():
    sol = exact_evolve(Jc3Model.case_a(), 1500.0, 0.02)
    p1, p2 = sol.populations
    norm = p1 + p2
    assert np.all(np.diff(norm) <= 1e-12)
    # damped beating at the detuning 0.01: p2 peaks near half a beat period
    peak = sol.times[np.argmax(p2)]
    assert 200.0 < peak < 400.0
    assert 0.01 < p2.max() < 0.2


def test_exact_evolve_step_halving():
    m = Jc3Model.case_a()
    a = exact_evolve(m, 40.0, 0.002)
    b = exact_evolve(m, 40.0, 0.001)
    assert abs(np.abs(a.c1[-1]) ** 2 - np.abs(b.c1[-1]) ** 2) < 1e-8


def test_exact_states_structure():
    sol = exact_evolve(Jc3Model.case_a(), 10.0, 0.02)
    rho = sol.states()
    assert np.abs(np.trace(rho, axis1=1, axis2=2) - 1.0).max() < 1e-12
    assert np.abs(rho - np.conj(np.swapaxes(rho, 1, 2))).max() < 1e-14
    assert np.abs(rho[:, 0, 1:]).max() == 0.0  # no ground-excited coherence


def test_renormalized_levels_closed_form_equals_eigenvalues():
    for model in (Jc3Model.case_a(), Jc3Model.case_b()):
        lev = renormalized_levels(model)  # raises if 1e-12 check fails
        assert lev.e1p <= lev.e2p
        evals = np.linalg.eigvalsh(renormalized_block(model))
        assert abs(lev.e1p - evals[0]) < 1e-14
        assert abs(lev.e2p - evals[1]) < 1e-14


def test_renormalized_block_matches_lamb_shift_machinery():
    # the generic Lamb-shift builder must reproduce the hand-assembled
    # renormalized Hamiltonian of the three-level model entrywise
    m = Jc3Model.case_a()
    es = m.eigensystem()
    hl = lamb_shift(m.coupling_set(), es, "redfield")
    h = np.diag(es.energies) + hl
    block = renormalized_block(m)
    assert np.abs(h[1:, 1:] - block).max() < 1e-10
    assert abs(h[0, 0]) < 1e-15
    assert np.abs(h[0, 1:]).max() < 1e-15


def test_degenerate_gap_is_twice_principal_density():
    e = 0.1
    m = Jc3Model(e, e, BathModel("ohmic_exp", 0.001, 1.0))
    lev = renormalized_levels(m)
    gap = lev.e2p - lev.e1p
    assert gap == pytest.approx(2.0 * abs(bm.principal_density(m.bath, e)), rel=1e-12)
    # dark/bright superpositions at the exact crossing
    v_b, v_d = lev.states
    assert np.abs(np.abs(v_b) - 1 / np.sqrt(2)).max() < 1e-10
    assert np.abs(np.abs(v_d) - 1 / np.sqrt(2)).max() < 1e-10


def test_weak_coupling_levels_approach_bare():
    m = Jc3Model(0.095, 0.105, BathModel("ohmic_exp", 1e-9, 1.0))
    lev = renormalized_levels(m)
    assert lev.e1p == pytest.approx(0.095, abs=1e-8)
    assert lev.e2p == pytest.approx(0.105, abs=1e-8)


def test_lambda_scan_dark_state_and_sum_rule():
    m = Jc3Model.case_b()
    rows = lambda_scan(m, [0.0, 0.5, 1.0], nsteps=2048)
    g1 = bm.spectral_density(m.bath, m.e1)
    g2 = bm.spectral_density(m.bath, m.e2)
    total = g1 + g2
    at1 = rows[2]
    assert at1["width_dark_fit"] < 0.05 * total  # dark at the crossing
    assert at1["width_bright_fit"] == pytest.approx(total, rel=0.05)
    for row in rows:
        s = row["width_bright_fit"] + row["width_dark_fit"]
        assert s == pytest.approx(total, rel=0.05)


def test_interaction_picture_rotation():
    rng = np.random.default_rng(3)
    rho = rng.standard_normal((1, 3, 3)) + 1j * rng.standard_normal((1, 3, 3))
    e = np.array([0.0, 0.5, 1.5])
    out = interaction_picture(rho, [2.0], e)
    ph = np.exp(1j * e * 2.0)
    assert np.abs(out[0] - ph[:, None] * rho[0] * np.conj(ph)[None, :]).max() < 1e-14
