"""Acceptance suite: one test per acceptance criterion, each printing a
PASS/FAIL line (run with -s to see them as they complete).

The heavy shared artifacts (three-level oracle runs, spin-chain sweeps,
the driven-chain run) are built once per session in fixtures.  Desk-scale
sizes are chosen so the whole module runs in well under an hour on two
cores; the truncation used by each gate is noted next to it.
"""

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from qme import bath as bmod
from qme import generators as gen
from qme.bath import BathModel
from qme.hilbert import diagonalize
from qme.jc3 import Jc3Model, exact_evolve, interaction_picture, lambda_scan, renormalized_levels
from qme.metrics import fit_exponential, relaxation_rate, trace_distance
from qme.propagate import evolve
from qme.spinchain import build_chain, coupling_operators, initial_perpendicular_state


def gate(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}", flush=True)
    assert ok, f"{name}: {detail}"


def batched_distance(states_a, states_b):
    ev = np.linalg.eigvalsh(np.asarray(states_a) - np.asarray(states_b))
    return 0.5 * np.abs(ev).sum(axis=1)


# ---------------------------------------------------------------------------
# JC3 exactness gate


@pytest.fixture(scope="module")
def jc3_runs():
    """Exact oracle plus GAME/Redfield/PERLind over t in [0, 8000]."""
    out = {}
    t_max, dt, thin = 8000.0, 0.02, 4
    start = time.perf_counter()
    for case, ctor in (("A", Jc3Model.case_a), ("B", Jc3Model.case_b)):
        model = ctor()
        es = model.eigensystem()
        coupling = model.coupling_set()
        sol = exact_evolve(model, t_max, dt, mem_time=1000.0)
        rho_ex = sol.states()[::thin]
        times = sol.times[::thin]
        rho0 = np.diag([0.0, 1.0, 0.0]).astype(complex)
        states = {}
        for name, form in (
            ("game", gen.game_generator(coupling, es).runtime()),
            ("redfield", gen.redfield_generator(coupling, es).runtime("bare")),
            ("perlind", gen.perlind_generator(coupling, es).runtime()),
        ):
            traj = evolve(form, rho0, t_max, dt * thin, record=(), store_every=1)
            states[name] = interaction_picture(np.array(traj.states), times, es.energies)
        out[case] = {
            "times": times,
            "exact": rho_ex,
            "states": states,
            "d_game_exact": batched_distance(states["game"], rho_ex),
            "d_red_game": batched_distance(states["redfield"], states["game"]),
            "d_perl_exact": batched_distance(states["perlind"], rho_ex),
        }
    out["runtime"] = time.perf_counter() - start
    return out


@pytest.mark.parametrize("case", ["A", "B"])
def test_jc3_exactness_redfield_game_ratio(jc3_runs, case):
    r = jc3_runs[case]
    ratio = r["d_red_game"].max() / r["d_game_exact"].max()
    gate(
        f"JC3 case {case}: Redfield<->GAME peak <= 0.2 x GAME<->exact peak",
        ratio <= 0.2,
        f"ratio = {ratio:.3f} (peaks {r['d_red_game'].max():.3e} / {r['d_game_exact'].max():.3e})",
    )


@pytest.mark.parametrize("case", ["A", "B"])
def test_jc3_exactness_perlind_ratio(jc3_runs, case):
    # NOTE: case A honestly fails the >= 50x gate at these parameters; the
    # measured ratio is ~26 with the oracle independently validated against
    # a discretized-bath simulation (see the decisions ledger).
    r = jc3_runs[case]
    ratio = r["d_perl_exact"].max() / r["d_game_exact"].max()
    gate(
        f"JC3 case {case}: PERLind peak error >= 50 x GAME's",
        ratio >= 50.0,
        f"ratio = {ratio:.1f}",
    )


def test_jc3_exactness_runtime(jc3_runs):
    gate("JC3 exactness gate runtime < 2 min", jc3_runs["runtime"] < 120.0,
         f"{jc3_runs['runtime']:.0f} s")


# ---------------------------------------------------------------------------
# Dark-state width gate


@pytest.fixture(scope="module")
def dark_state_scan():
    start = time.perf_counter()
    model = Jc3Model.case_b()
    lams = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]
    rows = lambda_scan(model, lams, nsteps=8192)
    return {"model": model, "rows": rows, "runtime": time.perf_counter() - start}


def test_dark_state_width_formula(dark_state_scan):
    model = dark_state_scan["model"]
    row0 = dark_state_scan["rows"][0]  # case-B detuning: strong anticrossing
    fitted = row0["width_dark_fit"]
    formula = row0["width_dark_formula"]
    rel = abs(fitted - formula) / formula
    gate("dark-state width: fit matches closed form within 3%", rel <= 0.03,
         f"fit {fitted:.4e} vs formula {formula:.4e} ({100 * rel:.2f}%)")


def test_width_sum_rule(dark_state_scan):
    model = dark_state_scan["model"]
    total = bmod.spectral_density(model.bath, model.e1) + bmod.spectral_density(model.bath, model.e2)
    worst = 0.0
    for row in dark_state_scan["rows"]:
        s = row["width_bright_fit"] + row["width_dark_fit"]
        worst = max(worst, abs(s - total) / total)
    gate("width sum rule within 5% across the scan", worst <= 0.05, f"worst {100 * worst:.2f}%")


def test_avoided_crossing_gap(dark_state_scan):
    model = dark_state_scan["model"]
    row = next(r for r in dark_state_scan["rows"] if r["lambda"] == 1.0)
    gap = row["e2p"] - row["e1p"]
    expect = 2.0 * abs(bmod.principal_density(model.bath, model.e1))
    rel = abs(gap - expect) / expect
    gate("avoided-crossing gap at lambda=1 equals 2|S(E1)| within 2%", rel <= 0.02,
         f"gap {gap:.5e} vs {expect:.5e} ({100 * rel:.2f}%)")


def test_dark_state_runtime(dark_state_scan):
    gate("dark-state gate runtime < 5 min", dark_state_scan["runtime"] < 300.0,
         f"{dark_state_scan['runtime']:.0f} s")


# ---------------------------------------------------------------------------
# Algebraic identities


def test_identity_redfield_two_forms():
    rng = np.random.default_rng(101)
    es = diagonalize(np.diag(np.sort(rng.uniform(0, 3, 6))))
    ops = [0.5 * (m + m.conj().T) for m in
           (rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)) for _ in range(2))]
    coupling = gen.CouplingSet.build(ops, BathModel("ohmic_exp", 0.05, 1.0))
    red = gen.redfield_generator(coupling, es)
    bare, renorm = red.runtime("bare"), red.runtime("renormalized")
    worst = 0.0
    for _ in range(20):
        m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        rho = m @ m.conj().T
        rho /= np.trace(rho)
        a, b = bare.apply(rho), renorm.apply(rho)
        worst = max(worst, np.abs(a - b).max() / max(np.abs(a).max(), 1e-300))
    gate("Redfield four-term ==  renormalized kernel form (1e-12)", worst < 1e-12,
         f"worst relative {worst:.2e}")


def test_identity_arithmetic_geometric_split():
    from qme.kernels import detuning_function, dissipative_kernel, geometric_mean

    rng = np.random.default_rng(103)
    bath = BathModel("ohmic_exp", 1.0, 1.0)
    ws = rng.uniform(-3, 3, 60)
    G = dissipative_kernel(bath, ws[:, None], ws[None, :])
    split = geometric_mean(bath, ws[:, None], ws[None, :]) + detuning_function(
        bath, ws[:, None], ws[None, :]
    )
    dev = np.abs(G - split).max()
    gate("G = sqrt(gamma gamma') + f split identity (1e-14 entrywise)", dev < 1e-14,
         f"max dev {dev:.2e}")


def test_identity_renormalized_levels():
    worst = 0.0
    for model in (Jc3Model.case_a(), Jc3Model.case_b(), Jc3Model(0.1, 0.1, BathModel("ohmic_exp", 0.001, 1.0))):
        lev = renormalized_levels(model)  # internal 1e-12 assertion
        from qme.jc3 import renormalized_block

        evals = np.linalg.eigvalsh(renormalized_block(model))
        worst = max(worst, abs(lev.e1p - evals[0]), abs(lev.e2p - evals[1]))
    gate("closed-form renormalized levels == block eigenvalues (1e-12)", worst < 1e-12,
         f"worst {worst:.2e}")


# ---------------------------------------------------------------------------
# Appendix transform suite


def test_td_transform_identity_suite():
    start = time.perf_counter()
    worst = {"r": 0.0, "w": 0.0}
    tol = 1e-8
    for kind in ("ohmic_exp", "ohmic_drude", "super_ohmic"):
        bath = BathModel(kind, 1.0, 1.0)
        ws = np.linspace(-2.0, 2.5, 10)
        ts = np.geomspace(0.3, 30.0, 10)
        for w in ws:
            r, wt = bmod.td_unitary_coeffs_grid(bath, float(w), ts, tol)
            if kind == "ohmic_exp":
                gam = np.array([bmod.gamma_t(bath, float(w), float(t)) for t in ts])
                s = np.array([bmod.s_t(bath, float(w), float(t)) for t in ts])
            else:
                gam, s = bmod.finite_time_densities_grid(bath, float(w), ts, tol)
            worst["r"] = max(worst["r"], np.abs(r - s).max())
            worst["w"] = max(worst["w"], np.abs(wt + gam / 4.0).max())
    elapsed = time.perf_counter() - start
    gate("R_t = S_t on the 10x10 grid, three baths (1e-6)", worst["r"] < 1e-6,
         f"worst {worst['r']:.2e}")
    gate("W_t = -gamma_t/4 on the 10x10 grid, three baths (1e-6)", worst["w"] < 1e-6,
         f"worst {worst['w']:.2e}")
    gate("transform suite runtime < 1 min", elapsed < 60.0, f"{elapsed:.0f} s")


def test_explicit_gamma_t_vs_quadrature():
    bath = BathModel("ohmic_exp", 0.5, 2.0)
    worst = 0.0
    for w in (-1.3, -0.4, 0.0, 0.7, 2.2):
        for t in (0.3, 3.0, 11.0):
            closed = bmod.half_fourier(bath, w, t)
            oracle = bmod.half_fourier_time_quad(bath, w, t)
            worst = max(worst, abs(closed - oracle))
    gate("explicit Gamma_t vs direct quadrature (1e-8)", worst < 1e-8, f"worst {worst:.2e}")


# ---------------------------------------------------------------------------
# Kernel structure gate


def test_dcg_kernel_grid_psd():
    from qme.kernels import dcg_grid

    bath = BathModel("ohmic_exp", 1.0, 1.0)
    ws = np.linspace(-2.5, 2.5, 50)
    grid = dcg_grid(bath, ws, 1.7)
    eig = np.linalg.eigvalsh(0.5 * (grid.values + grid.values.conj().T))
    gate("DCG kernel matrix PSD on a 50-frequency grid", eig.min() >= -1e-10 * eig.max(),
         f"min {eig.min():.2e}, max {eig.max():.2f}")


def test_dcg_decomposition_vs_brute_force():
    from qme.kernels import dcg_dissipative_quad, dcg_kernels

    bath = BathModel("ohmic_exp", 1.0, 1.0)
    rng = np.random.default_rng(107)
    worst = 0.0
    for _ in range(10):
        w, wp = rng.uniform(-2, 2, 2)
        tau = rng.uniform(0.3, 5.0)
        val = dcg_kernels(bath, w, wp, tau)[0]
        oracle = dcg_dissipative_quad(bath, w, wp, tau)
        worst = max(worst, abs(val - oracle) / max(abs(oracle), 1e-3))
    gate("DCG decomposition vs double-sinc quadrature at 10 tuples (1e-6)",
         worst < 1e-6, f"worst relative {worst:.2e}")


def test_norm_ratio_crossover():
    from qme.kernels import norm_ratio_scan

    bath = BathModel("ohmic_exp", 1.0, 1.0)
    t0s = [0.0, 0.1, 0.2, 0.3, 10.0, 20.0, 40.0, 80.0]
    rows = dict(norm_ratio_scan(bath, t0s, count=201))
    flat_dev = max(abs(rows[t] / rows[0.0] - 1.0) for t in (0.1, 0.2, 0.3))
    big = np.array([10.0, 20.0, 40.0, 80.0])
    vals = np.array([rows[t] for t in big])
    c = float(np.mean(vals * big))
    resid = float(np.sqrt(np.mean((vals - c / big) ** 2 / vals**2)))
    gate("norm ratio flat within 10% for T0 < 0.3/omega_c", flat_dev <= 0.10,
         f"max deviation {100 * flat_dev:.1f}%")
    gate("norm ratio inverse-law fit residual < 10% for T0 > 10/omega_c", resid <= 0.10,
         f"residual {100 * resid:.1f}%")


# ---------------------------------------------------------------------------
# CP / trace contract


@pytest.fixture(scope="module")
def cp_chain():
    chain = build_chain(6, n_keep=32)
    es = chain.eigensystem()
    bath = BathModel("ohmic_exp", 1.0, 6.0 * chain.gap)
    rho0, _ = initial_perpendicular_state(chain)
    return chain, es, bath, rho0


def _cp_check(traj):
    tr = np.abs(traj.observable("trace") - 1.0).max()
    me = traj.observable("min_eig").min()
    return tr, me


@pytest.mark.parametrize("eqname", ["game", "prwa", "perlind"])
def test_cp_contract_chain_forms(cp_chain, eqname):
    chain, es, bath, rho0 = cp_chain
    coupling = coupling_operators(chain, bath, g_tot=1.0)
    if eqname == "game":
        form = gen.game_generator(coupling, es).runtime()
    elif eqname == "prwa":
        form = gen.prwa_generator(coupling, es, 12)
    else:
        form = gen.perlind_generator(coupling, es).runtime()
    dt = chain.t_fm / 64
    traj = evolve(form, rho0, 2000 * dt, dt, record=("trace", "min_eig"))
    tr, me = _cp_check(traj)
    gate(f"CP/trace contract ({eqname}, 2000 steps)", tr <= 1e-8 and me >= -1e-8,
         f"|tr-1| {tr:.1e}, min eig {me:.1e}")


def test_cp_contract_tdc_game():
    model = Jc3Model.case_b()
    es = model.eigensystem()
    form = gen.tdc_game_generator(model.coupling_set(), es)
    rho0 = np.diag([0.0, 1.0, 0.0]).astype(complex)
    traj = evolve(form, rho0, 2000 * 0.05, 0.05, record=("trace", "min_eig"))
    tr, me = _cp_check(traj)
    gate("CP/trace contract (TDC-GAME, 2000 steps)", tr <= 1e-8 and me >= -1e-8,
         f"|tr-1| {tr:.1e}, min eig {me:.1e}")


def test_redfield_negativity_diagnostic(cp_chain):
    chain, es, bath, rho0 = cp_chain
    coupling = coupling_operators(chain, bath, g_tot=2.0)
    form = gen.redfield_generator(coupling, es).runtime("bare")
    dt = chain.t_fm / 64
    traj = evolve(form, rho0, 600 * dt, dt, record=("trace", "negativity"))
    neg = traj.observable("negativity")
    gate("Redfield at strong coupling develops strict negativity",
         neg.min() < -1e-6, f"most negative sum {neg.min():.2e}")


# ---------------------------------------------------------------------------
# Spin-chain scaling gate (n=8, N=128 as stated)


@pytest.fixture(scope="module")
def chain_scaling():
    start = time.perf_counter()
    chain = build_chain(8, n_keep=128)
    es = chain.eigensystem()
    bath = BathModel("ohmic_exp", 1.0, 6.0 * chain.gap)
    rho0, _ = initial_perpendicular_state(chain)
    dt = chain.t_fm / 64
    t_max = 8.0 * chain.t_fm
    gs = [0.0025, 0.005, 0.01, 0.025]

    def one(gtot):
        coupling = coupling_operators(chain, bath, g_tot=gtot)
        red_form = gen.redfield_generator(coupling, es).runtime("bare")
        game_form = gen.game_generator(coupling, es).runtime()
        red = evolve(red_form, rho0, t_max, dt, record=(), store_every=4)
        game = evolve(game_form, rho0, t_max, dt, record=(), store_every=4)
        d = batched_distance(red.states, game.states)
        rates = [relaxation_rate(red_form, s, es.energies) for s in red.states[1::4]]
        return {"g": gtot, "t": np.asarray(red.state_times), "d": d,
                "rate": float(np.mean(rates))}

    with ThreadPoolExecutor(max_workers=2) as pool:
        rows = list(pool.map(one, gs))
    return {"rows": rows, "chain": chain, "runtime": time.perf_counter() - start}


def test_chain_scaling_linear_fit(chain_scaling):
    rows = chain_scaling["rows"]
    x = np.array([r["rate"] for r in rows])
    y = np.array([r["d"].max() for r in rows])
    slope = float((x * y).sum() / (x * x).sum())
    resid = float(np.sqrt(np.mean((y - slope * x) ** 2)) / np.sqrt(np.mean(y**2)))
    gate("peak Redfield<->GAME distance vs 1/tau_r: linear through origin (<15%)",
         resid <= 0.15,
         f"residual {100 * resid:.1f}%, slope {slope:.3f}, rates {np.round(x, 4).tolist()}")


def test_chain_saturation_time_g_independent(chain_scaling):
    rows = chain_scaling["rows"][:3]  # 4x range of g
    t_fm = chain_scaling["chain"].t_fm
    ts = []
    for r in rows:
        plateau = r["d"][-len(r["d"]) // 4:].mean()
        idx = np.argmax(r["d"] >= (1 - np.exp(-1.0)) * plateau)
        ts.append(r["t"][idx] / t_fm)
    spread = (max(ts) - min(ts)) / np.mean(ts)
    gate("saturation time g-independent within 20% across a 4x range",
         spread <= 0.20, f"T_s/T_fm = {np.round(ts, 3).tolist()}")


def test_chain_scaling_rate_proportional_to_g(chain_scaling):
    rows = chain_scaling["rows"]
    ratios = [r["rate"] / r["g"] for r in rows]
    spread = (max(ratios) - min(ratios)) / np.mean(ratios)
    gate("1/tau_r proportional to g_tot across a decade (5%)", spread <= 0.05,
         f"rate/g spread {100 * spread:.1f}%")


# ---------------------------------------------------------------------------
# Comparative ordering gate (n=8; truncation N=48 keeps the superoperator
# equations affordable on two cores)


@pytest.fixture(scope="module")
def comparative():
    start = time.perf_counter()
    chain = build_chain(8, n_keep=48)
    es = chain.eigensystem()
    bath = BathModel("ohmic_exp", 1.0, 6.0 * chain.gap)
    rho0, _ = initial_perpendicular_state(chain)
    dt = chain.t_fm / 64
    t_max = 20.0 * chain.t_fm
    tau1, tau2 = 0.3 * chain.t_fm, 1.3 * chain.t_fm
    out = {}
    for gtot in (1.0, 0.01):
        coupling = coupling_operators(chain, bath, g_tot=gtot)
        builders = {
            "game": lambda: gen.game_generator(coupling, es).runtime(),
            "rwa": lambda: gen.rwa_generator(coupling, es),
            "prwa(8)": lambda: gen.prwa_generator(coupling, es, 8),
            "prwa(16)": lambda: gen.prwa_generator(coupling, es, 16),
            "prwa(32)": lambda: gen.prwa_generator(coupling, es, 32),
            f"dcg({tau1:.2f})": lambda: gen.dcg_generator(coupling, es, tau1),
            f"dcg({tau2:.2f})": lambda: gen.dcg_generator(coupling, es, tau2),
            "perlind": lambda: gen.perlind_generator(coupling, es).runtime(),
            "perlind+rwa-ls": lambda: gen.perlind_generator(coupling, es, rwa_lamb=True).runtime(),
            "ule": lambda: gen.ule_generator(coupling, es).runtime(),
        }
        ref = evolve(gen.redfield_generator(coupling, es).runtime("bare"),
                     rho0, t_max, dt, record=(), store_every=4)

        def peak(build):
            traj = evolve(build(), rho0, t_max, dt, record=(), store_every=4)
            return float(batched_distance(traj.states, ref.states).max())

        with ThreadPoolExecutor(max_workers=2) as pool:
            peaks = dict(zip(builders, pool.map(peak, builders.values())))
        out[gtot] = peaks
    out["runtime"] = time.perf_counter() - start
    return out


@pytest.mark.parametrize("gtot", [1.0, 0.01])
def test_comparative_ordering(comparative, gtot):
    peaks = comparative[gtot]
    game = peaks["game"]
    competitors = {k: v for k, v in peaks.items() if k not in ("game", "ule")}
    strictly_smallest = all(game < v for v in competitors.values())
    beats_ule = game <= peaks["ule"]
    detail = ", ".join(f"{k}={v:.3e}" for k, v in sorted(peaks.items(), key=lambda kv: kv[1]))
    gate(
        f"comparative ordering at g_tot={gtot}: GAME strictly smallest, <= ULE",
        strictly_smallest and beats_ule,
        detail,
    )


def test_comparative_runtime(comparative):
    gate("comparative gate runtime < 30 min", comparative["runtime"] < 1800.0,
         f"{comparative['runtime']:.0f} s")


# ---------------------------------------------------------------------------
# Floquet gate


@pytest.fixture(scope="module")
def driven_chain():
    from qme.floquet import FloquetGameForm, driven_chain_hamiltonian, monodromy
    from qme.spinchain import total_spin_operators

    start = time.perf_counter()
    chain = build_chain(6, n_keep=24)
    period = 10.0 * chain.t_fm
    sx = total_spin_operators(chain)["x"]
    h_of_t = driven_chain_hamiltonian(np.diag(chain.energies), sx, 2.0 * chain.gap, period)
    M = 4096
    basis = monodromy(h_of_t, period, n_steps=1 << 18, m_frames=M)
    defect = float(np.abs(np.linalg.svd(
        basis.monodromy @ basis.monodromy.conj().T - np.eye(24), compute_uv=False
    )).sum())
    bath = BathModel("super_ohmic", 1.0, 6.0 * chain.gap)
    coupling = coupling_operators(chain, bath, g_tot=2.0)
    form = FloquetGameForm(basis, list(coupling.ops), coupling.baths[0])
    rho0 = np.zeros((24, 24), dtype=complex)
    rho0[0, 0] = 1.0
    F0 = basis.frames[0]
    rho_f = F0.conj().T @ rho0 @ F0
    dt = 2.0 * period / M
    traj = evolve(form, rho_f, 2048 * dt, dt, record=("trace", "min_eig"))
    return {"defect": defect, "traj": traj, "runtime": time.perf_counter() - start}


def test_floquet_monodromy_unitarity(driven_chain):
    gate("monodromy unitarity defect < 1e-11", driven_chain["defect"] < 1e-11,
         f"defect {driven_chain['defect']:.2e}")


def test_floquet_driven_cp_contract(driven_chain):
    tr, me = _cp_check(driven_chain["traj"])
    gate("driven n=6 run keeps the CP/trace contract (>= 2000 steps)",
         tr <= 1e-8 and me >= -1e-8, f"|tr-1| {tr:.1e}, min eig {me:.1e}")


def test_floquet_static_reduction():
    from qme.floquet import FloquetGameForm, from_floquet, monodromy

    model = Jc3Model.case_a()
    h0 = model.hamiltonian().astype(complex)
    T, M = 20.0, 128
    basis = monodromy(lambda t: h0, T, n_steps=1 << 14, m_frames=M)
    form = FloquetGameForm(basis, [model.coupling_matrix()], model.bath)
    static = gen.game_generator(model.coupling_set(), model.eigensystem()).runtime()
    rho0 = np.diag([0.0, 1.0, 0.0]).astype(complex)
    F0 = basis.frames[0]
    rho_f = F0.conj().T @ rho0 @ F0
    dt = 2.0 * T / M
    nsteps = 3 * M
    tf = evolve(form, rho_f, nsteps * dt, dt, record=(), store_every=1)
    ts = evolve(static, rho0, nsteps * dt, dt, record=(), store_every=1)
    worst = 0.0
    for k in range(nsteps + 1):
        lab = from_floquet(basis, tf.states[k], form.frame_of(k * dt))
        worst = max(worst, np.abs(lab - ts.states[k]).max())
    gate("zero-drive Floquet pipeline == static GAME (1e-8/step)", worst < 1e-8,
         f"worst per-step deviation {worst:.2e}")
