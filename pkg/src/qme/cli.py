"""Experiment runner: spectra/kernels dumps, three-level and spin-chain
comparisons, driven-chain runs, all writing CSV plus a run manifest."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from . import bath as bmod
from .bath import BathModel
from .config import ExperimentConfig, parse_config
from .errors import ConfigError, QmeError
from .metrics import trace_distance

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

BATH_KINDS_CHOICES = ("ohmic_exp", "ohmic_drude", "super_ohmic")


# ---------------------------------------------------------------------------
# output helpers


def _outdir(path):
    path = os.environ.get("QME_OUTDIR", path)
    os.makedirs(path, exist_ok=True)
    return path


def write_csv(path, header, columns):
    """Columns of floats; shortest round-trip decimal representation."""
    cols = [np.asarray(c) for c in columns]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def write_matrix_csv(path, mat):
    with open(path, "w") as fh:
        for row in np.asarray(mat):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


class Manifest:
    """Config echo, versions, per-phase timing, output checksums."""

    def __init__(self, outdir, config_echo):
        self.outdir = outdir
        self.data = {
            "config": config_echo,
            "versions": {
                "qme": __version__,
                "numpy": np.__version__,
                "python": sys.version.split()[0],
            },
            "timings_s": {},
            "files": {},
            "errors": {},
        }
        self._t0 = {}

    def phase(self, name):
        manifest = self

        class _Timer:
            def __enter__(self):
                self.t = time.perf_counter()

            def __exit__(self, *exc):
                manifest.data["timings_s"][name] = round(time.perf_counter() - self.t, 6)

        return _Timer()

    def add_file(self, path):
        with open(path, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        self.data["files"][os.path.basename(path)] = digest

    def error(self, key, message):
        self.data["errors"][key] = message

    def write(self):
        path = os.path.join(self.outdir, "manifest.json")
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)
        os.replace(tmp, path)
        return path


# ---------------------------------------------------------------------------
# model/equation construction


def _chain_setup(cfg: ExperimentConfig):
    from .spinchain import build_chain, coupling_operators, initial_perpendicular_state, total_spin_operators

    m = cfg.model
    chain = build_chain(m["n"], m["j"], m["eps_d"], m.get("h_z"), m["n_keep"])
    omega_c = cfg.bath.get("omega_c") or cfg.bath["omega_c_mult"] * chain.gap
    bath = BathModel(cfg.bath["kind"], 1.0, omega_c)
    coupling = coupling_operators(chain, bath, g_tot=cfg.bath["g_tot"])
    es = chain.eigensystem()
    rho0, _ = initial_perpendicular_state(chain)
    ops = {"sx": total_spin_operators(chain)["x"], "energy": np.diag(chain.energies).astype(complex)}
    dt = chain.t_fm / cfg.propagator["dt_divisor"]
    t_max = cfg.propagator["t_max_tfm"] * chain.t_fm
    return chain, es, coupling, rho0, ops, dt, t_max


def _jc3_setup(cfg: ExperimentConfig):
    from .jc3 import Jc3Model

    m = cfg.model
    bath = BathModel(cfg.bath["kind"], cfg.bath["g"], cfg.bath["omega_c"])
    model = Jc3Model(m["e1"], m["e2"], bath)
    es = model.eigensystem()
    coupling = model.coupling_set()
    rho0 = np.diag([0.0, 1.0, 0.0]).astype(complex)
    ops = {
        "p1": np.diag([0.0, 1.0, 0.0]).astype(complex),
        "p2": np.diag([0.0, 0.0, 1.0]).astype(complex),
    }
    wc = bath.omega_c
    detuning = abs(model.e2 - model.e1)
    dt = min(0.01 / wc, (2 * np.pi / detuning) / 64 if detuning else np.inf)
    t_max = cfg.propagator["t_max_tfm"] * 2 * np.pi / max(detuning, 1e-6)
    return model, es, coupling, rho0, ops, dt, t_max


def build_equation(spec, coupling, es):
    from . import generators as gen

    if spec.name == "redfield":
        return gen.redfield_generator(coupling, es).runtime("bare")
    if spec.name == "tdc-redfield":
        return gen.tdc_redfield_generator(coupling, es)
    if spec.name == "game":
        return gen.game_generator(coupling, es).runtime()
    if spec.name == "tdc-game":
        return gen.tdc_game_generator(coupling, es)
    if spec.name == "rwa":
        return gen.rwa_generator(coupling, es)
    if spec.name == "prwa":
        return gen.prwa_generator(coupling, es, int(spec.param))
    if spec.name == "cg-redfield":
        return gen.cg_redfield_generator(coupling, es, spec.param)
    if spec.name == "dcg":
        return gen.dcg_generator(coupling, es, spec.param)
    if spec.name == "perlind":
        return gen.perlind_generator(coupling, es).runtime()
    if spec.name == "perlind+rwa-ls":
        return gen.perlind_generator(coupling, es, rwa_lamb=True).runtime()
    if spec.name == "ule":
        return gen.ule_generator(coupling, es).runtime()
    raise ConfigError(f"no builder for equation {spec.name!r}")


# ---------------------------------------------------------------------------
# experiment runners


def run_compare(cfg: ExperimentConfig, outdir):
    from .propagate import evolve

    manifest = Manifest(outdir, cfg.raw)
    if cfg.model["kind"] == "chain":
        _, es, coupling, rho0, ops, dt, t_max = _chain_setup(cfg)
    else:
        _, es, coupling, rho0, ops, dt, t_max = _jc3_setup(cfg)
    record = tuple(k for k in cfg.outputs["observables"] if k in ("trace", "purity", "min_eig", "negativity"))
    extra = {k: v for k, v in ops.items() if k in cfg.outputs["observables"]}
    store_every = cfg.propagator["store_every"]
    results = {}
    for spec in cfg.equations:
        label = spec.label
        try:
            with manifest.phase(f"build:{label}"):
                form = build_equation(spec, coupling, es)
            with manifest.phase(f"evolve:{label}"):
                traj = evolve(
                    form, rho0, t_max, dt, eps=cfg.propagator["eps"],
                    record=record, ops=extra, store_every=store_every,
                )
            results[label] = traj
            cols = [traj.times] + [np.asarray(traj.observables[k]).real for k in record] + [
                np.asarray(traj.observables[k]).real for k in extra
            ]
            path = os.path.join(outdir, f"observables_{_slug(label)}.csv")
            write_csv(path, ["t"] + list(record) + list(extra), cols)
            manifest.add_file(path)
        except QmeError as exc:  # isolate per-equation failures
            manifest.error(label, str(exc))
    ref_name = cfg.outputs["reference"]
    ref = next((t for k, t in results.items() if k.split("(")[0] == ref_name), None)
    if ref is not None and len(results) > 1:
        header = ["t"]
        cols = [ref.state_times]
        for label, traj in results.items():
            if traj is ref:
                continue
            n = min(len(ref.states), len(traj.states))
            d = [trace_distance(traj.states[i], ref.states[i]) for i in range(n)]
            header.append(f"d_{_slug(label)}")
            cols.append(np.asarray(d))
        path = os.path.join(outdir, "trace_distance.csv")
        write_csv(path, header, [c[: min(map(len, cols))] for c in cols])
        manifest.add_file(path)
    path = manifest.write()
    if manifest.data["errors"] and not results:
        raise QmeError(f"all equations failed; see {path}")
    return manifest


def _slug(label):
    return label.replace("(", "_").replace(")", "").replace("+", "_").replace(".", "p")


def run_spectra(args, outdir):
    manifest = Manifest(outdir, vars(args))
    bath = BathModel(args.bath, args.g, args.omega_c)
    ws = np.linspace(-3 * args.omega_c, 8 * args.omega_c, args.count)
    path = os.path.join(outdir, "spectral_functions.csv")
    write_csv(
        path,
        ["omega", "gamma", "S"],
        [ws, bmod.spectral_density(bath, ws), bmod.principal_density(bath, ws)],
    )
    manifest.add_file(path)
    if bath.kind != bmod.OHMIC_DRUDE:
        ts = np.linspace(0.0, 20.0 / args.omega_c, args.count)
        c = bmod.correlation_function(bath, ts)
        path = os.path.join(outdir, "correlation_function.csv")
        write_csv(path, ["t", "re_c", "im_c"], [ts, c.real, c.imag])
        manifest.add_file(path)
    manifest.write()
    return manifest


def run_kernels(args, outdir):
    from .kernels import detuning_function, geometric_mean, norm_ratio_scan, sinc

    manifest = Manifest(outdir, vars(args))
    bath = BathModel(args.bath, args.g, args.omega_c)
    t0s = np.geomspace(args.t0_min, args.t0_max, args.t0_count) / bath.omega_c
    t0s = np.concatenate([[0.0], t0s])
    with manifest.phase("norm_ratio_scan"):
        rows = norm_ratio_scan(bath, t0s, count=args.grid)
    path = os.path.join(outdir, "norm_ratio.csv")
    write_csv(path, ["T0", "ratio"], [np.array([r[0] for r in rows]), np.array([r[1] for r in rows])])
    manifest.add_file(path)
    ws = np.linspace(-3 * bath.omega_c, 3 * bath.omega_c, args.grid)
    win = sinc(0.5 * (ws[:, None] - ws[None, :]) * args.t0_grid / bath.omega_c)
    gm = geometric_mean(bath, ws[:, None], ws[None, :]) * win
    fm = np.abs(detuning_function(bath, ws[:, None], ws[None, :]) * win)
    for name, mat in (("kernel_geometric_mean.csv", gm), ("kernel_detuning_abs.csv", fm)):
        path = os.path.join(outdir, name)
        write_matrix_csv(path, np.real(mat))
        manifest.add_file(path)
    manifest.write()
    return manifest


def run_jc3(args, outdir):
    from .jc3 import Jc3Model, exact_evolve, interaction_picture, lambda_scan
    from .generators import game_generator, redfield_generator
    from .propagate import evolve

    manifest = Manifest(outdir, vars(args))
    model = Jc3Model.case_a(args.g, args.omega_c) if args.case == "a" else Jc3Model.case_b(args.g, args.omega_c)
    es = model.eigensystem()
    coupling = model.coupling_set()
    dt = args.dt
    with manifest.phase("exact"):
        sol = exact_evolve(model, args.t_max, dt, mem_time=args.mem_time)
    rho_ex = sol.states()
    p1, p2 = sol.populations
    rho0 = np.diag([0.0, 1.0, 0.0]).astype(complex)
    trajs = {}
    for name, form in (
        ("game", game_generator(coupling, es).runtime()),
        ("redfield", redfield_generator(coupling, es).runtime("bare")),
    ):
        with manifest.phase(f"evolve:{name}"):
            trajs[name] = evolve(
                form, rho0, args.t_max, dt, record=(),
                ops={"p1": np.diag([0, 1.0, 0]).astype(complex), "p2": np.diag([0, 0, 1.0]).astype(complex)},
                store_every=1,
            )
    k = max(args.thin, 1)
    path = os.path.join(outdir, "populations.csv")
    write_csv(
        path,
        ["t", "p1_exact", "p2_exact", "p1_game", "p2_game", "p1_redfield", "p2_redfield"],
        [sol.times[::k], p1[::k], p2[::k],
         trajs["game"].observable("p1").real[::k], trajs["game"].observable("p2").real[::k],
         trajs["redfield"].observable("p1").real[::k], trajs["redfield"].observable("p2").real[::k]],
    )
    manifest.add_file(path)
    with manifest.phase("distances"):
        header = ["t"]
        cols = [sol.times]
        ints = {k: interaction_picture(np.array(t.states), sol.times, es.energies) for k, t in trajs.items()}
        for name, states in ints.items():
            ev = np.linalg.eigvalsh(states - rho_ex)
            header.append(f"d_{name}_exact")
            cols.append(0.5 * np.abs(ev).sum(axis=1))
        ev = np.linalg.eigvalsh(ints["game"] - ints["redfield"])
        header.append("d_game_redfield")
        cols.append(0.5 * np.abs(ev).sum(axis=1))
    path = os.path.join(outdir, "trace_distance.csv")
    write_csv(path, [h for h in header], [c[::k] for c in cols])
    manifest.add_file(path)
    if args.lambda_scan:
        with manifest.phase("lambda_scan"):
            lams = np.linspace(0.0, 2.0, args.lambda_points)
            rows = lambda_scan(model, lams)
        path = os.path.join(outdir, "lambda_scan.csv")
        keys = list(rows[0].keys())
        write_csv(path, keys, [np.array([r[k] for r in rows]) for k in keys])
        manifest.add_file(path)
    manifest.write()
    return manifest


def run_floquet(args, outdir):
    from .floquet import (
        FloquetGameForm,
        driven_chain_hamiltonian,
        from_floquet,
        monodromy,
        smoothed_square_wave,
    )
    from .propagate import evolve
    from .spinchain import build_chain, coupling_operators, total_spin_operators

    manifest = Manifest(outdir, vars(args))
    chain = build_chain(args.n, args.j, args.eps_d, n_keep=args.n_keep)
    period = args.period_tfm * chain.t_fm
    sx = total_spin_operators(chain)["x"]
    shape = smoothed_square_wave(args.ramp)
    h_of_t = driven_chain_hamiltonian(
        np.diag(chain.energies), sx, args.amplitude_delta * chain.gap, period, shape
    )
    with manifest.phase("monodromy"):
        basis = monodromy(h_of_t, period, n_steps=args.monodromy_steps, m_frames=args.m_frames)
    omega_c = args.omega_c_mult * chain.gap
    bath = BathModel(args.bath, 1.0, omega_c)
    coupling = coupling_operators(chain, bath, g_tot=args.g_tot)
    with manifest.phase("generator"):
        form = FloquetGameForm(basis, list(coupling.ops), coupling.baths[0])
    rho0 = np.zeros((chain.energies.size,) * 2, dtype=complex)
    rho0[0, 0] = 1.0
    F0 = basis.frames[0]
    rho_f = F0.conj().T @ rho0 @ F0
    dt = 2.0 * period / args.m_frames
    nsteps = int(args.periods * args.m_frames / 2)
    store = max(args.m_frames // 8, 1)
    with manifest.phase("evolve"):
        traj = evolve(
            form, rho_f, nsteps * dt, dt, record=("trace", "purity", "min_eig"),
            store_every=store,
        )
    sx_series = []
    for k, t in enumerate(traj.state_times):
        lab = from_floquet(basis, traj.states[k], form.frame_of(t))
        sx_series.append(float(np.einsum("ij,ji->", sx, lab).real))
    path = os.path.join(outdir, "drive_observables.csv")
    write_csv(
        path,
        ["t_over_tfm", "drive", "trace", "purity", "min_eig"],
        [traj.times / chain.t_fm, args.amplitude_delta * shape(traj.times / period),
         traj.observable("trace"), traj.observable("purity"), traj.observable("min_eig")],
    )
    manifest.add_file(path)
    path = os.path.join(outdir, "magnetization.csv")
    write_csv(path, ["t_over_tfm", "sx"], [np.asarray(traj.state_times) / chain.t_fm, np.asarray(sx_series)])
    manifest.add_file(path)
    # |rho| heatmap in the S_x eigenbasis at the half period
    half_idx = min(range(len(traj.state_times)), key=lambda i: abs(traj.state_times[i] - 0.5 * period))
    lab = from_floquet(basis, traj.states[half_idx], form.frame_of(traj.state_times[half_idx]))
    _, vx = np.linalg.eigh(sx)
    heat = np.abs(vx.conj().T @ lab @ vx)
    path = os.path.join(outdir, "rho_half_period_sx_basis.csv")
    write_matrix_csv(path, heat)
    manifest.add_file(path)
    manifest.write()
    return manifest


# ---------------------------------------------------------------------------
# argument parsing


def make_parser():
    p = argparse.ArgumentParser(prog="qme", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectra", help="dump bath spectral functions as CSV")
    sp.add_argument("--bath", default="ohmic_exp", choices=BATH_KINDS_CHOICES)
    sp.add_argument("--g", type=float, default=1.0)
    sp.add_argument("--omega-c", type=float, default=1.0)
    sp.add_argument("--count", type=int, default=401)
    sp.add_argument("--out", default="out/spectra")

    kp = sub.add_parser("kernels", help="kernel grids and the norm-ratio scan")
    kp.add_argument("--bath", default="ohmic_exp", choices=BATH_KINDS_CHOICES)
    kp.add_argument("--g", type=float, default=1.0)
    kp.add_argument("--omega-c", type=float, default=1.0)
    kp.add_argument("--grid", type=int, default=201)
    kp.add_argument("--t0-min", type=float, default=0.01)
    kp.add_argument("--t0-max", type=float, default=100.0)
    kp.add_argument("--t0-count", type=int, default=25)
    kp.add_argument("--t0-grid", type=float, default=6.8)
    kp.add_argument("--out", default="out/kernels")

    jp = sub.add_parser("jc3", help="three-level emitter: exact vs master equations")
    jp.add_argument("--case", choices=("a", "b"), default="a")
    jp.add_argument("--g", type=float, default=0.001)
    jp.add_argument("--omega-c", type=float, default=1.0)
    jp.add_argument("--t-max", type=float, default=4000.0)
    jp.add_argument("--dt", type=float, default=0.02)
    jp.add_argument("--mem-time", type=float, default=1000.0)
    jp.add_argument("--lambda-scan", action="store_true")
    jp.add_argument("--lambda-points", type=int, default=9)
    jp.add_argument("--thin", type=int, default=1, help="write every k-th row")
    jp.add_argument("--out", default="out/jc3")

    cp = sub.add_parser("chain", help="spin-chain master-equation comparison")
    cp.add_argument("--n", type=int, default=8)
    cp.add_argument("--j", type=float, default=400.0)
    cp.add_argument("--eps-d", type=float, default=6.0)
    cp.add_argument("--n-keep", type=int, default=128)
    cp.add_argument("--g-tot", type=float, default=0.01)
    cp.add_argument("--bath", default="ohmic_exp", choices=BATH_KINDS_CHOICES)
    cp.add_argument("--omega-c-mult", type=float, default=6.0)
    cp.add_argument("--equations", default="redfield,game")
    cp.add_argument("--t-max-tfm", type=float, default=30.0)
    cp.add_argument("--dt-divisor", type=int, default=64)
    cp.add_argument("--store-every", type=int, default=8)
    cp.add_argument("--out", default="out/chain")

    fp = sub.add_parser("floquet", help="periodically driven chain (Floquet GKSL)")
    fp.add_argument("--n", type=int, default=6)
    fp.add_argument("--j", type=float, default=400.0)
    fp.add_argument("--eps-d", type=float, default=6.0)
    fp.add_argument("--n-keep", type=int, default=24)
    fp.add_argument("--period-tfm", type=float, default=10.0)
    fp.add_argument("--amplitude-delta", type=float, default=2.0)
    fp.add_argument("--ramp", type=float, default=0.05)
    fp.add_argument("--bath", default="super_ohmic", choices=BATH_KINDS_CHOICES)
    fp.add_argument("--g-tot", type=float, default=2.0)
    fp.add_argument("--omega-c-mult", type=float, default=6.0)
    fp.add_argument("--m-frames", type=int, default=4096)
    fp.add_argument("--monodromy-steps", type=int, default=1 << 18)
    fp.add_argument("--periods", type=float, default=2.0)
    fp.add_argument("--out", default="out/floquet")

    gp = sub.add_parser("compare", help="config-driven comparison run")
    gp.add_argument("--config", required=True)
    gp.add_argument("--out", default=None)
    return p


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "compare":
            with open(args.config) as fh:
                cfg = parse_config(fh.read())
            outdir = _outdir(args.out or cfg.outputs["dir"])
            run_compare(cfg, outdir)
        elif args.command == "spectra":
            run_spectra(args, _outdir(args.out))
        elif args.command == "kernels":
            run_kernels(args, _outdir(args.out))
        elif args.command == "jc3":
            run_jc3(args, _outdir(args.out))
        elif args.command == "chain":
            cfg = parse_config(_chain_args_to_yaml(args))
            run_compare(cfg, _outdir(args.out))
        elif args.command == "floquet":
            run_floquet(args, _outdir(args.out))
        else:  # pragma: no cover
            parser.error(f"unknown command {args.command}")
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QmeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _chain_args_to_yaml(args):
    import yaml

    eqs = [e.strip() for e in args.equations.split(",") if e.strip()]
    return yaml.safe_dump(
        {
            "experiment": "compare",
            "model": {"kind": "chain", "n": args.n, "j": args.j, "eps_d": args.eps_d,
                      "n_keep": args.n_keep},
            "bath": {"kind": args.bath, "g_tot": args.g_tot, "omega_c_mult": args.omega_c_mult},
            "equations": eqs,
            "propagator": {"dt_divisor": args.dt_divisor, "t_max_tfm": args.t_max_tfm,
                           "store_every": args.store_every},
            "outputs": {"dir": args.out, "observables": ["trace", "purity", "min_eig",
                                                         "negativity", "sx", "energy"]},
        }
    )


if __name__ == "__main__":
    sys.exit(main())
