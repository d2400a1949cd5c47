"""V-type three-level emitter in a vacuum bath: exact Volterra solution,
renormalized levels and widths, avoided-crossing scans.

Levels 0, E1, E2 (E0 = 0) couple through C = |1><0| + |2><0| and its
adjoint to a zero-temperature oscillator bath.  In the single-excitation
sector the amplitudes obey two coupled Volterra integro-differential
equations driven by the bath correlation function, which serves as the
exact oracle for every master equation here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bath as bmod
from .backend import volterra_run
from .bath import BathModel
from .errors import StepTooLarge, UnsupportedBathKind
from .generators import CouplingSet, game_generator, lamb_shift
from .hilbert import EigenSystem, diagonalize
from .metrics import fit_exponential

CASE_A = (0.095, 0.105)
CASE_B = (0.09975, 0.10025)
DEFAULT_G = 0.001


@dataclass(frozen=True)
class Jc3Model:
    """Level energies (ground at zero) and the shared bath."""

    e1: float
    e2: float
    bath: BathModel

    def __post_init__(self):
        if not (0 < self.e1 <= self.e2):
            raise ValueError("need 0 < e1 <= e2")

    @classmethod
    def case_a(cls, g=DEFAULT_G, omega_c=1.0):
        return cls(CASE_A[0] * omega_c, CASE_A[1] * omega_c, BathModel("ohmic_exp", g, omega_c))

    @classmethod
    def case_b(cls, g=DEFAULT_G, omega_c=1.0):
        return cls(CASE_B[0] * omega_c, CASE_B[1] * omega_c, BathModel("ohmic_exp", g, omega_c))

    def hamiltonian(self):
        return np.diag([0.0, self.e1, self.e2])

    def eigensystem(self) -> EigenSystem:
        return diagonalize(self.hamiltonian())

    def coupling_matrix(self):
        C = np.zeros((3, 3), dtype=complex)
        C[1, 0] = 1.0
        C[2, 0] = 1.0
        return C

    def coupling_set(self) -> CouplingSet:
        return CouplingSet.build([self.coupling_matrix()], self.bath, hermitian=[False])


@dataclass
class ExactSolution:
    """Interaction-picture amplitudes on a uniform grid."""

    times: np.ndarray
    c1: np.ndarray
    c2: np.ndarray

    @property
    def populations(self):
        return np.abs(self.c1) ** 2, np.abs(self.c2) ** 2

    def states(self):
        """Reduced 3x3 density matrices (interaction picture)."""
        n = self.times.size
        rho = np.zeros((n, 3, 3), dtype=complex)
        p1 = np.abs(self.c1) ** 2
        p2 = np.abs(self.c2) ** 2
        rho[:, 0, 0] = 1.0 - p1 - p2
        rho[:, 1, 1] = p1
        rho[:, 2, 2] = p2
        rho[:, 1, 2] = self.c1 * np.conj(self.c2)
        rho[:, 2, 1] = np.conj(rho[:, 1, 2])
        return rho


def exact_evolve(model: Jc3Model, t_max, dt, mem_time=1000.0) -> ExactSolution:
    """Trapezoid predictor-corrector solution of the amplitude equations.

    mem_time truncates the convolution memory; the kernel decays like
    1/(omega_c t)^2 so the neglected tail is O(g / (w10 mem_time^2)) per
    unit time.  Initial condition c1 = 1, c2 = 0.
    """
    if model.bath.kind == bmod.OHMIC_DRUDE:
        raise UnsupportedBathKind("exact solution needs a closed-form C(t)")
    if dt * model.bath.omega_c > 0.1:
        raise StepTooLarge(f"dt*omega_c = {dt * model.bath.omega_c:.3f} > 0.1")
    nsteps = int(round(t_max / dt))
    mem = min(nsteps, int(round(mem_time / dt)))
    tk = np.arange(min(nsteps, mem) + 1) * dt
    corr = bmod.correlation_function(model.bath, tk)
    f1 = np.exp(1j * model.e1 * tk) * corr
    f2 = np.exp(1j * model.e2 * tk) * corr
    times = np.arange(nsteps + 1) * dt
    phase = np.exp(1j * (model.e1 - model.e2) * times)
    c1, c2 = volterra_run(f1, f2, phase, dt, nsteps, mem)
    return ExactSolution(times=times, c1=c1, c2=c2)


@dataclass(frozen=True)
class RenormalizedLevels:
    """Eigenpairs of the bath-renormalized excited block, with the
    strong-anticrossing width formulas."""

    e1p: float
    e2p: float
    states: tuple  # two 2-vectors in the {|1>, |2>} block
    widths: tuple  # (bright, dark) closed-form widths
    block: np.ndarray

    def vectors3(self):
        """The renormalized states embedded in the 3-level space."""
        v1 = np.zeros(3, dtype=complex)
        v2 = np.zeros(3, dtype=complex)
        v1[1:] = self.states[0]
        v2[1:] = self.states[1]
        return v1, v2


def renormalized_block(model: Jc3Model):
    """Excited-state block of the renormalized Hamiltonian: diagonal
    E_i + S(E_i), off-diagonal S_bar -/+ (i/4) (gamma_2 - gamma_1)."""
    b = model.bath
    s1 = bmod.principal_density(b, model.e1)
    s2 = bmod.principal_density(b, model.e2)
    g1 = bmod.spectral_density(b, model.e1)
    g2 = bmod.spectral_density(b, model.e2)
    sbar = 0.5 * (s1 + s2)
    dgam = g2 - g1
    return np.array(
        [
            [model.e1 + s1, sbar - 0.25j * dgam],
            [sbar + 0.25j * dgam, model.e2 + s2],
        ]
    )


def renormalized_levels(model: Jc3Model) -> RenormalizedLevels:
    """Closed-form level pair (asserted against the numerical eigenvalues)
    plus the strong-anticrossing width formulas."""
    b = model.bath
    block = renormalized_block(model)
    s1 = bmod.principal_density(b, model.e1)
    s2 = bmod.principal_density(b, model.e2)
    g1 = bmod.spectral_density(b, model.e1)
    g2 = bmod.spectral_density(b, model.e2)
    ebar = 0.5 * (model.e1 + model.e2)
    sbar = 0.5 * (s1 + s2)
    de = model.e2 - model.e1
    ds = s2 - s1
    dgam = g2 - g1
    root = np.sqrt(sbar**2 + (0.5 * (de + ds)) ** 2 + (0.25 * dgam) ** 2)
    e1p = ebar + sbar - root
    e2p = ebar + sbar + root
    evals, evecs = np.linalg.eigh(block)
    if abs(evals[0] - e1p) > 1e-12 * max(abs(e1p), 1.0) or abs(evals[1] - e2p) > 1e-12 * max(abs(e2p), 1.0):
        raise AssertionError("closed form disagrees with the numerical block")
    # widths in the strong-anticrossing regime (Gamma_dark suppressed)
    gdark = 0.25 * (g1 + g2) * (de / (2.0 * sbar)) ** 2
    gbright = g1 + g2 - gdark
    return RenormalizedLevels(
        e1p=float(e1p),
        e2p=float(e2p),
        states=(evecs[:, 0], evecs[:, 1]),
        widths=(float(gbright), float(gdark)),
        block=block,
    )


def _fit_width(form, v3, t_horizon, nsteps=4096, eps=1e-9):
    """Decay rate of the population of a renormalized state under a
    time-independent generator (exact-in-dt power-series steps)."""
    from .propagate import evolve

    rho0 = np.outer(v3, v3.conj())
    proj = rho0.copy()
    dt = t_horizon / nsteps
    traj = evolve(form, rho0, t_horizon, dt, eps=eps, record=(), ops={"p": proj})
    pop = traj.observable("p").real
    return fit_exponential(traj.times, pop)


def lambda_scan(model: Jc3Model, lambdas, fit=True, nsteps=4096):
    """Sweep H0(lambda) = E1 |1><1| + [E2 - lambda (E2-E1)] |2><2|.

    Returns one row per lambda with the closed-form renormalized levels and
    (optionally) the fitted widths of the renormalized states evolved under
    the completely positive geometric-mean equation.
    """
    rows = []
    de0 = model.e2 - model.e1
    for lam in lambdas:
        e2l = model.e2 - lam * de0
        lo, hi = sorted((model.e1, e2l))
        m = Jc3Model(e1=lo, e2=hi, bath=model.bath)
        lev = renormalized_levels(m)
        row = {"lambda": float(lam), "e1p": lev.e1p, "e2p": lev.e2p,
               "width_bright_formula": lev.widths[0], "width_dark_formula": lev.widths[1]}
        if fit:
            es = m.eigensystem()
            form = game_generator(m.coupling_set(), es).runtime()
            v1, v2 = lev.vectors3()
            gtot = sum(lev.widths)
            horizon_b = 2.5 / max(lev.widths[0], 1e-12)
            horizon_d = min(2.5 / max(lev.widths[1], gtot / 400.0), 5e5)
            row["width_bright_fit"] = _fit_width(form, v1, horizon_b, nsteps).rate
            row["width_dark_fit"] = _fit_width(form, v2, horizon_d, nsteps).rate
        rows.append(row)
    return rows


def interaction_picture(states, times, energies):
    """Rotate Schroedinger-picture states by the bare phases."""
    e = np.asarray(energies, dtype=float)
    out = np.empty_like(states)
    for k, (rho, t) in enumerate(zip(states, times)):
        ph = np.exp(1j * e * t)
        out[k] = (ph[:, None] * rho) * np.conj(ph)[None, :]
    return out
