"""Time evolution: power-series stepping for time-independent generators,
classical RK4 for time-dependent ones, with observable recording."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence, TraceDrift
from .generators import DenseForm, SuperopForm, TdcForm

DEFAULT_EPS = 1e-7


@dataclass
class Trajectory:
    """Uniform-step time series of a propagated state."""

    times: np.ndarray
    observables: dict
    state_times: np.ndarray = field(default=None)
    states: list = field(default=None)
    name: str = ""

    def observable(self, key):
        return np.asarray(self.observables[key])


def _is_time_dependent(form):
    return isinstance(form, TdcForm) or getattr(form, "time_dependent", False)


def _apply(form, rho, t):
    if _is_time_dependent(form):
        return form.apply(rho, t)
    return form.apply(rho)


def step_power_series(form, rho, dt, eps=DEFAULT_EPS, max_terms=200):
    """rho' = sum_m (dt L)^m rho / m!, truncated at Frobenius norm eps."""
    if dt == 0.0:
        return np.array(rho, copy=True)
    m, out = form.step_power_series(rho, dt, eps, max_terms)
    if m < 0:
        raise NoConvergence(
            f"power series did not reach {eps} within {max_terms} terms; reduce dt"
        )
    return out


def step_rk4(form, rho, t, dt):
    """Classical RK4 update for (possibly) time-dependent generators."""
    k1 = _apply(form, rho, t)
    k2 = _apply(form, rho + (0.5 * dt) * k1, t + 0.5 * dt)
    k3 = _apply(form, rho + (0.5 * dt) * k2, t + 0.5 * dt)
    k4 = _apply(form, rho + dt * k3, t + dt)
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _purity(rho):
    return float(np.einsum("ij,ji->", rho, rho).real)


def _min_eig(rho):
    return float(np.linalg.eigvalsh(rho).min())


def _negativity(rho):
    eig = np.linalg.eigvalsh(rho)
    neg = eig[eig < -1e-12]
    return float(neg.sum()) if neg.size else 0.0


_SCALAR_RECORDERS = {
    "trace": lambda rho: float(np.trace(rho).real),
    "purity": _purity,
    "min_eig": _min_eig,
    "negativity": _negativity,
}


def evolve(form, rho0, t_max, dt, eps=DEFAULT_EPS, record=("trace",), ops=None,
           store_every=0, method=None, max_terms=200, trace_tol=1e-6) -> Trajectory:
    """Propagate rho0 to t_max, recording observables each step.

    record      : names from {trace, purity, min_eig, negativity}
    ops         : {name: operator} expectation values Tr(op rho)
    store_every : keep every k-th state (0 = only endpoints)
    method      : 'power_series' | 'rk4' | None (auto: rk4 for TDC forms)
    """
    rho = np.array(rho0, dtype=complex, copy=True)
    nsteps = int(round(t_max / dt))
    times = np.arange(nsteps + 1) * dt
    if method is None:
        method = "rk4" if _is_time_dependent(form) else "power_series"
    if method == "rk4" and hasattr(form, "prepare") and _is_time_dependent(form):
        stage_times = np.unique(np.concatenate([times, times[:-1] + 0.5 * dt]))
        form.prepare(stage_times)
    ops = ops or {}
    series = {k: np.empty(nsteps + 1) for k in record}
    for k in ops:
        series[k] = np.empty(nsteps + 1, dtype=complex)
    states, state_times = [], []

    def _record(i, t, rho):
        for k in record:
            series[k][i] = _SCALAR_RECORDERS[k](rho)
        for k, op in ops.items():
            series[k][i] = np.einsum("ij,ji->", op, rho)
        if store_every and (i % store_every == 0 or i == nsteps):
            states.append(rho.copy())
            state_times.append(t)

    _record(0, 0.0, rho)
    warned = False
    for i in range(1, nsteps + 1):
        t_prev = times[i - 1]
        if method == "power_series":
            rho = step_power_series(form, rho, dt, eps, max_terms)
        elif method == "rk4":
            rho = step_rk4(form, rho, t_prev, dt)
        else:
            raise ValueError(f"unknown method {method!r}")
        if not warned:
            drift = abs(np.trace(rho).real - 1.0)
            if drift > trace_tol:
                warnings.warn(f"trace drifted by {drift:.2e} at t={times[i]:g}", TraceDrift)
                warned = True
        _record(i, times[i], rho)

    return Trajectory(
        times=times,
        observables=series,
        state_times=np.asarray(state_times) if states else None,
        states=states if states else None,
        name=getattr(form, "name", ""),
    )
