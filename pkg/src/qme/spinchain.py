"""Ferromagnetic Heisenberg chain with long-range dipole-dipole coupling.

H0 = -J sum_i S_i . S_{i+1}
     - eps_d sum_{i<j} [3 S_zi S_zj - S_i . S_j] / (j-i)^3
     - h_z S_z,

assembled per S_z sector (the Hamiltonian commutes with S_z), truncated to
the lowest N eigenstates across sectors.  The weak Zeeman term splits the
ferromagnetic ground doublet; by default it is chosen so that the doublet
splitting is 1.25e-4 of the anisotropy gap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TooLarge
from .generators import CouplingSet

DESK_MAX_SITES = 14


@dataclass(frozen=True)
class ChainModel:
    n: int
    J: float = 400.0
    eps_d: float = 6.0
    h_z: float = None
    n_keep: int = 128

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two sites")
        if self.n > DESK_MAX_SITES:
            raise TooLarge(f"dense per-sector blocks are limited to n <= {DESK_MAX_SITES}")
        if not self.J > 0:
            raise ValueError("ferromagnetic convention requires J > 0")


def _sector_states(n):
    """Basis bitstrings grouped by S_z = (popcount - n/2)."""
    states = np.arange(1 << n, dtype=np.int64)
    pop = np.array([bin(s).count("1") for s in states])
    sectors = {}
    for m in range(n + 1):
        sectors[m - n / 2.0 if n % 2 else m - n // 2] = states[pop == m]
    # key by 2*S_z (integer) to avoid float keys
    return {int(round(2 * k)): v for k, v in sectors.items()}


def _pair_coupling(n, J, eps_d):
    """Coefficients (heis_ij, zz_extra_ij) of S_i.S_j and S_zi S_zj."""
    heis = np.zeros((n, n))
    zz = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            r3 = float((j - i) ** 3)
            c_heis = (-J if j == i + 1 else 0.0) + eps_d / r3  # +eps_d S.S term
            c_zz = -3.0 * eps_d / r3
            heis[i, j] = c_heis
            zz[i, j] = c_zz
    return heis, zz


def _sector_hamiltonian(states, n, heis, zz, h_z):
    """Dense block of H0 on one S_z sector."""
    dim = states.size
    index = {int(s): k for k, s in enumerate(states)}
    H = np.zeros((dim, dim))
    bits = ((states[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int8)
    sz = bits - 0.5  # S_z eigenvalue per site
    for i in range(n):
        for j in range(i + 1, n):
            ch = heis[i, j]
            cz = zz[i, j]
            if ch == 0.0 and cz == 0.0:
                continue
            # diagonal: (ch + cz) S_zi S_zj
            H[np.arange(dim), np.arange(dim)] += (ch + cz) * sz[:, i] * sz[:, j]
            if ch != 0.0:
                # flip-flop: (ch/2)(S+_i S-_j + S-_i S+_j)
                anti = bits[:, i] != bits[:, j]
                rows = np.where(anti)[0]
                for r in rows:
                    s = int(states[r])
                    flipped = s ^ ((1 << i) | (1 << j))
                    c = index[flipped]
                    H[r, c] += 0.5 * ch
    H[np.arange(dim), np.arange(dim)] += -h_z * sz.sum(axis=1)
    return H


@dataclass
class ChainData:
    """Diagonalized, truncated chain: retained energies, the embedding of the
    retained eigenvectors in the full space, and sector bookkeeping."""

    model: ChainModel
    energies: np.ndarray           # retained, ascending
    sectors: np.ndarray            # 2*S_z per retained state
    basis_full: np.ndarray         # (2^n, N) retained eigenvectors
    gap: float                     # first excitation above the ground doublet
    all_energies: np.ndarray = field(repr=False)
    sector_spectra: dict = field(repr=False)

    @property
    def t_fm(self):
        return 2.0 * np.pi / self.gap

    def eigensystem(self):
        from .hilbert import EigenSystem

        e = self.energies
        return EigenSystem(
            energies=e,
            basis=np.eye(e.size, dtype=complex),
            bohr=e[:, None] - e[None, :],
        )


def build_chain(n, J=400.0, eps_d=6.0, h_z=None, n_keep=128) -> ChainData:
    """Per-sector diagonalization; keeps the lowest n_keep states overall."""
    model = ChainModel(n=n, J=J, eps_d=eps_d, h_z=h_z, n_keep=n_keep)
    heis, zz = _pair_coupling(n, J, eps_d)
    sectors = _sector_states(n)
    if h_z is None:
        # gap of the h_z = 0 spectrum sets the default splitting scale
        probe = _assemble(sectors, n, heis, zz, 0.0)
        gap0 = _doublet_gap(probe[0])
        h_z = 0.000125 * gap0 / n  # 2 h_z S_max = 1.25e-4 * gap
    evals, evecs_by_sector, spectra = _assemble(sectors, n, heis, zz, h_z, want_vecs=True)
    order = np.argsort(evals[:, 0], kind="stable")
    keep = order[: min(n_keep, evals.shape[0])]
    energies = evals[keep, 0]
    sector_of = evals[keep, 1].astype(int)
    dim_full = 1 << n
    basis = np.zeros((dim_full, keep.size))
    for col, idx in enumerate(keep):
        m2, local = int(evals[idx, 1]), int(evals[idx, 2])
        vec = evecs_by_sector[m2][:, local]
        basis[sectors[m2], col] = vec
    gap = _doublet_gap(evals[:, 0][order])
    return ChainData(
        model=ChainModel(n=n, J=J, eps_d=eps_d, h_z=h_z, n_keep=n_keep),
        energies=energies,
        sectors=sector_of,
        basis_full=basis,
        gap=gap,
        all_energies=np.sort(evals[:, 0]),
        sector_spectra=spectra,
    )


def _doublet_gap(sorted_energies):
    return float(sorted_energies[2] - sorted_energies[0])


def _assemble(sectors, n, heis, zz, h_z, want_vecs=False):
    rows = []
    vecs = {}
    spectra = {}
    for m2, states in sectors.items():
        H = _sector_hamiltonian(states, n, heis, zz, h_z)
        if want_vecs:
            e, v = np.linalg.eigh(H)
            vecs[m2] = v
        else:
            e = np.linalg.eigvalsh(H)
        spectra[m2] = e
        for k, ek in enumerate(e):
            rows.append((ek, m2, k))
    evals = np.array(rows)
    if want_vecs:
        return evals, vecs, spectra
    return np.sort(evals[:, 0]), spectra


def site_operator(n, site, axis):
    """Dense 2^n spin-1/2 component operator (x, y or z) for one site."""
    dim = 1 << n
    states = np.arange(dim, dtype=np.int64)
    bit = (states >> site) & 1
    if axis == "z":
        diag = bit - 0.5
        op = np.zeros((dim, dim), dtype=complex)
        op[states, states] = diag
        return op
    flipped = states ^ (1 << site)
    op = np.zeros((dim, dim), dtype=complex)
    if axis == "x":
        op[flipped, states] = 0.5
    elif axis == "y":
        # <flipped| S_y |s> = +i/2 if bit flips 1->0 ... sign from S_y = (S+ - S-)/(2i)
        op[flipped, states] = np.where(bit == 0, 0.5j, -0.5j)
    else:
        raise ValueError(axis)
    return op


def truncated_site_operators(chain: ChainData):
    """All 3n site components projected onto the retained eigenbasis."""
    n = chain.model.n
    U = chain.basis_full
    ops = {}
    for site in range(n):
        for axis in ("x", "y", "z"):
            full = site_operator(n, site, axis)
            ops[(site, axis)] = U.conj().T @ full @ U
    return ops


def total_spin_operators(chain: ChainData):
    """Truncated total S_x, S_y, S_z."""
    site_ops = truncated_site_operators(chain)
    n = chain.model.n
    out = {}
    for axis in ("x", "y", "z"):
        out[axis] = sum(site_ops[(site, axis)] for site in range(n))
    return out


def coupling_operators(chain: ChainData, bath, g_tot=None) -> CouplingSet:
    """3n independent baths, one per site component; per-bath coupling is
    g_tot / (3n) when g_tot is given, else the bath's own g."""
    from .bath import BathModel

    site_ops = truncated_site_operators(chain)
    n = chain.model.n
    if g_tot is not None:
        bath = BathModel(bath.kind, g_tot / (3.0 * n), bath.omega_c)
    ops = [site_ops[(site, axis)] for site in range(n) for axis in ("x", "y", "z")]
    return CouplingSet.build(ops, bath)


def initial_perpendicular_state(chain: ChainData):
    """Top eigenvector of the truncated total S_x (max transverse moment)."""
    sx = total_spin_operators(chain)["x"]
    evals, evecs = np.linalg.eigh(sx)
    v = evecs[:, -1]
    return np.outer(v, v.conj()), float(evals[-1])
