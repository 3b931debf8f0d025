"""Charge-basis energy bands of a single mesoscopic Josephson junction.

The junction Hamiltonian in the basis of Cooper-pair number states ``|n>`` is

    H = E_C (n - q)^2 - (E_J / 2) (|n><n+1| + |n+1><n|)

with ``q`` the gate-induced charge in units of 2e. Units: hbar = k_B = e = 1;
energies in any common unit, voltage reported as ``V * e``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import TruncationError
from .numerics import SymTridiag, central_difference, eig_sym_tridiag

# Boltzmann weight (relative to the ground state) below which levels are dropped
BOLTZMANN_CUTOFF = 1e-12
FD_STEP = 1e-5
HALF_INTEGER_GUARD = 1e-8


def auto_truncation(e_j: float, e_c: float, q: float = 0.0, t: float = 0.0) -> int:
    """Default charge cutoff ``n_max`` (basis is ``-n_max..n_max``)."""
    n = max(8, math.ceil(abs(q)) + math.ceil(4.0 * math.sqrt(e_j / e_c)) + 8)
    if t > 0:
        # highest charge state must sit ~40 T above the band bottom
        n = max(n, math.ceil(abs(q)) + math.ceil(math.sqrt(40.0 * t / e_c)) + 8)
    return n


@dataclass(frozen=True)
class JunctionParams:
    e_c: float
    e_j: float
    q: float = 0.0
    n_max: int | None = None

    def __post_init__(self):
        if not self.e_c > 0:
            raise ValueError("e_c must be > 0")
        if not self.e_j >= 0:
            raise ValueError("e_j must be >= 0")
        if not math.isfinite(self.q):
            raise ValueError("q must be finite")
        if self.n_max is not None and self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    def resolved_n_max(self, t: float = 0.0) -> int:
        if self.n_max is not None:
            return self.n_max
        return auto_truncation(self.e_j, self.e_c, self.q, t)

    def with_q(self, q: float) -> "JunctionParams":
        return replace(self, q=q)


@dataclass(frozen=True)
class BandResult:
    energies: np.ndarray
    vectors: np.ndarray      # columns, one per retained level
    charges: np.ndarray      # n value of every basis state

    @property
    def ground_vector(self) -> np.ndarray:
        return self.vectors[:, 0]


def charge_states(n_max: int) -> np.ndarray:
    return np.arange(-n_max, n_max + 1, dtype=float)


def build_hamiltonian(p: JunctionParams, n_max: int | None = None) -> SymTridiag:
    n = charge_states(p.resolved_n_max() if n_max is None else n_max)
    return SymTridiag(p.e_c * (n - p.q) ** 2, np.full(n.size - 1, -0.5 * p.e_j))


def _solve(p: JunctionParams, n_max: int, k: int | None):
    h = build_hamiltonian(p, n_max)
    _, vecs = eig_sym_tridiag(h, k)
    # Rayleigh quotients: error set by the occupied low-charge entries rather
    # than by ||H||, which keeps the finite-difference <n> free of solver noise
    hv = h.diag[:, None] * vecs
    hv[:-1] += h.offdiag[:, None] * vecs[1:]
    hv[1:] += h.offdiag[:, None] * vecs[:-1]
    return np.einsum("ik,ik->k", vecs, hv), vecs


def spectrum(p: JunctionParams, m_levels: int | None = None, t: float = 0.0) -> BandResult:
    """Lowest ``m_levels`` bands at the induced charge ``p.q``.

    ``m_levels=None`` returns every level of the truncated basis. The ground
    energy is checked against a calculation with doubled cutoff.
    """
    n_max = p.resolved_n_max(t)
    dim = 2 * n_max + 1
    if m_levels is not None and not 1 <= m_levels <= dim:
        raise ValueError(f"m_levels must be in [1, {dim}]")
    vals, vecs = _solve(p, n_max, m_levels)
    ref, _ = _solve(p, 2 * n_max, 1)
    if abs(ref[0] - vals[0]) >= 1e-10 * p.e_c:
        raise TruncationError(
            f"ground energy not converged at n_max={n_max} "
            f"(shift {abs(ref[0] - vals[0]):.2e} on doubling); use a larger n_max")
    return BandResult(vals, vecs, charge_states(n_max))


def _thermal_weights(energies: np.ndarray, t: float) -> np.ndarray:
    """Normalised Boltzmann weights over the retained levels."""
    e0 = energies[0]
    if t == 0:
        deg = np.abs(energies - e0) < 1e-10 * max(1.0, abs(e0))
        w = deg.astype(float)
    else:
        w = np.exp(-(energies - e0) / t)
        if w[-1] >= BOLTZMANN_CUTOFF:
            raise TruncationError(
                f"highest retained level still has Boltzmann weight {w[-1]:.2e} "
                f"at t={t}; increase n_max")
        w = np.where(w >= BOLTZMANN_CUTOFF, w, 0.0)
    return w / w.sum()


def free_energy(p: JunctionParams, t: float = 0.0) -> float:
    if t < 0:
        raise ValueError("temperature must be >= 0")
    if t == 0:
        return float(spectrum(p, 1).energies[0])
    e = spectrum(p, None, t).energies
    w = np.exp(-(e - e[0]) / t)
    if w[-1] >= BOLTZMANN_CUTOFF:
        raise TruncationError(
            f"highest retained level still has Boltzmann weight {w[-1]:.2e} "
            f"at t={t}; increase n_max")
    return float(e[0] - t * math.log(w[w >= BOLTZMANN_CUTOFF].sum()))


def average_n_direct(p: JunctionParams, t: float = 0.0) -> float:
    """Boltzmann-weighted expectation of ``n`` over the eigenstates.

    At ``t = 0`` a degenerate ground manifold is averaged with equal weights.
    """
    res = spectrum(p, None, t)
    w = _thermal_weights(res.energies, t)
    n_expect = (res.charges[:, None] * res.vectors ** 2).sum(axis=0)
    return float(w @ n_expect)


def _near_half_integer(q: float) -> bool:
    return abs((q - 0.5) - round(q - 0.5)) < HALF_INTEGER_GUARD


def average_n(p: JunctionParams, t: float = 0.0, method: str = "auto") -> float:
    """Average Cooper-pair number ``<n> = q - (1/2E_C) dF/dq``.

    ``method`` is ``"thermo"`` (derivative of the free energy), ``"direct"``
    (eigenstate expectation) or ``"auto"``. ``auto`` uses the direct route at
    zero temperature where F(q) has a kink: next to half-integer ``q`` and on
    the uncoupled ``e_j = 0`` parabolas.
    """
    if method == "auto":
        kink = t == 0 and (p.e_j == 0 or _near_half_integer(p.q))
        method = "direct" if kink else "thermo"
    if method == "direct":
        return average_n_direct(p, t)
    if method != "thermo":
        raise ValueError(f"unknown method {method!r}")
    # F is 1-periodic in q; differentiating at the reduced charge keeps the
    # basis norm, and with it the rounding noise of the stencil, small
    shift = round(p.q)
    q0 = p.q - shift
    # one cutoff for the whole stencil so both sides see the same basis
    n_max = p.n_max if p.n_max is not None else auto_truncation(
        p.e_j, p.e_c, abs(q0) + 2 * FD_STEP, t)
    fixed = replace(p, n_max=n_max)
    dfdq = _ground_difference(fixed, q0) if t == 0 else None
    if dfdq is None:
        dfdq = central_difference(lambda q: free_energy(fixed.with_q(q), t), q0, FD_STEP)
    return p.q - dfdq / (2.0 * p.e_c)


def _ground_difference(p: JunctionParams, q: float):
    """``(eps0(q+h) - eps0(q-h)) / 2h`` without subtracting two large energies.

    For exact eigenvectors ``eps+ - eps- = v+ (H+ - H-) v- / (v+ . v-)`` and
    ``H+ - H-`` is a small diagonal, so the quotient keeps full relative
    precision. Returns None when the ground state changes character inside
    the stencil (the overlap is then not a safe denominator).
    """
    lo, hi = q - FD_STEP, q + FD_STEP
    vm = spectrum(p.with_q(lo), 1).ground_vector
    vp = spectrum(p.with_q(hi), 1).ground_vector
    overlap = vp @ vm
    if abs(overlap) < 0.5:
        return None
    n = charge_states(p.resolved_n_max())
    ddiag = p.e_c * (lo - hi) * (2 * n - hi - lo)
    return float((vp * ddiag) @ vm / overlap / (hi - lo))


def junction_voltage(p: JunctionParams, t: float = 0.0, method: str = "auto") -> float:
    """``V * e = E_C (<n> - q)``, from ``V = 2e(<n> - q)/C`` and ``C = 2e^2/E_C``."""
    return p.e_c * (average_n(p, t, method) - p.q)


def band_row(p: JunctionParams, t: float, m_levels: int) -> list[float]:
    energies = spectrum(p, m_levels).energies
    n_avg = average_n(p, t)
    return [p.q, *map(float, energies), n_avg, p.e_c * (n_avg - p.q)]


def band_columns(m_levels: int) -> list[str]:
    return ["q", *[f"eps{k}" for k in range(m_levels)], "avg_n", "voltage"]


def band_sweep(template: JunctionParams, q_grid, t: float = 0.0, m_levels: int = 3,
               threads: int = 1) -> np.ndarray:
    """Rows ``(q, eps_0..eps_{m-1}, <n>, V)`` for every ``q`` in grid order."""
    q_grid = [float(q) for q in q_grid]
    if not all(math.isfinite(q) for q in q_grid):
        raise ValueError("q grid must be finite")

    def row(q):
        return band_row(template.with_q(q), t, m_levels)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, q_grid))
    else:
        rows = [row(q) for q in q_grid]
    return np.array(rows, dtype=float).reshape(len(q_grid), m_levels + 3)
