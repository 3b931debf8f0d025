"""Photon-assisted resonant flux tunneling in a three-level model.

States: ``|0>`` ground state of the left well, ``|1>`` excited level of the
left well driven from ``|0>`` by the rf field (rotating-wave frame), ``|2>``
the level of the right well that ``|1>`` tunnels into. Density matrices are
vectorised row-major, ``vec(rho)[3*i + j] = rho[i, j]``.

The evolution generator is the sum of

* the intrawell part, written directly in the flux basis; it carries the
  coherent motion under the 3x3 Hamiltonian, decay of ``|1>`` and ``|2>`` at
  ``gamma1``/``gamma2`` and the instant reset of decayed population to ``|0>``;
* the interwell part, a secular relaxation in the Hamiltonian eigenbasis
  driven by flux fluctuations of strength ``g`` at temperature ``temp``,
  rotated back to the flux basis.

The stationary population of ``|2>`` times ``gamma2`` is the tunneling rate.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateStationaryState, SingularSystem
from .numerics import HermitianMatrix, eig_hermitian, solve_complex_linear

# flux-basis coupling to the environment: +1 in the left well, -1 in the right
FLUX_OPERATOR = np.diag([1.0, 1.0, -1.0])
TRACE_ROW = np.eye(3).reshape(9)
MODES = ("full", "intrawell-only", "strong-relaxation")


@dataclass(frozen=True)
class ThreeLevelParams:
    nu: float = 0.0
    eps: float = 0.0
    a: float = 0.0
    delta: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0
    g: float = 0.0
    temp: float = 0.0

    def __post_init__(self):
        for name in ("a", "delta", "gamma1", "gamma2", "g", "temp"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0")
        if not (math.isfinite(self.nu) and math.isfinite(self.eps)):
            raise ValueError("nu and eps must be finite")

    @property
    def rwa_suspect(self) -> bool:
        """Drive strong compared to the detuning/bias/tunneling scale."""
        return self.a > 0.3 * (abs(self.nu) + abs(self.eps) + self.delta)


def hamiltonian3(p: ThreeLevelParams) -> HermitianMatrix:
    return HermitianMatrix(np.array([
        [0.0, p.a / 2, 0.0],
        [0.0, p.nu, -p.delta / 2],
        [0.0, 0.0, p.nu - p.eps],
    ]))


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(9)


def unvec(v: np.ndarray) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(3, 3)


def intrawell_rhs(rho: np.ndarray, p: ThreeLevelParams) -> np.ndarray:
    """Time derivative of ``rho`` under the flux-basis equations.

    Written complex-linearly (``Im x = (x - x*)/2i`` with the conjugate
    element taken from the matrix) so it defines a superoperator; for a
    Hermitian ``rho`` it is the usual set of element equations.
    """
    nu, eps, a, d, g1, g2 = p.nu, p.eps, p.a, p.delta, p.gamma1, p.gamma2
    r = np.asarray(rho, dtype=complex)
    im01 = (r[0, 1] - r[1, 0]) / 2j
    im12 = (r[1, 2] - r[2, 1]) / 2j
    out = np.empty((3, 3), dtype=complex)
    out[0, 1] = (1j * nu - g1 / 2) * r[0, 1] + 1j * a * (r[0, 0] - r[1, 1]) / 2 - 1j * d * r[0, 2] / 2
    out[1, 0] = (-1j * nu - g1 / 2) * r[1, 0] - 1j * a * (r[0, 0] - r[1, 1]) / 2 + 1j * d * r[2, 0] / 2
    out[1, 2] = -(1j * eps + (g1 + g2) / 2) * r[1, 2] + 1j * d * (r[2, 2] - r[1, 1]) / 2 - 1j * a * r[0, 2] / 2
    out[2, 1] = -(-1j * eps + (g1 + g2) / 2) * r[2, 1] - 1j * d * (r[2, 2] - r[1, 1]) / 2 + 1j * a * r[2, 0] / 2
    out[0, 2] = (1j * (nu - eps) - g2 / 2) * r[0, 2] - 1j * a * r[1, 2] / 2 - 1j * d * r[0, 1] / 2
    out[2, 0] = (-1j * (nu - eps) - g2 / 2) * r[2, 0] + 1j * a * r[2, 1] / 2 + 1j * d * r[1, 0] / 2
    out[0, 0] = -a * im01 + g1 * r[1, 1] + g2 * r[2, 2]
    out[1, 1] = a * im01 + d * im12 - g1 * r[1, 1]
    out[2, 2] = -d * im12 - g2 * r[2, 2]
    return out


def superoperator(linear_map) -> np.ndarray:
    """9x9 matrix of a linear map on 3x3 matrices, in the row-major vec basis."""
    cols = []
    for k in range(9):
        basis = np.zeros(9, dtype=complex)
        basis[k] = 1.0
        cols.append(vec(linear_map(unvec(basis))))
    return np.column_stack(cols)


def intrawell_generator(p: ThreeLevelParams) -> np.ndarray:
    return superoperator(lambda r: intrawell_rhs(r, p))


def thermal_rate(x, temp: float):
    """``x / (1 - exp(-x/T))``; ``T`` at ``x = 0`` and ``max(x, 0)`` at ``T = 0``."""
    x = np.asarray(x, dtype=float)
    if temp == 0:
        return np.maximum(x, 0.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = x / -np.expm1(-x / temp)
    return np.where(x == 0, temp, out)


def interwell_rates(p: ThreeLevelParams):
    """Eigen-decomposition and interwell rates.

    Returns ``(energies, vectors, u_eig, gamma, gamma_dephase)`` where
    ``gamma[n, m]`` is the transition rate from eigenstate ``n`` to ``m``
    (diagonal zeroed) and ``gamma_dephase[n, m]`` the pure-dephasing rate of
    the coherence ``rho_nm``.
    """
    energies, vecs = eig_hermitian(hamiltonian3(p))
    u = vecs.conj().T @ FLUX_OPERATOR @ vecs
    gap = energies[:, None] - energies[None, :]
    gamma = p.g * np.abs(u) ** 2 * thermal_rate(gap, p.temp)
    np.fill_diagonal(gamma, 0.0)
    ud = u.diagonal().real
    gamma_dephase = 0.5 * p.g * p.temp * (ud[:, None] - ud[None, :]) ** 2
    return energies, vecs, u, gamma, gamma_dephase


def interwell_dissipator(p: ThreeLevelParams) -> np.ndarray:
    """Interwell relaxation as a flux-basis superoperator (no coherent part)."""
    if p.g == 0:
        return np.zeros((9, 9), dtype=complex)
    _, vecs, _, gamma, dephase = interwell_rates(p)
    out_rate = gamma.sum(axis=1)
    leig = np.zeros((9, 9), dtype=complex)
    for n in range(3):
        for m in range(3):
            if n == m:
                leig[4 * n, 4 * n] -= out_rate[n]
            else:
                leig[4 * n, 4 * m] += gamma[m, n]
                leig[3 * n + m, 3 * n + m] = -(dephase[m, n] + 0.5 * (out_rate[n] + out_rate[m]))
    to_flux = np.kron(vecs, vecs.conj())
    to_eig = np.kron(vecs.conj().T, vecs.T)
    return to_flux @ leig @ to_eig


def liouvillian(p: ThreeLevelParams, interwell: bool = True) -> np.ndarray:
    gen = intrawell_generator(p)
    if interwell:
        gen = gen + interwell_dissipator(p)
    return gen


def stationary_state(p: ThreeLevelParams, interwell: bool = True) -> np.ndarray:
    """Stationary density matrix of the full generator.

    The ``rho_00`` row of ``L vec(rho) = 0`` is replaced by the trace
    condition. Raises DegenerateStationaryState when the stationary state is
    not unique.
    """
    gen = liouvillian(p, interwell)
    system = gen.copy()
    system[0, :] = TRACE_ROW
    rhs = np.zeros(9, dtype=complex)
    rhs[0] = 1.0
    try:
        x = solve_complex_linear(system, rhs)
    except SingularSystem as exc:
        raise DegenerateStationaryState(
            f"stationary state is not unique for {p}") from exc
    scale = max(1.0, np.abs(gen).sum(axis=1).max())
    if np.abs(gen @ x).max() >= 1e-10 * scale:
        raise DegenerateStationaryState(
            f"stationary residual {np.abs(gen @ x).max():.2e} too large for {p}")
    rho = unvec(x)
    return 0.5 * (rho + rho.conj().T)


def tunneling_rate(p: ThreeLevelParams, interwell: bool = True) -> float:
    if p.a == 0:
        # nothing drives population out of |0>
        return 0.0
    rho = stationary_state(p, interwell)
    return max(p.gamma2 * float(rho[2, 2].real), 0.0)


def strong_relaxation_rate(p: ThreeLevelParams) -> float:
    """Closed-form rate for ``gamma1, gamma2 >> a, delta``."""
    den = (4 * p.nu ** 2 + p.gamma1 ** 2) * (4 * (p.nu - p.eps) ** 2 + p.gamma2 ** 2)
    return p.gamma2 * p.a ** 2 * p.delta ** 2 / den


def rate_for_mode(p: ThreeLevelParams, mode: str) -> float:
    if mode == "full":
        return tunneling_rate(p, interwell=True)
    if mode == "intrawell-only":
        return tunneling_rate(replace(p, g=0.0), interwell=False)
    if mode == "strong-relaxation":
        return strong_relaxation_rate(p)
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def detuning_sweep(template: ThreeLevelParams, nu_grid, mode: str = "full",
                   threads: int = 1) -> np.ndarray:
    """Rows ``(nu, rate)`` in grid order."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    nus = [float(v) for v in nu_grid]
    if not all(math.isfinite(v) for v in nus):
        raise ValueError("nu grid must be finite")

    def point(nu):
        return rate_for_mode(replace(template, nu=nu), mode)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rates = list(pool.map(point, nus))
    else:
        rates = [point(nu) for nu in nus]
    return np.column_stack([nus, rates]) if nus else np.empty((0, 2))
