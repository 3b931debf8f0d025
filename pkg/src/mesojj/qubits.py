"""Two-level reductions: the Cooper-pair-box charge qubit and the rf-SQUID
flux qubit.

Flux is measured as a phase, ``phi = 2 pi Phi / Phi_0``; the loop inductance
enters through ``e_l = (Phi_0 / 2 pi)^2 / L`` so that

    U(phi) = -E_J cos(phi) + e_l (phi - phi_e)^2 / 2

and a flux difference maps back as ``Delta Phi = (Phi_0 / 2 pi) * delta_phi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import bisect

from .errors import SingleWellError

SCAN_STEP = 1e-3


@dataclass(frozen=True)
class ChargeQubitParams:
    e_c: float
    e_j: float
    q: float = 0.5

    def __post_init__(self):
        if not self.e_c > 0:
            raise ValueError("e_c must be > 0")
        if not self.e_j >= 0:
            raise ValueError("e_j must be >= 0")


def charge_qubit_hamiltonian(p: ChargeQubitParams) -> np.ndarray:
    """2x2 Hamiltonian over the charge states ``|0>, |1>``."""
    bias = p.e_c * (p.q - 0.5)
    return np.array([[bias, -0.5 * p.e_j], [-0.5 * p.e_j, -bias]])


def charge_qubit_levels(p: ChargeQubitParams, absolute: bool = True) -> np.ndarray:
    """Eigenvalues of the two-state Hamiltonian, ascending.

    With ``absolute`` the constant ``E_C ((q - 1/2)^2 + 1/4)`` dropped in the
    two-state form is added back, so the result is directly comparable with
    the two lowest charge-basis bands.
    """
    half = 0.5 * charge_qubit_gap(p)
    offset = p.e_c * ((p.q - 0.5) ** 2 + 0.25) if absolute else 0.0
    return np.array([offset - half, offset + half])


def charge_qubit_gap(p: ChargeQubitParams) -> float:
    return 2.0 * math.hypot(p.e_c * (p.q - 0.5), 0.5 * p.e_j)


@dataclass(frozen=True)
class SquidParams:
    e_j: float
    e_c: float
    e_l: float
    phi_e: float = math.pi

    def __post_init__(self):
        if not self.e_j > 0:
            raise ValueError("e_j must be > 0")
        if not self.e_c > 0:
            raise ValueError("e_c must be > 0")
        if not self.e_l > 0:
            raise ValueError("e_l must be > 0")
        if not math.isfinite(self.phi_e):
            raise ValueError("phi_e must be finite")

    @property
    def beta_l(self) -> float:
        return self.e_j / self.e_l


@dataclass(frozen=True)
class DoubleWell:
    phi_left: float
    phi_right: float
    barrier_phi: float
    u_left: float
    u_right: float
    u_barrier: float

    @property
    def delta_phi(self) -> float:
        """Half the distance between the minima, in phase units."""
        return 0.5 * (self.phi_right - self.phi_left)


def squid_potential(p: SquidParams, phi):
    return -p.e_j * np.cos(phi) + 0.5 * p.e_l * (phi - p.phi_e) ** 2


def squid_force(p: SquidParams, phi):
    """dU/dphi."""
    return p.e_j * np.sin(phi) + p.e_l * (phi - p.phi_e)


def squid_curvature(p: SquidParams, phi):
    """d^2U/dphi^2."""
    return p.e_j * np.cos(phi) + p.e_l


def stationary_points(p: SquidParams) -> list[float]:
    """Roots of U' on ``[phi_e - pi, phi_e + pi]``, ascending.

    Brackets come from a fixed-step scan, each refined by bisection.
    """
    n = int(round(2 * math.pi / SCAN_STEP))
    grid = p.phi_e - math.pi + SCAN_STEP * np.arange(n + 1)
    du = squid_force(p, grid)
    roots = []
    for k in range(n):
        if du[k] == 0.0:
            roots.append(float(grid[k]))
        elif du[k] * du[k + 1] < 0:
            roots.append(bisect(lambda x: squid_force(p, x), grid[k], grid[k + 1],
                                xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
    return roots


def find_double_well(p: SquidParams) -> DoubleWell:
    if not math.pi / 2 <= p.phi_e <= 3 * math.pi / 2:
        raise ValueError("phi_e must lie in [pi/2, 3pi/2]")
    if p.beta_l <= 1 + 1e-9 and math.isclose(p.phi_e, math.pi):
        raise SingleWellError(f"beta_L = {p.beta_l:.6g} <= 1: potential has a single well")
    roots = stationary_points(p)
    maxima = [r for r in roots if squid_curvature(p, r) < 0]
    if not maxima:
        raise SingleWellError("no barrier between the wells: single-well potential")
    barrier = min(maxima, key=lambda r: abs(r - p.phi_e))
    left = [r for r in roots if r < barrier and squid_curvature(p, r) > 0]
    right = [r for r in roots if r > barrier and squid_curvature(p, r) > 0]
    if not left or not right:
        raise SingleWellError("one of the two minima has vanished at this flux bias")
    phi_l, phi_r = left[-1], right[0]
    return DoubleWell(phi_l, phi_r, barrier, float(squid_potential(p, phi_l)),
                      float(squid_potential(p, phi_r)), float(squid_potential(p, barrier)))


def plasma_frequency(p: SquidParams, well: str = "left") -> float:
    """Small-oscillation frequency ``sqrt(2 E_C U'')`` at a minimum (hbar = 1)."""
    dw = find_double_well(p)
    if well not in ("left", "right"):
        raise ValueError("well must be 'left' or 'right'")
    phi = dw.phi_left if well == "left" else dw.phi_right
    return math.sqrt(2.0 * p.e_c * squid_curvature(p, phi))


def flux_qubit_bias(p: SquidParams) -> float:
    """Energy bias of the flux qubit, ``e_l (phi_e - pi) delta_phi``.

    ``delta_phi`` is taken at the symmetric point ``phi_e = pi``. The result is
    half the well-depth difference ``u_left - u_right`` to first order in
    ``phi_e - pi``; positive bias lowers the right well.
    """
    sym = find_double_well(replace(p, phi_e=math.pi))
    return p.e_l * (p.phi_e - math.pi) * sym.delta_phi
