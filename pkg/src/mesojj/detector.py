"""The SET transistor in the resonant-tunneling regime as a linear detector.

One level at energy ``eps_level`` couples to an emitter (chemical potential
``mu1``) and a collector (``mu2 <= mu1``) with half tunnel rates ``gamma1``
and ``gamma2``. Units are ``e = hbar = k_B = 1`` and zero-frequency spectral
densities carry the ``1/2 pi`` of ``S = (1/2pi) int dt <dX(t) dY>``.

Sign conventions: the current is counted positive for electrons moving from
the emitter through the level, and the input potential shifts the level as
``d eps_level = -d phi``. With these, ``lambda > 0`` for a level below the
emitter and the imaginary part of ``S_IQ`` is ``-lambda / 4 pi``.

Zero temperature (``temp < 1e-6 * gamma``) uses closed antiderivatives of the
per-energy kernels over ``[mu2, mu1]``; finite temperature integrates the
full Fermi-factor integrands by adaptive quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import expit

from .errors import ZeroNoise, ZeroResponse
from .numerics import QuadratureSpec, integrate_adaptive

ZERO_T_FRACTION = 1e-6
QUAD = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-12, max_subdivisions=1000)


@dataclass(frozen=True)
class DetectorParams:
    gamma1: float
    gamma2: float
    eps_level: float
    mu1: float
    mu2: float
    temp: float = 0.0

    def __post_init__(self):
        if not (self.gamma1 > 0 and self.gamma2 > 0):
            raise ValueError("gamma1 and gamma2 must be > 0")
        if not self.mu1 >= self.mu2:
            raise ValueError("mu1 must be >= mu2")
        if not self.temp >= 0:
            raise ValueError("temp must be >= 0")

    @classmethod
    def centered(cls, gamma1, gamma2, bias, temp=0.0):
        """Level midway between the chemical potentials, ``mu1 - mu2 = bias``."""
        return cls(gamma1, gamma2, 0.0, bias / 2, -bias / 2, temp)

    @classmethod
    def emitter_offset(cls, gamma1, gamma2, z, collector_depth=50.0, temp=0.0):
        """Level at ``mu1 - z*gamma``, collector ``collector_depth*gamma`` below the level."""
        gamma = gamma1 + gamma2
        return cls(gamma1, gamma2, 0.0, z * gamma, -collector_depth * gamma, temp)

    @property
    def gamma(self) -> float:
        return self.gamma1 + self.gamma2

    @property
    def bias(self) -> float:
        return self.mu1 - self.mu2

    @property
    def z(self) -> float:
        return (self.mu1 - self.eps_level) / self.gamma

    @property
    def zero_temperature(self) -> bool:
        return self.temp < ZERO_T_FRACTION * self.gamma


@dataclass(frozen=True)
class NoiseQuartet:
    s_i: float
    s_q: float
    s_iq: complex
    lam: float

    @property
    def energy_sensitivity(self) -> float:
        return energy_sensitivity_from(self)

    @property
    def snr(self) -> float:
        return signal_to_noise_from(self)


def fermi(nu, mu, temp):
    nu = np.asarray(nu, dtype=float)
    if temp == 0:
        return np.where(nu < mu, 1.0, np.where(nu > mu, 0.0, 0.5))
    return expit((mu - nu) / temp)


# --- per-energy kernels at T = 0 -------------------------------------------

def reduced_kernels(g1, g2, eps, nu):
    """Per-energy kernels with the powers of pi stripped.

    Returns ``(s_q, s_i, re_s_iq, im_s_iq, lam)`` such that the physical
    kernels are these divided by ``pi^2`` (``lam`` by ``pi``). Plain
    arithmetic only, so the same formulas run on floats, arrays or exact
    rationals.
    """
    y = eps - nu
    d = y * y + (g1 + g2) ** 2
    pre = g1 * g2 / (d * d)
    return (pre, pre * (y * y + (g1 - g2) ** 2), pre * (g2 - g1), -pre * y, 4 * pre * y)


def _kernels(p, nu):
    return reduced_kernels(p.gamma1, p.gamma2, p.eps_level, np.asarray(nu, dtype=float))


def kernel_sq(p: DetectorParams, nu):
    return _kernels(p, nu)[0] / math.pi ** 2


def kernel_si(p: DetectorParams, nu):
    return _kernels(p, nu)[1] / math.pi ** 2


def kernel_siq(p: DetectorParams, nu):
    k = _kernels(p, nu)
    return (k[2] + 1j * k[3]) / math.pi ** 2


def kernel_lambda(p: DetectorParams, nu):
    return _kernels(p, nu)[4] / math.pi


def _den(p, nu):
    y = p.eps_level - np.asarray(nu, dtype=float)
    return y, y * y + p.gamma ** 2


def transparency(p: DetectorParams, nu):
    _, d = _den(p, nu)
    return 4 * p.gamma1 * p.gamma2 / d


# --- finite-temperature integrands ------------------------------------------

def _occupations(p, nu):
    f1 = fermi(nu, p.mu1, p.temp)
    f2 = fermi(nu, p.mu2, p.temp)
    return f1, f2


def _integrand_sq(p, nu):
    f1, f2 = _occupations(p, nu)
    g1, g2 = p.gamma1, p.gamma2
    _, d = _den(p, nu)
    occ = g1 * g1 * f1 * (1 - f1) + g2 * g2 * f2 * (1 - f2) + g1 * g2 * (f1 * (1 - f2) + f2 * (1 - f1))
    return occ / (math.pi ** 2 * d ** 2)


def _integrand_si(p, nu):
    f1, f2 = _occupations(p, nu)
    g1, g2 = p.gamma1, p.gamma2
    y, d = _den(p, nu)
    bracket = (4 * g1 * g2 * (f1 * (1 - f1) + f2 * (1 - f2))
               + (y * y + (g1 - g2) ** 2) * (f1 * (1 - f2) + (1 - f1) * f2))
    return g1 * g2 / math.pi ** 2 * bracket / d ** 2


def _integrand_siq_re(p, nu):
    f1, f2 = _occupations(p, nu)
    g1, g2 = p.gamma1, p.gamma2
    _, d = _den(p, nu)
    bracket = (2 * g1 * f1 * (1 - f1) - 2 * g2 * f2 * (1 - f2)
               + (g2 - g1) * (f1 * (1 - f2) + (1 - f1) * f2))
    return g1 * g2 / math.pi ** 2 * bracket / d ** 2


def _integrand_siq_im(p, nu):
    # f1(1-f2) - (1-f1)f2 = f1 - f2
    f1, f2 = _occupations(p, nu)
    y, d = _den(p, nu)
    return -p.gamma1 * p.gamma2 / math.pi ** 2 * y * (f1 - f2) / d ** 2


def _integrand_lambda(p, nu):
    f1, f2 = _occupations(p, nu)
    return kernel_lambda(p, nu) * (f1 - f2)


def _integrand_current(p, nu):
    f1, f2 = _occupations(p, nu)
    return transparency(p, nu) * (f1 - f2) / (2 * math.pi)


def integration_window(p: DetectorParams) -> tuple[float, float]:
    if p.zero_temperature:
        return p.mu2, p.mu1
    w = max(50.0 * p.gamma, 40.0 * p.temp)
    return min(p.mu2, p.eps_level) - w, max(p.mu1, p.eps_level) + w


def _quad(p, integrand, scale):
    lo, hi = integration_window(p)
    spec = QuadratureSpec(abs_tol=1e-13 * scale, rel_tol=QUAD.rel_tol,
                          max_subdivisions=QUAD.max_subdivisions)
    # geometric cuts around the level keep the Lorentzian resolved in wide windows
    cuts = [p.mu1, p.mu2, p.eps_level]
    step = p.gamma
    while step < hi - lo:
        cuts += [p.eps_level - step, p.eps_level + step]
        step *= 8.0
    value, _ = integrate_adaptive(lambda nu: float(integrand(p, nu)), lo, hi, spec,
                                  points=cuts)
    return value


def _zero_t_kernel(name):
    kern = {"sq": kernel_sq, "si": kernel_si, "lambda": kernel_lambda,
            "siq_re": lambda p, nu: kernel_siq(p, nu).real,
            "siq_im": lambda p, nu: kernel_siq(p, nu).imag,
            "current": lambda p, nu: transparency(p, nu) / (2 * math.pi)}[name]
    return kern


def _full_integrand(name):
    return {"sq": _integrand_sq, "si": _integrand_si, "lambda": _integrand_lambda,
            "siq_re": _integrand_siq_re, "siq_im": _integrand_siq_im,
            "current": _integrand_current}[name]


# --- closed forms at T = 0 --------------------------------------------------

def _antiderivatives(p: DetectorParams):
    """Definite integrals over ``[mu2, mu1]`` in ``x = nu - eps_level``.

    Returns ``(J0, J1, J2, JL)`` for the kernels ``1/D^2``, ``x/D^2``,
    ``x^2/D^2`` and ``1/D`` with ``D = x^2 + gamma^2``.
    """
    g = p.gamma
    x1, x2 = p.mu1 - p.eps_level, p.mu2 - p.eps_level
    # arctan(x1/g) - arctan(x2/g) without cancellation for wide windows
    dat = math.atan2((x1 - x2) * g, g * g + x1 * x2)
    d1, d2 = x1 * x1 + g * g, x2 * x2 + g * g
    j0 = (dat + g * (x1 / d1 - x2 / d2)) / (2 * g ** 3)
    j1 = (x1 - x2) * (x1 + x2) / (2 * d1 * d2)
    j2 = dat / (2 * g) - 0.5 * (x1 / d1 - x2 / d2)
    jl = dat / g
    return j0, j1, j2, jl


def _closed(p: DetectorParams, name):
    g1, g2 = p.gamma1, p.gamma2
    pre = g1 * g2 / math.pi ** 2
    j0, j1, j2, jl = _antiderivatives(p)
    # the kernels use y = eps - nu = -x, so odd moments flip sign
    return {
        "sq": pre * j0,
        "si": pre * (j2 + (g1 - g2) ** 2 * j0),
        "siq_re": pre * (g2 - g1) * j0,
        "siq_im": pre * j1,
        "lambda": -4 * g1 * g2 / math.pi * j1,
        "current": 4 * g1 * g2 * jl / (2 * math.pi),
    }[name]


def _scale(p: DetectorParams, name):
    g1, g2, g = p.gamma1, p.gamma2, p.gamma
    return {"sq": g1 * g2 / g ** 3, "si": g1 * g2 / g, "siq_re": g1 * g2 / g ** 2,
            "siq_im": g1 * g2 / g ** 2, "lambda": g1 * g2 / g ** 2,
            "current": g1 * g2 / g}[name]


def _quantity(p: DetectorParams, name: str, method: str) -> float:
    if method not in ("auto", "closed", "quad"):
        raise ValueError(f"unknown method {method!r}")
    if p.zero_temperature:
        if method == "quad":
            return _quad(p, _zero_t_kernel(name), _scale(p, name))
        return _closed(p, name)
    if method == "closed":
        raise ValueError("closed forms exist only at zero temperature")
    return _quad(p, _full_integrand(name), _scale(p, name))


def backaction_noise(p: DetectorParams, method: str = "auto") -> float:
    return _quantity(p, "sq", method)


def current_noise(p: DetectorParams, method: str = "auto") -> float:
    return _quantity(p, "si", method)


def cross_correlator(p: DetectorParams, method: str = "auto") -> complex:
    return complex(_quantity(p, "siq_re", method), _quantity(p, "siq_im", method))


def response_coefficient(p: DetectorParams, method: str = "auto") -> float:
    return _quantity(p, "lambda", method)


def average_current(p: DetectorParams, method: str = "auto") -> float:
    return _quantity(p, "current", method)


def noise_quartet(p: DetectorParams, method: str = "auto") -> NoiseQuartet:
    return NoiseQuartet(current_noise(p, method), backaction_noise(p, method),
                        cross_correlator(p, method), response_coefficient(p, method))


def energy_sensitivity_from(nq: NoiseQuartet) -> float:
    """``(2 pi / |lambda|) sqrt(S_I S_Q - (Re S_IQ)^2)`` in units of hbar."""
    if nq.lam == 0:
        raise ZeroResponse("response coefficient vanishes; energy sensitivity undefined")
    excess = nq.s_i * nq.s_q - nq.s_iq.real ** 2
    return 2 * math.pi / abs(nq.lam) * math.sqrt(max(excess, 0.0))


def signal_to_noise_from(nq: NoiseQuartet) -> float:
    if not (nq.s_i > 0 and nq.s_q > 0):
        raise ZeroNoise("signal-to-noise ratio needs S_I > 0 and S_Q > 0")
    return nq.lam ** 2 / (4 * math.pi ** 2 * nq.s_i * nq.s_q)


def energy_sensitivity(p: DetectorParams, method: str = "auto") -> float:
    return energy_sensitivity_from(noise_quartet(p, method))


def signal_to_noise(p: DetectorParams, method: str = "auto") -> float:
    return signal_to_noise_from(noise_quartet(p, method))


# --- deep-collector closed forms --------------------------------------------

def _arc(z):
    """``pi/2 + arctan z`` evaluated without cancellation at large negative z."""
    return np.arctan2(1.0, -np.asarray(z, dtype=float))


def deep_collector_quartet(gamma1: float, gamma2: float, z: float) -> NoiseQuartet:
    """Noise quartet at T = 0 for a collector far below the level.

    ``z = (mu1 - eps_level) / gamma``. This is the ``mu2 -> -inf`` limit of
    the zero-temperature antiderivatives.
    """
    g = gamma1 + gamma2
    pre = gamma1 * gamma2 / (math.pi ** 2 * g ** 3)
    arc = float(_arc(z))
    frac = z / (1 + z * z)
    s_i = pre * ((gamma1 ** 2 + gamma2 ** 2) * arc - 2 * gamma1 * gamma2 * frac)
    s_q = 0.5 * pre * (arc + frac)
    lam = 2 * gamma1 * gamma2 / (math.pi * g ** 2 * (1 + z * z))
    return NoiseQuartet(s_i, s_q, complex((gamma2 - gamma1) * s_q, -lam / (4 * math.pi)), lam)


def deep_collector_sensitivity(z):
    """Energy sensitivity (units of hbar) for a deep collector, any asymmetry."""
    z = np.asarray(z, dtype=float)
    out = 0.5 * np.sqrt((1 + z * z) ** 2 * _arc(z) ** 2 - z * z)
    return float(out) if out.ndim == 0 else out


SWEEP_COLUMNS = ["z", "s_i", "s_q", "re_s_iq", "lambda", "eps_over_hbar", "snr"]


def sensitivity_sweep(gamma1: float, gamma2: float, z_grid) -> np.ndarray:
    """Rows ``(z, S_I, S_Q, Re S_IQ, lambda, eps/hbar, R)`` from the closed forms."""
    rows = []
    for z in z_grid:
        nq = deep_collector_quartet(gamma1, gamma2, float(z))
        rows.append([float(z), nq.s_i, nq.s_q, nq.s_iq.real, nq.lam,
                     energy_sensitivity_from(nq), signal_to_noise_from(nq)])
    return np.array(rows, dtype=float).reshape(-1, len(SWEEP_COLUMNS))


@dataclass(frozen=True)
class QuantumLimitResiduals:
    product: float      # |S_I S_Q - |S_IQ|^2| / max(S_I S_Q, |S_IQ|^2)
    imaginary: float    # |Im S_IQ + lambda/4pi| / |lambda/4pi|
    sensitivity: float  # energy sensitivity from the kernels, units of hbar
    snr: float


def pointwise_quantum_limit(p: DetectorParams, nu: float) -> QuantumLimitResiduals:
    """Quantum-limit identities of the zero-temperature kernels at energy ``nu``.

    The kernels are evaluated in exact rational arithmetic on the (binary)
    input values. ``S_I S_Q - (Re S_IQ)^2`` is badly conditioned where the
    response vanishes, so float evaluation would measure rounding rather
    than the identities.
    """
    g1, g2, eps, x = (Fraction(v) for v in (p.gamma1, p.gamma2, p.eps_level, nu))
    s_q, s_i, re, im, lam = reduced_kernels(g1, g2, eps, x)
    prod, mod2 = s_i * s_q, re * re + im * im
    scale = max(prod, mod2)
    # at nu = eps with gamma1 = gamma2 every kernel but S_Q vanishes
    product = float(abs(prod - mod2) / scale) if scale else 0.0
    quarter = lam / 4
    imaginary = float(abs(im + quarter) / abs(quarter)) if lam else float(abs(im))
    if lam == 0:
        return QuantumLimitResiduals(product, imaginary, math.inf, 0.0)
    excess = prod - re * re
    # reduced units: eps/hbar = 2 sqrt(excess)/|lam|, R = lam^2 / (4 S_I S_Q)
    sensitivity = 2 * math.sqrt(excess / (lam * lam)) if excess > 0 else 0.0
    snr = float(lam * lam / (4 * prod))
    return QuantumLimitResiduals(product, imaginary, sensitivity, snr)
