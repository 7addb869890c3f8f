r"""Continuum-limit energies of the quenched atom near a perfect mirror.

The boundary (Casimir-Polder) part of the interaction energy is

    E_CP(t) = lam^2/2 * (mu_l mu_m / pi) sigma_lp [ F^{Rb}_pm (1/Rb) \int dk sin(k Rb)/(k+k0) (1 - cos(ct(k+k0)))
                                                   + F^{Rb'}_pm (1/Rb') \int dk sin(k Rb')/(k+k0) cos(ct(k+k0)) ]

with ``F_lm = -delta_lm nabla^2 + nabla_l nabla_m``.  Two evaluation routes are
provided and must agree:

* :func:`cp_closed_form` writes the contracted kernel as a q-derivative
  operator acting on ``\int sin(q chi) W(chi)/(chi+chi0) dchi``, splits the
  weight ``W`` by product-to-sum into :func:`halfline_sine` terms and
  differentiates those analytically.
* :func:`boundary_energy_oracle` contracts the explicit dyadic kernel
  :func:`dyadic_kernel` numerically and integrates with
  :func:`cpquench.quadrature.integrate_halfline`.

For an atom on the wall normal, ``R^3 sigma:F sin(kR)/R = -2 D_q sin(q kR)`` at
``q = 1`` with ``D_q = 2 - 2 d/dq + d^2/dq^2``; off-axis image vectors add a
term proportional to ``1 - n_z^2``.  Every integral is understood in the Abel
(exponentially regularised) sense.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import exp1

from . import quadrature as quad
from .core import (
    C_SI, CM_PER_M, ERG, SIGMA, EnergySample, Method, PhysicalConfig, Regime,
    classify, derive_geometry, reduce,
)
from .errors import ConvergenceError, DivergenceError, DomainError, WindowError
from .specfun import aux_fg

__all__ = [
    "DyadicKernel", "CpEnergyCurve", "FreeSpaceTerms",
    "halfline_sine", "halfline_sine_jet", "dq_apply", "dyadic_kernel",
    "dyadic_components", "boundary_energy_oracle", "cp_closed_form",
    "static_cp", "free_space_shift", "free_space_terms", "sweep_cp",
]

_ISOTROPIC = np.eye(3) / 3.0

# regulator schedule for the oracle, in units of the slowest frequency present
ORACLE_ETAS = tuple(0.2 * 0.5**i for i in range(7))
# error estimate required of each term, relative to the larger of the two terms
ORACLE_RTOL = 1e-5


# --------------------------------------------------------------------------
# half-line sine integrals

def _is_multiple_of_pi(c: float) -> bool:
    return abs(math.remainder(c, math.pi)) <= 1e-15 * max(1.0, abs(c))


def halfline_sine_jet(b: float, c: float, chi0: float) -> np.ndarray:
    """``[H, dH/db, d2H/db2]`` for ``H(b) = int_0^inf sin(b chi + c)/(chi + chi0) dchi``.

    With ``u = b chi0`` and the auxiliary functions ``f, g``::

        H   = cos(c) f(u) + sin(c) g(u)
        H'  = chi0 (sin(c) f(u) - cos(c) g(u)) - sin(c)/b
        H'' = -chi0^2 H + chi0 cos(c)/b + sin(c)/b^2

    The derivatives are the Abel values of ``int chi cos(...)/(...)`` and
    ``-int chi^2 sin(...)/(...)``.  Negative ``b`` is mapped through
    ``H(b, c) = -H(-b, -c)``.
    """
    if not chi0 > 0:
        raise DomainError("chi0 must be > 0")
    if not math.isfinite(b):
        raise DomainError("b must be finite")
    if b == 0:
        raise DivergenceError(f"q-derivatives diverge at zero frequency (b=0, c={c!r})")
    if b < 0:
        h0, h1, h2 = halfline_sine_jet(-b, -c, chi0)
        return np.array([-h0, h1, -h2])
    f, g = aux_fg(b * chi0)
    sc, cc = math.sin(c), math.cos(c)
    h0 = cc * f + sc * g
    h1 = chi0 * (sc * f - cc * g) - sc / b
    h2 = -chi0 * chi0 * h0 + chi0 * cc / b + sc / (b * b)
    return np.array([h0, h1, h2])


def halfline_sine(b: float, c: float, chi0: float) -> float:
    """``int_0^inf sin(b chi + c)/(chi + chi0) dchi`` for ``chi0 > 0``."""
    if not chi0 > 0:
        raise DomainError("chi0 must be > 0")
    if b == 0:
        if _is_multiple_of_pi(c):
            return 0.0
        raise DivergenceError(f"integral diverges logarithmically for b=0, c={c!r}")
    return float(halfline_sine_jet(b, c, chi0)[0])


def dq_apply(F: Callable[[float], tuple] | tuple) -> float:
    """``(2 - 2 d/dq + d^2/dq^2) F`` at ``q = 1``.

    ``F`` is either the triple ``(F(1), F'(1), F''(1))`` or a callable
    returning that triple when given ``q``.
    """
    v0, v1, v2 = F(1.0) if callable(F) else F
    return 2.0 * v0 - 2.0 * v1 + v2


def _kernel_integral(jet, nz: float) -> float:
    """``int K_n(chi) W/(chi+chi0)`` from the q-jet of ``int sin(q chi) W/(chi+chi0)``.

    ``K_n = 2 n^2 chi^2 sin(chi) + (6 n^2 - 2)(chi cos(chi) - sin(chi))``;
    for ``n = 1`` this is ``-2 D_q``.
    """
    j0, j1, j2 = jet
    off_axis = 1.0 - nz * nz
    return -2.0 * dq_apply((j0, j1, j2)) + 2.0 * off_axis * (j2 - 3.0 * j1 + 3.0 * j0)


# --------------------------------------------------------------------------
# dyadic kernel

@dataclass(frozen=True)
class DyadicKernel:
    """``(-delta nabla^2 + nabla nabla) sin(kR)/R``; units of m^-3 for SI inputs."""

    components: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.components))


def dyadic_components(k, Rvec) -> np.ndarray:
    """Vectorised over ``k``; returns an array of shape ``k.shape + (3, 3)``.

    Closed form
    ``(delta - RR) k^2 sin(kR)/R + (delta - 3 RR)(k cos(kR)/R^2 - sin(kR)/R^3)``.
    """
    Rvec = np.asarray(Rvec, dtype=float)
    R = float(np.linalg.norm(Rvec))
    if R == 0:
        raise DomainError("dyadic kernel is degenerate at R = 0; use the small-R limit")
    n = Rvec / R
    nn = np.outer(n, n)
    eye = np.eye(3)
    k = np.asarray(k, dtype=float)
    kr = k * R
    sn, cs = np.sin(kr), np.cos(kr)
    transverse = (k * k * sn / R)[..., None, None]
    # x cos x - sin x loses all digits for tiny x; switch to its series there
    small = np.abs(kr) < 1e-2
    x2 = kr * kr
    near = np.where(small, -kr * x2 / 3.0 * (1.0 - x2 / 10.0 + x2 * x2 / 280.0),
                    kr * cs - sn)
    longitudinal = (near / R**3)[..., None, None]
    return (eye - nn) * transverse + (eye - 3.0 * nn) * longitudinal


def dyadic_kernel(k: float, Rvec) -> DyadicKernel:
    return DyadicKernel(np.asarray(dyadic_components(k, Rvec), dtype=float))


# --------------------------------------------------------------------------
# energies

def _prefactor_J(cfg: PhysicalConfig, R_m: float) -> float:
    """``lam^2/2 * mu^2 / (pi R^3)`` converted from erg to J."""
    mu = cfg.dipole_moment
    R_cm = R_m * CM_PER_M
    return cfg.lam2 * 0.5 * mu * mu / (math.pi * R_cm**3) * ERG


def _nz(vec) -> float:
    v = np.asarray(vec, dtype=float)
    return float(v[2] / np.linalg.norm(v))


def _check_window(cfg, t, allow_window):
    if t < 0:
        raise DomainError("t must be >= 0")
    if not allow_window and classify(cfg, t) is Regime.EXCLUDED_WINDOW:
        g = derive_geometry(cfg)
        raise WindowError(
            f"c t = {C_SI * t:.6e} m lies within {cfg.delta_lc} Rbar of a light cone "
            f"(Rbar = {g.Rbar:.6e} m, Rbar' = {g.Rbarp:.6e} m)")


def static_cp(cfg: PhysicalConfig) -> float:
    """Long-time (equilibrium) Casimir-Polder energy at the new position, in J."""
    g = derive_geometry(cfg)
    chi0 = cfg.k0 * g.Rbar
    T = _kernel_integral(halfline_sine_jet(1.0, 0.0, chi0), 1.0)
    return _prefactor_J(cfg, g.Rbar) * T / 3.0


def _closed_form_terms(cfg: PhysicalConfig, t: float) -> tuple[float, float]:
    """Dimensionless integrals of the two boundary terms (before 1/(3R^3) weights)."""
    g = derive_geometry(cfg)
    ra = reduce(cfg, t)
    a, ab = ra.a, ra.abar
    chi0, chib0 = ra.chi0, ra.chibar0
    q = ra.q
    jet1 = (halfline_sine_jet(q, 0.0, chi0)
            - 0.5 * halfline_sine_jet(q + a, a * chi0, chi0)
            - 0.5 * halfline_sine_jet(q - a, -a * chi0, chi0))
    jet2 = (0.5 * halfline_sine_jet(q + ab, ab * chib0, chib0)
            + 0.5 * halfline_sine_jet(q - ab, -ab * chib0, chib0))
    T1 = _kernel_integral(jet1, _nz(g.Rbar_vec))
    T2 = _kernel_integral(jet2, _nz(g.Rbarp_vec))
    return T1, T2


def cp_closed_form(t: float, cfg: PhysicalConfig, allow_window: bool = False) -> float:
    """Dynamical Casimir-Polder energy (J) through the special-function route."""
    _check_window(cfg, t, allow_window)
    g = derive_geometry(cfg)
    T1, T2 = _closed_form_terms(cfg, t)
    return (_prefactor_J(cfg, g.Rbar) * T1 + _prefactor_J(cfg, g.Rbarp) * T2) / 3.0


@dataclass(frozen=True)
class OracleTerm:
    value: float          # dimensionless integral
    err_estimate: float
    converged: bool


def _oracle_term(Rvec, chi0, a, weight, dipole_tensor, panel_tolerance, eta_schedule) -> OracleTerm:
    R = float(np.linalg.norm(Rvec))
    M = SIGMA.T @ dipole_tensor     # sum_lm M_lm sigma_lp K_pm = sum_pm (sigma^T M)_pm K_pm

    def integrand(x):
        K = dyadic_components(x / R, Rvec) * R**3
        contracted = np.einsum("pm,...pm->...", M, K)
        if weight == "one_minus_cos":
            # 2 sin^2(theta/2) avoids the cancellation of 1 - cos at small a
            w = 2.0 * np.sin(0.5 * a * (x + chi0)) ** 2
        else:
            w = np.cos(a * (x + chi0))
        return contracted * w / (x + chi0)

    if weight == "one_minus_cos" and a == 0:
        return OracleTerm(0.0, 0.0, True)
    freqs = [1.0] if a == 0 else [1.0, abs(1.0 - a), 1.0 + a]
    if weight == "cos" and a != 0:
        freqs = [abs(1.0 - a), 1.0 + a]
    slow = min(f for f in freqs if f > 0) if any(f > 0 for f in freqs) else 1.0
    if any(f == 0 for f in freqs):
        raise DivergenceError("oracle integrand has a zero-frequency component (light cone)")
    spec = quad.OscIntegralSpec(
        integrand, frequency=max(freqs), eta_schedule=eta_schedule,
        eta_scale=slow, panel_tolerance=panel_tolerance)
    res = quad.integrate_halfline(spec)
    # convergence is judged by the caller against the scale of both terms
    return OracleTerm(res.value, res.err_estimate, bool(np.isfinite(res.value)))


def boundary_energy_oracle(t: float, cfg: PhysicalConfig, *, allow_window: bool = False,
                           dipole_tensor=None, panel_tolerance: float = 1e-10,
                           eta_schedule=ORACLE_ETAS, strict: bool = True,
                           return_terms: bool = False):
    """Dynamical Casimir-Polder energy (J) from the dyadic kernel and quadrature.

    ``dipole_tensor`` is ``<mu_l mu_m>/mu^2``; the default is the isotropic
    ``delta/3``.  With ``strict`` a non-converged quadrature raises
    :class:`ConvergenceError`.
    """
    _check_window(cfg, t, allow_window)
    g = derive_geometry(cfg)
    ra = reduce(cfg, t)
    M = _ISOTROPIC if dipole_tensor is None else np.asarray(dipole_tensor, dtype=float)
    t1 = _oracle_term(np.array(g.Rbar_vec), ra.chi0, ra.a, "one_minus_cos", M,
                      panel_tolerance, eta_schedule)
    t2 = _oracle_term(np.array(g.Rbarp_vec), ra.chibar0, ra.abar, "cos", M,
                      panel_tolerance, eta_schedule)
    # a term that is small compared with the other only needs absolute accuracy
    scale = max(abs(t1.value), abs(t2.value))
    t1, t2 = (OracleTerm(term.value, term.err_estimate,
                         term.converged and term.err_estimate <= ORACLE_RTOL * scale)
              for term in (t1, t2))
    if strict and not (t1.converged and t2.converged):
        raise ConvergenceError(
            f"quadrature oracle did not converge at t={t!r}: "
            f"term errors {t1.err_estimate:.3e}, {t2.err_estimate:.3e}")
    energy = _prefactor_J(cfg, g.Rbar) * t1.value + _prefactor_J(cfg, g.Rbarp) * t2.value
    if return_terms:
        return energy, (t1, t2)
    return energy


# --------------------------------------------------------------------------
# free-space (time-dependent Lamb-shift-like) term

def _laplace_moments(sigma: complex, nmax: int = 3) -> list[complex]:
    """``l_n(sigma) = int_0^inf u^n exp(-sigma u)/(u + 1) du`` for n = 0..nmax, Re sigma > 0."""
    l0 = complex(np.exp(sigma) * exp1(sigma))
    out = [l0]
    fact = 1.0
    for n in range(1, nmax + 1):
        out.append(fact / sigma**n - out[-1])
        fact *= n
    return out


@dataclass(frozen=True)
class FreeSpaceTerms:
    """Pieces of the free-space term, all in J.

    ``cutoff_term`` is the ``k^3`` integral and carries the UV cutoff; the
    ``R'`` term is finite for ``R' > 0`` but evaluated with the same cutoff so
    that it recombines with the first term as ``R' -> 0``.
    """

    cutoff_term: float
    rprime_term: float
    k_cutoff: float
    small_rprime_limit: bool

    @property
    def total(self) -> float:
        return self.cutoff_term + self.rprime_term


def free_space_terms(t: float, cfg: PhysicalConfig, k_cutoff: float,
                     eps_R: float = 1e-15) -> FreeSpaceTerms:
    if not k_cutoff > cfg.k0:
        raise DomainError("k_cutoff must exceed k0")
    if t < 0:
        raise DomainError("t must be >= 0")
    g = derive_geometry(cfg)
    mu = cfg.dipole_moment
    k0_cm = cfg.k0 / CM_PER_M
    # work in u = k/k0: int k^n ... dk = k0^n l_n
    s_c = cfg.k0 / k_cutoff
    tau = C_SI * t * cfg.k0          # c t k0 = omega0 t
    phase = np.exp(1j * tau)
    pref = -4.0 * mu * mu / (3.0 * math.pi) * cfg.lam2 * ERG
    l3_static = _laplace_moments(complex(s_c))[3]
    l3_t = _laplace_moments(complex(s_c, -tau))[3]
    cut = pref * k0_cm**3 * (l3_static - (phase * l3_t).real).real
    small = g.Rp < eps_R
    if small:
        rp = pref * k0_cm**3 * (phase * l3_t).real
    else:
        x = cfg.k0 * g.Rp                # k0 R'
        acc = 0.0
        for beta, ph in ((x + tau, tau), (x - tau, -tau)):
            l2 = _laplace_moments(complex(s_c, -beta))[2]
            acc += 0.5 * (np.exp(1j * ph) * l2).imag
        rp = pref * k0_cm**3 * acc / x
    return FreeSpaceTerms(float(cut), float(rp), k_cutoff, bool(small))


def free_space_shift(t: float, cfg: PhysicalConfig, k_cutoff: float, eps_R: float = 1e-15) -> float:
    """Free-space part of the time-dependent interaction energy (J), UV-regularised."""
    return free_space_terms(t, cfg, k_cutoff, eps_R).total


# --------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True)
class CpEnergyCurve:
    samples: list
    config_snapshot: PhysicalConfig
    static_value: float
    extra: dict = field(default_factory=dict)

    @property
    def t(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def energy(self) -> np.ndarray:
        return np.array([s.energy for s in self.samples])

    @property
    def excluded(self) -> np.ndarray:
        return np.array([s.regime is Regime.EXCLUDED_WINDOW for s in self.samples])


def sweep_cp(cfg: PhysicalConfig, t_min: float, t_max: float, n_points: int) -> CpEnergyCurve:
    """Uniform-in-time closed-form sweep; window samples are kept and flagged."""
    if not (0 <= t_min < t_max):
        raise DomainError("need 0 <= t_min < t_max")
    if n_points < 2:
        raise DomainError("n_points must be >= 2")
    g = derive_geometry(cfg)
    samples = []
    for t in np.linspace(t_min, t_max, int(n_points)):
        t = float(t)
        regime = classify(cfg, t)
        try:
            e = cp_closed_form(t, cfg, allow_window=True)
        except DivergenceError:
            e = float("nan")
        samples.append(EnergySample(t, C_SI * t / g.Rbar, e, regime, Method.CLOSED_FORM))
    return CpEnergyCurve(samples, cfg, static_cp(cfg))
