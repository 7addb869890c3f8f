"""Physical configuration, wall geometry and dimensionless reduction.

Inputs are SI.  Internally the dipole moment is carried in Gaussian units
(statC cm) because the field couplings are written in Gaussian form; lengths
are converted to cm only where an energy prefactor ``mu^2 / R^3`` is formed.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants

from .errors import ConfigError, DomainError

C_SI = constants.c                       # m/s
HBAR_SI = constants.hbar                 # J s
EV = constants.electron_volt             # J
DIPOLE_SI_TO_GAUSSIAN = 1e3 * C_SI       # C m -> statC cm (exactly 2.99792458e11)
ERG = 1e-7                               # J
CM_PER_M = 100.0
C_CGS = C_SI * CM_PER_M
HBAR_CGS = HBAR_SI / ERG

SIGMA = np.diag([1.0, 1.0, -1.0])

# Fig. 2/3 caption values
REFERENCE_MU_SI = 6.31e-30
REFERENCE_K0 = 5.0e7
REFERENCE_Z0 = 1.001e-7
REFERENCE_Z = 1.0e-7


def dipole_to_gaussian(mu_si: float) -> float:
    """Convert a dipole moment from C m to statC cm."""
    if not (mu_si > 0 and math.isfinite(mu_si)):
        raise DomainError(f"dipole moment must be positive and finite, got {mu_si!r}")
    return mu_si * DIPOLE_SI_TO_GAUSSIAN


def dipole_to_si(mu_gauss: float) -> float:
    if not (mu_gauss > 0 and math.isfinite(mu_gauss)):
        raise DomainError(f"dipole moment must be positive and finite, got {mu_gauss!r}")
    return mu_gauss / DIPOLE_SI_TO_GAUSSIAN


def reflect(v) -> np.ndarray:
    """Mirror image of a position through the wall plane z = 0."""
    return SIGMA @ np.asarray(v, dtype=float)


def _vec3(v, name):
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} must be a finite 3-vector, got {v!r}")
    return tuple(float(x) for x in arr)


@dataclass(frozen=True)
class PhysicalConfig:
    """Atom, field and geometry parameters of one quench.

    ``lam`` is the counter-rotating switch (0 selects the rotating-wave
    Hamiltonian, -1 the full one).  ``dipole_direction`` of ``None`` means an
    isotropic atom: dipole products are replaced by their orientation average
    ``mu^2/3 * delta``.
    """

    mu_si: float = REFERENCE_MU_SI
    k0: float = REFERENCE_K0
    r0: tuple = (0.0, 0.0, REFERENCE_Z0)
    r: tuple = (0.0, 0.0, REFERENCE_Z)
    lam: float = -1
    quench_duration: float | None = None
    delta_lc: float = 0.02
    ratio_threshold: float = 0.2
    dipole_direction: tuple | None = None

    def __post_init__(self):
        if not (isinstance(self.mu_si, (int, float)) and self.mu_si > 0 and math.isfinite(self.mu_si)):
            raise ConfigError(f"mu_si must be > 0, got {self.mu_si!r}")
        if not (self.k0 > 0 and math.isfinite(self.k0)):
            raise ConfigError(f"k0 must be > 0, got {self.k0!r}")
        r0 = _vec3(self.r0, "r0")
        r = _vec3(self.r, "r")
        if not r0[2] > 0 or not r[2] > 0:
            raise ConfigError("both positions must lie above the wall (z > 0)")
        if self.lam not in (0, -1):
            raise ConfigError(f"lambda must be 0 or -1, got {self.lam!r}")
        if self.quench_duration is not None and not self.quench_duration >= 0:
            raise ConfigError("quench_duration must be >= 0")
        if not self.delta_lc > 0:
            raise ConfigError("delta_lc must be > 0")
        if not self.ratio_threshold > 0:
            raise ConfigError("ratio_threshold must be > 0")
        object.__setattr__(self, "r0", r0)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "lam", int(self.lam))
        if self.dipole_direction is not None:
            d = np.array(_vec3(self.dipole_direction, "dipole_direction"))
            n = np.linalg.norm(d)
            if n == 0:
                raise ConfigError("dipole_direction must be non-zero")
            object.__setattr__(self, "dipole_direction", tuple(float(x) for x in d / n))

    @classmethod
    def on_axis(cls, z0: float, z: float, **kw) -> "PhysicalConfig":
        return cls(r0=(0.0, 0.0, z0), r=(0.0, 0.0, z), **kw)

    @property
    def dipole_moment(self) -> float:
        """Dipole moment in statC cm."""
        return dipole_to_gaussian(self.mu_si)

    @property
    def omega0(self) -> float:
        return C_SI * self.k0

    @property
    def lam2(self) -> float:
        return float(self.lam * self.lam)

    def with_(self, **changes) -> "PhysicalConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class GeometryDerived:
    Rp: float        # |r - r0|
    Rbar: float      # |r - sigma r|, atom to its own image
    Rbarp: float     # |r - sigma r0|, atom to the image of its old position
    Rp_vec: tuple
    Rbar_vec: tuple
    Rbarp_vec: tuple
    sigma: np.ndarray = field(default_factory=lambda: SIGMA.copy(), repr=False)


def derive_geometry(cfg: PhysicalConfig) -> GeometryDerived:
    r = np.array(cfg.r)
    r0 = np.array(cfg.r0)
    rp = r - r0
    rb = r - reflect(r)
    rbp = r - reflect(r0)
    return GeometryDerived(
        Rp=float(np.linalg.norm(rp)),
        Rbar=2.0 * cfg.r[2],
        Rbarp=float(np.linalg.norm(rbp)),
        Rp_vec=tuple(rp),
        Rbar_vec=tuple(rb),
        Rbarp_vec=tuple(rbp),
    )


@dataclass(frozen=True)
class ReducedArgs:
    chi0: float
    chibar0: float
    a: float
    abar: float
    q: float = 1.0


def reduce(cfg: PhysicalConfig, t: float) -> ReducedArgs:
    """Dimensionless arguments ``k0*Rbar``, ``k0*Rbar'``, ``ct/Rbar``, ``ct/Rbar'``."""
    if not t >= 0:
        raise DomainError(f"t must be >= 0, got {t!r}")
    g = derive_geometry(cfg)
    ct = C_SI * t
    return ReducedArgs(cfg.k0 * g.Rbar, cfg.k0 * g.Rbarp, ct / g.Rbar, ct / g.Rbarp)


class Regime(str, enum.Enum):
    PRE_LIGHTCONE = "pre_lightcone"
    EXCLUDED_WINDOW = "excluded_window"
    BETWEEN_CONES = "between_cones"
    POST_LIGHTCONE = "post_lightcone"


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE_ORACLE = "quadrature_oracle"
    MODE_SUM = "mode_sum"


@dataclass(frozen=True)
class EnergySample:
    t: float
    ct_over_Rbar: float
    energy: float
    regime: Regime
    method: Method

    @property
    def energy_eV(self) -> float:
        return self.energy / EV


def classify(cfg: PhysicalConfig, t: float) -> Regime:
    g = derive_geometry(cfg)
    ct = C_SI * t
    lo, hi = sorted((g.Rbar, g.Rbarp))
    if min(abs(ct - g.Rbar), abs(ct - g.Rbarp)) < cfg.delta_lc * g.Rbar:
        return Regime.EXCLUDED_WINDOW
    if ct < lo:
        return Regime.PRE_LIGHTCONE
    if ct < hi:
        return Regime.BETWEEN_CONES
    return Regime.POST_LIGHTCONE


@dataclass(frozen=True)
class ValidityReport:
    evaluated: bool
    roundtrip_ratio: float | None = None
    frequency_ratio: float | None = None
    threshold: float | None = None
    passed: bool | None = None
    status: str = "ok"

    def as_dict(self) -> dict:
        return {
            "evaluated": self.evaluated,
            "status": self.status,
            "roundtrip_ratio": self.roundtrip_ratio,
            "frequency_ratio": self.frequency_ratio,
            "threshold": self.threshold,
            "passed": self.passed,
        }


def validity_report(cfg: PhysicalConfig) -> ValidityReport:
    """Compare the quench duration with the mirror round trip and ``1/omega0``."""
    tau = cfg.quench_duration
    if tau is None:
        return ValidityReport(evaluated=False, status="not evaluated: quench_duration missing")
    roundtrip = 2.0 * cfg.r0[2] / C_SI
    r1 = tau / roundtrip
    r2 = tau * cfg.omega0
    thr = cfg.ratio_threshold
    return ValidityReport(True, r1, r2, thr, bool(r1 < thr and r2 < thr))
