"""Dynamical atom-wall Casimir-Polder energy after a sudden change of the atom's position.

Subpackages
-----------
specfun     sine/cosine integrals and auxiliary functions
quadrature  Abel-regularised half-line oscillatory integrals
core        physical configuration, geometry, regimes
contint     continuum energies: closed form and quadrature oracle
modesum     discrete cavity-mode energies and conservation checks
cli         command-line front end
"""
__version__ = "0.1.0"

from .core import PhysicalConfig, derive_geometry, reduce, classify, validity_report  # noqa: E402
from .contint import (  # noqa: E402
    boundary_energy_oracle, cp_closed_form, free_space_shift, static_cp, sweep_cp,
)
from .errors import (  # noqa: E402
    ConfigError, ConvergenceError, CPQuenchError, DivergenceError, DomainError, WindowError,
)

__all__ = [
    "PhysicalConfig", "derive_geometry", "reduce", "classify", "validity_report",
    "boundary_energy_oracle", "cp_closed_form", "free_space_shift", "static_cp", "sweep_cp",
    "ConfigError", "ConvergenceError", "CPQuenchError", "DivergenceError", "DomainError",
    "WindowError", "__version__",
]
