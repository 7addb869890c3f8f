"""Time dependence of the boundary energy after a sudden move towards the wall.

The atom starts dressed at z0 = 100.1 nm and is moved to z = 100 nm.  The
energy is evaluated in two independent ways (special functions and direct
quadrature of the dyadic kernel) and compared; then the long-time average is
compared with the static value at the new position.
"""
import math

import numpy as np
from scipy import integrate

from cpquench import PhysicalConfig, boundary_energy_oracle, cp_closed_form, derive_geometry, static_cp
from cpquench.core import C_SI

cfg = PhysicalConfig()           # mu = 6.31e-30 C m, k0 = 5e7 1/m, z0 = 100.1 nm, z = 100 nm
g = derive_geometry(cfg)
static = static_cp(cfg)
print(f"Rbar = {g.Rbar:.4e} m, static energy = {static:.4e} J")


def t_of(x):
    return x * g.Rbar / C_SI     # time at which c t = x Rbar


# both routes, normalised by the static value
for x in (0.1, 0.5, 0.9, 1.2, 2.0, 3.0):
    cf = cp_closed_form(t_of(x), cfg)
    orc = boundary_energy_oracle(t_of(x), cfg)
    print(f"ct/Rbar = {x:4.2f}  E/static = {cf / static:+.6f}  |closed - oracle|/|static| = {abs(cf - orc) / abs(static):.1e}")

# approach to the light cone from below: the magnitude peaks just before it
xs = np.linspace(0.7, 0.98, 15)
ratios = [cp_closed_form(t_of(x), cfg) / static for x in xs]
print("approach to ct = Rbar:", " ".join(f"{r:+.2f}" for r in ratios))

# one-period running average far past the cone
period = 2 * math.pi / (cfg.k0 * g.Rbar)
xs = np.linspace(20.0 - period, 20.0, 401)
e = np.array([cp_closed_form(t_of(x), cfg) for x in xs])
avg = integrate.simpson(e, x=xs) / period
print(f"running average at ct = 20 Rbar: {avg / static:.10f} x static")
