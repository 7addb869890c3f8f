"""Local and global observables in a finite cavity.

The sum of interaction, atomic and field energies is constant after the
quench, while each piece oscillates.  Their long-time values do not return to
the static ones at the new position; the excess is the work done by the quench.
"""
import math

import numpy as np

from cpquench import PhysicalConfig, modesum

cfg = PhysicalConfig.on_axis(1.3e-7, 1.0e-7)      # move from 130 nm to 100 nm
grid = modesum.build_mode_grid(1.0e-6, 12)       # 1 um cube, 3888 modes
print(f"{len(grid)} modes, k_max = {grid.k_max:.3e} 1/m")

ts = np.linspace(0.0, 20 * 2 * math.pi / cfg.omega0, 9)
ei = modesum.interaction_energy(ts, cfg, grid)
ea = modesum.atomic_energy(ts, cfg, grid)
ef = modesum.field_energy(ts, cfg, grid)
for row in zip(ts, ei, ea, ef, ei + ea + ef):
    print("t = {:.3e} s  E_I = {:+.6e}  E_A = {:+.6e}  E_F = {:+.6e}  total = {:+.12e}".format(*row))

static = modesum.static_references(cfg, grid)
inf = modesum.asymptotic_values(cfg, grid)
work = modesum.quench_work(cfg, grid)
print("atomic: long-time - static =", f"{inf.E_A_inf - static.E_A_stat:.6e}", " quench work =", f"{work['atomic']:.6e}")
print("field:  long-time - static =", f"{inf.E_F_inf - static.E_F_stat:.6e}", " quench work =", f"{work['field']:.6e}")
