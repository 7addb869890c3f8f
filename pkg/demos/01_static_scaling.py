"""Static Casimir-Polder energy against distance.

Close to the wall (chi0 = 2 k0 z << 1) the energy falls like z^-3, far from it
(chi0 >> 1) like z^-4.  The local log-log slope shows the crossover.
"""
import numpy as np

from cpquench import PhysicalConfig, static_cp

k0 = 5.0e7                      # m^-1, transition wavenumber
zs = np.geomspace(1e-10, 1e-4, 13)
energy = np.array([static_cp(PhysicalConfig.on_axis(z, z, k0=k0)) for z in zs])
slope = np.gradient(np.log(np.abs(energy)), np.log(zs))

print(f"{'z (m)':>10} {'chi0':>10} {'E (J)':>12} {'slope':>8}")
for z, e, s in zip(zs, energy, slope):
    print(f"{z:10.2e} {2 * k0 * z:10.2e} {e:12.4e} {s:8.3f}")

# the ends of the table sit in the two limiting regimes
print("near-zone slope", round(slope[0], 3), " far-zone slope", round(slope[-1], 3))
