"""Near-field versus far-field array responses.

A 32 x 32 RIS at half-wavelength spacing is about 1.6 m wide at 3 GHz, so
its Fraunhofer distance is roughly 100 m. Scatterers at 10-20 m are well
inside it, and the spherical wavefront no longer looks like a plane wave.
"""

import numpy as np

from risnf import ArrayConfig, Role, ScattererLocation, SystemConfig, nearfield_response

system = SystemConfig(3e9)
ris = ArrayConfig.from_wavelengths(Role.RIS, 32, 32, 0.5, system)
aperture = np.hypot(32, 32) * 0.5 * system.wavelength
print(f"wavelength {system.wavelength:.4f} m, aperture diagonal {aperture:.2f} m, "
      f"Fraunhofer distance {2 * aperture ** 2 / system.wavelength:.1f} m")

direction = (np.deg2rad(20.0), np.deg2rad(10.0))
far = nearfield_response(system, ris, ScattererLocation(*direction, 1e9))
for d in (5.0, 15.0, 50.0, 500.0):
    near = nearfield_response(system, ris, ScattererLocation(*direction, d))
    # correlation with the plane-wave response; 1 means indistinguishable
    match = abs(np.vdot(far, near)) / ris.total
    print(f"  d = {d:6.1f} m: |<far, near>| / K = {match:.3f}")

# a near-field array can tell two scatterers apart along the same direction
a = nearfield_response(system, ris, ScattererLocation(*direction, 10.0))
b = nearfield_response(system, ris, ScattererLocation(*direction, 20.0))
print(f"same direction, 10 m vs 20 m: |<a, b>| / K = {abs(np.vdot(a, b)) / ris.total:.3f}")
