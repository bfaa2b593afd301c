"""Chromatic collimating lens: exact trace, small-angle forms, and the
beamformed radiation pattern.

The lens collimates the peak wavelength exactly; other wavelengths keep
a residual angle of departure that broadens the beam.
"""

import math

from oisac import optics
from oisac.channel import lambertian_pattern

disp = optics.inverse_wavelength_dispersion(n0=1.4, lam0=450e-9)
limit = optics.collimation_limit(1.4)
print(f"Collimation domain: |AoE| <= {limit:.4f} rad")

print("\nPeak wavelength is collimated exactly:")
for phi in (0.1, 0.3, 0.6):
    print(f"  AoE {phi:.1f} -> AoD {optics.trace_exact_aod(phi, 450e-9, disp):+.1e}")

print("\nResidual AoD at 420 nm (exact trace vs small-angle form):")
print(f"{'AoE':>6} {'exact':>10} {'approx':>10} {'rel err':>8}")
for phi in (0.05, 0.1, 0.2, 0.3):
    exact = optics.trace_exact_aod(phi, 420e-9, disp)
    approx = optics.lemma2_aod_approx(phi, 420e-9, disp)
    print(f"{phi:>6.2f} {exact:>10.5f} {approx:>10.5f} {abs(approx - exact) / abs(exact):>8.1%}")

spectrum = optics.gaussian_spectrum(fwhm=10e-9)
beam = optics.beamformed_pattern(spectrum, disp, num_phi=512)
lam = lambertian_pattern(math.pi / 3)
print("\nRadiation pattern R(phi), bare LED vs collimated (10 nm FWHM):")
for phi in (0.0, 0.02, 0.05, 0.1, 0.3):
    print(
        f"  phi={phi:0.2f}: lambertian {float(lam.evaluate(phi)):.4f}  "
        f"beamformed {float(beam.evaluate(phi)):.4f}"
    )
power = beam.hemisphere_power()
print(f"\nHemisphere power of the printed beam pattern: {power:.4f} "
      f"(renormalized to 1 for channel use)")
