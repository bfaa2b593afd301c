"""Walk through the optical channel model.

Builds the default four-O-AP room, evaluates the Lambertian link budget
at a few floor positions, and prints the per-PD channel gains a device
would see.
"""

import numpy as np

from oisac.channel import (
    compute_channel_state,
    floor_intensity_map,
    lambertian_pattern,
    received_intensity,
)
from oisac.harness import phase1_scenario

sc = phase1_scenario()
pattern = lambertian_pattern(sc.semi_angle)

print("Room:", sc.room_w, "x", sc.room_l, "x", sc.room_h, "m")
print("O-AP ceiling positions:")
print(np.round(sc.oap_positions, 3))

print("\nReceived intensity from O-AP 0 along a floor radius:")
for x in (0.0, 0.5, 1.0, 1.5, 2.0, 2.4):
    val = float(received_intensity(sc, pattern, 0, np.array([x, 0.0, 0.0])))
    print(f"  x = {x:4.1f} m  ->  {val:.3e}")

print("\nSuperposed floor intensity (16x16 midpoint grid):")
xs, ys, I = floor_intensity_map(sc, pattern, 16)
print(f"  min {I.min():.3e}, max {I.max():.3e}, mean {I.mean():.3e}")

state = compute_channel_state(sc, pattern, (0.3, -0.2, 0.0))
print("\nChannel gains h[m, k] for a device at (0.3, -0.2, 0):")
print(np.format_float_scientific(state.gains.sum(), precision=3))
print("  per-PD totals:", np.round(state.gains.sum(axis=0) * 1e8, 3), "x 1e-8")
print("  path delays (ns):", np.round(state.delays[:, 0] * 1e9, 2))
