"""Compare the closed-form O-AP layout against a brute-force search.

Uses coarse search steps so the script finishes in a few seconds; the
full-resolution comparison lives in the acceptance tests and the
`oisac layout` experiment.
"""

import math

from oisac.harness import RHO_I, phase1_scenario
from oisac.layout_opt import (
    area_fraction,
    grid_search_layout,
    symmetry_function_F,
    theorem1_layout,
)

for mu in (3, 4, 5):
    sc = phase1_scenario(mu=mu)
    eps, angles = theorem1_layout(sc, RHO_I)
    frac_closed = area_fraction(sc.with_layout(eps, angles), RHO_I, grid_n=256)
    res = grid_search_layout(
        sc, RHO_I, eps_step=0.1, xi0_step=0.1, grid_n=256, coarse_n=64
    )
    print(
        f"mu={mu}: closed form eps={eps:.3f} covers {frac_closed:.3f}; "
        f"coarse search best eps={res.eps:.2f}, xi0={res.xi0:.2f} "
        f"covers {res.fraction:.3f}"
    )

sc = phase1_scenario()
xi_a = -2 * math.pi / sc.num_oaps + math.pi / 4
print("\nOdd symmetry of the critical-point function about xi_a:")
for delta in (0.1, 0.3, 0.6):
    left = symmetry_function_F(xi_a - delta, sc, 1.9)
    right = symmetry_function_F(xi_a + delta, sc, 1.9)
    print(f"  delta={delta}: F(-)={left:+.3e}  F(+)={right:+.3e}  sum={left+right:+.1e}")
