"""
roundtrip_sweep.py

Compute the spectral data of a few test potentials once, then reconstruct
sigma from the first N + 1 terms for a doubling sequence of N, and print
the L2 error and the condition number of the main equation for each.
"""
import numpy as np

import spectralmap as sm


"""
Cells of the x-grid on [0, pi].
"""
cells = 200


"""
The values of N to reconstruct from. The forward computation produces
max(N) + 1 terms.
"""
truncations = [5, 10, 20, 40]


"""
The boundary parameter used for every potential.
"""
H = 0.2


"""
The test potentials sigma, as functions of x.
"""
potentials = {
    'constant': lambda x: np.full_like(x, 0.5),
    'sine': lambda x: 0.3 * np.sin(x),
    'step': lambda x: np.where(x < np.pi / 2, 0.0, 1.0),
}


grid = sm.RealGrid.uniform(cells)

for name, f in potentials.items():
    sigma = sm.PotentialSigma.from_function(grid, f)
    data = sm.spectral_data(sigma, H, max(truncations) + 1)
    print(f"{name}:")
    for N in truncations:
        result = sm.solve_inverse_problem(data, N, grid)
        err = sm.sigma_l2_distance(result.sigma, sigma)
        print(f"  N = {N:3d}  sigma error {err:.3e}  "
              f"H error {abs(result.H - H):.3e}  "
              f"cond {result.diagnostics['cond_max']:.2e}")
