"""
Blood-phase transients and the memory kernel
============================================

The three blood cell problems (initial datum, exterior temperature, source)
are marched with implicit Euler.  The kernel is the interface flux rate of the
exterior-temperature response; its integral recovers the effective exchange
coefficient once the blood phase has equilibrated.
"""

import numpy as np

from bioheat_homog import InclusionSpec, TimeGrid, build_unit_cell, solve_cell_transients

cell = build_unit_cell(InclusionSpec((0.5, 0.5), (0.25, 0.25)), n=32)
tg = TimeGrid.from_final(5.0, 1000)
bundle = solve_cell_transients(cell, alpha_b=1.0, gamma=1.0, timegrid=tg)

theta, omega, sigma = bundle.theta, bundle.omega, bundle.sigma
print("max |theta + omega - 1| =", np.abs(theta + omega - 1).max())
print("1 - min omega(T) =", 1 - omega[-1].min())

###############################################################################
# Kernel decay and its integral
H = bundle.kernel.values
for t in (0.0, 0.1, 0.5, 1.0, 2.0, 5.0):
    k = int(round(t / tg.dt))
    print(f"H({t:3.1f}) = {H[k]:.5f}")
integral = tg.dt * (H.sum() - 0.5 * (H[0] + H[-1]))
gamma_eff = cell.area_Sigma / cell.vol_Y1
print(f"int H = {integral:.8f}  vs  gamma_eff = {gamma_eff:.8f}")

###############################################################################
# The source response sigma grows linearly at first, then saturates.
print("mean sigma at t = 0.1, 1, 5:", [round(float(sigma[int(t / tg.dt)].mean()), 5) for t in (0.1, 1.0, 5.0)])
