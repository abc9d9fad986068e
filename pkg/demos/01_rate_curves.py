"""
=============================================
Photon shot-noise rates under CPMG
=============================================

Analytic dephasing rates as a function of the CPMG frequency f_s for
thermal and coherent photons, compared with the Gaussian filter-function
estimate.  Run with ``python demos/01_rate_curves.py``.
"""

# %%
# Parameters
# ----------
# kappa = 1/(19.4 ns), 2 chi = 2 pi x 5.7 MHz, so 2 chi / kappa is about 1.2.

import numpy as np

from cpmg_shotnoise import analytic as an
from cpmg_shotnoise.core import ResonatorQubitParams

params = ResonatorQubitParams.from_lab_units(19.4, 5.7)
print(f"2 chi / kappa = {params.ratio:.3f}")

f_s = np.geomspace(0.1e6, 12.5e6, 9)
dt = 0.5 / f_s

# %%
# Thermal photons
# ---------------
# The low-frequency rate is reached for long periods; fast pulsing
# suppresses it by the reduction factor R_th.

n_th = 1e-3
exact = an.gamma_thermal(dt, n_th, params)
gauss = an.gamma_filterfunction(dt, n_th, params, "thermal")
print(f"\nlow-frequency rate: {an.gamma_lowfreq_thermal(n_th, params):.4g} 1/s")
print(f"{'f_s [MHz]':>10} {'R_th':>8} {'Gamma [1/s]':>12} {'filter fn':>12}")
for f, d, g, gf in zip(f_s, dt, exact, gauss):
    print(f"{f / 1e6:10.3f} {an.reduction_factor_thermal(d, params):8.4f} {g:12.4g} {gf:12.4g}")

# %%
# The filter-function estimate misses the saturation factor 1/(1 + (2chi/kappa)^2)
# and is only reliable for weak coupling.

weak = params.with_chi(0.025 * params.kappa)
ratio = an.gamma_filterfunction(dt, n_th, weak) / an.gamma_thermal(dt, n_th, weak)
print(f"\nfilter fn / exact at 2chi/kappa = 0.05: {ratio.min():.4f} .. {ratio.max():.4f}")

# %%
# Coherent photons
# ----------------
# With a resonant drive the reduction factor can exceed one when the
# coupling is strong: pulsing then increases dephasing.

strong = ResonatorQubitParams(1.0, 1.0)  # 2 chi / kappa = 2
kdt = np.geomspace(0.1, 100, 7)
print("\nR_coh at 2chi/kappa = 2:", np.round(an.reduction_factor_coherent(kdt, strong), 4))
