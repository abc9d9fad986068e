"""
=============================================
Shaped pi-pulses of finite duration
=============================================

Raised-cosine pi-pulses in the master equation, compared with the
instantaneous-pulse formulas.  The deviation grows once the interpulse
period approaches twice the pulse length, and shrinks for shorter pulses.
"""

# %%
# Setup
# -----

import numpy as np

from cpmg_shotnoise import analytic as an
from cpmg_shotnoise import lindblad as lb
from cpmg_shotnoise.core import DriveSpec, ResonatorQubitParams

kappa = 1 / 19.4e-9
f_s = np.array([1.0, 5.0, 10.0, 12.5]) * 1e6

# %%
# Deviation from the instantaneous-pulse formulas, in percent
# ------------------------------------------------------------

for ratio in (0.7, 2.8):
    params = ResonatorQubitParams(kappa, ratio * kappa / 2)
    cases = [("thermal", DriveSpec.thermal(5e-3), an.gamma_thermal(0.5 / f_s, 5e-3, params)),
             ("coherent", DriveSpec.coherent_population(params, 5e-3), an.gamma_coherent(0.5 / f_s, 5e-3, params))]
    for name, drive, ana in cases:
        for tau in (25e-9, 10e-9):
            dev = 100 * (lb.lindblad_rate_curve(params, drive, f_s, tau) / ana - 1)
            print(f"2chi/kappa = {ratio:3.1f} {name:8s} tau = {tau * 1e9:4.0f} ns: "
                  + "  ".join(f"{d:+6.2f}" for d in dev))
print("columns: f_s =", (f_s / 1e6).tolist(), "MHz")
