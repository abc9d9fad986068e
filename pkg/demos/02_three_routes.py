"""
=============================================
Analytic, master-equation and Monte-Carlo rates
=============================================

The same CPMG dephasing rate computed three independent ways: the closed
form, the Lindblad master equation with instantaneous pulses, and the
stochastic resonator-trajectory ensemble.  About a minute on one core.
"""

# %%
# Setup
# -----

import numpy as np

from cpmg_shotnoise import analytic as an
from cpmg_shotnoise import lindblad as lb
from cpmg_shotnoise import trajectory as tr
from cpmg_shotnoise.core import CpmgSchedule, DriveSpec, ResonatorQubitParams

params = ResonatorQubitParams.from_lab_units(19.4, 5.7)
drive = DriveSpec.thermal(1e-3)
f_s = np.array([2.0, 5.0, 12.5]) * 1e6

# %%
# Rates
# -----
# The Monte-Carlo error bar is a block jackknife over the ensemble.

ana = an.gamma_thermal(0.5 / f_s, 1e-3, params)
lind = lb.lindblad_rate_curve(params, drive, f_s)
print(f"{'f_s [MHz]':>10} {'analytic':>10} {'Lindblad':>10} {'MC':>18}")
for i, f in enumerate(f_s):
    est, _ = tr.simulate_rate(params, drive, 0.5 / f, ensemble_size=20_000, seed=i)
    print(f"{f / 1e6:10.2f} {ana[i]:10.1f} {lind[i]:10.1f} {est.gamma:10.1f} +- {est.sigma:5.1f}")

# %%
# Coherence trace
# ---------------
# After a short transient the coherence decays exponentially; the rate
# is the slope of ln C over kappa t in [4, 12].

trace = lb.cpmg_experiment(params, drive, CpmgSchedule(12, 0.5 / f_s[1]))
for t, c in zip(trace.t_cpmg, trace.coherence):
    print(f"t = {t * 1e9:7.1f} ns   C = {c:.6f}")
