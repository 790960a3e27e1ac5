"""
From an estimation error to a detection test
============================================

If the cumulant can be estimated to within d_est while the signal has norm
d_det, any norm approximation with distortion rho * zeta below
d_det / (4 d_est) yields a threshold test.  Here we measure both sides and
check that thresholds inside the predicted window do separate H0 from H1.
"""

import numpy as np

from tensorgap import PlantedConfig
from tensorgap.harness import (
    detection_experiment,
    error_rates,
    estimate_error_distribution,
    framework_bound,
    separation_window,
    statistic_ratios,
)

cfg = PlantedConfig(p=3, n=20000, a=3.0, seed=11)
gap = estimate_error_distribution(cfg, reps=100, d_est_level=0.95)
print("d_det (population norm):", gap.d_det_proxy)
print("d_est (0.95 quantile of the upper-certificate error):", gap.d_est)
print("distortion any approximation must exceed to be useless:", framework_bound(gap.d_det_proxy, gap.d_est))

# %%
rho, zeta = statistic_ratios("unfold", cfg.p, cfg.d)
window = separation_window(rho, zeta, gap.d_est, gap.d_det_proxy)
print("rho, zeta =", rho, zeta, " window =", window)

# %%
det = detection_experiment(cfg, "unfold", reps=100)
print("best error sum", det.best_sum, "at tau", det.best_tau)
if window is not None:
    taus = np.linspace(*window, 5)
    t1, t2 = error_rates(det.stats_h0, det.stats_h1, taus)
    for tau, e1, e2 in zip(taus, t1, t2):
        print(f"tau={tau:.3f}  type I {e1:.2f}  type II {e2:.2f}")

# %%
# With no signal nothing separates.
null = detection_experiment(cfg.replace(a=0.0), "unfold", reps=100)
print("a=0 best error sum", null.best_sum)
