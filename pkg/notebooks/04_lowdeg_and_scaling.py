"""
Low-degree bound and error scaling
==================================

The degree-M likelihood-ratio bound sums terms r(m)^m; it stays near 1 when
each ratio is small.  Separately, the plug-in error shrinks like n^(-1/2)
once n is large compared with p^(d-1).
"""

from tensorgap import PlantedConfig
from tensorgap.harness import LowDegreeBoundParams, lowdeg_bound_sum, scaling_sweep
from tensorgap.planted import regime_params

print("worked case:", lowdeg_bound_sum(LowDegreeBoundParams(a=1.0, n=8, p=4, d=3, M=2, C_d=1.0)).total)

# %%
# Parameters from the hardness recipe make every ratio tiny.
for p in (10, 100, 1000):
    rp = regime_params(p)
    b = lowdeg_bound_sum(LowDegreeBoundParams(a=rp.a, n=rp.n, p=p, d=3, M=20))
    print(f"p={p:5d}  a={rp.a:.3e}  n={rp.n}  sum={b.total:.12f}  in regime: {rp.in_regime}")

# %%
rep = scaling_sweep(PlantedConfig(p=3, n=1000, a=1.0, seed=5), [1000, 4000, 16000, 64000], reps=30)
for n, med in zip(rep.n_values, rep.medians):
    print(f"n={n:6d}  median error {med:.4f}")
print("fitted slope", rep.slope)
print(rep.note)
