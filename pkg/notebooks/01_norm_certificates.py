"""
Bracketing the spectral norm of a symmetric tensor
===================================================

Power iteration gives a value the norm is at least as large as, the mode-1
unfolding gives one it cannot exceed.  For p <= 4 a branch-and-bound search
over the sphere pins the true value down to a stated error.
"""

import numpy as np

from tensorgap import SymmetricTensor, lower_cert_power, oracle_net, upper_cert_unfold
from tensorgap.symtensor import make_rank_one, random_tensor

rng = np.random.default_rng(1)

# %%
# A rank-one tensor is the easy case: both certificates are exact.
u = np.array([1.0, -2.0, 0.5])
T = make_rank_one(0.7, u, 3)
print("exact   ", 0.7 * np.linalg.norm(u) ** 3)
print("lower   ", lower_cert_power(T, rng=rng).value)
print("upper   ", upper_cert_unfold(T).value)

# %%
# A single off-diagonal entry shows the gap.  With T[0,0,1] = 1 the form is
# 3 x0^2 x1, maximised at x0^2 = 2/3.
T = SymmetricTensor.from_entries(2, 3, {(0, 0, 1): 1.0})
lo = lower_cert_power(T, rng=rng)
up = upper_cert_unfold(T)
val, err = oracle_net(T, eps=0.01)
print(f"lower {lo.value:.10f}  oracle {val:.10f} (+/- {err:.3f})  upper {up.value:.10f}")
print("2/sqrt(3) =", 2 / np.sqrt(3), " sqrt(2) =", np.sqrt(2))
print("witness", lo.witness)

# %%
# Random tensors: the ratio upper/lower never exceeds p^((d-2)/2).
for p in (2, 3, 4, 6, 10):
    ratios = []
    for _ in range(20):
        T = random_tensor(p, 3, rng)
        ratios.append(upper_cert_unfold(T).value / lower_cert_power(T, rng=rng).value)
    print(f"p={p:2d}  max ratio {max(ratios):.3f}  ceiling {p ** 0.5:.3f}")
