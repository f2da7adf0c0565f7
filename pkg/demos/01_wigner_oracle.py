# %% [markdown]
# # The exact rotation oracle
#
# Everything approximate in su2lat is scored against one reference: the
# Wigner matrix D^l(alpha, beta, gamma) built from z-y-z Euler angles.  This
# notebook pokes at it a little.

# %%
import math

import numpy as np

from su2lat import CompactState, RotationSpec, exact_rotate, wigner_oracle, ylm
from su2lat.pipeline import compose_rotations

# %% [markdown]
# A compact state is just 2l+1 amplitudes, index m + l.  Rotating |l, l>
# by a quarter turn about y spreads it over all m with binomial weights.

# %%
top = CompactState.basis(3, 3)
out = exact_rotate(top, RotationSpec.y(math.pi / 2))
print(np.round(np.abs(out.amps) ** 2, 4))
print([math.comb(6, k) / 64 for k in range(7)])

# %% [markdown]
# D is a representation: D(R1) D(R2) = D(R1 R2).  Check it at l = 5 for a
# handful of random rotations.

# %%
rng = np.random.default_rng(1)
worst = 0.0
for _ in range(20):
    r1, r2 = (RotationSpec(*rng.uniform(-math.pi, math.pi, 3)) for _ in range(2))
    lhs = wigner_oracle(5, r1).entries @ wigner_oracle(5, r2).entries
    rhs = wigner_oracle(5, compose_rotations([r1, r2])).entries
    worst = max(worst, np.abs(lhs - rhs).max())
print(f"max deviation {worst:.2e}")

# %% [markdown]
# The same matrix rotates spherical harmonics:
# Y_lm(R^-1 r) = sum_m' D_m'm(R) Y_lm'(r).

# %%
rot = RotationSpec(0.4, 1.1, -0.3)
R = rot.matrix()
pt = np.array([0.3, -0.5, 0.81])
pt /= np.linalg.norm(pt)
back = R.T @ pt
th, ph = math.acos(back[2]), math.atan2(back[1], back[0])
th0, ph0 = math.acos(pt[2]), math.atan2(pt[1], pt[0])
D = wigner_oracle(2, rot).entries
m = 1
lhs = ylm(2, m, th, ph)
rhs = sum(D[mp + 2, m + 2] * ylm(2, mp, th0, ph0) for mp in range(-2, 3))
print(lhs, rhs)
