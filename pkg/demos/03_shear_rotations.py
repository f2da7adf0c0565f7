# %% [markdown]
# # Rotating a lattice by shears
#
# Three shears Shx(a) Shy(b) Shx(a), with a = -tan(theta/2) and b = sin(theta),
# compose to a rotation.  With integer rounding each shear is a bijection of
# the periodic grid, so the rotation is a permutation of sites: a valid
# reversible (and therefore unitary) map.

# %%
import math

import numpy as np

from su2lat import Grid3
from su2lat.shear import (ShearParams, displacement_stats, is_bijection, rotation_2d, rotation_3d,
                          rotation_90)

# %%
th = math.pi / 6
sx, sy, _ = ShearParams(th).matrices()
print(np.round(sx @ sy @ sx, 12))

# %% [markdown]
# Bijectivity over the full sweep of angles:

# %%
g = Grid3(32)
thetas = np.linspace(-math.pi / 2, math.pi / 2, 25)
print(all(is_bijection(rotation_2d(g, ("x", "y"), t)) for t in thetas))

# %% [markdown]
# Geometric error: how far each site lands from where an exact rotation
# would put it, for sites within n/4 of the axis.

# %%
g = Grid3(64)
for t in (0.1, math.pi / 6, math.pi / 3, math.pi / 2):
    st = displacement_stats(rotation_3d(g, "z", t), t, 16)
    print(f"theta={t:.3f}  max={st.max:.3f}  mean={st.mean:.3f}")

# %% [markdown]
# Quarter turns are handled exactly by index permutation, and larger angles
# split off a half turn so the shears only ever see |theta| <= pi/2.

# %%
q = rotation_90(g, "x", 1)
print(q.then(q).then(q).then(q).is_identity())
r = rotation_3d(g, "y", 2.5)
print(r.then(rotation_3d(g, "y", -2.5)).is_identity())
