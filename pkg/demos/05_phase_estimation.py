# %% [markdown]
# # Reading m off a lattice state
#
# A lattice Y_lm picks up e^{-i m phi} under a z-rotation by phi.  Phase
# estimation with t ancilla bits and the rotation by 2 pi / 2^t recovers m.

# %%
import numpy as np

from su2lat import CompactState, Grid3, ShellSpec, translate_isometry
from su2lat.lattice import sample_ylm_state
from su2lat.phasest import estimate_m, min_bits, uncompute_m
from su2lat.stateprep import translate_with_tag

# %%
g = Grid3(32)
s = ShellSpec.default(g)
ell = 3
t = min_bits(ell)
iso = translate_isometry(ell, g, s)
print(f"t = {t} bits for m in [-{ell}, {ell}]")

# %% [markdown]
# With an exact z-rotation acting on the orthonormal frame the outcome is
# deterministic.

# %%
pe = estimate_m(iso.column_state(-2), ell, t, "exact-oracle", iso)
print(pe.m, pe.confidence)

# %% [markdown]
# With sheared z-rotations on the raw samples it is close but not exact.

# %%
for m in range(-ell, ell + 1):
    pe = estimate_m(sample_ylm_state(ell, m, g, s), ell, t, "shear")
    print(m, pe.m, round(pe.probability(m), 4))

# %% [markdown]
# Running the estimator backwards erases the tag register of a
# tag-plus-lattice state.  Leakage is whatever fails to return to tag zero.

# %%
c = CompactState.random(ell, np.random.default_rng(0))
_, leak = uncompute_m(translate_with_tag(c, g, s, iso), t, "exact-oracle", iso)
print(f"exact backend leakage {leak:.1e}")
_, leak = uncompute_m(translate_with_tag(c, g, s), t, "shear")
print(f"shear backend leakage {leak:.3f}")
