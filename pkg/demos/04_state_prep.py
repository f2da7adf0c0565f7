# %% [markdown]
# # Preparing amplitudes with a conditional-rotation cascade
#
# To load a density p(x) over 2^k points, rotate the top qubit by the angle
# that splits the mass between the two halves, then recurse into each half
# conditioned on the bits so far.  The only thing needed is interval sums.

# %%
import numpy as np

from su2lat import Grid3, ShellSpec
from su2lat.lattice import sample_ylm_state
from su2lat.stateprep import TargetDensity, apply_prep, build_prep_plan, prepare_ylm_lattice

# %%
x = np.linspace(-3, 3, 64)
d = TargetDensity.from_weights(np.exp(-x**2))
plan = build_prep_plan(d)
print([t.shape for t in plan.angles])
psi = apply_prep(plan)
print(np.abs(psi - np.sqrt(d.probs)).max())

# %% [markdown]
# The same machinery prepares a lattice Y_lm: load |P_lm(cos theta)| on the
# shell as a density, restore the sign of P_lm, then apply the e^{im phi}
# phase ring by ring.

# %%
g = Grid3(32)
s = ShellSpec.default(g)
for ell, m in [(2, 1), (4, -3)]:
    a = prepare_ylm_lattice(ell, m, g, s).amps
    b = sample_ylm_state(ell, m, g, s).amps
    print(ell, m, np.abs(a - b).max())
