# %% [markdown]
# # Spherical harmonics on a cubic lattice
#
# The compact register |m> is translated into a discretized Y_lm living on a
# thin spherical shell inside an n^3 grid.  How orthogonal are the samples,
# and what does the orthonormalized frame look like?

# %%
import numpy as np

from su2lat import CompactState, Grid3, ShellSpec, decode, encode, translate_isometry
from su2lat.lattice import gram_matrix, max_offdiag, sample_ylm_state, shell_sites

# %%
g = Grid3(64)
shell = ShellSpec.default(g)
idx, theta, phi = shell_sites(g, shell)
print(f"shell radius {shell.r0:.1f}, width {shell.width}, {idx.size} sites")

# %% [markdown]
# Sampled harmonics are close to orthonormal but not exactly.  The largest
# off-diagonal Gram entry, by l and n:

# %%
for ell in (1, 2, 4):
    row = []
    for n in (32, 64, 128):
        grid = Grid3(n)
        row.append(max_offdiag(gram_matrix(ell, grid, ShellSpec.default(grid))))
    print(ell, ["%.5f" % v for v in row])

# %% [markdown]
# Not monotone in n: the shell thickness is fixed in lattice units, so the
# set of sites that falls inside it changes irregularly as the radius grows.
#
# Loewdin orthogonalization fixes the frame.  Encoding then decoding is
# exact.

# %%
iso = translate_isometry(3, g, shell)
c = CompactState.random(3, np.random.default_rng(0))
lat = encode(c, iso)
back, residual = decode(lat, iso)
print(np.abs(back.amps - c.amps).max(), residual)

# %% [markdown]
# The orthonormal column for m differs from the raw sample only slightly.

# %%
raw = sample_ylm_state(3, 2, g, shell).amps
col = iso.column_state(2).amps
print(f"overlap {abs(np.vdot(raw, col)):.6f}")
