# %% [markdown]
# # Spin-N/2 from N qubits, and adding angular momenta
#
# The symmetric subspace of N qubits carries spin N/2.  A single-qubit gate
# applied to every qubit restricts to a (N+1)x(N+1) matrix there.

# %%
import math

import numpy as np

from su2lat import RotationSpec
from su2lat.symm import (HADAMARD, add_translate, add_translate_overlap, cg_oracle, hyper_hadamard,
                         symmetric_restrict, symmetric_vs_wigner)

# %%
print(np.round(hyper_hadamard(4), 4))
print(np.abs(hyper_hadamard(8) - symmetric_restrict(HADAMARD, 8)).max())

# %% [markdown]
# Restricting U^{(x)N} for U in SU(2) gives the Wigner matrix of spin N/2.

# %%
rng = np.random.default_rng(0)
print(max(symmetric_vs_wigner(N, RotationSpec(*rng.uniform(-3, 3, 3))) for N in range(1, 9)))

# %% [markdown]
# The uniform superposition over m + m' = M is only the top L = l + l' state
# when M is extreme.  Otherwise it mixes several L.

# %%
print(add_translate(0, 1, 1).reshape(3, 3))
for M in (2, 1, 0):
    print(M, round(add_translate_overlap(M, 1, 1), 4))
dec = cg_oracle(1, 1)
print([L for L, _ in dec.blocks])
