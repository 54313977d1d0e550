# %% [markdown]
# # Multiport interferometers and permanents
#
# Photon-number amplitudes through a linear network are permanents of
# submatrices of its scattering matrix. This notebook builds the Fourier
# splitter used by the scissors and checks the permanent identity that
# makes the closed-form scissor output work.

# %%
import math

import numpy as np

from qscissors.fock import MultimodeState
from qscissors.interferometer import (
    apply_network,
    beam_splitter_matrix,
    legacy_equivalence_check,
    omega_submatrix,
    permanent,
    permanent_naive,
    qft_matrix,
    scatter_amplitude,
)

np.set_printoptions(precision=4, suppress=True)

# %% [markdown]
# ## Splitters
# A balanced splitter sends one photon to both outputs with a relative sign.

# %%
out = apply_network(beam_splitter_matrix(0.5), MultimodeState.product((1, 0)))
print(out.terms)
print(np.round(2 * qft_matrix(4).conj().T, 12))

# %% [markdown]
# ## Ryser versus brute force
# The fast permanent runs in `O(2^m m)`; the factorial sum is the reference.

# %%
rng = np.random.default_rng(1)
a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
print(permanent(a), permanent_naive(a))

# %% [markdown]
# ## The permanent identity
# Rows of the Fourier matrix with ``n-j`` copies of column 0 and ``j`` copies
# of column 1 have permanent ``w^(j m0) (-1)^j j! (n-j)!``, where ``m0`` is the
# dropped row.

# %%
for n in range(1, 6):
    w = np.exp(-2j * np.pi / (n + 1))
    errs = [
        abs(permanent(omega_submatrix(n, j, m0)) - w ** (j * m0) * (-1) ** j * math.factorial(j) * math.factorial(n - j))
        for j in range(n + 1)
        for m0 in range(n + 1)
    ]
    print(f"n={n}: max abs err {max(errs):.1e}")

# %% [markdown]
# The amplitude for ``|n-j, j, 0..>`` to spread as one photon per port (port 0
# empty) carries the ``(-1)^j`` sign that the scissor needs.

# %%
n = 4
f = qft_matrix(n + 1)
for j in range(n + 1):
    inp = (n - j, j) + (0,) * (n - 1)
    print(j, round(scatter_amplitude(f, inp, (0,) + (1,) * n).real, 6))

# %% [markdown]
# Older two- and four-port scissor designs are the same networks up to phases.

# %%
print(legacy_equivalence_check())
