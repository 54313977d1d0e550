# %% [markdown]
# # Noiseless amplification with n-photon scissors
#
# An n-photon scissor truncates the input at ``n`` photons and multiplies the
# ``j``-photon amplitude by ``g^j``. Fidelity with the perfect amplifier
# output grows with ``n``, at the cost of success probability.

# %%
import numpy as np

from qscissors.fock import coherent_state, smsv_state
from qscissors.scissors import (
    ScissorConfig,
    nqs_output,
    resource_prep_probability,
    simulate_bp,
    simulate_sp,
    truncation_fidelity,
    x10_fidelity,
    x10_output,
)

psi = coherent_state(0.3, 60)

# %% [markdown]
# ## Closed form versus circuit
# The bunched and single-photon circuits reproduce the closed-form output.

# %%
ref = nqs_output(ScissorConfig(3, 1.5), psi).state.amplitudes
print(np.max(np.abs(simulate_bp(3, 1.5, psi.resized(12)).amplitudes - ref)))
print(np.max(np.abs(simulate_sp(3, 1.5, psi.resized(12)).amplitudes - ref)))

# %% [markdown]
# ## Infidelity and probability against gain
# ``P_BP`` counts every vacuum port of the bunched layout; ``P_SP`` assumes the
# single-photon resource was prepared ahead of time.

# %%
print(" g    n  infidelity   P_BP        P_SP")
for g in (0.5, 1.0, 2.0, 3.0):
    for n in (1, 2, 4):
        out = nqs_output(ScissorConfig(n, g), psi)
        print(f"{g:3.1f}  {n}  {1 - truncation_fidelity(n, g, psi):.3e}  {out.probability_bp:.3e}  {out.probability_sp:.3e}")

# %% [markdown]
# The offline preparation probability of the single-photon resource:

# %%
print([round(resource_prep_probability(n), 6) for n in range(1, 7)])

# %% [markdown]
# ## Parallel single-photon scissors
# Splitting the input over ``n`` single-photon scissors also truncates, but
# distorts the amplitudes, so it needs far more photons for similar fidelity.

# %%
for n in (4, 12, 24):
    print(n, round(x10_fidelity(n, 3.0, psi), 6), f"{x10_output(n, 3.0, psi).probability:.2e}")
print("4-photon scissor:", round(truncation_fidelity(4, 3.0, psi), 6))

# %% [markdown]
# ## Squeezed vacuum
# Only even Fock levels are populated, so odd sizes add nothing.

# %%
sq = smsv_state(0.29, 600)
for n in range(1, 7):
    print(n, round(truncation_fidelity(n, 1.5, sq), 8))
