# %% [markdown]
# # Unit-gain teleportation
#
# At ``g = 1`` the scissor teleports the input truncated at ``n`` photons.
# Larger scissors teleport larger states.

# %%
from qscissors.fock import coherent_state
from qscissors.scissors import ScissorConfig, nqs_output, teleport_fidelity_cat, truncation_fidelity

# %%
print("alpha  " + "  ".join(f"n={n}" for n in (1, 2, 4, 6)))
for alpha in (0.25, 0.5, 1.0, 1.5):
    psi = coherent_state(alpha, 80)
    print(f"{alpha:5.2f}  " + "  ".join(f"{truncation_fidelity(n, 1.0, psi):.4f}" for n in (1, 2, 4, 6)))

# %% [markdown]
# ## Even cat state with amplitude 2

# %%
for n in (4, 6, 8, 10, 14, 20):
    f, p = teleport_fidelity_cat(2.0, n)
    print(f"n={n:2d}  F={f:.6f}  P_XP={p:.2e}")

# %% [markdown]
# The vacuum passes unchanged for every size.

# %%
print(teleport_fidelity_cat(0.0, 3))
print(nqs_output(ScissorConfig(1, 1.0), coherent_state(0.0, 5)).state.amplitudes)
