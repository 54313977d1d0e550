# %% [markdown]
# # Realistic detectors and resources
#
# Detectors with 70% efficiency and a ``1e-8`` dark-count probability, plus
# 70% transmission of each resource photon. The bunched layout keeps its
# fidelity gain with size; the single-photon layout loses it.
# Each cell below takes a few seconds.

# %%
import numpy as np

from qscissors.channels import RelayConfig, log_negativity_full, relay_output_rho
from qscissors.fock import coherent_state
from qscissors.imperfections import (
    REALISTIC,
    max_entanglement_distance,
    noisy_detector_povm,
    simulate_noisy_nqs,
    simulate_noisy_relay,
)
from qscissors.scissors import ScissorConfig

psi = coherent_state(0.3, 10)

# %% [markdown]
# Click probabilities for 0, 1 and 2 incident photons:

# %%
for c in range(3):
    print(c, np.round(np.diag(noisy_detector_povm(REALISTIC, c, 2)), 10))

# %% [markdown]
# ## Amplifier fidelity

# %%
print(" g    BP n=1  BP n=2  SP n=1  SP n=2")
for g in np.linspace(0.5, 3.0, 6):
    row = [
        simulate_noisy_nqs(REALISTIC, ScissorConfig(n, float(g), v), psi).fidelity_vs_ideal
        for v in ("BP", "SP")
        for n in (1, 2)
    ]
    print(f"{g:3.1f}  " + "  ".join(f"{f:.4f}" for f in row))

# %% [markdown]
# ## Relay entanglement is damped

# %%
for g in (2.0, 4.0, 6.0):
    relay = RelayConfig.from_placement(1, g, 0.05, "middle")
    print(g, round(log_negativity_full(simulate_noisy_relay(REALISTIC, relay).output), 4),
          round(log_negativity_full(relay_output_rho(relay)), 4))

# %% [markdown]
# ## Maximum distance
# Dark counts eventually swamp the heralds. Placing the station in the
# middle roughly doubles the reach. This cell takes about a minute.

# %%
d_end = max_entanglement_distance(REALISTIC, 1, "end")
d_mid = max_entanglement_distance(REALISTIC, 1, "middle")
print(f"end {d_end:.0f} km, middle {d_mid:.0f} km, ratio {d_mid / d_end:.2f}")
