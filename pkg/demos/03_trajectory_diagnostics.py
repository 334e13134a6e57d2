# %% [markdown]
# # Freezing index and non-ergodicity
#
# Both metrics are computed offline from stored states. Here we collect the
# fast state during a short run and score consecutive windows of `tau` steps.

# %%
import numpy as np

from sgcd import ModelConfig, freezing_index, nonergodicity, run_simulation

cfg = ModelConfig(seed=1)
steps = 6_000
xs = np.empty((steps, cfg.N))
run_simulation(cfg, "gated", steps, on_state=lambda t, x: xs.__setitem__(t, x))

for start in range(0, steps, 1000):
    X = xs[start:start + cfg.tau]
    print(f"t={start:5d}  F_T={freezing_index(X, 1.0):.4f}  E_T={nonergodicity(X, bins=20):.4f}")

# %% [markdown]
# A collapsed trajectory freezes completely; a uniform sweep is maximally ergodic
# along the projection.

# %%
print(freezing_index(np.tile(xs[-1], (50, 1)), 1.0))
print(nonergodicity(np.linspace(-1, 1, 400)[:, None], bins=20))
