# %% [markdown]
# # A gated run
#
# Simulate the model with its default parameters and look at when plasticity
# switches on. Stress builds while the fast state is slow and lacks a clear
# prototype, a gate opens once it crosses `Z_on`, and W stays frozen between
# gates.

# %%
import numpy as np

from sgcd import ModelConfig, align_episodes, run_simulation, summarize
from sgcd.harness import column

cfg = ModelConfig(seed=0)
records, events = run_simulation(cfg, "gated", steps=20_000)
summary = summarize(records, events)
print(f"openings: {summary.n_openings}, plastic fraction {summary.plastic_fraction:.3f}")
print(f"|W| unchanged on {summary.w_plateau_fraction:.1%} of steps")

# %% [markdown]
# The event log lists every transition of the gate machine.

# %%
for e in events[:12]:
    print(f"t={e.t:6d}  {e.kind.value:15s}  Z={e.z:.3f}")

# %% [markdown]
# Stack the stress trace around each opening. The onset column sits at index
# `pre`; stress peaks there and relaxes over the following few hundred steps.

# %%
ep = align_episodes(records, events, "Z", pre=500, post=500)
profile = ep.mean_profile()
for off in (-500, -250, 0, 100, 250, 500):
    print(f"offset {off:+5d}: mean Z {profile[ep.pre + off]:.3f}")

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    t = column(records, "t")
    fig, ax = plt.subplots(3, 1, figsize=(10, 7), sharex=True)
    ax[0].plot(t, column(records, "B_total"), lw=0.3, label="B_total")
    ax[0].plot(t, column(records, "Z"), label="Z")
    ax[0].legend()
    ax[1].plot(t, column(records, "plastic_on"), lw=0.5)
    ax[1].set_ylabel("plastic")
    ax[2].plot(t, column(records, "W_frobenius"))
    ax[2].set_ylabel("|W|_F")
    fig.savefig("gated_run.png", dpi=120)
    plt.figure()
    plt.imshow(ep.matrix, aspect="auto", extent=(-ep.pre, ep.post, len(ep.matrix), 0))
    plt.xlabel("steps from gate onset")
    plt.ylabel("episode")
    plt.colorbar(label="Z")
    plt.savefig("gated_heatmap.png", dpi=120)
