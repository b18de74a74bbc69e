"""
Meta-Immersion versus number of users
=====================================

A 4000 K rendering server is split evenly across N virtual travellers.
Each traveller sees between 1 and 56 virtual objects at 20 K apiece.
We sweep N and four downlink rate conditions, then plot mean MI.
"""

from slicing4meta.experiments import Fig5Config, run_fig5

config = Fig5Config()
rows = run_fig5(config)

# One row per (N, rate) cell
print(f"{'N':>4} " + " ".join(f"{r:>9.0f}" for r in config.rate_conditions))
for n in config.n_users:
    cells = [r["mean_mi"] for r in rows if r["n_users"] == n]
    print(f"{n:>4} " + " ".join(f"{v:9.4f}" for v in cells))

# With a fixed pool, more users means less rendering each, so each curve
# falls with N. A higher rate raises the objective-quality factor, so
# the curves never cross.
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

fig, ax = plt.subplots(figsize=(5, 3.5))
for rate in config.rate_conditions:
    xs = [r["n_users"] for r in rows if r["rate_mbps"] == rate]
    ys = [r["mean_mi"] for r in rows if r["rate_mbps"] == rate]
    ax.plot(xs, ys, marker="o", label=f"{rate:g} Mb/s")
ax.set_xlabel("number of users")
ax.set_ylabel("mean MI")
ax.legend()
fig.tight_layout()
fig.savefig("fig5_mi_vs_users.png", dpi=120)
print("saved fig5_mi_vs_users.png")
