"""Plot log2 of the median dyadic p-variation sum against the level.

Usage: python plot_rogers.py OUT_DIR [OUT_DIR ...]
Each directory is one rogers-scan run; the manifest supplies the legend.
"""
import json
import sys

import matplotlib.pyplot as plt
import pandas as pd

fig, ax = plt.subplots()
for out in sys.argv[1:]:
    df = pd.read_csv(f"{out}/rogers.csv")
    cfg = json.load(open(f"{out}/manifest.json"))["config"]
    ax.plot(df["level"], df["log2_median"], marker="o",
            label=f"H={cfg['hurst']}, p={cfg['p']}, slope={df['slope'][0]:.3f}")
ax.set_xlabel("dyadic level n")
ax.set_ylabel("log2 median sum")
ax.legend()
fig.savefig("rogers.png", dpi=150)
