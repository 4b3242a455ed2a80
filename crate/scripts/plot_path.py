"""Plot a sample path CSV (t,x1,...,xd), one line per coordinate.

Usage: python plot_path.py PATH_CSV [FIGURE]
"""
import sys

import matplotlib.pyplot as plt
import pandas as pd

df = pd.read_csv(sys.argv[1])
fig, ax = plt.subplots()
for col in df.columns[1:]:
    ax.plot(df["t"], df[col], label=col)
ax.set_xlabel("t")
ax.legend()
fig.savefig(sys.argv[2] if len(sys.argv) > 2 else sys.argv[1].rsplit(".", 1)[0] + ".png", dpi=150)
