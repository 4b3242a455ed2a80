"""Plot partial sums of the divergent series against (ln N) / pi.

Usage: python plot_lyons.py OUT_DIR
"""
import math
import sys

import matplotlib.pyplot as plt
import pandas as pd

out = sys.argv[1]
df = pd.read_csv(f"{out}/lyons.csv")
fig, ax = plt.subplots()
ax.semilogx(df["n"], df["partial_sum"], label="partial sum")
ax.semilogx(df["n"], [math.log(n) / math.pi for n in df["n"]], "--", label="(ln N) / pi")
ax.set_xlabel("N")
ax.legend()
fig.savefig(f"{out}/lyons.png", dpi=150)
