"""Plot median Wong-Zakai errors against the approximation level.

Usage: python plot_wong_zakai.py OUT_DIR [FIGURE]
"""
import sys

import matplotlib.pyplot as plt
import pandas as pd

out = sys.argv[1]
df = pd.read_csv(f"{out}/wong_zakai.csv")
fig, ax = plt.subplots()
for col in ["sup_error", "holder_error", "terminal_error", "rho"]:
    ax.semilogy(df["level"], df[col], marker="o", label=col)
ax.set_xlabel("dyadic level n")
ax.set_ylabel("median over seeds")
ax.legend()
fig.savefig(sys.argv[2] if len(sys.argv) > 2 else f"{out}/wong_zakai.png", dpi=150)
