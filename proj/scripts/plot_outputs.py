#!/usr/bin/env python3
"""Plot the CSV files written by qftsim.

    python3 scripts/plot_outputs.py OUT_DIR

Writes one PNG next to each CSV it recognises.
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def read(path):
    return pd.read_csv(path, comment="#")


def phasematch(df, ax):
    ax.plot(df.pump_nm, df.signal_nm, label="signal")
    ax.plot(df.pump_nm, df.idler_nm, label="idler")
    ax.set_xlabel("pump wavelength (nm)")
    ax.set_ylabel("sideband wavelength (nm)")
    ax.legend()


def translate(df, ax):
    if "kappa_l" in df:
        for kl, group in df.groupby("kappa_l"):
            ax.plot(group.z_m, group.efficiency, label=f"|kappa|L = {kl:.3g}")
        ax.legend(fontsize="small")
    else:
        ax.plot(df.z_m, df.efficiency)
    ax.set_xlabel("z (m)")
    ax.set_ylabel("|nu(z)|^2")


def acceptance(df, ax):
    shifted = df[df.input == 0]
    original = df[df.input > 0]
    ax.plot(original.wavelength_nm, original.input, label="input")
    ax.plot(original.wavelength_nm, original.remainder, label="untranslated")
    ax.plot(shifted.wavelength_nm, shifted.translated, label="translated")
    ax.set_xlabel("wavelength (nm)")
    ax.set_ylabel("spectral density (a.u.)")
    ax.legend()


def g2(df, ax):
    runs = df[df.run_id != "all"]
    total = df[df.run_id == "all"].iloc[0]
    ax.plot(runs.run_id.astype(int), runs.g2, "o", label="per run")
    ax.axhline(total.g2, color="k", label=f"merged {total.g2:.3f}")
    ax.set_xlabel("run")
    ax.set_ylabel("g2(0)")
    ax.legend()


def efficiency(df, ax):
    ax.plot(df.run_id, df.depletion, "o", label="depletion")
    ax.plot(df.run_id, df.creation, "s", label="creation")
    ax.set_xlabel("run")
    ax.set_ylabel("efficiency")
    ax.legend()


def sweep(df, ax):
    ax.errorbar(df.value, df.g2_683, yerr=df.g2_683_std_error, fmt="o", label="683 MC")
    ax.errorbar(df.value, df.g2_659, yerr=df.g2_659_std_error, fmt="s", label="659 MC")
    ax.plot(df.value, df.expected_g2_683, label="683 expected")
    ax.plot(df.value, df.expected_g2_659, label="659 expected")
    ax.set_xlabel("swept parameter")
    ax.set_ylabel("g2(0)")
    ax.legend()


PLOTTERS = {
    "phasematch": phasematch,
    "translate": translate,
    "acceptance": acceptance,
    "g2_683": g2,
    "g2_659": g2,
    "efficiency": efficiency,
    "sweep": sweep,
}


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    for csv in sorted(Path(sys.argv[1]).glob("*.csv")):
        plot = PLOTTERS.get(csv.stem)
        if plot is None:
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        plot(read(csv), ax)
        ax.set_title(csv.stem)
        fig.tight_layout()
        fig.savefig(csv.with_suffix(".png"), dpi=120)
        plt.close(fig)
        print(csv.with_suffix(".png"))


if __name__ == "__main__":
    main()
