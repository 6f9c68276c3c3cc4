"""Effective resolution of an ideal N-bit converter versus input gain.

An N-bit mid-rise quantizer on [-1, 1] trades quantization noise against
clipping: driving it harder uses more of the staircase but clips more of
the Gaussian input.  The EFR metric makes the trade-off visible as a
single curve per resolution with an interior optimum; a 1-bit converter
scores exactly 1 bit at every gain.

Usage:
    python effective_resolution_ideal_adc.py
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from sarmimo import QuantizerSpec, ideal_efr, peak_efr

SIGMA_GRID = np.geomspace(0.02, 3.0, 200)
RESOLUTIONS = range(1, 7)


def main():
    fig, ax = plt.subplots(figsize=(6, 4))
    print(f"{'N':>3} {'peak EFR':>10} {'optimal sigma_x':>16}")
    for bits in RESOLUTIONS:
        spec = QuantizerSpec(bits)
        efr = [ideal_efr(spec, s) for s in SIGMA_GRID]
        sigma_star, efr_star = peak_efr(lambda s: ideal_efr(spec, s))
        print(f"{bits:>3} {efr_star:>10.3f} {sigma_star:>16.3f}")
        ax.semilogx(SIGMA_GRID, efr, label=f"N = {bits}")
        ax.plot([sigma_star], [efr_star], "k.", markersize=5)

    ax.set_xlabel(r"input standard deviation $\sigma_X$")
    ax.set_ylabel("effective resolution (bits)")
    ax.set_title("EFR of an ideal ADC: quantization vs clipping")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig("effective_resolution_ideal_adc.png", dpi=150)
    print("plot saved: effective_resolution_ideal_adc.png")


if __name__ == "__main__":
    main()
