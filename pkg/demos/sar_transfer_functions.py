"""Transfer functions of a SAR converter with MSB capacitor mismatch.

A +25% MSB capacitor on the positive array over-corrects the first
binary-search step: inputs near zero compress onto the first level
(saddle) and the usable range extends past +1.  A -25% MSB capacitor on
the negative array under-corrects: output codes near zero become
unreachable and the range shrinks.  The piecewise-linear clip model
isolates exactly this defect without the staircase.

Usage:
    python sar_transfer_functions.py
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from sarmimo import (
    MismatchRealization,
    MsbMismatch,
    QuantizerSpec,
    enumerate_tf_cells,
    msb_model_eval,
    sar_convert,
)

BITS = 5
MSB_DEVIATION = 0.25  # +25% on the positive CDAC, -25% on the negative


def main():
    spec = QuantizerSpec(BITS)
    chip = MismatchRealization(
        delta_p=np.array([MSB_DEVIATION, 0, 0, 0.0]),
        delta_n=np.array([-MSB_DEVIATION, 0, 0, 0.0]),
    )
    x = np.linspace(-1.5, 1.5, 1201)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))

    ax1.plot(x, sar_convert(x, spec, MismatchRealization(np.zeros(4), np.zeros(4))),
             lw=0.9, label="ideal", color="gray")
    ax1.plot(x, sar_convert(x, spec, chip), lw=1.2,
             label=f"{MSB_DEVIATION:+.0%} / {-MSB_DEVIATION:+.0%} MSB")
    ax1.set_title(f"{BITS}-bit SAR conversion")
    ax1.set_xlabel("input")
    ax1.set_ylabel("output")
    ax1.grid(True, alpha=0.3)
    ax1.legend()

    m = MSB_DEVIATION / 2  # transfer-function shift is half the deviation
    for m1, m2, style in ((m, -m, "-"), (-m, m, "--")):
        ax2.plot(x, msb_model_eval(x, MsbMismatch(m1, m2)), style,
                 label=f"m1={m1:+.3f}, m2={m2:+.3f}")
    ax2.plot(x, np.clip(x, -1, 1), color="gray", lw=0.8, label="clip only")
    ax2.set_title("MSB-shift clip model")
    ax2.set_xlabel("input")
    ax2.grid(True, alpha=0.3)
    ax2.legend()

    fig.tight_layout()
    fig.savefig("sar_transfer_functions.png", dpi=150)
    print("plot saved: sar_transfer_functions.png")

    cells = enumerate_tf_cells(spec, chip)
    reachable = np.unique(cells.level)
    missing = np.setdiff1d(spec.levels(), reachable)
    print(f"reachable output levels: {reachable.size}/{2**BITS}")
    print("unreachable levels:", np.array2string(missing, precision=4))


if __name__ == "__main__":
    main()
