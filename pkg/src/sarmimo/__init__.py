"""SAR-ADC mismatch analysis and quantized massive MU-MIMO simulation.

Subpackages:

* :mod:`sarmimo.numerics`  - Gaussian special functions, quadrature oracle,
  nearest-rank quantile.
* :mod:`sarmimo.quantizer` - ideal mid-rise quantizer, behavioral SAR
  converter with capacitor mismatch, MSB clip model, exact cell tables.
* :mod:`sarmimo.bussgang`  - Bussgang gains, distortion power, SDR/EFR,
  closed forms, Monte-Carlo and exact cell evaluation, peak-EFR search.
* :mod:`sarmimo.yield_mc`  - quantile-EFR yield surfaces over chip
  realizations.
* :mod:`sarmimo.mimo_link` - quantized MU-MIMO uplink with LMMSE detection
  and quantile-BER experiments.
* :mod:`sarmimo.cli`       - reproducible experiment runner (``sarmimo``).
"""

from .bussgang import (
    BussgangReport,
    cells_bussgang,
    empirical_bussgang,
    ideal_efr,
    ideal_gain,
    ideal_second_moment,
    make_report,
    msb_efr,
    msb_gain,
    msb_second_moment,
    peak_efr,
)
from .mimo_link import (
    BerCurves,
    ChannelRealization,
    MimoConfig,
    TrialOutcome,
    ber_cdf,
    ber_quantile_curves,
    calibrate_noise,
    demodulate_16qam,
    generate_channel,
    lmmse_detect,
    load_channel_csv,
    modulate_16qam,
    run_trial,
)
from .numerics import (
    IntervalMoments,
    empirical_quantile,
    gaussian_interval_moments,
    q_function,
    quadrature_expectation,
    std_normal_pdf,
)
from .quantizer import (
    CellTable,
    MismatchRealization,
    MsbMismatch,
    QuantizerSpec,
    enumerate_tf_cells,
    ideal_midrise_quantize,
    msb_model_eval,
    sample_mismatch,
    sar_convert,
)
from .seeding import derive_seed
from .yield_mc import YieldSurface, YieldSweepConfig, efr_quantile_surface

__version__ = "0.1.0"
