"""delta_n statistics of energy-level spectra: ensembles, spin chains,
unfolding, power spectra, theory curves and significance tests."""

__version__ = "0.1.0"

from .crossover import (
    BetaCalibration,
    CrossoverPoint,
    StatsPlan,
    calibrate_beta,
    compare_power,
    compare_ratio_histograms,
    crossover_sweep,
    estimate_kc,
    match_beta,
)
from .ensembles import (
    EnergySpectrum,
    EnsembleConfig,
    SpacingSequence,
    iter_ensemble,
    realization,
    sample_beta_ensemble,
    sample_gde,
    sample_goe,
    sample_poisson_spacings,
)
from .significance import KSResult, PValueReport, ReferenceMoments, estimate_reference, ks_exponential_test, p_curve, p_value
from .spinchain import SectorBasis, SpinChainConfig, build_basis, build_hamiltonian, central_window, diagonalize
from .stats import (
    DeltaSeries,
    DeltaSquaredEstimate,
    LongRangeStats,
    PowerSpectrumEstimate,
    RatioStats,
    accumulate_power,
    delta_series,
    delta_squared_average,
    long_range_stats,
    number_variance,
    power_spectrum,
    ratio_stats,
    spectral_rigidity,
)
from .theory import (
    TheoryCurve,
    brute_force_power,
    corr_kernel,
    gde_power_corrected,
    gde_power_exact,
    gde_power_leading,
    goe_power,
    theory_curve,
)
from .unfolding import (
    UnfoldedSpectrum,
    partition,
    reunfold,
    spacings,
    trim_edges,
    unfold_gaussian_exact,
    unfold_polynomial,
    unfold_semicircle,
)
