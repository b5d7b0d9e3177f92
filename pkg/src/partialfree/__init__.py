"""Quantify how close two finite random matrices are to free independence.

The package estimates joint-moment words of a matrix pair, predicts the
moments of the sum under free and classical independence, detects the
first moment order where the pair stops acting free, localizes the
violating cyclic words, and emits density-of-states estimates with the
leading asymptotic correction applied.
"""

from .analysis import (
    AnalysisConfig,
    DegreeResult,
    DensityEstimate,
    FreenessReport,
    MomentRow,
    WordStatistic,
    detect_degree,
    edgeworth_corrected_density,
    gram_charlier_coefficients,
    kde_density,
    kde_derivative,
    ks_statistic,
    localize_violations,
    run_analysis,
    silverman_bandwidth,
)
from .errors import ConfigError, InputError, PartialFreeError, ResourceLimitError
from .matrices import (
    EnsembleSpec,
    MatrixPairSample,
    MomentEstimate,
    SpectrumSample,
    estimate_moments,
    estimate_word_net,
    haar_orthogonal,
    random_permutation,
    sample_classical_sum_spectrum,
    sample_free_sum_spectrum,
    sample_pair,
    sample_sum_spectrum,
    symmetric_eigenvalues,
)
from .moments import (
    AtomicMeasure,
    arcsine_cdf,
    arcsine_density,
    atomic_classical_convolve,
    classical_convolve,
    classical_cumulants_from_moments,
    classical_joint_moment,
    free_convolve,
    free_cumulants_from_moments,
    free_joint_moment,
    moments_from_classical_cumulants,
    moments_from_free_cumulants,
    sum_moment_free,
)
from .pathsum import LatticeModel, boundary_corrected_word_net, exact_word_net, gaussian_entry_moments
from .series import PowerSeries, cauchy_series_from_moments, complete_bell, hermite, hermite_coefficients
from .words import Necklace, Word, enumerate_necklaces, necklace_count, word_expansion, word_multiplicity

__version__ = "0.1.0"
