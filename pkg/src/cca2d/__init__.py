"""CCA family: classical, probabilistic, two-dimensional and EM-fitted
probabilistic two-dimensional canonical correlation analysis."""

from .cca import CCAModel, fit_cca, project_cca
from .linalg import (
    DimensionError,
    EigResult,
    NumericalError,
    generalized_symmetric_eig,
    regularize_spd,
    sample_covariance,
)
from .pcca import PCAReducer, PCCAModel, fit_pca, fit_pcca_ml, pcca_posterior_mean
from .p2dcca import (
    EMTrace,
    LatentStats,
    P2DCCAModel,
    e_step,
    expected_loglik,
    fit_p2dcca,
    left_project_all,
    load_model,
    m_step,
    reduce_dimension,
    right_project_all,
    save_model,
)
from .synth import (
    GroundTruthLoadings,
    SyntheticConfig,
    generate,
    loading_distance,
    recovery_experiment,
)
from .twodcca import TwoDCCAModel, cov_left, cov_right, fit_2dcca, project_2dcca

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
