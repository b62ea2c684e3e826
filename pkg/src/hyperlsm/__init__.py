"""Latent space network models on hyperbolic spaces of unknown curvature.

Submodules
----------
geometry        hyperboloid and Poincare-ball operations
model           embeddings, networks, link functions, loss and gradients
optim           gradient descent on curvature and positions
initialization  spectral initialization and the canonical form
netgen          network simulation and graph statistics
inference       error metrics, AUC, information criteria, bootstrap tests
formats         edge-list, embedding and report files
cli             command-line entry point
"""

from .exceptions import (
    DegenerateSpectrumError,
    DimensionError,
    DivergenceError,
    DomainError,
    HyperLSMError,
    ManifoldError,
    ParseError,
    TangentError,
    UndefinedAUCError,
)
from .geometry import (
    equilateral_midpoint_distance,
    exp_map,
    hyperbolic_rotation,
    hyperboloid_distance,
    lorentz_inner,
    poincare_distance,
    tangent_project,
    to_hyperboloid,
    to_poincare,
)
from .inference import (
    CiReport,
    ErrorReport,
    LrtReport,
    bootstrap_ci,
    estimate,
    information_criteria,
    link_prediction_auc,
    lrt_test,
    relative_errors,
    theorem1_bound,
)
from .initialization import InitConfig, canonicalize, initialize, initialize_euclidean, theta_to_embedding, usvt
from .model import (
    DEFAULT_LINK,
    EUCLIDEAN,
    HYPERBOLIC,
    LatentEmbedding,
    LinkFunction,
    Network,
    distance_matrix,
    get_link,
    grad_K,
    grad_Z,
    log_likelihood,
    loss_and_gradients,
    neg_log_likelihood,
    probability_matrix,
)
from .netgen import GraphStats, SimConfig, generate_network, graph_stats, sample_uniform_disk, simulate
from .optim import FitConfig, FitResult, fit, fit_euclidean, mgd_step

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
