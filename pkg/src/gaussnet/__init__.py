"""Random Gaussian layers as distance-preserving embeddings.

Monte Carlo and closed-form tools for mean width, covering numbers, sign
embeddings and input recovery of layers with i.i.d. Gaussian weights.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ContractViolationError,
    DegenerateInputError,
    DegenerateObservationError,
    DegenerateOutputError,
    NumericalDegeneracyError,
    NumericalFailureError,
    ParameterError,
)
from .metrics import (  # noqa: E402
    CoveringCheck,
    CoveringEstimate,
    DistortionReport,
    distortion_report,
    empirical_covering,
    geodesic_distance,
    hamming_variant,
    verify_covering_recursion,
)
from .models import (  # noqa: E402
    ManifoldModel,
    ModelKind,
    PointCloud,
    make_explicit_cloud,
    make_gmm_model,
    make_union_of_subspaces,
    sample_points,
)
from .netsim import (  # noqa: E402
    ActivationKind,
    ActivationSpec,
    RandomGaussianLayer,
    apply_layer,
    forward_stack,
    make_identity_layer,
    make_layer,
    validate_semi_truncated,
)
from .recovery import (  # noqa: E402
    LayerInverter,
    RecoveryResult,
    recover_iterative,
    recover_linear,
    recovery_error_sweep,
)
from .rngcore import GaussianStream, gaussian_at  # noqa: E402
from .width import (  # noqa: E402
    CoveringBound,
    MeanWidthEstimate,
    MeanWidthEstimator,
    covering_number_gmm,
    dudley_bound,
    estimate_mean_width,
    gmm_covering,
    layer_covering_recursion,
    mean_width_gmm_bound,
    sudakov_net_size,
)
