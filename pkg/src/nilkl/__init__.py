"""Left-invariant Hermitian geometry on Lie groups from complex structure constants."""

from .algebra import (
    DEFAULT_TOL,
    HermitianLieData,
    RealLieData,
    change_frame,
    complexify,
    is_nilpotent_J,
    lower_central_series,
    realify,
    salamon_coframe,
    validate,
)
from .catalog import (
    CoframeDifferentials,
    build_family,
    from_coframe,
    from_normal_form,
    perturb,
    random_two_step,
    to_coframe,
)
from .classify import (
    KLDecision,
    SKLNormalForm,
    classify_ckl,
    classify_rkl,
    classify_skl,
    simultaneous_diagonalize,
)
from .connections import (
    ConnectionKind,
    chern_torsion,
    connection,
    curvature,
    kl_residual,
    structure_curvature,
    torsion_covariant_derivative,
)
from .errors import *  # noqa: F401,F403
from .forms import InvariantForm, bidegree_split, d_operator, fundamental_form, metric_form_residuals

__version__ = "0.1.0"
