"""Calibration, scoring and order-consistency auditing for dichotomous IRT models.

The package calibrates 1PL/Rasch/2PL/3PL item banks (marginal or joint
maximum likelihood), estimates abilities (MLE/EAP/MAP/median/WLE), and audits
a scored population for violations of consistent ordering: examinees whose
correctly answered items are uniformly harder, and at least as many, yet who
receive a lower estimated ability.
"""

from .errors import (
    BoundaryScoreError,
    IrtAuditError,
    NonConvergenceError,
    ValidationError,
)
from .model import (
    Item,
    ItemBank,
    ModelFamily,
    ModelKind,
    QuadratureGrid,
    ResponseMatrix,
    accumulated_discrimination,
    g_inverse,
    g_of_theta,
    icc_prob,
    log_likelihood,
)

__version__ = "0.1.0"
