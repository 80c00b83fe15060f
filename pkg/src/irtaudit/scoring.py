"""Per-examinee ability estimation.

Bayesian estimators (EAP, MAP, posterior median) work on a discrete ability
grid: the posterior mass at node q is proportional to L(u | theta_q) * w_q.
For guessing-free banks the likelihood depends on the response pattern only
through the accumulated discrimination T(u) (up to a factor constant in
theta), which is why every posterior functional that respects stochastic
order is monotone in T.  MLE uses the sufficient-statistic identity
theta = g^-1(T) when there is no guessing and direct likelihood maximization
otherwise; WLE maximizes log L + 0.5 * log I with I the test information.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BoundaryScoreError, ValidationError
from .model import (
    ItemBank,
    QuadratureGrid,
    ResponseMatrix,
    accumulated_discrimination,
    g_inverse,
    g_inverse_many,
    log_likelihood_curve,
    log_likelihood_matrix,
    stable_logistic,
)

__all__ = [
    "EstimatorKind",
    "PosteriorDensity",
    "AbilityTable",
    "posterior",
    "score_eap",
    "score_map",
    "score_median",
    "score_mle",
    "score_wle",
    "posterior_cdf_dominates",
    "test_information",
    "build_ability_table",
]


class EstimatorKind(str, Enum):
    MLE = "mle"
    EAP = "eap"
    MAP = "map"
    WLE = "wle"
    POSTERIOR_MEDIAN = "median"


@dataclass(frozen=True)
class PosteriorDensity:
    """Discrete posterior over grid nodes; ``normalizer`` is the marginal
    probability of the response pattern."""

    nodes: np.ndarray
    mass: np.ndarray
    normalizer: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.float64)
        mass = np.asarray(self.mass, dtype=np.float64)
        for arr, name in ((nodes, "nodes"), (mass, "mass")):
            arr.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "mass", mass)
        if nodes.shape != mass.shape:
            raise ValidationError("nodes and mass must have equal shape")
        if np.any(mass < 0):
            raise ValidationError("posterior mass must be nonnegative")
        if abs(float(mass.sum()) - 1.0) > 1e-12:
            raise ValidationError("posterior mass must sum to 1")

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.mass)

    def mean(self) -> float:
        return float(self.mass @ self.nodes)


def _mass_rows(log_lik: np.ndarray, log_w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normalized posterior mass and marginal probability, row-wise.

    Works for a single pattern (1-d) or a matrix of patterns (2-d); the
    reductions run over the last axis either way so batch and single-pattern
    paths produce identical floats.
    """
    s = log_lik + log_w
    smax = np.max(s, axis=-1, keepdims=True)
    raw = np.exp(s - smax)
    total = np.sum(raw, axis=-1, keepdims=True)
    marginal = np.exp(smax[..., 0] + np.log(total[..., 0]))
    return raw / total, marginal


def posterior(u, bank: ItemBank, g_hat: QuadratureGrid) -> PosteriorDensity:
    """Posterior ability distribution of one response pattern over the grid."""
    log_lik = log_likelihood_curve(u, bank, g_hat.nodes)
    with np.errstate(divide="ignore"):
        log_w = np.log(g_hat.weights)
    mass, marginal = _mass_rows(log_lik, log_w)
    return PosteriorDensity(g_hat.nodes, mass, float(marginal))


def score_eap(u, bank: ItemBank, g_hat: QuadratureGrid) -> float:
    """Posterior mean; always inside the grid range."""
    return posterior(u, bank, g_hat).mean()


def score_map(u, bank: ItemBank, g_hat: QuadratureGrid) -> float:
    """Posterior mode on the grid; exact ties break toward the larger node."""
    mass = posterior(u, bank, g_hat).mass
    idx = int(np.flatnonzero(mass == mass.max()).max())
    return float(g_hat.nodes[idx])


def score_median(u, bank: ItemBank, g_hat: QuadratureGrid) -> float:
    """Smallest grid node where the cumulative posterior mass reaches 1/2."""
    cdf = posterior(u, bank, g_hat).cdf()
    idx = int(np.searchsorted(cdf, 0.5, side="left"))
    return float(g_hat.nodes[min(idx, g_hat.n_points - 1)])


def _check_interior_score(u, bank: ItemBank) -> int:
    n_correct = int(np.sum(np.asarray(u)))
    if n_correct == 0:
        raise BoundaryScoreError("zero raw score has no finite MLE", code="zero_score")
    if n_correct == bank.n_items:
        raise BoundaryScoreError("perfect raw score has no finite MLE", code="perfect_score")
    return n_correct


def _golden_max(f, lo: float, hi: float, tol: float = 1e-8) -> float:
    """Golden-section maximizer of a scalar function on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
    return 0.5 * (a + b)


def _grid_refine_max(f, nodes: np.ndarray, tol: float = 1e-8) -> float:
    """Scan a grid for the best node, then golden-section inside the
    neighboring bracket."""
    vals = np.array([f(t) for t in nodes])
    k = int(np.argmax(vals))
    lo = nodes[max(k - 1, 0)]
    hi = nodes[min(k + 1, nodes.size - 1)]
    if lo == hi:
        return float(lo)
    return _golden_max(f, float(lo), float(hi), tol)


def score_mle(u, bank: ItemBank, tol: float = 1e-8, grid: QuadratureGrid | None = None) -> float:
    """Maximum-likelihood ability.

    Guessing-free banks use the identity theta = g^-1(T(u)).  Guessing banks
    maximize the log-likelihood over the grid interval with golden-section
    refinement.  Zero and perfect raw scores raise ``BoundaryScoreError``.
    """
    _check_interior_score(u, bank)
    if not bank.has_guessing:
        return g_inverse(accumulated_discrimination(u, bank), bank, tol)
    nodes = (grid or QuadratureGrid.standard_normal()).nodes
    return _grid_refine_max(lambda t: float(log_likelihood_curve(u, bank, [t])[0]), nodes, tol)


def test_information(bank: ItemBank, thetas) -> np.ndarray:
    """Fisher test information I(theta) = sum of item informations.

    Guessing-free items contribute a^2 P (1-P); with a lower asymptote the
    contribution is a^2 (1-P) (P-c)^2 / ((1-c)^2 P).
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=np.float64))
    a, b, c = bank.a, bank.b, bank.c
    z = a[None, :] * (thetas[:, None] - b[None, :])
    q = stable_logistic(z)
    p = c[None, :] + (1.0 - c[None, :]) * q
    info = a[None, :] ** 2 * (1.0 - p) * (p - c[None, :]) ** 2 / (
        (1.0 - c[None, :]) ** 2 * np.maximum(p, 1e-300)
    )
    return info.sum(axis=1)


def score_wle(u, bank: ItemBank, tol: float = 1e-8, grid: QuadratureGrid | None = None) -> float:
    """Weighted-likelihood ability: argmax of log L(theta) + 0.5 log I(theta).

    Finite for every response pattern, including zero and perfect scores.
    """
    if bank.n_items == 0:
        raise ValidationError("WLE needs a nonempty bank")
    nodes = (grid or QuadratureGrid.standard_normal()).nodes

    def weighted(t: float) -> float:
        ll = float(log_likelihood_curve(u, bank, [t])[0])
        info = float(test_information(bank, [t])[0])
        return ll + 0.5 * np.log(max(info, 1e-300))

    return _grid_refine_max(weighted, nodes, tol)


def posterior_cdf_dominates(
    u1, u2, bank: ItemBank, g_hat: QuadratureGrid, tol: float = 1e-12
) -> bool:
    """First-order stochastic dominance of the higher-T posterior.

    True iff at every grid node the posterior CDF of the pattern with the
    larger accumulated discrimination lies at or below the CDF of the other
    pattern (within a float tolerance).  This is the ordering that permits a
    pointwise coupling of the two posterior ability variables.
    """
    if bank.has_guessing:
        raise ValidationError("stochastic-dominance check is defined for guessing-free banks")
    t1 = accumulated_discrimination(u1, bank)
    t2 = accumulated_discrimination(u2, bank)
    lo_pat, hi_pat = (u1, u2) if t1 <= t2 else (u2, u1)
    cdf_lo = posterior(lo_pat, bank, g_hat).cdf()
    cdf_hi = posterior(hi_pat, bank, g_hat).cdf()
    return bool(np.all(cdf_hi <= cdf_lo + tol))


# ---------------------------------------------------------------------------
# population scoring
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AbilityTable:
    """Per-examinee raw count, accumulated discrimination and ability estimate."""

    ids: tuple[str, ...]
    n_correct: np.ndarray
    statistic: np.ndarray
    theta: np.ndarray
    estimator: str

    def __post_init__(self):
        n_correct = np.asarray(self.n_correct, dtype=np.int64)
        statistic = np.asarray(self.statistic, dtype=np.float64)
        theta = np.asarray(self.theta, dtype=np.float64)
        for arr in (n_correct, statistic, theta):
            arr.setflags(write=False)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "n_correct", n_correct)
        object.__setattr__(self, "statistic", statistic)
        object.__setattr__(self, "theta", theta)
        n = len(self.ids)
        if not (n_correct.shape == statistic.shape == theta.shape == (n,)):
            raise ValidationError("ability table columns must align with ids")

    @property
    def n_examinees(self) -> int:
        return len(self.ids)


def build_ability_table(
    data: ResponseMatrix,
    bank: ItemBank,
    estimator: EstimatorKind,
    grid: QuadratureGrid | None = None,
    mle_tol: float = 1e-8,
) -> AbilityTable:
    """Score every examinee with one estimator.

    MLE raises ``BoundaryScoreError`` if the data contain zero or perfect
    raw scores; the Bayesian estimators and WLE handle every pattern.
    """
    if data.n_items != bank.n_items:
        raise ValidationError(
            f"response matrix has {data.n_items} items, bank has {bank.n_items}"
        )
    grid = grid or QuadratureGrid.standard_normal()
    estimator = EstimatorKind(estimator)
    counts = data.counts().astype(np.int64)
    u_float = data.values.astype(np.float64)
    statistic = u_float @ bank.a

    if estimator in (EstimatorKind.EAP, EstimatorKind.MAP, EstimatorKind.POSTERIOR_MEDIAN):
        log_lik = log_likelihood_matrix(data, bank, grid.nodes)
        with np.errstate(divide="ignore"):
            log_w = np.log(grid.weights)
        mass, _ = _mass_rows(log_lik, log_w)
        if estimator is EstimatorKind.EAP:
            theta = mass @ grid.nodes
        elif estimator is EstimatorKind.MAP:
            best = mass.max(axis=1, keepdims=True)
            is_max = mass == best
            # ties toward the larger node: take the last maximal index
            idx = mass.shape[1] - 1 - np.argmax(is_max[:, ::-1], axis=1)
            theta = grid.nodes[idx]
        else:
            cdf = np.cumsum(mass, axis=1)
            idx = np.sum(cdf < 0.5, axis=1)
            theta = grid.nodes[np.minimum(idx, grid.n_points - 1)]
    elif estimator is EstimatorKind.MLE:
        boundary = (counts == 0) | (counts == data.n_items)
        if boundary.any():
            bad = [data.ids[i] for i in np.flatnonzero(boundary)[:5]]
            raise BoundaryScoreError(
                f"{int(boundary.sum())} examinee(s) have zero or perfect scores "
                f"(e.g. {', '.join(bad)}); no finite MLE exists",
                code="zero_score" if counts[boundary][0] == 0 else "perfect_score",
            )
        if not bank.has_guessing:
            theta = g_inverse_many(statistic, bank, mle_tol)
        else:
            theta = np.array(
                [score_mle(row, bank, mle_tol, grid) for row in data.values]
            )
    else:  # WLE
        theta = np.array([score_wle(row, bank, mle_tol, grid) for row in data.values])

    return AbilityTable(data.ids, counts, statistic, theta, estimator.value)
