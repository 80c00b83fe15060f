"""Core dichotomous IRT machinery: item response functions and likelihoods.

The response function for an item with discrimination ``a``, difficulty ``b``
and lower asymptote ``c`` is

    P(theta) = c + (1 - c) * sigma(a * (theta - b)),   sigma(x) = 1/(1+e^-x)

with ``c = 0`` for the one- and two-parameter models.  The module also hosts
the sufficient-statistic machinery for guessing-free banks: the accumulated
discrimination ``T(u) = sum_i a_i u_i`` of the correctly answered items, the
strictly increasing map ``g(theta) = sum_i a_i P_i(theta)`` and its inverse,
through which the joint maximum-likelihood ability is ``g^-1(T)``.

All types are immutable after construction and every operation is a pure
function, so everything here is safe for unrestricted parallel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import BoundaryScoreError, NonConvergenceError, ValidationError

__all__ = [
    "ModelFamily",
    "ModelKind",
    "Item",
    "ItemBank",
    "ResponseMatrix",
    "QuadratureGrid",
    "icc_prob",
    "log_likelihood",
    "accumulated_discrimination",
    "g_of_theta",
    "g_inverse",
]


# ---------------------------------------------------------------------------
# numerically stable logistic helpers
# ---------------------------------------------------------------------------

def stable_logistic(x):
    """Logistic sigma(x) without overflow for any finite float argument."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def log_logistic(x):
    """log sigma(x), computed without underflow of 1 - sigma(x)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = -np.log1p(np.exp(-x[pos]))
    out[~pos] = x[~pos] - np.log1p(np.exp(x[~pos]))
    return out


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

class ModelFamily(str, Enum):
    ONE_PL = "1pl"
    RASCH = "rasch"
    TWO_PL = "2pl"
    THREE_PL = "3pl"


@dataclass(frozen=True)
class ModelKind:
    """Model tag: 1PL, Rasch with a common discrimination, 2PL or 3PL."""

    family: ModelFamily
    common_discrimination: float = 1.0

    def __post_init__(self):
        if self.family is ModelFamily.RASCH:
            if not (self.common_discrimination > 0 and math.isfinite(self.common_discrimination)):
                raise ValidationError(
                    f"Rasch common discrimination must be positive, got {self.common_discrimination}"
                )
        elif self.common_discrimination != 1.0:
            raise ValidationError("common_discrimination is only meaningful for the Rasch model")

    @classmethod
    def one_pl(cls) -> "ModelKind":
        return cls(ModelFamily.ONE_PL)

    @classmethod
    def rasch(cls, common_discrimination: float) -> "ModelKind":
        return cls(ModelFamily.RASCH, common_discrimination)

    @classmethod
    def two_pl(cls) -> "ModelKind":
        return cls(ModelFamily.TWO_PL)

    @classmethod
    def three_pl(cls) -> "ModelKind":
        return cls(ModelFamily.THREE_PL)

    @property
    def has_guessing(self) -> bool:
        return self.family is ModelFamily.THREE_PL


@dataclass(frozen=True)
class Item:
    """Item parameters: discrimination ``a`` > 0, difficulty ``b``, guessing ``c`` in [0, 1)."""

    a: float
    b: float
    c: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValidationError(f"discrimination must be a positive finite real, got {self.a}")
        if not math.isfinite(self.b):
            raise ValidationError(f"difficulty must be finite, got {self.b}")
        if not (0.0 <= self.c < 1.0):
            raise ValidationError(f"guessing must lie in [0, 1), got {self.c}")


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ItemBank:
    """Ordered collection of items under one model.

    Item order is the index set of an analysis run and is stable across all
    operations.  Banks may be empty (zero information); operations that need
    at least one item raise explicitly.
    """

    model: ModelKind
    items: tuple[Item, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if not self.labels:
            object.__setattr__(
                self, "labels", tuple(f"item_{i + 1}" for i in range(len(self.items)))
            )
        else:
            object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != len(self.items):
            raise ValidationError("labels length must match item count")
        fam = self.model.family
        for idx, item in enumerate(self.items):
            if item.c != 0.0 and fam is not ModelFamily.THREE_PL:
                raise ValidationError(f"item {idx}: nonzero guessing requires the 3PL model")
            if fam is ModelFamily.ONE_PL and item.a != 1.0:
                raise ValidationError(f"item {idx}: 1PL requires discrimination 1, got {item.a}")
            if fam is ModelFamily.RASCH and item.a != self.model.common_discrimination:
                raise ValidationError(
                    f"item {idx}: Rasch requires the common discrimination "
                    f"{self.model.common_discrimination}, got {item.a}"
                )

    @classmethod
    def from_arrays(cls, model: ModelKind, a, b, c=None, labels: Sequence[str] = ()) -> "ItemBank":
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        c = np.zeros_like(a) if c is None else np.asarray(c, dtype=np.float64)
        if not (a.shape == b.shape == c.shape):
            raise ValidationError("parameter arrays must share one shape")
        items = tuple(Item(float(ai), float(bi), float(ci)) for ai, bi, ci in zip(a, b, c))
        return cls(model, items, tuple(labels))

    def __len__(self) -> int:
        return len(self.items)

    @property
    def n_items(self) -> int:
        return len(self.items)

    @property
    def a(self) -> np.ndarray:
        return np.array([it.a for it in self.items])

    @property
    def b(self) -> np.ndarray:
        return np.array([it.b for it in self.items])

    @property
    def c(self) -> np.ndarray:
        return np.array([it.c for it in self.items])

    @property
    def sum_a(self) -> float:
        return float(np.sum(self.a))

    @property
    def has_guessing(self) -> bool:
        return any(it.c > 0.0 for it in self.items) or self.model.has_guessing

    def subset(self, indices: Sequence[int]) -> "ItemBank":
        idx = list(indices)
        return ItemBank(
            self.model,
            tuple(self.items[i] for i in idx),
            tuple(self.labels[i] for i in idx),
        )


@dataclass(frozen=True)
class ResponseMatrix:
    """Dichotomous responses of N examinees to n items.

    Missing cells are resolved to 0 at ingestion; ``n_missing_filled``
    records how many were filled.
    """

    ids: tuple[str, ...]
    values: np.ndarray
    n_missing_filled: int = 0

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 2:
            raise ValidationError(f"response matrix must be 2-d, got ndim={vals.ndim}")
        if not np.isin(vals, (0, 1)).all():
            raise ValidationError("response entries must all be 0 or 1")
        vals = vals.astype(np.int8, copy=True)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        if len(self.ids) != vals.shape[0]:
            raise ValidationError(
                f"{len(self.ids)} ids for {vals.shape[0]} response rows"
            )
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("examinee ids must be unique")

    @property
    def n_examinees(self) -> int:
        return self.values.shape[0]

    @property
    def n_items(self) -> int:
        return self.values.shape[1]

    def counts(self) -> np.ndarray:
        """Raw number-correct per examinee."""
        return self.values.sum(axis=1)

    def select_items(self, indices: Sequence[int]) -> "ResponseMatrix":
        return ResponseMatrix(self.ids, self.values[:, list(indices)], self.n_missing_filled)

    def select_examinees(self, indices: Sequence[int]) -> "ResponseMatrix":
        idx = list(indices)
        return ResponseMatrix(
            tuple(self.ids[i] for i in idx), self.values[idx, :], self.n_missing_filled
        )


@dataclass(frozen=True)
class QuadratureGrid:
    """Discrete ability distribution: strictly increasing nodes with weights summing to 1."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = _readonly(self.nodes)
        weights = _readonly(self.weights)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ValidationError("nodes and weights must be 1-d arrays of equal length")
        if nodes.size == 0:
            raise ValidationError("grid must contain at least one node")
        if not np.all(np.diff(nodes) > 0):
            raise ValidationError("grid nodes must be strictly increasing")
        if np.any(weights < 0):
            raise ValidationError("grid weights must be nonnegative")
        if abs(float(weights.sum()) - 1.0) > 1e-12:
            raise ValidationError(f"grid weights must sum to 1, got {weights.sum()!r}")

    @property
    def n_points(self) -> int:
        return self.nodes.size

    @classmethod
    def standard_normal(cls, n_points: int = 61, lo: float = -4.0, hi: float = 4.0) -> "QuadratureGrid":
        """Equally spaced nodes on [lo, hi] with renormalized N(0,1) density weights."""
        if n_points < 1 or lo >= hi:
            raise ValidationError("need n_points >= 1 and lo < hi")
        nodes = np.linspace(lo, hi, n_points)
        dens = np.exp(-0.5 * nodes**2)
        return cls(nodes, dens / dens.sum())

    @classmethod
    def uniform(cls, n_points: int = 61, lo: float = -4.0, hi: float = 4.0) -> "QuadratureGrid":
        if n_points < 1 or lo >= hi:
            raise ValidationError("need n_points >= 1 and lo < hi")
        nodes = np.linspace(lo, hi, n_points)
        return cls(nodes, np.full(n_points, 1.0 / n_points))

    def with_weights(self, weights) -> "QuadratureGrid":
        return QuadratureGrid(self.nodes, np.asarray(weights, dtype=np.float64))


# ---------------------------------------------------------------------------
# response function and likelihood
# ---------------------------------------------------------------------------

def icc_prob(theta, item: Item, model: ModelKind):
    """Probability of a correct response at ability ``theta``.

    Strictly increasing in theta with limits ``c`` and 1.  Stable for
    |a*(theta-b)| up to at least 700.
    """
    if model.family is not ModelFamily.THREE_PL and item.c != 0.0:
        raise ValidationError("nonzero guessing requires the 3PL model")
    z = item.a * (np.asarray(theta, dtype=np.float64) - item.b)
    p = item.c + (1.0 - item.c) * stable_logistic(z)
    return float(p) if np.isscalar(theta) else p


def _as_response_vector(u, n_items: int) -> np.ndarray:
    u = np.asarray(u)
    if u.ndim != 1 or u.size != n_items:
        raise ValidationError(f"response vector length {u.size} != bank size {n_items}")
    if not np.isin(u, (0, 1)).all():
        raise ValidationError("responses must be 0 or 1")
    return u.astype(np.float64)


def _log_icc_terms(bank: ItemBank, thetas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(log P, log(1-P)) for every (theta, item) pair, shape (len(thetas), n).

    log(1-P) = log(1-c) + log sigma(-z) exactly, which keeps both terms finite
    for any finite theta.
    """
    a, b, c = bank.a, bank.b, bank.c
    z = a[None, :] * (thetas[:, None] - b[None, :])
    log_sig = log_logistic(z)
    log_one_minus = np.log1p(-c)[None, :] + log_logistic(-z)
    if np.any(c > 0):
        p = c[None, :] + (1.0 - c)[None, :] * stable_logistic(z)
        log_p = np.where(c[None, :] > 0, np.log(p), log_sig)
    else:
        log_p = log_sig
    return log_p, log_one_minus


def log_likelihood_curve(u, bank: ItemBank, thetas) -> np.ndarray:
    """log L(u | theta) evaluated at an array of abilities."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=np.float64))
    uf = _as_response_vector(u, bank.n_items)
    if bank.n_items == 0:
        return np.zeros(thetas.shape)
    log_p, log_q = _log_icc_terms(bank, thetas)
    return log_p @ uf + log_q @ (1.0 - uf)


def log_likelihood(u, theta: float, bank: ItemBank) -> float:
    """Log-likelihood of one response vector at one ability."""
    return float(log_likelihood_curve(u, bank, [theta])[0])


def log_likelihood_matrix(data: ResponseMatrix, bank: ItemBank, thetas) -> np.ndarray:
    """log L(u_j | theta_q) for every examinee j and node q, shape (N, q)."""
    thetas = np.asarray(thetas, dtype=np.float64)
    if data.n_items != bank.n_items:
        raise ValidationError(
            f"response matrix has {data.n_items} items, bank has {bank.n_items}"
        )
    log_p, log_q = _log_icc_terms(bank, thetas)
    u = data.values.astype(np.float64)
    return u @ log_p.T + (1.0 - u) @ log_q.T


def accumulated_discrimination(u, bank: ItemBank) -> float:
    """T(u) = sum of estimated discriminations over the correct items."""
    uf = _as_response_vector(u, bank.n_items)
    if bank.n_items == 0:
        return 0.0
    return float(bank.a @ uf)


# ---------------------------------------------------------------------------
# sufficient-statistic map g and its inverse (guessing-free banks only)
# ---------------------------------------------------------------------------

def _require_no_guessing(bank: ItemBank, op: str) -> None:
    # Under guessing no scalar statistic plays the role of T, so g is undefined.
    if bank.has_guessing:
        raise ValidationError(f"{op} is defined for guessing-free (1PL/Rasch/2PL) banks only")


def _g_curve(bank: ItemBank, thetas: np.ndarray) -> np.ndarray:
    a, b = bank.a, bank.b
    z = a[None, :] * (thetas[:, None] - b[None, :])
    return stable_logistic(z) @ a


def g_of_theta(theta: float, bank: ItemBank) -> float:
    """g(theta) = sum_i a_i P_i(theta); strictly increasing with range (0, sum a)."""
    _require_no_guessing(bank, "g_of_theta")
    return float(_g_curve(bank, np.asarray([theta], dtype=np.float64))[0])


def g_inverse_many(t, bank: ItemBank, tol: float = 1e-10) -> np.ndarray:
    """Vectorized monotone bisection solving g(theta) = t for each entry of t.

    Brackets are expanded outward as needed, then bisected until the bracket
    collapses to floating-point resolution, which leaves |g(theta) - t| well
    inside ``tol`` for any t strictly inside (0, sum a).
    """
    _require_no_guessing(bank, "g_inverse")
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    total = bank.sum_a
    if np.any(t <= 0.0):
        raise BoundaryScoreError(
            "statistic at or below 0 corresponds to a zero score; no finite ability exists",
            code="zero_score",
        )
    if np.any(t >= total):
        raise BoundaryScoreError(
            "statistic at or above sum(a) corresponds to a perfect score; no finite ability exists",
            code="perfect_score",
        )

    lo = np.full(t.shape, -8.0)
    hi = np.full(t.shape, 8.0)
    # expand each bracket until it straddles its target (g saturates in float64
    # far before |theta| = 800, so the cap is unreachable for admissible t)
    for bound, grow in ((lo, -1.0), (hi, 1.0)):
        width = 8.0
        while True:
            g_val = _g_curve(bank, bound)
            bad = (g_val >= t) if grow < 0 else (g_val <= t)
            if not bad.any():
                break
            width *= 2.0
            if width > 800.0:
                raise BoundaryScoreError(
                    "statistic numerically indistinguishable from the attainable boundary",
                    code="zero_score" if grow < 0 else "perfect_score",
                )
            bound[bad] += grow * width

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        stalled = (mid <= lo) | (mid >= hi)
        if stalled.all():
            break
        g_mid = _g_curve(bank, mid)
        below = g_mid < t
        lo = np.where(below & ~stalled, mid, lo)
        hi = np.where(~below & ~stalled, mid, hi)
        if np.all((hi - lo) < 1e-13 * np.maximum(1.0, np.abs(mid))):
            break
    theta = 0.5 * (lo + hi)
    residual = np.abs(_g_curve(bank, theta) - t)
    if np.any(residual > tol):
        raise NonConvergenceError(
            f"bisection residual {residual.max():.3e} exceeds tol {tol:.3e}"
        )
    return theta


def g_inverse(t: float, bank: ItemBank, tol: float = 1e-10) -> float:
    """Inverse of g: the ability whose expected accumulated discrimination is t."""
    return float(g_inverse_many([t], bank, tol)[0])
