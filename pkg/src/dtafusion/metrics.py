"""Evaluation metrics for affinity regression.

Implements MSE (+RMSE), concordance index, r_m^2, Spearman, and Pearson with
the exact pair/tie conventions the tests enumerate by brute force:

- CI sums h(p_i - p_j) over all ordered pairs with y_i > y_j, h = 1/0.5/0 for
  positive/zero/negative differences; all-tied targets are undefined (raised,
  not reported as 0).
- r_m^2 = r^2 * (1 - sqrt(|r^2 - r0^2|)) with r^2 the squared Pearson
  correlation (with intercept) and r0^2 = (sum p*y)^2 / (sum p^2 * sum y^2)
  the through-origin squared correlation; the absolute value guards the
  r0^2 > r^2 case.
- Spearman is the Pearson correlation of average ranks (exactly the classic
  1 - 6*sum(d^2)/(n(n^2-1)) formula when ranks are tie-free).
"""

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class MetricsReport:
    """The evaluation record: six metrics plus the sample count."""

    mse: float
    rmse: float
    ci: float
    rm2: float
    spearman: float
    pearson: float
    n: int

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _check_pair(p, y, min_len=1):
    p = np.asarray(p, dtype=float)
    y = np.asarray(y, dtype=float)
    if p.ndim != 1 or y.ndim != 1:
        raise ValueError("inputs must be 1-dimensional")
    if p.shape[0] != y.shape[0]:
        raise ValueError(f"length mismatch: {p.shape[0]} vs {y.shape[0]}")
    if p.shape[0] < min_len:
        raise ValueError(f"need at least {min_len} values, got {p.shape[0]}")
    return p, y


def mse(p, y):
    """Mean squared error."""
    p, y = _check_pair(p, y)
    return float(np.mean((p - y) ** 2))


def rmse(p, y):
    return math.sqrt(mse(p, y))


def concordance_index(p, y):
    """Fraction of target-ordered pairs ranked concordantly, ties as half."""
    p, y = _check_pair(p, y, min_len=2)
    s, z = kernels.ci_pair_stats(np.ascontiguousarray(y), np.ascontiguousarray(p))
    if z == 0:
        raise ValueError("concordance index undefined: all targets are tied")
    return float(s / z)


def pearson(p, y):
    """Linear correlation cov(P, Y) / (sigma_P * sigma_Y)."""
    p, y = _check_pair(p, y, min_len=2)
    dp = p - p.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(dp @ dp)) * math.sqrt(float(dy @ dy))
    if denom == 0:
        raise ValueError("pearson undefined: zero variance input")
    return float(dp @ dy) / denom


def _ranks(v):
    """Average ranks (1-based); ties share the mean of their positions."""
    order = np.argsort(v, kind="stable")
    sorted_v = v[order]
    ranks = np.empty(v.shape[0])
    i = 0
    while i < v.shape[0]:
        j = i
        while j + 1 < v.shape[0] and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(p, y):
    """Rank correlation: Pearson correlation of average-rank vectors."""
    p, y = _check_pair(p, y, min_len=2)
    return pearson(_ranks(p), _ranks(y))


def rm2(p, y):
    """External-validation metric r^2 * (1 - sqrt(|r^2 - r0^2|))."""
    p, y = _check_pair(p, y, min_len=2)
    r = pearson(p, y)
    r2 = r * r
    sp2 = float(p @ p)
    sy2 = float(y @ y)
    if sp2 == 0 or sy2 == 0:
        raise ValueError("rm2 undefined: zero-norm input")
    r02 = float(p @ y) ** 2 / (sp2 * sy2)
    return r2 * (1.0 - math.sqrt(abs(r2 - r02)))


def compute_report(p, y):
    """All six metrics on a prediction/target pair."""
    p, y = _check_pair(p, y, min_len=2)
    m = mse(p, y)
    return MetricsReport(
        mse=m,
        rmse=math.sqrt(m),
        ci=concordance_index(p, y),
        rm2=rm2(p, y),
        spearman=spearman(p, y),
        pearson=pearson(p, y),
        n=int(p.shape[0]),
    )
