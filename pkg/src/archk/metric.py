"""Per-dimension pseudometrics and their Euclidean embeddings.

Each dimension ``i`` gets a distance ``d_i(x, x')`` that depends only on
``x_i`` and on whether ``i`` is active in ``x``:

* both inactive: 0
* exactly one active: ``omega_i``
* both active: a value-dependent term bounded by ``omega_i * sqrt(2)``

and a map ``f_i`` into R^2 (real) or R^m (categorical) with
``d_i(x, x') == ||f_i(x) - f_i(x')||``.  Inactive points map to the origin
and active points to the sphere of radius ``omega_i``, which is what makes
``kappa(d_i)`` positive semi-definite for any Euclidean kernel ``kappa``.

Points are passed as ``(value, active)`` pairs; ``value`` may be ``None``
when ``active`` is false.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from archk.errors import (
    GammaOutOfRange,
    InvalidCategoryCount,
    InvalidHyperparameter,
    MissingGamma,
    MissingValue,
    UnknownCategory,
    ValueOutOfBounds,
)
from archk.space import ParamSpace

SQRT2 = math.sqrt(2.0)


def _unit_interval(name: str, value, exc=InvalidHyperparameter) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, np.floating)):
        raise exc(f"{name} must be a real number in [0, 1], got {value!r}")
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise exc(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class DimMetricParams:
    """Hyperparameters of one dimension's pseudometric.

    ``omega`` is the hierarchy weight; use :meth:`from_space` to derive it
    from the per-dimension decay factors rather than setting it by hand.
    """

    gamma: float
    rho: float
    omega: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", _unit_interval("gamma", self.gamma, GammaOutOfRange))
        object.__setattr__(self, "rho", _unit_interval("rho", self.rho))
        object.__setattr__(self, "omega", _unit_interval("omega", self.omega))

    @classmethod
    def from_space(cls, space: ParamSpace, gammas: Mapping[str, float], i: str, rho: float):
        return cls(gammas.get(i), rho, omega(space, gammas, i))


def omega(space: ParamSpace, gammas: Mapping[str, float], i: str) -> float:
    """Product of the decay factors of ``i`` and all of its ancestors.

    Factors are multiplied in canonical dimension order so the result is
    reproducible bit for bit.
    """
    members = space.ancestors(i) | {i}
    result = 1.0
    for j in space.ids:
        if j not in members:
            continue
        if j not in gammas or gammas[j] is None:
            raise MissingGamma(f"no gamma given for dimension {j!r} (needed by {i!r})")
        result *= _unit_interval(f"gamma[{j}]", gammas[j], GammaOutOfRange)
    return result


def _real_point(point, bounds):
    value, active = point
    if not active:
        return None, False
    if value is None:
        raise MissingValue("active real dimension has no value")
    lo, hi = bounds
    value = float(value)
    if not lo <= value <= hi:
        raise ValueOutOfBounds(f"{value} outside [{lo}, {hi}]")
    return value, True


def dist_real(params: DimMetricParams, bounds: tuple[float, float], a, b) -> float:
    """Distance between two points of a bounded real dimension.

    When both are active this is ``omega * sqrt(2) * sqrt(1 - cos(t))`` with
    ``t = pi * rho * (x - x') / (u - l)``, evaluated as
    ``2 * omega * |sin(t / 2)|`` to avoid cancellation for small ``t``.
    """
    xa, act_a = _real_point(a, bounds)
    xb, act_b = _real_point(b, bounds)
    if not act_a and not act_b:
        return 0.0
    if act_a != act_b:
        return params.omega
    lo, hi = bounds
    half_angle = math.pi * params.rho * (xa - xb) / (2.0 * (hi - lo))
    return params.omega * (2.0 * abs(math.sin(half_angle)))


def embed_real(params: DimMetricParams, bounds: tuple[float, float], point) -> np.ndarray:
    """Map a real-dimension point into R^2.

    Active points go to ``omega * [sin(t), cos(t)]`` with
    ``t = pi * rho * (x - l) / (u - l)``; inactive points to the origin.
    """
    x, active = _real_point(point, bounds)
    if not active:
        return np.zeros(2)
    lo, hi = bounds
    angle = math.pi * params.rho * (x - lo) / (hi - lo)
    return params.omega * np.array([math.sin(angle), math.cos(angle)])


def _category_count(m) -> int:
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 2:
        raise InvalidCategoryCount(f"category count must be an integer >= 2, got {m!r}")
    return int(m)


def _cat_values(categories) -> tuple:
    if isinstance(categories, (int, np.integer)) and not isinstance(categories, bool):
        return tuple(range(_category_count(categories)))
    values = tuple(categories)
    _category_count(len(values))
    return values


def _cat_point(point, values):
    symbol, active = point
    if not active:
        return None, False
    if symbol is None:
        raise MissingValue("active categorical dimension has no value")
    if symbol not in values:
        raise UnknownCategory(f"{symbol!r} is not one of {list(values)}")
    return symbol, True


def cat_scale(rho: float, m: int) -> float:
    """Both-active distance between two different categories, per unit omega."""
    return SQRT2 * rho / math.sqrt(1.0 + (m - 1) * (1.0 - rho) ** 2)


def dist_cat(params: DimMetricParams, categories: int | Sequence, a, b) -> float:
    """Distance between two points of a categorical dimension.

    ``categories`` is either the value list or a count ``m`` (values are
    then the indices ``0..m-1``).
    """
    values = _cat_values(categories)
    sa, act_a = _cat_point(a, values)
    sb, act_b = _cat_point(b, values)
    if not act_a and not act_b:
        return 0.0
    if act_a != act_b:
        return params.omega
    if sa == sb:
        return 0.0
    return params.omega * cat_scale(params.rho, len(values))


def embed_cat(params: DimMetricParams, m: int, point) -> np.ndarray:
    """Map a categorical point, given by value index ``j``, into R^m."""
    m = _category_count(m)
    j, active = point
    if not active:
        return np.zeros(m)
    if j is None:
        raise MissingValue("active categorical dimension has no value")
    if isinstance(j, bool) or not isinstance(j, (int, np.integer)) or not 0 <= j < m:
        raise UnknownCategory(f"category index {j!r} outside 0..{m - 1}")
    off = 1.0 - params.rho
    vec = np.full(m, off)
    vec[j] = 1.0
    return vec * (params.omega / math.sqrt(1.0 + (m - 1) * off**2))


def rho_star_paper(m: int) -> float:
    """Closed-form crossover value for the un-rooted normalisation.

    It solves ``sqrt(2) * rho == 1 + (m - 1) * (1 - rho)**2``, i.e. it
    balances activity mismatch against category mismatch for the
    *un-rooted* denominator.  See :func:`rho_star_crossover` for the value
    that matches :func:`dist_cat`.
    """
    m = _category_count(m)
    r2 = SQRT2
    num = r2 - 2.0 + 2.0 * m - math.sqrt(6.0 - 4.0 * r2 + 4.0 * (r2 - 1.0) * m)
    return num / (2.0 * (m - 1))


def rho_star_crossover(m: int) -> float:
    """The ``rho`` at which differing categories are exactly as far apart as
    an activity mismatch (``dist_cat == omega``), found by bisection.

    Below it, an activity mismatch dominates; above it, a category mismatch
    does.  The ratio is strictly increasing in ``rho`` on [0, 1], from 0 to
    ``sqrt(2)``, so the root is unique.
    """
    m = _category_count(m)
    lo, hi = 0.0, 1.0
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if cat_scale(mid, m) < 1.0:
            lo = mid
        else:
            hi = mid
    return min((lo, hi), key=lambda r: abs(cat_scale(r, m) - 1.0))
