"""Covariance functions over conditional spaces.

Each dimension contributes ``k_i(x, x') = kappa_i(d_i(x, x'))`` where
``kappa_i`` is a Euclidean base kernel (exponentiated or rational
quadratic) and ``d_i`` the dimension's pseudometric.  The per-dimension
kernels are then summed or multiplied.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from archk.errors import EmptyInput, InvalidHyperparameter, NegativeDistance, SchemaError
from archk.metric import DimMetricParams, dist_cat, dist_real, embed_cat, embed_real, omega
from archk.space import Config, ParamSpace, Real, validate_config

COMBINATIONS = ("sum", "product")


def _positive(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, np.floating)):
        raise InvalidHyperparameter(f"{name} must be a positive number, got {value!r}")
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise InvalidHyperparameter(f"{name} must be positive and finite, got {value}")
    return value


@dataclass(frozen=True)
class ExpQuad:
    """``sigma**2 * exp(-delta**2 / (2 * lengthscale**2))``"""

    sigma: float = 1.0
    lengthscale: float = 1.0

    kind = "eq"

    def __post_init__(self):
        object.__setattr__(self, "sigma", _positive("sigma", self.sigma))
        object.__setattr__(self, "lengthscale", _positive("lengthscale", self.lengthscale))

    def __call__(self, delta: float) -> float:
        return self.sigma**2 * math.exp(-0.5 * (delta / self.lengthscale) ** 2)

    def to_dict(self) -> dict:
        return {"type": "eq", "sigma": self.sigma, "lengthscale": self.lengthscale}


@dataclass(frozen=True)
class RationalQuad:
    """``sigma**2 * (1 + delta**2 / (2 * alpha * lengthscale**2)) ** -alpha``"""

    sigma: float = 1.0
    lengthscale: float = 1.0
    alpha: float = 1.0

    kind = "rq"

    def __post_init__(self):
        object.__setattr__(self, "sigma", _positive("sigma", self.sigma))
        object.__setattr__(self, "lengthscale", _positive("lengthscale", self.lengthscale))
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))

    def __call__(self, delta: float) -> float:
        scaled = (delta / self.lengthscale) ** 2 / (2.0 * self.alpha)
        return self.sigma**2 * (1.0 + scaled) ** -self.alpha

    def to_dict(self) -> dict:
        return {"type": "rq", "sigma": self.sigma, "lengthscale": self.lengthscale, "alpha": self.alpha}


BaseKernel = Union[ExpQuad, RationalQuad]


def kappa(base: BaseKernel, delta: float) -> float:
    if not delta >= 0.0:
        raise NegativeDistance(f"distance must be non-negative, got {delta}")
    return base(delta)


def base_kernel_from_dict(raw: Mapping) -> BaseKernel:
    raw = dict(raw)
    kind = raw.pop("type", None)
    allowed = {"eq": {"sigma", "lengthscale"}, "rq": {"sigma", "lengthscale", "alpha"}}
    if kind not in allowed:
        raise SchemaError(f"kernel type must be 'eq' or 'rq', got {kind!r}")
    unknown = set(raw) - allowed[kind]
    if unknown:
        raise SchemaError(f"unknown keys for {kind} kernel: {sorted(unknown)}")
    return (ExpQuad if kind == "eq" else RationalQuad)(**raw)


@dataclass(frozen=True)
class DimKernel:
    """Hyperparameters for one dimension: decay ``gamma``, trade-off ``rho``
    and the Euclidean base kernel."""

    gamma: float = 1.0
    rho: float = 0.5
    base: BaseKernel = field(default_factory=ExpQuad)

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "rho": self.rho, "kernel": self.base.to_dict()}


class KernelSpec:
    """Per-dimension kernel hyperparameters bound to a space.

    ``combination`` is ``"sum"`` or ``"product"``.  The hierarchy weights
    ``omega`` are derived from the gammas at construction and exposed through
    ``params[i]``.
    """

    def __init__(self, space: ParamSpace, dims: Mapping[str, DimKernel], combination: str = "product"):
        if combination not in COMBINATIONS:
            raise SchemaError(f"combination must be one of {COMBINATIONS}, got {combination!r}")
        missing = [i for i in space.ids if i not in dims]
        extra = [i for i in dims if i not in space]
        if missing or extra:
            raise SchemaError(f"kernel spec must cover exactly the space; missing {missing}, unknown {extra}")
        self.space = space
        self.combination = combination
        self.dims: dict[str, DimKernel] = {i: dims[i] for i in space.ids}
        gammas = {i: d.gamma for i, d in self.dims.items()}
        self.params: dict[str, DimMetricParams] = {
            i: DimMetricParams(d.gamma, d.rho, omega(space, gammas, i)) for i, d in self.dims.items()
        }

    @classmethod
    def shared(cls, space: ParamSpace, base: BaseKernel | None = None, gamma: float = 1.0,
               rho: float = 0.5, combination: str = "product") -> "KernelSpec":
        """Same hyperparameters and base kernel on every dimension."""
        dk = DimKernel(gamma, rho, base if base is not None else ExpQuad())
        return cls(space, {i: dk for i in space.ids}, combination)

    def replace(self, i: str, **changes) -> "KernelSpec":
        """Copy with dimension ``i``'s hyperparameters changed."""
        dims = dict(self.dims)
        dims[i] = replace(dims[i], **changes)
        return KernelSpec(self.space, dims, self.combination)

    def __eq__(self, other):
        if not isinstance(other, KernelSpec):
            return NotImplemented
        return (self.space, self.dims, self.combination) == (other.space, other.dims, other.combination)

    def __repr__(self):
        return f"KernelSpec({self.combination}, {self.dims})"

    def to_dict(self) -> dict:
        return {
            "combination": self.combination,
            "dimensions": {i: d.to_dict() for i, d in self.dims.items()},
        }

    @classmethod
    def from_dict(cls, space: ParamSpace, raw: Mapping) -> "KernelSpec":
        """Parse ``{"combination", "default"?, "dimensions"?}``.

        Each dimension entry holds any of ``gamma``, ``rho``, ``kernel``;
        omitted fields fall back to ``default`` and then to built-in
        defaults (gamma 1, rho 0.5, EQ kernel with unit scales).
        """
        unknown = set(raw) - {"combination", "default", "dimensions"}
        if unknown:
            raise SchemaError(f"unknown kernel-spec keys: {sorted(unknown)}")
        default = _dim_kernel(DimKernel(), raw.get("default", {}), "default")
        per_dim = raw.get("dimensions", {})
        if not isinstance(per_dim, Mapping):
            raise SchemaError("'dimensions' must be an object keyed by dimension id")
        extra = [i for i in per_dim if i not in space]
        if extra:
            raise SchemaError(f"kernel spec names unknown dimensions {extra}")
        dims = {i: _dim_kernel(default, per_dim.get(i, {}), i) for i in space.ids}
        return cls(space, dims, raw.get("combination", "product"))

    def digest(self) -> str:
        blob = json.dumps(
            {"space": self.space.to_dict(), "kernel": self.to_dict()},
            sort_keys=True, separators=(",", ":"), default=str,
        )
        return hashlib.sha256(blob.encode()).hexdigest()


def _dim_kernel(fallback: DimKernel, raw: Mapping, where: str) -> DimKernel:
    if not isinstance(raw, Mapping):
        raise SchemaError(f"{where}: expected an object")
    unknown = set(raw) - {"gamma", "rho", "kernel"}
    if unknown:
        raise SchemaError(f"{where}: unknown keys {sorted(unknown)}")
    base = base_kernel_from_dict(raw["kernel"]) if "kernel" in raw else fallback.base
    dk = DimKernel(raw.get("gamma", fallback.gamma), raw.get("rho", fallback.rho), base)
    DimMetricParams(dk.gamma, dk.rho, 1.0)
    return dk


def sample_kernel_spec(space: ParamSpace, rng: np.random.Generator, combination: str = "product",
                       kind: str = "eq") -> KernelSpec:
    """Random hyperparameters: gamma, rho ~ U[0, 1]; lengthscale log-uniform
    on [1e-2, 1e2]; sigma log-uniform on [1e-1, 1e1]; for RQ, alpha
    log-uniform on [1e-1, 1e1]."""
    dims = {}
    for i in space.ids:
        gamma, rho = rng.random(), rng.random()
        lengthscale = 10.0 ** rng.uniform(-2.0, 2.0)
        sigma = 10.0 ** rng.uniform(-1.0, 1.0)
        if kind == "eq":
            base = ExpQuad(sigma, lengthscale)
        elif kind == "rq":
            base = RationalQuad(sigma, lengthscale, 10.0 ** rng.uniform(-1.0, 1.0))
        else:
            raise SchemaError(f"kernel type must be 'eq' or 'rq', got {kind!r}")
        dims[i] = DimKernel(gamma, rho, base)
    return KernelSpec(space, dims, combination)


def _points(spec: KernelSpec, x: Config) -> list:
    return [(x.get(i), i in x.active) for i in spec.space.ids]


def _dim_distance(spec: KernelSpec, dim, pa, pb) -> float:
    params = spec.params[dim.id]
    if isinstance(dim, Real):
        return dist_real(params, (dim.lower, dim.upper), pa, pb)
    return dist_cat(params, dim.values, pa, pb)


def dim_distance(spec: KernelSpec, i: str, x: Mapping, xp: Mapping) -> float:
    """Pseudometric ``d_i(x, x')`` for dimension ``i``."""
    space = spec.space
    dim = space.dim(i)
    x, xp = validate_config(space, x), validate_config(space, xp)
    return _dim_distance(spec, dim, (x.get(i), i in x.active), (xp.get(i), i in xp.active))


def dim_embedding(spec: KernelSpec, i: str, x: Mapping) -> np.ndarray:
    """Image of ``x`` under dimension ``i``'s embedding (length 2 or m)."""
    space = spec.space
    dim = space.dim(i)
    x = validate_config(space, x)
    params = spec.params[i]
    active = i in x.active
    if isinstance(dim, Real):
        return embed_real(params, (dim.lower, dim.upper), (x.get(i), active))
    j = dim.index(x[i]) if active else None
    return embed_cat(params, dim.m, (j, active))


def k_dim(spec: KernelSpec, i: str, x: Mapping, xp: Mapping) -> float:
    return spec.dims[spec.space.dim(i).id].base(dim_distance(spec, i, x, xp))


def _combine(spec: KernelSpec, pa: list, pb: list) -> float:
    if spec.combination == "sum":
        total = 0.0
        for dim, a, b in zip(spec.space.dimensions, pa, pb):
            total += spec.dims[dim.id].base(_dim_distance(spec, dim, a, b))
        return total
    total = 1.0
    for dim, a, b in zip(spec.space.dimensions, pa, pb):
        total *= spec.dims[dim.id].base(_dim_distance(spec, dim, a, b))
    return total


def k_combined(spec: KernelSpec, x: Mapping, xp: Mapping) -> float:
    """Sum or product of the per-dimension kernels, in canonical order."""
    space = spec.space
    x, xp = validate_config(space, x), validate_config(space, xp)
    return _combine(spec, _points(spec, x), _points(spec, xp))


def configs_digest(configs: Sequence[Mapping]) -> str:
    payload = [c.to_dict() if isinstance(c, Config) else dict(c) for c in configs]
    blob = json.dumps(payload, separators=(",", ":"), default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class GramMatrix:
    entries: np.ndarray
    config_digest: str
    spec_digest: str

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def gram(spec: KernelSpec, configs: Sequence[Mapping]) -> GramMatrix:
    """``K[m, n] = k(x_m, x_n)``; the upper triangle is computed and mirrored."""
    if len(configs) == 0:
        raise EmptyInput("gram matrix needs at least one configuration")
    checked = [validate_config(spec.space, c) for c in configs]
    pts = [_points(spec, c) for c in checked]
    n = len(pts)
    K = np.empty((n, n))
    for a in range(n):
        for b in range(a, n):
            K[a, b] = K[b, a] = _combine(spec, pts[a], pts[b])
    return GramMatrix(K, configs_digest(checked), spec.digest())


def cross_gram(spec: KernelSpec, configs_a: Sequence[Mapping], configs_b: Sequence[Mapping]) -> np.ndarray:
    """``K[m, n] = k(a_m, b_n)`` as an ``len(a) x len(b)`` array."""
    pa = [_points(spec, validate_config(spec.space, c)) for c in configs_a]
    pb = [_points(spec, validate_config(spec.space, c)) for c in configs_b]
    K = np.empty((len(pa), len(pb)))
    for a, p in enumerate(pa):
        for b, q in enumerate(pb):
            K[a, b] = _combine(spec, p, q)
    return K


def diag(spec: KernelSpec, configs: Sequence[Mapping]) -> np.ndarray:
    """``k(x, x)`` for each configuration."""
    out = np.empty(len(configs))
    for a, c in enumerate(configs):
        p = _points(spec, validate_config(spec.space, c))
        out[a] = _combine(spec, p, p)
    return out
