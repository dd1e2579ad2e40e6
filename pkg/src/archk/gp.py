"""Exact Gaussian-process regression with the conditional-space kernel."""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

from archk.errors import (
    AllCandidatesFailed,
    DimensionMismatch,
    DomainError,
    EmptyInput,
    InvalidHyperparameter,
    NotFactorizable,
)
from archk.kernel import KernelSpec, cross_gram, diag, gram, sample_kernel_spec
from archk.space import ParamSpace, validate_config

log = logging.getLogger(__name__)

JITTER_START = 1e-10
JITTER_STOP = 1e-4


@dataclass(frozen=True)
class Dataset:
    configs: tuple
    y: np.ndarray

    def __init__(self, configs: Sequence[Mapping], y: Sequence[float]):
        y = np.asarray(y, dtype=float).reshape(-1)
        if len(configs) != len(y):
            raise DimensionMismatch(f"{len(configs)} configs but {len(y)} targets")
        if not np.all(np.isfinite(y)):
            raise DomainError("targets must be finite")
        object.__setattr__(self, "configs", tuple(configs))
        object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.configs)


@dataclass(frozen=True, eq=False)
class GpModel:
    """A fitted GP.  ``L`` is the Cholesky factor of
    ``K + (noise + jitter) * I``; ``jitter`` is 0 for a clean fit."""

    spec: KernelSpec
    noise: float
    configs: tuple
    y: np.ndarray
    K: np.ndarray
    L: np.ndarray
    alpha: np.ndarray
    jitter: float

    @property
    def n(self) -> int:
        return len(self.configs)


class Prediction(NamedTuple):
    mean: np.ndarray
    variance: np.ndarray
    n_clamped: int
    min_raw_variance: float


def _cholesky(A: np.ndarray) -> np.ndarray | None:
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        return None
    # a pivot at rounding level means A is numerically singular even if
    # LAPACK did not flag it
    floor = A.shape[0] * np.finfo(float).eps * np.max(np.diag(A))
    if np.min(np.diag(L)) ** 2 <= floor:
        return None
    return L


def fit(spec: KernelSpec, data: Dataset, noise: float) -> GpModel:
    """Factorise ``K + noise * I``.

    On failure, jitter ``c * mean(diag(K))`` is added with ``c`` running
    from 1e-10 to 1e-4 in decades; :class:`NotFactorizable` if all fail.
    """
    if len(data) == 0:
        raise EmptyInput("cannot fit a GP to an empty dataset")
    if isinstance(noise, bool) or not noise >= 0.0 or not math.isfinite(noise):
        raise InvalidHyperparameter(f"noise variance must be finite and >= 0, got {noise}")
    configs = tuple(validate_config(spec.space, c) for c in data.configs)
    K = gram(spec, configs).entries
    n = len(configs)
    base = K + noise * np.eye(n)
    scale = float(np.mean(np.diag(K)))
    schedule = [0.0]
    c = JITTER_START
    while c <= JITTER_STOP * (1 + 1e-9):
        schedule.append(c * scale)
        c *= 10.0
    for jitter in schedule:
        L = _cholesky(base + jitter * np.eye(n)) if jitter else _cholesky(base)
        if L is not None:
            break
        log.debug("cholesky failed with jitter %g", jitter)
    else:
        raise NotFactorizable(
            f"K + noise*I not factorizable even with jitter {schedule[-1]:g}; the kernel matrix is not PSD"
        )
    if jitter:
        log.info("fit needed jitter %g", jitter)
    alpha = solve_triangular(L.T, solve_triangular(L, data.y, lower=True), lower=False)
    return GpModel(spec, float(noise), configs, data.y.copy(), K, L, alpha, float(jitter))


def predict(model: GpModel, queries: Sequence[Mapping]) -> Prediction:
    """Posterior mean and latent variance (noise excluded) at ``queries``.

    Variances are clamped at zero; the number clamped and the smallest
    pre-clamp value are reported.
    """
    if len(queries) == 0:
        return Prediction(np.empty(0), np.empty(0), 0, math.inf)
    queries = [validate_config(model.spec.space, q) for q in queries]
    Ks = cross_gram(model.spec, model.configs, queries)
    mean = Ks.T @ model.alpha
    v = solve_triangular(model.L, Ks, lower=True)
    raw = diag(model.spec, queries) - np.sum(v * v, axis=0)
    clamped = int(np.sum(raw < 0.0))
    return Prediction(mean, np.maximum(raw, 0.0), clamped, float(np.min(raw)))


def log_marginal_likelihood(model: GpModel) -> float:
    n = model.n
    return float(
        -0.5 * model.y @ model.alpha
        - np.sum(np.log(np.diag(model.L)))
        - 0.5 * n * math.log(2.0 * math.pi)
    )


class TuneResult(NamedTuple):
    spec: KernelSpec
    noise: float
    lml: float
    history: tuple  # LML per candidate, None where the fit failed


def tune(space: ParamSpace, data: Dataset, budget: int, seed: int,
         combination: str = "product", kind: str = "eq") -> TuneResult:
    """Random search over kernel hyperparameters maximising the LML.

    Candidates are drawn with :func:`archk.kernel.sample_kernel_spec` plus a
    noise variance log-uniform on [1e-6, 1].  The first candidate reaching
    the best LML wins.
    """
    if isinstance(budget, bool) or not isinstance(budget, int) or budget < 1:
        raise DomainError(f"budget must be a positive integer, got {budget!r}")
    rng = np.random.default_rng(seed)
    data = Dataset([validate_config(space, c) for c in data.configs], data.y)
    best = None
    history = []
    for k in range(budget):
        spec = sample_kernel_spec(space, rng, combination, kind)
        noise = 10.0 ** rng.uniform(-6.0, 0.0)
        try:
            lml = log_marginal_likelihood(fit(spec, data, noise))
        except NotFactorizable:
            log.debug("candidate %d not factorizable", k)
            history.append(None)
            continue
        history.append(lml)
        if best is None or lml > best.lml:
            best = TuneResult(spec, noise, lml, ())
    if best is None:
        raise AllCandidatesFailed(f"all {budget} candidates failed to factorise")
    return best._replace(history=tuple(history))
