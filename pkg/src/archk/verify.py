"""Numerical checks of kernel validity.

* :func:`check_psd` -- minimum eigenvalue of a Gram matrix.
* :func:`check_isometry` -- ``|d_i(x, x') - ||f_i(x) - f_i(x')|| |`` per dimension.
* :func:`check_triangle` -- pseudometric axioms per dimension.

Metric checks draw configurations with forced activity patterns for the
dimension under test, so that every combination of active/inactive points
that the dimension admits is exercised (plain sampling rarely reaches deep
branches).  Each report carries a witness that reproduces its worst value.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from archk.errors import AsymmetricInput, DomainError
from archk.kernel import GramMatrix, KernelSpec, dim_distance, dim_embedding
from archk.space import Categorical, Clause, ParamSpace, Real, activity_plan, sample_config, validate_config

METRIC_TOL = 1e-12
PSD_TOL = 1e-8
SYMMETRY_TOL = 1e-12


@dataclass
class CheckReport:
    check: str
    samples: int
    worst: float
    tolerance: float
    passed: bool
    dimension: str | None = None
    witness: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=_jsonable)


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return repr(obj)


def check_psd(matrix: GramMatrix | np.ndarray, tol: float = PSD_TOL) -> CheckReport:
    """Pass iff the smallest eigenvalue is ``>= -tol * N``."""
    K = matrix.entries if isinstance(matrix, GramMatrix) else np.asarray(matrix, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] == 0:
        raise DomainError(f"expected a non-empty square matrix, got shape {K.shape}")
    asym = float(np.max(np.abs(K - K.T)))
    if asym > SYMMETRY_TOL:
        raise AsymmetricInput(f"matrix is not symmetric (max |K - K^T| = {asym:.3g})")
    n = K.shape[0]
    w, V = np.linalg.eigh(K)
    lam = float(w[0])
    return CheckReport(
        check="psd",
        samples=n,
        worst=-lam,
        tolerance=tol * n,
        passed=lam >= -tol * n,
        witness={"lambda_min": lam, "eigenvector": V[:, 0].tolist()},
        details={"lambda_max": float(w[-1])},
    )


def _patterns(space: ParamSpace, i: str, arity: int) -> list[tuple[bool, ...]]:
    feasible = [flag for flag in (True, False) if activity_plan(space, i, flag) is not None]
    return list(itertools.product(feasible, repeat=arity))


def _stratified(space: ParamSpace, i: str, rng: np.random.Generator, pattern, k: int) -> list:
    out = []
    for pos, want in enumerate(pattern):
        c = sample_config(space, rng, force={i: want})
        dim = space.dim(i)
        # pin to the bounds now and then: the extreme pair is the tightest case
        if isinstance(dim, Real) and want and (k + pos) % 8 == 0:
            edge = dim.lower if rng.random() < 0.5 else dim.upper
            c = validate_config(space, {**c, i: edge})
        out.append(c)
    return out


def _dim_rngs(seed: int, space: ParamSpace):
    children = np.random.SeedSequence(seed).spawn(len(space))
    return {i: np.random.default_rng(s) for i, s in zip(space.ids, children)}


def check_isometry(space: ParamSpace, spec: KernelSpec, n_pairs: int, seed: int,
                   tol: float = METRIC_TOL) -> list[CheckReport]:
    """One report per dimension: worst ``|d_i - ||f_i(x) - f_i(x')|| |``."""
    if n_pairs < 1:
        raise DomainError("n_pairs must be >= 1")
    reports = []
    rngs = _dim_rngs(seed, space)
    for i in space.ids:
        patterns = _patterns(space, i, 2)
        counts = dict.fromkeys(map(_pattern_name, patterns), 0)
        worst, witness = -1.0, {}
        for k in range(n_pairs):
            pattern = patterns[k % len(patterns)]
            x, xp = _stratified(space, i, rngs[i], pattern, k)
            counts[_pattern_name(pattern)] += 1
            d = dim_distance(spec, i, x, xp)
            e = float(np.linalg.norm(dim_embedding(spec, i, x) - dim_embedding(spec, i, xp)))
            residual = abs(d - e)
            if residual > worst:
                worst = residual
                witness = {"configs": [x.to_dict(), xp.to_dict()], "distance": d, "embedded": e}
        reports.append(CheckReport(
            check="isometry", samples=n_pairs, worst=worst, tolerance=tol, passed=worst <= tol,
            dimension=i, witness=witness, details={"patterns": counts},
        ))
    return reports


def check_triangle(space: ParamSpace, spec: KernelSpec, n_triples: int, seed: int,
                   tol: float = METRIC_TOL) -> list[CheckReport]:
    """One report per dimension on the pseudometric axioms.

    ``worst`` is the largest ``d(a, b) - d(a, c) - d(b, c)`` over every
    sampled triple and all three choices of the middle point.  Symmetry and
    non-negativity are required to hold exactly.
    """
    if n_triples < 1:
        raise DomainError("n_triples must be >= 1")
    reports = []
    rngs = _dim_rngs(seed, space)
    for i in space.ids:
        patterns = _patterns(space, i, 3)
        counts = dict.fromkeys(map(_pattern_name, patterns), 0)
        worst, witness = -np.inf, {}
        asymmetric = negative = self_nonzero = 0
        for k in range(n_triples):
            pattern = patterns[k % len(patterns)]
            triple = _stratified(space, i, rngs[i], pattern, k)
            counts[_pattern_name(pattern)] += 1
            d = {}
            for a, b in ((0, 1), (0, 2), (1, 2)):
                d[a, b] = dim_distance(spec, i, triple[a], triple[b])
                if dim_distance(spec, i, triple[b], triple[a]) != d[a, b]:
                    asymmetric += 1
                if d[a, b] < 0.0:
                    negative += 1
            for a in range(3):
                if dim_distance(spec, i, triple[a], triple[a]) != 0.0:
                    self_nonzero += 1
            for a, b, c in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
                violation = _pair(d, a, b) - _pair(d, a, c) - _pair(d, b, c)
                if violation > worst:
                    worst = violation
                    witness = {"configs": [triple[a].to_dict(), triple[b].to_dict(), triple[c].to_dict()]}
        reports.append(CheckReport(
            check="triangle", samples=n_triples, worst=float(worst), tolerance=tol,
            passed=worst <= tol and not (asymmetric or negative or self_nonzero),
            dimension=i, witness=witness,
            details={"patterns": counts, "asymmetric": asymmetric, "negative": negative,
                     "nonzero_self_distance": self_nonzero},
        ))
    return reports


def _pair(d: dict, a: int, b: int) -> float:
    return d[min(a, b), max(a, b)]


def _pattern_name(pattern) -> str:
    return "".join("T" if p else "F" for p in pattern)


def witness_value(spec: KernelSpec, report: CheckReport) -> float:
    """Recompute a metric report's worst value from its witness alone."""
    i = report.dimension
    configs = [validate_config(spec.space, c) for c in report.witness["configs"]]
    if report.check == "isometry":
        x, xp = configs
        e = float(np.linalg.norm(dim_embedding(spec, i, x) - dim_embedding(spec, i, xp)))
        return abs(dim_distance(spec, i, x, xp) - e)
    if report.check == "triangle":
        a, b, c = configs
        return dim_distance(spec, i, a, b) - dim_distance(spec, i, a, c) - dim_distance(spec, i, b, c)
    raise DomainError(f"no witness replay for check {report.check!r}")


def random_space(seed: int | np.random.Generator, max_dims: int = 6, max_depth: int = 3,
                 max_categories: int = 4) -> ParamSpace:
    """A random conditional space with 2..max_dims dimensions and at most
    ``max_depth`` levels.  The first dimension is a categorical root; deeper
    dimensions get one clause from the level above and sometimes a second
    clause from any shallower categorical dimension."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = int(rng.integers(2, max_dims + 1))
    dims: list = []
    level: dict[str, int] = {}
    clauses: list[Clause] = []

    def new_cat(name):
        m = int(rng.integers(2, max_categories + 1))
        return Categorical(name, tuple(f"v{j}" for j in range(m)))

    def random_subset(values):
        size = int(rng.integers(1, len(values)))
        picked = rng.choice(len(values), size=size, replace=False)
        return frozenset(values[j] for j in picked)

    for k in range(n):
        name = f"x{k}"
        cats = [d for d in dims if isinstance(d, Categorical)]
        deepest = max((level[d.id] for d in cats), default=0)
        lvl = 1 if k == 0 else int(rng.integers(1, min(deepest + 1, max_depth) + 1))
        if k == 0 or rng.random() < 0.5:
            dim = new_cat(name)
        else:
            lo = float(rng.uniform(-5.0, 5.0))
            dim = Real(name, lo, lo + float(10.0 ** rng.uniform(-1.0, 1.0)))
        if lvl > 1:
            gov = [d for d in cats if level[d.id] == lvl - 1]
            g = gov[int(rng.integers(len(gov)))]
            clauses.append(Clause(name, g.id, random_subset(g.values)))
            others = [d for d in cats if level[d.id] < lvl and d.id != g.id]
            if others and rng.random() < 0.3:
                g2 = others[int(rng.integers(len(others)))]
                clauses.append(Clause(name, g2.id, random_subset(g2.values)))
        dims.append(dim)
        level[name] = lvl
    return ParamSpace(dims, clauses)
