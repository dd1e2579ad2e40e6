"""Conditional parameter spaces.

A :class:`ParamSpace` is a list of bounded-real and categorical dimensions
plus activation clauses ``(target, governor, allowed)``.  A dimension is
active when, for every clause targeting it, the governor is itself active
and takes one of the allowed values.  Dimensions with no clauses are roots
and are always active.  Clauses induce a DAG (governor -> target) which must
be acyclic; only categorical dimensions may govern.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import math
from collections.abc import Hashable, Iterable, Iterator, Mapping
from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from archk.errors import (
    ClauseValueOutsideDomain,
    CycleDetected,
    DomainError,
    DuplicateDimensionId,
    EmptyBounds,
    GovernorNotCategorical,
    MissingActiveValue,
    SchemaError,
    TooFewCategories,
    UndecidableActivity,
    UnknownCategory,
    UnknownDimension,
    ValueOutOfBounds,
)

_MISSING = object()


@dataclass(frozen=True)
class Real:
    """Bounded real dimension ``[lower, upper]``."""

    id: str
    lower: float
    upper: float

    kind = "real"

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise EmptyBounds(f"{self.id}: bounds must be finite, got [{self.lower}, {self.upper}]")
        if not self.lower < self.upper:
            raise EmptyBounds(f"{self.id}: lower bound {self.lower} must be < upper bound {self.upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class Categorical:
    """Categorical dimension with ``m >= 2`` distinct values."""

    id: str
    values: tuple

    kind = "categorical"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) < 2:
            raise TooFewCategories(f"{self.id}: need at least 2 categories, got {len(self.values)}")
        if len(set(self.values)) != len(self.values):
            raise TooFewCategories(f"{self.id}: category values must be distinct")
        if any(v is None for v in self.values):
            raise SchemaError(f"{self.id}: None is not a valid category")

    @property
    def m(self) -> int:
        return len(self.values)

    def index(self, value) -> int:
        try:
            return self.values.index(value)
        except ValueError:
            raise UnknownCategory(f"{self.id}: {value!r} is not one of {list(self.values)}") from None


Dimension = Union[Real, Categorical]


@dataclass(frozen=True)
class Clause:
    """``target`` is active only if ``governor`` is active with a value in ``allowed``."""

    target: str
    governor: str
    allowed: frozenset

    def __post_init__(self):
        object.__setattr__(self, "allowed", frozenset(self.allowed))


class ParamSpace:
    """A validated, immutable conditional parameter space.

    ``dimensions`` is stored in a canonical topological order: a stable
    topological sort of the declaration order (ties broken by declaration
    index).  That order is used everywhere output is produced.
    """

    def __init__(self, dimensions: Iterable[Dimension], clauses: Iterable[Clause] = ()):
        dims = list(dimensions)
        clauses = tuple(clauses)
        by_id: dict[str, Dimension] = {}
        for d in dims:
            if not isinstance(d.id, str) or not d.id or d.id.startswith("#") or d.id == "y":
                raise SchemaError(f"dimension id must be a non-empty string not starting with '#' "
                                  f"and not 'y', got {d.id!r}")
            if d.id in by_id:
                raise DuplicateDimensionId(f"duplicate dimension id {d.id!r}")
            by_id[d.id] = d

        for c in clauses:
            for name in (c.target, c.governor):
                if name not in by_id:
                    raise UnknownDimension(f"clause refers to unknown dimension {name!r}")
            gov = by_id[c.governor]
            if not isinstance(gov, Categorical):
                raise GovernorNotCategorical(
                    f"{c.governor!r} governs {c.target!r} but is not categorical"
                )
            if not c.allowed:
                raise ClauseValueOutsideDomain(f"clause {c.governor}->{c.target} has an empty allowed set")
            bad = [v for v in c.allowed if v not in gov.values]
            if bad:
                raise ClauseValueOutsideDomain(
                    f"clause {c.governor}->{c.target}: {sorted(map(str, bad))} not in {list(gov.values)}"
                )

        parents: dict[str, list[str]] = {d.id: [] for d in dims}
        for c in clauses:
            if c.governor not in parents[c.target]:
                parents[c.target].append(c.governor)
        order = _toposort([d.id for d in dims], parents)

        self.dimensions: tuple[Dimension, ...] = tuple(by_id[i] for i in order)
        self.ids: tuple[str, ...] = tuple(order)
        self.clauses: tuple[Clause, ...] = clauses
        self.index = {i: k for k, i in enumerate(order)}
        self._by_id = by_id
        self._clauses_for = {i: tuple(c for c in clauses if c.target == i) for i in order}
        self._parents = {i: tuple(sorted(parents[i], key=self.index.__getitem__)) for i in order}
        self._children = {i: tuple(j for j in order if i in parents[j]) for i in order}
        self._ancestors: dict[str, frozenset] = {}
        self._levels: dict[str, int] = {}
        for i in order:
            anc = set()
            for p in self._parents[i]:
                anc.add(p)
                anc |= self._ancestors[p]
            self._ancestors[i] = frozenset(anc)
            self._levels[i] = 1 + max((self._levels[p] for p in self._parents[i]), default=0)

    def __len__(self) -> int:
        return len(self.dimensions)

    def __iter__(self) -> Iterator[Dimension]:
        return iter(self.dimensions)

    def __contains__(self, i) -> bool:
        return i in self._by_id

    def __eq__(self, other):
        if not isinstance(other, ParamSpace):
            return NotImplemented
        return self.dimensions == other.dimensions and self.clauses == other.clauses

    def __hash__(self):
        return hash((self.dimensions, self.clauses))

    def __repr__(self):
        return f"ParamSpace(D={len(self)}, roots={list(self.roots)}, depth={self.depth})"

    def dim(self, i: str) -> Dimension:
        try:
            return self._by_id[i]
        except (KeyError, TypeError):
            raise UnknownDimension(f"unknown dimension {i!r}") from None

    def clauses_for(self, i: str) -> tuple[Clause, ...]:
        self.dim(i)
        return self._clauses_for[i]

    def parents(self, i: str) -> tuple[str, ...]:
        self.dim(i)
        return self._parents[i]

    def children(self, i: str) -> tuple[str, ...]:
        self.dim(i)
        return self._children[i]

    def ancestors(self, i: str) -> frozenset:
        self.dim(i)
        return self._ancestors[i]

    def descendants(self, i: str) -> frozenset:
        self.dim(i)
        return frozenset(j for j in self.ids if i in self._ancestors[j])

    def level(self, i: str) -> int:
        self.dim(i)
        return self._levels[i]

    @property
    def roots(self) -> tuple[str, ...]:
        return tuple(i for i in self.ids if not self._clauses_for[i])

    @property
    def depth(self) -> int:
        """Number of levels in the DAG (1 for a flat space)."""
        return max(self._levels.values(), default=0)

    def to_dict(self) -> dict:
        dims = []
        for d in self.dimensions:
            if isinstance(d, Real):
                dims.append({"id": d.id, "type": "real", "lower": d.lower, "upper": d.upper})
            else:
                dims.append({"id": d.id, "type": "categorical", "values": list(d.values)})
        conds = []
        for c in self.clauses:
            gov = self._by_id[c.governor]
            conds.append({
                "target": c.target,
                "governor": c.governor,
                "allowed": [v for v in gov.values if v in c.allowed],
            })
        return {"dimensions": dims, "conditions": conds}

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _toposort(ids: list[str], parents: Mapping[str, list[str]]) -> list[str]:
    position = {i: k for k, i in enumerate(ids)}
    indegree = {i: len(parents[i]) for i in ids}
    children: dict[str, list[str]] = {i: [] for i in ids}
    for i in ids:
        for p in parents[i]:
            children[p].append(i)
    ready = [position[i] for i in ids if indegree[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        i = ids[heapq.heappop(ready)]
        order.append(i)
        for c in children[i]:
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(ready, position[c])
    if len(order) != len(ids):
        stuck = [i for i in ids if indegree[i] > 0]
        raise CycleDetected(f"activation conditions form a cycle among {stuck}")
    return order


_DIM_KEYS = {"real": {"id", "type", "lower", "upper"}, "categorical": {"id", "type", "values"}}


def validate_space(raw: Mapping[str, Any] | ParamSpace) -> ParamSpace:
    """Build a :class:`ParamSpace` from its JSON-style description.

    The description is a mapping with ``dimensions`` (list of
    ``{"id", "type": "real", "lower", "upper"}`` or
    ``{"id", "type": "categorical", "values"}``) and optional
    ``conditions`` (list of ``{"target", "governor", "allowed"}``).
    Unknown keys are rejected.
    """
    if isinstance(raw, ParamSpace):
        return raw
    if not isinstance(raw, Mapping):
        raise SchemaError("space description must be a JSON object")
    extra = set(raw) - {"dimensions", "conditions"}
    if extra:
        raise SchemaError(f"unknown top-level keys: {sorted(extra)}")
    if "dimensions" not in raw or not isinstance(raw["dimensions"], list):
        raise SchemaError("'dimensions' must be a list")

    dims: list[Dimension] = []
    for entry in raw["dimensions"]:
        if not isinstance(entry, Mapping):
            raise SchemaError(f"dimension entry must be an object, got {entry!r}")
        kind = entry.get("type")
        if kind not in _DIM_KEYS:
            raise SchemaError(f"dimension type must be 'real' or 'categorical', got {kind!r}")
        keys = set(entry)
        if keys != _DIM_KEYS[kind]:
            missing, unknown = _DIM_KEYS[kind] - keys, keys - _DIM_KEYS[kind]
            raise SchemaError(
                f"dimension {entry.get('id')!r}: missing keys {sorted(missing)}, unknown keys {sorted(unknown)}"
            )
        if kind == "real":
            lo, hi = entry["lower"], entry["upper"]
            if not all(_is_number(v) for v in (lo, hi)):
                raise SchemaError(f"dimension {entry['id']!r}: bounds must be numbers")
            dims.append(Real(entry["id"], float(lo), float(hi)))
        else:
            values = entry["values"]
            if not isinstance(values, list) or not all(isinstance(v, Hashable) for v in values):
                raise SchemaError(f"dimension {entry['id']!r}: 'values' must be a list of scalars")
            dims.append(Categorical(entry["id"], tuple(values)))

    clauses = []
    for entry in raw.get("conditions", []):
        if not isinstance(entry, Mapping) or set(entry) != {"target", "governor", "allowed"}:
            raise SchemaError(f"condition must have exactly 'target', 'governor', 'allowed': {entry!r}")
        if not isinstance(entry["allowed"], list):
            raise SchemaError("'allowed' must be a list")
        clauses.append(Clause(entry["target"], entry["governor"], frozenset(entry["allowed"])))
    return ParamSpace(dims, clauses)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def ancestors(space: ParamSpace, i: str) -> frozenset:
    return space.ancestors(i)


class Config(Mapping):
    """An immutable, validated assignment of values to dimensions.

    Behaves as a read-only mapping ``id -> value``.  ``active`` holds the ids
    of active dimensions; ``inert`` those assigned a value while inactive.
    Build instances with :func:`validate_config` or :func:`sample_config`.
    """

    __slots__ = ("_values", "space", "active", "inert")

    def __init__(self, values: Mapping, space: ParamSpace, active: frozenset, inert: frozenset):
        self._values = dict(values)
        self.space = space
        self.active = active
        self.inert = inert

    def __getitem__(self, key):
        return self._values[key]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def __hash__(self):
        return hash(frozenset(self._values.items()))

    def __repr__(self):
        return f"Config({self._values!r})"

    def to_dict(self) -> dict:
        """Assignments in canonical dimension order."""
        return {i: self._values[i] for i in self.space.ids if i in self._values}


def is_active(space: ParamSpace, config: Mapping, i: str) -> bool:
    """Whether dimension ``i`` is active under ``config``.

    Only the assignments of ``i``'s ancestors are read.  Raises
    :class:`UndecidableActivity` when the answer hinges on a governor that is
    active but unassigned.
    """
    space.dim(i)
    if isinstance(config, Config) and (config.space is space or config.space == space):
        return i in config.active
    return _active(space, config, i, {})


def _active(space: ParamSpace, config: Mapping, i: str, memo: dict) -> bool:
    if i in memo:
        return memo[i]
    pending = None
    for clause in space._clauses_for[i]:
        try:
            governor_active = _active(space, config, clause.governor, memo)
        except UndecidableActivity as exc:
            pending = pending or exc
            continue
        if not governor_active:
            memo[i] = False
            return False
        value = config.get(clause.governor, _MISSING)
        if value is _MISSING or value is None:
            pending = pending or UndecidableActivity(
                f"activity of {i!r} depends on {clause.governor!r}, which is active but unassigned"
            )
            continue
        if value not in clause.allowed:
            memo[i] = False
            return False
    if pending is not None:
        raise pending
    memo[i] = True
    return True


def validate_config(space: ParamSpace, config: Mapping) -> Config:
    """Check ``config`` against ``space`` and return a :class:`Config`.

    ``None`` values are treated as unassigned.  Values given for inactive
    dimensions are kept (and listed in ``Config.inert``) but not checked.
    """
    if isinstance(config, Config) and (config.space is space or config.space == space):
        return config
    unknown = [k for k in config if k not in space]
    if unknown:
        raise UnknownDimension(f"config assigns unknown dimensions {unknown}")
    values = {k: v for k, v in config.items() if v is not None}

    active: set[str] = set()
    for dim in space.dimensions:
        if not all(
            c.governor in active and values[c.governor] in c.allowed
            for c in space._clauses_for[dim.id]
        ):
            continue
        active.add(dim.id)
        if dim.id not in values:
            raise MissingActiveValue(f"dimension {dim.id!r} is active but has no value")
        values[dim.id] = _check_value(dim, values[dim.id])
    inert = frozenset(k for k in values if k not in active)
    return Config(values, space, frozenset(active), inert)


def _check_value(dim: Dimension, value):
    if isinstance(dim, Real):
        if not _is_number(value):
            raise ValueOutOfBounds(f"{dim.id}: expected a real number, got {value!r}")
        value = float(value)
        if not dim.lower <= value <= dim.upper:
            raise ValueOutOfBounds(f"{dim.id}: {value} outside [{dim.lower}, {dim.upper}]")
        return value
    dim.index(value)
    return value


def activity_plan(space: ParamSpace, i: str, want_active: bool, rng: np.random.Generator | None = None):
    """Value restrictions that force dimension ``i`` to the requested activity.

    Returns a dict ``governor id -> frozenset of values``.  Sampling every
    restricted dimension (when active) inside its set guarantees the outcome.
    Returns ``None`` when no such restriction exists (e.g. a root cannot be
    inactive, or contradictory clauses make ``i`` unreachable).
    """
    space.dim(i)
    if want_active:
        return _plan_active(space, i)
    return _plan_inactive(space, i, rng if rng is not None else np.random.default_rng(0))


def _plan_active(space: ParamSpace, i: str):
    restrict: dict[str, frozenset] = {}
    for t in space.ancestors(i) | {i}:
        for c in space._clauses_for[t]:
            current = restrict.get(c.governor, frozenset(space.dim(c.governor).values))
            current = current & c.allowed
            if not current:
                return None
            restrict[c.governor] = current
    return restrict


def _plan_inactive(space: ParamSpace, i: str, rng: np.random.Generator):
    clauses = space._clauses_for[i]
    for k in rng.permutation(len(clauses)):
        c = clauses[k]
        complement = frozenset(space.dim(c.governor).values) - c.allowed
        if complement:
            plan = _plan_active(space, c.governor)
            if plan is not None:
                plan[c.governor] = complement
                return plan
        plan = _plan_inactive(space, c.governor, rng)
        if plan is not None:
            return plan
    return None


def sample_config(
    space: ParamSpace,
    seed: int | np.random.Generator,
    *,
    force: Mapping[str, bool] | None = None,
) -> Config:
    """Draw a random configuration.

    Dimensions are visited in canonical order; inactive ones are left
    unassigned.  Reals are uniform on their bounds, categories uniform over
    their values.  ``force`` maps dimension ids to a required activity; the
    sampler then restricts ancestor values so the requirement holds, raising
    :class:`DomainError` if it cannot be met.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    restrict: dict[str, frozenset] = {}
    for i, want in (force or {}).items():
        plan = activity_plan(space, i, bool(want), rng)
        if plan is None:
            raise DomainError(f"dimension {i!r} can never be {'active' if want else 'inactive'}")
        for g, allowed in plan.items():
            merged = restrict.get(g, allowed) & allowed
            if not merged:
                raise DomainError(f"conflicting activity requirements on {g!r}")
            restrict[g] = merged

    values: dict[str, Any] = {}
    active: set[str] = set()
    for dim in space.dimensions:
        if not all(
            c.governor in active and values[c.governor] in c.allowed
            for c in space._clauses_for[dim.id]
        ):
            continue
        active.add(dim.id)
        if isinstance(dim, Real):
            values[dim.id] = min(dim.upper, dim.lower + dim.width * rng.random())
        else:
            choices = dim.values
            if dim.id in restrict:
                choices = tuple(v for v in dim.values if v in restrict[dim.id])
            values[dim.id] = choices[int(rng.integers(len(choices)))]
    return Config(values, space, frozenset(active), frozenset())
