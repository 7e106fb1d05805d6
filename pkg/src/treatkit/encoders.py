"""Fitted per-variable treatments.

Numeric inputs become ``clean`` (bad values replaced by the training mean)
and ``isBAD`` (1 where a replacement happened).  Categorical inputs become
``lev`` indicators plus whole-variable recodes:

* ``catP`` -- training prevalence of the level
* ``catN`` -- conditional mean of a numeric outcome minus the grand mean
* ``catB`` -- conditional logit of a binary outcome minus the grand logit
* ``catD`` -- within-level standard deviation of a numeric outcome

Level keys are strings; ``None`` is the missing level.  A level not seen at
fit time gets the spec's ``novel_value`` (the "no level" encoding) unless
rare-level pooling is active, in which case it is coded as the pooled
bucket.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import SchemaError
from .frame import CategoricalColumn, NumericColumn, column_stats

CATB_EPSILON = 1e-4

_POOLED = object()


def _require(col, kind, name):
    cls = NumericColumn if kind == "numeric" else CategoricalColumn
    if not isinstance(col, cls):
        raise SchemaError(f"column {name!r} was designed as {kind}, got {col.kind}")


def _lookup(col: CategoricalColumn, table: dict, default) -> np.ndarray:
    lut = np.array([table.get(k, default) for k in col.keys()], dtype=np.float64)
    return lut[col.codes + 1]


def mangle_level(level) -> str:
    if level is None:
        return "NA"
    return "x." + re.sub(r"[^0-9A-Za-z]", ".", level)


# ---------------------------------------------------------------- numeric

@dataclass(frozen=True)
class CleanSpec:
    orig_name: str
    fill_value: float

    code = "clean"
    extra_degrees = 0

    @property
    def var_name(self):
        return f"{self.orig_name}_clean"

    def apply(self, col) -> np.ndarray:
        _require(col, "numeric", self.orig_name)
        return np.where(col.bad_mask, self.fill_value, np.nan_to_num(col.values))


@dataclass(frozen=True)
class IsBadSpec:
    orig_name: str

    code = "isBAD"
    extra_degrees = 0

    @property
    def var_name(self):
        return f"{self.orig_name}_isBAD"

    def apply(self, col) -> np.ndarray:
        _require(col, "numeric", self.orig_name)
        return col.bad_mask.astype(np.float64)


def fit_clean(col: NumericColumn, name: str) -> CleanSpec:
    return CleanSpec(name, column_stats(col).mean)


def fit_isbad(col: NumericColumn, name: str) -> IsBadSpec:
    return IsBadSpec(name)


# ---------------------------------------------------------------- grouping

class _Groups(NamedTuple):
    keys: list          # observed level keys; may include _POOLED
    counts: np.ndarray
    slot: np.ndarray    # per-row index into keys


def _group(col: CategoricalColumn, pooled: frozenset = frozenset()) -> _Groups:
    keys = col.keys()
    slots = col.codes + 1
    if pooled:
        remap = np.arange(len(keys))
        pool_slot = len(keys)
        for i, k in enumerate(keys):
            if k in pooled:
                remap[i] = pool_slot
        slots = remap[slots]
        keys = keys + [_POOLED]
    counts = np.bincount(slots, minlength=len(keys))
    observed = np.flatnonzero(counts)
    dense = np.full(len(keys), -1, dtype=np.int64)
    dense[observed] = np.arange(observed.size)
    return _Groups([keys[i] for i in observed], counts[observed], dense[slots])


def _expand(groups: _Groups, values: np.ndarray, pooled: frozenset, novel: float):
    """Level → value table plus the value for unseen levels."""
    table = {}
    for k, v in zip(groups.keys, values.tolist()):
        if k is _POOLED:
            novel = v
        else:
            table[k] = v
    if pooled:
        for k in pooled:
            table[k] = novel
    return table, novel


def observed_levels(col: CategoricalColumn) -> list:
    """Distinct levels present, missing (None) first then sorted strings."""
    present = np.unique(col.codes)
    keys = col.keys()
    return sorted((keys[c + 1] for c in present.tolist()),
                  key=lambda k: (k is not None, k or ""))


def rare_levels(col: CategoricalColumn, rare_count: int) -> frozenset:
    """Observed levels occurring no more than ``rare_count`` times."""
    if rare_count <= 0:
        return frozenset()
    g = _group(col)
    return frozenset(k for k, n in zip(g.keys, g.counts.tolist()) if n <= rare_count)


# ---------------------------------------------------------------- indicators

@dataclass(frozen=True)
class LevSpec:
    """0/1 indicator for one level, or for the pooled rare levels.

    A pooled indicator also fires on levels outside ``known`` (novel ones).
    """

    orig_name: str
    var_name: str
    level: object
    fires_on: frozenset
    novel: bool = False
    known: frozenset = frozenset()

    code = "lev"
    extra_degrees = 0

    def apply(self, col) -> np.ndarray:
        _require(col, "categorical", self.orig_name)
        hits = [k in self.fires_on or (self.novel and k not in self.known)
                for k in col.keys()]
        return np.asarray(hits, dtype=np.float64)[col.codes + 1]


def fit_levs(col: CategoricalColumn, name: str, min_fraction: float = 0.02,
             pooled: frozenset = frozenset()) -> list[LevSpec]:
    """Indicators for levels with frequency >= ``min_fraction``.

    Levels in ``pooled`` share one ``<name>_lev_rare`` indicator instead.
    """
    n = len(col)
    if n == 0:
        return []
    g = _group(col)
    specs, used = [], set()
    order = sorted(range(len(g.keys)), key=lambda i: (g.keys[i] is not None, g.keys[i] or ""))
    for i in order:
        key = g.keys[i]
        if key in pooled or g.counts[i] / n < min_fraction:
            continue
        base = f"{name}_lev_{mangle_level(key)}"
        var = base
        j = 0
        while var in used:
            j += 1
            var = f"{base}.{j}"
        used.add(var)
        specs.append(LevSpec(name, var, key, frozenset([key])))
    if pooled:
        specs.append(LevSpec(name, f"{name}_lev_rare", None, frozenset(pooled),
                             novel=True, known=frozenset(g.keys)))
    return specs


# ---------------------------------------------------------------- recodes

@dataclass(frozen=True)
class _CatSpec:
    orig_name: str
    table: dict
    novel_value: float
    pooled: frozenset = field(default=frozenset(), kw_only=True)

    code = "cat"

    @property
    def var_name(self):
        return f"{self.orig_name}_{self.code}"

    @property
    def extra_degrees(self):
        return max(0, len(self.observed) - 1)

    @property
    def observed(self) -> list:
        """Levels seen at fit time, with pooled levels collapsed to one."""
        keys = [k for k in self.table if k not in self.pooled]
        return keys + ([_POOLED] if self.pooled else [])

    def apply(self, col) -> np.ndarray:
        _require(col, "categorical", self.orig_name)
        return _lookup(col, self.table, self.novel_value)


@dataclass(frozen=True)
class CatPSpec(_CatSpec):
    code = "catP"


@dataclass(frozen=True)
class CatNSpec(_CatSpec):
    grand_mean: float = field(default=0.0, kw_only=True)
    sm_factor: float = field(default=0.0, kw_only=True)
    code = "catN"


@dataclass(frozen=True)
class CatBSpec(_CatSpec):
    grand_rate: float = field(default=0.5, kw_only=True)
    epsilon: float = field(default=CATB_EPSILON, kw_only=True)
    sm_factor: float = field(default=0.0, kw_only=True)
    code = "catB"


@dataclass(frozen=True)
class CatDSpec(_CatSpec):
    code = "catD"


def fit_catP(col: CategoricalColumn, name: str, pooled: frozenset = frozenset()) -> CatPSpec:
    g = _group(col, pooled)
    freq = g.counts / max(len(col), 1)
    table, novel = _expand(g, freq, pooled, 0.0)
    return CatPSpec(name, table, novel, pooled=pooled)


def fit_catN(col: CategoricalColumn, y, name: str, sm_factor: float = 0.0,
             pooled: frozenset = frozenset()) -> CatNSpec:
    """Impact code: smoothed E[y | level] - E[y]."""
    y = np.asarray(y, dtype=np.float64)
    g = _group(col, pooled)
    grand = float(y.mean()) if y.size else 0.0
    sums = np.bincount(g.slot, weights=y, minlength=len(g.keys))
    delta = (sums + sm_factor * grand) / (g.counts + sm_factor) - grand
    table, novel = _expand(g, delta, pooled, 0.0)
    return CatNSpec(name, table, novel, pooled=pooled, grand_mean=grand, sm_factor=sm_factor)


def _logit(p):
    return np.log(p) - np.log1p(-p)


def fit_catB(col: CategoricalColumn, y_ind, name: str, epsilon: float = CATB_EPSILON,
             sm_factor: float = 0.0, pooled: frozenset = frozenset()) -> CatBSpec:
    """Logit impact code for a 0/1 outcome.

    Both the per-level and the grand rate are smoothed as
    ``(positives + eps) / (count + 2 eps)``, which keeps every code finite.
    """
    y = np.asarray(y_ind, dtype=np.float64)
    g = _group(col, pooled)
    n = float(y.size)
    grand = (y.sum() + epsilon) / (n + 2 * epsilon)
    pos = np.bincount(g.slot, weights=y, minlength=len(g.keys))
    rate = (pos + sm_factor * grand + epsilon) / (g.counts + sm_factor + 2 * epsilon)
    delta = _logit(rate) - _logit(grand)
    table, novel = _expand(g, delta, pooled, 0.0)
    return CatBSpec(name, table, novel, pooled=pooled, grand_rate=float(grand),
                    epsilon=epsilon, sm_factor=sm_factor)


def fit_catD(col: CategoricalColumn, y, name: str, pooled: frozenset = frozenset()) -> CatDSpec:
    """Within-level sample standard deviation of ``y``.

    Singleton and novel levels get the largest deviation among levels with
    at least two rows, or the overall deviation of ``y`` if there are none.
    """
    y = np.asarray(y, dtype=np.float64)
    g = _group(col, pooled)
    k = len(g.keys)
    means = np.bincount(g.slot, weights=y, minlength=k) / np.maximum(g.counts, 1)
    ss = np.bincount(g.slot, weights=(y - means[g.slot]) ** 2, minlength=k)
    multi = g.counts >= 2
    sd = np.sqrt(ss / np.maximum(g.counts - 1, 1))
    if multi.any():
        fallback = float(sd[multi].max())
    elif y.size >= 2:
        fallback = float(y.std(ddof=1))
    else:
        fallback = 0.0
    sd = np.where(multi, sd, fallback)
    table, novel = _expand(g, sd, pooled, fallback)
    return CatDSpec(name, table, novel, pooled=pooled)


Spec = CleanSpec | IsBadSpec | LevSpec | CatPSpec | CatNSpec | CatBSpec | CatDSpec

SIMPLE_CODES = ("clean", "isBAD", "lev")
COMPLEX_CODES = ("catP", "catN", "catB", "catD")


def is_constant(values: np.ndarray) -> bool:
    return values.size == 0 or bool(np.ptp(values) == 0)

