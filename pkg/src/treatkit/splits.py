"""Cross-validation split plans.

A plan is an ordered list of folds, each a ``(train, app)`` pair of row
index arrays: the rows in ``app`` are encoded by a model fit on ``train``.
All randomness comes from ``numpy.random.Generator(PCG64(seed))`` so plans
are bit-reproducible across platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exceptions import SplitError

ONEWAY = "oneway"
KWAY = "kwaycross"
STRATIFIED = "kwaycrossystratified"
GROUPED = "kwaycrossgrouped"
USER = "userfunction"

_PARTITION_METHODS = {ONEWAY, KWAY, STRATIFIED, GROUPED}


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & (2**64 - 1)))


@dataclass(frozen=True, eq=False)
class Fold:
    train: np.ndarray
    app: np.ndarray

    def to_dict(self) -> dict:
        return {"train": self.train.tolist(), "app": self.app.tolist()}


@dataclass(frozen=True, eq=False)
class SplitPlan:
    folds: tuple
    method: str
    nrows: int

    def __post_init__(self):
        folds = tuple(_as_fold(f) for f in self.folds)
        object.__setattr__(self, "folds", folds)
        self.validate()

    def __len__(self):
        return len(self.folds)

    def __iter__(self):
        return iter(self.folds)

    def __eq__(self, other):
        return (isinstance(other, SplitPlan) and self.method == other.method
                and self.nrows == other.nrows and len(self) == len(other)
                and all(np.array_equal(a.train, b.train) and np.array_equal(a.app, b.app)
                        for a, b in zip(self.folds, other.folds)))

    __hash__ = None

    @property
    def is_partition(self) -> bool:
        return self.method in _PARTITION_METHODS

    def validate(self) -> None:
        if not self.folds:
            raise SplitError("split plan has no folds")
        for i, fold in enumerate(self.folds):
            for part in (fold.train, fold.app):
                if part.size == 0:
                    raise SplitError(f"fold {i}: train and app must be nonempty")
                if part.min() < 0 or part.max() >= self.nrows:
                    raise SplitError(f"fold {i}: row index out of range 0..{self.nrows - 1}")
            if np.intersect1d(fold.train, fold.app).size:
                raise SplitError(f"fold {i}: train and app sets overlap")
        if self.is_partition:
            apps = np.concatenate([f.app for f in self.folds])
            if apps.size != self.nrows or not np.array_equal(np.sort(apps), np.arange(self.nrows)):
                raise SplitError(f"{self.method} plan: app sets must partition the rows")

    def to_json(self) -> str:
        return json.dumps([f.to_dict() for f in self.folds])

    def summary(self) -> str:
        lines = [f"method: {self.method}", f"folds: {len(self.folds)}"]
        lines += [f"fold {i}: train={f.train.size} app={f.app.size}"
                  for i, f in enumerate(self.folds)]
        return "\n".join(lines)


def _as_fold(f) -> Fold:
    if isinstance(f, Fold):
        train, app = f.train, f.app
    elif isinstance(f, dict):
        try:
            train, app = f["train"], f["app"]
        except KeyError as e:
            raise SplitError(f"fold is missing the {e.args[0]!r} slot") from None
    else:
        train, app = f
    return Fold(_index_array(train), _index_array(app))


def _index_array(idx) -> np.ndarray:
    arr = np.asarray(idx)
    if arr.size == 0:
        return np.zeros(0, dtype=np.int64)
    integral = arr.dtype.kind in "iu" or (
        arr.dtype.kind == "f" and bool(np.all(arr == np.round(arr))))
    if not integral:
        raise SplitError("fold indices must be integers")
    arr = np.unique(arr.astype(np.int64).ravel())
    arr.setflags(write=False)
    return arr


def _check_k(n: int, k: int) -> None:
    if n < 2:
        raise SplitError("need at least 2 rows to split")
    if k < 2:
        raise SplitError("need at least 2 splits")
    if k > n:
        raise SplitError(f"cannot make {k} folds from {n} rows")


def _plan_from_assignment(assign: np.ndarray, k: int, method: str) -> SplitPlan:
    rows = np.arange(assign.size)
    folds = [Fold(rows[assign != j], rows[assign == j]) for j in range(k)]
    return SplitPlan(tuple(folds), method, assign.size)


def one_way_holdout(n_rows: int, n_splits=None, dframe=None, y=None) -> SplitPlan:
    """Leave-one-out plan: fold ``i`` applies to row ``i`` alone."""
    if n_rows < 2:
        raise SplitError("leave-one-out needs at least 2 rows")
    rows = np.arange(n_rows)
    folds = [Fold(np.delete(rows, i), rows[i:i + 1]) for i in range(n_rows)]
    return SplitPlan(tuple(folds), ONEWAY, n_rows)


def k_way_cross_validation(n_rows: int, k: int, seed: int = 0) -> SplitPlan:
    _check_k(n_rows, k)
    perm = make_rng(seed).permutation(n_rows)
    assign = np.empty(n_rows, dtype=np.int64)
    for j, chunk in enumerate(np.array_split(perm, k)):
        assign[chunk] = j
    return _plan_from_assignment(assign, k, KWAY)


def _stratified_assignment(y: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = y.size
    order = np.lexsort((rng.random(n), y))
    offsets = rng.integers(0, k, size=(n + k - 1) // k)
    pos = np.arange(n)
    assign = np.empty(n, dtype=np.int64)
    assign[order] = (pos % k + offsets[pos // k]) % k
    return assign


def k_way_stratified_y(n_rows: int, k: int, y=None, seed: int = 0) -> SplitPlan:
    """y-stratified k-fold plan.

    Rows are sorted by ``y`` (random tie-break), cut into consecutive blocks
    of ``k`` and each block is dealt one row per fold, starting at a random
    fold, so every fold sees the whole range of ``y``.
    """
    _check_k(n_rows, k)
    y = np.zeros(n_rows) if y is None else np.asarray(y, dtype=np.float64)
    if y.shape != (n_rows,) or not np.all(np.isfinite(y)):
        raise SplitError("y must hold n_rows finite values")
    assign = _stratified_assignment(y, k, make_rng(seed))
    return _plan_from_assignment(assign, k, STRATIFIED)


def grouped_k_way(n_rows: int, k: int, groups, y=None, seed: int = 0) -> SplitPlan:
    """k-fold plan that never splits a group across app sets.

    Groups are dealt to folds by stratifying on the per-group mean of ``y``.
    ``groups`` is a CategoricalColumn or a sequence of labels (missing is
    its own group).
    """
    if hasattr(groups, "codes"):
        codes = np.asarray(groups.codes)
    else:
        _, codes = np.unique(np.asarray([str(g) for g in groups]), return_inverse=True)
    if codes.shape != (n_rows,):
        raise SplitError("group column must have n_rows entries")
    uniq, gidx = np.unique(codes, return_inverse=True)
    if uniq.size < k:
        raise SplitError(f"only {uniq.size} distinct groups; cannot make {k} folds")
    _check_k(n_rows, k)
    y = np.zeros(n_rows) if y is None else np.asarray(y, dtype=np.float64)
    sums = np.bincount(gidx, weights=y, minlength=uniq.size)
    means = sums / np.bincount(gidx, minlength=uniq.size)
    gassign = _stratified_assignment(means, k, make_rng(seed))
    return _plan_from_assignment(gassign[gidx], k, GROUPED)


def user_split_plan(folds: Sequence, n_rows: int) -> SplitPlan:
    """Validate folds from a user-supplied split function (``method="userfunction"``).

    App sets may overlap across folds and need not cover every row.
    """
    return SplitPlan(tuple(folds), USER, n_rows)


def load_split_plan(path, n_rows: int) -> SplitPlan:
    """Read a JSON array of ``{"train": [...], "app": [...]}`` (0-based rows)."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as e:
        raise SplitError(f"split plan file is not valid JSON: {e}") from None
    if not isinstance(raw, list):
        raise SplitError("split plan file must hold a JSON array of folds")
    return user_split_plan(raw, n_rows)


def default_split_plan(n_rows: int, k: int, y=None, seed: int = 0) -> SplitPlan:
    """Stratified k-fold, or leave-one-out when there are fewer than ``2k`` rows."""
    if n_rows < 2 * k:
        return one_way_holdout(n_rows)
    return k_way_stratified_y(n_rows, k, y, seed)


SplitFunction = Callable[[int, int, object, np.ndarray], Sequence]
