"""Treatment design: expand input variables into scored derived variables."""

from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import encoders as enc
from .exceptions import DesignError
from .frame import Frame, NumericColumn, _label
from .splits import SplitPlan, default_split_plan
from .stats import chisq_test_sig, cross_validated_sig, f_test_sig

FORMAT_VERSION = 1

NUMERIC, BINOMIAL, NO_TARGET = "numeric", "binomial", "none"
TASKS = (NUMERIC, BINOMIAL, NO_TARGET)


@dataclass(frozen=True)
class Controls:
    """Design controls; one setting applies to every variable.

    ``rare_sig=None`` disables rare-level pooling.
    """

    min_fraction: float = 0.02
    rare_count: int = 0
    rare_sig: float | None = None
    sm_factor: float = 0.0
    ncross: int = 3

    def __post_init__(self):
        if not 0 <= self.min_fraction <= 1:
            raise ValueError("min_fraction must lie in [0, 1]")
        if self.rare_count < 0 or self.sm_factor < 0:
            raise ValueError("rare_count and sm_factor must be nonnegative")
        if self.ncross < 2:
            raise ValueError("ncross must be at least 2")


@dataclass(frozen=True)
class ScoreFrameRow:
    var_name: str
    sig: float
    extra_model_degrees: int
    orig_name: str
    code: str

    def as_tuple(self):
        return (self.var_name, self.sig, self.extra_model_degrees, self.orig_name, self.code)


@dataclass
class TreatmentPlan:
    task: str
    outcome_name: str | None
    target_level: str | None
    var_kinds: dict
    specs: list
    score_frame: list
    controls: Controls
    mean_y: float | None = None
    grand_rate: float | None = None
    scaling: dict = field(default_factory=dict)
    version: int = FORMAT_VERSION

    @property
    def var_names(self) -> list[str]:
        return [row.var_name for row in self.score_frame]

    def spec(self, var_name: str):
        for s in self.specs:
            if s.var_name == var_name:
                return s
        raise KeyError(var_name)

    def row(self, var_name: str) -> ScoreFrameRow:
        for r in self.score_frame:
            if r.var_name == var_name:
                return r
        raise KeyError(var_name)

    def score_frame_csv(self) -> str:
        lines = ["varName,sig,extraModelDegrees,origName,code"]
        for r in self.score_frame:
            lines.append(f"{r.var_name},{r.sig:.17g},{r.extra_model_degrees},{r.orig_name},{r.code}")
        return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ outcome

def numeric_outcome(frame: Frame, name: str) -> np.ndarray:
    col = _outcome_column(frame, name)
    if not isinstance(col, NumericColumn):
        raise DesignError(f"outcome {name!r} must be numeric")
    if col.bad_mask.any():
        raise DesignError(f"outcome {name!r} has missing, NaN or infinite values")
    y = col.values.copy()
    if y.size == 0 or np.ptp(y) == 0:
        raise DesignError(f"outcome {name!r} must take more than one value")
    return y


def binomial_outcome(frame: Frame, name: str, target) -> np.ndarray:
    """0/1 indicator of ``outcome == target``."""
    col = _outcome_column(frame, name)
    if isinstance(col, NumericColumn):
        if col.bad_mask.any():
            raise DesignError(f"outcome {name!r} has missing, NaN or infinite values")
        try:
            t = float(target)
        except (TypeError, ValueError):
            raise DesignError(f"target {target!r} is not a value of numeric outcome {name!r}") from None
        y = (col.values == t).astype(np.float64)
    else:
        if col.missing_mask.any():
            raise DesignError(f"outcome {name!r} has missing values")
        t = _label(target)
        keys = col.keys()
        hit = np.array([k == t for k in keys])
        y = hit[col.codes + 1].astype(np.float64)
    if y.size == 0 or y.max() == 0:
        raise DesignError(f"target level {target!r} does not occur in outcome {name!r}")
    if y.min() == 1:
        raise DesignError(f"outcome {name!r} must take more than one value")
    return y


def _outcome_column(frame, name):
    if name not in frame:
        raise DesignError(f"outcome column {name!r} not in frame")
    return frame[name]


def _check_varlist(frame: Frame, varlist: Sequence[str], outcome: str | None) -> list[str]:
    varlist = list(varlist)
    if not varlist:
        raise DesignError("varlist is empty")
    if len(set(varlist)) != len(varlist):
        raise DesignError("varlist has duplicate names")
    missing = [v for v in varlist if v not in frame]
    if missing:
        raise DesignError(f"variables not in frame: {missing}")
    if outcome is not None and outcome in varlist:
        raise DesignError(f"outcome {outcome!r} cannot also be an input variable")
    return varlist


# ------------------------------------------------------------------ design

def _sig_test(task):
    return chisq_test_sig if task == BINOMIAL else f_test_sig


def _naive_sig(task, x, y) -> float:
    if task == NO_TARGET:
        return 1.0
    return _sig_test(task)(x, y).sig


def _complex_fitters(task, name, controls, pooled):
    fitters = [("catP", lambda c, y: enc.fit_catP(c, name, pooled=pooled))]
    if task == NUMERIC:
        fitters += [
            ("catN", lambda c, y: enc.fit_catN(c, y, name, sm_factor=controls.sm_factor, pooled=pooled)),
            ("catD", lambda c, y: enc.fit_catD(c, y, name, pooled=pooled)),
        ]
    elif task == BINOMIAL:
        fitters.append(
            ("catB", lambda c, y: enc.fit_catB(c, y, name, sm_factor=controls.sm_factor, pooled=pooled)))
    return fitters


@dataclass
class _Derived:
    spec: object
    sig: float
    train_values: np.ndarray
    oos_values: np.ndarray | None = None


def _design_numeric(name, col, task, y):
    out = []
    clean = enc.fit_clean(col, name)
    vals = clean.apply(col)
    if not enc.is_constant(vals):
        out.append(_Derived(clean, _naive_sig(task, vals, y), vals))
    if col.bad_mask.any():
        isbad = enc.fit_isbad(col, name)
        vals = isbad.apply(col)
        if not enc.is_constant(vals):
            out.append(_Derived(isbad, _naive_sig(task, vals, y), vals))
    return out


def _rare_pool(col, task, y, controls) -> frozenset:
    if controls.rare_sig is None or task == NO_TARGET:
        return frozenset()
    rare = enc.rare_levels(col, controls.rare_count)
    if not rare:
        return frozenset()
    ind = np.array([k in rare for k in col.keys()], dtype=np.float64)[col.codes + 1]
    if enc.is_constant(ind):
        return frozenset()
    return rare if _naive_sig(task, ind, y) <= controls.rare_sig else frozenset()


def _design_categorical(name, col, task, y, controls, split_plan):
    out = []
    pooled = _rare_pool(col, task, y, controls)
    for lev in enc.fit_levs(col, name, controls.min_fraction, pooled):
        vals = lev.apply(col)
        if not enc.is_constant(vals):
            out.append(_Derived(lev, _naive_sig(task, vals, y), vals))
    for _code, fitter in _complex_fitters(task, name, controls, pooled):
        spec = fitter(col, y)
        vals = spec.apply(col)
        if enc.is_constant(vals):
            continue
        if task == NO_TARGET:
            out.append(_Derived(spec, 1.0, vals))
            continue
        # the out-of-sample construction already absorbs the hidden degrees
        # of freedom, so the reference distribution uses df1 = 1
        res, oos = cross_validated_sig(fitter, col, y, split_plan, 0, _sig_test(task))
        out.append(_Derived(spec, res.sig, vals, oos))
    return out


def _design_variable(item, task, y, controls, split_plan):
    name, col = item
    if isinstance(col, NumericColumn):
        return _design_numeric(name, col, task, y)
    return _design_categorical(name, col, task, y, controls, split_plan)


def _scaling(derived, y):
    x = derived.train_values
    xc = x - x.mean()
    slope = float(xc @ (y - y.mean()) / (xc @ xc))
    return (slope, float(x.mean()))


def design(frame: Frame, varlist: Sequence[str], task: str, outcome: str | None = None,
           target=None, controls: Controls | None = None, seed: int = 0,
           split_plan: SplitPlan | None = None, workers: int = 1):
    """Shared design path.  Returns ``(plan, {var_name: oos_vector}, split_plan)``."""
    if task not in TASKS:
        raise DesignError(f"unknown task {task!r}")
    controls = controls or Controls()
    varlist = _check_varlist(frame, varlist, outcome if task != NO_TARGET else None)
    if task == NUMERIC:
        y = numeric_outcome(frame, outcome)
    elif task == BINOMIAL:
        y = binomial_outcome(frame, outcome, target)
    else:
        y, outcome, target = None, None, None
    if task != NO_TARGET:
        if split_plan is None:
            split_plan = default_split_plan(frame.nrows, controls.ncross, y, seed)
        elif split_plan.nrows != frame.nrows:
            raise DesignError(f"split plan covers {split_plan.nrows} rows, frame has {frame.nrows}")

    work = functools.partial(_design_variable, task=task, y=y, controls=controls,
                             split_plan=split_plan)
    items = [(v, frame[v]) for v in varlist]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_var = list(pool.map(work, items))
    else:
        per_var = [work(it) for it in items]

    derived = [d for group in per_var for d in group]
    names = [d.spec.var_name for d in derived]
    if len(set(names)) != len(names):
        dup = sorted({n for n in names if names.count(n) > 1})
        raise DesignError(f"derived variable names collide: {dup}")

    plan = TreatmentPlan(
        task=task,
        outcome_name=outcome,
        target_level=None if target is None else _label(target),
        var_kinds={v: frame[v].kind for v in varlist},
        specs=[d.spec for d in derived],
        score_frame=[ScoreFrameRow(d.spec.var_name, float(d.sig), d.spec.extra_degrees,
                                   d.spec.orig_name, d.spec.code) for d in derived],
        controls=controls,
        mean_y=float(y.mean()) if task == NUMERIC else None,
        grand_rate=float(y.mean()) if task == BINOMIAL else None,
        scaling={d.spec.var_name: _scaling(d, y) for d in derived} if y is not None else {},
    )
    oos = {d.spec.var_name: d.oos_values for d in derived if d.oos_values is not None}
    return plan, oos, split_plan


def design_treatments_n(frame: Frame, varlist: Sequence[str], outcome: str,
                        controls: Controls | None = None, seed: int = 0,
                        split_plan: SplitPlan | None = None, workers: int = 1) -> TreatmentPlan:
    """Design a plan for a numeric outcome (clean/isBAD/lev/catP/catN/catD)."""
    return design(frame, varlist, NUMERIC, outcome, None, controls, seed, split_plan, workers)[0]


def design_treatments_c(frame: Frame, varlist: Sequence[str], outcome: str, target,
                        controls: Controls | None = None, seed: int = 0,
                        split_plan: SplitPlan | None = None, workers: int = 1) -> TreatmentPlan:
    """Design a plan for ``outcome == target`` (clean/isBAD/lev/catP/catB)."""
    return design(frame, varlist, BINOMIAL, outcome, target, controls, seed, split_plan, workers)[0]


def design_treatments_z(frame: Frame, varlist: Sequence[str],
                        controls: Controls | None = None, workers: int = 1) -> TreatmentPlan:
    """Design an outcome-free plan (clean/isBAD/lev/catP), every sig = 1."""
    return design(frame, varlist, NO_TARGET, None, None, controls, 0, None, workers)[0]
