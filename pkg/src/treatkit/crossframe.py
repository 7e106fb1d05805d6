"""Simulated out-of-sample training frames.

The plan is designed on all rows, but each complex (catP/catN/catB/catD)
cell of row ``r`` comes from an encoder fit on a fold whose train set
excludes ``r``.  Fitting the downstream model on this frame instead of
``prepare(plan, frame)`` avoids the overfit of reusing the impact-coding
rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .design import BINOMIAL, NUMERIC, Controls, TreatmentPlan, binomial_outcome, design, numeric_outcome
from .frame import Frame, NumericColumn
from .prepare import _rescale
from .splits import SplitPlan, default_split_plan, user_split_plan


@dataclass
class CrossFrameResult:
    treatments: TreatmentPlan
    cross_frame: Frame
    method: str
    eval_sets: SplitPlan


def _resolve_plan(frame, y, controls, split_plan, split_function, seed) -> SplitPlan:
    if split_plan is not None:
        return split_plan
    if split_function is not None:
        folds = split_function(frame.nrows, controls.ncross, frame, y)
        return user_split_plan(list(folds), frame.nrows)
    return default_split_plan(frame.nrows, controls.ncross, y, seed)


def _cross_frame(frame, varlist, task, outcome, target, controls, split_plan,
                 split_function, seed, scale, workers) -> CrossFrameResult:
    controls = controls or Controls()
    if task == NUMERIC:
        y = numeric_outcome(frame, outcome)
    else:
        y = binomial_outcome(frame, outcome, target)
    splits = _resolve_plan(frame, y, controls, split_plan, split_function, seed)
    plan, oos, splits = design(frame, varlist, task, outcome, target, controls, seed,
                               splits, workers)
    cols = {}
    for spec in plan.specs:
        if spec.var_name in oos:
            # rows no app set covers get the "no level" code
            vals = np.nan_to_num(oos[spec.var_name], nan=0.0)
        else:
            vals = spec.apply(frame[spec.orig_name])
        if scale:
            vals = _rescale(plan, spec.var_name, vals)
        cols[spec.var_name] = NumericColumn(vals, np.zeros(vals.shape, dtype=bool))
    cols[outcome] = frame[outcome]
    return CrossFrameResult(plan, Frame(cols, frame.nrows), splits.method, splits)


def mk_cross_frame_n(frame: Frame, varlist: Sequence[str], outcome: str,
                     controls: Controls | None = None, split_plan: SplitPlan | None = None,
                     split_function: Callable | None = None, seed: int = 0,
                     scale: bool = False, workers: int = 1) -> CrossFrameResult:
    """Plan plus cross-frame for a numeric outcome.

    ``split_function(n_rows, n_splits, frame, y)`` may return a list of
    ``{"train": [...], "app": [...]}`` folds; the result's method is then
    ``"userfunction"``.  Without a plan or function the default is
    y-stratified ``controls.ncross``-fold, or leave-one-out for tiny frames.
    """
    return _cross_frame(frame, varlist, NUMERIC, outcome, None, controls, split_plan,
                        split_function, seed, scale, workers)


def mk_cross_frame_c(frame: Frame, varlist: Sequence[str], outcome: str, target,
                     controls: Controls | None = None, split_plan: SplitPlan | None = None,
                     split_function: Callable | None = None, seed: int = 0,
                     scale: bool = False, workers: int = 1) -> CrossFrameResult:
    """Plan plus cross-frame for ``outcome == target``; see :func:`mk_cross_frame_n`."""
    return _cross_frame(frame, varlist, BINOMIAL, outcome, target, controls, split_plan,
                        split_function, seed, scale, workers)
