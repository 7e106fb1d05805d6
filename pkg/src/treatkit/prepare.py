"""Apply a treatment plan to new data."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .design import TreatmentPlan
from .exceptions import SchemaError, TreatError
from .frame import Frame, NumericColumn


def surviving_specs(plan: TreatmentPlan, prune_sig: float | None = None,
                    var_restriction: Iterable[str] | None = None) -> list:
    """Specs kept by ``sig < prune_sig`` and membership in ``var_restriction``."""
    keep = None
    if var_restriction is not None:
        keep = set(var_restriction)
        unknown = sorted(keep - set(plan.var_names))
        if unknown:
            raise TreatError(f"var_restriction names not in plan: {unknown}")
    out = []
    for spec, row in zip(plan.specs, plan.score_frame):
        if prune_sig is not None and not row.sig < prune_sig:
            continue
        if keep is not None and row.var_name not in keep:
            continue
        out.append(spec)
    return out


def _numeric(values: np.ndarray) -> NumericColumn:
    return NumericColumn(values, np.zeros(values.shape, dtype=bool))


def _check_inputs(plan: TreatmentPlan, frame: Frame, specs) -> None:
    for name in dict.fromkeys(s.orig_name for s in specs):
        if name not in frame:
            raise SchemaError(f"input column {name!r} missing from frame")
        want = plan.var_kinds[name]
        if frame[name].kind != want:
            raise SchemaError(f"column {name!r} was designed as {want}, got {frame[name].kind}")


def prepare(plan: TreatmentPlan, frame: Frame, prune_sig: float | None = None,
            var_restriction: Iterable[str] | None = None, scale: bool = False) -> Frame:
    """Treat ``frame`` with ``plan``.

    Emits one finite numeric column per surviving derived variable, in
    scoreFrame order, followed by the outcome column if ``frame`` has it.

    Parameters
    ----------
    prune_sig : float, optional
        Keep only variables whose scoreFrame ``sig`` is strictly below this.
    var_restriction : iterable of str, optional
        Keep only these derived variable names.
    scale : bool
        Rescale each column to outcome units using the slopes frozen at design.
    """
    specs = surviving_specs(plan, prune_sig, var_restriction)
    _check_inputs(plan, frame, specs)
    cols = {}
    for spec in specs:
        vals = spec.apply(frame[spec.orig_name])
        if scale:
            vals = _rescale(plan, spec.var_name, vals)
        cols[spec.var_name] = _numeric(vals)
    if plan.outcome_name is not None and plan.outcome_name in frame:
        cols[plan.outcome_name] = frame[plan.outcome_name]
    return Frame(cols, frame.nrows)


def _rescale(plan: TreatmentPlan, var_name: str, values: np.ndarray) -> np.ndarray:
    try:
        slope, center = plan.scaling[var_name]
    except KeyError:
        raise TreatError("plan has no outcome, so it carries no scaling") from None
    return slope * (values - center)


def scale_columns(plan: TreatmentPlan, treated: Frame) -> Frame:
    """Replace each derived column ``x`` of ``treated`` by ``slope * (x - mean)``.

    Slope and mean come from the design data, so a column equal to the
    outcome at design becomes the centered outcome.
    """
    if not plan.scaling:
        raise TreatError("plan has no outcome, so it carries no scaling")
    cols = {}
    for name, col in treated.columns.items():
        if name in plan.scaling:
            cols[name] = _numeric(_rescale(plan, name, col.values))
        else:
            cols[name] = col
    return Frame(cols, treated.nrows)
