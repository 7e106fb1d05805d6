"""Save and load treatment plans as a single checksummed JSON document.

Layout (top-level keys, in order)::

    format      "treatkit-plan"
    version     integer format version
    task        "numeric" | "binomial" | "none"
    outcome     outcome column name or null
    target      target level (string) or null
    controls    {minFraction, rareCount, rareSig, smFactor, ncross}
    meanY       numeric task only, else null
    grandRate   binomial task only, else null
    varKinds    [[input name, "numeric" | "categorical"], ...]
    specs       one object per derived variable, see _spec_to_json
    scoreFrame  [{varName, sig, extraModelDegrees, origName, code}, ...]
    scaling     [[varName, slope, center], ...]
    sha256      hex digest of the compact encoding of everything above

Floats are written with Python's shortest round-trip repr, so a loaded plan
is bit-identical to the saved one.  Categorical level keys are strings, with
null for the missing level.
"""

from __future__ import annotations

import hashlib
import json

from . import encoders as enc
from .design import FORMAT_VERSION, Controls, ScoreFrameRow, TreatmentPlan
from .exceptions import PlanFormatError
from .frame import atomic_write_text

FORMAT_NAME = "treatkit-plan"
_KEYS = ("format", "version", "task", "outcome", "target", "controls", "meanY",
         "grandRate", "varKinds", "specs", "scoreFrame", "scaling")


def _sorted_levels(keys):
    return sorted(keys, key=lambda k: (k is not None, k or ""))


def _spec_to_json(spec) -> dict:
    d = {"code": spec.code, "origName": spec.orig_name}
    if isinstance(spec, enc.CleanSpec):
        d["fillValue"] = spec.fill_value
    elif isinstance(spec, enc.LevSpec):
        d.update(varName=spec.var_name, level=spec.level,
                 firesOn=_sorted_levels(spec.fires_on), novel=spec.novel,
                 known=_sorted_levels(spec.known))
    elif isinstance(spec, enc._CatSpec):
        d["table"] = [[k, spec.table[k]] for k in _sorted_levels(spec.table)]
        d["novelValue"] = spec.novel_value
        d["pooled"] = _sorted_levels(spec.pooled)
        if isinstance(spec, enc.CatNSpec):
            d.update(grandMean=spec.grand_mean, smFactor=spec.sm_factor)
        elif isinstance(spec, enc.CatBSpec):
            d.update(grandRate=spec.grand_rate, epsilon=spec.epsilon, smFactor=spec.sm_factor)
    return d


_CAT_TYPES = {"catP": enc.CatPSpec, "catN": enc.CatNSpec, "catB": enc.CatBSpec, "catD": enc.CatDSpec}


def _spec_from_json(d: dict):
    code, name = d["code"], d["origName"]
    if code == "clean":
        return enc.CleanSpec(name, float(d["fillValue"]))
    if code == "isBAD":
        return enc.IsBadSpec(name)
    if code == "lev":
        return enc.LevSpec(name, d["varName"], d["level"], frozenset(d["firesOn"]),
                           bool(d["novel"]), frozenset(d["known"]))
    if code in _CAT_TYPES:
        extra = {}
        if code == "catN":
            extra = {"grand_mean": d["grandMean"], "sm_factor": d["smFactor"]}
        elif code == "catB":
            extra = {"grand_rate": d["grandRate"], "epsilon": d["epsilon"],
                     "sm_factor": d["smFactor"]}
        table = {k: float(v) for k, v in d["table"]}
        return _CAT_TYPES[code](name, table, float(d["novelValue"]),
                                pooled=frozenset(d["pooled"]), **extra)
    raise PlanFormatError(f"unknown spec code {code!r}")


def plan_to_dict(plan: TreatmentPlan) -> dict:
    c = plan.controls
    return {
        "format": FORMAT_NAME,
        "version": plan.version,
        "task": plan.task,
        "outcome": plan.outcome_name,
        "target": plan.target_level,
        "controls": {"minFraction": c.min_fraction, "rareCount": c.rare_count,
                     "rareSig": c.rare_sig, "smFactor": c.sm_factor, "ncross": c.ncross},
        "meanY": plan.mean_y,
        "grandRate": plan.grand_rate,
        "varKinds": [[k, v] for k, v in plan.var_kinds.items()],
        "specs": [_spec_to_json(s) for s in plan.specs],
        "scoreFrame": [{"varName": r.var_name, "sig": r.sig,
                        "extraModelDegrees": r.extra_model_degrees,
                        "origName": r.orig_name, "code": r.code} for r in plan.score_frame],
        "scaling": [[k, s, m] for k, (s, m) in plan.scaling.items()],
    }


def _digest(body: dict) -> str:
    blob = json.dumps(body, separators=(",", ":"), ensure_ascii=False, allow_nan=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def dumps_plan(plan: TreatmentPlan) -> str:
    body = plan_to_dict(plan)
    doc = dict(body, sha256=_digest(body))
    return json.dumps(doc, indent=1, ensure_ascii=False, allow_nan=False) + "\n"


def loads_plan(text: str) -> TreatmentPlan:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise PlanFormatError(f"plan file is not valid JSON (truncated or corrupted?): {e}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise PlanFormatError("not a treatkit plan file")
    if doc.get("version") != FORMAT_VERSION:
        raise PlanFormatError(f"unsupported plan format version {doc.get('version')!r}; "
                              f"this build reads version {FORMAT_VERSION}")
    digest = doc.pop("sha256", None)
    unknown = sorted(set(doc) - set(_KEYS))
    if unknown:
        raise PlanFormatError(f"unknown plan fields {unknown} for version {FORMAT_VERSION}")
    if digest is None or digest != _digest(doc):
        raise PlanFormatError("plan checksum mismatch: file is corrupted")
    try:
        c = doc["controls"]
        return TreatmentPlan(
            task=doc["task"],
            outcome_name=doc["outcome"],
            target_level=doc["target"],
            var_kinds={k: v for k, v in doc["varKinds"]},
            specs=[_spec_from_json(s) for s in doc["specs"]],
            score_frame=[ScoreFrameRow(r["varName"], float(r["sig"]), int(r["extraModelDegrees"]),
                                       r["origName"], r["code"]) for r in doc["scoreFrame"]],
            controls=Controls(min_fraction=c["minFraction"], rare_count=c["rareCount"],
                              rare_sig=c["rareSig"], sm_factor=c["smFactor"], ncross=c["ncross"]),
            mean_y=doc["meanY"],
            grand_rate=doc["grandRate"],
            scaling={k: (s, m) for k, s, m in doc["scaling"]},
            version=doc["version"],
        )
    except (KeyError, TypeError, ValueError) as e:
        raise PlanFormatError(f"malformed plan: {e!r}") from None


def save_plan(plan: TreatmentPlan, path) -> None:
    atomic_write_text(path, dumps_plan(plan))


def load_plan(path) -> TreatmentPlan:
    with open(path, encoding="utf-8") as fh:
        return loads_plan(fh.read())
