"""Design and apply statistically sound data treatment plans."""

from .crossframe import CrossFrameResult, mk_cross_frame_c, mk_cross_frame_n
from .design import (Controls, ScoreFrameRow, TreatmentPlan, design_treatments_c,
                     design_treatments_n, design_treatments_z)
from .exceptions import (CSVFormatError, DesignError, PlanFormatError, SchemaError,
                         SplitError, TreatError)
from .frame import (CategoricalColumn, Frame, NumericColumn, Schema, column_stats,
                    read_csv, write_csv)
from .prepare import prepare, scale_columns
from .serde import load_plan, save_plan
from .splits import (SplitPlan, grouped_k_way, k_way_cross_validation, k_way_stratified_y,
                     load_split_plan, one_way_holdout)

__version__ = "0.1.0"

__all__ = [
    "CSVFormatError", "CategoricalColumn", "Controls", "CrossFrameResult", "DesignError",
    "Frame", "NumericColumn", "PlanFormatError", "Schema", "SchemaError", "ScoreFrameRow",
    "SplitError", "SplitPlan", "TreatError", "TreatmentPlan", "column_stats",
    "design_treatments_c", "design_treatments_n", "design_treatments_z", "grouped_k_way",
    "k_way_cross_validation", "k_way_stratified_y", "load_plan", "load_split_plan",
    "mk_cross_frame_c", "mk_cross_frame_n", "one_way_holdout", "prepare", "read_csv",
    "save_plan", "scale_columns", "write_csv",
]
