import re

import numpy as np
import pytest

from simdata import pruning_frame, small_frame
from treatkit import (Controls, DesignError, Frame, design_treatments_c, design_treatments_n,
                      design_treatments_z)
from treatkit.serde import dumps_plan

CODES_N = ["lev", "lev", "lev", "catP", "catN", "catD", "clean", "isBAD"]
NAMES_N = ["x_lev_NA", "x_lev_x.a", "x_lev_x.b", "x_catP", "x_catN", "x_catD", "z_clean", "z_isBAD"]


def test_numeric_score_frame_structure():
    plan = design_treatments_n(small_frame(), ["x", "z"], "yN")
    sf = plan.score_frame
    assert [r.var_name for r in sf] == NAMES_N
    assert [r.code for r in sf] == CODES_N
    assert [r.extra_model_degrees for r in sf] == [0, 0, 0, 2, 2, 2, 0, 0]
    assert [r.orig_name for r in sf] == ["x"] * 6 + ["z"] * 2
    sig = {r.var_name: r.sig for r in sf}
    expected = {"x_lev_NA": 0.6850376, "x_lev_x.a": 0.4950253, "x_lev_x.b": 0.2722284,
                "z_clean": 0.8798694, "z_isBAD": 0.6850376}
    for k, v in expected.items():
        assert sig[k] == pytest.approx(v, abs=1e-6)
    assert all(0 <= r.sig <= 1 for r in sf)
    assert plan.mean_y == pytest.approx(0.8)


def test_complex_sig_uses_out_of_fold_vector():
    # 5 rows < 2 * 3 folds, so leave-one-out applies and catP matches the printed value
    plan = design_treatments_n(small_frame(), ["x", "z"], "yN")
    assert plan.row("x_catP").sig == pytest.approx(0.6850376, abs=1e-6)
    planc = design_treatments_c(small_frame(), ["x", "z"], "y", True)
    assert planc.row("x_catP").sig == pytest.approx(0.4771618, abs=1e-6)
    assert planc.row("x_catB").sig == pytest.approx(0.7116288, abs=1e-6)


def test_binomial_score_frame_structure():
    plan = design_treatments_c(small_frame(), ["x", "z"], "y", True)
    sf = plan.score_frame
    assert [r.code for r in sf] == ["lev", "lev", "lev", "catP", "catB", "clean", "isBAD"]
    assert plan.row("x_catB").extra_model_degrees == 2
    sig = {r.var_name: r.sig for r in sf}
    for k, v in {"x_lev_NA": 0.4771618, "x_lev_x.a": 0.2763528, "x_lev_x.b": 0.1352282,
                 "z_clean": 0.8341162, "z_isBAD": 0.4771618}.items():
        assert sig[k] == pytest.approx(v, abs=1e-6)
    assert plan.grand_rate == pytest.approx(0.8)


def test_no_target_score_frame():
    plan = design_treatments_z(small_frame(), ["x", "z"])
    assert [r.var_name for r in plan.score_frame] == [
        "x_lev_NA", "x_lev_x.a", "x_lev_x.b", "x_catP", "z_clean", "z_isBAD"]
    assert all(r.sig == 1 for r in plan.score_frame)
    assert dumps_plan(plan) == dumps_plan(design_treatments_z(small_frame(), ["x", "z"]))


def test_all_numeric_clean_frame():
    f = Frame.from_dict({"a": [1.0, 2.0, 3.0, 5.0], "b": [0.0, 1.0, 0.0, 1.0], "y": [1.0, 2.0, 2.0, 4.0]})
    plan = design_treatments_n(f, ["a", "b"], "y")
    assert [r.code for r in plan.score_frame] == ["clean", "clean"]
    assert design_treatments_z(f, ["a"]).var_names == ["a_clean"]


def test_constant_columns_are_suppressed():
    f = Frame.from_dict({"c": ["k"] * 6, "n": [None] * 6, "v": [1.0, 2, 3, 4, 5, 6],
                         "y": [1.0, 0, 1, 0, 1, 1]})
    plan = design_treatments_n(f, ["c", "n", "v"], "y")
    assert plan.var_names == ["v_clean"]


def test_numeric_binary_outcome_with_string_target():
    f = Frame.from_dict({"x": ["a", "b", "a", "b", "a", "b"], "y": [1.0, 0, 1, 0, 0, 1]})
    plan = design_treatments_c(f, ["x"], "y", "1")
    assert plan.task == "binomial" and plan.target_level == "1"
    with pytest.raises(DesignError, match="target"):
        design_treatments_c(f, ["x"], "y", "7")


@pytest.mark.parametrize("varlist, outcome, msg", [
    ([], "yN", "empty"),
    (["x", "nope"], "yN", "not in frame"),
    (["x", "yN"], "yN", "outcome"),
    (["x", "x"], "yN", "duplicate"),
    (["x"], "missing_outcome", "outcome"),
])
def test_design_errors(varlist, outcome, msg):
    with pytest.raises(DesignError, match=msg):
        design_treatments_n(small_frame(), varlist, outcome)


def test_bad_outcomes():
    f = small_frame()
    g = Frame.from_dict({"x": ["a", "b", "a"], "y": [1.0, None, 2.0]})
    with pytest.raises(DesignError):
        design_treatments_n(g, ["x"], "y")
    h = Frame.from_dict({"x": ["a", "b", "a"], "y": [1.0, 1.0, 1.0]})
    with pytest.raises(DesignError, match="more than one value"):
        design_treatments_n(h, ["x"], "y")
    with pytest.raises(DesignError):
        design_treatments_n(f, ["z"], "x")
    with pytest.raises(DesignError):
        design_treatments_z(f, [])


def test_name_grammar_and_uniqueness():
    plan = design_treatments_n(pruning_frame(0), ["sN", "nN", "sC", "nC"], "y", seed=0)
    names = plan.var_names
    assert len(set(names)) == len(names)
    pat = re.compile(r"^[A-Za-z]+_(clean|isBAD|lev_NA|lev_x\.[A-Za-z0-9.]+|lev_rare|catP|catN|catD|catB)$")
    assert all(pat.match(n) for n in names)
    assert plan.row("sC_catN").extra_model_degrees == len(set(plan.spec("sC_catN").table)) - 1


def test_worker_count_does_not_change_plan():
    f = pruning_frame(3)
    one = dumps_plan(design_treatments_n(f, ["sN", "nN", "sC", "nC"], "y", seed=11))
    four = dumps_plan(design_treatments_n(f, ["sN", "nN", "sC", "nC"], "y", seed=11, workers=4))
    assert one == four


def test_rare_pooling_control():
    rng = np.random.default_rng(0)
    common = rng.choice(["a", "b"], size=200).tolist()
    rare = [f"r{i}" for i in range(30)]
    labels = common + rare
    y = np.r_[rng.normal(size=200), rng.normal(size=30) + 5.0]
    f = Frame.from_dict({"v": labels, "y": y})
    plan = design_treatments_n(f, ["v"], "y", Controls(rare_count=1, rare_sig=0.05))
    assert "v_lev_rare" in plan.var_names
    assert plan.spec("v_catN").extra_degrees == 2
    off = design_treatments_n(f, ["v"], "y", Controls(rare_count=1))
    assert "v_lev_rare" not in off.var_names
    strict = design_treatments_n(f, ["v"], "y", Controls(rare_count=1, rare_sig=1e-300))
    assert "v_lev_rare" not in strict.var_names


def test_controls_validation():
    with pytest.raises(ValueError):
        Controls(min_fraction=1.5)
    with pytest.raises(ValueError):
        Controls(ncross=1)
    with pytest.raises(ValueError):
        Controls(sm_factor=-1)
