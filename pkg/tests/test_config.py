import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glsm.config import RunConfig, parse_config, to_toml
from glsm.errors import ParseError, ValidationError
from glsm.golden_structure import PHI, PHI_CONJ
from glsm.theorem_verifiers import THEOREM_IDS

CONE = """
[ambient]
dim = 3
metric = [[-1, 0, 0], [0, 1, 0], [0, 0, 1]]

[immersion]
chart_dim = 2
components = ["u1", "u1*cos(u2)", "u1*sin(u2)"]
domain = [[0.5, 2.0], [-3.0, 3.0]]
"""


def test_minimal_config_gets_defaults():
    cfg = parse_config(CONE)
    assert isinstance(cfg, RunConfig)
    assert (cfg.dim, cfg.chart_dim) == (3, 2)
    assert (cfg.n_points, cfg.seed, cfg.strategy) == (16, 42, "grid")
    assert (cfg.h_fd, cfg.tau_rank, cfg.tau_eq) == (1e-5, 1e-8, 1e-6)
    assert cfg.theorems == THEOREM_IDS
    assert cfg.golden is None and cfg.assume_class is None
    assert cfg.ambient().dim == 3 and cfg.immersion().chart_dim == 2


def test_dimension_mismatch_names_both_fields():
    text = """
[ambient]
dim = 4
signature = [2, 2]

[immersion]
chart_dim = 2
components = ["u1", "u2", "u1 + u2"]
domain = [[0, 1], [0, 1]]
"""
    with pytest.raises(ValidationError) as info:
        parse_config(text)
    msg = str(info.value)
    assert "immersion.components" in msg and "ambient.dim" in msg
    assert "line 8" in msg and "line 3" in msg  # the text opens with a blank line


def test_unbalanced_expression_reports_position():
    with pytest.raises(ParseError) as info:
        parse_config(CONE.replace('"u1*sin(u2)"', '"sqrt(u1"'))
    assert info.value.position == 7
    assert info.value.line == 8


def test_toml_syntax_error():
    with pytest.raises(ParseError):
        parse_config("[ambient\ndim = 3")


def test_golden_from_product_split():
    cfg = parse_config(CONE.replace("[immersion]", "product_split = [1, 2]\n\n[immersion]"))
    p = np.array(cfg.golden)
    assert np.allclose(p, np.diag([PHI, PHI_CONJ, PHI_CONJ]))


@pytest.mark.parametrize(
    "patch, fragment",
    [
        ("golden = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]", "golden"),
        ('[sampling]\nstrategy = "sobol"', "strategy"),
        ('[theorems]\nselect = ["s9.nope"]', "s9.nope"),
        ('[diagnostic]\nassume_class = "Both"', "assume_class"),
        ("[sampling]\nn_points = -1", "n_points"),
    ],
)
def test_invalid_fields_are_named(patch, fragment):
    if patch.startswith("golden"):
        text = CONE.replace("[immersion]", patch + "\n\n[immersion]")
    else:
        text = CONE + "\n" + patch + "\n"
    with pytest.raises(ValidationError) as info:
        parse_config(text)
    assert fragment in str(info.value)


def test_degenerate_metric_rejected():
    with pytest.raises(ValidationError):
        parse_config(CONE.replace("[-1, 0, 0]", "[0, 0, 0]"))


def test_theorem_selection_by_id():
    cfg = parse_config(CONE + '\n[theorems]\nselect = ["s3.thm.metric-connection"]\n')
    assert cfg.theorems == ("s3.thm.metric-connection",)


def test_overrides_ignore_none():
    cfg = parse_config(CONE)
    assert cfg.with_overrides(seed=None, n_points=3).n_points == 3
    assert cfg.with_overrides(theorems="s4.prop.mu-invariant").theorems == ("s4.prop.mu-invariant",)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(0, 64),
    st.integers(0, 2**31 - 1),
    st.sampled_from(["grid", "low-discrepancy"]),
    st.sampled_from(["golden", "random"]),
    st.floats(1e-7, 1e-3),
)
def test_round_trip(n, seed, strategy, screen, h):
    cfg = parse_config(CONE).with_overrides(n_points=n, seed=seed, strategy=strategy, screen_strategy=screen, h_fd=h)
    assert parse_config(to_toml(cfg)) == cfg
