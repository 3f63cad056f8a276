import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aitlab.config import ConfigError, dump_config, parse_config
from aitlab.models import InadmissibleModelError

BASE = """\
[model]
kind = vasicek
a = 1
b = 0.05
xi = 0.1
r0 = 0.03

[curve.mu]
constant = 0.08

[curve.sigma]
knots = (0, 0.2), (0.5, 0.3), (1, 0.25)
floor = 0.1

[grid]
horizon = 1
n_steps = 100

[mc]
n_paths = 500
seed = 3

[delays]
d_stock = 0.2, 0.4
d_rate = 0.1
"""


def test_parse_basic_document():
    cfg = parse_config(BASE)
    assert cfg.model.kind == "vasicek"
    assert cfg.grid.n_steps == 100 and cfg.n_paths == 500 and cfg.seed == 3
    assert [(d.d_stock, d.d_rate) for d in cfg.delays] == [(0.2, 0.1), (0.4, 0.1)]
    assert cfg.model.sigma(0.25) == pytest.approx(0.25)


def test_round_trip_is_identity():
    cfg = parse_config(BASE)
    text = dump_config(cfg)
    assert parse_config(text) == cfg
    assert dump_config(parse_config(text)) == text


@settings(max_examples=40, deadline=None)
@given(
    kind=st.sampled_from(["bsm", "heston", "vasicek", "hull_white", "cir_rate"]),
    mu=st.floats(-1, 1, allow_nan=False),
    sig=st.floats(0.01, 2),
    n_steps=st.integers(1, 5000),
    seed=st.integers(0, 2**63),
    d=st.floats(0.001, 1.0),
)
def test_round_trip_property(kind, mu, sig, n_steps, seed, d):
    params = {"bsm": "", "heston": "kappa = 2\ntheta = 0.04\neta = 0.2\nv0 = 0.04",
              "vasicek": "a = 1.5\nb = 0.05\nxi = 0.1\nr0 = 0.03",
              "hull_white": "a = 1.5\ntheta = 0.1\nr0 = 0.03",
              "cir_rate": "a = 1\nb = 0.05\ntheta = 0.1\nr0 = 0.03"}[kind]
    text = (f"[model]\nkind = {kind}\n{params}\n[curve.mu]\nconstant = {mu!r}\n"
            f"[curve.rho]\nconstant = 0.02\n[curve.sigma]\nknots = (0, {sig!r}), (2.5, 0.3)\n"
            f"[curve.kappa]\nconstant = 0.05\n"
            f"[grid]\nhorizon = 2.5\nn_steps = {n_steps}\n[mc]\nseed = {seed}\n[delays]\nd_stock = {d!r}\n")
    cfg = parse_config(text)
    assert parse_config(dump_config(cfg)) == cfg


def _broken(old, new):
    assert old in BASE
    return BASE.replace(old, new)


@pytest.mark.parametrize("text,needle", [
    (_broken("kind = vasicek", "kind = merton"), "unknown model"),
    (_broken("xi = 0.1\n", ""), "missing required key 'xi'"),
    (_broken("(1, 0.25)", "(0.9, 0.25)"), "end at T"),
    (_broken("n_steps = 100", "n_steps = ten"), "expected a number"),
    (_broken("n_steps = 100", "n_steps = 2.5"), "integer"),
    (_broken("(0.5, 0.3)", "(0.5, 0.05)"), "floor"),
    (_broken("d_stock = 0.2, 0.4", "d_stock = 0.2, 1.4"), "d_stock"),
    (_broken("d_rate = 0.1", "d_rate = 0.1, 0.2, 0.3"), "one d_rate"),
    (_broken("seed = 3", "seed = -3"), "nonnegative"),
])
def test_invalid_documents_report_location(text, needle):
    with pytest.raises(ConfigError) as info:
        parse_config(text, "exp.ini")
    msg = str(info.value)
    assert needle in msg
    assert msg.startswith("exp.ini:")


def test_line_number_points_at_offending_key():
    text = _broken("n_steps = 100", "n_steps = ten")
    line = text.splitlines().index("n_steps = ten") + 1
    with pytest.raises(ConfigError, match=f"exp.ini:{line}:"):
        parse_config(text, "exp.ini")


def test_rate_delay_refused_for_stock_only_models():
    text = ("[model]\nkind = bsm\n[curve.mu]\nconstant = 0.08\n[curve.rho]\nconstant = 0.02\n"
            "[curve.sigma]\nconstant = 0.2\n[grid]\nhorizon = 1\nn_steps = 10\n"
            "[delays]\nd_stock = 0.5\nd_rate = 0.2\n")
    with pytest.raises(ConfigError, match="short-rate"):
        parse_config(text)


def test_feller_violation_is_inadmissible_not_invalid():
    text = ("[model]\nkind = heston\nkappa = 1\ntheta = 0.01\neta = 0.2\nv0 = 0.04\n"
            "[curve.mu]\nconstant = 0.08\n[curve.rho]\nconstant = 0.02\n"
            "[grid]\nhorizon = 1\nn_steps = 10\n")
    with pytest.raises(InadmissibleModelError, match="Feller"):
        parse_config(text, "h.ini")


def test_missing_curve_section():
    with pytest.raises(ConfigError, match=r"\[curve.sigma\]"):
        parse_config(BASE.replace("[curve.sigma]", "[curve.other]"))
