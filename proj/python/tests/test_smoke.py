import math

import pytest

import homog

MINIMAL = """
[scenario minimal]
kind = linear
a = shifted_sine(1, 2)
f = exponential(1, 1)
m = 2
eps = [1/8, 1/16, 1/32, 1/64]
"""


def test_load_minimal_linear():
    s = homog.load_scenario(MINIMAL)
    assert s.name == "minimal"
    assert s.kind == "linear"
    assert s.dim == 1
    assert s.orders == [2]
    assert s.eps == pytest.approx([1 / 8, 1 / 16, 1 / 32, 1 / 64])
    assert s.eps_max == pytest.approx(1 / 8)


def test_eps_out_of_range():
    text = MINIMAL.replace("eps = [1/8, 1/16, 1/32, 1/64]", "eps = 1.5, 1/16")
    with pytest.raises(homog.ConfigError, match="epsilon out of range"):
        homog.load_scenario(text)


def test_unknown_key_names_line():
    with pytest.raises(homog.ConfigError, match="line 3: unknown key 'colour'"):
        homog.load_scenario("[scenario x]\nkind = linear\ncolour = red\n")


def test_min_of_linear_round_trip():
    text = """
[scenario two_branches]
kind = nonlinear
form = min_of_linear
branch1.a = shifted_sine(1, 2)
branch1.f = constant(1)
branch2.a = shifted_cosine(1, 2.5)
branch2.f = constant(1)
eps = 1/8, 1/16
"""
    s = homog.load_scenario(text)
    assert s.kind == "nonlinear"


def test_fit_slope():
    assert homog.fit_slope([1e-1, 1e-2, 1e-3], [1e-1, 1e-2, 1e-3]) == pytest.approx(1.0, abs=1e-12)
    assert homog.fit_slope([1 / 8, 1 / 16, 1 / 32], [1e-2, 2.5e-3, 6.25e-4]) == pytest.approx(2.0, abs=1e-12)
    assert homog.fit_slope([1 / 8, 1 / 16, 1 / 32], [3e-3] * 3) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(homog.HomogError):
        homog.fit_slope([1 / 8, 1 / 16], [1e-2, 1e-3])


def test_catalog_and_effective_coefficient():
    assert homog.evaluate_function("shifted_sine(1, 2)", 0.25) == pytest.approx(3.0)
    assert homog.effective_coefficient_1d("shifted_sine(1, 2)") == pytest.approx(math.sqrt(3.0), abs=1e-6)


def test_small_study():
    text = MINIMAL.replace("m = 2", "m = 2\ncell_nodes = 128\neffective_nodes = 256")
    text = text.replace("eps = [1/8, 1/16, 1/32, 1/64]", "eps = 1/8, 1/16, 1/32")
    report = homog.run_study(homog.load_scenario(text))
    rows = report["rows"]
    assert [r["epsilon"] for r in rows] == pytest.approx([1 / 8, 1 / 16, 1 / 32])
    assert all(r["ok"] for r in rows)
    assert all(r["wall_ms"] is None for r in rows)
    errors = [r["error_sup"] for r in rows]
    assert errors[2] < errors[1] < errors[0]
    assert report["slopes"][0]["slope"] >= 0.7
    csv = homog.report_csv(homog.load_scenario(text))
    assert csv.splitlines()[0] == "scenario,kind,m,epsilon,error_sup,residual_sup,theta_sup,wall_ms"


def test_verify_linear():
    checks = homog.verify(homog.load_scenario(MINIMAL.replace("m = 2", "m = 2\ncell_nodes = 256\neffective_nodes = 256")))
    assert checks and all(passed for _, passed, _ in checks)
