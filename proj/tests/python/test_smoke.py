import math

import pytest

import rtreserve as rt

SHORT = """
learner = "conv_oga"
seeds = 3
record_stride = 50
[step]
nu = 0.02, alpha = 0
[kernel]
sigma0 = 0.05, alpha_sigma = 0
[phase.1]
family = "kumaraswamy", a = 1, b = 0.4
length = 400
[phase.2]
family = "uniform"
length = 400
"""


def test_monopoly_price():
    r, rev = rt.monopoly_price(rt.BidDistribution.kumaraswamy(1.0, 0.4))
    assert r == pytest.approx(1 / 1.4, abs=1e-6)
    assert rev == pytest.approx(r * (1 - r) ** 0.4, rel=1e-9)
    assert rt.monopoly_revenue(rt.BidDistribution.uniform(), 0.5) == pytest.approx(0.25)


def test_gradient_matches_payoff_slope():
    k = rt.GaussianKernel(0.1)
    h = 1e-5
    for r, b in [(0.3, 0.7), (0.7, 0.7), (0.9, 0.2)]:
        fd = (rt.convolved_payoff(k, r + h, b) - rt.convolved_payoff(k, r - h, b)) / (2 * h)
        assert rt.convolved_gradient(k, r, b) == pytest.approx(fd, abs=1e-7)
    expected = 0.5 - 0.5 * math.erfc(7 / math.sqrt(2)) - 0.7 / (0.1 * math.sqrt(2 * math.pi))
    assert rt.convolved_gradient(k, 0.7, 0.7) == pytest.approx(expected, rel=1e-12)


def test_learner_steps():
    learner = rt.make_learner("conv_oga", nu=0.1, alpha=0, sigma0=0.01, alpha_sigma=0, r0=0.3)
    assert learner.kind == "conv_oga"
    assert learner.reserve == 0.3
    learner.observe(0.7)
    assert learner.step == 1
    assert learner.reserve == pytest.approx(0.4, abs=1e-9)
    path = learner.reserve_path([0.5, 0.6, 0.1])
    assert len(path) == 3 and path[0] == pytest.approx(0.4, abs=1e-9)
    assert learner.step == 4


def test_erm_picks_best_empirical_reserve():
    learner = rt.make_learner("erm")
    learner.observe_all([0.2, 0.5, 0.9])
    # r * #{b >= r}: 0.2 * 3, 0.5 * 2, 0.9 * 1
    assert learner.reserve == pytest.approx(0.5)


def test_bad_learner_settings():
    with pytest.raises(ValueError):
        rt.make_learner("conv_oga", alpha_sigma=0.5)
    with pytest.raises(ValueError):
        rt.make_learner("sgd")


def test_run_config_is_thread_count_independent():
    a = rt.run_config(SHORT, jobs=1)
    b = rt.run_config(SHORT, ["seeds=3"], jobs=3)
    assert len(a["optima"]) == 2
    assert a["optima"][1][0] == pytest.approx(0.5, abs=1e-6)
    assert [r["seed"] for r in a["runs"]] == [1, 2, 3]
    for x, y in zip(a["runs"], b["runs"]):
        assert x["reserve"] == y["reserve"]
        assert x["dynamic_regret"] == y["dynamic_regret"]
    run = a["runs"][0]
    assert run["t"][0] == 1 and run["t"][-1] == 800
    assert sum(run["phase_regret"]) == pytest.approx(run["dynamic_regret"], rel=1e-12)


def test_config_errors_surface():
    with pytest.raises(rt.ConfigError, match="unknown key"):
        rt.run_config(SHORT + "colour = 1\n")
    with pytest.raises(ValueError):
        rt.run_config(SHORT, ["step.nuu=1"])
