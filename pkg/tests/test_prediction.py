import math

import numpy as np
import pytest

from weibullgen import load_embedded
from weibullgen.distributions import EPWParams, EWParams, Family
from weibullgen.errors import ConvergenceError, DomainError
from weibullgen.estimation import fit_mle
from weibullgen.prediction import MaintenancePlan, predict_maintenance, round_days
from weibullgen.resampling import BootstrapConfig, bootstrap_fit


@pytest.fixture(scope="module")
def ta_gg():
    return fit_mle("GG", load_embedded("transmission_a"))


def test_round_days():
    assert round_days(2.5) == 3
    assert round_days(2.49) == 2
    assert round_days(6.748) == 7
    assert round_days(0.2) == 1
    assert round_days(1e-9) == 1


def test_y_star_is_quantile(ta_gg):
    plan = predict_maintenance(ta_gg)
    assert plan.u == 0.25
    assert plan.y_star == float(ta_gg.params.quantile(0.25))
    assert abs(float(ta_gg.params.cdf(plan.y_star)) - 0.25) <= 1e-9
    assert plan.ci is None


def test_monotone_in_u(ta_gg):
    ys = [predict_maintenance(ta_gg, u).y_star for u in (1e-6, 0.05, 0.25, 0.5, 0.9)]
    assert np.all(np.diff(ys) > 0)
    assert ys[0] < 1e-2


def test_domain_errors(ta_gg):
    for u in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            predict_maintenance(ta_gg, u)


def test_unconverged_fit_rejected(ta_gg):
    from dataclasses import replace

    with pytest.raises(ConvergenceError):
        predict_maintenance(replace(ta_gg, converged=False))


@pytest.mark.parametrize("dataset", ["pricker_a", "pricker_b", "transmission_a", "transmission_b"])
def test_rounded_recommendation_at_least_one_day(dataset):
    data = load_embedded(dataset)
    for fam in Family:
        fit = fit_mle(fam, data)
        if fit.converged:
            plan = predict_maintenance(fit)
            assert plan.y_star_days >= 1
            assert abs(float(fit.params.cdf(plan.y_star)) - 0.25) <= 1e-9


def test_plan_with_bootstrap(ta_gg):
    boot = bootstrap_fit("GG", load_embedded("transmission_a"), BootstrapConfig(replicates=100, seed=5),
                         base_fit=ta_gg)
    plan = predict_maintenance(ta_gg, 0.25, boot)
    stat = boot.stats["y_star"]
    assert plan.ci == (stat.lower, stat.upper)
    assert plan.ci[0] < plan.y_star < plan.ci[1]
    assert plan.replicates == 100 and plan.effective == boot.n_effective and plan.seed == 5
    text = plan.recommendation()
    assert f"~{plan.y_star_days} days after the last failure" in text
    assert "95% CI" in text
    d = plan.to_dict()
    assert d["family"] == "GG" and d["ci"] == list(plan.ci)


def test_bootstrap_mismatch_rejected(ta_gg):
    boot = bootstrap_fit("GG", load_embedded("transmission_a"), BootstrapConfig(replicates=100, seed=5),
                         base_fit=ta_gg, u=0.5)
    with pytest.raises(ValueError):
        predict_maintenance(ta_gg, 0.25, boot)


def test_plan_from_explicit_params():
    # EPW at the transmission-B values rounds to a week
    p = EPWParams(-0.572, 1.206, 0.022)
    assert round_days(float(p.quantile(0.25))) == 7
    ew = EWParams(0.727, 6.446, 0.379)
    plan = MaintenancePlan(Family.EW, ew, 0.25, float(ew.quantile(0.25)))
    assert math.isclose(float(ew.cdf(plan.y_star)), 0.25, abs_tol=1e-9)
