import json
import math

import pytest

import photstat


def test_thermal_pmf_and_g2():
    thermal = photstat.PhotonModel.compound_poisson(3.0, 1.0)
    assert [photstat.pmf(thermal, k) for k in range(4)] == [0.25, 0.1875, 0.140625, 0.10546875]
    assert photstat.autocorrelation(thermal, 2) == 2.0
    fock = photstat.PhotonModel.binomial_fock(1, 1.0)
    assert photstat.autocorrelation(fock, 2) == 0.0


def test_model_json_round_trip():
    model = photstat.PhotonModel.hierarchy(5.98, [2 / 5.98, 8.46 / 5.98])
    text = model.to_json()
    assert json.loads(text)["kind"] == "hierarchy"
    assert photstat.PhotonModel.from_json(text) == model


def test_quadrature_moments():
    q = photstat.quadrature_moments(photstat.PhotonModel.compound_poisson(3.0, 2.0))
    assert q["variance"] == pytest.approx(3.5)
    assert q["excess_kurtosis"] == pytest.approx(-27 / 49)
    assert photstat.quadrature_cdf(photstat.PhotonModel.poisson(1.0), 0.0) == pytest.approx(0.5)


def test_subtraction():
    record = photstat.subtract_analytic(photstat.PhotonModel.compound_poisson(3.0, 1.0), 1)
    assert record.result == photstat.PhotonModel.compound_poisson(6.0, 2.0)
    assert record.step_means == [6.0]
    survivors, acceptance = photstat.mc_subtract([1] * 1000, 0.2, 4)
    assert set(survivors) == {0}
    assert acceptance == pytest.approx(0.2, abs=0.06)
    log_g = photstat.log_g_from_means(3.0, [6.0, 9.0])
    assert log_g[-1] == pytest.approx(math.log(6.0))


def test_fit_round_trip():
    truth = photstat.PhotonModel.compound_poisson(3.0, 1.0)
    values = photstat.sample_quadratures(truth, 20000, 7)
    assert len(values) == 20000
    fit = photstat.mle_fit(values, reference=truth)
    assert abs(fit.model.mu - 3.0) < 3 * fit.sigma_mu
    assert abs(fit.model.a - 1.0) < 3 * fit.sigma_a
    assert fit.fidelity_vs_reference > 0.999
    assert fit.method == "max_likelihood"
    assert json.loads(fit.to_json())["sample_size"] == 20000
    mu_hat, a_hat = photstat.method_of_moments(values)
    assert mu_hat == pytest.approx(3.0, rel=0.05)


def test_errors_are_typed():
    with pytest.raises(photstat.DomainError):
        photstat.PhotonModel.compound_poisson(-1.0, 1.0)
    with pytest.raises(photstat.SubVacuumError):
        photstat.mle_fit([0.0] * 200)
    with pytest.raises(photstat.Error):
        photstat.subtract_analytic(photstat.PhotonModel.binomial_fock(2, 1.0), 3)


def test_campaign_report():
    report = photstat.campaign_report(json.dumps({"m_max": 1, "sample_sizes": [2000, 2000], "seed": 5}))
    lines = report.splitlines()
    assert "state,mu,sigma_mu,a,sigma_a,sample_size,fidelity,chi2_significance" in lines
    assert lines[-1].startswith("2,")
