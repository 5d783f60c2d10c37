import csv
import io
import json
import math

import pytest

import fadingfl

SMALL = {
    "quality_factors": [1],
    "clients_per_round": [20],
    "policies": [{"kind": "sfl"}, {"kind": "frfl", "outage_target": 0.5}],
    "data_modes": ["noniid"],
    "hidden_layers": [4],
    "payload_bits": 1628480,
    "seeds": [1],
    "synthetic": {"train_per_class": 6000, "dim": 8, "separation": 6.0, "test_per_class": 50},
}


def test_rayleigh_median():
    m = fadingfl.FadingModel.rayleigh(1.0)
    assert m.cdf(math.sqrt(2 * math.log(2))) == pytest.approx(0.5, abs=1e-15)
    assert m.kind == "rayleigh"
    assert len(m.sample(100, seed=3)) == 100
    assert m.sample(5, seed=3) == m.sample(5, seed=3)


def test_min_gain_matches_order_statistic():
    m = fadingfl.FadingModel.nakagami(3.0)
    f = m.cdf(0.7)
    assert fadingfl.min_gain_cdf(m, 10, 0.7) == pytest.approx(1 - (1 - f) ** 10, rel=1e-12)


def test_expected_min_rate_methods_agree():
    m = fadingfl.FadingModel.rayleigh()
    quad = fadingfl.expected_min_rate(m, 20)
    mc = fadingfl.expected_min_rate(m, 20, method="monte_carlo", rounds=50000)
    assert mc == pytest.approx(quad, rel=0.01)
    with pytest.raises(ValueError):
        fadingfl.expected_min_rate(m, 20, method="simpson")


def test_fixed_rate_outage():
    m = fadingfl.FadingModel.rician_db(12.0)
    sel = fadingfl.fixed_rate(m, 0.2, 20)
    assert fadingfl.outage_probability(m, sel["rate_bps"]) == pytest.approx(0.2, abs=1e-8)
    assert sel["premise_holds"]


def test_config_round_trip_and_errors():
    text = fadingfl.default_config()
    assert fadingfl.normalize_config(text) == text
    assert len(fadingfl.grid_labels(text)) == 36
    with pytest.raises(fadingfl.ConfigError):
        fadingfl.normalize_config('{"bandwith_hz": 1}')


def test_rates_csv():
    text = fadingfl.config_json(channels=[{"kind": "rayleigh"}], quality_factors=[1], rates_max_clients=10,
                                monte_carlo_rounds=20000)
    rows = list(csv.DictReader(io.StringIO(fadingfl.rates_csv(text))))
    assert len(rows) == 10
    assert float(rows[9]["quadrature_per_hz"]) < 0.5 * float(rows[0]["quadrature_per_hz"])


def test_replicate_and_training_are_deterministic():
    text = json.dumps(SMALL)
    a = fadingfl.run_replicate(text, 1, 1)
    assert a["label"] == "rayleigh-A1-C20-frfl0.5-noniid"
    assert a == fadingfl.run_replicate(text, 1, 1)
    assert all(0.0 <= r["accuracy"] <= 1.0 for r in a["rounds"])
    traces, summary, ok = fadingfl.train_csv(text)
    assert ok
    assert (traces, summary, ok) == fadingfl.train_csv(text, jobs=2)
    assert traces.splitlines()[0] == "run_id,seed,policy,model,A,C,epsilon,round,start_s,duration_s,successes,accuracy"
    assert len(summary.splitlines()) == 3


def test_validation_report_shape():
    results = fadingfl.validate(gof_samples=20000, mc_rounds=20000, outage_samples=200000)
    assert results and all(r["passed"] for r in results)
    assert {"name", "tolerance", "observed", "passed"} <= set(results[0])
