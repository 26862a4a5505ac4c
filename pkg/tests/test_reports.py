import pytest

from pufkit.analytics.planner import plan_code
from pufkit.bch import default_catalog
from pufkit.config import Config
from pufkit.reports.html_report import HTMLReportGenerator


@pytest.fixture
def generator():
    return HTMLReportGenerator(Config(use_env=False))


@pytest.mark.parametrize("value,expected", [
    (None, "n/a"),
    (0.0, "0"),
    (4.77e-4, "4.770e-04"),
    (0.0306, "0.0306"),
    (128016, "128016"),
    (True, "True"),
])
def test_scientific_filter(value, expected):
    assert HTMLReportGenerator._format_scientific(value) == expected


def test_code_filter():
    assert HTMLReportGenerator._format_code([63, 16, 11]) == "BCH(63,16,11)"
    assert HTMLReportGenerator._format_code(None) == "n/a"


def test_plan_report(generator):
    plan = plan_code(1e-6, 128, [0.024, 0.05, 0.08], default_catalog())
    section = dict(plan.to_dict(), name="plan")
    html = generator.render("plan", [section])
    assert "<title>pufkit plan report</title>" in html
    assert "BCH(63,16,11)" in html
    assert "23688" in html
    assert "model calibration v2" in html


def test_infeasible_plan_report(generator):
    html = generator.render("plan", [{"name": "plan", "error": "no catalog code <reaches>"}])
    assert "Infeasible" in html
    assert "&lt;reaches&gt;" in html


def test_montecarlo_report_written(generator, tmp_path):
    section = {
        "name": "montecarlo 80C", "condition": "80C", "code": [63, 16, 11], "L": 8,
        "trials": 1000, "failures": 0, "empirical_rate": 0.0,
        "ci_low": 0.0, "ci_high": 0.00383, "predicted": 2.5e-7,
    }
    path = generator.write("montecarlo", [section], tmp_path / "out" / "mc.html", title="Campaign")
    html = path.read_text(encoding="utf-8")
    assert "<h1>Campaign</h1>" in html
    assert "BCH(63,16,11) &times; 8" in html
    assert "2.500e-07" in html


def test_entropy_report_flags(generator):
    html = generator.render("analyze", [{"name": "entropy", "key_flag": True, "bias_flag": False}])
    assert 'class="bad">True' in html
