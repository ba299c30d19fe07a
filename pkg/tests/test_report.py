import json
import math

import jsonschema
import numpy as np
import pytest

from sdbf.bayes_factor import SdIngredients
from sdbf.density import DensityEstimate, McEstimate
from sdbf.exceptions import InvalidParameterError
from sdbf.report import (
    BayesFactorReport,
    render_report_json,
    validate_report_dict,
    write_report,
)


@pytest.fixture()
def report():
    ingredients = SdIngredients(
        posterior_density_at_equality=DensityEstimate(0.987, 0.012, 1000, 0.004),
        prior_density_at_equality=DensityEstimate.exact(float(np.sqrt(2.0) / np.pi)),
        completed_prior_prob=McEstimate.exact(0.5),
        prior_ratio_expectation=McEstimate(1.0988, 1000, 0.002, n_nonfinite=0),
    )
    return BayesFactorReport(
        analysis="mvt",
        bf_cu=4.8191,
        bf_std_error=0.02,
        posterior_prob_constrained=0.827,
        posterior_prob_unconstrained=0.173,
        prior_odds=1.0,
        ingredients=ingredients,
        seed=42,
        settings={"n_draws": 1000, "kde_mode": "exact"},
        extras={"acceptance": [0.3, 0.31, 0.29]},
        notes=["probabilities derived from the unrounded Bayes factor"],
    )


class TestSerialization:
    def test_roundtrip_preserves_floats_exactly(self, report):
        text = render_report_json(report)
        parsed = json.loads(text)
        assert parsed["bayes_factor"]["value"] == report.bf_cu
        assert parsed["ingredients"]["prior_density_at_equality"]["value"] == float(
            np.sqrt(2.0) / np.pi
        )
        assert parsed["bayes_factor"]["log_value"] == math.log(report.bf_cu)

    def test_keys_sorted(self, report):
        text = render_report_json(report)
        parsed = json.loads(text)
        assert list(parsed.keys()) == sorted(parsed.keys())
        top_positions = [text.index(f'"{k}"') for k in sorted(parsed.keys())]
        assert top_positions == sorted(top_positions)

    def test_byte_deterministic(self, report):
        assert render_report_json(report) == render_report_json(report)

    def test_seventeen_significant_digits(self):
        assert render_report_json is not None
        from sdbf.report import _render

        assert _render(1.0 / 3.0, 0) == format(1.0 / 3.0, ".17g")
        assert float(_render(0.1, 0)) == 0.1

    def test_nonfinite_rejected(self, report):
        document = report.to_dict()
        document["extras"]["bad"] = float("nan")
        with pytest.raises(InvalidParameterError):
            render_report_json(document)

    def test_exact_ingredient_bandwidth_serialized_as_null(self, report):
        parsed = json.loads(render_report_json(report))
        assert parsed["ingredients"]["prior_density_at_equality"]["bandwidth"] is None
        assert parsed["ingredients"]["posterior_density_at_equality"]["bandwidth"] == 0.012


class TestSchema:
    def test_valid_report_passes(self, report):
        validate_report_dict(report.to_dict())

    def test_missing_ingredient_fails(self, report):
        document = report.to_dict()
        del document["ingredients"]["prior_ratio_expectation"]
        with pytest.raises(jsonschema.ValidationError):
            validate_report_dict(document)

    def test_negative_std_error_fails(self, report):
        document = report.to_dict()
        document["bayes_factor"]["std_error"] = -1.0
        with pytest.raises(jsonschema.ValidationError):
            validate_report_dict(document)

    def test_unknown_top_level_key_fails(self, report):
        document = report.to_dict()
        document["surprise"] = 1
        with pytest.raises(jsonschema.ValidationError):
            validate_report_dict(document)

    def test_every_estimate_carries_std_error(self, report):
        document = report.to_dict()
        for entry in document["ingredients"].values():
            assert "std_error" in entry


class TestWriteReport:
    def test_file_round_trip(self, report, tmp_path):
        path = tmp_path / "report.json"
        document = write_report(report, path)
        on_disk = json.loads(path.read_text())
        assert on_disk == document
