import math

import numpy as np
import pytest

from svchannel.geometry import MisalignmentBin
from svchannel.metrics import Pdp
from svchannel.simulator import PARAMETER_REGISTRY
from svchannel.sv_core import Scenario
from svchannel.traceio import (
    TraceParseError,
    read_parameter_file,
    read_pdp_trace,
    write_parameter_file,
    write_pdp_trace,
)


def sample_pdp():
    rng = np.random.default_rng(50)
    powers = rng.uniform(0.0, 1.0, size=48)
    powers[0] = 1.0
    powers[5] = 0.0  # exercise the -inf dB path
    return Pdp(powers=powers, delay_resolution_ns=0.125, normalized=True)


def test_trace_round_trip(tmp_path):
    path = tmp_path / "trace.csv"
    pdp = sample_pdp()
    meta = {"scenario": "o2i", "theta_deg": 5.0, "phi_deg": -10.0, "psi_deg": 11.168951,
            "seed": 3, "normalized": True}
    write_pdp_trace(path, pdp, meta)
    back, meta_back = read_pdp_trace(path)
    assert back.delay_resolution_ns == pdp.delay_resolution_ns
    assert back.normalized
    np.testing.assert_allclose(back.powers, pdp.powers, rtol=1e-7, atol=1e-12)
    assert meta_back["scenario"] == "o2i"
    assert meta_back["theta_deg"] == 5.0
    assert meta_back["seed"] == 3
    assert meta_back["normalized"] is True


def test_trace_emit_parse_emit_is_byte_stable(tmp_path):
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    write_pdp_trace(first, sample_pdp(), {"scenario": "o2o", "psi_deg": 5.0})
    pdp, meta = read_pdp_trace(first)
    write_pdp_trace(second, pdp, meta)
    assert first.read_bytes() == second.read_bytes()


def test_trace_zero_power_round_trips_as_minus_inf(tmp_path):
    path = tmp_path / "z.csv"
    write_pdp_trace(path, sample_pdp(), {})
    text = path.read_text()
    assert "-inf" in text
    back, _ = read_pdp_trace(path)
    assert back.powers[5] == 0.0


@pytest.mark.parametrize(
    "body,fragment",
    [
        ("delay_ns,power\n0,0\n", "expected header"),
        ("delay_ns,power_db\n0\n", "expected 2 columns"),
        ("delay_ns,power_db\n0,abc\n", "non-numeric"),
        ("delay_ns,power_db\n0,0\n0.1,0\n0.3,0\n", "not uniform"),
        ("delay_ns,power_db\n0.5,0\n0.625,0\n", "must start at 0"),
        ("delay_ns,power_db\n0,0\n0,-3\n", "strictly increasing"),
        ("# broken metadata\ndelay_ns,power_db\n0,0\n", "malformed metadata"),
        ("", "missing"),
    ],
)
def test_trace_parse_errors(tmp_path, body, fragment):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(TraceParseError) as err:
        read_pdp_trace(path)
    assert fragment in str(err.value)


def test_trace_parse_error_cites_line_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# scenario: o2i\ndelay_ns,power_db\n0,0\n0.125,oops\n")
    with pytest.raises(TraceParseError) as err:
        read_pdp_trace(path)
    assert ":4:" in str(err.value)


def test_trace_metadata_grid_mismatch(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# delay_resolution_ns: 0.5\ndelay_ns,power_db\n0,0\n0.125,-1\n")
    with pytest.raises(TraceParseError) as err:
        read_pdp_trace(path)
    assert "disagrees" in str(err.value)


def test_parameter_file_round_trip(tmp_path):
    for key, params in PARAMETER_REGISTRY.items():
        path = tmp_path / f"{key[0].value}_{key[1].value}.json"
        write_parameter_file(path, params, source="table")
        back, doc = read_parameter_file(path)
        assert back == params
        assert doc["provenance"]["source"] == "table"


def test_parameter_file_with_nan_yields_doc_only(tmp_path):
    from svchannel.extraction import ExtractedParameters

    extracted = ExtractedParameters(
        n_clusters=2,
        ray_rates=np.array([5.0, float("nan")]),
        cluster_rate=0.3,
        ray_decays=np.array([0.2, 0.5]),
        cluster_decay=float("nan"),
        ray_fit_rms_db=np.array([0.1, float("nan")]),
        cluster_fit_rms_db=0.2,
        peak_counts=np.array([4.0, 2.0]),
        sample_count=7,
        scenario=Scenario.O2I,
        bin=MisalignmentBin.NEAR,
    )
    path = tmp_path / "extracted.json"
    write_parameter_file(path, extracted, source="extracted", sample_count=7)
    params, doc = read_parameter_file(path)
    assert params is None  # incomplete: NaNs present
    assert doc["ray_rates_per_ns"] == [5.0, None]
    assert doc["cluster_decay_ns"] is None
    assert doc["provenance"] == {"source": "extracted", "sample_count": 7}


def test_parameter_file_parse_error_cites_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "n_clusters": 2,\n  oops\n}\n')
    with pytest.raises(TraceParseError) as err:
        read_parameter_file(path)
    assert ":3:" in str(err.value)


def test_parameter_file_missing_keys(tmp_path):
    path = tmp_path / "lacking.json"
    path.write_text('{"n_clusters": 2}\n')
    with pytest.raises(TraceParseError):
        read_parameter_file(path)
