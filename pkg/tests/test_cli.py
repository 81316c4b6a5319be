import json

import numpy as np
import pytest

from asymptoscope import SCHEMA_VERSION
from asymptoscope.cli import AnalysisReport, ingest_coefficients, ingest_csv, main, run
from asymptoscope.errors import ValidationError


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_csv_three_rows(tmp_path):
    sig = ingest_csv(_write(tmp_path, "a.csv", "0,0\n1,1\n2,4\n"))
    assert sig.spacing == 1.0
    assert np.array_equal(np.asarray(sig.samples).ravel(), [0.0, 1.0, 4.0])


def test_csv_header_is_skipped(tmp_path):
    sig = ingest_csv(_write(tmp_path, "h.csv", "t,value\n0,1\n0.5,2\n1.0,3\n"))
    assert sig.spacing == 0.5


def test_csv_empty_file_is_rejected(tmp_path):
    p = _write(tmp_path, "empty.csv", "")
    with pytest.raises(ValidationError):
        ingest_csv(p)
    code, rep, msg = run(["transform", "--csv", str(p)])
    assert code == 2 and rep is None and "no data" in msg


def test_csv_complex_pair(tmp_path):
    rows = "".join(f"{t},{t + 1},{t},{-t}\n" for t in range(5))
    sig = ingest_csv(_write(tmp_path, "c.csv", rows))
    s = np.asarray(sig.samples).ravel()
    assert s.size == 5 and np.iscomplexobj(s)
    assert np.allclose(s, np.arange(5) + 1 - 1j * np.arange(5))


def test_csv_non_uniform_spacing_names_the_gap(tmp_path):
    p = _write(tmp_path, "n.csv", "0,0\n1,1\n2,1\n3.5,1\n4.5,0\n")
    with pytest.raises(ValidationError, match="rows 2 and 3"):
        ingest_csv(p)


def test_csv_missing_file(tmp_path):
    with pytest.raises(ValidationError):
        ingest_csv(tmp_path / "nope.csv")


def test_coefficient_file(tmp_path):
    c = ingest_coefficients(_write(tmp_path, "k.csv", "1\n-1\n0.5,2\n"))
    assert np.allclose(c(np.arange(5)), [1, -1, 0.5 + 2j, 0, 0])


def test_documented_exponent_example():
    code, rep, _ = run(["exponent", "--generator", "weierstrass:0.6", "--at", "0.3", "--kernel", "lizorkin_exp"])
    assert code == 0
    assert rep.result["alpha"] == pytest.approx(0.737, abs=0.05)


def test_documented_riemann_constants_example():
    code, rep, _ = run(["riemann", "constants", "--r", "0"])
    assert code == 0
    out = rep.to_dict()["result"]
    assert out["p_r"] == [1.0, 0.0]
    assert out["gamma_r"][0] == pytest.approx(0.5772157, abs=1e-7)


def test_documented_littlewood_example():
    code, rep, _ = run(["sum", "littlewood", "--generator", "alt-harmonic", "--beta", "0.6931472"])
    assert code == 0
    assert rep.result["abel_ok"] and rep.result["tauberian_ok"] and rep.result["partial_ok"]


def test_exit_codes():
    assert run(["transform", "--generator", "nosuch"])[0] == 2
    assert run(["transform", "--generator", "heaviside", "--kernel", "nosuch"])[0] == 2
    assert run(["transform", "--generator", "riemann_w", "--y", "1e-13:1e-12:2"])[0] == 3
    with pytest.raises(SystemExit) as exc:
        run(["frobnicate"])
    assert exc.value.code == 2


def test_main_writes_json_to_stdout(capsys):
    assert main(["riemann", "classify", "--r", "1/3"]) == 0
    data = AnalysisReport.loads(capsys.readouterr().out)
    assert data["result"]["class"] == "S1"


def test_report_is_deterministic():
    argv = ["transform", "--generator", "weierstrass:0.6", "--x=-1:1:3", "--y", "0.01:1:4"]
    a = run(argv)[1].dumps(with_run_info=False)
    b = run(argv)[1].dumps(with_run_info=False)
    assert a == b
    assert "run_info" not in json.loads(a)


def test_report_round_trip_and_schema():
    rep = run(["riemann", "zeta", "--r", "1/2", "--z", "2"])[1]
    data = AnalysisReport.loads(rep.dumps())
    assert data["schema_version"] == SCHEMA_VERSION
    assert data["request"]["subcommand"] == "riemann zeta"
    assert set(data["run_info"]) == {"timestamp", "elapsed_s"}
    with pytest.raises(ValidationError):
        AnalysisReport.loads(json.dumps({"schema_version": "other/0"}))


def test_transform_field_shape():
    rep = run(["transform", "--generator", "cosine:1", "--kernel", "gaussian", "--x=-1:1:3", "--y", "0.1:1:2"])[1]
    out = rep.to_dict()["result"]
    assert out["schema"] == SCHEMA_VERSION and out["convention"] == "phi"
    re = np.asarray(out["re"], dtype=float)
    assert re.shape[:2] == (2, 3)
    # a cosine picks up the kernel's Fourier side at +-y, which is exp(-y^2) for the Gaussian
    x, y = np.asarray(out["x"]), np.asarray(out["y"])
    ref = np.cos(x)[None, :] * np.exp(-y[:, None] ** 2)
    assert np.allclose(re.reshape(2, 3), ref, atol=1e-12)


def test_json_and_plot_files(tmp_path):
    js, pl = tmp_path / "r.json", tmp_path / "p.txt"
    code, _, _ = run(["exponent", "--generator", "homogeneous:0.5", "--kernel", "hermite:2",
                      "--json", str(js), "--plot", str(pl)])
    assert code == 0
    data = AnalysisReport.loads(js.read_text())
    assert data["result"]["alpha"] == pytest.approx(0.5, abs=1e-3)
    lines = [ln for ln in pl.read_text().splitlines() if not ln.startswith("#")]
    assert len(lines) > 4


def test_kernel_reconstruct_calibration():
    rep = run(["kernel", "reconstruct", "--kernel", "lizorkin_exp"])[1]
    c = rep.to_dict()["result"]["c_psi_psi_plus"]
    c = c[0] if isinstance(c, list) else c
    assert c == pytest.approx(0.0223198, abs=1e-6)


def test_non_finite_floats_serialize_as_strings():
    def refuse(token):
        raise AssertionError(f"bare {token} in report")
    text = run(["sum", "abel", "--generator", "ones"])[1].dumps()
    json.loads(text, parse_constant=refuse)
