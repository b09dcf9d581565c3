import csv
import json

import numpy as np
import pytest

from mlpgp.cli import main
from mlpgp.kernels import arccos_reference


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_kernel_curve_zero_mean_matches_reference(tmp_path):
    out = tmp_path / "curve.csv"
    rc = main(["kernel-curve", "--depth", "3", "--mu", "0", "--sigma2", "2",
               "--n-theta", "9", "--seed", "1", "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out)
    assert header == ["theta0", "kernel"]
    assert len(rows) == 9
    for theta_s, val_s in rows:
        want = arccos_reference(float(theta_s), 0.0, 3)
        assert abs(float(val_s) - want) < 1e-10


def test_kernel_curve_empirical_column(tmp_path):
    out = tmp_path / "curve.csv"
    main(["kernel-curve", "--depth", "1", "--mu", "0", "--sigma2", "2",
          "--n-theta", "5", "--empirical-width", "2000", "--seed", "0",
          "--out", str(out)])
    header, rows = _read_csv(out)
    assert header == ["theta0", "kernel", "kernel_empirical"]
    for _, theory_s, emp_s in rows:
        assert abs(float(theory_s) - float(emp_s)) < 0.1


def test_fit_mle_and_constrained(tmp_path):
    out = tmp_path / "report.json"
    rc = main(["fit", "--dataset", "sine", "--estimator", "mle",
               "--depth", "2", "--grid=-2.5:1.0:0.1:8.0:25",
               "--seed", "1", "--out", str(out)])
    assert rc == 0
    report = json.loads(out.read_text())
    assert report["estimator"] == "mle"
    assert report["test_mse"] < 1.0
    assert "hyperparameters" in report
    header, rows = _read_csv(tmp_path / "report.csv")
    assert header == ["x1", "y_true", "pred_mean", "pred_var"]
    assert len(rows) == 100

    out0 = tmp_path / "report0.json"
    main(["fit", "--dataset", "sine", "--estimator", "mle-mu0",
          "--depth", "2", "--grid=-2.5:1.0:0.1:8.0:25",
          "--seed", "1", "--out", str(out0)])
    report0 = json.loads(out0.read_text())
    # constrained estimate sits on the mu-row nearest zero
    step = 3.5 / 24
    assert abs(report0["hyperparameters"]["mu"]) <= step / 2 + 1e-12
    assert report0["hyperparameters"]["objective"] <= \
        report["hyperparameters"]["objective"]


def test_fit_marginal(tmp_path):
    out = tmp_path / "marg.json"
    rc = main(["fit", "--dataset", "sine", "--estimator", "marginal",
               "--depth", "2", "--grid=-2.5:1.0:0.1:8.0:20",
               "--mh-samples", "20", "--seed", "3", "--out", str(out)])
    assert rc == 0
    report = json.loads(out.read_text())
    assert report["chain"]["n_samples"] == 20
    assert 0.0 <= report["chain"]["acceptance_rate"] <= 1.0
    assert np.isfinite(report["test_mse"])


def test_fit_unknown_estimator_exits_nonzero(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["fit", "--dataset", "sine", "--estimator", "bogus",
              "--out", str(tmp_path / "x.json")])
    assert err.value.code != 0


def test_grid_outputs(tmp_path):
    out = tmp_path / "grid.csv"
    rc = main(["grid", "--dataset", "sine", "--depth", "2",
               "--grid=-2.0:1.0:0.2:6.0:12", "--target", "log-ml",
               "--seed", "2", "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out)
    assert header[0] == "mu/sigma2"
    assert len(header) == 1 + 12
    assert len(rows) == 12
    meta = json.loads((tmp_path / "grid.json").read_text())
    assert meta["argmax"]["value"] >= meta["argmax_mu0"]["value"]
    assert meta["resolution"] == 12
    assert "jitter_events" in meta and "failed_cells" in meta


def test_mh_chain_output(tmp_path):
    out = tmp_path / "chain.csv"
    rc = main(["mh", "--dataset", "sine", "--depth", "2",
               "--grid=-2.0:1.0:0.2:6.0:10", "--mh-samples", "15",
               "--seed", "4", "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out)
    assert header == ["mu", "sigma2", "log_density"]
    assert len(rows) == 15
    assert all(float(r[1]) > 0 for r in rows)


def test_mmd_curve_output(tmp_path):
    out = tmp_path / "mmd.csv"
    rc = main(["mmd", "--scheme", "f1", "--depth", "3",
               "--widths", "8,32", "--mmd-samples", "100",
               "--seed", "0", "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out)
    assert header == ["width", "mmd2", "null_low", "null_high"]
    assert [int(r[0]) for r in rows] == [8, 32]
    for row in rows:
        assert float(row[2]) <= float(row[3])


def test_prior_draws_output(tmp_path):
    out = tmp_path / "draws.csv"
    rc = main(["prior-draws", "--dim", "5", "--depth", "4", "--mu", "-0.5",
               "--sigma2", "2.0", "--n-points", "16", "--n-draws", "3",
               "--seed", "9", "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(out)
    assert header == ["t", "draw_1", "draw_2", "draw_3"]
    assert len(rows) == 16
    assert float(rows[0][0]) == 0.0


def test_byte_identical_reruns(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    args = ["mh", "--dataset", "sine", "--depth", "2",
            "--grid=-2.0:1.0:0.2:6.0:8", "--mh-samples", "10",
            "--seed", "11"]
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    main(["mh", "--dataset", "sine", "--depth", "2",
          "--grid=-2.0:1.0:0.2:6.0:8", "--mh-samples", "10",
          "--seed", "12", "--out", str(c)])
    assert a.read_bytes() != c.read_bytes()


def test_flag_validation(tmp_path):
    with pytest.raises(SystemExit):
        main(["grid", "--dataset", "sine", "--grid=bad:spec",
              "--out", str(tmp_path / "g.csv")])
    with pytest.raises(SystemExit):
        main(["mmd", "--scheme", "nope", "--out", str(tmp_path / "m.csv")])
    with pytest.raises(SystemExit):
        main(["fit", "--dataset", "mystery", "--estimator", "mle",
              "--out", str(tmp_path / "f.json")])


def test_snelson_dataset_via_cli(tmp_path):
    rng = np.random.default_rng(0)
    x = np.sort(rng.uniform(0, 6, 200))
    y = np.sin(x) + 0.1 * rng.standard_normal(200)
    data_path = tmp_path / "snelson.txt"
    with open(data_path, "w") as fh:
        for xi, yi in zip(x, y):
            fh.write(f"{xi} {yi}\n")
    out = tmp_path / "snelson_fit.json"
    rc = main(["fit", "--dataset", f"snelson:{data_path}", "--estimator",
               "mle", "--depth", "2", "--grid=-1.0:1.0:0.2:6.0:15",
               "--seed", "0", "--out", str(out)])
    assert rc == 0
    report = json.loads(out.read_text())
    assert np.isfinite(report["test_mse"])
