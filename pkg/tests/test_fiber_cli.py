import io
import json

import numpy as np
import pytest

from frechetstats.cli import main
from frechetstats.fiber import (
    FiberDataset,
    FiberParseError,
    fiber_site_tests,
    generate_fiber_dataset,
    parse_fiber_csv,
    write_fiber_csv,
    write_site_csv,
)

SITE_HEADER = "site,statistic,df,p_value,tiny_p,bh_rejected,bonferroni_rejected"


# ---------------------------------------------------------------------------
# dataset parsing and generation


def test_generate_defaults_mirror_study_shape():
    ds = generate_fiber_dataset(seed=1, n_sites=5)
    assert len(ds.subjects) == 46
    assert int((ds.groups == 1).sum()) == 28
    assert int((ds.groups == 0).sum()) == 18
    full = generate_fiber_dataset(seed=1)
    assert full.n_sites == 75


def test_fiber_csv_round_trip():
    ds = generate_fiber_dataset(seed=3, n_sites=4, n_group1=4, n_group0=3)
    buf = io.StringIO()
    write_fiber_csv(ds, buf)
    parsed = parse_fiber_csv(io.StringIO(buf.getvalue()))
    assert parsed.subjects == ds.subjects
    assert np.array_equal(parsed.groups, ds.groups)
    assert np.allclose(parsed.tensors, ds.tensors, rtol=0, atol=0)  # 17g is exact


def test_parse_errors_name_the_line():
    good = "subject,group,site,a11,a12,a13,a22,a23,a33\n"
    with pytest.raises(FiberParseError, match="line 1"):
        parse_fiber_csv(io.StringIO("bad,header\n"))
    with pytest.raises(FiberParseError, match="line 2"):
        parse_fiber_csv(io.StringIO(good + "s0,0,0,1,0,0,1,0\n"))  # short row
    with pytest.raises(FiberParseError, match="line 2"):
        parse_fiber_csv(io.StringIO(good + "s0,0,0,1,0,x,1,0,1\n"))  # bad float
    with pytest.raises(FiberParseError, match="not SPD"):
        parse_fiber_csv(io.StringIO(good + "s0,0,0,-1,0,0,1,0,1\n"))
    with pytest.raises(FiberParseError, match="duplicate"):
        parse_fiber_csv(
            io.StringIO(good + "s0,0,0,1,0,0,1,0,1\n" + "s0,0,0,1,0,0,1,0,1\n")
        )
    with pytest.raises(FiberParseError, match="changes group"):
        parse_fiber_csv(
            io.StringIO(good + "s0,0,0,1,0,0,1,0,1\n" + "s0,1,1,1,0,0,1,0,1\n")
        )
    with pytest.raises(FiberParseError, match="missing site"):
        parse_fiber_csv(
            io.StringIO(good + "s0,0,0,1,0,0,1,0,1\n" + "s1,1,1,1,0,0,1,0,1\n")
        )


def test_identical_groups_give_unit_pvalues():
    # duplicate the same tensors under both group labels; groups need more
    # than s = 6 subjects apiece for a nonsingular covariance
    base = generate_fiber_dataset(seed=5, n_sites=3, n_group1=9, n_group0=9)
    tensors = base.tensors.copy()
    tensors[9:] = tensors[:9]
    ds = FiberDataset(subjects=base.subjects, groups=base.groups, tensors=tensors)
    results, summary = fiber_site_tests(ds, metric="log_euclidean", alpha=0.05)
    for r in results:
        assert r.statistic == pytest.approx(0.0, abs=1e-18)
        assert r.p_value == 1.0
        assert r.df == 6
    assert summary["bh_rejections"] == 0


def test_df_is_six_everywhere():
    ds = generate_fiber_dataset(seed=6, n_sites=8, n_group1=5, n_group0=5)
    for metric in ("euclidean", "log_euclidean"):
        results, _ = fiber_site_tests(ds, metric=metric)
        assert all(r.df == 6 for r in results)


def test_site_csv_header_is_stable():
    ds = generate_fiber_dataset(seed=7, n_sites=2, n_group1=4, n_group0=4)
    results, _ = fiber_site_tests(ds)
    buf = io.StringIO()
    write_site_csv(results, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == SITE_HEADER
    assert len(lines) == 3


# ---------------------------------------------------------------------------
# CLI


def write(path, text):
    path.write_text(text)
    return str(path)


def test_cli_mean_euclidean_two_points(tmp_path, capsys):
    inp = write(tmp_path / "pts.csv", "x\n0\n2\n")
    assert main(["mean", inp, "--space", "euclidean"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["mean"] == [1.0]
    assert out["n"] == 2
    assert out["asym_cov_over_n"] == [[0.5]]


def test_cli_mean_single_point_zero_covariance(tmp_path, capsys):
    inp = write(tmp_path / "one.csv", "x,y\n0.25,0.75\n")
    assert main(["mean", inp, "--space", "euclidean"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["mean"] == [0.25, 0.75]
    assert out["asym_cov_over_n"] == [[0.0, 0.0], [0.0, 0.0]]


def test_cli_mean_malformed_row_names_line(tmp_path, capsys):
    inp = write(tmp_path / "bad.csv", "x,y\n1,2\noops,3\n")
    assert main(["mean", inp, "--space", "euclidean"]) == 2
    assert "line 3" in capsys.readouterr().err


def test_cli_mean_degenerate_geometry_exits_3(tmp_path, capsys):
    # antipodal pair: the ambient mean is the center, no unique projection
    inp = write(tmp_path / "anti.csv", "x,y,z\n0,0,1\n0,0,-1\n")
    assert main(["mean", inp, "--space", "sphere"]) == 3
    assert "failed" in capsys.readouterr().err


def test_cli_mean_sphere_and_spd(tmp_path, capsys):
    sph = write(tmp_path / "sph.csv", "x,y,z\n1,0,0\n0,1,0\n")
    assert main(["mean", sph, "--space", "sphere"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert np.allclose(out["mean"], np.array([1, 1, 0]) / np.sqrt(2))

    spd = write(
        tmp_path / "spd.csv",
        "a11,a12,a13,a22,a23,a33\n1,0,0,1,0,1\n4,0,0,4,0,4\n",
    )
    assert main(["mean", spd, "--space", "spd", "--metric", "log-euclidean"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert np.allclose(out["mean"], [2.0, 0.0, 0.0, 2.0, 0.0, 2.0])


def test_cli_mean_openbook(tmp_path, capsys):
    ob = write(tmp_path / "ob.csv", "leaf,x0,x1\n1,1,0\n1,3,2\n2,2,4\n")
    assert main(["mean", ob, "--space", "openbook"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["mean"]["leaf"] == 1
    assert np.allclose(out["mean"]["coords"], [2 / 3, 2.0])


def test_cli_test2(tmp_path, capsys):
    a = write(tmp_path / "a.csv", "x\n-0.7071067811865476\n0.7071067811865476\n")
    b = write(tmp_path / "b.csv", "x\n0.2928932188134524\n1.7071067811865476\n")
    assert main(["test2", a, b, "--space", "euclidean"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["statistic"] == pytest.approx(1.0, abs=1e-9)
    assert out["df"] == 1


def test_cli_gen_fiber_and_fiber_round_trip(tmp_path, capsys):
    data = tmp_path / "fiber.csv"
    rc = main(
        [
            "gen-fiber",
            "--sites", "6",
            "--group1-size", "6",
            "--group0-size", "5",
            "--effect-sites", "2-3",
            "--seed", "9",
            "--output", str(data),
        ]
    )
    assert rc == 0
    out = tmp_path / "sites.csv"
    assert main(["fiber", str(data), "--output", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["n_sites"] == 6
    assert summary["failed_sites"] == []
    lines = out.read_text().splitlines()
    assert lines[0] == SITE_HEADER
    assert len(lines) == 7


def test_cli_gen_fiber_reproducible_bytes(tmp_path):
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["gen-fiber", "--sites", "4", "--group1-size", "4", "--group0-size", "3",
            "--seed", "17"]
    assert main(args + ["--output", str(f1)]) == 0
    assert main(args + ["--output", str(f2)]) == 0
    assert f1.read_bytes() == f2.read_bytes()


def test_cli_fiber_partial_failure_exit_code(tmp_path, capsys):
    # site 0 identical across subjects -> singular pooled covariance
    ds = generate_fiber_dataset(seed=4, n_sites=3, n_group1=5, n_group0=4)
    tensors = ds.tensors.copy()
    tensors[:, 0] = np.eye(3)
    broken = FiberDataset(subjects=ds.subjects, groups=ds.groups, tensors=tensors)
    data = tmp_path / "broken.csv"
    with open(data, "w") as fh:
        write_fiber_csv(broken, fh)
    out = tmp_path / "sites.csv"
    assert main(["fiber", str(data), "--output", str(out)]) == 4
    summary = json.loads(capsys.readouterr().out)
    assert summary["failed_sites"] == [0]
    lines = out.read_text().splitlines()
    assert len(lines) == 4  # header + all three sites still emitted
    assert lines[1].startswith("0,nan")


def test_cli_fiber_parse_error_exit_code(tmp_path, capsys):
    bad = write(tmp_path / "bad.csv", "subject,group\n")
    out = tmp_path / "sites.csv"
    assert main(["fiber", bad, "--output", str(out)]) == 2


def test_cli_simulate_deterministic_json(tmp_path, capsys):
    desc = write(
        tmp_path / "exp.json",
        json.dumps(
            {
                "space": {"kind": "openbook", "leaves": 3, "spine_dim": 2},
                "distribution": {
                    "kind": "openbook",
                    "leaf_probs": [1 / 3, 1 / 3, 1 / 3],
                    "x0": ["constant", 1.0],
                    "spine_mean": [0.0, 0.0],
                    "spine_sd": 1.0,
                },
                "n": 100,
                "reps": 100,
            }
        ),
    )
    assert main(["simulate", desc, "--experiment", "stickiness", "--seed", "3"]) == 0
    first = capsys.readouterr().out
    assert main(["simulate", desc, "--experiment", "stickiness", "--seed", "3"]) == 0
    second = capsys.readouterr().out
    assert first == second
    report = json.loads(first)
    assert report["estimate"] >= 0.99
    assert report["target"] == "spine"


def test_cli_simulate_consistency_table(tmp_path, capsys):
    desc = write(
        tmp_path / "cons.json",
        json.dumps(
            {
                "space": {"kind": "euclidean", "dim": 2},
                "distribution": {"kind": "gaussian", "mean": [0.0, 0.0], "cov": 1.0},
                "n_grid": [20, 80],
                "reps": 30,
            }
        ),
    )
    assert main(["simulate", desc, "--experiment", "consistency", "--seed", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert [row[0] for row in report["table"]] == [20, 80]
    assert report["table"][1][1] < report["table"][0][1]


def test_cli_simulate_bad_descriptor(tmp_path, capsys):
    bad = write(tmp_path / "bad.json", '{"space": {"kind": "nowhere"}}')
    assert main(["simulate", bad, "--experiment", "coverage"]) == 2
