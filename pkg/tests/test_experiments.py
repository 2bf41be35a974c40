import json
import math

import numpy as np
import pytest

from commontree import (
    ExperimentConfig,
    SizeGuardError,
    parse_newick,
    run_chain_vs_construction,
    run_martingale_experiment,
    run_scaling_construct,
    run_scaling_mast,
)
from commontree.cli import main
from commontree.experiments import SizeSummary, _fit_loglog


def cfg(**overrides):
    base = dict(mode="construct", sizes=(8, 16), replications=4, master_seed=3)
    base.update(overrides)
    return ExperimentConfig(**base)


# ----------------------------------------------------------------------
# config and fitting


def test_config_validation():
    with pytest.raises(ValueError):
        cfg(mode="nope")
    with pytest.raises(ValueError):
        cfg(sizes=())
    with pytest.raises(ValueError):
        cfg(sizes=(16, 8))
    with pytest.raises(ValueError):
        cfg(sizes=(8, 8))
    with pytest.raises(ValueError):
        cfg(replications=0)
    with pytest.raises(ValueError):
        cfg(cutoff=1)
    with pytest.raises(ValueError):
        cfg(output_format="xml")
    with pytest.raises(ValueError):
        cfg(workers=0)
    with pytest.raises(ValueError):
        cfg(master_seed=-1)


def test_header_omits_execution_knobs():
    """Workers must not leak into output: byte-identity across pools."""
    text = "\n".join(cfg(workers=7).header_lines())
    assert "workers" not in text
    assert "master_seed=3" in text


def test_fit_loglog_recovers_power_law():
    records = tuple(
        SizeSummary(n=n, mean_size=2.0 * n**0.4, std_error=0.0, replications=1)
        for n in (10, 100, 1000, 10000)
    )
    slope, intercept, se = _fit_loglog(records)
    assert slope == pytest.approx(0.4, abs=1e-12)
    assert intercept == pytest.approx(math.log(2.0), abs=1e-12)
    assert se == pytest.approx(0.0, abs=1e-9)


def test_fit_loglog_needs_three_points():
    records = tuple(
        SizeSummary(n=n, mean_size=float(n), std_error=0.0, replications=1)
        for n in (10, 100)
    )
    slope, intercept, se = _fit_loglog(records)
    assert math.isnan(slope) and math.isnan(intercept) and math.isnan(se)


# ----------------------------------------------------------------------
# runners


def test_scaling_construct_shape():
    result = run_scaling_construct(cfg(sizes=(8, 12, 16)))
    assert [rec.n for rec in result.records] == [8, 12, 16]
    assert len(result.rows) == 3 * 4
    assert all(rec.mean_size >= 0 for rec in result.records)
    assert not math.isnan(result.fitted_slope)
    # substream ids are recomputable from (master_seed, n, replicate)
    n, r, _, seed_sub = result.rows[0]
    expected = int(
        np.random.SeedSequence((3, n, r)).generate_state(1, np.uint64)[0]
    )
    assert seed_sub == expected


def test_scaling_mode_checked():
    with pytest.raises(ValueError):
        run_scaling_mast(cfg(mode="construct"))
    with pytest.raises(ValueError):
        run_scaling_construct(cfg(mode="mast"))


def test_scaling_mast_guard():
    with pytest.raises(SizeGuardError):
        run_scaling_mast(cfg(mode="mast", sizes=(128, 512)))
    result = run_scaling_mast(cfg(mode="mast", sizes=(6, 8), replications=3))
    assert all(rec.mean_size >= 3 for rec in result.records)


def test_chain_comparison_report():
    reports = run_chain_vs_construction(
        cfg(mode="chain", sizes=(40,), replications=30, cutoff=5)
    )
    (rep,) = reports
    assert rep.identity_ok
    assert rep.mean_output_size == pytest.approx(rep.p_hat * 40)
    assert rep.chain_runs == 3000
    assert 0 <= rep.q_hat <= 1
    assert len(rep.rows) == 30
    with pytest.raises(SizeGuardError):
        run_chain_vs_construction(cfg(mode="chain", sizes=(2001,)))
    with pytest.raises(ValueError):
        run_chain_vs_construction(cfg(mode="chain", sizes=(4,)))


def test_martingale_experiment():
    rows = run_martingale_experiment(
        cfg(mode="martingale", sizes=(2,), replications=5000)
    )
    assert [t for t, _, _ in rows] == [1, 2]
    with pytest.raises(ValueError):
        run_martingale_experiment(cfg(mode="martingale", sizes=(1, 2)))


# ----------------------------------------------------------------------
# reports on disk


def test_worker_count_never_changes_bytes(tmp_path):
    paths = []
    for workers in (1, 3):
        path = tmp_path / f"w{workers}.csv"
        run_scaling_construct(
            cfg(sizes=(8, 12), output_path=str(path), workers=workers)
        )
        paths.append(path.read_bytes())
    assert paths[0] == paths[1]


def test_json_mirrors_csv(tmp_path):
    base = dict(mode="construct", sizes=(8, 12), replications=3, master_seed=9)
    csv_path = tmp_path / "r.csv"
    json_path = tmp_path / "r.json"
    run_scaling_construct(
        ExperimentConfig(**base, output_path=str(csv_path), output_format="csv")
    )
    run_scaling_construct(
        ExperimentConfig(**base, output_path=str(json_path), output_format="json")
    )
    data_rows = [
        line.split(",")
        for line in csv_path.read_text().splitlines()
        if not line.startswith("#") and not line.startswith("n,")
    ]
    raw = [r for r in data_rows if r[1] != "-1"]
    payload = json.loads(json_path.read_text())
    assert len(raw) == len(payload["rows"])
    for row, mirrored in zip(raw, payload["rows"]):
        assert [int(x) for x in row] == [
            mirrored["n"],
            mirrored["replicate"],
            mirrored["size"],
            mirrored["seed_sub"],
        ]
    assert len(payload["summaries"]) == 2
    assert "slope" in payload["fit"]


def test_summary_rows_flagged(tmp_path):
    path = tmp_path / "s.csv"
    run_scaling_construct(cfg(sizes=(8, 12), output_path=str(path)))
    lines = path.read_text().splitlines()
    assert lines[0].startswith("#")
    summary = [l for l in lines if l.split(",")[1:2] == ["-1"]]
    assert len(summary) == 2
    assert lines[-1].startswith("# fit:")


# ----------------------------------------------------------------------
# CLI


def test_cli_gen_round_trips(capsys):
    assert main(["gen", "--n", "6", "--seed", "1"]) == 0
    out = capsys.readouterr().out.strip()
    assert parse_newick(out).n_leaves == 6


def test_cli_gen_deterministic(capsys):
    main(["gen", "--n", "9", "--seed", "4"])
    first = capsys.readouterr().out
    main(["gen", "--n", "9", "--seed", "4"])
    assert capsys.readouterr().out == first


def test_cli_mast_and_construct(tmp_path, capsys):
    pair = tmp_path / "pair.nwk"
    main(["gen", "--n", "10", "--seed", "2", "--count", "2", "--out", str(pair)])
    capsys.readouterr()

    assert main(["mast", "--trees", str(pair)]) == 0
    mast_payload = json.loads(capsys.readouterr().out)
    assert mast_payload["size"] == len(mast_payload["witness"]) >= 3

    trace = tmp_path / "trace.csv"
    code = main(
        ["construct", "--trees", str(pair), "--cutoff", "4", "--seed", "5",
         "--trace", str(trace)]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["size"] == len(payload["picked"])
    assert payload["size"] <= mast_payload["size"]
    lines = trace.read_text().splitlines()
    assert lines[1] == "item_id,parent_id,depth,m_before,b1,b2,b3,stopped,picked_label"
    assert len(lines) > 2


def test_cli_chain_and_martingale(capsys):
    assert main(["chain", "--n", "50", "--cutoff", "5", "--runs", "400", "--seed", "1"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert 0 <= payload["q_hat"] <= 1

    assert main(["martingale", "--tmax", "1", "--samples", "2000", "--seed", "2"]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert rows[0]["t"] == 1


def test_cli_beta(capsys):
    assert main(["beta", "--mode", "random"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("0.3660254")
    assert main(["beta", "--mode", "centroid"]) == 0
    assert capsys.readouterr().out.startswith("0.48")


def test_cli_exit_codes(tmp_path, capsys):
    # guard violation -> 3
    assert main(["experiment", "--mode", "mast", "--sizes", "300", "--reps", "1"]) == 3
    # usage error -> 2
    assert main(["experiment", "--mode", "construct", "--sizes", "9,8", "--reps", "1"]) == 2
    # I/O failure -> 4
    assert (
        main(
            ["experiment", "--mode", "construct", "--sizes", "8", "--reps", "1",
             "--out", str(tmp_path / "no" / "dir" / "x.csv")]
        )
        == 4
    )
    with pytest.raises(SystemExit):
        main([])
    capsys.readouterr()


def test_cli_experiment_stdout_and_figure(tmp_path, capsys):
    figure = tmp_path / "fig.png"
    code = main(
        ["experiment", "--mode", "construct", "--sizes", "8,12,16", "--reps", "3",
         "--seed", "11", "--figure", str(figure)]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "# commontree experiment"
    assert figure.stat().st_size > 0


def test_cli_experiment_deterministic(tmp_path):
    args = ["experiment", "--mode", "construct", "--sizes", "8,12", "--reps", "4",
            "--seed", "7", "--format", "json"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
