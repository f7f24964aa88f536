"""CLI smoke tests via in-process main(); exit-code contract: 0 ok,
2 bad configuration, 3 pipeline failure. Byte-level determinism of the
output files is exercised in the acceptance suite."""

import json

import numpy as np
import pytest

from enfnet.cli import main
from enfnet.stream_io import load_enf_csv, load_stream


def run(*argv):
    return main(list(argv))


def test_generate_audio_and_estimate(tmp_path):
    gen = tmp_path / "gen"
    assert run(
        "generate", "--duration", "30", "--sample-rate", "8000", "--snr", "25",
        "--seed", "3", "--out", str(gen),
    ) == 0
    assert (gen / "stream.json").exists()
    assert (gen / "stream.f32").exists()
    truth = load_enf_csv(str(gen / "truth.csv"))
    assert len(truth) == 30
    stream = load_stream(str(gen / "stream.json"))
    assert stream.duration_s == pytest.approx(30.0)

    est = tmp_path / "est"
    assert run("estimate", "--stream", str(gen / "stream.json"), "--out", str(est)) == 0
    series = load_enf_csv(str(est / "enf.csv"))
    assert np.all(np.abs(series.values_hz - 60.0) < 0.5)
    assert (est / "enf.json").exists()


def test_generate_video_kind(tmp_path):
    out = tmp_path / "v"
    assert run(
        "generate", "--kind", "video", "--duration", "20", "--fps", "25",
        "--height", "64", "--snr", "25", "--seed", "1", "--out", str(out),
    ) == 0
    stream = load_stream(str(out / "stream.json"))
    assert stream.frames.shape == (500, 64)


def test_generate_with_forgery_labels(tmp_path):
    out = tmp_path / "f"
    assert run(
        "generate", "--duration", "30", "--sample-rate", "8000", "--seed", "2",
        "--forge", "8:14:StripEnf", "--out", str(out),
    ) == 0
    stream = load_stream(str(out / "stream.json"))
    assert stream.forged_intervals == [(8.0, 14.0)]


def test_detect_flow_and_exit_codes(tmp_path):
    gen = tmp_path / "gen"
    run("generate", "--duration", "40", "--sample-rate", "8000", "--seed", "9",
        "--out", str(gen))
    est = tmp_path / "est"
    run("estimate", "--stream", str(gen / "stream.json"), "--out", str(est))
    det = tmp_path / "det"
    assert run(
        "detect", "--local", str(est / "enf.csv"), "--truth", str(est / "enf.csv"),
        "--window", "12", "--shift", "4", "--out", str(det),
    ) == 0
    rep = json.loads((det / "report.json").read_text())
    assert rep["overall_verdict"] == "Genuine"
    assert (det / "windows.csv").read_text().startswith("start_s,end_s,corr,verdict")

    # truth.csv is on a different clock than the estimate -> config error
    assert run(
        "detect", "--local", str(est / "enf.csv"), "--truth", str(gen / "truth.csv"),
        "--out", str(tmp_path / "d2"),
    ) == 2


def test_consensus_sim_outputs(tmp_path):
    out = tmp_path / "c"
    assert run(
        "consensus-sim", "--committee", "6", "--byzantine", "1", "--dim", "24",
        "--rounds", "4", "--behavior", "offset:1.0", "--seed", "5", "--out", str(out),
    ) == 0
    lines = (out / "rounds.jsonl").read_text().splitlines()
    assert len(lines) == 4
    first = json.loads(lines[0])
    assert set(first) == {"round", "ground_truth_id", "honest_agreement", "scores"}
    summary = json.loads((out / "summary.json").read_text())
    assert summary["agreement_rate"] == 1.0


def test_configuration_errors_exit_2(tmp_path):
    # committee below the quorum bound
    assert run("consensus-sim", "--committee", "4", "--byzantine", "1",
               "--out", str(tmp_path / "x")) == 2
    # malformed forge spec
    assert run("generate", "--duration", "10", "--forge", "1:2",
               "--out", str(tmp_path / "y")) == 2
    # estimator overlap outside [0, 1)
    gen = tmp_path / "gen"
    run("generate", "--duration", "20", "--sample-rate", "8000", "--seed", "1",
        "--out", str(gen))
    assert run("estimate", "--stream", str(gen / "stream.json"), "--overlap", "1.5",
               "--out", str(tmp_path / "z")) == 2


def test_missing_input_exits_3(tmp_path):
    assert run("estimate", "--stream", str(tmp_path / "nope.json"),
               "--out", str(tmp_path / "o")) == 3


def test_scenario_command(tmp_path):
    cfgp = tmp_path / "scen.json"
    cfgp.write_text(json.dumps({
        "participants": 5,
        "deepfaked_participants": [4],
        "grid": {"drift_std_hz": 0.005, "max_dev_hz": 0.5},
        "estimator": {"stft_window_s": 8.0, "stft_overlap_frac": 0.875},
        "committee": {"K": 5, "f": 1, "d": 60, "round_duration_s": 60.0},
        "rounds": 2,
        "snr_db": 30.0,
        "forgery_len_s": 30.0,
    }))
    out = tmp_path / "s"
    assert run("scenario", "--config", str(cfgp), "--seed", "4", "--out", str(out)) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["tp"] == 1 and summary["fp"] == 0
    assert (out / "reports.json").exists()
    assert len((out / "rounds.jsonl").read_text().splitlines()) == 2

    cfgp.write_text(json.dumps({"participants": 5, "no_such_knob": 1}))
    assert run("scenario", "--config", str(cfgp), "--out", str(tmp_path / "s2")) == 2


def test_bench_prints_json_to_stdout_only(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run("bench", "--k-list", "8,16", "--dim", "32", "--trials", "3") == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["k_list"] == [8, 16]
    assert "slope" in payload and len(payload["latencies_s"]) == 2
    assert list(tmp_path.iterdir()) == []  # no files, timings are not reproducible


def test_roc_command(tmp_path):
    out = tmp_path / "r"
    assert run(
        "roc", "--windows", "8,16", "--streams", "4", "--duration", "90",
        "--snr", "15", "--seed", "2", "--out", str(out),
    ) == 0
    rows = json.loads((out / "roc.json").read_text())
    assert [r["window_s"] for r in rows] == [8.0, 16.0]
    csv = (out / "auc.csv").read_text().splitlines()
    assert csv[0] == "window_s,auc"
    assert len(csv) == 3
    # degenerate sweep: window longer than the streams
    assert run("roc", "--windows", "120", "--streams", "4", "--duration", "90",
               "--out", str(tmp_path / "r2")) == 2
