"""Tests for file formats, document round trips, and the command line."""

import json
import struct

import numpy as np
import pytest

from quantdistill import cli, verification
from quantdistill.diffusion import BoundReport, SdeSpec
from quantdistill.errors import (
    BadMagic,
    EmptyFile,
    LatentFileError,
    NonFiniteValue,
    TruncatedFile,
)
from quantdistill.latentio import (
    MAGIC,
    ClassQuantization,
    ClassTransport,
    DistillationResult,
    TrainReport,
    TransportedResult,
    format_float,
    load_distillation,
    load_labels,
    load_latents,
    load_train_report,
    load_transported,
    render_json,
    save_distillation,
    save_labels,
    save_latents,
    save_train_report,
    save_transported,
)
from quantdistill.pipeline import demo_dataset, distill
from quantdistill.verification import CheckRecord, CheckSpec


def test_format_float_round_trips_and_special_values():
    assert format_float(1.0) == "1.0"
    assert format_float(-2.0) == "-2.0"
    assert format_float(float("inf")) == "Infinity"
    assert format_float(float("-inf")) == "-Infinity"
    assert format_float(float("nan")) == "NaN"
    rng = np.random.default_rng(50)
    for value in np.concatenate(
        [rng.normal(size=50), 10.0 ** rng.uniform(-300, 300, size=50)]
    ):
        assert float(format_float(value)) == value


def test_render_json_is_parseable_and_stable():
    doc = {
        "name": "demo",
        "flag": True,
        "missing": None,
        "values": [1.0, 2.5, float("inf")],
        "nested": {"k": 3, "rows": [[1.0, 2.0], [3.0, 4.0]]},
    }
    text = render_json(doc)
    assert text == render_json(doc)
    parsed = json.loads(text)
    assert parsed["name"] == "demo"
    assert parsed["values"][2] == float("inf")
    # Scalar lists stay on one line; nested lists break across lines.
    assert "[1.0, 2.5, Infinity]" in text


def test_latents_binary_round_trip(tmp_path):
    points = np.random.default_rng(51).normal(size=(17, 3))
    path = tmp_path / "cloud.bin"
    save_latents(path, points)
    np.testing.assert_array_equal(load_latents(path), points)


def test_latents_csv_round_trip(tmp_path):
    points = np.random.default_rng(52).normal(size=(9, 2))
    path = tmp_path / "cloud.csv"
    save_latents(path, points)
    np.testing.assert_array_equal(load_latents(path), points)
    header = path.read_text().splitlines()[0]
    assert header == "dim0,dim1"


def test_load_latents_error_cases(tmp_path):
    empty = tmp_path / "empty.bin"
    empty.write_bytes(b"")
    with pytest.raises(EmptyFile):
        load_latents(empty)

    wrong = tmp_path / "wrong.bin"
    wrong.write_bytes(b"JUNKJUNKJUNKJUNKJUNKJUNK")
    with pytest.raises(BadMagic):
        load_latents(wrong)

    short = tmp_path / "short.bin"
    short.write_bytes(
        MAGIC + struct.pack("<I", 1) + struct.pack("<Q", 4) + struct.pack("<Q", 2)
    )
    with pytest.raises(TruncatedFile):
        load_latents(short)

    bad_version = tmp_path / "version.bin"
    bad_version.write_bytes(
        MAGIC + struct.pack("<I", 9) + struct.pack("<Q", 1) + struct.pack("<Q", 1)
        + struct.pack("<d", 0.0)
    )
    with pytest.raises(BadMagic):
        load_latents(bad_version)

    nonfinite = tmp_path / "nan.bin"
    nonfinite.write_bytes(
        MAGIC + struct.pack("<I", 1) + struct.pack("<Q", 1) + struct.pack("<Q", 1)
        + struct.pack("<d", float("nan"))
    )
    with pytest.raises(NonFiniteValue):
        load_latents(nonfinite)


def test_load_latents_csv_error_cases(tmp_path):
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("a,b\n1.0,2.0\n")
    with pytest.raises(BadMagic):
        load_latents(bad_header)

    ragged = tmp_path / "r.csv"
    ragged.write_text("dim0,dim1\n1.0,2.0\n3.0\n")
    with pytest.raises(TruncatedFile):
        load_latents(ragged)

    not_number = tmp_path / "n.csv"
    not_number.write_text("dim0\n1.0\npotato\n")
    with pytest.raises(NonFiniteValue):
        load_latents(not_number)

    no_rows = tmp_path / "e.csv"
    no_rows.write_text("dim0,dim1\n")
    with pytest.raises(EmptyFile):
        load_latents(no_rows)


def test_labels_round_trip_and_validation(tmp_path):
    path = tmp_path / "labels.txt"
    save_labels(path, np.array([0, 2, 1, 0]))
    np.testing.assert_array_equal(load_labels(path), [0, 2, 1, 0])
    with pytest.raises(TruncatedFile):
        load_labels(path, n_expected=3)

    gap = tmp_path / "gap.txt"
    gap.write_text("0\n2\n0\n")
    with pytest.raises(LatentFileError):
        load_labels(gap)

    junk = tmp_path / "junk.txt"
    junk.write_text("0\nx\n")
    with pytest.raises(LatentFileError):
        load_labels(junk)


def sample_distillation():
    points, labels = demo_dataset(0, n_per_class=60, n_classes=2)
    return distill(points, labels, 4, 5, batch_size=16, n_iterations=10)


def test_distillation_document_round_trip(tmp_path):
    result = sample_distillation()
    path = tmp_path / "distilled.json"
    save_distillation(path, result)
    loaded = load_distillation(path)
    assert loaded.seed == result.seed
    assert loaded.schedule == result.schedule
    assert len(loaded.classes) == len(result.classes)
    for before, after in zip(result.classes, loaded.classes):
        np.testing.assert_array_equal(before.centroids, after.centroids)
        np.testing.assert_array_equal(before.counts, after.counts)
        np.testing.assert_array_equal(before.weights, after.weights)
        np.testing.assert_array_equal(
            before.variance_reduced, after.variance_reduced
        )
    # A rewrite of the loaded document is byte-identical.
    second = tmp_path / "again.json"
    save_distillation(second, loaded)
    assert second.read_bytes() == path.read_bytes()


def test_document_rejects_wrong_format_tag(tmp_path):
    result = sample_distillation()
    path = tmp_path / "distilled.json"
    save_distillation(path, result)
    with pytest.raises(BadMagic):
        load_transported(path)
    garbage = tmp_path / "garbage.json"
    garbage.write_text("not json at all {")
    with pytest.raises(LatentFileError):
        load_distillation(garbage)
    blank = tmp_path / "blank.json"
    blank.write_text("  \n")
    with pytest.raises(EmptyFile):
        load_distillation(blank)


def test_transported_document_round_trip(tmp_path):
    report = BoundReport(
        lhs=0.01,
        rhs=0.5,
        mc_stderr=0.002,
        ratio=0.02,
        passed=True,
        wasserstein=0.1,
        constant=5.0,
        lipschitz_bound=1.0,
    )
    result = TransportedResult(
        seed=3,
        sde=SdeSpec("brownian", 1.0, 0.25, 50),
        n_mc=200,
        test_function="distance_to_origin",
        classes=(
            ClassTransport(
                label=0,
                atoms=np.array([[0.1], [0.9]]),
                weights=np.array([0.6, 0.4]),
                report=report,
            ),
        ),
    )
    path = tmp_path / "transported.json"
    save_transported(path, result)
    loaded = load_transported(path)
    assert loaded.sde == result.sde
    assert loaded.classes[0].report == report
    np.testing.assert_array_equal(loaded.classes[0].atoms, result.classes[0].atoms)


def test_train_report_round_trip(tmp_path):
    report = TrainReport(
        seed=1,
        model="logistic",
        weight_mode="variance_reduced",
        learning_rate=1.0,
        epochs=20,
        final_loss=0.25,
        train_accuracy=1.0,
        eval_accuracy=None,
        theta=np.array([0.5, -0.5, 0.1]),
    )
    path = tmp_path / "report.json"
    save_train_report(path, report)
    loaded = load_train_report(path)
    assert loaded.eval_accuracy is None
    np.testing.assert_array_equal(loaded.theta, report.theta)
    with_eval = TrainReport(
        seed=1,
        model="logistic",
        weight_mode="uniform",
        learning_rate=0.5,
        epochs=20,
        final_loss=0.25,
        train_accuracy=1.0,
        eval_accuracy=0.875,
        theta=np.array([0.5]),
    )
    save_train_report(path, with_eval)
    assert load_train_report(path).eval_accuracy == 0.875


def write_demo_files(tmp_path, seed=0):
    points, labels = demo_dataset(seed, n_per_class=40, n_classes=2)
    latents = tmp_path / "latents.bin"
    labels_path = tmp_path / "labels.txt"
    save_latents(latents, points)
    save_labels(labels_path, labels)
    return latents, labels_path


def test_cli_distill_train_round_trip(tmp_path, capsys):
    latents, labels_path = write_demo_files(tmp_path)
    out = tmp_path / "distilled.json"
    status = cli.main(
        [
            "distill",
            "--latents", str(latents),
            "--labels", str(labels_path),
            "--ipc", "3",
            "--seed", "1",
            "--out", str(out),
        ]
    )
    assert status == 0
    assert "distilled" in capsys.readouterr().out
    result = load_distillation(out)
    assert result.per_class == 3
    assert all(cls.centroids.shape == (3, 2) for cls in result.classes)

    report_path = tmp_path / "report.json"
    status = cli.main(
        [
            "train",
            "--distilled", str(out),
            "--weights", "variance_reduced",
            "--model", "logistic",
            "--epochs", "100",
            "--seed", "1",
            "--out", str(report_path),
            "--eval-latents", str(latents),
            "--eval-labels", str(labels_path),
        ]
    )
    assert status == 0
    report = load_train_report(report_path)
    assert report.train_accuracy == 1.0
    assert report.eval_accuracy is not None


def test_cli_diffuse_writes_reports(tmp_path, capsys):
    latents, labels_path = write_demo_files(tmp_path)
    distilled = tmp_path / "distilled.json"
    cli.main(
        [
            "distill",
            "--latents", str(latents),
            "--labels", str(labels_path),
            "--ipc", "3",
            "--seed", "2",
            "--out", str(distilled),
        ]
    )
    out = tmp_path / "transported.json"
    status = cli.main(
        [
            "diffuse",
            "--distilled", str(distilled),
            "--latents", str(latents),
            "--labels", str(labels_path),
            "--sde", "ornstein_uhlenbeck",
            "--horizon", "1.0",
            "--delta", "0.25",
            "--steps", "40",
            "--mc", "200",
            "--seed", "2",
            "--out", str(out),
        ]
    )
    assert status == 0
    assert "ceiling" in capsys.readouterr().out
    loaded = load_transported(out)
    assert loaded.sde.kind == "ornstein_uhlenbeck"
    assert len(loaded.classes) == 2


def test_cli_w2_prints_distance(tmp_path, capsys):
    left = tmp_path / "left.bin"
    right = tmp_path / "right.bin"
    save_latents(left, np.array([[0.0, 0.0]]))
    save_latents(right, np.array([[3.0, 4.0]]))
    status = cli.main(["w2", "--left", str(left), "--right", str(right)])
    assert status == 0
    assert capsys.readouterr().out.strip() == "5.0"


def test_cli_rate_scan_writes_document(tmp_path, capsys):
    out = tmp_path / "scan.json"
    status = cli.main(
        [
            "rate-scan",
            "--dim", "1",
            "--levels", "2,4",
            "--samples", "300",
            "--restarts", "1",
            "--seed", "0",
            "--out", str(out),
        ]
    )
    assert status == 0
    assert "fitted slope" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert doc["levels"] == [2, 4]
    assert doc["fitted_slope"] < 0


def test_cli_missing_input_exits_with_usage_code(tmp_path, capsys):
    status = cli.main(
        [
            "w2",
            "--left", str(tmp_path / "nope.bin"),
            "--right", str(tmp_path / "nope.bin"),
        ]
    )
    assert status == 2
    assert "error:" in capsys.readouterr().err


def test_cli_corrupt_input_exits_with_usage_code(tmp_path, capsys):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"XXXXXXXXXXXXXXXXXXXXXXXXXXXX")
    status = cli.main(["w2", "--left", str(bad), "--right", str(bad)])
    assert status == 2
    assert "error:" in capsys.readouterr().err


def test_cli_bad_levels_exit_code(tmp_path, capsys):
    status = cli.main(["rate-scan", "--dim", "1", "--levels", "4,banana"])
    assert status == 2
    assert "error:" in capsys.readouterr().err


def test_cli_unknown_subcommand_raises_system_exit():
    with pytest.raises(SystemExit):
        cli.main(["transmogrify"])


def test_cli_seed_env_variable_is_default(tmp_path, monkeypatch):
    latents, labels_path = write_demo_files(tmp_path)

    def distill_args(out):
        return [
            "distill",
            "--latents", str(latents),
            "--labels", str(labels_path),
            "--ipc", "2",
            "--out", str(out),
        ]

    explicit = tmp_path / "explicit.json"
    via_env = tmp_path / "env.json"
    assert cli.main(distill_args(explicit) + ["--seed", "9"]) == 0
    monkeypatch.setenv("QUANTDISTILL_SEED", "9")
    assert cli.main(distill_args(via_env)) == 0
    assert explicit.read_bytes() == via_env.read_bytes()
    monkeypatch.setenv("QUANTDISTILL_SEED", "not-a-number")
    assert cli.main(distill_args(via_env)) == 2


def test_cli_verify_reports_failure_exit_code(tmp_path, monkeypatch, capsys):
    def failing_check(seed):
        return [
            CheckRecord(
                claim="always_fails",
                statement="synthetic failing check",
                measured=1.0,
                target=0.0,
                tolerance=0.0,
                passed=False,
                seed=seed,
            )
        ]

    monkeypatch.setattr(
        verification,
        "CHECKS",
        (CheckSpec("synthetic", "distortion", failing_check),),
    )
    out = tmp_path / "verify.json"
    status = cli.main(
        ["verify", "--suite", "distortion", "--seed", "0", "--out", str(out)]
    )
    assert status == 1
    captured = capsys.readouterr().out
    assert "FAIL always_fails" in captured
    assert "0/1 checks passed" in captured
    doc = json.loads(out.read_text())
    assert doc["n_passed"] == 0
    assert doc["checks"][0]["claim"] == "always_fails"


def test_cli_verify_small_suite_passes(capsys):
    status = cli.main(["verify", "--suite", "risk", "--seed", "0"])
    assert status == 0
    out = capsys.readouterr().out
    assert "3/3 checks passed" in out
    assert "FAIL" not in out
