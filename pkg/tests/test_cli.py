"""End-to-end tests of the command-line interface."""

import csv

import numpy as np
import pytest

from densitycode import generate_figure, read_code_csv, write_pgm
from densitycode.cli import main


@pytest.fixture()
def figure_pgm(tmp_path):
    img = generate_figure(21, 64)
    path = tmp_path / "figure.pgm"
    scaled = np.rint(img.pixels / img.pixels.max() * 65535.0)
    write_pgm(scaled, path, maxval=65535)
    return path


def test_encode_writes_code_file(figure_pgm, tmp_path, capsys):
    out = tmp_path / "figure.code.csv"
    rc = main(
        [
            "encode",
            "--image",
            str(figure_pgm),
            "--polarity",
            "light-on-dark",
            "--points",
            "200",
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    printed = capsys.readouterr().out
    assert "m=200" in printed and "elapsed_ms=" in printed
    code = read_code_csv(out)
    assert code.m == 200
    assert len(out.read_text().splitlines()) == 201  # header + points


def test_encode_alpha_controls_length(figure_pgm, tmp_path, capsys):
    out = tmp_path / "a.code.csv"
    rc = main(
        [
            "encode",
            "--image",
            str(figure_pgm),
            "--polarity",
            "light-on-dark",
            "--points",
            "4096",
            "--alpha",
            "0.25",
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    code = read_code_csv(out)
    assert code.alpha == 0.25
    assert 1 <= code.m < 4096


def test_encode_missing_polarity_is_usage_error(figure_pgm, tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main(["encode", "--image", str(figure_pgm), "--out", str(tmp_path / "x")])
    assert excinfo.value.code != 0


def test_encode_missing_file_fails_cleanly(tmp_path, capsys):
    rc = main(
        [
            "encode",
            "--image",
            str(tmp_path / "nope.pgm"),
            "--polarity",
            "light-on-dark",
            "--out",
            str(tmp_path / "x.csv"),
        ]
    )
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_encode_reruns_byte_identical(figure_pgm, tmp_path):
    out1 = tmp_path / "one.csv"
    out2 = tmp_path / "two.csv"
    for out in (out1, out2):
        args = [
            "encode",
            "--image",
            str(figure_pgm),
            "--polarity",
            "light-on-dark",
            "--points",
            "128",
            "--out",
            str(out),
        ]
        assert main(args) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_encode_lambda_env_precedence(figure_pgm, tmp_path, monkeypatch):
    env_out = tmp_path / "env.csv"
    flag_out = tmp_path / "flag.csv"
    monkeypatch.setenv("DC_LAMBDA", "0.01")
    base = [
        "encode",
        "--image",
        str(figure_pgm),
        "--polarity",
        "light-on-dark",
        "--points",
        "64",
    ]
    assert main(base + ["--out", str(env_out)]) == 0
    assert read_code_csv(env_out).lam == 0.01
    # explicit flag wins over the environment
    assert main(base + ["--lambda", "0.0001", "--out", str(flag_out)]) == 0
    assert read_code_csv(flag_out).lam == 0.0001


def test_compare_self_is_zero(figure_pgm, tmp_path, capsys):
    out = tmp_path / "c.csv"
    main(
        [
            "encode",
            "--image",
            str(figure_pgm),
            "--polarity",
            "light-on-dark",
            "--points",
            "256",
            "--out",
            str(out),
        ]
    )
    capsys.readouterr()
    rc = main(["compare", str(out), str(out), "--degree", "3"])
    assert rc == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("delta=")
    assert float(line.split("=", 1)[1]) <= 1e-9


def test_compare_truncates_to_common_prefix(figure_pgm, tmp_path, capsys):
    short = tmp_path / "short.csv"
    long = tmp_path / "long.csv"
    for points, out in ((900, short), (1025, long)):
        main(
            [
                "encode",
                "--image",
                str(figure_pgm),
                "--polarity",
                "light-on-dark",
                "--points",
                str(points),
                "--out",
                str(out),
            ]
        )
    capsys.readouterr()
    rc = main(["compare", str(short), str(long), "--degree", "0"])
    assert rc == 0
    # prefixes of the same image's code agree exactly
    assert float(capsys.readouterr().out.strip().split("=", 1)[1]) == 0.0


def test_compare_writes_residuals(figure_pgm, tmp_path, capsys):
    out = tmp_path / "c.csv"
    main(
        [
            "encode",
            "--image",
            str(figure_pgm),
            "--polarity",
            "light-on-dark",
            "--points",
            "64",
            "--out",
            str(out),
        ]
    )
    residuals = tmp_path / "resid.csv"
    rc = main(
        ["compare", str(out), str(out), "--degree", "1", "--residuals", str(residuals)]
    )
    assert rc == 0
    lines = residuals.read_text().splitlines()
    assert lines[0] == "index,residual"
    assert len(lines) == 65


def test_gen_corpus_and_sweep(tmp_path, capsys):
    corpus_dir = tmp_path / "corpus"
    rc = main(
        [
            "gen-corpus",
            "--out",
            str(corpus_dir),
            "--pairs",
            "2",
            "--size",
            "64",
            "--seed",
            "7",
        ]
    )
    assert rc == 0
    assert (corpus_dir / "manifest.csv").is_file()
    sweep_out = tmp_path / "sweep.csv"
    rc = main(
        [
            "sweep",
            "--corpus",
            str(corpus_dir),
            "--degree",
            "3",
            "--alpha-min",
            "0.01",
            "--alpha-max",
            "0.41",
            "--alpha-step",
            "0.2",
            "--out",
            str(sweep_out),
        ]
    )
    assert rc == 0
    with open(sweep_out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert rows[0]["status"] == "invalid"  # alpha=0.01 gives m < q at 64x64
    assert rows[0]["related_min"] == ""
    for row in rows[1:]:
        assert row["status"] == "ok"
        assert float(row["related_max"]) >= float(row["related_min"])
        assert float(row["unrelated_max"]) >= float(row["unrelated_min"])


def test_sweep_missing_manifest(tmp_path, capsys):
    rc = main(
        [
            "sweep",
            "--corpus",
            str(tmp_path),
            "--out",
            str(tmp_path / "s.csv"),
        ]
    )
    assert rc == 1
    assert "corpus incomplete" in capsys.readouterr().err


def test_bench_run_and_fit(tmp_path, capsys):
    timing = tmp_path / "timing.csv"
    rc = main(
        [
            "bench",
            "--heights",
            "16,32",
            "--widths",
            "16,32",
            "--lengths",
            "16,64",
            "--reps",
            "5",
            "--out",
            str(timing),
        ]
    )
    assert rc == 0
    with open(timing, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    assert set(rows[0]) == {"H", "W", "m", "reps", "median_ms"}
    capsys.readouterr()
    # too few samples for a meaningful fit is reported, not crashed
    rc = main(["bench", "fit", "--in", str(timing)])
    assert rc == 1
    assert "10 samples" in capsys.readouterr().err


def test_bench_fit_on_synthetic_csv(tmp_path, capsys):
    import math

    lines = ["H,W,m,reps,median_ms"]
    for h in (16, 64, 256):
        for w in (16, 64, 256):
            for m in (16, 128, 1024):
                hw = h * w
                t = 1e-4 * (0.7 * hw + 3.8 * m * (math.log2(hw) - 2.0) + 0.4 * m * w)
                lines.append(f"{h},{w},{m},10,{t:.17g}")
    path = tmp_path / "synth.csv"
    path.write_text("\n".join(lines) + "\n")
    rc = main(["bench", "fit", "--in", str(path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("a=")
    parts = dict(kv.split("=") for kv in out.split())
    assert float(parts["a"]) == pytest.approx(0.7e-4, rel=1e-6)
    assert float(parts["b"]) == pytest.approx(3.8e-4, rel=1e-6)
    assert float(parts["c"]) == pytest.approx(0.4e-4, rel=1e-6)
    assert float(parts["r"]) == pytest.approx(1.0, abs=1e-9)


def test_bench_requires_out(capsys):
    rc = main(["bench"])
    assert rc == 1
    assert "requires --out" in capsys.readouterr().err
