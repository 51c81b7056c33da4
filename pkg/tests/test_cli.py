import io
import os
import xml.etree.ElementTree as ET

import pytest

from trackbench import cli
from trackbench.errors import ConfigError
from trackbench.io_formats import (
    dumps_measure_table,
    loads_measure_table,
    read_measure_table,
    write_measure_table,
)
from trackbench.theoretical import ScriptedTrackerSpec, StaticTracker
from trackbench.tracker_cli import serve

SCRIPTED = "scripted:name=jig,center_noise=2.5,scale_noise=0.05,seed=5"


class TestScriptedParams:
    def test_all_keys(self):
        spec = cli.parse_scripted_params(
            "name=wob,center_noise=2.5,scale_noise=0.1,"
            "drift_onset=12,drift_velocity=0.5:0.25,loss_prob=0.02,seed=9"
        )
        assert spec == ScriptedTrackerSpec(
            name="wob", center_noise=2.5, scale_noise=0.1, drift_onset=12,
            drift_velocity=(0.5, 0.25), loss_prob=0.02, seed=9,
        )

    def test_empty_gives_defaults(self):
        assert cli.parse_scripted_params("") == ScriptedTrackerSpec()

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            cli.parse_scripted_params("wobble=3")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError):
            cli.parse_scripted_params("center_noise=abc")
        with pytest.raises(ConfigError):
            cli.parse_scripted_params("drift_velocity=1")
        with pytest.raises(ConfigError):
            cli.parse_scripted_params("just-a-word")


class TestTrackerSpecs:
    def test_theoretical(self):
        h = cli.parse_tracker_spec("tts")
        assert h.name == "tts" and h.factory is not None

    def test_scripted(self):
        h = cli.parse_tracker_spec("scripted:name=x,center_noise=2")
        assert h.name == "x"

    def test_scripted_params_file(self, tmp_path):
        p = tmp_path / "params.txt"
        p.write_text("# comment\nname=filed\ncenter_noise=1.5\n")
        h = cli.parse_tracker_spec(f"scripted:@{p}")
        assert h.name == "filed"

    def test_command(self):
        h = cli.parse_tracker_spec("cmd:mine:python3 tracker.py --gt {groundtruth}")
        assert h.name == "mine"
        assert h.command[0] == "python3"

    def test_tcp(self):
        h = cli.parse_tracker_spec("tcp:live:127.0.0.1:9000")
        assert h.name == "live" and h.address == ("127.0.0.1", 9000)

    def test_malformed_specs_rejected(self):
        for bad in ("cmd:onlyname", "cmd::ls", "tcp:x:host", "tcp:x:host:notaport", "nope"):
            with pytest.raises(ConfigError):
                cli.parse_tracker_spec(bad)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """synth + run once; downstream commands reuse the artifacts."""
    root = tmp_path_factory.mktemp("cli")
    data = str(root / "data")
    out = str(root / "out")
    assert cli.main(["synth", "--out", data, "--sequences", "8", "--seed", "3"]) == 0
    rc = cli.main([
        "run", "--dataset", data, "--out", out,
        "--tracker", "tta", "--tracker", "tts", "--tracker", "ttf",
        "--tracker", "tto", "--tracker", SCRIPTED,
        "--repetitions", "2", "--seed", "11",
    ])
    assert rc == 0
    return {"root": root, "data": data, "out": out}


def first_raw(pipeline, tracker, suffix):
    base = os.path.join(pipeline["out"], "raw", tracker)
    seq = sorted(os.listdir(base))[0]
    d = os.path.join(base, seq)
    name = sorted(f for f in os.listdir(d) if f.endswith(suffix))[0]
    return os.path.join(pipeline["data"], seq), os.path.join(d, name)


class TestRunPipeline:
    def test_artifacts_exist(self, pipeline):
        out = pipeline["out"]
        assert os.path.exists(os.path.join(out, "measures.tsv"))
        manifest = open(os.path.join(out, "manifest.txt")).read()
        assert manifest.splitlines()[0].startswith("# format:")
        for key in ("generated=", "dataset=", "trackers=", "repetitions=2", "master_seed=11"):
            assert key in manifest

    def test_table_shape(self, pipeline):
        table = read_measure_table(os.path.join(pipeline["out"], "measures.tsv"))
        trackers = {r.tracker for r in table.rows}
        assert trackers == {"tta", "tts", "ttf", "tto", "jig"}
        # theoretical trackers collapse to one run; the scripted one repeats
        assert max(r.run for r in table.rows if r.tracker == "tts") == 0
        assert max(r.run for r in table.rows if r.tracker == "jig") == 1
        assert all(r.error is None for r in table.rows)

    def test_rerun_with_same_seed_is_byte_identical(self, pipeline, tmp_path):
        out2 = str(tmp_path / "out2")
        rc = cli.main([
            "run", "--dataset", pipeline["data"], "--out", out2,
            "--tracker", "tts", "--tracker", SCRIPTED,
            "--repetitions", "2", "--seed", "11",
        ])
        assert rc == 0
        a = open(os.path.join(out2, "measures.tsv"), "rb").read()
        out3 = str(tmp_path / "out3")
        rc = cli.main([
            "run", "--dataset", pipeline["data"], "--out", out3,
            "--tracker", "tts", "--tracker", SCRIPTED,
            "--repetitions", "2", "--seed", "11",
        ])
        assert rc == 0
        b = open(os.path.join(out3, "measures.tsv"), "rb").read()
        assert a == b

    def test_config_file_with_flag_precedence(self, pipeline, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfgout = tmp_path / "cfgout"
        flagout = tmp_path / "flagout"
        cfg.write_text(
            f"dataset={pipeline['data']}\n"
            f"out={cfgout}\n"
            "tracker=tts\n"
            "repetitions=1\n"
            "mode=supervised\n"
        )
        assert cli.main(["run", "--config", str(cfg)]) == 0
        assert os.path.exists(cfgout / "measures.tsv")
        assert cli.main(["run", "--config", str(cfg), "--out", str(flagout)]) == 0
        assert os.path.exists(flagout / "measures.tsv")

    def test_bad_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("dataset=x\nturbo=yes\n")
        assert cli.main(["run", "--config", str(cfg)]) == 2

    def test_missing_dataset_is_usage_error(self):
        assert cli.main(["run", "--tracker", "tts"]) == 2

    def test_missing_trackers_is_usage_error(self, pipeline):
        assert cli.main(["run", "--dataset", pipeline["data"]]) == 2

    def test_bad_tracker_spec_is_usage_error(self, pipeline):
        rc = cli.main(["run", "--dataset", pipeline["data"], "--tracker", "warp"])
        assert rc == 2


class TestMeasureCommand:
    def test_stdout_table(self, pipeline, capsys):
        seq, traj = first_raw(pipeline, "tto", ".traj")
        _, rec = first_raw(pipeline, "tto", ".record")
        rc = cli.main([
            "measure", "--sequence", seq, "--trajectory", traj,
            "--record", rec, "--name", "probe",
        ])
        assert rc == 0
        table = loads_measure_table(capsys.readouterr().out)
        assert table.rows[0].tracker == "probe"
        assert len(table.rows[0].values) == 16

    def test_out_file(self, pipeline, tmp_path):
        seq, traj = first_raw(pipeline, "tts", ".traj")
        dest = str(tmp_path / "one.tsv")
        rc = cli.main(["measure", "--sequence", seq, "--trajectory", traj, "--out", dest])
        assert rc == 0
        assert len(read_measure_table(dest).rows) == 1

    def test_needs_some_input(self, pipeline):
        seq, _ = first_raw(pipeline, "tts", ".traj")
        assert cli.main(["measure", "--sequence", seq]) == 2


class TestAnalyzeCommand:
    def test_reports_written(self, pipeline, tmp_path):
        rep = str(tmp_path / "rep")
        rc = cli.main([
            "analyze", "--measures", os.path.join(pipeline["out"], "measures.tsv"),
            "--out", rep,
        ])
        assert rc == 0
        for name in ("correlation.tsv", "ar_summary.tsv", "clusters.tsv"):
            text = open(os.path.join(rep, name)).read()
            assert text.startswith("# format: trackbench/1\n")
        corr = open(os.path.join(rep, "correlation.tsv")).read().splitlines()
        assert corr[-1].startswith("samples\t")
        ar = open(os.path.join(rep, "ar_summary.tsv")).read()
        assert "tracker\taccuracy\trobustness\treliability" in ar

    def test_missing_file_is_usage_error(self, tmp_path):
        rc = cli.main(["analyze", "--measures", str(tmp_path / "nope.tsv")])
        assert rc == 2

    def test_too_few_rows_is_data_error(self, pipeline, tmp_path):
        table = read_measure_table(os.path.join(pipeline["out"], "measures.tsv"))
        small = type(table)(rows=table.rows[:2])
        p = tmp_path / "small.tsv"
        write_measure_table(str(p), small)
        assert cli.main(["analyze", "--measures", str(p), "--out", str(tmp_path)]) == 1


class TestLabelCommand:
    def test_labels_written(self, pipeline, tmp_path):
        rep = str(tmp_path)
        rc = cli.main(["label", "--dataset", pipeline["data"], "--out", rep])
        assert rc == 0
        text = open(os.path.join(rep, "labels.tsv")).read()
        lines = text.splitlines()
        header = next(l for l in lines if not l.startswith("#"))
        assert header == "sequence\tsize\tmotion\tspeed\tsize_change"
        data_lines = [l for l in lines if not l.startswith("#")][1:]
        assert len(data_lines) == 8
        vocab = {"low", "medium", "high", "small", "large"}
        for line in data_lines:
            cells = line.split("\t")
            assert set(cells[1:]) <= vocab

    def test_too_few_sequences_is_data_error(self, pipeline, tmp_path):
        import shutil

        small = tmp_path / "small_data"
        names = sorted(os.listdir(pipeline["data"]))[:2]
        for n in names:
            shutil.copytree(os.path.join(pipeline["data"], n), small / n)
        assert cli.main(["label", "--dataset", str(small), "--out", str(tmp_path)]) == 1


class TestPlotCommand:
    def plot(self, args, dest):
        rc = cli.main(["plot", *args, "--out", dest])
        assert rc == 0
        root = ET.parse(dest).getroot()
        assert root.tag.split("}")[-1] == "svg"

    def test_frame_series_plots(self, pipeline, tmp_path):
        seq, traj = first_raw(pipeline, "tto", ".traj")
        _, rec = first_raw(pipeline, "tto", ".record")
        for kind in ("center_error", "overlap", "threshold"):
            self.plot(
                ["--type", kind, "--sequence", seq,
                 "--trajectory", f"probe={traj}", "--record", f"sup={rec}"],
                str(tmp_path / f"{kind}.svg"),
            )

    def test_ar_plot_with_references(self, pipeline, tmp_path):
        self.plot(
            ["--type", "ar",
             "--measures", os.path.join(pipeline["out"], "measures.tsv"),
             "--dataset", pipeline["data"]],
            str(tmp_path / "ar.svg"),
        )

    def test_fragmentation_plot(self, pipeline, tmp_path):
        seq, rec = first_raw(pipeline, "ttf", ".record")
        self.plot(
            ["--type", "fragmentation", "--sequence", seq, "--record", f"ttf={rec}"],
            str(tmp_path / "frag.svg"),
        )

    def test_survival_plot(self, pipeline, tmp_path):
        self.plot(
            ["--type", "survival",
             "--measures", os.path.join(pipeline["out"], "measures.tsv")],
            str(tmp_path / "survival.svg"),
        )

    def test_missing_inputs_are_usage_errors(self, pipeline):
        assert cli.main(["plot", "--type", "overlap"]) == 2
        assert cli.main(["plot", "--type", "ar"]) == 2
        assert cli.main(["plot", "--type", "fragmentation"]) == 2
        assert cli.main(["plot", "--type", "survival"]) == 2
        seq, _ = first_raw(pipeline, "tts", ".traj")
        assert cli.main(["plot", "--type", "overlap", "--sequence", seq]) == 2


class TestTrackerServe:
    def run_session(self, lines):
        rfile = io.StringIO("".join(line + "\n" for line in lines))
        wfile = io.StringIO()
        behavior = StaticTracker()
        code = serve(behavior, rfile, wfile)
        return code, wfile.getvalue().splitlines()

    def test_full_session(self):
        code, replies = self.run_session([
            "hello version=1 seed=42",
            "initialize img-001.jpg 10,20,30,40",
            "frame img-002.jpg",
            "quit",
        ])
        assert code == 0
        assert replies == [
            "hello name=tts deterministic=1",
            "state 10,20,30,40",
            "state 10,20,30,40",
        ]

    def test_unsupported_version(self):
        code, replies = self.run_session(["hello version=9 seed=0"])
        assert code == 2
        assert replies == ["error unsupported protocol version"]

    def test_unknown_command(self):
        code, replies = self.run_session(["hello version=1 seed=0", "teleport"])
        assert code == 2
        assert replies[-1] == "error unknown command teleport"

    def test_bad_region_is_an_error_reply(self):
        code, replies = self.run_session([
            "hello version=1 seed=0",
            "initialize img.jpg 1,2,3",
        ])
        assert code == 2
        assert replies[-1].startswith("error")
