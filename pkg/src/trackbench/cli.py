"""Command line interface.

Subcommands: synth (generate a dataset), run (evaluate trackers),
measure (score stored outputs), analyze (dataset-level tables),
label (sequence properties), plot (SVG diagnostics).

Exit codes: 0 success, 1 evaluation/data error, 2 bad invocation or
configuration (argparse uses 2 as well).
"""

import argparse
import math
import os
import sys
from datetime import datetime, timezone

from .analysis import ar_summary, cluster_measures, label_sequences, pearson_matrix
from .errors import ClusterDomainError, ConfigError, TrackbenchError
from .io_formats import (
    FORMAT_LINE,
    SequenceData,
    format_number,
    list_sequences,
    read_measure_table,
    read_record,
    read_sequence,
    read_trajectory,
    write_ar_summary,
    write_cluster_assignment,
    write_correlation_matrix,
    write_label_table,
    write_measure_table,
)
from .measures import (
    center_error_series,
    compute_all,
    measure_keys,
    overlap_series,
    supervised_center_error_series,
    supervised_overlap_series,
)
from .runner import RunPlan, TrackerHandle, execute_plan
from .theoretical import (
    ScriptedTracker,
    ScriptedTrackerSpec,
    make_theoretical,
    theoretical_ar_points,
)
from .trajectory import MeasureRow, MeasureTable

THEORETICAL_NAMES = ("tta", "tts", "ttf", "tto")

__all__ = ["main", "parse_tracker_spec", "parse_scripted_params"]


def _fail(msg: str) -> "ConfigError":
    return ConfigError(msg)


def parse_scripted_params(text: str) -> ScriptedTrackerSpec:
    """Build a scripted tracker spec from "key=value,key=value" text.

    drift_velocity uses a colon pair (dx:dy) since commas separate
    fields. Unknown keys are rejected.
    """
    fields: dict = {}
    if text.strip():
        for chunk in text.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if "=" not in chunk:
                raise _fail(f"scripted parameter {chunk!r} is not key=value")
            key, value = chunk.split("=", 1)
            key = key.strip()
            value = value.strip()
            try:
                if key == "name":
                    fields[key] = value
                elif key in ("center_noise", "scale_noise", "loss_prob"):
                    fields[key] = float(value)
                elif key == "drift_onset":
                    fields[key] = None if value.lower() == "none" else int(value)
                elif key == "drift_velocity":
                    dx, dy = value.split(":")
                    fields[key] = (float(dx), float(dy))
                elif key == "seed":
                    fields[key] = int(value)
                else:
                    raise _fail(f"unknown scripted parameter {key!r}")
            except ValueError as e:
                raise _fail(f"bad scripted parameter {chunk!r}: {e}") from None
    return ScriptedTrackerSpec(**fields)


def _read_params_file(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [
                line.strip()
                for line in fh
                if line.strip() and not line.lstrip().startswith("#")
            ]
    except OSError as e:
        raise _fail(f"cannot read scripted params {path!r}: {e}") from e
    return ",".join(lines)


def parse_tracker_spec(spec: str, timeout: float = 30.0) -> TrackerHandle:
    """Turn a tracker spec string into a handle.

    Forms:
      tta | tts | ttf | tto                  theoretical trackers
      scripted:key=value,...                 scripted perturbation of ground truth
      scripted:@params.txt                   same, parameters from a file
      cmd:<name>:<command line>              child process over stdio
      tcp:<name>:<host>:<port>               live process over TCP
    """
    spec = spec.strip()
    if spec in THEORETICAL_NAMES:
        return TrackerHandle.in_process(
            spec, lambda seq, k=spec: make_theoretical(k, seq), timeout=timeout
        )
    if spec.startswith("scripted:"):
        body = spec[len("scripted:"):]
        if body.startswith("@"):
            body = _read_params_file(body[1:])
        params = parse_scripted_params(body)
        return TrackerHandle.in_process(
            params.name,
            lambda seq, p=params: ScriptedTracker(p, seq.annotation),
            timeout=timeout,
        )
    if spec.startswith("cmd:"):
        rest = spec[len("cmd:"):]
        if ":" not in rest:
            raise _fail(f"cmd tracker needs cmd:<name>:<command>, got {spec!r}")
        name, command = rest.split(":", 1)
        if not name or not command.strip():
            raise _fail(f"cmd tracker needs a name and a command, got {spec!r}")
        return TrackerHandle.from_command(name, command, timeout=timeout)
    if spec.startswith("tcp:"):
        parts = spec.split(":")
        if len(parts) != 4:
            raise _fail(f"tcp tracker needs tcp:<name>:<host>:<port>, got {spec!r}")
        _, name, host, port = parts
        try:
            return TrackerHandle.from_tcp(name, host, int(port), timeout=timeout)
        except ValueError:
            raise _fail(f"bad tcp port in {spec!r}") from None
    raise _fail(f"unrecognized tracker spec {spec!r}")


_CONFIG_SCALARS = {
    "dataset": str,
    "out": str,
    "mode": str,
    "repetitions": int,
    "tau": float,
    "seed": int,
    "workers": int,
    "timeout": float,
}


def _read_config(path: str) -> dict:
    """Flat key=value config; `tracker=` may repeat. Flags win over this."""
    out: dict = {"tracker": []}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().split("\n")
    except OSError as e:
        raise _fail(f"cannot read config {path!r}: {e}") from e
    for i, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise _fail(f"{path}:{i}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key == "tracker":
            out["tracker"].append(value)
        elif key in _CONFIG_SCALARS:
            try:
                out[key] = _CONFIG_SCALARS[key](value)
            except ValueError:
                raise _fail(f"{path}:{i}: bad value for {key}: {value!r}") from None
        else:
            raise _fail(f"{path}:{i}: unknown config key {key!r}")
    return out


def _load_dataset(root: str) -> list[SequenceData]:
    if not os.path.isdir(root):
        raise _fail(f"dataset directory not found: {root!r}")
    dirs = list_sequences(root)
    if not dirs:
        raise _fail(f"no sequences under {root!r} (need <seq>/groundtruth.txt)")
    return [read_sequence(d) for d in dirs]


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _cmd_synth(args) -> int:
    from .synthdata import make_dataset, write_dataset

    seqs = make_dataset(n_sequences=args.sequences, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    written = write_dataset(args.out, seqs)
    for seq in written:
        print(f"{seq.annotation.name}\t{len(seq)} frames")
    print(f"wrote {len(written)} sequences under {args.out}")
    return 0


def _cmd_run(args) -> int:
    cfg = _read_config(args.config) if args.config else {"tracker": []}

    def pick(flag, key, default):
        if flag is not None:
            return flag
        return cfg.get(key, default)

    dataset = pick(args.dataset, "dataset", None)
    if not dataset:
        raise _fail("run needs --dataset (or dataset= in the config)")
    out_dir = pick(args.out, "out", "out")
    mode = pick(args.mode, "mode", "both")
    repetitions = pick(args.repetitions, "repetitions", 30)
    tau = pick(args.tau, "tau", 0.0)
    seed = pick(args.seed, "seed", 0)
    workers = pick(args.workers, "workers", 1)
    timeout = pick(args.timeout, "timeout", 30.0)

    specs = args.tracker if args.tracker else cfg["tracker"]
    if not specs:
        raise _fail("run needs at least one --tracker (or tracker= in the config)")
    handles = [parse_tracker_spec(s, timeout=timeout) for s in specs]
    seqs = _load_dataset(dataset)

    plan = RunPlan(repetitions=repetitions, mode=mode, tau=tau)
    os.makedirs(out_dir, exist_ok=True)
    table = execute_plan(
        plan, handles, seqs, master_seed=seed, workers=workers, out_dir=out_dir
    )

    write_measure_table(os.path.join(out_dir, "measures.tsv"), table)
    manifest = [
        FORMAT_LINE,
        f"generated={datetime.now(timezone.utc).isoformat()}",
        f"dataset={os.path.abspath(dataset)}",
        f"sequences={len(seqs)}",
        f"trackers={','.join(h.name for h in handles)}",
        f"mode={mode}",
        f"repetitions={repetitions}",
        f"tau={format_number(float(tau))}",
        f"master_seed={seed}",
    ]
    _write_text(
        os.path.join(out_dir, "manifest.txt"),
        "".join(line + "\n" for line in manifest),
    )

    bad = sum(1 for r in table.rows if r.error is not None)
    print(f"wrote {os.path.join(out_dir, 'measures.tsv')} ({len(table.rows)} rows)")
    if bad:
        print(f"warning: {bad} rows carry a run error", file=sys.stderr)
    return 0


def _cmd_measure(args) -> int:
    annotation = read_sequence(args.sequence).annotation
    trajectory = read_trajectory(args.trajectory) if args.trajectory else None
    record = read_record(args.record) if args.record else None
    if trajectory is None and record is None:
        raise _fail("measure needs --trajectory and/or --record")
    values = compute_all(annotation, trajectory=trajectory, record=record)
    row = MeasureRow(
        tracker=args.name,
        sequence=annotation.name,
        run=0,
        frames=len(annotation),
        values=values,
    )
    table = MeasureTable(rows=(row,))
    if args.out:
        write_measure_table(args.out, table)
        print(f"wrote {args.out}")
    else:
        from .io_formats import dumps_measure_table

        sys.stdout.write(dumps_measure_table(table))
    return 0


def _cmd_analyze(args) -> int:
    table = read_measure_table(args.measures)
    os.makedirs(args.out, exist_ok=True)
    clean = sum(1 for r in table.rows if r.error is None)

    corr = pearson_matrix(table)
    write_correlation_matrix(
        os.path.join(args.out, "correlation.tsv"),
        corr.labels,
        corr.values,
        corr.counts,
        notes=(f"clean rows: {clean}", "cells: pairwise complete Pearson rho"),
    )
    print(f"wrote {os.path.join(args.out, 'correlation.tsv')}")

    rows = ar_summary(table, span=args.span)
    write_ar_summary(
        os.path.join(args.out, "ar_summary.tsv"),
        rows,
        span=args.span,
        notes=("accuracy: mean supervised overlap; robustness: mean failures",),
    )
    print(f"wrote {os.path.join(args.out, 'ar_summary.tsv')}")

    try:
        corr, assignment = cluster_measures(table, damping=args.damping)
    except ClusterDomainError as e:
        print(f"error: clustering skipped: {e}", file=sys.stderr)
        return 1
    groups = assignment.groups()
    notes = [
        f"clusters: {len(groups)}",
        "similarity: correlation with lower-is-better columns sign-flipped",
    ]
    write_cluster_assignment(
        os.path.join(args.out, "clusters.tsv"),
        corr.labels,
        assignment.exemplar_of,
        assignment.converged,
        assignment.iterations,
        notes=notes,
    )
    print(f"wrote {os.path.join(args.out, 'clusters.tsv')}")
    return 0


def _cmd_label(args) -> int:
    seqs = _load_dataset(args.dataset)
    labels = label_sequences(seqs, span=args.span, k=args.levels)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "labels.tsv")
    write_label_table(
        path,
        labels.rows,
        notes=(
            f"levels: {args.levels}",
            "motion and size_change probes fall as the property grows; "
            "their scales are flipped so labels read as the property",
        ),
    )
    print(f"wrote {path}")
    return 0


def _named_inputs(pairs, kind: str) -> list[tuple[str, str]]:
    out = []
    for item in pairs or ():
        if "=" in item:
            name, path = item.split("=", 1)
        else:
            name = os.path.splitext(os.path.basename(item))[0]
            path = item
        if not name or not path:
            raise _fail(f"bad --{kind} {item!r}, want NAME=PATH")
        out.append((name, path))
    return out


def _cmd_plot(args) -> int:
    from . import plots

    out_path = args.out or f"{args.type}.svg"
    trajs = _named_inputs(args.trajectory, "trajectory")
    recs = _named_inputs(args.record, "record")

    if args.type in ("center_error", "overlap", "threshold"):
        if not args.sequence:
            raise _fail(f"plot {args.type} needs --sequence")
        if not trajs and not recs:
            raise _fail(f"plot {args.type} needs --trajectory and/or --record inputs")
        annotation = read_sequence(args.sequence).annotation
        series: dict = {}
        for name, path in trajs:
            t = read_trajectory(path)
            if args.type == "center_error":
                series[name] = center_error_series(annotation, t)
            else:
                series[name] = overlap_series(annotation, t)
        for name, path in recs:
            r = read_record(path)
            if args.type == "center_error":
                series[name] = supervised_center_error_series(r, annotation)
            else:
                series[name] = supervised_overlap_series(r, annotation)
        if args.type == "center_error":
            svg = plots.center_error_plot(series, cap=args.cap)
        elif args.type == "overlap":
            svg = plots.overlap_plot(series)
        else:
            flat = {
                name: [v for v in vals if v is not None]
                for name, vals in series.items()
            }
            svg = plots.threshold_plot(flat)
    elif args.type == "ar":
        if not args.measures:
            raise _fail("plot ar needs --measures")
        table = read_measure_table(args.measures)
        points = {
            tracker: (acc, rel)
            for tracker, acc, _, rel in ar_summary(table, span=args.span)
        }
        refs = None
        if args.dataset:
            refs = theoretical_ar_points(_load_dataset(args.dataset), span=args.span)
        svg = plots.ar_plot(points, refs)
    elif args.type == "fragmentation":
        if not args.sequence or not recs:
            raise _fail("plot fragmentation needs --sequence and --record inputs")
        annotation = read_sequence(args.sequence).annotation
        failure_sets = {
            name: read_record(path).failure_frames for name, path in recs
        }
        svg = plots.fragmentation_timeline(failure_sets, len(annotation))
    elif args.type == "survival":
        if not args.measures:
            raise _fail("plot survival needs --measures")
        table = read_measure_table(args.measures)
        keys = measure_keys()
        sup_idx = keys.index("sup_avg_overlap")
        uns_idx = keys.index("avg_overlap")
        use_sup = any(
            r.error is None and not math.isnan(r.values[sup_idx]) for r in table.rows
        )
        idx = sup_idx if use_sup else uns_idx
        per: dict = {}
        for r in table.rows:
            if r.error is not None or math.isnan(r.values[idx]):
                continue
            per.setdefault(r.tracker, {}).setdefault(r.sequence, []).append(
                r.values[idx]
            )
        scores = {
            tracker: [sum(v) / len(v) for _, v in sorted(by_seq.items())]
            for tracker, by_seq in sorted(per.items())
        }
        svg = plots.survival_curve(scores)
    else:  # unreachable, argparse restricts choices
        raise _fail(f"unknown plot type {args.type!r}")

    _write_text(out_path, svg)
    print(f"wrote {out_path}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="trackbench",
        description="Evaluate single-target trackers: run, score, analyze, plot.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a synthetic dataset")
    sp.add_argument("--out", required=True, help="dataset root to create")
    sp.add_argument("--sequences", type=int, default=12)
    sp.add_argument("--seed", type=int, default=2024)
    sp.set_defaults(func=_cmd_synth)

    rp = sub.add_parser("run", help="evaluate trackers over a dataset")
    rp.add_argument("--dataset", help="dataset root (one directory per sequence)")
    rp.add_argument(
        "--tracker",
        action="append",
        help="tracker spec; repeatable (tta|tts|ttf|tto, scripted:..., "
        "cmd:<name>:<command>, tcp:<name>:<host>:<port>)",
    )
    rp.add_argument("--out", help="output directory (default: out)")
    rp.add_argument("--mode", choices=("supervised", "unsupervised", "both"))
    rp.add_argument("--repetitions", type=int, help="runs per pair (default: 30)")
    rp.add_argument("--tau", type=float, help="failure threshold (default: 0)")
    rp.add_argument("--seed", type=int, help="master seed (default: 0)")
    rp.add_argument("--workers", type=int, help="parallel trackers (default: 1)")
    rp.add_argument("--timeout", type=float, help="per-reply timeout in seconds")
    rp.add_argument("--config", help="key=value config file; flags win")
    rp.set_defaults(func=_cmd_run)

    mp = sub.add_parser("measure", help="score stored tracker output")
    mp.add_argument("--sequence", required=True, help="sequence directory")
    mp.add_argument("--trajectory", help="trajectory file (unsupervised half)")
    mp.add_argument("--record", help="supervised run record file")
    mp.add_argument("--name", default="tracker", help="tracker name for the row")
    mp.add_argument("--out", help="write the table here instead of stdout")
    mp.set_defaults(func=_cmd_measure)

    ap = sub.add_parser("analyze", help="dataset-level tables from a measure table")
    ap.add_argument("--measures", required=True, help="measures.tsv from run")
    ap.add_argument("--out", default=".", help="directory for the reports")
    ap.add_argument("--span", type=float, default=30.0)
    ap.add_argument("--damping", type=float, default=0.5)
    ap.set_defaults(func=_cmd_analyze)

    lp = sub.add_parser("label", help="ordinal sequence property labels")
    lp.add_argument("--dataset", required=True)
    lp.add_argument("--out", default=".")
    lp.add_argument("--span", type=float, default=30.0)
    lp.add_argument("--levels", type=int, default=3)
    lp.set_defaults(func=_cmd_label)

    pp = sub.add_parser("plot", help="render an SVG diagnostic")
    pp.add_argument(
        "--type",
        required=True,
        choices=(
            "center_error",
            "overlap",
            "threshold",
            "ar",
            "fragmentation",
            "survival",
        ),
    )
    pp.add_argument("--out", help="output SVG path (default: <type>.svg)")
    pp.add_argument("--sequence", help="sequence directory (frame-series plots)")
    pp.add_argument(
        "--trajectory", action="append", help="NAME=PATH trajectory input; repeatable"
    )
    pp.add_argument(
        "--record", action="append", help="NAME=PATH run record input; repeatable"
    )
    pp.add_argument("--measures", help="measures.tsv (ar and survival plots)")
    pp.add_argument("--dataset", help="dataset root for reference points (ar plot)")
    pp.add_argument("--span", type=float, default=30.0)
    pp.add_argument("--cap", type=float, help="center error clip value")
    pp.set_defaults(func=_cmd_plot)

    return p


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except TrackbenchError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
