"""End-to-end demo on synthetic data.

Generates a dataset, evaluates the scripted corpus plus the four
theoretical trackers, and writes every analysis artifact (measure
table, correlation matrix, measure clusters, accuracy-robustness
summary, sequence labels) and one SVG of each plot type.

Usage: python scripts/run_synthetic_experiment.py [--out DIR]
"""

import argparse
import os
import sys

from trackbench.analysis import ar_summary, cluster_measures, label_sequences
from trackbench.io_formats import (
    write_ar_summary,
    write_cluster_assignment,
    write_correlation_matrix,
    write_label_table,
    write_measure_table,
    write_record,
)
from trackbench.measures import measure_keys
from trackbench.plots import (
    ar_plot,
    center_error_plot,
    fragmentation_timeline,
    overlap_plot,
    survival_curve,
    threshold_plot,
)
from trackbench.measures import (
    center_error_series,
    overlap_series,
    supervised_overlap_series,
)
from trackbench.runner import RunPlan, execute_plan, run_supervised, run_unsupervised
from trackbench.synthdata import (
    corpus_handles,
    make_dataset,
    theoretical_handles,
    write_dataset,
)
from trackbench.theoretical import theoretical_ar_points


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_out")
    parser.add_argument("--sequences", type=int, default=12)
    parser.add_argument("--repetitions", type=int, default=3)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    os.makedirs(args.out, exist_ok=True)
    data_dir = os.path.join(args.out, "data")
    seqs = write_dataset(data_dir, make_dataset(n_sequences=args.sequences))
    print(f"dataset: {len(seqs)} sequences under {data_dir}")

    handles = corpus_handles() + theoretical_handles()
    plan = RunPlan(repetitions=args.repetitions, mode="both")
    table = execute_plan(
        plan, handles, seqs, master_seed=args.seed, workers=2, out_dir=args.out
    )
    write_measure_table(os.path.join(args.out, "measures.tsv"), table)
    bad = [r for r in table.rows if r.error is not None]
    print(f"measures: {len(table.rows)} rows ({len(bad)} with run errors)")

    corr, clusters = cluster_measures(table)
    write_correlation_matrix(
        os.path.join(args.out, "correlation.tsv"),
        corr.labels, corr.values, corr.counts,
    )
    write_cluster_assignment(
        os.path.join(args.out, "clusters.tsv"),
        corr.labels, clusters.exemplar_of, clusters.converged, clusters.iterations,
    )
    keys = measure_keys()
    for exemplar, members in clusters.groups().items():
        print(f"  cluster[{keys[exemplar]}]: {', '.join(keys[m] for m in members)}")

    span = 30.0
    summary = ar_summary(table, span=span)
    write_ar_summary(os.path.join(args.out, "ar_summary.tsv"), summary, span=span)
    for tracker, acc, rob, rel in summary:
        print(f"  {tracker:10s} accuracy={acc:.3f} failures={rob:5.2f} reliability={rel:.3f}")

    labels = label_sequences(seqs, span=span)
    write_label_table(os.path.join(args.out, "labels.tsv"), labels.rows)

    # One sequence in detail for the per-frame plots.
    probe = seqs[3]
    series_overlap = {}
    series_error = {}
    failure_sets = {}
    for handle in corpus_handles():
        traj = run_unsupervised(handle, probe, seed=1)
        rec = run_supervised(handle, probe, seed=1)
        series_overlap[handle.name] = overlap_series(probe.annotation, traj)
        series_error[handle.name] = center_error_series(probe.annotation, traj)
        failure_sets[handle.name] = rec.failure_frames
        write_record(
            os.path.join(args.out, f"probe_{handle.name}.record"), rec
        )

    def save(name: str, svg: str) -> None:
        path = os.path.join(args.out, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)
        print(f"  wrote {path}")

    save("overlap.svg", overlap_plot(series_overlap, title=f"Overlap: {probe.annotation.name}"))
    save("center_error.svg", center_error_plot(series_error, title=f"Center error: {probe.annotation.name}"))
    save("threshold.svg", threshold_plot(
        {k: [x for x in v if x is not None] for k, v in series_overlap.items()}
    ))
    save("fragmentation.svg", fragmentation_timeline(failure_sets, len(probe)))
    points = {t: (acc, rel) for t, acc, _, rel in summary}
    save("ar.svg", ar_plot(points, theoretical_ar_points(seqs, span=span)))
    sup_idx = keys.index("sup_avg_overlap")
    per: dict = {}
    for r in table.rows:
        if r.error is None:
            per.setdefault(r.tracker, {}).setdefault(r.sequence, []).append(
                r.values[sup_idx]
            )
    save("survival.svg", survival_curve(
        {t: [sum(v) / len(v) for _, v in sorted(d.items())] for t, d in sorted(per.items())}
    ))
    return 0


if __name__ == "__main__":
    sys.exit(main())
