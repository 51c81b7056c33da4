"""Dataset-level analysis: A-R pairs, measure correlation, clustering.

Correlation between measure columns is Pearson's rho over
pairwise-complete rows. Before clustering, lower-is-better columns are
sign-flipped so that high similarity means "responds to the same aspect
the same way"; flipping a column only negates its correlations, so the
adjustment is applied to the correlation matrix directly. Cluster
discovery is affinity propagation (message passing with damping);
ordinal property labels come from an exact 1-D k-means solved by
dynamic programming over the sorted values, so the partition is the
global optimum, not a local one.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ClusterDomainError, ConfigError, InsufficientSamplesError
from .measures import MEASURES, reliability, supervised_overlap_series
from .trajectory import MeasureTable, SequenceAnnotation, SupervisedRunRecord

__all__ = [
    "ARPair",
    "ar_pair",
    "ar_summary",
    "CorrelationMatrix",
    "pearson_matrix",
    "measure_similarity",
    "ClusterAssignment",
    "affinity_propagation",
    "cluster_measures",
    "kmeans_partition",
    "kmeans_labels",
    "SequenceLabels",
    "label_sequences",
]


@dataclass(frozen=True)
class ARPair:
    """Accuracy-robustness summary of one supervised run."""

    accuracy: float
    robustness: float
    reliability: float


def ar_pair(rec: SupervisedRunRecord, a: SequenceAnnotation, span: float = 30.0) -> ARPair:
    """Accuracy (supervised average overlap), failure count, reliability.

    Follows the supervised averaging convention: Failure frames count
    as overlap 0, Init frames are excluded.
    """
    phis = [v for v in supervised_overlap_series(rec, a) if v is not None]
    accuracy = math.fsum(phis) / len(phis) if phis else float("nan")
    failures = len(rec.failure_frames)
    return ARPair(
        accuracy=accuracy,
        robustness=float(failures),
        reliability=reliability(failures, len(a), span),
    )


def ar_summary(table: MeasureTable, span: float = 30.0) -> list[tuple[str, float, float, float]]:
    """Per-tracker mean accuracy, mean failure count, mean reliability.

    Aggregates the supervised columns of clean rows; reliability is
    computed per row from its own sequence length, then averaged.
    """
    acc_idx = 14  # sup_avg_overlap
    fail_idx = 15  # failures
    by_tracker: dict[str, list] = {}
    for row in table.rows:
        if row.error is not None:
            continue
        by_tracker.setdefault(row.tracker, []).append(row)
    out = []
    for tracker in sorted(by_tracker):
        rows = by_tracker[tracker]
        accs = [r.values[acc_idx] for r in rows if not math.isnan(r.values[acc_idx])]
        fails = [r.values[fail_idx] for r in rows if not math.isnan(r.values[fail_idx])]
        rels = [
            reliability(r.values[fail_idx], r.frames, span)
            for r in rows
            if not math.isnan(r.values[fail_idx])
        ]
        if not fails:
            continue
        acc = math.fsum(accs) / len(accs) if accs else float("nan")
        out.append(
            (
                tracker,
                acc,
                math.fsum(fails) / len(fails),
                math.fsum(rels) / len(rels),
            )
        )
    return out


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pairwise Pearson correlation with per-cell sample counts.

    Undefined cells (zero-variance column or fewer than 3 paired
    samples) hold NaN; counts still report how many pairs were seen.
    """

    labels: tuple[str, ...]
    values: np.ndarray
    counts: np.ndarray

    def defined(self, i: int, j: int) -> bool:
        return not math.isnan(self.values[i, j])


def pearson_matrix(table: MeasureTable) -> CorrelationMatrix:
    """Correlation of the 16 measure columns over clean rows.

    Rows flagged with an error are excluded; at least 3 clean rows are
    required. Each cell uses the rows where both measures are defined.
    """
    rows = [r for r in table.rows if r.error is None]
    if len(rows) < 3:
        raise InsufficientSamplesError(
            f"correlation needs at least 3 clean rows, got {len(rows)}"
        )
    data = np.array([r.values for r in rows], dtype=np.float64)
    k = data.shape[1]
    values = np.full((k, k), np.nan)
    counts = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        for j in range(i, k):
            mask = ~(np.isnan(data[:, i]) | np.isnan(data[:, j]))
            n = int(mask.sum())
            counts[i, j] = counts[j, i] = n
            if n < 3:
                continue
            x = data[mask, i]
            y = data[mask, j]
            if np.var(x) == 0.0 or np.var(y) == 0.0:
                continue  # undefined, not 0
            r = float(np.corrcoef(x, y)[0, 1])
            values[i, j] = values[j, i] = min(1.0, max(-1.0, r))
    return CorrelationMatrix(
        labels=tuple(m.key for m in MEASURES), values=values, counts=counts
    )


def measure_similarity(corr: CorrelationMatrix) -> np.ndarray:
    """Polarity-aligned similarity for clustering the 16 measures.

    Lower-is-better measures are sign-flipped; flipping column i negates
    row/column i of the correlation matrix, which is applied directly.
    """
    signs = np.array([1.0 if m.higher_is_better else -1.0 for m in MEASURES])
    return corr.values * np.outer(signs, signs)


@dataclass(frozen=True)
class ClusterAssignment:
    """Affinity propagation outcome.

    exemplar_of maps each item to its exemplar's index (exemplars map
    to themselves). converged is False when the exemplar set did not
    stay stable; the assignment is then the current partial estimate.
    """

    exemplar_of: tuple[int, ...]
    exemplars: tuple[int, ...]
    converged: bool
    iterations: int

    def groups(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {e: [] for e in self.exemplars}
        for i, e in enumerate(self.exemplar_of):
            out[e].append(i)
        return {e: tuple(members) for e, members in out.items()}


def affinity_propagation(
    similarity: np.ndarray,
    damping: float = 0.5,
    preference: float | np.ndarray | None = None,
    max_iter: int = 500,
    stable_iter: int = 25,
) -> ClusterAssignment:
    """Exemplar clustering by responsibility/availability message passing.

    similarity[i, k] scores how well k would represent i; the diagonal
    is overwritten with the preference (default: the median of the
    off-diagonal similarities, which favors a moderate cluster count).
    Messages are damped by `damping` in [0.5, 1). The run converges
    when the exemplar set stays identical for stable_iter consecutive
    iterations; hitting max_iter first reports converged=False with the
    current estimate.
    """
    S = np.array(similarity, dtype=np.float64, copy=True)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ConfigError(f"similarity must be square, got {S.shape}")
    n = S.shape[0]
    if n == 0:
        raise ConfigError("empty similarity matrix")
    if not (0.5 <= damping < 1.0):
        raise ConfigError(f"damping {damping} outside [0.5, 1)")
    off_diag = ~np.eye(n, dtype=bool)
    if np.isnan(S[off_diag]).any():
        raise ClusterDomainError("similarity contains undefined entries")
    if n == 1:
        return ClusterAssignment((0,), (0,), True, 0)

    if preference is None:
        preference = float(np.median(S[off_diag]))
    np.fill_diagonal(S, preference)

    # Exact ties (e.g. two identical similarity rows) make the messages
    # oscillate forever; fixed-seed jitter far below data scale breaks
    # them without costing determinism.
    spread = float(S.max() - S.min()) or 1.0
    jitter = np.random.default_rng(0x5EED).standard_normal((n, n))
    S += 1e-9 * spread * jitter

    R = np.zeros((n, n))
    A = np.zeros((n, n))
    idx = np.arange(n)
    exemplars: tuple[int, ...] = ()
    stable = 0
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        # Responsibilities: how strongly i favors k over the runner-up.
        AS = A + S
        best = np.argmax(AS, axis=1)
        first = AS[idx, best]
        AS[idx, best] = -np.inf
        second = AS.max(axis=1)
        Rnew = S - first[:, None]
        Rnew[idx, best] = S[idx, best] - second
        R = damping * R + (1.0 - damping) * Rnew

        # Availabilities: accumulated support for k being an exemplar.
        Rp = np.maximum(R, 0.0)
        np.fill_diagonal(Rp, np.diag(R))
        colsum = Rp.sum(axis=0)
        Anew = np.minimum(0.0, colsum[None, :] - Rp)
        np.fill_diagonal(Anew, colsum - np.diag(R))
        A = damping * A + (1.0 - damping) * Anew

        current = tuple(int(k) for k in np.flatnonzero(np.diag(A) + np.diag(R) > 0))
        if current == exemplars and current:
            stable += 1
            if stable >= stable_iter:
                converged = True
                break
        else:
            stable = 0
        exemplars = current

    if not exemplars:
        # Degenerate landscape (e.g. identical items): best single exemplar.
        exemplars = (int(np.argmax(np.diag(A) + np.diag(R))),)
        converged = False

    # The fixed point fixes the cluster count; within each cluster the
    # exemplar identity can still be off. Re-pick each cluster's member
    # with the highest total similarity to the cluster, then reassign.
    ex = np.array(sorted(exemplars))
    assign = ex[np.argmax(S[:, ex], axis=1)]
    assign[ex] = ex
    refined = []
    for e in ex:
        members = np.flatnonzero(assign == e)
        scores = S[np.ix_(members, members)].sum(axis=0)
        refined.append(int(members[int(np.argmax(scores))]))
    ex = np.array(sorted(refined))
    exemplars = tuple(int(e) for e in ex)
    assign = ex[np.argmax(S[:, ex], axis=1)]
    assign[ex] = ex
    return ClusterAssignment(
        exemplar_of=tuple(int(v) for v in assign),
        exemplars=exemplars,
        converged=converged,
        iterations=iterations,
    )


def cluster_measures(
    table: MeasureTable,
    damping: float = 0.5,
    max_iter: int = 500,
    stable_iter: int = 25,
) -> tuple[CorrelationMatrix, ClusterAssignment]:
    """Correlate the measure columns and cluster them by similarity."""
    corr = pearson_matrix(table)
    sim = measure_similarity(corr)
    n = sim.shape[0]
    undefined = [
        corr.labels[i]
        for i in range(n)
        if any(math.isnan(sim[i, j]) for j in range(n) if j != i)
    ]
    if undefined:
        raise ClusterDomainError(
            f"cannot cluster, undefined correlations for: {', '.join(undefined)}"
        )
    assignment = affinity_propagation(
        sim, damping=damping, max_iter=max_iter, stable_iter=stable_iter
    )
    return corr, assignment


def kmeans_partition(values, k: int) -> tuple[list[int], list[float], float]:
    """Globally optimal 1-D k-means by dynamic programming.

    Returns (assignment, centroids, wcss): assignment[i] is the cluster
    of values[i] with clusters numbered by ascending centroid. Optimal
    clusters of sorted values are contiguous runs, so the DP over run
    boundaries finds the exact minimum of the within-cluster sum of
    squares. Requires at least k distinct values.
    """
    values = [float(v) for v in values]
    n = len(values)
    if k < 1:
        raise ClusterDomainError(f"cluster count {k} must be at least 1")
    if any(not math.isfinite(v) for v in values):
        raise ClusterDomainError("values must be finite")
    if len(set(values)) < k:
        raise ClusterDomainError(
            f"need at least {k} distinct values, got {len(set(values))}"
        )

    order = sorted(range(n), key=lambda i: values[i])
    xs = [values[i] for i in order]
    shift = math.fsum(xs) / n
    centered = [v - shift for v in xs]
    prefix = [0.0]
    prefix_sq = [0.0]
    for v in centered:
        prefix.append(prefix[-1] + v)
        prefix_sq.append(prefix_sq[-1] + v * v)

    def cost(i: int, j: int) -> float:
        # WCSS of sorted items i..j inclusive.
        m = j - i + 1
        s = prefix[j + 1] - prefix[i]
        sq = prefix_sq[j + 1] - prefix_sq[i]
        return max(0.0, sq - s * s / m)

    inf = float("inf")
    best = [[inf] * (n + 1) for _ in range(k + 1)]
    cut = [[0] * (n + 1) for _ in range(k + 1)]
    best[0][0] = 0.0
    for c in range(1, k + 1):
        for j in range(c, n + 1):
            for m in range(c, j + 1):
                candidate = best[c - 1][m - 1] + cost(m - 1, j - 1)
                if candidate < best[c][j]:
                    best[c][j] = candidate
                    cut[c][j] = m - 1
    assignment = [0] * n
    hi = n
    for c in range(k, 0, -1):
        lo = cut[c][hi]
        for pos in range(lo, hi):
            assignment[order[pos]] = c - 1
        hi = lo
    centroids = []
    for c in range(k):
        members = [values[i] for i in range(n) if assignment[i] == c]
        centroids.append(math.fsum(members) / len(members))
    return assignment, centroids, best[k][n]


_ORDINAL_NAMES = {
    1: ("all",),
    2: ("low", "high"),
    3: ("low", "medium", "high"),
}


def kmeans_labels(values, k: int) -> list[str]:
    """Ordinal labels from the optimal 1-D partition, ascending."""
    assignment, _, _ = kmeans_partition(values, k)
    names = _ORDINAL_NAMES.get(k, tuple(f"level_{i + 1}" for i in range(k)))
    return [names[c] for c in assignment]


@dataclass(frozen=True)
class SequenceLabels:
    """Ordinal property labels per sequence plus the raw scalars."""

    rows: tuple[tuple[str, str, str, str, str], ...]
    scalars: tuple[tuple[float, float, float, float], ...]


_SIZE_NAMES = ("small", "medium", "large")


def label_sequences(seqs, span: float = 30.0, k: int = 3) -> SequenceLabels:
    """Label each sequence's size, motion, speed and size change.

    Scalars come from sequence_properties; each column is partitioned
    by exact 1-D k-means into k ordinal levels. Polarity is aligned so
    labels read as the property: motion and size change are probed by
    scores that FALL as the property grows (tts reliability, tto
    overlap), so those columns are negated before partitioning.
    Identical scalars across sequences (fewer distinct values than k)
    raise ClusterDomainError.
    """
    from .theoretical import sequence_properties

    seqs = list(seqs)
    if len(seqs) < 3:
        raise InsufficientSamplesError(
            f"labeling needs at least 3 sequences, got {len(seqs)}"
        )
    scalars = [sequence_properties(seq, span=span) for seq in seqs]
    size_vals = [s[0] for s in scalars]
    motion_vals = [-s[1] for s in scalars]       # high reliability = low motion
    speed_vals = [s[2] for s in scalars]
    change_vals = [-s[3] for s in scalars]       # high tto overlap = low size change

    ordinal = _ORDINAL_NAMES.get(k, tuple(f"level_{i + 1}" for i in range(k)))
    size_names = _SIZE_NAMES if k == 3 else ordinal

    def column(vals, names):
        assignment, _, _ = kmeans_partition(vals, k)
        return [names[c] for c in assignment]

    size_l = column(size_vals, size_names)
    motion_l = column(motion_vals, ordinal)
    speed_l = column(speed_vals, ordinal)
    change_l = column(change_vals, ordinal)
    rows = tuple(
        (seq.annotation.name, size_l[i], motion_l[i], speed_l[i], change_l[i])
        for i, seq in enumerate(seqs)
    )
    return SequenceLabels(rows=rows, scalars=tuple(scalars))
