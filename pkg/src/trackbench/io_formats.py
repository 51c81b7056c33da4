"""File formats: dataset layout, run artifacts, measure tables.

All files are UTF-8 text with LF newlines and `.` as the decimal
separator. Regions serialize as `x,y,w,h` with no internal whitespace,
the exact syntax also used on the tracker wire protocol. Numbers are
written in shortest round-trip form (integral values without a
fractional part), so write -> read reproduces every float bit-exactly.

Dataset layout: one directory per sequence holding `groundtruth.txt`
(one region per line), optional `center.txt` (one `x,y` per line),
optional `frames/` with the image files, and `sequence.meta` with
`key=value` lines (name, width, height).

Run records and measure tables start with the version line
`# format: trackbench/1`; parsers reject other versions and trailing
garbage. Analysis outputs (correlation matrices, cluster assignments,
A-R summaries, label tables) are write-only artifacts with `#`-prefixed
metadata comments.
"""

import math
import os
from dataclasses import dataclass

from .errors import FormatVersionError, LengthMismatchError, ParseError
from .geometry import Point, Region
from .trajectory import (
    Failure,
    Init,
    MeasureRow,
    MeasureTable,
    SequenceAnnotation,
    SupervisedRunRecord,
    Tracked,
    Trajectory,
    validate_record,
)
from .measures import measure_keys

__all__ = [
    "FORMAT_LINE",
    "format_number",
    "parse_number",
    "format_region",
    "parse_region",
    "SequenceData",
    "read_annotation",
    "read_sequence",
    "write_sequence",
    "list_sequences",
    "read_trajectory",
    "write_trajectory",
    "dumps_record",
    "loads_record",
    "read_record",
    "write_record",
    "dumps_measure_table",
    "loads_measure_table",
    "read_measure_table",
    "write_measure_table",
    "write_correlation_matrix",
    "write_cluster_assignment",
    "write_ar_summary",
    "write_label_table",
]

FORMAT_LINE = "# format: trackbench/1"

_FRAME_EXTENSIONS = (".jpg", ".jpeg", ".png", ".bmp", ".ppm", ".pgm", ".tif", ".tiff")


def format_number(v: float) -> str:
    """Shortest decimal text that parses back to exactly v."""
    v = float(v)
    if math.isnan(v):
        raise ParseError("cannot serialize NaN as a number")
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def parse_number(text: str, path=None, line=None) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", path, line) from None


def format_region(r: Region) -> str:
    return ",".join(
        format_number(v) for v in (r.x, r.y, r.width, r.height)
    )


def parse_region(text: str, path=None, line=None) -> Region:
    parts = text.split(",")
    if len(parts) != 4:
        raise ParseError(f"region needs 4 comma-separated values: {text!r}", path, line)
    x, y, w, h = (parse_number(p, path, line) for p in parts)
    if not all(math.isfinite(v) for v in (x, y, w, h)):
        raise ParseError(f"non-finite region coordinate: {text!r}", path, line)
    if w < 0 or h < 0:
        raise ParseError(f"negative region extent: {text!r}", path, line)
    return Region(x, y, w, h)


def _read_lines(path) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8", newline=None) as fh:
            raw = fh.read()
    except OSError as e:
        raise ParseError(str(e), str(path)) from e
    lines = raw.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


@dataclass(frozen=True)
class SequenceData:
    """A loaded sequence: annotation plus what the runner needs.

    image_size is (width, height) from sequence.meta, or None when the
    meta file is absent. frame_paths always has one entry per frame;
    when no frames/ directory exists the paths are synthesized names
    that trackers receive verbatim but nobody opens.
    """

    annotation: SequenceAnnotation
    image_size: tuple[float, float] | None
    frame_paths: tuple[str, ...]
    root: str | None = None

    def __len__(self) -> int:
        return len(self.annotation)

    @classmethod
    def synthetic(cls, annotation, image_size=None, root=None) -> "SequenceData":
        base = root if root is not None else annotation.name
        paths = tuple(
            os.path.join(base, "frames", "%08d.jpg" % (i + 1))
            for i in range(len(annotation))
        )
        return cls(annotation=annotation, image_size=image_size,
                   frame_paths=paths, root=root)


def _read_meta(path) -> dict[str, str]:
    meta = {}
    for i, line in enumerate(_read_lines(path), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {line!r}", str(path), i)
        key, value = line.split("=", 1)
        meta[key.strip()] = value.strip()
    return meta


def read_annotation(seq_dir) -> SequenceAnnotation:
    """Read groundtruth.txt (and center.txt if present) from a sequence dir."""
    gt_path = os.path.join(seq_dir, "groundtruth.txt")
    regions = []
    for i, line in enumerate(_read_lines(gt_path), start=1):
        if line.strip() == "":
            raise ParseError("blank line in ground truth", gt_path, i)
        regions.append(parse_region(line, gt_path, i))
    if not regions:
        raise ParseError("ground truth has no frames", gt_path)

    centers = None
    center_path = os.path.join(seq_dir, "center.txt")
    if os.path.exists(center_path):
        centers = []
        for i, line in enumerate(_read_lines(center_path), start=1):
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(f"center needs 2 values: {line!r}", center_path, i)
            centers.append(Point(parse_number(parts[0], center_path, i),
                                 parse_number(parts[1], center_path, i)))
        if len(centers) != len(regions):
            raise LengthMismatchError(
                f"{center_path}: {len(centers)} centers for {len(regions)} regions"
            )

    name = os.path.basename(os.path.normpath(seq_dir))
    meta_path = os.path.join(seq_dir, "sequence.meta")
    if os.path.exists(meta_path):
        name = _read_meta(meta_path).get("name", name)
    return SequenceAnnotation(
        name=name,
        regions=tuple(regions),
        centers=tuple(centers) if centers is not None else None,
    )


def read_sequence(seq_dir) -> SequenceData:
    """Load a sequence directory into a SequenceData bundle."""
    annotation = read_annotation(seq_dir)
    image_size = None
    meta_path = os.path.join(seq_dir, "sequence.meta")
    if os.path.exists(meta_path):
        meta = _read_meta(meta_path)
        if "width" in meta and "height" in meta:
            image_size = (
                parse_number(meta["width"], meta_path),
                parse_number(meta["height"], meta_path),
            )

    frames_dir = os.path.join(seq_dir, "frames")
    if os.path.isdir(frames_dir):
        names = sorted(
            f for f in os.listdir(frames_dir)
            if f.lower().endswith(_FRAME_EXTENSIONS)
        )
        if len(names) != len(annotation):
            raise LengthMismatchError(
                f"{frames_dir}: {len(names)} frame images for"
                f" {len(annotation)} annotated frames"
            )
        paths = tuple(os.path.join(frames_dir, f) for f in names)
    else:
        paths = tuple(
            os.path.join(seq_dir, "frames", "%08d.jpg" % (i + 1))
            for i in range(len(annotation))
        )
    return SequenceData(
        annotation=annotation,
        image_size=image_size,
        frame_paths=paths,
        root=str(seq_dir),
    )


def write_sequence(seq_dir, annotation: SequenceAnnotation,
                   image_size: tuple[float, float] | None = None) -> None:
    """Write a sequence directory: ground truth, optional centers, meta."""
    os.makedirs(seq_dir, exist_ok=True)
    _write_text(
        os.path.join(seq_dir, "groundtruth.txt"),
        "".join(format_region(r) + "\n" for r in annotation.regions),
    )
    if annotation.centers is not None:
        _write_text(
            os.path.join(seq_dir, "center.txt"),
            "".join(
                f"{format_number(c.x)},{format_number(c.y)}\n"
                for c in annotation.centers
            ),
        )
    meta = [f"name={annotation.name}"]
    if image_size is not None:
        meta.append(f"width={format_number(image_size[0])}")
        meta.append(f"height={format_number(image_size[1])}")
    _write_text(os.path.join(seq_dir, "sequence.meta"),
                "".join(m + "\n" for m in meta))


def list_sequences(root) -> list[str]:
    """Sorted sequence directories under a dataset root."""
    out = []
    for name in sorted(os.listdir(root)):
        d = os.path.join(root, name)
        if os.path.isdir(d) and os.path.exists(os.path.join(d, "groundtruth.txt")):
            out.append(d)
    return out


def read_trajectory(path) -> Trajectory:
    """Read a trajectory file: one region per line, same syntax as ground truth."""
    regions = []
    for i, line in enumerate(_read_lines(path), start=1):
        if line.strip() == "":
            raise ParseError("blank line in trajectory", str(path), i)
        regions.append(parse_region(line, str(path), i))
    if not regions:
        raise ParseError("trajectory has no frames", str(path))
    return Trajectory(regions=tuple(regions))


def write_trajectory(path, t: Trajectory) -> None:
    _write_text(path, "".join(format_region(r) + "\n" for r in t.regions))


def dumps_record(rec: SupervisedRunRecord) -> str:
    """Serialize a supervised run record.

    Line 1 is the format version, line 2 the threshold as `tau:<value>`,
    then one line per frame tagged `T:` (tracked, with region), `F:`
    (failure, no payload) or `I:` (init, with the GT region used).
    """
    validate_record(rec)
    lines = [FORMAT_LINE, f"tau:{format_number(rec.tau)}"]
    for fr in rec.frames:
        if isinstance(fr, Tracked):
            lines.append("T:" + format_region(fr.region))
        elif isinstance(fr, Failure):
            lines.append("F:")
        else:
            lines.append("I:" + format_region(fr.region))
    return "".join(line + "\n" for line in lines)


def loads_record(text: str, path=None) -> SupervisedRunRecord:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith("# format:"):
        raise FormatVersionError("missing format header", path, 1)
    if lines[0] != FORMAT_LINE:
        raise FormatVersionError(f"unsupported format: {lines[0]!r}", path, 1)
    if len(lines) < 2 or not lines[1].startswith("tau:"):
        raise ParseError("missing tau line", path, 2)
    tau = parse_number(lines[1][len("tau:"):], path, 2)
    frames: list = []
    for i, line in enumerate(lines[2:], start=3):
        if line.startswith("T:"):
            frames.append(Tracked(parse_region(line[2:], path, i)))
        elif line == "F:":
            frames.append(Failure())
        elif line.startswith("I:"):
            frames.append(Init(parse_region(line[2:], path, i)))
        else:
            raise ParseError(f"malformed frame tag: {line!r}", path, i)
    if not frames:
        raise ParseError("record has no frames", path)
    rec = SupervisedRunRecord.from_frames(frames, tau=tau)
    validate_record(rec)
    return rec


def read_record(path) -> SupervisedRunRecord:
    with open(path, "r", encoding="utf-8", newline=None) as fh:
        return loads_record(fh.read(), str(path))


def write_record(path, rec: SupervisedRunRecord) -> None:
    _write_text(path, dumps_record(rec))


_TABLE_COLUMNS = ["tracker", "sequence", "run", "frames"] + measure_keys() + ["error"]


def _format_cell(v: float) -> str:
    if math.isnan(v):
        return "NA"
    return repr(float(v))


def dumps_measure_table(table: MeasureTable) -> str:
    """Serialize a measure table as tab-separated text.

    Undefined cells are NA; the error column is empty for clean rows.
    Floats use shortest round-trip form (17 significant digits at most).
    """
    lines = [FORMAT_LINE, "\t".join(_TABLE_COLUMNS)]
    for row in table.rows:
        err = "" if row.error is None else row.error.replace("\t", " ").replace("\n", " ")
        cells = [row.tracker, row.sequence, str(row.run), str(row.frames)]
        cells += [_format_cell(v) for v in row.values]
        cells.append(err)
        lines.append("\t".join(cells))
    return "".join(line + "\n" for line in lines)


def loads_measure_table(text: str, path=None) -> MeasureTable:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith("# format:"):
        raise FormatVersionError("missing format header", path, 1)
    if lines[0] != FORMAT_LINE:
        raise FormatVersionError(f"unsupported format: {lines[0]!r}", path, 1)
    if len(lines) < 2:
        raise ParseError("missing column header", path, 2)
    if lines[1].split("\t") != _TABLE_COLUMNS:
        raise ParseError("column header mismatch", path, 2)
    rows = []
    for i, line in enumerate(lines[2:], start=3):
        cells = line.split("\t")
        if len(cells) != len(_TABLE_COLUMNS):
            raise ParseError(
                f"expected {len(_TABLE_COLUMNS)} cells, got {len(cells)}", path, i
            )
        tracker, sequence, run_text, frames_text = cells[0], cells[1], cells[2], cells[3]
        try:
            run = int(run_text)
            frames = int(frames_text)
        except ValueError:
            raise ParseError(f"bad run/frames index: {run_text!r}/{frames_text!r}",
                             path, i) from None
        values = []
        for cell in cells[4:20]:
            if cell == "NA":
                values.append(float("nan"))
            else:
                values.append(parse_number(cell, path, i))
        error = cells[20] if cells[20] != "" else None
        rows.append(MeasureRow(tracker=tracker, sequence=sequence, run=run,
                               frames=frames, values=tuple(values), error=error))
    return MeasureTable(rows=tuple(rows))


def read_measure_table(path) -> MeasureTable:
    with open(path, "r", encoding="utf-8", newline=None) as fh:
        return loads_measure_table(fh.read(), str(path))


def write_measure_table(path, table: MeasureTable) -> None:
    _write_text(path, dumps_measure_table(table))


def write_correlation_matrix(path, labels, values, counts, notes=()) -> None:
    """Write a labeled correlation matrix; undefined cells as NA."""
    lines = [FORMAT_LINE]
    lines += [f"# {note}" for note in notes]
    lines.append("\t".join(["measure"] + list(labels)))
    n = len(labels)
    for i in range(n):
        cells = [labels[i]]
        for j in range(n):
            v = values[i][j]
            cells.append("NA" if math.isnan(v) else repr(float(v)))
        lines.append("\t".join(cells))
    lines.append("\t".join(["samples"] + [str(int(counts[i][i])) for i in range(n)]))
    _write_text(path, "".join(line + "\n" for line in lines))


def write_cluster_assignment(path, labels, exemplar_of, converged, iterations,
                             notes=()) -> None:
    """Write one line per item: item label and its exemplar's label."""
    lines = [FORMAT_LINE]
    lines.append(f"# converged: {'yes' if converged else 'no (partial result)'}")
    lines.append(f"# iterations: {iterations}")
    lines += [f"# {note}" for note in notes]
    lines.append("item\texemplar")
    for i, e in enumerate(exemplar_of):
        lines.append(f"{labels[i]}\t{labels[e]}")
    _write_text(path, "".join(line + "\n" for line in lines))


def write_ar_summary(path, rows, span: float, notes=()) -> None:
    """Write per-tracker accuracy, failure count and reliability."""
    lines = [FORMAT_LINE, f"# span: {format_number(span)}"]
    lines += [f"# {note}" for note in notes]
    lines.append("tracker\taccuracy\trobustness\treliability")
    for tracker, accuracy, robustness, rel in rows:
        acc = "NA" if math.isnan(accuracy) else repr(float(accuracy))
        lines.append(f"{tracker}\t{acc}\t{repr(float(robustness))}\t{repr(float(rel))}")
    _write_text(path, "".join(line + "\n" for line in lines))


def write_label_table(path, rows, notes=()) -> None:
    """Write per-sequence ordinal property labels."""
    lines = [FORMAT_LINE]
    lines += [f"# {note}" for note in notes]
    lines.append("sequence\tsize\tmotion\tspeed\tsize_change")
    for sequence, size, motion, speed, size_change in rows:
        lines.append(f"{sequence}\t{size}\t{motion}\t{speed}\t{size_change}")
    _write_text(path, "".join(line + "\n" for line in lines))
