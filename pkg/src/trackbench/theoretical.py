"""Reference trackers computed from ground truth, plus scripted stand-ins.

Four theoretical trackers probe one sequence property each:

  tta  reports the whole image frame every frame; its accuracy reflects
       the relative size of the target.
  tts  reports the region it was last initialized with; its failure
       count reflects how much the target moves.
  ttf  deliberately signals loss (a zero-area region) on every frame it
       is asked to track, except the final frame of the sequence where
       it reports the ground-truth region; it probes the
       reinitialization machinery and maximizes the failure count at
       floor((N-1)/2).
  tto  reports a box of its first initialization's size centered on the
       annotated target center; its accuracy reflects target size
       change.

Scripted trackers perturb the ground truth with configurable center
noise, scale noise, post-onset drift and random loss; they are the
deterministic-seed workhorses for protocol and analysis tests.

All behaviors speak the same in-process interface the runner drives:
begin(seed), initialize(path, region) -> region, update(path) -> region.
Behaviors count frames by counting messages, exactly like their
standalone executable counterparts, so both modes produce identical
output.
"""

import math
import random
from dataclasses import dataclass

from .errors import ConfigError, DegenerateAnnotationError
from .geometry import Region, region_size
from .io_formats import SequenceData
from .measures import reliability
from .trajectory import SequenceAnnotation, Tracked, Trajectory

__all__ = [
    "THEORETICAL_KINDS",
    "TrackerBehavior",
    "FullFrameTracker",
    "StaticTracker",
    "SelfFailingTracker",
    "CenterOracleTracker",
    "ScriptedTrackerSpec",
    "ScriptedTracker",
    "make_theoretical",
    "theoretical_trajectory",
    "scripted_trajectory",
    "sequence_properties",
    "theoretical_ar_points",
]

THEORETICAL_KINDS = ("tta", "tts", "ttf", "tto")

_ZERO_REGION = Region(0.0, 0.0, 0.0, 0.0)


class TrackerBehavior:
    """In-process tracker interface driven by the runner."""

    name = "tracker"
    deterministic = True

    def begin(self, seed: int) -> None:
        """Reset all run state; called once before the first frame."""
        self._frame = 0

    def initialize(self, frame_path: str, region: Region) -> Region:
        raise NotImplementedError

    def update(self, frame_path: str) -> Region:
        raise NotImplementedError

    def _advance(self) -> int:
        """Count one protocol message; returns the 1-based frame number."""
        self._frame += 1
        return self._frame


class FullFrameTracker(TrackerBehavior):
    """tta: the whole image frame, every frame."""

    name = "tta"

    def __init__(self, image_size: tuple[float, float]):
        if image_size is None:
            raise ConfigError("tta needs the image size (sequence.meta width/height)")
        self._region = Region(0.0, 0.0, float(image_size[0]), float(image_size[1]))

    def initialize(self, frame_path: str, region: Region) -> Region:
        self._advance()
        return self._region

    def update(self, frame_path: str) -> Region:
        self._advance()
        return self._region


class StaticTracker(TrackerBehavior):
    """tts: whatever region it was last initialized with."""

    name = "tts"

    def begin(self, seed: int) -> None:
        super().begin(seed)
        self._held = None

    def initialize(self, frame_path: str, region: Region) -> Region:
        self._advance()
        self._held = region
        return region

    def update(self, frame_path: str) -> Region:
        self._advance()
        return self._held


class SelfFailingTracker(TrackerBehavior):
    """ttf: signals loss on every tracked frame except the sequence's last.

    The zero-area report makes the supervising runner record a failure
    and reinitialize on the next frame, so failures land on every
    second frame. The loss signal is suppressed on the final frame
    (reporting the ground truth instead) because a failure there could
    trigger no reinitialization and would inflate the intervention
    count past floor((N-1)/2).
    """

    name = "ttf"

    def __init__(self, annotation: SequenceAnnotation):
        self._annotation = annotation

    def initialize(self, frame_path: str, region: Region) -> Region:
        self._advance()
        return region

    def update(self, frame_path: str) -> Region:
        t = self._advance()
        if t == len(self._annotation):
            return self._annotation.regions[t - 1]
        return _ZERO_REGION


class CenterOracleTracker(TrackerBehavior):
    """tto: fixed-size box glued to the annotated target center.

    The box size locks at the first initialization and stays fixed for
    the whole run, so growth or shrinkage of the target shows up as
    lost overlap.
    """

    name = "tto"

    def __init__(self, annotation: SequenceAnnotation):
        self._annotation = annotation

    def begin(self, seed: int) -> None:
        super().begin(seed)
        self._size = None

    def _report(self, t: int) -> Region:
        c = self._annotation.center(t - 1)
        w, h = self._size
        return Region(c.x - w / 2.0, c.y - h / 2.0, w, h)

    def initialize(self, frame_path: str, region: Region) -> Region:
        t = self._advance()
        if self._size is None:
            self._size = (region.width, region.height)
        return self._report(t)

    def update(self, frame_path: str) -> Region:
        return self._report(self._advance())


@dataclass(frozen=True)
class ScriptedTrackerSpec:
    """Parameters of a ground-truth-perturbing scripted tracker.

    center_noise: gaussian sigma in pixels added to the reported center.
    scale_noise: sigma of the log size factor (width and height drawn
        independently).
    drift_onset: number of frames after the most recent initialization
        at which the report starts drifting; None disables drift.
    drift_velocity: per-frame (dx, dy) added once drifting.
    loss_prob: per-frame probability of a deliberate loss signal: a
        zero-area region reported at the perturbed center.
    seed: spec-level seed mixed with the per-run seed from the handshake.
    """

    name: str = "scripted"
    center_noise: float = 0.0
    scale_noise: float = 0.0
    drift_onset: int | None = None
    drift_velocity: tuple[float, float] = (0.0, 0.0)
    loss_prob: float = 0.0
    seed: int = 0


class ScriptedTracker(TrackerBehavior):
    """Stateful realization of a ScriptedTrackerSpec against one sequence."""

    def __init__(self, spec: ScriptedTrackerSpec, annotation: SequenceAnnotation):
        self._spec = spec
        self._annotation = annotation
        self.name = spec.name

    @property
    def deterministic(self) -> bool:
        s = self._spec
        return s.center_noise == 0.0 and s.scale_noise == 0.0 and s.loss_prob == 0.0

    def begin(self, seed: int) -> None:
        super().begin(seed)
        mixed = ((self._spec.seed * 0x9E3779B97F4A7C15) ^ seed) & 0xFFFFFFFFFFFFFFFF
        self._rng = random.Random(mixed)
        self._since_init = 0

    def initialize(self, frame_path: str, region: Region) -> Region:
        self._advance()
        self._since_init = 0
        return region

    def update(self, frame_path: str) -> Region:
        t = self._advance()
        self._since_init += 1
        s = self._spec
        # Fixed draw order keeps runs reproducible whatever the params.
        loss_draw = self._rng.random()
        nx = self._rng.gauss(0.0, 1.0)
        ny = self._rng.gauss(0.0, 1.0)
        sw = self._rng.gauss(0.0, 1.0)
        sh = self._rng.gauss(0.0, 1.0)
        base = self._annotation.regions[t - 1]
        drift_steps = 0
        if s.drift_onset is not None:
            drift_steps = max(0, self._since_init - s.drift_onset)
        cx = base.x + base.width / 2.0 + nx * s.center_noise + drift_steps * s.drift_velocity[0]
        cy = base.y + base.height / 2.0 + ny * s.center_noise + drift_steps * s.drift_velocity[1]
        if s.loss_prob > 0.0 and loss_draw < s.loss_prob:
            # Loss signal: zero area at the perturbed center, so the report
            # says "lost here" rather than teleporting to the origin.
            return Region(cx, cy, 0.0, 0.0)
        if s.center_noise == 0.0 and s.scale_noise == 0.0 and drift_steps == 0:
            return base
        w = base.width * math.exp(sw * s.scale_noise)
        h = base.height * math.exp(sh * s.scale_noise)
        return Region(cx - w / 2.0, cy - h / 2.0, w, h)


def make_theoretical(kind: str, seq: SequenceData) -> TrackerBehavior:
    """Instantiate a theoretical tracker for one sequence."""
    if kind == "tta":
        return FullFrameTracker(seq.image_size)
    if kind == "tts":
        return StaticTracker()
    if kind == "ttf":
        return SelfFailingTracker(seq.annotation)
    if kind == "tto":
        return CenterOracleTracker(seq.annotation)
    raise ConfigError(f"unknown theoretical tracker kind: {kind!r}")


def theoretical_trajectory(
    kind: str, a: SequenceAnnotation, image_size: tuple[float, float] | None = None
) -> Trajectory:
    """Single-initialization trajectory of a theoretical tracker.

    Computed directly from the annotation; equals what the stateful
    behavior reports under an unsupervised run.
    """
    n = len(a)
    if kind == "tta":
        if image_size is None:
            raise ConfigError("tta needs the image size")
        r = Region(0.0, 0.0, float(image_size[0]), float(image_size[1]))
        return Trajectory(regions=(r,) * n)
    if kind == "tts":
        return Trajectory(regions=(a.regions[0],) * n)
    if kind == "ttf":
        regions = [a.regions[0]]
        for t in range(2, n + 1):
            regions.append(a.regions[t - 1] if t == n else _ZERO_REGION)
        return Trajectory(regions=tuple(regions))
    if kind == "tto":
        w, h = a.regions[0].width, a.regions[0].height
        regions = []
        for i in range(n):
            c = a.center(i)
            regions.append(Region(c.x - w / 2.0, c.y - h / 2.0, w, h))
        return Trajectory(regions=tuple(regions))
    raise ConfigError(f"unknown theoretical tracker kind: {kind!r}")


def scripted_trajectory(
    spec: ScriptedTrackerSpec, a: SequenceAnnotation, seed: int = 0
) -> Trajectory:
    """Single-initialization trajectory of a scripted tracker.

    Identical seeds give identical trajectories.
    """
    tracker = ScriptedTracker(spec, a)
    tracker.begin(seed)
    regions = [tracker.initialize("frame-1", a.regions[0])]
    for t in range(2, len(a) + 1):
        regions.append(tracker.update(f"frame-{t}"))
    return Trajectory(regions=tuple(regions))


def _supervised_tracked_and_failures(kind: str, seq: SequenceData):
    from . import runner

    handle = runner.TrackerHandle.in_process(
        kind, lambda s, k=kind: make_theoretical(k, s)
    )
    rec = runner.run_supervised(handle, seq, tau=0.0, seed=0)
    return rec


def sequence_properties(seq: SequenceData, span: float = 30.0) -> tuple[float, float, float, float]:
    """Scalar sequence properties probed by the theoretical trackers.

    Returns (size, motion, speed, size_change):
      size        tta supervised average overlap (relative target size);
      motion      tts reliability over `span` frames (closer to 1 =
                  less motion);
      speed       mean per-frame ground-truth center displacement
                  divided by the ground-truth region size (direct
                  kinematic stand-in for the irreproducible
                  failure-probe column);
      size_change tto supervised average overlap (closer to 1 = less
                  size change).
    """
    from .measures import supervised_overlap_series

    a = seq.annotation
    rec_tta = _supervised_tracked_and_failures("tta", seq)
    rec_tts = _supervised_tracked_and_failures("tts", seq)
    rec_tto = _supervised_tracked_and_failures("tto", seq)

    def avg(rec):
        phis = [v for v in supervised_overlap_series(rec, a) if v is not None]
        return math.fsum(phis) / len(phis) if phis else float("nan")

    size = avg(rec_tta)
    motion = reliability(len(rec_tts.failure_frames), len(a), span)
    size_change = avg(rec_tto)

    if len(a) < 2:
        speed = 0.0
    else:
        steps = []
        for i in range(1, len(a)):
            prev_c = a.center(i - 1)
            cur_c = a.center(i)
            s = region_size(a.regions[i - 1])
            if s <= 0:
                raise DegenerateAnnotationError(
                    "zero-size ground-truth region, speed undefined", frame=i
                )
            steps.append(math.hypot(cur_c.x - prev_c.x, cur_c.y - prev_c.y) / s)
        speed = math.fsum(steps) / len(steps)
    return (size, motion, speed, size_change)


def theoretical_ar_points(
    seqs: list[SequenceData], span: float = 30.0
) -> dict[str, tuple[float, float]]:
    """Reference (accuracy, reliability) per theoretical tracker.

    Reference accuracy averages overlap over Tracked frames only: it
    describes how well each tracker tracks when it is tracking, which
    is what the interpretation corners of the accuracy-reliability
    plot need. ttf has no Tracked frames on odd-length sequences; its
    accuracy is 1.0 by construction (every region it reports on a
    tracked frame is the ground truth). This differs deliberately from
    ar_pair on evaluated trackers, where failure frames count as
    overlap 0.
    """
    from .geometry import overlap as _overlap

    sums = {k: [0.0, 0.0, 0] for k in THEORETICAL_KINDS}
    for seq in seqs:
        a = seq.annotation
        for kind in THEORETICAL_KINDS:
            rec = _supervised_tracked_and_failures(kind, seq)
            tracked = [
                _overlap(a.regions[i], fr.region)
                for i, fr in enumerate(rec.frames)
                if isinstance(fr, Tracked)
            ]
            if tracked:
                acc = math.fsum(tracked) / len(tracked)
            elif kind == "ttf":
                acc = 1.0
            else:
                acc = float("nan")
            rel = reliability(len(rec.failure_frames), len(a), span)
            sums[kind][0] += acc
            sums[kind][1] += rel
            sums[kind][2] += 1
    return {
        k: (acc / n, rel / n) for k, (acc, rel, n) in sums.items() if n > 0
    }
