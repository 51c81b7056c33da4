import math

import pytest

from trackbench.errors import ConfigError
from trackbench.geometry import Region
from trackbench.runner import TrackerHandle, run_supervised
from trackbench.theoretical import (
    THEORETICAL_KINDS,
    ScriptedTracker,
    ScriptedTrackerSpec,
    make_theoretical,
    scripted_trajectory,
    sequence_properties,
    theoretical_ar_points,
    theoretical_trajectory,
)
from trackbench.trajectory import Trajectory

from conftest import make_annotation, make_sequence, moving_sequence, static_sequence


def drive_unsupervised(behavior, seq):
    """Feed a behavior the whole sequence with a single initialization."""
    behavior.begin(0)
    a = seq.annotation
    regions = [behavior.initialize("frame-1", a.regions[0])]
    for t in range(2, len(a) + 1):
        regions.append(behavior.update(f"frame-{t}"))
    return Trajectory(regions=tuple(regions))


class TestTheoreticalTrajectories:
    @pytest.mark.parametrize("kind", THEORETICAL_KINDS)
    def test_stateful_behavior_matches_direct_construction(self, kind):
        for seq in (static_sequence(9), moving_sequence(12)):
            behavior = make_theoretical(kind, seq)
            got = drive_unsupervised(behavior, seq)
            want = theoretical_trajectory(kind, seq.annotation, seq.image_size)
            assert got == want

    def test_full_frame_reports_the_frame(self):
        seq = static_sequence(5)
        t = theoretical_trajectory("tta", seq.annotation, seq.image_size)
        assert all(r == Region(0.0, 0.0, 320.0, 240.0) for r in t.regions)

    def test_full_frame_needs_image_size(self):
        seq = static_sequence(3)
        with pytest.raises(ConfigError):
            theoretical_trajectory("tta", seq.annotation, None)
        with pytest.raises(ConfigError):
            make_theoretical(
                "tta",
                type(seq)(
                    annotation=seq.annotation,
                    image_size=None,
                    frame_paths=seq.frame_paths,
                ),
            )

    def test_static_holds_first_region(self):
        a = moving_sequence(8).annotation
        t = theoretical_trajectory("tts", a)
        assert all(r == a.regions[0] for r in t.regions)

    def test_self_failing_pattern(self):
        a = moving_sequence(6).annotation
        t = theoretical_trajectory("ttf", a)
        assert t.regions[0] == a.regions[0]
        assert t.regions[-1] == a.regions[-1]
        for r in t.regions[1:-1]:
            assert r.width == 0.0 and r.height == 0.0

    def test_center_oracle_locks_first_size(self):
        seq = make_sequence([(100.0, 80.0, 20.0 + i, 16.0 + i) for i in range(5)])
        a = seq.annotation
        t = theoretical_trajectory("tto", a)
        for i, r in enumerate(t.regions):
            assert (r.width, r.height) == (20.0, 16.0)
            c = a.center(i)
            assert abs(r.x + r.width / 2.0 - c.x) < 1e-12
            assert abs(r.y + r.height / 2.0 - c.y) < 1e-12

    def test_unknown_kind_rejected(self):
        seq = static_sequence(3)
        with pytest.raises(ConfigError):
            make_theoretical("ttx", seq)
        with pytest.raises(ConfigError):
            theoretical_trajectory("ttx", seq.annotation, seq.image_size)


class TestScriptedTracker:
    def test_zero_noise_reproduces_ground_truth(self):
        a = moving_sequence(10).annotation
        t = scripted_trajectory(ScriptedTrackerSpec(), a, seed=5)
        assert t.regions == a.regions

    def test_same_seed_same_trajectory(self):
        a = moving_sequence(15).annotation
        spec = ScriptedTrackerSpec(center_noise=2.0, scale_noise=0.05, seed=3)
        assert scripted_trajectory(spec, a, seed=9) == scripted_trajectory(spec, a, seed=9)

    def test_different_seed_different_trajectory(self):
        a = moving_sequence(15).annotation
        spec = ScriptedTrackerSpec(center_noise=2.0, seed=3)
        assert scripted_trajectory(spec, a, seed=1) != scripted_trajectory(spec, a, seed=2)

    def test_determinism_flag(self):
        a = static_sequence(3).annotation
        assert ScriptedTracker(ScriptedTrackerSpec(), a).deterministic
        assert not ScriptedTracker(ScriptedTrackerSpec(center_noise=1.0), a).deterministic

    def test_drift_displaces_late_frames(self):
        a = static_sequence(30).annotation
        spec = ScriptedTrackerSpec(drift_onset=5, drift_velocity=(2.0, 0.0))
        t = scripted_trajectory(spec, a, seed=0)
        # frame t is since_init = t - 1 updates after the initialization
        for i, r in enumerate(t.regions):
            steps = max(0, i - 5)
            assert abs(r.x - (a.regions[i].x + 2.0 * steps)) < 1e-9

    def test_certain_loss_reports_zero_area_near_target(self):
        a = static_sequence(8).annotation
        spec = ScriptedTrackerSpec(center_noise=1.0, loss_prob=1.0, seed=4)
        t = scripted_trajectory(spec, a, seed=4)
        for r in t.regions[1:]:
            assert r.width == 0.0 and r.height == 0.0
            assert abs(r.x - 52.0) < 10.0 and abs(r.y - 39.0) < 10.0


class TestSequenceProperties:
    def test_static_sequence(self):
        seq = static_sequence(20)
        size, motion, speed, size_change = sequence_properties(seq)
        assert abs(size - (24.0 * 18.0) / (320.0 * 240.0)) < 1e-12
        assert motion == 1.0
        assert speed == 0.0
        assert size_change == 1.0

    def test_moving_sequence_lowers_motion(self):
        _, motion, speed, size_change = sequence_properties(moving_sequence(24))
        assert motion < 0.2
        assert speed > 0.2
        assert size_change == 1.0

    def test_growing_sequence_lowers_size_change(self):
        seq = make_sequence([(100.0, 80.0, 20.0 + i, 16.0 + i) for i in range(22)])
        _, motion, speed, size_change = sequence_properties(seq)
        assert size_change < 1.0


class TestReferencePoints:
    def test_corner_points(self):
        seqs = [static_sequence(11), moving_sequence(14)]
        pts = theoretical_ar_points(seqs)
        assert set(pts) == set(THEORETICAL_KINDS)
        acc_tta, rel_tta = pts["tta"]
        assert acc_tta < 0.1
        assert rel_tta == 1.0
        acc_ttf, rel_ttf = pts["ttf"]
        assert acc_ttf == 1.0
        assert rel_ttf < 0.1
        acc_tto, rel_tto = pts["tto"]
        assert acc_tto == 1.0 and rel_tto == 1.0

    def test_self_failing_failure_count(self):
        for n in (7, 12):
            seq = static_sequence(n)
            handle = TrackerHandle.in_process("ttf", lambda s: make_theoretical("ttf", s))
            rec = run_supervised(handle, seq, tau=0.0, seed=0)
            assert len(rec.failure_frames) == (n - 1) // 2
