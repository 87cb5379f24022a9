import random

import pytest

from memorypod.errors import (
    AmbiguousLabel,
    AnnotationOutsideZones,
    EmptyResponses,
    InvalidPod,
    NoKeyframes,
    OutOfRange,
    UnmatchedLabel,
)
from memorypod.events import SamplePose
from memorypod.geometry import AnchorFrame, MiniaturePlacement, Pose, UnitQuat, Vec3, Zone
from memorypod.pod import Annotation, AnnotationKind
from memorypod.recorder import record_events
from memorypod.replay import (
    Miniature,
    PodShelf,
    RealScale,
    RecallResponse,
    area_accuracy,
    mean_time_offset,
    open_session,
)
from memorypod.scenario import simulate_scenario

from .util import demo_scenario, make_minimal_pod, rand_pose, vec_close

S = 1_000_000  # microseconds per second


@pytest.fixture(scope="module")
def demo():
    cfg = demo_scenario()
    events = simulate_scenario(cfg)
    pod = record_events(events, title=cfg.title, zones=cfg.zones)
    return cfg, events, pod


class TestOpenSession:
    def test_defaults(self, demo):
        _, _, pod = demo
        session = open_session(pod, RealScale(AnchorFrame(Pose.identity())))
        assert session.cursor == 0 and session.rate == 1.0 and not session.playing

    def test_invalid_pod_rejected(self):
        bad = make_minimal_pod(annotations=[])
        with pytest.raises(InvalidPod):
            open_session(bad, RealScale())

    def test_zero_scale_rejected_at_type_level(self):
        with pytest.raises(ValueError):
            Miniature(MiniaturePlacement(Pose.identity(), 0.0))

    def test_small_scale_accepted(self, demo):
        _, _, pod = demo
        mode = Miniature(MiniaturePlacement(Pose(Vec3(0, 0.8, 0), UnitQuat.identity()), 0.1))
        assert open_session(pod, mode).cursor == 0


class TestFrameAt:
    def test_real_scale_with_record_anchor_reproduces_capture(self, demo):
        cfg, events, pod = demo
        session = open_session(pod, RealScale(AnchorFrame(cfg.anchor)))
        world = {
            (ev.entity_id, ev.t_us): ev.pose.position
            for ev in events
            if isinstance(ev, SamplePose)
        }
        for annotation in pod.annotations:
            frame = session.frame_at(annotation.at)
            for eid, _role, pose in frame.entities:
                assert vec_close(pose.position, world[(eid, annotation.at)], 1e-5)

    def test_miniature_scales_inter_entity_distances(self, demo):
        cfg, _, pod = demo
        scale = 0.1
        real = open_session(pod, RealScale(AnchorFrame(Pose.identity())))
        mini = open_session(
            pod, Miniature(MiniaturePlacement(Pose(Vec3(0.3, 0.9, -0.2), UnitQuat.identity()), scale))
        )
        for t in (0, 10 * S, 30 * S, 45 * S, 60 * S):
            fr = real.frame_at(t)
            fm = mini.frame_at(t)
            for i in range(len(fr.entities)):
                for j in range(i + 1, len(fr.entities)):
                    d_real = fr.entities[i][2].position.distance(fr.entities[j][2].position)
                    d_mini = fm.entities[i][2].position.distance(fm.entities[j][2].position)
                    assert abs(d_mini - scale * d_real) < 1e-6 * max(1.0, d_real)

    def test_mode_equivalence_at_unit_scale(self, demo):
        rng = random.Random(13)
        _, _, pod = demo
        for _ in range(10):
            placement = rand_pose(rng)
            real = open_session(pod, RealScale(AnchorFrame(placement)))
            mini = open_session(pod, Miniature(MiniaturePlacement(placement, 1.0)))
            t = rng.randint(0, pod.duration_us())
            assert real.frame_at(t) == mini.frame_at(t)

    def test_start_annotation_active_at_its_time(self, demo):
        _, _, pod = demo
        session = open_session(pod, RealScale())
        start = next(a for a in pod.annotations if a.kind is AnnotationKind.START)
        frame = session.frame_at(start.at)
        assert start.id in frame.active_annotations

    def test_annotation_window_boundary(self, demo):
        _, _, pod = demo
        session = open_session(pod, RealScale())
        start = next(a for a in pod.annotations if a.kind is AnnotationKind.START)
        assert start.id in session.frame_at(start.at + S).active_annotations
        assert start.id not in session.frame_at(start.at + S + 1).active_annotations

    def test_transcript_segment_selected(self, demo):
        _, _, pod = demo
        session = open_session(pod, RealScale())
        seg = pod.transcript[0]
        frame = session.frame_at(seg.start)
        assert frame.current_transcript == seg

    def test_out_of_range(self, demo):
        _, _, pod = demo
        session = open_session(pod, RealScale())
        with pytest.raises(OutOfRange):
            session.frame_at(pod.duration_us() + 1)
        with pytest.raises(OutOfRange):
            session.frame_at(-1)

    def test_pure(self, demo):
        _, _, pod = demo
        session = open_session(pod, RealScale())
        assert session.frame_at(12 * S) == session.frame_at(12 * S)

    def test_fov_present_and_scaled(self, demo):
        _, _, pod = demo
        real = open_session(pod, RealScale())
        mini = open_session(pod, Miniature(MiniaturePlacement(Pose.identity(), 0.2)))
        fr, fm = real.frame_at(5 * S), mini.frame_at(5 * S)
        assert fr.fov is not None and fm.fov is not None
        spread_r = fr.fov[0].distance(fr.fov[1])
        spread_m = fm.fov[0].distance(fm.fov[1])
        assert abs(spread_m - 0.2 * spread_r) < 1e-9


class TestAdvance:
    def test_rate_one(self, demo):
        _, _, pod = demo
        session = open_session(pod, RealScale())
        session.playing = True
        frame = session.advance(1.0)
        assert frame.t == S and session.cursor == S

    def test_rate_two_half_second(self, demo):
        _, _, pod = demo
        session = open_session(pod, RealScale())
        session.playing = True
        session.rate = 2.0
        assert session.advance(0.5).t == S

    def test_clamps_and_pauses_at_end(self, demo):
        _, _, pod = demo
        session = open_session(pod, RealScale())
        session.playing = True
        session.cursor = pod.duration_us()
        frame = session.advance(1.0)
        assert frame.t == pod.duration_us()
        assert not session.playing

    def test_paused_advance_is_noop(self, demo):
        _, _, pod = demo
        session = open_session(pod, RealScale())
        session.cursor = 3 * S
        assert session.advance(5.0).t == 3 * S


class TestJumpKeyframe:
    def session_with_keyframes(self, times_s):
        times = [round(t * S) for t in times_s]
        samples = [(0, Pose.identity()), (max(times) or S, Pose.identity())]
        from memorypod.pod import EntityRole, EntityTrack

        anns = [Annotation(1, AnnotationKind.START, "s", times[0], Vec3(0, 0, 0))]
        for i, t in enumerate(times[1:-1], start=2):
            anns.append(Annotation(i, AnnotationKind.USE, f"u{i}", t, Vec3(0, 0, 0)))
        anns.append(Annotation(len(times), AnnotationKind.END, "e", times[-1], Vec3(0, 0, 0)))
        pod = make_minimal_pod(
            tracks=[EntityTrack(1, EntityRole.HEAD, "head", samples)], annotations=anns
        )
        return open_session(pod, RealScale())

    def test_next_from_between(self):
        session = self.session_with_keyframes([0, 10.5, 42, 80])
        session.cursor = 15 * S
        assert session.jump_keyframe("next") == 42 * S

    def test_next_is_strict(self):
        session = self.session_with_keyframes([0, 10.5, 42, 80])
        session.cursor = 42 * S
        assert session.jump_keyframe("next") == 80 * S

    def test_prev_at_origin_unchanged(self):
        session = self.session_with_keyframes([0, 10.5, 42, 80])
        session.cursor = 0
        assert session.jump_keyframe("prev") == 0

    def test_no_keyframes_error(self, demo):
        _, _, pod = demo
        session = open_session(pod, RealScale())
        session.keyframes = type(session.keyframes)([])
        with pytest.raises(NoKeyframes):
            session.jump_keyframe("next")

    def test_agrees_with_linear_scan(self):
        def oracle(times, cursor, direction):
            if direction == "next":
                later = [t for t in times if t > cursor]
                return min(later) if later else cursor
            earlier = [t for t in times if t < cursor]
            return max(earlier) if earlier else cursor

        rng = random.Random(14)
        for _ in range(1000):
            n = rng.randint(1, 8)
            times_s = sorted(rng.uniform(0, 90) for _ in range(n))
            # Start must come first, End last; collapse duplicates
            times_s = sorted(set([0.0] + times_s + [95.0]))
            session = self.session_with_keyframes(times_s)
            cursor = rng.randint(0, 100 * S)
            session.cursor = min(cursor, session.duration_us)
            direction = rng.choice(["next", "prev"])
            expected = oracle(session.keyframes.times, session.cursor, direction)
            assert session.jump_keyframe(direction) == expected


class TestPodShelf:
    def test_sessions_independent(self, demo):
        _, _, pod = demo
        shelf = PodShelf()
        a = shelf.add(pod, RealScale())
        b = shelf.add(pod, Miniature(MiniaturePlacement(Pose.identity(), 0.25)))
        sa, sb = shelf[a][1], shelf[b][1]
        sb_frame_before = sb.frame_at(sb.cursor)
        sa.playing = True
        sa.advance(2.0)
        assert sa.cursor == 2 * S
        assert sb.cursor == 0
        assert sb.frame_at(sb.cursor) == sb_frame_before

    def test_remove_closes_slot(self, demo):
        _, _, pod = demo
        shelf = PodShelf()
        shelf.add(pod, RealScale())
        shelf.add(pod, RealScale())
        shelf.remove(0)
        assert len(shelf) == 1


class TestMetrics:
    def responses_with_offsets(self, pod, offsets_us):
        anns = sorted(pod.annotations, key=lambda a: a.at)
        out = []
        for annotation, off in zip(anns, offsets_us):
            zone_id = next(
                (z.id for z in pod.zones if z.min_x <= annotation.position.x < z.max_x
                 and z.min_z <= annotation.position.z < z.max_z),
                "",
            )
            out.append(RecallResponse(annotation.label, annotation.at + off, zone_id))
        return out

    def test_exact_recall_zero_offset(self, demo):
        _, _, pod = demo
        responses = self.responses_with_offsets(pod, [0] * 5)
        assert mean_time_offset(responses, pod) == 0.0

    def test_constant_five_second_offset(self, demo):
        _, _, pod = demo
        responses = self.responses_with_offsets(pod, [5 * S] * 5)
        assert mean_time_offset(responses, pod) == 5.0

    def test_mean_of_1_12_and_3_36(self, demo):
        _, _, pod = demo
        responses = self.responses_with_offsets(pod, [1_120_000, -3_360_000])[:2]
        assert abs(mean_time_offset(responses, pod) - 2.24) < 1e-9

    def test_unmatched_label(self, demo):
        _, _, pod = demo
        with pytest.raises(UnmatchedLabel):
            mean_time_offset([RecallResponse("no such step", 0, "staging")], pod)

    def test_ambiguous_label(self, demo):
        _, _, pod = demo
        from dataclasses import replace

        dup = pod.annotations[1]
        twin = Annotation(99, dup.kind, dup.label, dup.at, dup.position)
        pod2 = replace(pod, annotations=pod.annotations + [twin])
        with pytest.raises(AmbiguousLabel):
            mean_time_offset([RecallResponse(dup.label, 0, "staging")], pod2)

    def test_empty_responses(self, demo):
        _, _, pod = demo
        with pytest.raises(EmptyResponses):
            mean_time_offset([], pod)
        with pytest.raises(EmptyResponses):
            area_accuracy([], pod)

    def test_area_accuracy_all_correct(self, demo):
        _, _, pod = demo
        responses = self.responses_with_offsets(pod, [0] * 5)
        assert area_accuracy(responses, pod) == 1.0

    def test_area_accuracy_22_of_25(self, demo):
        _, _, pod = demo
        good = self.responses_with_offsets(pod, [0] * 5)
        responses = []
        for i in range(25):
            r = good[i % 5]
            if i < 3:
                r = RecallResponse(r.label, r.reported_t_us, "wrong-zone")
            responses.append(r)
        assert area_accuracy(responses, pod) == 0.88

    def test_annotation_outside_zones(self, demo):
        _, _, pod = demo
        from dataclasses import replace

        offside = Annotation(98, AnnotationKind.USE, "offside", pod.annotations[1].at, Vec3(99, 0, 99))
        pod2 = replace(pod, annotations=pod.annotations + [offside])
        with pytest.raises(AnnotationOutsideZones):
            area_accuracy([RecallResponse("offside", 0, "staging")], pod2)

    def test_agrees_with_brute_force_on_random_sets(self, demo):
        _, _, pod = demo
        rng = random.Random(15)
        labels = [a.label for a in pod.annotations]
        by_label = {a.label: a for a in pod.annotations}
        zone_ids = [z.id for z in pod.zones] + ["nowhere"]
        for _ in range(200):
            responses = [
                RecallResponse(
                    rng.choice(labels), rng.randint(0, 70 * S), rng.choice(zone_ids)
                )
                for _ in range(rng.randint(1, 12))
            ]
            expected_offset = sum(
                abs(r.reported_t_us - by_label[r.label].at) for r in responses
            ) / len(responses) / 1e6
            assert abs(mean_time_offset(responses, pod) - expected_offset) < 1e-12

            def zone_containing(p):
                for z in pod.zones:
                    if z.min_x <= p.x < z.max_x and z.min_z <= p.z < z.max_z:
                        return z.id
                return None

            expected_acc = sum(
                1 for r in responses if r.zone_id == zone_containing(by_label[r.label].position)
            ) / len(responses)
            assert area_accuracy(responses, pod) == expected_acc
