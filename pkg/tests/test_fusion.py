import numpy as np
import pytest

from sarhawk import fusion, gesture
from sarhawk.errors import AboveHorizon
from sarhawk.fusion import ChannelEvent, FusionEngine, FusionRules, fuse, resolve_deictic
from sarhawk.model import (
    Command,
    Fragment,
    NBestEntry,
    NBestList,
    PointingRay,
    Source,
    Verb,
    WorldModel,
)


def cmd_event(verb, conf, t, channel=Source.SPEECH, **kw):
    cmd = Command(verb=verb, confidence=conf, source=channel, timestamp=t, **kw)
    return ChannelEvent(channel, NBestList((NBestEntry(cmd, conf),)), t, t)


def gesture_event(label, conf, t):
    cmd = gesture.label_to_command(label, conf, t)
    return ChannelEvent(Source.GESTURE, NBestList((NBestEntry(cmd, conf),)), t, t)


def fragment_event(kind, value, conf, t, channel=Source.SPEECH):
    frag = Fragment(kind, value, conf, t)
    return ChannelEvent(channel, NBestList((NBestEntry(frag, conf),)), t, t)


class TestWindowSemantics:
    def test_lone_event_emits_at_timeout(self):
        eng = FusionEngine()
        assert eng.ingest(gesture_event("go_left", 0.9, 0.0)) == []
        assert eng.poll(0.9) == []  # window still open
        out = eng.poll(1.0)
        assert len(out) == 1 and out[0].verb is Verb.GO and out[0].direction == "left"

    def test_events_beyond_window_never_fuse(self):
        eng = FusionEngine()
        eng.ingest(gesture_event("faster", 0.9, 0.0))
        out = eng.ingest(cmd_event(Verb.SLOWER, 0.8, 1.5))
        # the first event flushes unimodally; the second waits in its own window
        assert [c.verb for c in out] == [Verb.FASTER]
        out2 = eng.poll(2.6)
        assert [c.verb for c in out2] == [Verb.SLOWER]

    def test_fusion_closes_window(self):
        eng = FusionEngine()
        eng.ingest(gesture_event("go_left", 0.9, 0.0))
        out = eng.ingest(fragment_event("distance", 3.0, 1.0, 0.4))
        assert len(out) == 1
        assert eng.pending is None

    def test_lone_fragment_dropped_with_diagnostic(self):
        eng = FusionEngine()
        eng.ingest(fragment_event("distance", 3.0, 1.0, 0.0))
        assert eng.poll(1.1) == []
        assert any("fragment" in d for d in eng.diagnostics)


class TestCombineRules:
    def test_gesture_direction_plus_spoken_distance(self):
        fused, how = fuse(
            gesture_event("go_left", 0.9, 0.0), fragment_event("distance", 3.0, 1.0, 0.4)
        )
        assert how == "combine"
        assert fused.verb is Verb.GO and fused.direction == "left" and fused.distance == 3.0
        assert fused.confidence == pytest.approx((0.9 + 1.0) / 2)
        assert fused.source is Source.FUSED

    def test_rotation_gesture_plus_oclock(self):
        fused, how = fuse(
            gesture_event("rotate_clockwise", 0.85, 0.0),
            fragment_event("oclock", 3, 0.95, 0.5),
        )
        assert how == "combine"
        assert fused.verb is Verb.ROTATE_OCLOCK and fused.hour == 3

    def test_go_there_plus_pointing(self):
        fused, how = fuse(
            cmd_event(Verb.GO_THERE, 1.0, 0.0),
            fragment_event("point", (40.0, 50.0, 0.0), 0.7, 0.3, Source.POINTING),
        )
        assert how == "combine"
        assert fused.verb is Verb.GO_THERE and fused.target == (40.0, 50.0, 0.0)

    def test_deictic_selection_fills_any_verb(self):
        ev = cmd_event(Verb.GO, 1.0, 0.0, direction="down")
        fused, how = fuse(ev, fragment_event("selection", frozenset({"d2"}), 0.9, 0.2))
        assert how == "combine"
        assert fused.selection == frozenset({"d2"})

    def test_selection_rule_does_not_override_explicit(self):
        ev = cmd_event(Verb.GO, 1.0, 0.0, direction="down", selection=frozenset({"d1"}))
        fused, how = fuse(ev, fragment_event("selection", frozenset({"d2"}), 0.9, 0.2))
        assert how != "combine" or fused.selection == frozenset({"d1"})


class TestConflictResolution:
    def test_max_confidence_wins(self):
        fused, how = fuse(
            gesture_event("faster", 0.6, 0.0), cmd_event(Verb.SLOWER, 0.9, 0.3)
        )
        assert how == "max"
        assert fused.verb is Verb.SLOWER

    def test_exact_tie_prefers_speech(self):
        fused, _ = fuse(gesture_event("faster", 0.8, 0.0), cmd_event(Verb.SLOWER, 0.8, 0.3))
        assert fused.verb is Verb.SLOWER

    def test_agreement_reinforces(self):
        fused, how = fuse(
            gesture_event("brake", 0.8, 0.0), cmd_event(Verb.BRAKE, 0.8, 0.2)
        )
        assert how == "reinforce"
        assert fused.confidence == pytest.approx(min(1.0, 0.8 + 0.1))
        assert fused.source is Source.FUSED

    def test_reinforcement_caps_at_one(self):
        fused, _ = fuse(gesture_event("brake", 0.95, 0.0), cmd_event(Verb.BRAKE, 0.95, 0.2))
        assert fused.confidence == 1.0

    def test_brake_disambiguation_rule(self):
        # shipped rule: a brake reading wins conflicts even at lower confidence
        fused, how = fuse(
            gesture_event("brake", 0.6, 0.0), cmd_event(Verb.FASTER, 0.9, 0.3)
        )
        assert how == "disambiguate"
        assert fused.verb is Verb.BRAKE


class TestRuleTable:
    def test_default_rules_load(self):
        rules = fusion.default_rules()
        assert rules.window_s == 1.0
        assert len(rules.combine) == 4

    def test_overlapping_combine_rules_rejected(self):
        from sarhawk.fusion import CombineRule

        rules = FusionRules(
            combine=[
                CombineRule(frozenset({"go"}), "distance", "distance"),
                CombineRule(frozenset({"go", "go_there"}), "distance", "distance"),
            ],
            disambiguate=[],
        )
        with pytest.raises(ValueError):
            rules.validate()

    def test_overlapping_disambiguate_rejected(self):
        from sarhawk.fusion import DisambiguateRule

        rules = FusionRules(
            combine=[],
            disambiguate=[DisambiguateRule("brake", "*"), DisambiguateRule("land", "*")],
        )
        with pytest.raises(ValueError):
            rules.validate()


class TestResolveDeictic:
    world = WorldModel(0, 120, 0, 120)

    def test_vertical_ray(self):
        p = resolve_deictic(PointingRay((0, 0, 1.7), (0, 0, -1.0)), self.world)
        assert p == (0.0, 0.0, 0.0)

    def test_45_degree_ray(self):
        d = 1 / np.sqrt(2)
        p = resolve_deictic(PointingRay((0, 0, 1.7), (d, 0, -d)), self.world)
        assert p[0] == pytest.approx(1.7)
        assert p[1] == 0.0 and p[2] == 0.0

    def test_above_horizon(self):
        with pytest.raises(AboveHorizon):
            resolve_deictic(PointingRay((0, 0, 1.7), (1, 0, 0.1)), self.world)

    def test_clamped_to_bounds(self):
        p = resolve_deictic(PointingRay((0, 0, 1.0), (-1, 0, -0.001)), self.world)
        assert p[0] == 0.0  # would land far outside; clamped to the edge


class TestDeterminism:
    def test_identical_streams_identical_commands(self):
        def run():
            eng = FusionEngine()
            out = []
            out += eng.ingest(gesture_event("go_left", 0.9, 0.0))
            out += eng.ingest(fragment_event("distance", 4.0, 1.0, 0.5))
            out += eng.ingest(cmd_event(Verb.LAND, 1.0, 3.0))
            out += eng.poll(5.0)
            return [(c.verb, c.confidence, c.distance) for c in out]

        assert run() == run()
