import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sarhawk import wire
from sarhawk.errors import NoMatch
from sarhawk.model import (
    ALL,
    Command,
    NBestList,
    PointingRay,
    Source,
    Verb,
    resolve_selection,
)


class TestCommandInvariants:
    def test_confidence_bounds(self):
        with pytest.raises(ValueError):
            Command(verb=Verb.LAND, confidence=1.2)
        with pytest.raises(ValueError):
            Command(verb=Verb.LAND, confidence=-0.1)

    def test_oclock_hour_range(self):
        Command(verb=Verb.ROTATE_OCLOCK, hour=12)
        with pytest.raises(ValueError):
            Command(verb=Verb.ROTATE_OCLOCK, hour=0)
        with pytest.raises(ValueError):
            Command(verb=Verb.ROTATE_OCLOCK, hour=13)

    def test_go_distance_positive(self):
        with pytest.raises(ValueError):
            Command(verb=Verb.GO, direction="up", distance=0.0)

    def test_target_must_be_finite(self):
        with pytest.raises(ValueError):
            Command(verb=Verb.GO_THERE, target=(1.0, math.inf, 0.0))

    def test_defaults_flagged(self):
        c = Command(verb=Verb.GO, direction="left").with_defaults()
        assert c.distance == 2.0
        assert "distance" in c.defaulted
        unchanged = Command(verb=Verb.GO, direction="left", distance=3.0).with_defaults()
        assert unchanged.distance == 3.0
        assert "distance" not in unchanged.defaulted

    def test_rotate_default_quarter_turn(self):
        c = Command(verb=Verb.ROTATE_CLOCKWISE).with_defaults()
        assert c.angle == 90.0
        assert "angle" in c.defaulted


class TestSerialization:
    def test_command_round_trip(self):
        c = Command(
            verb=Verb.GO,
            selection=frozenset({"d2", "d1"}),
            confidence=0.875,
            source=Source.FUSED,
            timestamp=12.3456789,
            direction="ahead",
            distance=3.25,
            defaulted=frozenset({"distance"}),
        )
        assert wire.loads(wire.dumps(c)) == c

    @given(
        conf=st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
        t=st.floats(min_value=0.0, max_value=1e6, allow_nan=False),
        dist=st.floats(min_value=1e-6, max_value=1e4, allow_nan=False),
        hour=st.integers(min_value=1, max_value=12),
    )
    def test_any_command_round_trips(self, conf, t, dist, hour):
        for c in [
            Command(verb=Verb.GO, direction="up", distance=dist, confidence=conf, timestamp=t),
            Command(verb=Verb.ROTATE_OCLOCK, hour=hour, selection=ALL),
            Command(verb=Verb.GO_THERE, target=(dist, 0.0, 0.0), source=Source.GESTURE),
        ]:
            assert wire.loads(wire.dumps(c)) == c

    def test_nbest_round_trip(self):
        nb = NBestList.from_scored(
            [(Command(verb=Verb.LAND), 0.8), (Command(verb=Verb.BRAKE), 0.9)]
        )
        back = wire.loads(wire.dumps(nb))
        assert back.top().interpretation.verb is Verb.BRAKE
        assert [e.score for e in back.entries] == [0.9, 0.8]


class TestNBest:
    def test_sorted_and_capped(self):
        nb = NBestList.from_scored([("a", 0.1), ("b", 0.9), ("c", 0.5)], limit=2)
        assert [e.interpretation for e in nb.entries] == ["b", "c"]

    def test_scores_nonnegative(self):
        with pytest.raises(ValueError):
            NBestList.from_scored([("a", -0.1)])


class TestResolveSelection:
    def test_all_hawks_phrase(self, fleet, names):
        assert resolve_selection("all hawks", fleet, names) == ALL

    def test_name_lookup(self, fleet, names):
        assert resolve_selection("red hawk", fleet, names) == frozenset({"d1"})

    def test_unknown_name(self, fleet, names):
        with pytest.raises(NoMatch):
            resolve_selection("purple dinosaur", fleet, names)

    def test_ray_dead_on(self, fleet):
        # aimed exactly at d2: zero angular error, others far outside the cone
        ray = PointingRay((60.0, 0.0, 15.0), (0.0, 1.0, 0.0))
        assert resolve_selection(ray, fleet) == frozenset({"d2"})

    def test_ray_misses_everything(self, fleet):
        ray = PointingRay((0.0, 0.0, 0.0), (0.0, 0.0, 1.0))  # straight up
        with pytest.raises(NoMatch):
            resolve_selection(ray, fleet)

    def test_angular_tie_breaks_to_lowest_id(self, fleet):
        # symmetric geometry: d1 and d2 at exactly the same angle off the ray
        mid = PointingRay((40.0, 0.0, 15.0), (0.0, 1.0, 0.0))
        assert resolve_selection(mid, fleet, cone_half_angle_deg=80.0) == frozenset({"d1"})

    def test_collinear_fleet_picks_lowest_id(self, fleet):
        # a ray down the flight line sees all three at zero angle
        ray = PointingRay((0.0, 10.0, 15.0), (1.0, 0.0, 0.0))
        assert resolve_selection(ray, fleet) == frozenset({"d1"})

    def test_deterministic(self, fleet, names):
        ray = PointingRay((0.0, 10.0, 15.0), (1.0, 0.02, 0.0))
        picks = {tuple(sorted(resolve_selection(ray, fleet))) for _ in range(5)}
        assert len(picks) == 1

    def test_empty_fleet_rejected(self):
        with pytest.raises(ValueError):
            resolve_selection("all", [])
