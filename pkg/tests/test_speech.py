import pytest

from sarhawk import speech
from sarhawk.errors import NoParse
from sarhawk.model import ALL, DEICTIC, Command, Fragment, Transcript, Verb


def top(text, fleet=None, names=None, asr=None):
    nb = speech.parse(Transcript(text, asr_confidence=asr), fleet=fleet, names=names)
    return nb.top()


class TestQuotedUtterances:
    def test_all_hawks_take_off(self, fleet, names):
        e = top("all hawks take off", fleet, names)
        cmd = e.interpretation
        assert cmd.verb is Verb.TAKE_OFF
        assert cmd.selection == ALL
        assert e.score == 1.0

    def test_rotate_three_oclock(self):
        cmd = top("rotate 3 o'clock").interpretation
        assert cmd.verb is Verb.ROTATE_OCLOCK and cmd.hour == 3

    def test_go_up_three_meters(self):
        cmd = top("go up 3 meters").interpretation
        assert cmd.verb is Verb.GO and cmd.direction == "up" and cmd.distance == 3.0

    def test_red_hawks_land(self, fleet, names):
        cmd = top("red hawks land", fleet, names).interpretation
        assert cmd.verb is Verb.LAND and cmd.selection == frozenset({"d1"})

    def test_you_go_down_is_deictic(self, fleet, names):
        cmd = top("you go down", fleet, names).interpretation
        assert cmd.verb is Verb.GO and cmd.selection == DEICTIC

    def test_nonsense_rejected(self):
        with pytest.raises(NoParse):
            speech.parse(Transcript("purple dinosaur dance"))


SPEECH_COMMANDS = [
    ("take off", Verb.TAKE_OFF),
    ("continue", Verb.CONTINUE),
    ("land", Verb.LAND),
    ("rotate 9 o'clock", Verb.ROTATE_OCLOCK),
    ("faster", Verb.FASTER),
    ("slower", Verb.SLOWER),
    ("rotate clockwise", Verb.ROTATE_CLOCKWISE),
    ("rotate anti clockwise", Verb.ROTATE_ANTICLOCKWISE),
    ("brake", Verb.BRAKE),
    ("go left", Verb.GO),
    ("go there", Verb.GO_THERE),
    ("search expanding", Verb.SEARCH_EXPANDING),
    ("search parallel track", Verb.SEARCH_PARALLEL_TRACK),
    ("search creeping line", Verb.SEARCH_CREEPING_LINE),
]


class TestGrammarCoverage:
    @pytest.mark.parametrize("text,verb", SPEECH_COMMANDS)
    def test_every_speech_command_parses_clean(self, text, verb):
        e = top(text)
        assert e.interpretation.verb is verb
        assert e.score == 1.0

    def test_selection_command_via_name(self, fleet, names):
        e = top("select blue hawk", fleet, names)
        assert e.interpretation.verb is Verb.SELECT
        assert e.interpretation.selection == frozenset({"d2"})

    def test_bare_callsign_selects(self, fleet, names):
        e = top("green hawk", fleet, names)
        assert e.interpretation.verb is Verb.SELECT
        assert e.interpretation.selection == frozenset({"d3"})


class TestFuzzyMatching:
    def test_filler_words_tolerated(self):
        cmd = top("please go up about 3 meters now").interpretation
        assert cmd.verb is Verb.GO and cmd.distance == 3.0

    def test_number_words(self):
        cmd = top("go right three meters").interpretation
        assert cmd.distance == 3.0

    def test_asr_confidence_scales_score(self):
        e = top("land", asr=0.8)
        assert e.score == pytest.approx(0.8)

    def test_low_asr_confidence_below_threshold(self):
        with pytest.raises(NoParse):
            speech.parse(Transcript("land", asr_confidence=0.5))

    def test_partial_match_needs_majority(self):
        # a lone "rotate" is exactly at the 0.5 floor of the 2-token rules
        with pytest.raises(NoParse):
            speech.parse(Transcript("rotate"))


class TestFragments:
    def test_distance_fragment(self):
        e = top("three meters")
        assert isinstance(e.interpretation, Fragment)
        assert e.interpretation.kind == "distance" and e.interpretation.value == 3.0

    def test_oclock_fragment(self):
        e = top("6 o'clock")
        frag = e.interpretation
        assert frag.kind == "oclock" and frag.value == 6

    def test_command_outranks_fragment_at_equal_score(self):
        nb = speech.parse(Transcript("go up 3 meters"))
        kinds = [type(e.interpretation).__name__ for e in nb.entries]
        assert kinds[0] == "Command"
        assert "Fragment" in kinds  # the distance reading is still offered


class TestDefaults:
    def test_go_without_distance_defaults(self):
        cmd = speech.default_parameters(top("go left").interpretation)
        assert cmd.distance == 2.0 and "distance" in cmd.defaulted

    def test_explicit_distance_kept(self):
        cmd = speech.default_parameters(top("go left 3 meters").interpretation)
        assert cmd.distance == 3.0 and not cmd.defaulted

    def test_rotate_defaults_quarter_turn(self):
        cmd = speech.default_parameters(top("rotate clockwise").interpretation)
        assert cmd.angle == 90.0 and "angle" in cmd.defaulted


class TestDeterminism:
    def test_parse_is_deterministic(self, fleet, names):
        results = [
            [
                (type(e.interpretation).__name__, e.score)
                for e in speech.parse(
                    Transcript("all hawks go up 3 meters"), fleet, names
                ).entries
            ]
            for _ in range(5)
        ]
        assert all(r == results[0] for r in results)

    def test_scores_bounded(self):
        nb = speech.parse(Transcript("go up 3 meters please rotate"))
        assert all(0.0 <= e.score <= 1.0 for e in nb.entries)
        scores = [e.score for e in nb.entries]
        assert scores == sorted(scores, reverse=True)
