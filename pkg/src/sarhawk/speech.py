"""Transcript parsing against the command grammar.

Matching is fuzzy: each rule pattern is aligned to the transcript with a
longest-common-subsequence over tokens, so filler words and mild ASR noise
do not break a parse. Score = matched pattern fraction x ASR confidence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from . import model
from .errors import NoParse
from .model import Command, Fragment, NBestEntry, NBestList, Source, Transcript, Verb

MIN_SCORE = 0.5

_NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11, "twelve": 12,
}

_DIRECTION_SYNONYMS = {
    "up": "up", "down": "down", "left": "left", "right": "right",
    "ahead": "ahead", "forward": "ahead", "forwards": "ahead", "straight": "ahead",
    "backward": "backward", "backwards": "backward", "back": "backward",
}

# multi-word rewrites applied after splitting
_REWRITES = {
    "takeoff": "take off",
    "anticlockwise": "anti clockwise",
    "counterclockwise": "anti clockwise",
    "oclock": "o'clock",
    "meter": "meters",
    "metres": "meters",
    "metre": "meters",
}

_PUNCT = re.compile(r"[^\w']+")


def tokenize(text: str):
    tokens = []
    for raw in _PUNCT.sub(" ", text.lower().replace("-", " ")).split():
        tokens.extend(_REWRITES.get(raw, raw).split())
    return tokens


def _parse_amount(token: str) -> Optional[float]:
    if token in _NUMBER_WORDS:
        return float(_NUMBER_WORDS[token])
    try:
        v = float(token)
    except ValueError:
        return None
    return v if v > 0 else None


def _slot_value(slot: str, token: str):
    if slot == "hour":
        v = _parse_amount(token)
        return int(v) if v is not None and v.is_integer() and 1 <= v <= 12 else None
    if slot == "number":
        return _parse_amount(token)
    if slot == "direction":
        return _DIRECTION_SYNONYMS.get(token)
    if slot == "mode":
        return token if token in ("command", "joystick") else None
    raise ValueError(f"unknown slot {slot!r}")


@dataclass(frozen=True)
class GrammarRule:
    name: str
    kind: str        # "rule" | "fragment"
    action: str      # verb value or fragment kind
    variants: tuple  # tuple of atom tuples; atom = ("lit", word) | ("slot", name)


class Grammar:
    def __init__(self, rules):
        self.rules = list(rules)

    @staticmethod
    def load(path=None) -> "Grammar":
        if path is None:
            text = resources.files("sarhawk.data").joinpath("grammar.txt").read_text()
        else:
            with open(path) as fh:
                text = fh.read()
        return Grammar(_parse_grammar(text))


def _parse_pattern(src: str):
    """Expand optional groups into concrete atom-sequence variants."""
    atoms = []
    depth_stack = [atoms]
    for tok in src.split():
        if tok == "[":
            group = []
            depth_stack[-1].append(("opt", group))
            depth_stack.append(group)
        elif tok == "]":
            depth_stack.pop()
            if not depth_stack:
                raise ValueError("unbalanced ] in pattern")
        elif tok.startswith('"') and tok.endswith('"'):
            depth_stack[-1].append(("lit", tok[1:-1]))
        elif tok.startswith("<") and tok.endswith(">"):
            depth_stack[-1].append(("slot", tok[1:-1]))
        else:
            raise ValueError(f"bad pattern atom {tok!r}")
    if len(depth_stack) != 1:
        raise ValueError("unbalanced [ in pattern")

    def expand(seq):
        variants = [[]]
        for atom in seq:
            if atom[0] == "opt":
                inner = expand(atom[1])
                variants = variants + [v + i for v in variants for i in inner]
            else:
                variants = [v + [atom] for v in variants]
        return variants

    # longest first so the most specific variant wins ties
    return tuple(sorted((tuple(v) for v in expand(atoms)), key=len, reverse=True))


def _parse_grammar(text: str):
    rules = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        m = re.match(r"(rule|fragment)\s+(\w+)\s*:\s*(.+?)\s*=>\s*(\w+)$", line)
        if m is None:
            raise ValueError(f"grammar line {lineno}: cannot parse {line!r}")
        kind, name, pattern, action = m.groups()
        rules.append(GrammarRule(name, kind, action, _parse_pattern(pattern)))
    return rules


_DEFAULT_GRAMMAR = None


def default_grammar() -> Grammar:
    global _DEFAULT_GRAMMAR
    if _DEFAULT_GRAMMAR is None:
        _DEFAULT_GRAMMAR = Grammar.load()
    return _DEFAULT_GRAMMAR


def _lcs_match(pattern, tokens):
    """LCS alignment of pattern atoms to transcript tokens.

    Returns (matched_count, slot_values) where slot_values maps slot name to
    the parsed value of its aligned token.
    """
    np_, nt = len(pattern), len(tokens)
    # value of a match: 1 per atom; slots store their parsed value
    table = [[0] * (nt + 1) for _ in range(np_ + 1)]
    for i in range(np_ - 1, -1, -1):
        kind, arg = pattern[i]
        for j in range(nt - 1, -1, -1):
            ok = tokens[j] == arg if kind == "lit" else _slot_value(arg, tokens[j]) is not None
            best = max(table[i + 1][j], table[i][j + 1])
            if ok:
                best = max(best, 1 + table[i + 1][j + 1])
            table[i][j] = best

    slots = {}
    i = j = 0
    while i < np_ and j < nt:
        kind, arg = pattern[i]
        ok = tokens[j] == arg if kind == "lit" else _slot_value(arg, tokens[j]) is not None
        if ok and table[i][j] == 1 + table[i + 1][j + 1]:
            if kind == "slot":
                slots[arg] = _slot_value(arg, tokens[j])
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return table[0][0], slots


def _extract_selection(tokens, fleet, names):
    """Consume a selection phrase from the token stream, if present.

    Returns (selection, remaining_tokens). Longest phrase at the earliest
    position wins. Plural forms of name words are tolerated.
    """
    phrases = [(("all", "hawks"), model.ALL), (("all",), model.ALL),
               (("everyone",), model.ALL), (("you",), model.DEICTIC)]
    ids = {d.id for d in fleet} if fleet else set()
    for name, drone_id in sorted((names or {}).items(), key=lambda kv: -len(kv[0])):
        if not ids or drone_id in ids:
            phrases.append((tuple(tokenize(name)), frozenset({drone_id})))
    for drone_id in sorted(ids):
        phrases.append(((drone_id,), frozenset({drone_id})))
    phrases.sort(key=lambda p: -len(p[0]))

    def tok_eq(tok, word):
        return tok == word or tok == word + "s" or tok + "s" == word

    for start in range(len(tokens)):
        for phrase, sel in phrases:
            end = start + len(phrase)
            if end <= len(tokens) and all(tok_eq(tokens[start + k], phrase[k]) for k in range(len(phrase))):
                return sel, tokens[:start] + tokens[end:]
    return None, tokens


def _build_command(rule: GrammarRule, slots, selection, confidence, timestamp) -> Optional[Command]:
    verb = Verb(rule.action)
    kw = {}
    if verb is Verb.ROTATE_OCLOCK:
        if "hour" not in slots:
            return None
        kw["hour"] = slots["hour"]
    if verb is Verb.GO:
        if "direction" not in slots:
            return None
        kw["direction"] = slots["direction"]
        if "number" in slots:
            kw["distance"] = slots["number"]
    if verb is Verb.SWITCH and "mode" in slots:
        kw["mode"] = slots["mode"]
    return Command(
        verb=verb,
        selection=selection,
        confidence=confidence,
        source=Source.SPEECH,
        timestamp=timestamp,
        **kw,
    )


def parse(transcript: Transcript, fleet=None, names=None, grammar: Grammar = None,
          min_score: float = MIN_SCORE, nbest: int = 5, timestamp: float = None) -> NBestList:
    """Parse a transcript into an N-best list of commands (and fragments).

    Raises NoParse when nothing beats ``min_score``; the caller drops the
    event and logs the diagnostic.
    """
    grammar = grammar or default_grammar()
    if timestamp is None:
        timestamp = getattr(transcript, "timestamp", 0.0) or 0.0
    asr = transcript.asr_confidence if transcript.asr_confidence is not None else 1.0
    tokens = tokenize(transcript.text)
    if not tokens:
        raise NoParse("empty transcript")

    selection, remaining = _extract_selection(tokens, fleet, names)

    candidates = []  # (score, is_fragment, -matched, rule_idx, interpretation)
    for idx, rule in enumerate(grammar.rules):
        best = None
        for variant in rule.variants:
            matched, slots = _lcs_match(variant, remaining)
            if matched == 0:
                continue
            score = matched / len(variant) * asr
            if rule.kind == "fragment":
                kind = rule.action
                if kind == "distance" and "number" in slots:
                    interp = Fragment("distance", slots["number"], score, timestamp)
                elif kind == "oclock" and "hour" in slots:
                    interp = Fragment("oclock", slots["hour"], score, timestamp)
                else:
                    continue
            else:
                interp = _build_command(rule, slots, selection, min(score, 1.0), timestamp)
                if interp is None:
                    continue
            if best is None or (score, matched) > (best[0], best[1]):
                best = (score, matched, interp)
        if best is not None and best[0] > min_score:
            candidates.append((best[0], rule.kind == "fragment", -best[1], idx, best[2]))

    if not candidates and selection is not None and selection is not model.DEICTIC:
        # a bare selection phrase is itself the selection command
        cmd = Command(verb=Verb.SELECT, selection=selection, confidence=min(asr, 1.0),
                      source=Source.SPEECH, timestamp=timestamp)
        return NBestList((NBestEntry(cmd, cmd.confidence),), nbest)

    if not candidates:
        raise NoParse(f"no rule above {min_score} for {transcript.text!r}")

    candidates.sort(key=lambda c: (-c[0], c[1], c[2], c[3]))
    entries = tuple(NBestEntry(c[4], min(c[0], 1.0)) for c in candidates[:nbest])
    return NBestList(entries, nbest)


def default_parameters(c: Command) -> Command:
    """Fill unspecified motion parameters with the documented defaults."""
    return c.with_defaults()
