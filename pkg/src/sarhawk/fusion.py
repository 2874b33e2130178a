"""Late fusion of speech, gesture, and pointing channels.

The first active channel opens a sync window (about one second); anything
arriving inside it is fused with the anchor. Contextual rules either combine
compatible interpretations (direction gesture + spoken distance) or pick a
winner for conflicting ones; without an applicable rule the interpretation
with the maximum confidence is selected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Optional

import numpy as np

from . import model
from .errors import AboveHorizon
from .model import (
    Command,
    Fragment,
    NBestEntry,
    NBestList,
    PointingRay,
    Source,
    Verb,
    WorldModel,
)


@dataclass(frozen=True)
class ChannelEvent:
    channel: Source
    nbest: NBestList
    start: float
    end: float

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError("event ends before it starts")
        if not self.nbest:
            raise ValueError("empty N-best")


@dataclass(frozen=True)
class CombineRule:
    command_verbs: frozenset  # verb values; {"*"} matches any
    fragment: str
    fill: str
    result_verb: Optional[Verb] = None

    def matches(self, cmd: Command, frag: Fragment) -> bool:
        if frag.kind != self.fragment:
            return False
        if "*" in self.command_verbs:
            # the wildcard selection rule only fills a missing selection
            if self.fill == "selection":
                return cmd.selection is None or cmd.selection == model.DEICTIC
            return True
        return cmd.verb.value in self.command_verbs


@dataclass(frozen=True)
class DisambiguateRule:
    winner: str  # verb value
    loser: str   # verb value or "*"

    def matches(self, a: Verb, b: Verb):
        """Returns "a" or "b" when the rule decides this conflict."""
        if a.value == self.winner and (self.loser == "*" or b.value == self.loser):
            return "a"
        if b.value == self.winner and (self.loser == "*" or a.value == self.loser):
            return "b"
        return None


@dataclass
class FusionRules:
    combine: list
    disambiguate: list
    window_s: float = 1.0
    reinforce_bonus: float = 0.1

    @staticmethod
    def load(path=None) -> "FusionRules":
        if path is None:
            text = resources.files("sarhawk.data").joinpath("fusion_rules.json").read_text()
        else:
            with open(path) as fh:
                text = fh.read()
        raw = json.loads(text)
        combine = [
            CombineRule(
                command_verbs=frozenset(r["command_verbs"]),
                fragment=r["fragment"],
                fill=r["fill"],
                result_verb=Verb(r["result_verb"]) if r.get("result_verb") else None,
            )
            for r in raw.get("combine", [])
        ]
        disambiguate = [
            DisambiguateRule(r["winner"], r.get("loser", "*"))
            for r in raw.get("disambiguate", [])
        ]
        rules = FusionRules(
            combine,
            disambiguate,
            window_s=raw.get("window_s", 1.0),
            reinforce_bonus=raw.get("reinforce_bonus", 0.1),
        )
        rules.validate()
        return rules

    def validate(self):
        """Rule application must not depend on order: no pair of rules may
        trigger on the same (command, fragment) or verb conflict."""
        for i, a in enumerate(self.combine):
            for b in self.combine[i + 1:]:
                if a.fragment != b.fragment:
                    continue
                overlap = (
                    "*" in a.command_verbs
                    or "*" in b.command_verbs
                    or a.command_verbs & b.command_verbs
                )
                if overlap:
                    raise ValueError(
                        f"combine rules overlap on fragment {a.fragment!r}"
                    )
        for i, a in enumerate(self.disambiguate):
            for b in self.disambiguate[i + 1:]:
                if a.winner == b.winner or "*" in (a.loser, b.loser) or a.loser == b.loser:
                    raise ValueError("disambiguate rules overlap")


_DEFAULT_RULES = None


def default_rules() -> FusionRules:
    global _DEFAULT_RULES
    if _DEFAULT_RULES is None:
        _DEFAULT_RULES = FusionRules.load()
    return _DEFAULT_RULES


def resolve_deictic(ray: PointingRay, world: WorldModel) -> tuple:
    """Ground point the operator is pointing at, clamped to world bounds."""
    ox, oy, oz = ray.origin
    dx, dy, dz = ray.direction
    if not all(math.isfinite(c) for c in (dx, dy, dz)):
        raise ValueError("non-finite pointing direction")
    if dz >= 0:
        raise AboveHorizon("pointing ray never meets the ground")
    t = -oz / dz
    p = world.clamp((ox + t * dx, oy + t * dy, 0.0))
    return (float(p[0]), float(p[1]), 0.0)


def pointing_event(ray: PointingRay, timestamp: float, fleet=None, world=None,
                   cone_half_angle_deg=model.DEFAULT_CONE_HALF_ANGLE_DEG) -> Optional[ChannelEvent]:
    """Interpret a pointing ray as an N-best of deictic fragments.

    A drone inside the cone yields a selection fragment (closer axis =
    higher score); a downward ray yields a ground-target fragment.
    """
    entries = []
    if fleet:
        try:
            sel = model.resolve_selection(ray, fleet, cone_half_angle_deg=cone_half_angle_deg)
            entries.append(NBestEntry(Fragment("selection", sel, 0.9, timestamp), 0.9))
        except model.NoMatch:
            pass
        except Exception:
            raise
    if world is not None:
        try:
            point = resolve_deictic(ray, world)
            entries.append(NBestEntry(Fragment("point", point, 0.7, timestamp), 0.7))
        except AboveHorizon:
            pass
    if not entries:
        return None
    return ChannelEvent(Source.POINTING, NBestList(tuple(entries)), timestamp, timestamp)


def _merge_selection(a, b):
    for sel in (a, b):
        if sel is not None and sel != model.DEICTIC:
            return sel
    return a if a is not None else b


def fuse(a: ChannelEvent, b: ChannelEvent, rules: FusionRules = None):
    """Fuse two synchronized channel events into one command.

    Returns (command_or_None, how) where how is one of "combine",
    "reinforce", "disambiguate", "max"; None means the pair carried no
    executable interpretation (two bare fragments).
    """
    rules = rules or default_rules()

    # combine rules: scan command/fragment pairs, best joint score first
    pairs = []
    for ea in a.nbest.entries:
        for eb in b.nbest.entries:
            for cmd_e, frag_e in ((ea, eb), (eb, ea)):
                if isinstance(cmd_e.interpretation, Command) and isinstance(
                    frag_e.interpretation, Fragment
                ):
                    pairs.append((cmd_e.score * frag_e.score, cmd_e, frag_e))
    pairs.sort(key=lambda p: -p[0])
    for _joint, cmd_e, frag_e in pairs:
        cmd, frag = cmd_e.interpretation, frag_e.interpretation
        for rule in rules.combine:
            if rule.matches(cmd, frag):
                kw = {rule.fill: frag.value}
                if rule.result_verb is not None:
                    kw["verb"] = rule.result_verb
                    kw["angle"] = None
                fused = replace(
                    cmd,
                    confidence=min(1.0, (cmd_e.score + frag_e.score) / 2.0),
                    source=Source.FUSED,
                    timestamp=max(a.start, b.start),
                    **kw,
                )
                return fused, "combine"

    top_a, top_b = a.nbest.top(), b.nbest.top()
    ia, ib = top_a.interpretation, top_b.interpretation

    if isinstance(ia, Command) and isinstance(ib, Command):
        if ia.same_intent(ib):
            conf = min(1.0, max(top_a.score, top_b.score) + rules.reinforce_bonus)
            fused = replace(
                ia,
                confidence=conf,
                source=Source.FUSED,
                selection=_merge_selection(ia.selection, ib.selection),
                distance=ia.distance if ia.distance is not None else ib.distance,
                timestamp=max(a.start, b.start),
            )
            return fused, "reinforce"
        for rule in rules.disambiguate:
            side = rule.matches(ia.verb, ib.verb)
            if side is not None:
                winner = ia if side == "a" else ib
                return replace(winner, source=Source.FUSED), "disambiguate"

    # maximum confidence wins; exact ties go to the speech channel
    cands = []
    for ev, entry in ((a, top_a), (b, top_b)):
        if isinstance(entry.interpretation, Command):
            speech_first = 0 if ev.channel == Source.SPEECH else 1
            cands.append((-entry.score, speech_first, entry.interpretation))
    if not cands:
        return None, "max"
    cands.sort(key=lambda c: (c[0], c[1]))
    winner = cands[0][2]
    return replace(winner, source=Source.FUSED), "max"


@dataclass
class FusionEngine:
    """Single-consumer fusion loop; events must arrive in timestamp order.

    ``ingest`` may emit commands (window close + fuse); ``poll`` flushes a
    pending window past its timeout. Dropped inputs are recorded in
    ``diagnostics``.
    """

    rules: FusionRules = field(default_factory=default_rules)
    window_s: Optional[float] = None
    pending: Optional[ChannelEvent] = None
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        if self.window_s is None:
            self.window_s = self.rules.window_s

    def _emit_single(self, event: ChannelEvent) -> Optional[Command]:
        top = event.nbest.top().interpretation
        if isinstance(top, Command):
            return top
        self.diagnostics.append(
            f"t={event.start:.3f} lone {event.channel.value} fragment dropped"
        )
        return None

    def ingest(self, event: ChannelEvent) -> list:
        out = []
        if self.pending is not None and event.start - self.pending.start > self.window_s:
            done = self._emit_single(self.pending)
            self.pending = None
            if done is not None:
                out.append(done)
        if self.pending is None:
            self.pending = event
            return out
        fused, how = fuse(self.pending, event, self.rules)
        self.pending = None
        if fused is None:
            self.diagnostics.append(
                f"t={event.start:.3f} incompatible fragments dropped ({how})"
            )
        else:
            out.append(fused)
        return out

    def poll(self, now: float) -> list:
        if self.pending is not None and now - self.pending.start >= self.window_s:
            done = self._emit_single(self.pending)
            self.pending = None
            return [done] if done is not None else []
        return []
