"""Batch evaluation: classifier accuracy and paired-channel fusion studies."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import fusion, gesture, wire
from .errors import CorruptTrace
from .model import NBestEntry, NBestList, Source


def gesture_accuracy(train, test, cfg: gesture.GestureConfig = None):
    """Train a template set and classify a labeled test corpus.

    Returns (accuracy, confusion) with confusion[true][predicted] counts.
    """
    labels = sorted({label for label, _ in train})
    ts = gesture.TrainingSet(m=(cfg.m if cfg else 32))
    for label, trace in train:
        ts = gesture.add_template(ts, trace, label)
    cfg = cfg or gesture.GestureConfig(m=ts.m)

    confusion = {t: {p: 0 for p in labels} for t in labels}
    correct = 0
    for label, trace in test:
        predicted = gesture.classify(trace, ts, cfg).top().interpretation
        confusion[label][predicted] = confusion[label].get(predicted, 0) + 1
        if predicted == label:
            correct += 1
    return (correct / len(test) if test else float("nan")), confusion


def brute_force_label(trace, ts: gesture.TrainingSet, cfg: gesture.GestureConfig):
    """Independent oracle: plain nearest-template search, no slide variants,
    no re-rank, no shared scoring kernel."""
    points = gesture.preprocess(trace, cfg)
    best_label, best_score = None, None
    for tpl in ts.templates:
        s = 0.0
        for i in range(len(points)):
            dx = points[i][0] - tpl.points[i][0]
            dy = points[i][1] - tpl.points[i][1]
            dz = points[i][2] - tpl.points[i][2]
            s += dx * dx + dy * dy + dz * dz
        s = s**0.5
        if best_score is None or s < best_score or (s == best_score and tpl.label < best_label):
            best_label, best_score = tpl.label, s
    return best_label


# ---------------------------------------------------------------------------
# Paired speech/gesture corpus with independent channel corruption


@dataclass(frozen=True)
class PairedTrial:
    true_label: str
    speech: NBestList
    gesture: NBestList
    t: float


def _channel_nbest(true_label, corrupted, rng, source, t, labels):
    """Top-1 is wrong with the channel's corruption flag; the correct label
    stays in the list at a lower score, as a real N-best would have it."""
    if corrupted:
        wrong = labels[int(rng.integers(0, len(labels) - 1))]
        if wrong == true_label:
            wrong = labels[-1] if true_label != labels[-1] else labels[0]
        top, top_conf = wrong, float(rng.uniform(0.45, 0.75))
        second, second_conf = true_label, top_conf * 0.8
    else:
        top, top_conf = true_label, float(rng.uniform(0.70, 0.95))
        wrong = labels[int(rng.integers(0, len(labels) - 1))]
        if wrong == true_label:
            wrong = labels[-1] if true_label != labels[-1] else labels[0]
        second, second_conf = wrong, top_conf * float(rng.uniform(0.4, 0.8))
    entries = tuple(
        NBestEntry(gesture.label_to_command(lbl, conf, t), conf)
        for lbl, conf in ((top, top_conf), (second, second_conf))
    )
    return NBestList(entries)


def make_paired_corpus(n_pairs: int, seed: int, corruption: float = 0.10,
                       labels=gesture.GESTURE_LABELS):
    """Paired observations of one true command on both channels, each
    channel independently corrupted with the given probability."""
    rng = np.random.default_rng(seed)
    labels = list(labels)
    trials = []
    for i in range(n_pairs):
        true_label = labels[int(rng.integers(0, len(labels)))]
        t = float(i * 10.0)
        s_bad = bool(rng.random() < corruption)
        g_bad = bool(rng.random() < corruption)
        trials.append(
            PairedTrial(
                true_label,
                _channel_nbest(true_label, s_bad, rng, Source.SPEECH, t, labels),
                _channel_nbest(true_label, g_bad, rng, Source.GESTURE, t + 0.3, labels),
                t,
            )
        )
    return trials


def _verb_key(cmd):
    return (cmd.verb.value, cmd.direction)


def fusion_study(trials, rules: fusion.FusionRules = None):
    """Top-1 accuracy of each channel alone versus the fused decision."""
    rules = rules or fusion.default_rules()
    hits = {"speech": 0, "gesture": 0, "fused": 0}
    for trial in trials:
        want = _verb_key(gesture.label_to_command(trial.true_label, 1.0, 0.0))
        if _verb_key(trial.speech.top().interpretation) == want:
            hits["speech"] += 1
        if _verb_key(trial.gesture.top().interpretation) == want:
            hits["gesture"] += 1
        a = fusion.ChannelEvent(Source.SPEECH, trial.speech, trial.t, trial.t)
        b = fusion.ChannelEvent(Source.GESTURE, trial.gesture, trial.t + 0.3, trial.t + 0.3)
        fused, _how = fusion.fuse(a, b, rules)
        if fused is not None and _verb_key(fused) == want:
            hits["fused"] += 1
    n = len(trials)
    return {k: v / n for k, v in hits.items()}


def write_paired_corpus(path, trials):
    with open(path, "w") as fh:
        for tr in trials:
            rec = {
                "true_label": tr.true_label,
                "speech": wire.to_wire(tr.speech),
                "gesture": wire.to_wire(tr.gesture),
                "t": tr.t,
            }
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def read_paired_corpus(path):
    trials = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                trials.append(
                    PairedTrial(
                        rec["true_label"],
                        wire.from_wire(rec["speech"]),
                        wire.from_wire(rec["gesture"]),
                        rec["t"],
                    )
                )
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise CorruptTrace(str(exc), offset=lineno) from exc
    return trials
