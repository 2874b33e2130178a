"""Command line interface: batch missions, live server, evaluations."""

from __future__ import annotations

import json
import statistics
import sys
from pathlib import Path

import click
import numpy as np

from . import evaluate, gesture, planning, spline, synth, wire
from .errors import SarhawkError
from .model import WorldModel
from .sim import (
    MissionMetrics,
    OperatorScript,
    ScenarioConfig,
    reference_search_script,
    run_headless,
)
from .sim.metrics import report_text
from .service.session import open_session, read_log, replay_file


def _fail(exc: SarhawkError):
    click.echo(f"error[{type(exc).__name__}]: {exc}", err=True)
    sys.exit(exc.exit_code)


@click.group()
def main():
    """Multimodal multi-drone search-mission toolkit."""


# -- sim ---------------------------------------------------------------------


@main.group()
def sim():
    """Mission simulation."""


@sim.command("run")
@click.option("--scenario", type=click.Path(exists=True), help="scenario JSON file")
@click.option("--script", "script_path", type=click.Path(exists=True), help="operator script (event lines)")
@click.option("--seeds", default="0", show_default=True, help="seed or range like 0:30")
@click.option("--drones", type=int, default=None, help="override drone count")
@click.option("--report", type=click.Path(), default=None, help="write plain-text report here")
@click.option("--json-out", type=click.Path(), default=None, help="write per-run metrics JSONL here")
@click.option("--record", type=click.Path(), default=None, help="record the first run's event log here")
def sim_run(scenario, script_path, seeds, drones, report, json_out, record):
    """Run headless missions over one or more seeds."""
    try:
        base = ScenarioConfig.from_file(scenario) if scenario else ScenarioConfig()
        if drones is not None:
            base.drone_count = drones
            base.names = {}
            base.__post_init__()
        if ":" in seeds:
            lo, hi = seeds.split(":")
            seed_list = list(range(int(lo), int(hi)))
        else:
            seed_list = [int(seeds)]

        runs = []
        for i, seed in enumerate(seed_list):
            cfg = ScenarioConfig.from_dict({**_cfg_dict(base), "seed": seed})
            script = (
                OperatorScript.load(script_path)
                if script_path
                else reference_search_script(cfg)
            )
            script.validate(cfg.deadline_s)
            if record and i == 0:
                session = open_session(cfg, mode="headless")
                session.run(script.events)
                session.save_log(record)
                metrics = session.mission.metrics
            else:
                metrics = run_headless(cfg, script)
            runs.append(metrics)
            click.echo(
                f"seed {seed}: {metrics.detected}/{metrics.victims_total} victims, "
                f"mean ttd {statistics.mean(metrics.time_to_detect):.1f}s"
                if metrics.time_to_detect
                else f"seed {seed}: {metrics.detected}/{metrics.victims_total} victims"
            )

        text = report_text(runs, label=f"{base.drone_count} drones")
        click.echo(text)
        if report:
            Path(report).write_text(text + "\n")
        if json_out:
            with open(json_out, "w") as fh:
                for m in runs:
                    fh.write(wire.dumps(m) + "\n")
    except SarhawkError as exc:
        _fail(exc)


def _cfg_dict(cfg: ScenarioConfig) -> dict:
    return json.loads(json.dumps(wire.to_wire(cfg)))


@sim.command("serve")
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--scenario", type=click.Path(exists=True), default=None)
@click.option("--static", "static_dir", type=click.Path(), default=None,
              help="serve a cockpit build from this directory at /cockpit")
def sim_serve(port, host, scenario, static_dir):
    """Serve live sessions over HTTP + WebSocket."""
    from .service.server import serve

    try:
        cfg = ScenarioConfig.from_file(scenario) if scenario else None
        if static_dir is None and Path("frontend/dist").is_dir():
            static_dir = "frontend/dist"
        serve(port=port, host=host, default_cfg=cfg, static_dir=static_dir)
    except SarhawkError as exc:
        _fail(exc)


# -- gesture -------------------------------------------------------------------


@main.group("gesture")
def gesture_group():
    """Gesture classifier evaluation."""


@gesture_group.command("eval")
@click.option("--train", "train_path", type=click.Path(exists=True), required=True)
@click.option("--test", "test_path", type=click.Path(exists=True), required=True)
@click.option("--emit-confusion", type=click.Path(), default=None)
def gesture_eval(train_path, test_path, emit_confusion):
    """Accuracy of the template classifier on labeled trace corpora."""
    try:
        train = synth.read_corpus(train_path)
        test = synth.read_corpus(test_path)
        acc, confusion = evaluate.gesture_accuracy(train, test)
        click.echo(f"templates={len(train)} probes={len(test)} accuracy={acc:.3f}")
        for label in sorted(confusion):
            row = confusion[label]
            wrong = {k: v for k, v in row.items() if v and k != label}
            line = f"  {label:24} {row.get(label, 0):3d} correct"
            if wrong:
                line += "  misses: " + ", ".join(f"{k}={v}" for k, v in sorted(wrong.items()))
            click.echo(line)
        if emit_confusion:
            Path(emit_confusion).write_text(json.dumps(confusion, indent=2, sort_keys=True))
    except SarhawkError as exc:
        _fail(exc)


@gesture_group.command("synth")
@click.option("--out-train", type=click.Path(), required=True)
@click.option("--out-test", type=click.Path(), required=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--templates", default=10, show_default=True)
@click.option("--probes", default=30, show_default=True)
@click.option("--noise", default=0.05, show_default=True, help="probe noise, fraction of signal RMS")
def gesture_synth(out_train, out_test, seed, templates, probes, noise):
    """Generate a synthetic labeled gesture corpus."""
    train, test = synth.make_corpus(
        seed, templates_per_label=templates, probes_per_label=probes, probe_noise=noise
    )
    synth.write_corpus(out_train, train)
    synth.write_corpus(out_test, test)
    click.echo(f"wrote {len(train)} training and {len(test)} test traces")


# -- fusion ---------------------------------------------------------------------


@main.group("fuse")
def fuse_group():
    """Fusion engine evaluation."""


@fuse_group.command("eval")
@click.option("--paired-corpus", type=click.Path(exists=True), required=True)
def fuse_eval(paired_corpus):
    """Unimodal versus fused top-1 accuracy on a paired corpus."""
    try:
        trials = evaluate.read_paired_corpus(paired_corpus)
        res = evaluate.fusion_study(trials)
        click.echo(
            f"pairs={len(trials)} speech={res['speech']:.3f} "
            f"gesture={res['gesture']:.3f} fused={res['fused']:.3f}"
        )
        gain = res["fused"] - max(res["speech"], res["gesture"])
        click.echo(f"fusion gain over best single channel: {gain:+.3f}")
    except SarhawkError as exc:
        _fail(exc)


@fuse_group.command("synth")
@click.option("--out", type=click.Path(), required=True)
@click.option("--pairs", default=500, show_default=True)
@click.option("--seed", default=11, show_default=True)
@click.option("--corruption", default=0.10, show_default=True)
def fuse_synth(out, pairs, seed, corruption):
    """Generate a paired speech/gesture corpus with channel corruption."""
    trials = evaluate.make_paired_corpus(pairs, seed=seed, corruption=corruption)
    evaluate.write_paired_corpus(out, trials)
    click.echo(f"wrote {len(trials)} paired trials")


# -- planning ----------------------------------------------------------------------


@main.command("plan")
@click.argument("subcommand", type=click.Choice(["demo"]))
@click.option("--world", "world_path", type=click.Path(exists=True), default=None)
@click.option("--start", default="5,5,10")
@click.option("--goal", default="100,100,20")
@click.option("--iterations", default=4000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--export-samples", type=click.Path(), default=None,
              help="CSV of t,x,y,z,vx,vy,vz,ax,ay,az along the trajectory")
def plan_demo(subcommand, world_path, start, goal, iterations, seed, export_samples):
    """Plan a path, build its trajectory, optionally export samples."""
    try:
        if world_path:
            records = wire.load_lines(world_path)
            worlds = [r for r in records if isinstance(r, WorldModel)]
            if not worlds:
                raise SarhawkError(f"{world_path} contains no world record")
            world = worlds[0]
        else:
            world = WorldModel(0, 120, 0, 120, 60)
        p0 = tuple(float(c) for c in start.split(","))
        p1 = tuple(float(c) for c in goal.split(","))
        path = planning.plan_path(
            p0, p1, world, planning.PlanConfig(iterations=iterations, seed=seed)
        )
        click.echo(f"path: {len(path.waypoints)} waypoints, cost {path.cost:.2f} m")
        traj = spline.build_trajectory(path)
        click.echo(f"trajectory: {len(traj.segments)} segments, {traj.duration:.1f} s")
        if export_samples:
            times, pos, vel, acc = traj.sample(0.05)
            with open(export_samples, "w") as fh:
                fh.write("t,x,y,z,vx,vy,vz,ax,ay,az\n")
                for i, t in enumerate(times):
                    row = [t, *pos[i], *vel[i], *acc[i]]
                    fh.write(",".join(f"{v:.6f}" for v in row) + "\n")
            click.echo(f"samples written to {export_samples}")
    except SarhawkError as exc:
        _fail(exc)


# -- traces -------------------------------------------------------------------------


@main.group("trace")
def trace_group():
    """Session log tools."""


@trace_group.command("replay")
@click.argument("log_path", type=click.Path(exists=True))
@click.option("--verify/--no-verify", default=True, show_default=True,
              help="check the replayed log is byte-identical")
@click.option("--save", type=click.Path(), default=None, help="write the replayed log here")
def trace_replay(log_path, verify, save):
    """Replay a recorded session log deterministically."""
    try:
        session = replay_file(log_path)
        m = session.mission.metrics
        click.echo(
            f"replayed {len(session.log)} events, clock {session.mission.clock:.2f}s, "
            f"victims {m.detected}/{m.victims_total}"
        )
        if verify:
            _cfg, _sid, _ticks, original = read_log(log_path)
            ours = [wire.dumps(e) for e in session.log]
            theirs = [wire.dumps(e) for e in original]
            if ours != theirs:
                first = next(
                    (i for i, (a, b) in enumerate(zip(ours, theirs)) if a != b),
                    min(len(ours), len(theirs)),
                )
                raise SarhawkError(f"replay diverged at log entry {first}")
            click.echo("replay is byte-identical to the recording")
        if save:
            session.save_log(save)
    except SarhawkError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
