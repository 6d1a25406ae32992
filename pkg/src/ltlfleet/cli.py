"""Command line interface: plan, simulate, serve, replay, check."""

from __future__ import annotations

import argparse
import json
import sys

from . import runner, tracelog
from .product import InfeasibleTaskError
from .scenario import ScenarioError, load_scenario


def _cmd_plan(args):
    scenario = load_scenario(args.scenario)
    try:
        plan, _ = runner.synthesize_plan(scenario, args.robot)
    except InfeasibleTaskError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    payload = {"robot": args.robot, "scenario": scenario.name}
    payload.update(runner.plan_to_dict(plan))
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_simulate(args):
    scenario = load_scenario(args.scenario)
    script = runner.load_human_script(args.human_script) if args.human_script else None
    try:
        rows, summary, payload = runner.run_scenario(
            scenario,
            seed=args.seed,
            ticks=args.ticks,
            human_script=script,
            collect_trees=bool(args.trees),
        )
    except InfeasibleTaskError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    if args.log:
        tracelog.write_tracelog(rows, args.log)
    if args.summary:
        tracelog.write_summary(summary, payload, args.summary)
    if args.trees:
        with open(args.trees, "w") as handle:
            json.dump(payload.get("trees", []), handle, indent=2)
            handle.write("\n")
    print(
        f"{scenario.name}: ticks={summary.ticks} conflicts={summary.conflicts} "
        f"replans={summary.replans} collisions={summary.collisions}"
    )
    return 0


def _cmd_serve(args):
    from .server import serve  # imported lazily: pulls in fastapi/uvicorn

    scenario = load_scenario(args.scenario)
    serve(
        scenario,
        port=args.port,
        host=args.host,
        seed=args.seed,
        rate=args.rate,
        log_path=args.log,
        inputs_path=args.inputs,
        once=args.once,
        autostart=args.autostart,
    )
    return 0


def _cmd_replay(args):
    summary = runner.replay_summary(args.log)
    sys.stdout.write(
        json.dumps({"stats": summary.to_dict()}, indent=2, sort_keys=True) + "\n"
    )
    return 0


def _cmd_check(args):
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    print(
        f"ok: {scenario.name} ({len(scenario.robots)} robots, "
        f"{scenario.workspace.n_regions} regions, {len(scenario.obstacles)} obstacles)"
    )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="ltlfleet")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="synthesize one robot's prefix-suffix plan")
    p.add_argument("--scenario", required=True)
    p.add_argument("--robot", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("simulate", help="run a scenario headless")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ticks", type=int, default=None)
    p.add_argument("--log")
    p.add_argument("--summary")
    p.add_argument("--human-script", dest="human_script")
    p.add_argument("--trees", help="dump every local replanning tree here (JSON)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("serve", help="host a live session for the teleop client")
    p.add_argument("--scenario", required=True)
    p.add_argument("--port", type=int, default=8710)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--rate", type=float, default=10.0, help="ticks per second")
    p.add_argument("--log")
    p.add_argument("--inputs", help="record accepted human input frames here")
    p.add_argument("--once", action="store_true", help="exit when the tick budget ends")
    p.add_argument("--autostart", action="store_true", help="begin running instead of paused")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("replay", help="re-derive the summary from a trace log")
    p.add_argument("--log", required=True)
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("check", help="validate a scenario file")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=_cmd_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
