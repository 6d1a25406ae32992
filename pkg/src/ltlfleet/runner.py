"""Headless entry points: plan synthesis, full runs, replay checking."""

from __future__ import annotations

import json

from . import ltl, product, tracelog
from .buchi import translate
from .simulation import Simulator
from .workspace import build_cts


def synthesize_plan(scenario, robot_id):
    """Prefix-suffix plan for one robot of a scenario."""
    spec = next((r for r in scenario.robots if r.id == robot_id), None)
    if spec is None:
        raise ValueError(f"no robot with id {robot_id}")
    table = scenario.proposition_table()
    formula = ltl.parse(spec.formula, table)
    nba = translate(ltl.to_nnf(formula))
    start = scenario.workspace.region_of(spec.start[0], spec.start[1]).id
    cts = build_cts(scenario.workspace, start, scenario.connectivity)
    pba = product.build_product(cts, nba)
    return product.find_plan(pba), pba


def plan_to_dict(plan):
    return {
        "prefix": [[q[0], q[1]] for q in plan.prefix],
        "suffix": [[q[0], q[1]] for q in plan.suffix],
    }


def plan_from_dict(data):
    return product.Plan(
        tuple((int(r), int(s)) for r, s in data["prefix"]),
        tuple((int(r), int(s)) for r, s in data["suffix"]),
    )


def run_scenario(scenario, seed=None, ticks=None, human_script=None, collect_trees=False):
    """Synthesize, simulate and summarize; returns (rows, summary, payload)."""
    sim = Simulator(
        scenario, seed=seed, human_script=human_script, collect_trees=collect_trees
    )
    rows = sim.run(ticks)
    summary = tracelog.compute_summary(rows)
    payload = {
        "scenario": scenario.name,
        "seed": sim.seed,
        "plans": {str(a.id): plan_to_dict(a.plan) for a in sim.agents},
        "tasks": {
            str(a.id): {"formula": a.spec.formula, "mode": a.spec.mode}
            for a in sim.agents
        },
    }
    if collect_trees:
        payload["trees"] = sim.tree_dumps
    return rows, summary, payload


def load_human_script(path):
    with open(path) as handle:
        return json.load(handle)


def write_human_script(script, path):
    with open(path, "w") as handle:
        json.dump(script, handle, indent=2, sort_keys=True)
        handle.write("\n")


def replay_summary(log_path):
    rows = tracelog.read_tracelog(log_path)
    return tracelog.compute_summary(rows)
