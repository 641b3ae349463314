"""Smart exploration: direct launch, state fuzzing, exhaustive per-activity
exploration, indirect launching, re-queue, and the ATG-growth stop rule."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

from . import identity
from .errors import DriverError, SelectorNotFound
from .graphs import ActivityEdge, ActivityGraph, EdgeOrigin, EventKind, SceneEdge, SceneGraph, stats
from .icc import build_icc, direct_launch, value_for_input_type
from .layout import ComponentNode, ComponentTree, Selector, find_clickable, match_component, parse_hierarchy_dump


@dataclass
class ExplorationConfig:
    analysis_timeout: float = 900.0
    dynamic_timeout: float = 1800.0
    rng_seed: int = 0
    fuzz_component_cap: int = 6
    enable_fuzzing: bool = True
    enable_indirect: bool = True
    enable_scene_id: bool = True
    max_depth_per_activity: int = 20

    def __post_init__(self):
        if self.analysis_timeout <= 0 or self.dynamic_timeout <= 0:
            raise ValueError("timeouts must be positive")
        if self.fuzz_component_cap < 0:
            raise ValueError("fuzz_component_cap must be >= 0")

    def to_json(self) -> dict:
        return {
            "analysis_timeout": self.analysis_timeout,
            "dynamic_timeout": self.dynamic_timeout,
            "rng_seed": self.rng_seed,
            "fuzz_component_cap": self.fuzz_component_cap,
            "enable_fuzzing": self.enable_fuzzing,
            "enable_indirect": self.enable_indirect,
            "enable_scene_id": self.enable_scene_id,
            "max_depth_per_activity": self.max_depth_per_activity,
        }


class NonTransitiveKind(str, Enum):
    EDIT_TEXT = "EDIT_TEXT"
    CHECKBOX = "CHECKBOX"
    SWITCH = "SWITCH"


# Class simple-name suffixes covering support-library variants.
_NON_TRANSITIVE_SUFFIXES = (
    ("EditText", NonTransitiveKind.EDIT_TEXT),
    ("CheckBox", NonTransitiveKind.CHECKBOX),
    ("SwitchCompat", NonTransitiveKind.SWITCH),
    ("Switch", NonTransitiveKind.SWITCH),
    ("ToggleButton", NonTransitiveKind.SWITCH),
)


def non_transitive_kind(widget_class: str) -> Optional[NonTransitiveKind]:
    simple = widget_class.rsplit(".", 1)[-1]
    for suffix, kind in _NON_TRANSITIVE_SUFFIXES:
        if simple.endswith(suffix):
            return kind
    return None


def _selector_for(node: ComponentNode) -> Selector:
    if node.resource_id:
        return Selector(resource_id=node.resource_id)
    return Selector(widget_class=node.widget_class, bounds=node.bounds)


def fuzz_assignments(
    tree: ComponentTree,
    config: ExplorationConfig,
    target_package: str,
    input_type_lookup: Optional[Callable[[Selector], Optional[str]]] = None,
) -> list[list[tuple[Selector, NonTransitiveKind, object]]]:
    """All 2^k widget-state combinations over the page's non-transitive components.

    Components are taken in BFS order; beyond the cap they stay pinned at their
    defaults. Assignment order is binary counting with the first component as
    the most significant bit, so assignment 0 is all-defaults.
    """
    from .layout import bfs_nodes

    targets = []
    for node in bfs_nodes(tree, target_package):
        kind = non_transitive_kind(node.widget_class)
        if kind is not None:
            targets.append((node, kind))
    targets = targets[: config.fuzz_component_cap]
    k = len(targets)
    assignments = []
    for bits in range(2 ** k):
        assignment = []
        for j, (node, kind) in enumerate(targets):
            on = bool((bits >> (k - 1 - j)) & 1)
            selector = _selector_for(node)
            if kind is NonTransitiveKind.EDIT_TEXT:
                if on:
                    itype = input_type_lookup(selector) if input_type_lookup else None
                    value = value_for_input_type(itype or "text", config.rng_seed, salt=node.resource_id)
                else:
                    value = ""
                assignment.append((selector, kind, value))
            else:
                assignment.append((selector, kind, on))
        assignments.append(assignment)
    return assignments


def apply_assignment(driver, assignment, target_package: str):
    """Drive the page into the requested widget states.

    Returns (events, missing): `events` is the (kind, selector, value) list of
    actions actually issued (no-ops skipped), `missing` the selectors that
    matched nothing; missing entries never abort the rest of the assignment.
    """
    events = []
    missing = []
    for selector, kind, value in assignment:
        raw, activity = driver.current_dump()
        tree = parse_hierarchy_dump(raw, activity)
        node = match_component(tree, selector)
        if node is None:
            missing.append(selector)
            continue
        if kind is NonTransitiveKind.EDIT_TEXT:
            if node.text != value:
                driver.set_text(selector, value)
                events.append((EventKind.SET_TEXT, selector, value))
        else:
            if node.checked != bool(value):
                driver.toggle(selector)
                events.append((EventKind.TOGGLE, selector, None))
    return events, missing


class ExplorationTimeout(Exception):
    pass


@dataclass
class _RunCtx:
    activity: str
    run_id: str
    assignment: list
    expanded: set = field(default_factory=set)


@dataclass
class ExplorationResult:
    scenetg: SceneGraph
    atg: ActivityGraph
    report: dict
    trace: list[dict]
    paths: dict[str, list]


class Explorer:
    """One exploration session over one driver; strictly sequential."""

    def __init__(self, model, driver, config: ExplorationConfig, out_dir=None):
        self.model = model
        self.driver = driver
        self.config = config
        self.out_dir = Path(out_dir) if out_dir else None
        self.package = model.package
        self.scenetg = SceneGraph()
        self.atg = ActivityGraph()
        self.trace: list[dict] = []
        self.paths: dict[str, list] = {}
        self.step = 0
        self.failed_direct: set[str] = set()
        self.launch_methods: dict[str, tuple] = {}
        self.outcomes: dict[str, dict] = {}
        self._deadline = None
        for caller, callee, event, component in model.seed_atg:
            selector = Selector(resource_id=f"{self.package}:id/{component}")
            self.atg.add_edge(
                ActivityEdge(caller, callee, EventKind(event), selector), EdgeOrigin.SEED
            )

    # -- bookkeeping ---------------------------------------------------------

    def _check_timeout(self):
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise ExplorationTimeout()

    def _record(self, action: str, activity: str = "", scene_id: str = "", selector: str = "", outcome: str = ""):
        self.step += 1
        self.trace.append(
            {
                "step": self.step,
                "activity": activity,
                "scene_id": scene_id,
                "action": action,
                "selector": selector,
                "outcome": outcome,
            }
        )

    def _state_key(self, tree: ComponentTree, raw: str) -> str:
        if self.config.enable_scene_id:
            return identity.scene_id(tree, self.package)
        return identity.raw_state_id(raw)

    def _record_scene(self, tree: ComponentTree, raw: str, path: list) -> str:
        sid = self._state_key(tree, raw)
        if sid in self.scenetg.nodes:
            return sid
        layout_ref = f"layouts/{sid}.xml"
        if self.out_dir:
            layout_path = self.out_dir / layout_ref
            layout_path.parent.mkdir(parents=True, exist_ok=True)
            layout_path.write_text(raw, encoding="utf-8")
        shot = self.driver.screenshot_ref()
        self.scenetg.add_node(sid, tree.source_activity, layout_ref, shot)
        self.paths[sid] = [[event.value, selector.describe()] for event, selector, _ in path]
        self._record("discover", tree.source_activity, sid, outcome="new scene")
        return sid

    def _current_tree(self) -> tuple[ComponentTree, str, str]:
        raw, activity = self.driver.current_dump()
        tree = parse_hierarchy_dump(raw, activity)
        return tree, raw, activity

    # -- launching -----------------------------------------------------------

    def _try_direct(self, act) -> bool:
        icc = build_icc(act, self.config.rng_seed)
        result = direct_launch(self.driver, icc)
        self._record("launch", act.name, selector="", outcome=result.reason.value)
        if result.success:
            self.launch_methods[act.name] = ("direct", icc)
            self.failed_direct.discard(act.name)
            return True
        self.failed_direct.add(act.name)
        return False

    def _relaunch(self, act_name: str) -> bool:
        method = self.launch_methods.get(act_name)
        if method is None:
            return False
        kind, payload = method
        if kind == "direct":
            result = direct_launch(self.driver, payload)
            return result.success
        return self._launch_via_chain(payload)

    def _launch_via_chain(self, chain: list[str]) -> bool:
        head = self.model.activity(chain[0])
        if head is None or not self._try_direct(head):
            return False
        tree, raw, _ = self._current_tree()
        src_sid = self._record_scene(tree, raw, [])
        for a, b in zip(chain, chain[1:]):
            self._check_timeout()
            event, component = self.atg.edge_action(a, b)
            tree, raw, activity = self._current_tree()
            if match_component(tree, component) is None:
                self._record("replay", activity, src_sid, component.describe(), "component missing")
                return False
            self.driver.tap(component)
            ntree, nraw, nact = self._current_tree()
            self._record("tap", activity, src_sid, component.describe(), f"replay -> {nact}")
            if nact != b:
                return False
            dst_sid = self._record_scene(ntree, nraw, [])
            self.atg.add_edge(ActivityEdge(a, b, event, component))
            self.scenetg.add_edge(SceneEdge(src_sid, dst_sid, event, component))
            src_sid = dst_sid
        return True

    def _indirect_launch(self, target: str) -> Optional[list[str]]:
        """Try caller chains from the latest ATG; returns the successful chain."""

        def launchable(name: str) -> bool:
            act = self.model.activity(name)
            return act is not None and name not in self.failed_direct

        # A failed chain head lands in failed_direct, which lengthens the
        # candidate chains on the next pass, so recompute until exhausted.
        tried: set[tuple[str, ...]] = set()
        while True:
            chains = [
                c for c in self.atg.caller_chains(target, launchable) if tuple(c) not in tried
            ]
            if not chains:
                return None
            chain = chains[0]  # [head, ..., target]
            tried.add(tuple(chain))
            self._check_timeout()
            if self._launch_via_chain(chain):
                self._record("indirect", target, outcome="via " + " -> ".join(chain))
                return chain

    # -- exploration ---------------------------------------------------------

    def _explore_act(self, act) -> None:
        tree, raw, _ = self._current_tree()
        if self.config.enable_fuzzing:
            assignments = fuzz_assignments(
                tree, self.config, self.package, input_type_lookup=self._input_type_of
            )
        else:
            assignments = [[]]
        for idx, assignment in enumerate(assignments):
            self._check_timeout()
            if idx > 0 and not self._relaunch(act.name):
                self._record("relaunch", act.name, outcome="failed; remaining assignments skipped")
                break
            events, missing = self._apply_assignment(act.name, assignment)
            for selector in missing:
                self._record("fuzz", act.name, selector=selector.describe(), outcome="selector missing")
            run = _RunCtx(activity=act.name, run_id=f"{act.name}#{idx}", assignment=assignment)
            try:
                self._explore_scene(run, depth=0, path=list(events))
            except (DriverError, SelectorNotFound) as exc:
                self._record("abort", act.name, outcome=f"driver error: {exc}")
                self.outcomes.setdefault(act.name, {}).setdefault("notes", []).append(str(exc))
                break

    def _input_type_of(self, selector: Selector):
        lookup = getattr(self.driver, "input_type_of", None)
        return lookup(selector) if lookup else None

    def _apply_assignment(self, act_name: str, assignment):
        events, missing = apply_assignment(self.driver, assignment, self.package)
        for event, selector, value in events:
            self._record(event.value.lower(), act_name, selector=selector.describe(), outcome="fuzz")
        return events, missing

    def _explore_scene(self, run: _RunCtx, depth: int, path: list) -> None:
        tree, raw, activity = self._current_tree()
        sid = self._record_scene(tree, raw, path)
        if sid in run.expanded or depth >= self.config.max_depth_per_activity:
            return
        run.expanded.add(sid)
        self._record("expand", activity, sid, outcome=f"run={run.run_id}")
        for node in find_clickable(tree, self.package):
            self._check_timeout()
            selector = _selector_for(node)
            self.driver.tap(selector)
            ntree, nraw, nact = self._current_tree()
            if nact != activity:
                nsid = self._record_scene(ntree, nraw, [])
                self.atg.add_edge(ActivityEdge(activity, nact, EventKind.TAP, selector))
                self.scenetg.add_edge(SceneEdge(sid, nsid, EventKind.TAP, selector))
                self._record("tap", activity, sid, selector.describe(), f"activity -> {nact}")
                self._restore(run, activity, sid, path)
            else:
                nsid = self._state_key(ntree, nraw)
                if nsid == sid:
                    self._record("tap", activity, sid, selector.describe(), "no scene change")
                    continue
                step = (EventKind.TAP, selector, None)
                self._record_scene(ntree, nraw, path + [step])
                self.scenetg.add_edge(SceneEdge(sid, nsid, EventKind.TAP, selector))
                self._record("tap", activity, sid, selector.describe(), f"scene -> {nsid[:8]}")
                self._explore_scene(run, depth + 1, path + [step])
                self._restore(run, activity, sid, path)

    def _restore(self, run: _RunCtx, act_name: str, sid: str, path: list) -> None:
        """Back-press until the source scene is observed; relaunch-and-replay otherwise."""
        for _ in range(self.config.max_depth_per_activity + 2):
            if not getattr(self.driver, "running", True):
                break
            tree, raw, activity = self._current_tree()
            if activity == act_name and self._state_key(tree, raw) == sid:
                return
            self.driver.press_back()
            self._record("back", activity, outcome="rollback")
        if not self._relaunch(act_name):
            raise DriverError(f"cannot restore {act_name}: relaunch failed")
        self._apply_assignment(act_name, run.assignment)
        for event, selector, value in path:
            if event is EventKind.TAP:
                self.driver.tap(selector)
            elif event is EventKind.SET_TEXT:
                self.driver.set_text(selector, value)
            elif event is EventKind.TOGGLE:
                self.driver.toggle(selector)
            self._record(event.value.lower(), act_name, selector=selector.describe(), outcome="replay")
        tree, raw, activity = self._current_tree()
        if activity != act_name or self._state_key(tree, raw) != sid:
            raise DriverError(f"cannot restore scene {sid[:8]} of {act_name}")

    # -- top level (the smart dynamic analysis loop) --------------------------

    def explore(self) -> ExplorationResult:
        config = self.config
        start = time.monotonic()
        self._deadline = start + config.dynamic_timeout
        remaining = list(self.model.activities)
        rounds = 0
        partial = False
        try:
            while remaining:
                rounds += 1
                mark = self.atg.mark()
                next_round = []
                for act in remaining:
                    self._check_timeout()
                    if self._try_direct(act):
                        self._explore_act(act)
                        self.outcomes.setdefault(act.name, {})["outcome"] = "DIRECT"
                        continue
                    if not config.enable_indirect:
                        self.outcomes.setdefault(act.name, {})["outcome"] = "FAILED"
                        continue
                    chain = self._indirect_launch(act.name)
                    if chain:
                        self.launch_methods[act.name] = ("chain", chain)
                        self._explore_act(act)
                        entry = self.outcomes.setdefault(act.name, {})
                        entry["outcome"] = "INDIRECT"
                        entry["chain"] = chain
                    else:
                        entry = self.outcomes.setdefault(act.name, {})
                        entry["attempts"] = entry.get("attempts", 0) + 1
                        next_round.append(act)
                # Stop rule: re-launch failures only while the ATG kept growing.
                if next_round and self.atg.augmented_since(mark):
                    remaining = next_round
                else:
                    for act in next_round:
                        self.outcomes.setdefault(act.name, {})["outcome"] = "FAILED"
                    remaining = []
        except ExplorationTimeout:
            partial = True
            self._record("timeout", outcome="dynamic timeout reached; partial results")
        for act in self.model.activities:
            entry = self.outcomes.setdefault(act.name, {})
            entry.setdefault("outcome", "FAILED")
            entry.setdefault("attempts", 1)
        wall = time.monotonic() - start
        report = {
            "package": self.package,
            "seed": config.rng_seed,
            "config": config.to_json(),
            "rounds": rounds,
            "partial": partial,
            "wall_time_s": round(wall, 6),
            "outcomes": {act.name: self.outcomes[act.name] for act in self.model.activities},
            "stats": stats(self.scenetg, self.atg),
        }
        return ExplorationResult(self.scenetg, self.atg, report, self.trace, self.paths)


def explore(model, driver, config: ExplorationConfig, out_dir=None) -> ExplorationResult:
    return Explorer(model, driver, config, out_dir=out_dir).explore()


def write_outputs(result: ExplorationResult, out_dir, package: str) -> None:
    """Write the full explore artifact set (layout files are written during the run)."""
    from .graphs import export_dot, export_json

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scenetg.json").write_text(export_json(result.scenetg, result.atg, package), encoding="utf-8")
    (out / "scenetg.dot").write_text(export_dot(result.scenetg), encoding="utf-8")
    atg_doc = {
        "package": package,
        "atg_edges": [
            {
                "caller": e.caller,
                "callee": e.callee,
                "event": e.event.value,
                "component": e.component.describe(),
                "origin": origin.value,
            }
            for e, origin, _ in result.atg.edges()
        ],
    }
    (out / "atg.json").write_text(json.dumps(atg_doc, indent=2) + "\n", encoding="utf-8")
    (out / "report.json").write_text(json.dumps(result.report, indent=2) + "\n", encoding="utf-8")
    (out / "paths.json").write_text(json.dumps(result.paths, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    with (out / "trace.log").open("w", encoding="utf-8") as fh:
        for record in result.trace:
            fh.write(json.dumps(record) + "\n")
    (out / "layouts").mkdir(exist_ok=True)
