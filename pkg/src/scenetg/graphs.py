"""Activity and scene transition graphs: storage, caller queries, exports, metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .errors import MissingEdge
from .layout import Selector


class EventKind(str, Enum):
    TAP = "TAP"
    SET_TEXT = "SET_TEXT"
    TOGGLE = "TOGGLE"
    BACK = "BACK"
    LAUNCH = "LAUNCH"


class EdgeOrigin(str, Enum):
    SEED = "SEED"
    DYNAMIC = "DYNAMIC"


@dataclass(frozen=True)
class ActivityEdge:
    caller: str
    callee: str
    event: EventKind
    component: Selector

    def key(self):
        return (self.caller, self.callee, self.event, self.component)


@dataclass(frozen=True)
class SceneEdge:
    src: str
    dst: str
    event: EventKind
    component: Selector

    def key(self):
        return (self.src, self.dst, self.event, self.component)


@dataclass
class SceneNode:
    id: str
    owning_activity: str
    layout_ref: str
    screenshot_ref: str
    discovered_at: int


class ActivityGraph:
    """Dynamically augmented ATG. Inserts are idempotent; duplicates keep the
    earliest recorded origin (SEED wins over a later identical DYNAMIC edge)."""

    def __init__(self):
        self._edges: dict[tuple, tuple[int, EdgeOrigin]] = {}
        self._by_pair: dict[tuple[str, str], list[tuple[int, EventKind, Selector]]] = {}
        self._callers: dict[str, set[str]] = {}
        self._counter = 0

    def add_edge(self, edge: ActivityEdge, origin: EdgeOrigin = EdgeOrigin.DYNAMIC) -> bool:
        key = edge.key()
        if key in self._edges:
            return False
        self._counter += 1
        self._edges[key] = (self._counter, origin)
        self._by_pair.setdefault((edge.caller, edge.callee), []).append(
            (self._counter, edge.event, edge.component)
        )
        self._callers.setdefault(edge.callee, set()).add(edge.caller)
        return True

    def mark(self) -> int:
        return self._counter

    def augmented_since(self, mark: int) -> bool:
        return self._counter > mark

    def __len__(self) -> int:
        return len(self._edges)

    def edges(self) -> list[tuple[ActivityEdge, EdgeOrigin, int]]:
        out = []
        for (caller, callee, event, component), (order, origin) in self._edges.items():
            out.append((ActivityEdge(caller, callee, event, component), origin, order))
        out.sort(key=lambda item: item[2])
        return out

    def callers_of(self, activity: str) -> set[str]:
        return set(self._callers.get(activity, ()))

    def edge_action(self, caller: str, callee: str) -> tuple[EventKind, Selector]:
        """Earliest-discovered (event, component) that triggers caller -> callee."""
        actions = self._by_pair.get((caller, callee))
        if not actions:
            raise MissingEdge(f"no edge {caller} -> {callee}")
        order, event, component = min(actions, key=lambda a: a[0])
        return event, component

    def caller_chains(self, target: str, launchable: Callable[[str], bool]) -> list[list[str]]:
        """Reverse-BFS chains [head, ..., target] whose head satisfies `launchable`.

        Ordered by (length ascending, lexicographic activity names); a chain
        never revisits an activity, and extension stops at a launchable head.
        """
        chains = []
        frontier = [(target,)]
        while frontier:
            extensions = []
            for path in frontier:
                for caller in sorted(self.callers_of(path[0])):
                    if caller in path:
                        continue
                    new_path = (caller,) + path
                    if launchable(caller):
                        chains.append(list(new_path))
                    else:
                        extensions.append(new_path)
            frontier = extensions
        chains.sort(key=lambda c: (len(c), c))
        return chains


class SceneGraph:
    """SceneTG: hash-identified scene nodes plus labeled transition edges."""

    def __init__(self):
        self.nodes: dict[str, SceneNode] = {}
        self._edges: dict[tuple, tuple[SceneEdge, int]] = {}
        self._counter = 0

    def add_node(self, scene_id: str, owning_activity: str, layout_ref: str, screenshot_ref: str) -> bool:
        """Record a scene; first discovery wins (ownership and refs are kept)."""
        if scene_id in self.nodes:
            return False
        self._counter += 1
        self.nodes[scene_id] = SceneNode(scene_id, owning_activity, layout_ref, screenshot_ref, self._counter)
        return True

    def add_edge(self, edge: SceneEdge) -> bool:
        key = edge.key()
        if key in self._edges:
            return False
        if edge.src not in self.nodes or edge.dst not in self.nodes:
            raise MissingEdge(f"edge endpoints must exist as scene nodes: {edge.src} -> {edge.dst}")
        self._counter += 1
        self._edges[key] = (edge, self._counter)
        return True

    def edges(self) -> list[SceneEdge]:
        ordered = sorted(self._edges.values(), key=lambda item: item[1])
        return [edge for edge, _ in ordered]

    def sorted_nodes(self) -> list[SceneNode]:
        return sorted(self.nodes.values(), key=lambda n: (n.discovered_at, n.id))


def stats(scenetg: SceneGraph, atg: Optional[ActivityGraph] = None) -> dict:
    activities = {node.owning_activity for node in scenetg.nodes.values()}
    return {
        "explored_activities": len(activities),
        "scenes": len(scenetg.nodes),
        "transition_pairs": len(scenetg.edges()),
    }


def _component_str(component: Selector) -> str:
    return component.describe()


def export_json(scenetg: SceneGraph, atg: ActivityGraph, package: str, generated_at: str = "0") -> str:
    """Deterministic JSON export; nodes and edges sorted by (discovered_at, id)."""
    doc = {
        "package": package,
        "generated_at": generated_at,
        "scenes": [
            {
                "id": n.id,
                "activity": n.owning_activity,
                "layout_ref": n.layout_ref,
                "screenshot_ref": n.screenshot_ref,
            }
            for n in scenetg.sorted_nodes()
        ],
        "scene_edges": [
            {
                "src": e.src,
                "dst": e.dst,
                "event": e.event.value,
                "component": _component_str(e.component),
            }
            for e in scenetg.edges()
        ],
        "atg_edges": [
            {
                "caller": e.caller,
                "callee": e.callee,
                "event": e.event.value,
                "component": _component_str(e.component),
                "origin": origin.value,
            }
            for e, origin, _ in atg.edges()
        ],
        "stats": stats(scenetg, atg),
    }
    return json.dumps(doc, indent=2) + "\n"


def export_dot(scenetg: SceneGraph) -> str:
    """DOT digraph; scene nodes labeled with the 8-char id prefix plus activity."""
    lines = ["digraph scenetg {"]
    for node in scenetg.sorted_nodes():
        label = f"{node.id[:8]}\\n{node.owning_activity}"
        lines.append(f'  "{node.id}" [label="{label}"];')
    for edge in scenetg.edges():
        label = f"{edge.event.value}/{_component_str(edge.component)}"
        lines.append(f'  "{edge.src}" -> "{edge.dst}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
