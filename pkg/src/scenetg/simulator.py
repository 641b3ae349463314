"""Deterministic in-memory app backend implementing the driver contract.

An AppModel is a declarative JSON description of a mock app: activities, their
scenes, widgets (with optional visibility conditions), and guarded transitions.
A session renders hierarchy dumps from the current scene and widget states, so
exploration runs byte-identically for a fixed (model, seed).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from .errors import DanglingReference, DriverError, SchemaError, SelectorNotFound
from .icc import ExtraType, IccMessage
from .layout import Bounds, ComponentNode, ComponentTree, Selector, serialize_tree


class LaunchReason(str, Enum):
    OK = "OK"
    NOT_EXPORTED = "NOT_EXPORTED"
    MISSING_EXTRA = "MISSING_EXTRA"
    WRONG_TYPE = "WRONG_TYPE"
    UNDECLARED = "UNDECLARED"


@dataclass(frozen=True)
class LaunchResult:
    success: bool
    reason: LaunchReason

    @classmethod
    def ok(cls):
        return cls(True, LaunchReason.OK)

    @classmethod
    def fail(cls, reason: LaunchReason):
        return cls(False, reason)


@dataclass(frozen=True)
class EventOutcome:
    changed: bool
    navigated: bool = False
    activity: Optional[str] = None
    scene: Optional[str] = None
    note: str = ""


@dataclass(frozen=True)
class Condition:
    widget: str
    prop: str  # "checked" or "filled"
    value: bool


@dataclass
class WidgetModel:
    id: str
    widget_class: str
    rid: Optional[str] = None  # rendered resource id; defaults to the widget id
    text: str = ""
    clickable: bool = False
    checkable: bool = False
    checked: bool = False
    input_type: Optional[str] = None
    repeat: int = 1
    visible_when: list[Condition] = field(default_factory=list)
    children: list["WidgetModel"] = field(default_factory=list)


@dataclass
class TransitionModel:
    widget: str
    event: str = "tap"
    guard: list[Condition] = field(default_factory=list)
    target: Optional[tuple[str, str]] = None  # ("scene"|"activity", name)
    set_text: Optional[tuple[str, str]] = None  # (widget id, value)
    increment: Optional[str] = None  # widget id whose text counts taps
    clear_stack: bool = False


@dataclass
class SceneModel:
    name: str
    widgets: list[WidgetModel]
    transitions: list[TransitionModel]

    def widget_ids(self) -> set[str]:
        ids = set()

        def walk(widgets):
            for w in widgets:
                ids.add(w.id)
                walk(w.children)

        walk(self.widgets)
        return ids


@dataclass
class ActivityModel:
    name: str
    scenes: list[SceneModel]
    directly_launchable: bool = True
    declared: bool = True
    launch_failure: Optional[LaunchReason] = None
    required_extras: list[tuple[str, str]] = field(default_factory=list)

    @property
    def entry_scene(self) -> SceneModel:
        return self.scenes[0]

    def scene(self, name: str) -> SceneModel:
        for s in self.scenes:
            if s.name == name:
                return s
        raise KeyError(name)


@dataclass
class AppModel:
    package: str
    activities: list[ActivityModel]
    seed_atg: list[tuple[str, str, str, str]] = field(default_factory=list)

    def activity(self, name: str) -> Optional[ActivityModel]:
        for a in self.activities:
            if a.name == name:
                return a
        return None


# ---------------------------------------------------------------------------
# Model loading / validation


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise SchemaError(f"{where}: missing required field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise SchemaError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _parse_condition(obj, where: str) -> Condition:
    if not isinstance(obj, dict) or "widget" not in obj:
        raise SchemaError(f"{where}: condition needs a 'widget' field")
    if "checked" in obj:
        return Condition(obj["widget"], "checked", bool(obj["checked"]))
    if "filled" in obj:
        return Condition(obj["widget"], "filled", bool(obj["filled"]))
    raise SchemaError(f"{where}: condition needs 'checked' or 'filled'")


def _parse_conditions(obj, where: str) -> list[Condition]:
    if obj is None:
        return []
    if isinstance(obj, dict):
        obj = [obj]
    if not isinstance(obj, list):
        raise SchemaError(f"{where}: expected a condition or list of conditions")
    return [_parse_condition(c, f"{where}[{i}]") for i, c in enumerate(obj)]


def _parse_widget(obj: dict, where: str) -> WidgetModel:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected object")
    wid = _require(obj, "id", str, where)
    cls = _require(obj, "class", str, where)
    children = [
        _parse_widget(c, f"{where}.children[{i}]") for i, c in enumerate(obj.get("children", []))
    ]
    return WidgetModel(
        id=wid,
        widget_class=cls,
        rid=obj.get("rid"),
        text=obj.get("text", ""),
        clickable=bool(obj.get("clickable", False)),
        checkable=bool(obj.get("checkable", False)),
        checked=bool(obj.get("checked", False)),
        input_type=obj.get("input_type"),
        repeat=int(obj.get("repeat", 1)),
        visible_when=_parse_conditions(obj.get("visible_when"), f"{where}.visible_when"),
        children=children,
    )


def _parse_transition(obj: dict, where: str) -> TransitionModel:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected object")
    widget = _require(obj, "widget", str, where)
    target = None
    if obj.get("target") is not None:
        raw = obj["target"]
        if not isinstance(raw, str) or ":" not in raw:
            raise SchemaError(f"{where}.target: expected 'scene:<name>' or 'activity:<name>'")
        kind, _, name = raw.partition(":")
        if kind not in ("scene", "activity"):
            raise SchemaError(f"{where}.target: unknown target kind {kind!r}")
        target = (kind, name)
    set_text = None
    if obj.get("set_text") is not None:
        st = obj["set_text"]
        if not isinstance(st, dict) or "widget" not in st or "value" not in st:
            raise SchemaError(f"{where}.set_text: expected {{widget, value}}")
        set_text = (st["widget"], str(st["value"]))
    return TransitionModel(
        widget=widget,
        event=obj.get("event", "tap"),
        guard=_parse_conditions(obj.get("guard"), f"{where}.guard"),
        target=target,
        set_text=set_text,
        increment=obj.get("increment"),
        clear_stack=bool(obj.get("clear_stack", False)),
    )


def _validate_activity(activity: ActivityModel, model: AppModel, where: str) -> None:
    scene_names = set()
    for i, scene in enumerate(activity.scenes):
        if scene.name in scene_names:
            raise SchemaError(f"{where}.scenes[{i}]: duplicate scene name {scene.name!r}")
        scene_names.add(scene.name)
    activity_names = {a.name for a in model.activities}
    # Widget state is held per activity instance, so guards, effects, and
    # visibility conditions may reference widgets from any scene of the
    # activity; only a transition's trigger widget must live in its own scene.
    activity_ids = set()
    for scene in activity.scenes:
        activity_ids |= scene.widget_ids()
    for i, scene in enumerate(activity.scenes):
        ids = scene.widget_ids()
        sw = f"{where}.scenes[{i}]"
        for j, tr in enumerate(scene.transitions):
            tw = f"{sw}.transitions[{j}]"
            if tr.widget not in ids:
                raise DanglingReference(f"{tw}: widget {tr.widget!r} not in scene {scene.name!r}")
            for cond in tr.guard:
                if cond.widget not in activity_ids:
                    raise DanglingReference(f"{tw}.guard: widget {cond.widget!r} not in activity")
            if tr.set_text and tr.set_text[0] not in activity_ids:
                raise DanglingReference(f"{tw}.set_text: widget {tr.set_text[0]!r} not in activity")
            if tr.increment and tr.increment not in activity_ids:
                raise DanglingReference(f"{tw}.increment: widget {tr.increment!r} not in activity")
            if tr.target:
                kind, name = tr.target
                if kind == "scene" and name not in scene_names:
                    raise DanglingReference(f"{tw}.target: scene {name!r} not declared in activity")
                if kind == "activity" and name not in activity_names:
                    raise DanglingReference(f"{tw}.target: activity {name!r} not declared")

        def check_conditions(widgets):
            for w in widgets:
                for cond in w.visible_when:
                    if cond.widget not in activity_ids:
                        raise DanglingReference(
                            f"{sw}: visible_when of widget {w.id!r} references unknown {cond.widget!r}"
                        )
                check_conditions(w.children)

        check_conditions(scene.widgets)


def parse_app_model(doc: dict) -> AppModel:
    package = _require(doc, "package", str, "model")
    raw_acts = _require(doc, "activities", list, "model")
    if not raw_acts:
        raise SchemaError("model.activities: must not be empty")
    activities = []
    seen = set()
    for i, raw in enumerate(raw_acts):
        where = f"model.activities[{i}]"
        if not isinstance(raw, dict):
            raise SchemaError(f"{where}: expected object")
        name = _require(raw, "name", str, where)
        if name in seen:
            raise SchemaError(f"{where}.name: duplicate activity {name!r}")
        seen.add(name)
        raw_scenes = _require(raw, "scenes", list, where)
        if not raw_scenes:
            raise SchemaError(f"{where}.scenes: activity needs an entry scene")
        scenes = []
        for j, rs in enumerate(raw_scenes):
            sw = f"{where}.scenes[{j}]"
            sname = _require(rs, "name", str, sw)
            widgets = [_parse_widget(w, f"{sw}.widgets[{k}]") for k, w in enumerate(rs.get("widgets", []))]
            transitions = [
                _parse_transition(t, f"{sw}.transitions[{k}]")
                for k, t in enumerate(rs.get("transitions", []))
            ]
            scenes.append(SceneModel(sname, widgets, transitions))
        launch_failure = None
        if raw.get("launch_failure") is not None:
            try:
                launch_failure = LaunchReason(raw["launch_failure"])
            except ValueError:
                raise SchemaError(f"{where}.launch_failure: unknown reason {raw['launch_failure']!r}") from None
        extras = []
        for k, pair in enumerate(raw.get("required_extras", [])):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise SchemaError(f"{where}.required_extras[{k}]: expected [key, type]")
            extras.append((str(pair[0]), str(pair[1])))
        activities.append(
            ActivityModel(
                name=name,
                scenes=scenes,
                directly_launchable=bool(raw.get("directly_launchable", True)),
                declared=bool(raw.get("declared", True)),
                launch_failure=launch_failure,
                required_extras=extras,
            )
        )
    seed_atg = []
    for i, raw in enumerate(doc.get("seed_atg", [])):
        where = f"model.seed_atg[{i}]"
        if isinstance(raw, dict):
            entry = (raw.get("caller"), raw.get("callee"), raw.get("event", "TAP"), raw.get("component"))
        elif isinstance(raw, (list, tuple)) and len(raw) == 4:
            entry = tuple(raw)
        else:
            raise SchemaError(f"{where}: expected [caller, callee, event, component]")
        if not all(isinstance(x, str) and x for x in entry):
            raise SchemaError(f"{where}: all four fields must be nonempty strings")
        if entry[0] not in seen:
            raise DanglingReference(f"{where}.caller: activity {entry[0]!r} not declared")
        if entry[1] not in seen:
            raise DanglingReference(f"{where}.callee: activity {entry[1]!r} not declared")
        seed_atg.append(entry)
    model = AppModel(package=package, activities=activities, seed_atg=seed_atg)
    for i, act in enumerate(model.activities):
        _validate_activity(act, model, f"model.activities[{i}]")
    return model


def load_app_model(path) -> AppModel:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"model: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("model: top level must be an object")
    return parse_app_model(doc)


# ---------------------------------------------------------------------------
# Session

_EXTRA_FORMATS = {
    ExtraType.STRING: re.compile(r"^.+$"),
    ExtraType.CHAR: re.compile(r"^[A-Za-z]$"),
    ExtraType.BOOLEAN: re.compile(r"^(true|false)$"),
    ExtraType.NUMBER: re.compile(r"^\d+$"),
    ExtraType.PHONE: re.compile(r"^\d{11}$"),
    ExtraType.DATE: re.compile(r"^\d{4}-\d{2}-\d{2}$"),
    ExtraType.TIME: re.compile(r"^([01]\d|2[0-3]):[0-5]\d$"),
    ExtraType.EMAIL: re.compile(r"^[^@\s]+@[^@\s]+$"),
}


class _ActivityInstance:
    def __init__(self, model: ActivityModel):
        self.model = model
        self.states: dict[str, dict] = {}
        self._init_states(model)

    def _init_states(self, model: ActivityModel):
        def walk(widgets):
            for w in widgets:
                self.states.setdefault(w.id, {"text": w.text, "checked": w.checked, "count": 0})
                walk(w.children)

        for scene in model.scenes:
            walk(scene.widgets)

    def holds(self, cond: Condition) -> bool:
        st = self.states[cond.widget]
        if cond.prop == "checked":
            return st["checked"] == cond.value
        return (st["text"] != "") == cond.value


@dataclass
class _Frame:
    instance: _ActivityInstance
    scene_name: str


class SimulatorSession:
    """One deterministic app session; operations are strictly sequential."""

    def __init__(self, model: AppModel, seed: int = 0):
        self.model = model
        self.seed = seed
        self._stack: list[_Frame] = []
        self._shots = 0

    # -- driver contract ----------------------------------------------------

    @property
    def running(self) -> bool:
        return bool(self._stack)

    def launch_activity(self, icc: IccMessage) -> LaunchResult:
        activity = self.model.activity(icc.target_activity)
        if activity is None or not activity.declared:
            return LaunchResult.fail(LaunchReason.UNDECLARED)
        if not activity.directly_launchable:
            return LaunchResult.fail(activity.launch_failure or LaunchReason.NOT_EXPORTED)
        supplied = {key: (extra_type, value) for key, extra_type, value in icc.extras}
        for key, type_name in activity.required_extras:
            expected = ExtraType(type_name)
            if key not in supplied:
                return LaunchResult.fail(LaunchReason.MISSING_EXTRA)
            got_type, value = supplied[key]
            if got_type is not expected or not _EXTRA_FORMATS[expected].match(value):
                return LaunchResult.fail(LaunchReason.WRONG_TYPE)
        # A direct launch starts a fresh task: widget states reset per visit.
        self._stack = [_Frame(_ActivityInstance(activity), activity.entry_scene.name)]
        return LaunchResult.ok()

    def current_dump(self) -> tuple[str, str]:
        frame = self._top()
        tree = self._render(frame)
        return tree.raw, frame.instance.model.name

    def tap(self, selector: Selector) -> EventOutcome:
        frame = self._top()
        widget = self._find_widget(frame, selector)
        for tr in frame.instance.model.scene(frame.scene_name).transitions:
            if tr.widget != widget.id or tr.event != "tap":
                continue
            if all(frame.instance.holds(c) for c in tr.guard):
                return self._fire(frame, tr)
        if widget.checkable:
            st = frame.instance.states[widget.id]
            st["checked"] = not st["checked"]
            return EventOutcome(changed=True, activity=frame.instance.model.name, scene=frame.scene_name)
        return EventOutcome(changed=False, activity=frame.instance.model.name, scene=frame.scene_name)

    def set_text(self, selector: Selector, value: str) -> EventOutcome:
        frame = self._top()
        widget = self._find_widget(frame, selector)
        frame.instance.states[widget.id]["text"] = value
        return EventOutcome(changed=True, activity=frame.instance.model.name, scene=frame.scene_name)

    def toggle(self, selector: Selector) -> EventOutcome:
        frame = self._top()
        widget = self._find_widget(frame, selector)
        if not widget.checkable:
            return EventOutcome(changed=False, note="not checkable")
        st = frame.instance.states[widget.id]
        st["checked"] = not st["checked"]
        return EventOutcome(changed=True, activity=frame.instance.model.name, scene=frame.scene_name)

    def press_back(self) -> EventOutcome:
        if not self._stack:
            return EventOutcome(changed=False, note="no app running")
        self._stack.pop()
        if not self._stack:
            return EventOutcome(changed=True, navigated=True, note="app exited")
        frame = self._top()
        return EventOutcome(
            changed=True, navigated=True, activity=frame.instance.model.name, scene=frame.scene_name
        )

    def screenshot_ref(self) -> str:
        frame = self._top()
        self._shots += 1
        return f"sim://{frame.instance.model.name}/{frame.scene_name}/{self._shots}"

    def input_type_of(self, selector: Selector) -> Optional[str]:
        frame = self._top()
        try:
            widget = self._find_widget(frame, selector)
        except SelectorNotFound:
            return None
        return widget.input_type

    # -- internals ----------------------------------------------------------

    def _top(self) -> _Frame:
        if not self._stack:
            raise DriverError("no app running")
        return self._stack[-1]

    def _fire(self, frame: _Frame, tr: TransitionModel) -> EventOutcome:
        changed = False
        if tr.set_text:
            wid, value = tr.set_text
            frame.instance.states[wid]["text"] = value
            changed = True
        if tr.increment:
            st = frame.instance.states[tr.increment]
            st["count"] += 1
            st["text"] = str(st["count"])
            changed = True
        if tr.target is None:
            return EventOutcome(changed=changed, activity=frame.instance.model.name, scene=frame.scene_name)
        kind, name = tr.target
        if kind == "scene":
            new_frame = _Frame(frame.instance, name)
        else:
            target = self.model.activity(name)
            new_frame = _Frame(_ActivityInstance(target), target.entry_scene.name)
        if tr.clear_stack:
            self._stack = [new_frame]
        else:
            self._stack.append(new_frame)
        return EventOutcome(
            changed=True,
            navigated=True,
            activity=new_frame.instance.model.name,
            scene=new_frame.scene_name,
        )

    def _resource_id(self, wid: str) -> str:
        return f"{self.model.package}:id/{wid}" if wid else ""

    def _visible_widgets(self, widgets: list[WidgetModel], instance: _ActivityInstance):
        out = []
        for w in widgets:
            if all(instance.holds(c) for c in w.visible_when):
                out.extend([w] * max(1, w.repeat))
        return out

    def _render_widget(self, widget: WidgetModel, instance: _ActivityInstance, index: int, counter: list) -> ComponentNode:
        k = counter[0]
        counter[0] += 1
        st = instance.states[widget.id]
        node = ComponentNode(
            widget_class=widget.widget_class,
            package=self.model.package,
            resource_id=self._resource_id(widget.rid or widget.id),
            text=st["text"],
            bounds=Bounds(0, k * 100, 1080, k * 100 + 100),
            clickable=widget.clickable,
            checkable=widget.checkable,
            checked=st["checked"],
            enabled=True,
            index=index,
        )
        for i, child in enumerate(self._visible_widgets(widget.children, instance)):
            node.children.append(self._render_widget(child, instance, i, counter))
        return node

    def _render(self, frame: _Frame) -> ComponentTree:
        scene = frame.instance.model.scene(frame.scene_name)
        counter = [1]
        root = ComponentNode(
            widget_class="android.widget.FrameLayout",
            package=self.model.package,
            resource_id="",
            bounds=Bounds(0, 0, 1080, 1920),
            enabled=True,
            index=0,
        )
        for i, w in enumerate(self._visible_widgets(scene.widgets, frame.instance)):
            root.children.append(self._render_widget(w, frame.instance, i, counter))
        tree = ComponentTree(root=root, source_activity=frame.instance.model.name, raw="")
        tree.raw = serialize_tree(tree)
        return tree

    def _find_widget(self, frame: _Frame, selector: Selector) -> WidgetModel:
        scene = frame.instance.model.scene(frame.scene_name)

        def walk(widgets):
            for w in self._visible_widgets(widgets, frame.instance):
                if selector.resource_id is not None and self._resource_id(w.rid or w.id) == selector.resource_id:
                    if selector.widget_class is None or w.widget_class == selector.widget_class:
                        return w
                elif selector.resource_id is None and selector.widget_class == w.widget_class:
                    return w
                found = walk(w.children)
                if found:
                    return found
            return None

        widget = walk(scene.widgets)
        if widget is None:
            raise SelectorNotFound(f"{selector.describe()!r} not on scene {scene.name!r}")
        return widget


def simulate(model: AppModel, seed: int = 0) -> SimulatorSession:
    """Fresh session at the 'no app running' state."""
    return SimulatorSession(model, seed=seed)
