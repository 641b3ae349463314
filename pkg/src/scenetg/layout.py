"""Component trees: parse uiautomator-style hierarchy dumps and answer structural queries.

The dump format is an XML document with root element ``hierarchy`` and one
``node`` element per component. Booleans are the strings ``true``/``false``
and bounds use the ``[l,t][r,b]`` form.
"""

from __future__ import annotations

import re
import warnings
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional
from xml.sax.saxutils import quoteattr

from .errors import AmbiguityWarning, MissingAttribute, ParseError

_BOUNDS_RE = re.compile(r"^\[(-?\d+),(-?\d+)\]\[(-?\d+),(-?\d+)\]$")


@dataclass(frozen=True)
class Bounds:
    left: int = 0
    top: int = 0
    right: int = 0
    bottom: int = 0

    def __post_init__(self):
        if self.left > self.right or self.top > self.bottom:
            raise ValueError(f"degenerate bounds {self}")

    @classmethod
    def parse(cls, text: str) -> "Bounds":
        m = _BOUNDS_RE.match(text.strip())
        if not m:
            raise ParseError(f"malformed bounds attribute: {text!r}")
        return cls(*(int(g) for g in m.groups()))

    def render(self) -> str:
        return f"[{self.left},{self.top}][{self.right},{self.bottom}]"


@dataclass
class ComponentNode:
    widget_class: str
    package: str
    resource_id: str = ""
    text: str = ""
    bounds: Bounds = field(default_factory=Bounds)
    clickable: bool = False
    checkable: bool = False
    checked: bool = False
    enabled: bool = False
    scrollable: bool = False
    long_clickable: bool = False
    index: int = 0
    children: list["ComponentNode"] = field(default_factory=list)

    def iter_subtree(self) -> Iterator["ComponentNode"]:
        yield self
        for child in self.children:
            yield from child.iter_subtree()


@dataclass
class ComponentTree:
    root: ComponentNode
    source_activity: str
    raw: str


@dataclass(frozen=True)
class Selector:
    """Matches a node iff every present field equals the node's field."""

    resource_id: Optional[str] = None
    widget_class: Optional[str] = None
    bounds: Optional[Bounds] = None

    def __post_init__(self):
        if self.resource_id is None and self.widget_class is None and self.bounds is None:
            raise ValueError("selector needs at least one field")

    def matches(self, node: ComponentNode) -> bool:
        if self.resource_id is not None and node.resource_id != self.resource_id:
            return False
        if self.widget_class is not None and node.widget_class != self.widget_class:
            return False
        if self.bounds is not None and node.bounds != self.bounds:
            return False
        return True

    def describe(self) -> str:
        if self.resource_id is not None:
            return self.resource_id
        if self.widget_class is not None:
            return self.widget_class
        return self.bounds.render()


_BOOL_ATTRS = ("clickable", "checkable", "checked", "enabled", "scrollable", "long-clickable")


def _node_from_element(elem: ET.Element, position: int) -> ComponentNode:
    attrib = elem.attrib
    if "class" not in attrib:
        raise MissingAttribute("node is missing the 'class' attribute")
    if "package" not in attrib:
        raise MissingAttribute("node is missing the 'package' attribute")
    bounds = Bounds.parse(attrib["bounds"]) if "bounds" in attrib else Bounds()
    flags = {a.replace("-", "_"): attrib.get(a, "false") == "true" for a in _BOOL_ATTRS}
    node = ComponentNode(
        widget_class=attrib["class"],
        package=attrib["package"],
        resource_id=attrib.get("resource-id", ""),
        text=attrib.get("text", ""),
        bounds=bounds,
        index=int(attrib.get("index", position)),
        **flags,
    )
    node.children = [_node_from_element(c, i) for i, c in enumerate(elem) if c.tag == "node"]
    return node


def parse_hierarchy_dump(text: str, source_activity: str) -> ComponentTree:
    """Parse a hierarchy dump into a ComponentTree, preserving nesting and sibling order."""
    try:
        root_elem = ET.fromstring(text)
    except ET.ParseError as exc:
        line, column = exc.position if exc.position else (None, None)
        raise ParseError(f"malformed hierarchy dump: {exc}", line=line, column=column) from exc
    if root_elem.tag == "hierarchy":
        node_elems = [c for c in root_elem if c.tag == "node"]
        if len(node_elems) != 1:
            raise ParseError(f"hierarchy must contain exactly one root node, found {len(node_elems)}")
        root_elem = node_elems[0]
    elif root_elem.tag != "node":
        raise ParseError(f"unexpected root element {root_elem.tag!r}")
    return ComponentTree(root=_node_from_element(root_elem, 0), source_activity=source_activity, raw=text)


def _render_node(node: ComponentNode, out: list, depth: int) -> None:
    pad = "  " * depth
    attrs = [
        ("index", str(node.index)),
        ("class", node.widget_class),
        ("package", node.package),
        ("resource-id", node.resource_id),
        ("text", node.text),
        ("clickable", "true" if node.clickable else "false"),
        ("checkable", "true" if node.checkable else "false"),
        ("checked", "true" if node.checked else "false"),
        ("enabled", "true" if node.enabled else "false"),
        ("scrollable", "true" if node.scrollable else "false"),
        ("long-clickable", "true" if node.long_clickable else "false"),
        ("bounds", node.bounds.render()),
    ]
    line = " ".join(f"{k}={quoteattr(v)}" for k, v in attrs)
    if node.children:
        out.append(f"{pad}<node {line}>")
        for child in node.children:
            _render_node(child, out, depth + 1)
        out.append(f"{pad}</node>")
    else:
        out.append(f"{pad}<node {line} />")


def serialize_tree(tree: ComponentTree) -> str:
    """Render a ComponentTree back into dump text (inverse of parse on the read attributes)."""
    out = ['<?xml version="1.0" encoding="UTF-8"?>', "<hierarchy>"]
    _render_node(tree.root, out, 1)
    out.append("</hierarchy>")
    return "\n".join(out) + "\n"


def bfs_nodes(tree: ComponentTree, target_package: str) -> list[ComponentNode]:
    """Breadth-first node order; foreign-package nodes are dropped with their whole subtree."""
    if tree.root.package != target_package:
        return []
    order = []
    queue = deque([tree.root])
    while queue:
        node = queue.popleft()
        order.append(node)
        for child in node.children:
            if child.package == target_package:
                queue.append(child)
    return order


def find_clickable(tree: ComponentTree, target_package: str) -> list[ComponentNode]:
    return [n for n in bfs_nodes(tree, target_package) if n.clickable]


def match_component(tree: ComponentTree, selector: Selector) -> Optional[ComponentNode]:
    """First BFS match for the selector over the whole tree, or None.

    Records an AmbiguityWarning (never raises) when more than one node matches.
    """
    matches = []
    queue = deque([tree.root])
    while queue:
        node = queue.popleft()
        if selector.matches(node):
            matches.append(node)
        queue.extend(node.children)
    if len(matches) > 1:
        warnings.warn(
            f"selector {selector.describe()!r} matched {len(matches)} nodes; using first",
            AmbiguityWarning,
            stacklevel=2,
        )
    return matches[0] if matches else None
