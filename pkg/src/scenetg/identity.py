"""Scene identifiers: structural hashing of UI pages.

A page's identity is the MD5 of the concatenated per-node MD5 digests taken
in breadth-first order, where each node contributes only its
(resource-id, class, package) triple. Text, checked state, and geometry do
not participate, so pages that differ only in values hash equal. Adapter
views contribute only their first child subtree, so lists of different
lengths built from the same row template hash equal as well.
"""

from __future__ import annotations

import hashlib
from collections import deque

from .layout import ComponentNode, ComponentTree

# Standard adapter-backed widgets, matched by class simple-name suffix so that
# support-library variants (e.g. AppCompatSpinner) are covered.
ADAPTER_VIEW_SUFFIXES = (
    "ListView",
    "ExpandableListView",
    "GridView",
    "RecyclerView",
    "Spinner",
    "ViewPager",
    "Gallery",
    "StackView",
)

EMPTY_SCENE_ID = "d41d8cd98f00b204e9800998ecf8427e"  # MD5 of the empty string


def node_signature(node: ComponentNode) -> str:
    return f"{node.resource_id}|{node.widget_class}|{node.package}"


def node_hash(node: ComponentNode) -> str:
    return hashlib.md5(node_signature(node).encode("utf-8")).hexdigest()


def is_adapter_view(node: ComponentNode) -> bool:
    simple = node.widget_class.rsplit(".", 1)[-1]
    return simple.endswith(ADAPTER_VIEW_SUFFIXES)


def signature_nodes(tree: ComponentTree, target_package: str) -> list[ComponentNode]:
    """BFS order after foreign-package filtering and adapter first-child collapsing.

    The adapter rule applies recursively: adapters inside a collapsed first
    child are collapsed too.
    """
    if tree.root.package != target_package:
        return []
    order = []
    queue = deque([tree.root])
    while queue:
        node = queue.popleft()
        order.append(node)
        kids = [c for c in node.children if c.package == target_package]
        if is_adapter_view(node):
            kids = kids[:1]
        queue.extend(kids)
    return order


def scene_id(tree: ComponentTree, target_package: str) -> str:
    digests = "".join(node_hash(n) for n in signature_nodes(tree, target_package))
    return hashlib.md5(digests.encode("utf-8")).hexdigest()


def raw_state_id(raw_dump: str) -> str:
    """Ablation-mode state key: hash of the full dump text, maximally fine-grained."""
    return hashlib.md5(raw_dump.encode("utf-8")).hexdigest()
