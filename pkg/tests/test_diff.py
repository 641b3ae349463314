from conftest import PKG, make_node, make_tree
from scenetg.diff import ChangeKind, RunSnapshot, diff_graphs, diff_trees, match_scenes

PROXY = "com.fixture.proxy"


def _snapshot(runs, name):
    _, out, _ = runs.run(name)
    return RunSnapshot.load(out)


class TestDiffTrees:
    def test_property_change_detected(self):
        old = make_tree(make_node(children=[make_node(rid="x:id/a", cls="android.widget.TextView", text="v1")]))
        new = make_tree(make_node(children=[make_node(rid="x:id/a", cls="android.widget.TextView", text="v2")]))
        changes = diff_trees(old, new, PKG)
        assert len(changes) == 1
        change = changes[0]
        assert change.kind is ChangeKind.PROPERTY_CHANGED
        assert (change.attribute, change.old, change.new) == ("text", "v1", "v2")

    def test_added_and_deleted_nodes(self):
        old = make_tree(make_node(children=[make_node(rid="x:id/a"), make_node(rid="x:id/b")]))
        new = make_tree(make_node(children=[make_node(rid="x:id/a"), make_node(rid="x:id/c")]))
        kinds = sorted(c.kind.value for c in diff_trees(old, new, PKG))
        # b and c have different ids but pair positionally, so the diff shows
        # the resource_id property change rather than an add/delete pair.
        assert kinds == ["PROPERTY_CHANGED"]
        new2 = make_tree(make_node(children=[make_node(rid="x:id/a")]))
        deleted = diff_trees(old, new2, PKG)
        assert [c.kind for c in deleted] == [ChangeKind.DELETED]
        assert deleted[0].resource_id == "x:id/b"

    def test_alignment_by_rid_beats_position(self):
        old = make_tree(make_node(children=[make_node(rid="x:id/a", text="a"), make_node(rid="x:id/b", text="b")]))
        new = make_tree(make_node(children=[make_node(rid="x:id/b", text="b"), make_node(rid="x:id/a", text="a")]))
        assert diff_trees(old, new, PKG) == []

    def test_adapter_rows_collapse_before_diffing(self):
        def lst(rows):
            return make_tree(
                make_node(
                    rid="x:id/list",
                    cls="android.widget.ListView",
                    children=[make_node(rid="x:id/row") for _ in range(rows)],
                )
            )

        assert diff_trees(lst(1), lst(5), PKG) == []

    def test_foreign_nodes_ignored(self):
        old = make_tree(make_node(children=[make_node(rid="x:id/a")]))
        new = make_tree(
            make_node(children=[make_node(rid="x:id/a"), make_node(package="other.pkg", rid="o:id/b")])
        )
        assert diff_trees(old, new, PKG) == []


class TestMatchScenes:
    def test_entry_scenes_keyed_by_activity(self, runs):
        old = _snapshot(runs, "app06.json")
        new = _snapshot(runs, "app06.json")
        matches, added, removed, ambiguous = match_scenes(old, new)
        assert not added and not removed and not ambiguous
        assert len(matches) == len(old.scenes)
        assert all(old_id == new_id for _, old_id, new_id in matches)


class TestDiffGraphs:
    def test_identical_runs_diff_empty(self, runs):
        report = diff_graphs(_snapshot(runs, "app03.json"), _snapshot(runs, "app03.json"))
        assert report.empty
        assert "no differences" in report.render_text()

    def test_added_drawer_entry(self, runs):
        report = diff_graphs(_snapshot(runs, "drawer_v1.json"), _snapshot(runs, "drawer_v2.json"))
        assert report.summary == {
            "scene_updates": 1,
            "added_scenes": 0,
            "removed_scenes": 0,
            "added_pairs": 0,
            "removed_pairs": 0,
        }
        [update] = report.scene_updates
        assert update.path_key == [["TAP", f"{PROXY}:id/btn_drawer"]]
        [change] = update.changes
        assert change.kind is ChangeKind.ADDED
        assert change.resource_id == f"{PROXY}:id/user_asset_settings"

    def test_added_spinner_options(self, runs):
        report = diff_graphs(_snapshot(runs, "spinner_v1.json"), _snapshot(runs, "spinner_v2.json"))
        [update] = report.scene_updates
        added = {c.resource_id for c in update.changes if c.kind is ChangeKind.ADDED}
        assert added == {f"{PROXY}:id/opt_chacha20_poly1305", f"{PROXY}:id/opt_zero"}
        assert not report.added_pairs and not report.added_scenes

    def test_nested_menu_gains_scene_and_pair(self, runs):
        old = _snapshot(runs, "nested_menu_v1.json")
        new = _snapshot(runs, "nested_menu_v2.json")
        report = diff_graphs(old, new)
        assert len(report.added_scenes) == 1
        assert len(report.added_pairs) == 1
        (src, dst, event, component) = report.added_pairs[0]
        assert event == "TAP" and component == f"{PROXY}:id/btn_restart_services"
        assert dst == report.added_scenes[0]
        [update] = report.scene_updates
        assert update.path_key == [
            ["TAP", f"{PROXY}:id/btn_menu"],
            ["TAP", f"{PROXY}:id/btn_custom_config"],
        ]
        assert not report.removed_scenes and not report.removed_pairs

    def test_reverse_direction_reports_removals(self, runs):
        report = diff_graphs(_snapshot(runs, "nested_menu_v2.json"), _snapshot(runs, "nested_menu_v1.json"))
        assert len(report.removed_scenes) == 1 and len(report.removed_pairs) == 1
        assert not report.added_scenes and not report.added_pairs

    def test_to_json_shape(self, runs):
        report = diff_graphs(_snapshot(runs, "drawer_v1.json"), _snapshot(runs, "drawer_v2.json"))
        doc = report.to_json()
        assert set(doc) == {
            "scene_updates",
            "added_scenes",
            "removed_scenes",
            "transition_pair_updates",
            "ambiguous_matches",
            "summary",
        }
        assert doc["scene_updates"][0]["activity"] == "MainActivity"
        assert doc["transition_pair_updates"] == {"added": [], "removed": []}
