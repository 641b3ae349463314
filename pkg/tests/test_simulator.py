import json

import pytest

from conftest import load_benchmark
from scenetg.errors import DanglingReference, SchemaError, SelectorNotFound
from scenetg.icc import IccMessage
from scenetg.layout import Selector, parse_hierarchy_dump
from scenetg.simulator import LaunchReason, load_app_model, parse_app_model, simulate

PKG = "com.fixture.sim"


def sel(wid):
    return Selector(resource_id=f"{PKG}:id/{wid}")


MODEL = {
    "package": PKG,
    "activities": [
        {
            "name": "MainActivity",
            "scenes": [
                {
                    "name": "entry",
                    "widgets": [
                        {"id": "lbl_title", "class": "android.widget.TextView", "text": "home"},
                        {"id": "btn_about", "class": "android.widget.Button", "clickable": True},
                        {"id": "btn_detail", "class": "android.widget.Button", "clickable": True},
                        {"id": "btn_reset", "class": "android.widget.Button", "clickable": True},
                        {"id": "sw_dark", "class": "android.widget.Switch", "checkable": True, "clickable": True},
                        {"id": "ed_name", "class": "android.widget.EditText", "input_type": "text"},
                        {
                            "id": "lbl_hint",
                            "class": "android.widget.TextView",
                            "visible_when": [{"widget": "sw_dark", "checked": True}],
                        },
                        {
                            "id": "list_rows",
                            "class": "android.widget.ListView",
                            "children": [{"id": "row", "class": "android.widget.TextView", "repeat": 3}],
                        },
                    ],
                    "transitions": [
                        {"widget": "btn_about", "target": "scene:about"},
                        {"widget": "btn_detail", "target": "activity:DetailActivity"},
                        {"widget": "btn_reset", "target": "scene:about", "clear_stack": True},
                    ],
                },
                {
                    "name": "about",
                    "widgets": [
                        {"id": "lbl_about", "class": "android.widget.TextView"},
                        {"id": "btn_secret", "class": "android.widget.Button", "clickable": True},
                    ],
                    "transitions": [
                        {
                            "widget": "btn_secret",
                            "target": "scene:secret",
                            "guard": [{"widget": "ed_name", "filled": True}],
                        }
                    ],
                },
                {"name": "secret", "widgets": [{"id": "lbl_secret", "class": "android.widget.TextView"}]},
            ],
        },
        {
            "name": "DetailActivity",
            "scenes": [{"name": "entry", "widgets": [{"id": "lbl_detail", "class": "android.widget.TextView"}]}],
        },
    ],
    "seed_atg": [["MainActivity", "DetailActivity", "TAP", "btn_detail"]],
}


@pytest.fixture
def driver():
    model = parse_app_model(json.loads(json.dumps(MODEL)))
    driver = simulate(model)
    assert driver.launch_activity(IccMessage("MainActivity")).success
    return driver


class TestModelValidation:
    def test_parses_bundled_models(self):
        for name in ["app01.json", "app10.json", "fig5a.json", "guarded.json"]:
            model = load_benchmark(name)
            assert model.activities

    def test_missing_field_reports_path(self):
        bad = {"package": "p", "activities": [{"scenes": []}]}
        with pytest.raises(SchemaError, match=r"model\.activities\[0\]"):
            parse_app_model(bad)

    def test_activity_needs_entry_scene(self):
        bad = {"package": "p", "activities": [{"name": "A", "scenes": []}]}
        with pytest.raises(SchemaError, match="entry scene"):
            parse_app_model(bad)

    def test_bad_target_kind(self):
        bad = {
            "package": "p",
            "activities": [
                {
                    "name": "A",
                    "scenes": [
                        {
                            "name": "entry",
                            "widgets": [{"id": "b", "class": "c", "clickable": True}],
                            "transitions": [{"widget": "b", "target": "service:X"}],
                        }
                    ],
                }
            ],
        }
        with pytest.raises(SchemaError, match="target"):
            parse_app_model(bad)

    def test_dangling_scene_target(self):
        bad = {
            "package": "p",
            "activities": [
                {
                    "name": "A",
                    "scenes": [
                        {
                            "name": "entry",
                            "widgets": [{"id": "b", "class": "c", "clickable": True}],
                            "transitions": [{"widget": "b", "target": "scene:ghost"}],
                        }
                    ],
                }
            ],
        }
        with pytest.raises(DanglingReference, match="ghost"):
            parse_app_model(bad)

    def test_dangling_seed_atg_activity(self):
        bad = {
            "package": "p",
            "activities": [{"name": "A", "scenes": [{"name": "entry", "widgets": []}]}],
            "seed_atg": [["A", "B", "TAP", "btn"]],
        }
        with pytest.raises(DanglingReference, match="'B'"):
            parse_app_model(bad)

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        with pytest.raises(SchemaError, match="invalid JSON"):
            load_app_model(path)


class TestSession:
    def test_launch_failures(self):
        model = parse_app_model(json.loads(json.dumps(MODEL)))
        driver = simulate(model)
        assert driver.launch_activity(IccMessage("NopeActivity")).reason is LaunchReason.UNDECLARED
        fig = load_benchmark("fig5a.json")
        d2 = simulate(fig)
        assert d2.launch_activity(IccMessage("CalleeActivity")).reason is LaunchReason.NOT_EXPORTED

    def test_dump_is_parseable_and_stable(self, driver):
        raw, activity = driver.current_dump()
        assert activity == "MainActivity"
        tree = parse_hierarchy_dump(raw, activity)
        rids = [n.resource_id for n in tree.root.iter_subtree()]
        assert f"{PKG}:id/btn_about" in rids
        assert raw == driver.current_dump()[0]

    def test_repeat_renders_adapter_rows(self, driver):
        raw, _ = driver.current_dump()
        tree = parse_hierarchy_dump(raw, "MainActivity")
        rows = [n for n in tree.root.iter_subtree() if n.resource_id == f"{PKG}:id/row"]
        assert len(rows) == 3

    def test_visible_when_gates_rendering(self, driver):
        assert f"{PKG}:id/lbl_hint" not in driver.current_dump()[0]
        driver.toggle(sel("sw_dark"))
        assert f"{PKG}:id/lbl_hint" in driver.current_dump()[0]

    def test_tap_scene_navigation_and_back(self, driver):
        out = driver.tap(sel("btn_about"))
        assert out.navigated and out.scene == "about"
        assert f"{PKG}:id/lbl_about" in driver.current_dump()[0]
        back = driver.press_back()
        assert back.navigated and back.scene == "entry"

    def test_tap_activity_navigation(self, driver):
        out = driver.tap(sel("btn_detail"))
        assert out.navigated and out.activity == "DetailActivity"
        assert driver.current_dump()[1] == "DetailActivity"
        driver.press_back()
        assert driver.current_dump()[1] == "MainActivity"

    def test_back_past_root_exits_app(self, driver):
        out = driver.press_back()
        assert out.note == "app exited"
        assert not driver.running

    def test_guarded_transition(self, driver):
        driver.tap(sel("btn_about"))
        assert not driver.tap(sel("btn_secret")).navigated
        driver.press_back()
        driver.set_text(sel("ed_name"), "alice")
        driver.tap(sel("btn_about"))
        assert driver.tap(sel("btn_secret")).scene == "secret"

    def test_tap_checkable_toggles(self, driver):
        driver.tap(sel("sw_dark"))
        tree = parse_hierarchy_dump(*driver.current_dump()[::1])
        node = next(n for n in tree.root.iter_subtree() if n.resource_id == f"{PKG}:id/sw_dark")
        assert node.checked

    def test_clear_stack_replaces_history(self, driver):
        driver.tap(sel("btn_about"))
        driver.press_back()
        driver.tap(sel("btn_reset"))
        assert driver.press_back().note == "app exited"

    def test_relaunch_resets_widget_state(self, driver):
        driver.set_text(sel("ed_name"), "alice")
        driver.launch_activity(IccMessage("MainActivity"))
        tree = parse_hierarchy_dump(*driver.current_dump())
        node = next(n for n in tree.root.iter_subtree() if n.resource_id == f"{PKG}:id/ed_name")
        assert node.text == ""

    def test_selector_not_found(self, driver):
        with pytest.raises(SelectorNotFound):
            driver.tap(sel("btn_ghost"))

    def test_screenshot_ref_scheme(self, driver):
        assert driver.screenshot_ref().startswith("sim://MainActivity/entry/")

    def test_input_type_of(self, driver):
        assert driver.input_type_of(sel("ed_name")) == "text"
        assert driver.input_type_of(sel("btn_about")) is None

    def test_rid_override_renders_shared_resource_id(self):
        model = load_benchmark("app10.json")
        driver = simulate(model)
        driver.launch_activity(IccMessage("MainActivity"))
        driver.toggle(Selector(resource_id="com.bench.app10:id/sw_a"))
        raw, _ = driver.current_dump()
        assert "com.bench.app10:id/overlay_panel" in raw
        assert "com.bench.app10:id/panel_a" not in raw
