"""HTTP session service: flows, guardrails, event logs, studies."""

import json

import pytest
from fastapi.testclient import TestClient

from forge.envs import builtin_spec, optimal_paths, sample_ground_truth
from forge.service import create_app

MORTGAGE_AID = (
    "Click the most long-term interest rates that you have not clicked yet."
    " Repeat this step until all the long-term interest rates are clicked"
    " or you have encountered the lowest possible interest rate."
)


@pytest.fixture
def data_dir(tmp_path):
    return tmp_path / "forge-data"


@pytest.fixture
def client(data_dir):
    return TestClient(create_app(data_dir))


def make_session(client, env="mortgage", condition="aided", seed=11):
    resp = client.post(
        "/api/v1/sessions", json={"env": env, "condition": condition, "seed": seed}
    )
    assert resp.status_code == 201
    return resp.json()


def click(client, session_id, node):
    return client.post(
        f"/api/v1/sessions/{session_id}/actions",
        json={"kind": "click", "node": node},
    )


class TestEnvEndpoints:
    def test_lists_builtins(self, client):
        body = client.get("/api/v1/envs").json()
        assert set(body["envs"]) == {"mouselab3", "roadtrip", "mortgage"}

    def test_env_doc_round_trips_names(self, client):
        doc = client.get("/api/v1/envs/mortgage").json()
        assert doc["name"] == "mortgage"
        assert doc["click_budget"] == 3

    def test_unknown_env_404(self, client):
        assert client.get("/api/v1/envs/chess").status_code == 404


class TestSessionLifecycle:
    def test_create_snapshot_shape(self, client):
        snap = make_session(client)
        assert snap["status"] == "active"
        assert snap["n_clicks"] == 0
        assert snap["clicks_left"] == 3
        assert snap["revealed"] == {}
        assert len(snap["hidden"]) == 9
        assert snap["condition"] == "aided"
        assert snap["aid_text"] == MORTGAGE_AID
        assert snap["aid_steps"] == [MORTGAGE_AID]

    def test_unseeded_sessions_differ(self, client):
        a = client.post(
            "/api/v1/sessions", json={"env": "mouselab3", "condition": "control"}
        ).json()
        b = client.post(
            "/api/v1/sessions", json={"env": "mouselab3", "condition": "control"}
        ).json()
        assert a["id"] != b["id"]

    def test_bad_condition_rejected(self, client):
        resp = client.post(
            "/api/v1/sessions", json={"env": "mortgage", "condition": "placebo"}
        )
        assert resp.status_code == 400

    def test_unknown_session_404(self, client):
        assert client.get("/api/v1/sessions/deadbeef").status_code == 404

    def test_clicks_reveal_and_budget_runs_out(self, client):
        snap = make_session(client)
        sid = snap["id"]
        for i, node in enumerate(("a3", "b3", "c3")):
            snap = click(client, sid, node).json()
            assert node in snap["revealed"]
            assert snap["clicks_left"] == 2 - i
        resp = click(client, sid, "a1")
        assert resp.status_code == 400
        assert "budget" in resp.json()["detail"]

    def test_unknown_node_rejected(self, client):
        sid = make_session(client)["id"]
        assert click(client, sid, "z9").status_code == 400

    def test_double_click_rejected(self, client):
        sid = make_session(client)["id"]
        click(client, sid, "a3")
        assert click(client, sid, "a3").status_code == 400

    def test_explicit_terminate_stops(self, client):
        sid = make_session(client)["id"]
        snap = client.post(
            f"/api/v1/sessions/{sid}/actions", json={"kind": "terminate"}
        ).json()
        assert snap["status"] == "stopped"

    def test_sessions_do_not_leak_into_each_other(self, client):
        first = make_session(client, seed=1)["id"]
        second = make_session(client, seed=2)["id"]
        click(client, first, "a3")
        snap = client.get(f"/api/v1/sessions/{second}").json()
        assert snap["revealed"] == {}
        assert snap["n_clicks"] == 0


class TestChoice:
    def test_mortgage_needs_a_path(self, client):
        sid = make_session(client)["id"]
        resp = client.post(f"/api/v1/sessions/{sid}/choice", json={"path": []})
        assert resp.status_code == 400

    def test_bogus_path_rejected(self, client):
        sid = make_session(client)["id"]
        resp = client.post(
            f"/api/v1/sessions/{sid}/choice", json={"path": ["a1", "b2", "c3"]}
        )
        assert resp.status_code == 400

    def test_choice_finishes_and_locks_the_session(self, client):
        sid = make_session(client)["id"]
        snap = client.post(
            f"/api/v1/sessions/{sid}/choice", json={"path": ["a1", "a2", "a3"]}
        ).json()
        assert snap["status"] == "finished"
        assert snap["choice"] == ["a1", "a2", "a3"]
        assert click(client, sid, "a3").status_code == 409
        again = client.post(
            f"/api/v1/sessions/{sid}/choice", json={"path": ["b1", "b2", "b3"]}
        )
        assert again.status_code == 409

    def test_mouselab_accepts_empty_path(self, client):
        sid = make_session(client, env="mouselab3")["id"]
        snap = client.post(f"/api/v1/sessions/{sid}/choice", json={"path": []}).json()
        assert snap["status"] == "finished"
        assert snap["choice"] is None


class TestAidVisibility:
    def test_control_snapshot_never_mentions_the_aid(self, client):
        snap = make_session(client, condition="control")
        sid = snap["id"]
        assert "aid_text" not in snap and "aid_steps" not in snap
        after_click = click(client, sid, "a3").json()
        assert "aid_text" not in after_click
        done = client.post(
            f"/api/v1/sessions/{sid}/choice", json={"path": ["a1", "a2", "a3"]}
        ).json()
        assert "aid_text" not in done

    def test_control_aid_endpoint_404(self, client):
        sid = make_session(client, condition="control")["id"]
        assert client.get(f"/api/v1/sessions/{sid}/aid").status_code == 404

    def test_aided_aid_endpoint(self, client):
        sid = make_session(client)["id"]
        body = client.get(f"/api/v1/sessions/{sid}/aid").json()
        assert body["text"] == MORTGAGE_AID
        assert body["steps"] == [MORTGAGE_AID]
        assert body["formula"].startswith("among(not(is_observed)")


class TestReportAndReplay:
    def finish_by_the_book(self, client, seed=11):
        """Follow the aid on a seeded mortgage trial and choose optimally."""

        spec = builtin_spec("mortgage")
        gt = sample_ground_truth(spec, seed)
        best = sorted(optimal_paths(spec, gt))[0]
        sid = make_session(client, seed=seed)["id"]
        for node in ("a3", "b3", "c3"):
            assert click(client, sid, node).status_code == 200
        resp = client.post(f"/api/v1/sessions/{sid}/choice", json={"path": list(best)})
        assert resp.status_code == 200
        return sid

    def test_report_requires_a_finished_session(self, client):
        sid = make_session(client)["id"]
        assert client.get(f"/api/v1/sessions/{sid}/report").status_code == 409

    def test_aided_run_scores_perfectly(self, client):
        sid = self.finish_by_the_book(client)
        report = client.get(f"/api/v1/sessions/{sid}/report").json()
        assert report["agreement"]["agreement"] == 1.0
        assert report["agreement"]["consistent"] == 3
        assert report["agreement"]["missed"] == 0.0
        assert report["fsq"] == {"k": 3, "value": 1.0}
        assert report["performance"] == 1.0

    def test_replay_matches_the_live_session(self, client):
        sid = self.finish_by_the_book(client)
        body = client.get(f"/api/v1/sessions/{sid}/replay").json()
        assert body["ok"] is True
        assert body["events"] == 4  # three clicks and the implicit terminate

    def test_event_log_on_disk(self, client, data_dir):
        sid = self.finish_by_the_book(client)
        lines = [
            json.loads(line)
            for line in (data_dir / "sessions" / f"{sid}.jsonl").read_text().splitlines()
        ]
        kinds = [rec["record"] for rec in lines]
        assert kinds == ["session", "event", "event", "event", "event", "choice"]
        assert lines[0]["env"] == "mortgage"
        clicks = [rec for rec in lines if rec["record"] == "event" and "node" in rec]
        assert [rec["node"] for rec in clicks] == ["a3", "b3", "c3"]
        index = [
            json.loads(line)
            for line in (data_dir / "index.jsonl").read_text().splitlines()
        ]
        assert any(rec["id"] == sid for rec in index)
        assert all("ground_truth" not in rec for rec in index)


class TestStudies:
    def make_study(self, client, seed=99, trials=2, tasks=("mortgage", "roadtrip")):
        resp = client.post(
            "/api/v1/studies",
            json={
                "condition": "aided",
                "tasks": list(tasks),
                "trials_per_block": trials,
                "seed": seed,
            },
        )
        assert resp.status_code == 201
        return resp.json()

    def test_blocks_are_a_permutation_of_tasks(self, client):
        study = self.make_study(client)
        assert sorted(study["blocks"]) == ["mortgage", "roadtrip"]
        assert study["total"] == 4
        assert study["done"] is False
        assert study["next"] == {"block": 0, "trial": 0, "env": study["blocks"][0]}

    def test_next_walks_blocks_in_order(self, client):
        study = self.make_study(client, trials=2)
        envs = []
        for _ in range(4):
            body = client.post(f"/api/v1/studies/{study['id']}/next").json()
            assert body["done"] is False
            envs.append(body["session"]["env"])
            assert body["session"]["condition"] == "aided"
            assert body["session"]["study"] == study["id"]
        assert envs == [study["blocks"][0]] * 2 + [study["blocks"][1]] * 2
        done = client.post(f"/api/v1/studies/{study['id']}/next").json()
        assert done == {"format_version": 1, "done": True, "session": None}

    def test_snapshot_tracks_progress(self, client):
        study = self.make_study(client, trials=1)
        client.post(f"/api/v1/studies/{study['id']}/next")
        snap = client.get(f"/api/v1/studies/{study['id']}").json()
        assert snap["completed"] == 1
        assert len(snap["sessions"]) == 1
        assert snap["next"] == {"block": 1, "trial": 0, "env": study["blocks"][1]}

    def test_same_seed_means_same_plan(self, client, data_dir):
        a = self.make_study(client, seed=123)
        b = self.make_study(client, seed=123)
        assert a["blocks"] == b["blocks"]
        headers = []
        for study in (a, b):
            path = data_dir / "studies" / f"{study['id']}.jsonl"
            headers.append(json.loads(path.read_text().splitlines()[0]))
        assert headers[0]["trial_seeds"] == headers[1]["trial_seeds"]

    def test_validation(self, client):
        bad_cond = client.post(
            "/api/v1/studies", json={"condition": "x", "tasks": ["mortgage"]}
        )
        assert bad_cond.status_code == 400
        bad_task = client.post(
            "/api/v1/studies", json={"condition": "aided", "tasks": ["chess"]}
        )
        assert bad_task.status_code == 400
        bad_trials = client.post(
            "/api/v1/studies",
            json={"condition": "aided", "tasks": ["mortgage"], "trials_per_block": 0},
        )
        assert bad_trials.status_code == 400
        assert client.get("/api/v1/studies/deadbeef").status_code == 404


def test_data_dir_from_environment(tmp_path, monkeypatch):
    target = tmp_path / "elsewhere"
    monkeypatch.setenv("FORGE_DATA_DIR", str(target))
    app = create_app()
    assert app.state.store.data_dir == target
    assert (target / "sessions").is_dir()
