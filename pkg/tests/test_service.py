import numpy as np
import pytest
from fastapi.testclient import TestClient

from activesearch.cluster import soft_cluster
from activesearch.corpus import build_vocabulary, vectorize
from activesearch.search import DatasetOracle, SearchConfig, run_search
from activesearch.service import LoadedCorpus, create_app
from activesearch.synthetic import generate_synthetic


@pytest.fixture(scope="module")
def world():
    docs, truth = generate_synthetic(modes=2, n=80, prevalence=0.15, seed=6)
    vocab = build_vocabulary(docs)
    cm = vectorize(docs, vocab)
    mm = soft_cluster(cm, 3, temperature=0.1, rng_seed=2)
    return docs, truth, cm, mm


@pytest.fixture()
def client(world, tmp_path):
    docs, truth, cm, mm = world
    corpora = {"bench": LoadedCorpus("bench", docs, cm, mm)}
    app = create_app(corpora, sessions_dir=tmp_path / "sessions")
    return TestClient(app), truth


def create_session(client, truth, **overrides):
    seeds = sorted(d for d, y in truth.items() if y == 1)[:3]
    config = {"strategy": "mab", "gamma": 0.9, "n_pseudo": 10,
              "budget": 0.3, "epochs": 40, "seed": 21, **overrides}
    response = client.post("/sessions", json={"corpus": "bench", "config": config,
                                              "seed_ids": seeds})
    assert response.status_code == 200, response.text
    return response.json()


class TestCreateSession:
    def test_first_batch_has_size_one(self, client):
        http, truth = client
        body = create_session(http, truth)
        assert body["status"] == "awaiting_labels"
        assert len(body["pending"]) == 1
        assert body["reviewed"] == 3 and body["relevant_found"] == 3
        assert body["batch_size"] == 1
        doc = body["pending"][0]
        assert set(doc) == {"id", "text", "pi"} and 0 < doc["pi"] < 1

    def test_unknown_corpus_404(self, client):
        http, truth = client
        response = http.post("/sessions", json={"corpus": "ghost", "seed_ids": ["x"]})
        assert response.status_code == 404
        assert response.json()["error"] == "UnknownCorpus"

    def test_query_without_vocab_overlap_is_client_error(self, client):
        http, _ = client
        response = http.post("/sessions", json={"corpus": "bench",
                                                "seed_query": "qqqqzzzz"})
        assert response.status_code == 400
        assert response.json()["error"] == "NoSeeds"

    def test_two_sessions_are_independent(self, client):
        http, truth = client
        a = create_session(http, truth)
        b = create_session(http, truth, seed=22)
        first_batch = {i["id"]: 1 for i in a["pending"]}
        http.post(f"/sessions/{a['session_id']}/labels", json={"labels": first_batch})
        after_b = http.get(f"/sessions/{b['session_id']}").json()
        assert after_b["reviewed"] == 3  # untouched by session a


class TestSubmitLabels:
    def test_schedule_grows_one_to_two(self, client):
        http, truth = client
        body = create_session(http, truth)
        sid = body["session_id"]
        labels = {i["id"]: truth[i["id"]] for i in body["pending"]}
        nxt = http.post(f"/sessions/{sid}/labels", json={"labels": labels})
        assert nxt.status_code == 200
        assert len(nxt.json()["pending"]) == 2

    def test_idempotent_resubmission(self, client):
        http, truth = client
        body = create_session(http, truth)
        sid = body["session_id"]
        labels = {i["id"]: truth[i["id"]] for i in body["pending"]}
        first = http.post(f"/sessions/{sid}/labels", json={"labels": labels}).json()
        second = http.post(f"/sessions/{sid}/labels", json={"labels": labels}).json()
        assert first == second
        assert http.get(f"/sessions/{sid}").json()["round"] == first["round"]

    def test_unknown_and_partial_labels(self, client):
        http, truth = client
        body = create_session(http, truth)
        sid = body["session_id"]
        response = http.post(f"/sessions/{sid}/labels", json={"labels": {"ghost": 1}})
        assert response.status_code == 400
        assert response.json()["error"] == "UnknownIds"
        response = http.post(f"/sessions/{sid}/labels", json={"labels": {}})
        assert response.status_code == 400
        assert response.json()["error"] == "PartialLabels"

    def test_relevant_label_raises_matching_arm(self, client):
        http, truth = client
        body = create_session(http, truth)
        sid = body["session_id"]
        arms_before = {a["cluster"]: a["s"] for a in body["arms"]}
        # drive until some batch contains a relevant document
        while True:
            snap = http.get(f"/sessions/{sid}").json()
            if snap["status"] == "finished":
                pytest.skip("no relevant doc proposed within budget")
            labels = {i["id"]: truth[i["id"]] for i in snap["pending"]}
            nxt = http.post(f"/sessions/{sid}/labels", json={"labels": labels}).json()
            if any(v == 1 for v in labels.values()):
                arms_after = {a["cluster"]: a["s"] for a in nxt["arms"]}
                assert any(arms_after[k] > arms_before[k] for k in arms_after)
                break
            arms_before = {a["cluster"]: a["s"] for a in nxt["arms"]}

    def test_finished_session_rejects_labels(self, client):
        http, truth = client
        body = create_session(http, truth, budget=0.06)  # 4 docs on n=80
        sid = body["session_id"]
        labels = {i["id"]: truth[i["id"]] for i in body["pending"]}
        final = http.post(f"/sessions/{sid}/labels", json={"labels": labels}).json()
        assert final["status"] == "finished"
        response = http.post(f"/sessions/{sid}/labels", json={"labels": {"x": 1}})
        assert response.status_code == 409
        assert response.json()["error"] == "SessionFinished"


class TestSnapshotAndTrajectory:
    def test_unknown_session_404(self, client):
        http, _ = client
        assert http.get("/sessions/deadbeef").status_code == 404

    def test_trajectory_download_matches_simulation(self, world, client):
        docs, truth, cm, mm = world
        http, _ = client
        body = create_session(http, truth, budget=0.15)
        sid = body["session_id"]
        while True:
            snap = http.get(f"/sessions/{sid}").json()
            if snap["status"] == "finished":
                break
            labels = {i["id"]: truth[i["id"]] for i in snap["pending"]}
            http.post(f"/sessions/{sid}/labels", json={"labels": labels})
        served = http.get(f"/sessions/{sid}/trajectory").text

        seeds = sorted(d for d, y in truth.items() if y == 1)[:3]
        config = SearchConfig(strategy="mab", gamma=0.9, n_pseudo=10,
                              budget=0.15, epochs=40, seed=21)
        trajectory, _ = run_search(cm, mm, DatasetOracle(truth), config, seed_ids=seeds)
        assert served == "".join(line + "\n" for line in trajectory.to_lines())


class TestRecovery:
    def test_session_survives_store_restart(self, world, tmp_path):
        docs, truth, cm, mm = world
        corpora = {"bench": LoadedCorpus("bench", docs, cm, mm)}
        sessions_dir = tmp_path / "sessions"
        app1 = create_app(corpora, sessions_dir=sessions_dir)
        http1 = TestClient(app1)
        body = create_session(http1, truth)
        sid = body["session_id"]
        labels = {i["id"]: truth[i["id"]] for i in body["pending"]}
        before = http1.post(f"/sessions/{sid}/labels", json={"labels": labels}).json()

        app2 = create_app(corpora, sessions_dir=sessions_dir)  # fresh process
        http2 = TestClient(app2)
        after = http2.get(f"/sessions/{sid}").json()
        assert after["reviewed"] == before["reviewed"]
        assert [d["id"] for d in after["pending"]] == [d["id"] for d in before["pending"]]
