import numpy as np
import pytest
from fastapi.testclient import TestClient

from octscreen.model import ModelConfig, ScreeningModel
from octscreen.patches import PatchGeometry
from octscreen.server import create_app
from octscreen.synthoct import GenConfig, generate_dataset
from octscreen.transition import SSTParams, extended_transition


@pytest.fixture(scope="module")
def client():
    cfg = ModelConfig(
        geometry=PatchGeometry(16, 16, 4, 8, 4, 4), embed_dim=8, depth=1, heads=2, mlp_ratio=2
    )
    model = ScreeningModel.init(cfg, seed=0)
    sst = SSTParams(1.0, 0.5, -0.5)
    samples = generate_dataset(
        GenConfig(n_volumes=3, frames_per_volume=9, image_h=16, image_w=16, seed=1)
    )
    app = create_app(model, sst, samples, frames_per_screen=7)
    return TestClient(app)


class TestInfoAndVolumes:
    def test_model_info(self, client):
        body = client.get("/model/info").json()
        assert body["config"]["embed_dim"] == 8
        assert body["effective_geometry"]["token_count"] == 12
        ext = extended_transition(SSTParams(1.0, 0.5, -0.5))
        assert body["extended_transition"]["t11"] == pytest.approx(ext.t11)
        assert body["extended_transition"]["t22"] == pytest.approx(ext.t22)
        assert body["frames_per_screen"] == 7

    def test_volumes_listing(self, client):
        body = client.get("/volumes").json()
        assert len(body["volumes"]) == 3
        entry = body["volumes"][0]
        assert set(entry) == {"volume_id", "split", "n_frames"}
        assert entry["n_frames"] == 9


class TestScreen:
    def test_screen_fields_and_determinism(self, client):
        req = {"volume_id": "vol0000", "delta": 0.0}
        r1 = client.post("/screen", json=req)
        r2 = client.post("/screen", json=req)
        assert r1.status_code == 200
        assert r1.content == r2.content  # byte-identical
        body = r1.json()
        assert set(body) == {
            "volume_id",
            "delta",
            "frame_posteriors",
            "decision",
            "u_posterior",
            "u_disagreement",
            "u_sweep",
            "sweep",
        }
        assert len(body["frame_posteriors"]) == 7
        assert body["decision"] in (0, 1)
        assert len(body["sweep"]) == 9

    def test_unknown_volume_404(self, client):
        r = client.post("/screen", json={"volume_id": "nope", "delta": 0.0})
        assert r.status_code == 404
        assert "unknown volume" in r.json()["detail"]

    def test_delta_out_of_range_422(self, client):
        r = client.post("/screen", json={"volume_id": "vol0000", "delta": 1.5})
        assert r.status_code == 422
        assert r.json()["detail"] == "delta must be in [-1,1]"

    def test_non_numeric_delta_rejected(self, client):
        r = client.post("/screen", json={"volume_id": "vol0000", "delta": "wide"})
        assert r.status_code == 422


class TestSweep:
    def test_single_delta_matches_screen(self, client):
        screen = client.post("/screen", json={"volume_id": "vol0001", "delta": 0.0}).json()
        sweep = client.post("/sweep", json={"volume_id": "vol0001", "deltas": [0.0]}).json()
        assert len(sweep["sweep"]) == 1
        d, p = sweep["sweep"][0]
        assert d == 0.0
        assert p == pytest.approx(np.mean(screen["frame_posteriors"]), abs=1e-12)
        # also consistent with the screen sweep entry at delta 0
        mid = [pair for pair in screen["sweep"] if pair[0] == 0.0][0]
        assert p == pytest.approx(mid[1], abs=1e-12)

    def test_sweep_validates_each_delta(self, client):
        r = client.post("/sweep", json={"volume_id": "vol0001", "deltas": [0.0, -3.0]})
        assert r.status_code == 422
        assert r.json()["detail"] == "delta must be in [-1,1]"

    def test_sweep_unknown_volume(self, client):
        r = client.post("/sweep", json={"volume_id": "missing", "deltas": [0.0]})
        assert r.status_code == 404

    def test_full_grid_matches_screen_sweep_pointwise(self, client):
        screen = client.post("/screen", json={"volume_id": "vol0002", "delta": 0.0}).json()
        grid = [pair[0] for pair in screen["sweep"]]
        sweep = client.post("/sweep", json={"volume_id": "vol0002", "deltas": grid}).json()
        assert sweep["sweep"] == screen["sweep"]


class TestReadOnly:
    def test_requests_do_not_mutate_model(self):
        cfg = ModelConfig(
            geometry=PatchGeometry(16, 16, 4, 8, 4, 4), embed_dim=8, depth=1, heads=2, mlp_ratio=2
        )
        model = ScreeningModel.init(cfg, seed=4)
        samples = generate_dataset(
            GenConfig(n_volumes=2, frames_per_volume=5, image_h=16, image_w=16, seed=5)
        )
        before = {n: p.data.copy() for n, p in model.params.items()}
        client = TestClient(create_app(model, SSTParams(), samples, frames_per_screen=5))
        client.post("/screen", json={"volume_id": "vol0000", "delta": 0.7})
        client.post("/sweep", json={"volume_id": "vol0001", "deltas": [-1.0, 1.0]})
        client.get("/model/info")
        for name, data in before.items():
            assert np.array_equal(model.params[name].data, data), name


class TestNoSstModel:
    def test_info_reports_null_transition(self):
        cfg = ModelConfig(
            geometry=PatchGeometry(16, 16, 4, 8, 4, 4),
            embed_dim=8,
            depth=1,
            heads=2,
            mlp_ratio=2,
            use_sst=False,
        )
        model = ScreeningModel.init(cfg, seed=0)
        samples = generate_dataset(
            GenConfig(n_volumes=1, frames_per_volume=3, image_h=16, image_w=16, seed=2)
        )
        client = TestClient(create_app(model, None, samples, frames_per_screen=3))
        assert client.get("/model/info").json()["extended_transition"] is None
