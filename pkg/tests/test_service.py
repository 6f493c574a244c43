import hashlib

import numpy as np
import pytest
from fastapi.testclient import TestClient

from cardiag import DiagnosticIndex, Location, Timing, create_app
from cardiag.service import MAX_UPLOAD_BYTES

from conftest import noisy_tone, random_records, tone, wav_bytes


@pytest.fixture
def client(audio_index):
    index, embedder, root = audio_index
    app = create_app(index, audio_root=root, embedder=embedder)
    return TestClient(app), index, root


def _post(client, data, where=None, when=None, name="q.wav"):
    form = {}
    if where is not None:
        form["where"] = where
    if when is not None:
        form["when"] = when
    return client.post("/api/v1/diagnose",
                       files={"audio": (name, data, "audio/wav")}, data=form)


class TestHealthz:
    def test_ok_with_count(self, client):
        c, index, _ = client
        body = c.get("/healthz").json()
        assert body["status"] == "ok"
        assert body["records"] == len(index)
        assert body["embedder_id"] == index.embedder_id

    def test_503_before_load(self):
        c = TestClient(create_app(None))
        r = c.get("/healthz")
        assert r.status_code == 503
        assert r.json()["status"] == "unavailable"


class TestOptions:
    def test_counts_and_labels(self, client):
        c, _, _ = client
        body = c.get("/api/v1/options").json()
        assert len(body["locations"]) == 4
        assert len(body["timings"]) == 6
        for entry in body["locations"] + body["timings"]:
            assert entry["label"]
        assert {e["value"] for e in body["locations"]} == \
            {"front", "rear", "wheels", "not_sure"}
        assert {e["value"] for e in body["timings"]} == \
            {"starting", "idling", "driving", "braking", "turning", "not_sure"}

    def test_stable_across_calls(self, client):
        c, _, _ = client
        assert c.get("/api/v1/options").json() == c.get("/api/v1/options").json()


class TestDiagnose:
    def test_filtered_matches_respect_filter(self, client):
        c, index, _ = client
        rec = index.records[0]
        r = _post(c, wav_bytes(noisy_tone(250, 0)),
                  where=rec.location.value, when=rec.timing.value)
        assert r.status_code == 200
        body = r.json()
        if not body["fallback"]:
            for m in body["matches"]:
                stored = index.record_by_id(m["record_id"])
                assert stored.location is rec.location
                assert stored.timing is rec.timing

    def test_self_match_rank_1(self, client):
        c, index, root = client
        data = (root / "r2.wav").read_bytes()
        body = _post(c, data).json()
        top = body["matches"][0]
        assert top["record_id"] == "r2"
        assert top["similarity"] >= 0.999999
        assert top["rank"] == 1

    def test_response_shape(self, client):
        c, index, root = client
        body = _post(c, (root / "r0.wav").read_bytes()).json()
        assert body["embedder_id"] == index.embedder_id
        assert body["query_duration_ms"] > 0
        assert len(body["matches"]) <= 3
        sims = [m["similarity"] for m in body["matches"]]
        assert sims == sorted(sims, reverse=True)
        for m in body["matches"]:
            assert m["search_url"].startswith("https://www.google.com/search?q=")
            assert m["reference_audio_url"] == f"/api/v1/reference-audio/{m['record_id']}"
            assert 0.0 <= m["confidence"] <= 1.0

    def test_too_short(self, client):
        c, _, _ = client
        r = _post(c, wav_bytes(tone(440, seconds=0.5)))
        assert r.status_code == 422
        assert r.json()["code"] == "TOO_SHORT"
        assert r.json()["message"]

    def test_unsupported_format(self, client):
        c, _, _ = client
        r = _post(c, b"ID3\x03 not audio at all", name="x.mp3")
        assert r.status_code == 415
        assert r.json()["code"] == "UNSUPPORTED_FORMAT"

    def test_too_large(self, client):
        c, _, _ = client
        r = _post(c, b"\x00" * (MAX_UPLOAD_BYTES + 1))
        assert r.status_code == 413
        assert r.json()["code"] == "TOO_LARGE"

    def test_too_long(self, client):
        c, _, _ = client
        r = _post(c, wav_bytes(np.zeros(16000 * 31) + 0.1))
        assert r.status_code == 413
        assert r.json()["code"] == "TOO_LONG"

    def test_silent_audio(self, client):
        c, _, _ = client
        r = _post(c, wav_bytes(np.zeros(32000)))
        assert r.status_code == 422
        assert r.json()["code"] == "SILENT_AUDIO"

    def test_invalid_enum(self, client):
        c, _, _ = client
        r = _post(c, wav_bytes(noisy_tone(250, 0)), where="engine")
        assert r.status_code == 422
        assert r.json()["code"] == "INVALID_ENUM"

    def test_fallback_flagged(self, client):
        c, index, _ = client
        used = {(r.location, r.timing) for r in index.records}
        assert (Location.REAR, Timing.TURNING) not in used
        body = _post(c, wav_bytes(noisy_tone(250, 0)),
                     where="rear", when="turning").json()
        assert body["fallback"] is True
        assert body["matches"]

    def test_503_without_index(self):
        c = TestClient(create_app(None))
        r = _post(c, wav_bytes(noisy_tone(250, 0)))
        assert r.status_code == 503
        assert r.json()["code"] == "INDEX_NOT_LOADED"

    def test_repeat_requests_identical(self, client):
        c, _, root = client
        data = (root / "r1.wav").read_bytes()
        a = _post(c, data, where="wheels").json()
        b = _post(c, data, where="wheels").json()
        a.pop("query_duration_ms")
        b.pop("query_duration_ms")
        assert a == b


class TestReferenceAudio:
    def test_known_id_serves_wav(self, client):
        c, _, root = client
        r = c.get("/api/v1/reference-audio/r3")
        assert r.status_code == 200
        assert r.headers["content-type"].startswith("audio/wav")
        on_disk = (root / "r3.wav").read_bytes()
        assert hashlib.sha256(r.content).hexdigest() == \
            hashlib.sha256(on_disk).hexdigest()

    def test_unknown_id(self, client):
        c, _, _ = client
        r = c.get("/api/v1/reference-audio/nope")
        assert r.status_code == 404
        assert r.json()["code"] == "UNKNOWN_ID"

    def test_missing_file(self, client):
        c, _, root = client
        (root / "r0.wav").unlink()
        assert c.get("/api/v1/reference-audio/r0").status_code == 404


class TestAppConstruction:
    def test_opaque_embedder_id_needs_explicit_embedder(self):
        index = DiagnosticIndex(random_records(4, embedder_id="opaque-model"))
        with pytest.raises(ValueError):
            create_app(index)

    def test_reference_id_resolves_automatically(self, audio_index):
        index, _, root = audio_index
        app = create_app(index, audio_root=root)  # embedder rebuilt from the id
        c = TestClient(app)
        body = _post(c, (root / "r1.wav").read_bytes()).json()
        assert body["matches"][0]["record_id"] == "r1"

    def test_assets_mount(self, audio_index, tmp_path):
        index, embedder, root = audio_index
        assets = tmp_path / "assets"
        assets.mkdir()
        (assets / "index.html").write_text("<h1>wizard</h1>")
        c = TestClient(create_app(index, audio_root=root, embedder=embedder,
                                  assets_dir=assets))
        r = c.get("/")
        assert r.status_code == 200
        assert "wizard" in r.text
        assert c.get("/healthz").status_code == 200  # API wins over the mount
