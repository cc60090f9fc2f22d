import json

import pytest

from conftest import TOY_CORPUS, TOY_QA
from infoqa.bundle import FORMAT_VERSION, load_bundle, save_bundle
from infoqa.errors import CorruptBundle, IoFailure, VersionMismatch
from infoqa.models import train_from_corpus
from infoqa.synthesis import synthesize


@pytest.fixture()
def bundle_dir(tmp_path, toy_bundle):
    path = tmp_path / "bundle"
    save_bundle(toy_bundle, path)
    return path


def read_all(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


class TestRoundTrip:
    def test_save_load_save_is_byte_identical(self, tmp_path, bundle_dir):
        loaded = load_bundle(bundle_dir)
        second = tmp_path / "second"
        save_bundle(loaded, second)
        assert read_all(bundle_dir) == read_all(second)

    def test_loaded_bundle_answers_identically(self, toy_bundle, bundle_dir):
        loaded = load_bundle(bundle_dir)
        for question in ("Where do men go?", "Why it is light at morning?", "zzz?"):
            before = synthesize(toy_bundle, question).to_json()
            after = synthesize(loaded, question).to_json()
            assert before == after

    def test_layout(self, bundle_dir):
        names = set(read_all(bundle_dir))
        assert {
            "manifest.json", "lexicon.tsv", "mlsu.tsv", "model_meta.json",
            "pos_model.txt", "mlsu_model.txt", "next_token.txt", "prev_token.txt",
            "word_form_next.txt", "word_form_prev.txt",
        } == names

    def test_registry_round_trip(self, toy_bundle, bundle_dir):
        loaded = load_bundle(bundle_dir)
        assert loaded.mlsu_registry == toy_bundle.mlsu_registry
        assert loaded.training_mode == toy_bundle.training_mode
        assert loaded.corpus_hash == toy_bundle.corpus_hash
        assert loaded.created_at == toy_bundle.created_at

    def test_class_metadata_round_trip(self, toy_bundle, bundle_dir):
        loaded = load_bundle(bundle_dir)
        assert (
            loaded.next_token_model.class_counts
            == toy_bundle.next_token_model.class_counts
        )
        assert loaded.mlsu_model.bias == toy_bundle.mlsu_model.bias


class TestManifest:
    def test_connection_arithmetic_verified_on_load(self, bundle_dir):
        manifest = json.loads((bundle_dir / "manifest.json").read_text())
        for stats in manifest["models"]:
            assert stats["connections"] == stats["classes"] * stats["features"]

    def test_tampered_connections_detected(self, bundle_dir):
        manifest_path = bundle_dir / "manifest.json"
        manifest = json.loads(manifest_path.read_text())
        manifest["models"][0]["connections"] += 1
        payload = json.dumps(manifest, sort_keys=True, ensure_ascii=False, indent=2) + "\n"
        manifest_path.write_text(payload)
        manifest["files"] = manifest["files"]  # digests cover data files only
        with pytest.raises(CorruptBundle):
            load_bundle(bundle_dir)


class TestIntegrity:
    def test_tampered_matrix_file(self, bundle_dir):
        target = bundle_dir / "mlsu_model.txt"
        target.write_text(target.read_text() + "0\t0\t9.9\n")
        with pytest.raises(CorruptBundle):
            load_bundle(bundle_dir)

    def test_future_format_version(self, bundle_dir):
        manifest_path = bundle_dir / "manifest.json"
        manifest = json.loads(manifest_path.read_text())
        manifest["format_version"] = FORMAT_VERSION + 1
        manifest_path.write_text(json.dumps(manifest))
        with pytest.raises(VersionMismatch):
            load_bundle(bundle_dir)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(IoFailure):
            load_bundle(tmp_path / "missing")

    def test_missing_listed_file(self, bundle_dir):
        (bundle_dir / "mlsu.tsv").unlink()
        with pytest.raises(IoFailure):
            load_bundle(bundle_dir)

    def test_garbage_manifest(self, bundle_dir):
        (bundle_dir / "manifest.json").write_text("{not json")
        with pytest.raises(CorruptBundle):
            load_bundle(bundle_dir)


class TestModes:
    def test_consecutive_round_trip(self, tmp_path, lexicon):
        bundle, _ = train_from_corpus(
            TOY_CORPUS, TOY_QA, lexicon, mode="consecutive"
        )
        path = tmp_path / "consec"
        save_bundle(bundle, path)
        loaded = load_bundle(path)
        assert loaded.training_mode == "consecutive"
        assert (
            synthesize(loaded, "Where do men go?").final_answer == "Men go to work"
        )

    def test_bundle_without_qa_round_trips(self, tmp_path, lexicon):
        bundle, _ = train_from_corpus(TOY_CORPUS, [], lexicon)
        path = tmp_path / "noqa"
        save_bundle(bundle, path)
        loaded = load_bundle(path)
        assert loaded.pos_model is None
        assert not (path / "pos_model.txt").exists()
