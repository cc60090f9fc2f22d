"""Bundle persistence: a trained pipeline as a diffable directory.

Layout: manifest.json (stats, config, per-file digests), lexicon.tsv,
mlsu.tsv, model_meta.json (per-class biases and object counts, which the
matrix text format does not carry), and
one text matrix file per trained model.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import CorruptBundle, IoFailure, VersionMismatch
from .matrix import InformationMatrix
from .models import BundleConfig, ModelBundle, ModelStats, TrainReport
from .textmodel import Lexicon, Mlsu

FORMAT_VERSION = 1

_MATRIX_FILES = {
    "pos_model": "pos_model.txt",
    "mlsu_model": "mlsu_model.txt",
    "next_token": "next_token.txt",
    "prev_token": "prev_token.txt",
    "word_form_next": "word_form_next.txt",
    "word_form_prev": "word_form_prev.txt",
}
_ATTR_FOR_NAME = {
    "pos_model": "pos_model",
    "mlsu_model": "mlsu_model",
    "next_token": "next_token_model",
    "prev_token": "prev_token_model",
    "word_form_next": "word_form_next",
    "word_form_prev": "word_form_prev",
}


@dataclass
class BundleManifest:
    format_version: int
    created_at: str
    corpus_hash: str
    training_mode: str
    config: dict
    models: list[dict]
    files: dict[str, str]

    def to_json(self) -> str:
        data = {
            "format_version": self.format_version,
            "created_at": self.created_at,
            "corpus_hash": self.corpus_hash,
            "training_mode": self.training_mode,
            "config": self.config,
            "models": self.models,
            "files": self.files,
        }
        return json.dumps(data, sort_keys=True, ensure_ascii=False, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "BundleManifest":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CorruptBundle("manifest is not valid JSON: %s" % exc)
        if "format_version" not in data:
            raise CorruptBundle("manifest lacks format_version")
        return cls(
            format_version=data["format_version"],
            created_at=data.get("created_at", ""),
            corpus_hash=data.get("corpus_hash", ""),
            training_mode=data.get("training_mode", "parallel"),
            config=data.get("config", {}),
            models=data.get("models", []),
            files=data.get("files", {}),
        )


def _digest(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def _sanitize(text: str) -> str:
    return text.replace("\t", " ").replace("\n", " ").replace("\r", " ")


def _registry_to_text(registry: dict[int, Mlsu]) -> str:
    lines = ["# id\tverb\ttokens\tsource_sentence"]
    for mid in sorted(registry):
        unit = registry[mid]
        lines.append(
            "%d\t%s\t%s\t%s"
            % (mid, unit.verb, " ".join(unit.context_tokens), _sanitize(unit.source_sentence))
        )
    return "\n".join(lines) + "\n"


def _registry_from_text(text: str) -> dict[int, Mlsu]:
    registry: dict[int, Mlsu] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise CorruptBundle("mlsu.tsv line %d: expected 4 fields" % lineno)
        mid = int(parts[0])
        registry[mid] = Mlsu(
            id=mid,
            verb=parts[1],
            context_tokens=parts[2].split(" "),
            source_sentence=parts[3],
        )
    return registry


def _model_meta(bundle: ModelBundle) -> str:
    meta = {}
    for name, matrix in bundle.matrices().items():
        meta[name] = {
            "bias": {c: b for c, b in matrix.bias.items() if b != 0.0},
            "class_counts": matrix.class_counts,
        }
    return json.dumps(meta, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def save_bundle(bundle: ModelBundle, path: str | Path) -> BundleManifest:
    """Write the bundle directory; returns the manifest that was stored."""
    root = Path(path)
    try:
        root.mkdir(parents=True, exist_ok=True)
        payloads: dict[str, bytes] = {
            "lexicon.tsv": bundle.lexicon.to_text().encode("utf-8"),
            "mlsu.tsv": _registry_to_text(bundle.mlsu_registry).encode("utf-8"),
            "model_meta.json": _model_meta(bundle).encode("utf-8"),
        }
        for name, matrix in bundle.matrices().items():
            payloads[_MATRIX_FILES[name]] = matrix.to_text().encode("utf-8")

        manifest = BundleManifest(
            format_version=FORMAT_VERSION,
            created_at=bundle.created_at,
            corpus_hash=bundle.corpus_hash,
            training_mode=bundle.training_mode,
            config=bundle.config.to_dict(),
            models=bundle.model_stats(),
            files={name: _digest(data) for name, data in sorted(payloads.items())},
        )
        for name, data in payloads.items():
            (root / name).write_bytes(data)
        (root / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
        return manifest
    except OSError as exc:
        raise IoFailure("cannot write bundle at %s: %s" % (root, exc))


def load_bundle(path: str | Path) -> ModelBundle:
    """Read a bundle directory back, verifying digests and the stats arithmetic."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise IoFailure("no bundle manifest at %s" % manifest_path)
    try:
        manifest = BundleManifest.from_json(manifest_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure("cannot read %s: %s" % (manifest_path, exc))

    if manifest.format_version != FORMAT_VERSION:
        raise VersionMismatch(
            "bundle format %r unsupported (expected %d)"
            % (manifest.format_version, FORMAT_VERSION)
        )

    contents: dict[str, bytes] = {}
    for name, expected in manifest.files.items():
        file_path = root / name
        try:
            data = file_path.read_bytes()
        except OSError as exc:
            raise IoFailure("cannot read %s: %s" % (file_path, exc))
        if _digest(data) != expected:
            raise CorruptBundle("digest mismatch for %s" % name)
        contents[name] = data

    for required in ("lexicon.tsv", "mlsu.tsv", "model_meta.json"):
        if required not in contents:
            raise CorruptBundle("bundle is missing %s" % required)

    lexicon = Lexicon.from_text(contents["lexicon.tsv"].decode("utf-8"))
    registry = _registry_from_text(contents["mlsu.tsv"].decode("utf-8"))
    try:
        meta = json.loads(contents["model_meta.json"].decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise CorruptBundle("model_meta.json is not valid JSON: %s" % exc)

    matrices: dict[str, InformationMatrix | None] = {name: None for name in _MATRIX_FILES}
    for name, filename in _MATRIX_FILES.items():
        if filename not in contents:
            continue
        try:
            matrix = InformationMatrix.from_text(contents[filename].decode("utf-8"))
        except ValueError as exc:
            raise CorruptBundle("bad matrix file %s: %s" % (filename, exc))
        model_meta = meta.get(name, {})
        bias = {c: 0.0 for c in matrix.class_ids}
        bias.update(model_meta.get("bias", {}))
        matrix.bias = bias
        matrix.class_counts = {
            c: int(v) for c, v in model_meta.get("class_counts", {}).items()
        }
        matrices[name] = matrix

    for name in _MATRIX_FILES:
        if name != "pos_model" and matrices[name] is None:
            raise CorruptBundle("bundle is missing matrix %s" % name)

    for stats in manifest.models:
        matrix = matrices.get(stats.get("name", ""))
        if matrix is None:
            raise CorruptBundle("manifest lists unknown model %r" % stats.get("name"))
        expected = len(matrix.feature_ids) * len(matrix.class_ids)
        if stats.get("connections") != expected:
            raise CorruptBundle(
                "manifest connections for %s is %r, recomputed %d"
                % (stats["name"], stats.get("connections"), expected)
            )

    report = TrainReport(
        mode=manifest.training_mode,
        per_model=[
            ModelStats(
                model_id=s.get("model_id", -1),
                name=s.get("name", ""),
                classes=s.get("classes", 0),
                features=s.get("features", 0),
                connections=s.get("connections", 0),
                precision=s.get("precision"),
                recall=s.get("recall"),
                f1=s.get("f1"),
            )
            for s in manifest.models
        ],
        wall_time_s=0.0,
    )
    return ModelBundle(
        pos_model=matrices["pos_model"],
        mlsu_model=matrices["mlsu_model"],
        next_token_model=matrices["next_token"],
        prev_token_model=matrices["prev_token"],
        word_form_next=matrices["word_form_next"],
        word_form_prev=matrices["word_form_prev"],
        mlsu_registry=registry,
        lexicon=lexicon,
        config=BundleConfig.from_dict(manifest.config),
        training_mode=manifest.training_mode,
        corpus_hash=manifest.corpus_hash,
        created_at=manifest.created_at,
        report=report,
    )
