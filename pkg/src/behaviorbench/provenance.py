"""Run manifests: config snapshot plus content hashes of every artifact."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

VERSION = "0.1.0"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass(frozen=True)
class RunManifest:
    version: str
    created: str
    master_seed: int
    config_text: str
    artifacts: dict   # relative path -> sha256

    def as_dict(self) -> dict:
        return {"version": self.version, "created": self.created,
                "master_seed": self.master_seed,
                "config_text": self.config_text,
                "artifacts": dict(sorted(self.artifacts.items()))}


def build_manifest(out_dir, master_seed: int, config_text: str,
                   skip=("manifest.json",)) -> RunManifest:
    """Hash every file under out_dir except the manifest itself."""
    out = Path(out_dir)
    artifacts = {}
    for path in sorted(out.rglob("*")):
        if not path.is_file():
            continue
        rel = path.relative_to(out).as_posix()
        if rel in skip:
            continue
        artifacts[rel] = sha256_file(path)
    return RunManifest(version=VERSION,
                       created=datetime.now(timezone.utc).isoformat(),
                       master_seed=master_seed, config_text=config_text,
                       artifacts=artifacts)


def write_manifest(manifest: RunManifest, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest.as_dict(), fh, sort_keys=True, indent=1)


def load_manifest(path) -> RunManifest:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return RunManifest(version=doc["version"], created=doc["created"],
                       master_seed=doc["master_seed"],
                       config_text=doc["config_text"],
                       artifacts=dict(doc["artifacts"]))
