"""Workspace with content-addressed stage caching and a run lock.

A stage records the digests of its inputs, its config, and its outputs in
a manifest; it re-runs iff any of those digests changed. Concurrent
commands on one workspace are rejected through an exclusive lock file.
"""

from __future__ import annotations

import contextlib
import hashlib
import json
import os
from dataclasses import dataclass


class WorkspaceLockedError(Exception):
    """Another command currently holds the workspace lock."""


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fp:
        for chunk in iter(lambda: fp.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_digest(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class StageManifest:
    inputs: dict[str, str]
    config: str
    outputs: dict[str, str]


class Workspace:
    def __init__(self, root: str):
        self.root = root
        self.manifest_dir = os.path.join(root, "manifests")
        self.corpus_dir = os.path.join(root, "corpus")

    def ensure(self) -> None:
        os.makedirs(self.manifest_dir, exist_ok=True)
        os.makedirs(self.corpus_dir, exist_ok=True)

    def _manifest_path(self, stage: str) -> str:
        return os.path.join(self.manifest_dir, f"{stage}.json")

    def load_manifest(self, stage: str) -> StageManifest | None:
        path = self._manifest_path(stage)
        if not os.path.exists(path):
            return None
        with open(path, "r", encoding="utf-8") as fp:
            data = json.load(fp)
        return StageManifest(
            inputs=data.get("inputs", {}),
            config=data.get("config", ""),
            outputs=data.get("outputs", {}),
        )

    def up_to_date(self, stage: str, inputs: dict[str, str], config: str) -> bool:
        manifest = self.load_manifest(stage)
        if manifest is None:
            return False
        if manifest.inputs != inputs or manifest.config != config:
            return False
        for path, digest in manifest.outputs.items():
            if not os.path.exists(path) or file_digest(path) != digest:
                return False
        return True

    def record(
        self, stage: str, inputs: dict[str, str], config: str, outputs: list[str]
    ) -> None:
        manifest = {
            "inputs": inputs,
            "config": config,
            "outputs": {path: file_digest(path) for path in outputs},
        }
        with open(self._manifest_path(stage), "w", encoding="utf-8") as fp:
            json.dump(manifest, fp, indent=2, sort_keys=True)
            fp.write("\n")

    @contextlib.contextmanager
    def lock(self):
        self.ensure()
        path = os.path.join(self.root, ".lock")
        try:
            fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise WorkspaceLockedError(
                f"workspace is locked by another command: {path}"
            ) from None
        try:
            os.write(fd, str(os.getpid()).encode("ascii"))
            os.close(fd)
            yield
        finally:
            with contextlib.suppress(OSError):
                os.unlink(path)
