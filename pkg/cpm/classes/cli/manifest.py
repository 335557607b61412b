#!/usr/bin/env python3
"""Run manifests: what ran, with which configuration, on which inputs, producing which outputs."""
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from ..ingest.container import atomic_write
from ..util.configuration import Config, get_version

MANIFEST_NAME = "manifest.json"
_CHUNK = 1 << 20


def sha256_of(path: str) -> str:
    """Hex digest of a file, or of every file below a directory in sorted order."""
    digest = hashlib.sha256()
    if os.path.isdir(path):
        for root, dirs, files in os.walk(path):
            dirs.sort()
            for name in sorted(files):
                digest.update(os.path.relpath(os.path.join(root, name), path).encode("utf-8"))
                digest.update(bytes.fromhex(sha256_of(os.path.join(root, name))))
        return digest.hexdigest()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(_CHUNK), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_snapshot() -> Dict[str, Dict[str, str]]:
    return {section: dict(Config.config.items(section, raw=True)) for section in Config.config.sections()}


@dataclass
class RunManifest:
    command: str
    arguments: List[str]
    config: dict = field(default_factory=config_snapshot)
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    wall_seconds: float = 0.0
    version: str = field(default_factory=get_version)
    extra: dict = field(default_factory=dict)
    error: Optional[dict] = None

    def add_input(self, path: str):
        self.inputs[path] = sha256_of(path)

    def verify_inputs(self) -> List[str]:
        """Inputs whose current checksum no longer matches."""
        return [path for path, digest in self.inputs.items()
                if not os.path.exists(path) or sha256_of(path) != digest]

    def to_dict(self) -> dict:
        return {"command": self.command, "arguments": self.arguments, "config": self.config,
                "inputs": self.inputs, "outputs": sorted(self.outputs), "wall_seconds": self.wall_seconds,
                "version": self.version, "extra": self.extra, "status": "failed" if self.error else "ok",
                "error": self.error}

    def write(self, out_dir: str) -> str:
        path = os.path.join(out_dir, MANIFEST_NAME)
        atomic_write(path, (json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n").encode("utf-8"))
        return path

    @staticmethod
    def load(path: str) -> "RunManifest":
        with open(path, encoding="utf-8") as f:
            d = json.load(f)
        return RunManifest(d["command"], d["arguments"], d["config"], d["inputs"], d["outputs"],
                           d["wall_seconds"], d["version"], d.get("extra", {}), d.get("error"))
