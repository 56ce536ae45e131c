"""On-disk cache of vertex and wiring enumerations.

One JSON file per (kind, setting) under ``$NSBOX_CACHE_DIR`` (default
``~/.cache/nsbox``). Each file stores a SHA-256 of its payload; a mismatch or
unreadable file counts as corrupt and the enumeration is rebuilt. Writes go
to a temporary file that is renamed into place.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import Setting
from .errors import CacheCorrupt
from .localset import DEFAULT_VERTEX_CAP, VertexTable, build_vertex_table, seed_vertex_table
from .wccpi import DEFAULT_WIRING_CAP, LocalWiring, enumerate_wirings, seed_wirings, wiring_count

log = logging.getLogger(__name__)


def default_dir() -> Path:
    env = os.environ.get("NSBOX_CACHE_DIR")
    return Path(env) if env else Path.home() / ".cache" / "nsbox"


def _digest(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


class Cache:
    def __init__(self, directory=None, enabled: bool = True):
        self.directory = Path(directory) if directory else default_dir()
        self.enabled = enabled
        self.hits = 0
        self.misses = 0

    def path(self, kind: str, setting: Setting) -> Path:
        return self.directory / f"{kind}-{setting.mA}-{setting.mB}-{setting.dA}-{setting.dB}.json"

    def _read(self, kind, setting):
        path = self.path(kind, setting)
        if not path.exists():
            return None
        try:
            doc = json.loads(path.read_text())
            payload = doc["payload"]
            if doc.get("kind") != kind or doc.get("setting") != list(setting.shape):
                raise CacheCorrupt(f"{path} describes another enumeration")
            if _digest(payload) != doc.get("sha256"):
                raise CacheCorrupt(f"{path} fails its content hash")
            return payload
        except (ValueError, KeyError, TypeError, CacheCorrupt) as exc:
            log.warning("discarding cache file %s: %s", path, exc)
            return None

    def _write(self, kind, setting, payload):
        self.directory.mkdir(parents=True, exist_ok=True)
        doc = {"kind": kind, "setting": list(setting.shape), "sha256": _digest(payload), "payload": payload}
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(doc, fh)
            os.replace(tmp, self.path(kind, setting))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def vertex_table(self, setting: Setting, cap: int = DEFAULT_VERTEX_CAP) -> VertexTable:
        """Load or build the deterministic points and install them in memory."""
        if self.enabled:
            payload = self._read("vertices", setting)
            if payload is not None:
                try:
                    vt = _decode_vertices(setting, payload)
                except (ValueError, KeyError, TypeError) as exc:
                    log.warning("discarding vertex cache for %s: %s", setting, exc)
                else:
                    self.hits += 1
                    seed_vertex_table(vt)
                    return vt
        self.misses += 1
        vt = build_vertex_table(setting, cap)
        seed_vertex_table(vt)
        if self.enabled:
            self._write("vertices", setting, _encode_vertices(vt))
        return vt

    def wirings(self, setting: Setting, cap: int = DEFAULT_WIRING_CAP) -> list[LocalWiring]:
        if self.enabled and wiring_count(setting) <= cap:
            payload = self._read("wirings", setting)
            if payload is not None and len(payload) == wiring_count(setting):
                try:
                    ws = [LocalWiring(setting, setting, tuple(g), tuple(map(tuple, h)),
                                      tuple(g2), tuple(map(tuple, h2)))
                          for g, h, g2, h2 in payload]
                except (ValueError, TypeError) as exc:
                    log.warning("discarding wiring cache for %s: %s", setting, exc)
                else:
                    self.hits += 1
                    seed_wirings(setting, ws)
                    return ws
        self.misses += 1
        ws = enumerate_wirings(setting, cap)
        if self.enabled:
            self._write("wirings", setting, [[w.gA, w.hA, w.gB, w.hB] for w in ws])
        return ws


def _encode_vertices(vt: VertexTable) -> dict:
    return {
        "fs": vt.fs,
        "gs": vt.gs,
        "matrix": base64.b64encode(np.ascontiguousarray(vt.matrix).tobytes()).decode(),
    }


def _decode_vertices(setting: Setting, payload) -> VertexTable:
    fs = tuple(tuple(f) for f in payload["fs"])
    gs = tuple(tuple(g) for g in payload["gs"])
    raw = np.frombuffer(base64.b64decode(payload["matrix"]), dtype=np.int8)
    M = raw.reshape(len(fs) * len(gs), setting.size).copy()
    M.setflags(write=False)
    if len(fs) * len(gs) != setting.n_deterministic:
        raise ValueError("vertex count does not match the setting")
    return VertexTable(setting, fs, gs, M)
