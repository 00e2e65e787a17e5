"""The atlas document: every computed layer for one (spec, window), plus a content-addressed cache."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .domains import EtaArc, FundamentalDomain
from .tracing import StripRecord, TracedCurve
from .verify import CheckReport
from .zeros import MergeTree, ZeroRecord

CACHE_ENV = "ATLAS_CACHE_DIR"


@dataclass
class AtlasDocument:
    spec: dict
    window: dict | None = None
    curves: list = field(default_factory=list)
    zeros: list = field(default_factory=list)
    strips: list = field(default_factory=list)
    merge_trees: list = field(default_factory=list)
    eta_arcs: list = field(default_factory=list)
    domains: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)  # plain JSON: evaluations, fusion scans, involution summaries
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"spec": self.spec, "window": self.window,
                "curves": [c.to_dict() for c in self.curves],
                "zeros": [z.to_dict() for z in self.zeros],
                "strips": [s.to_dict() for s in self.strips],
                "merge_trees": [t.to_dict() for t in self.merge_trees],
                "eta_arcs": [a.to_dict() for a in self.eta_arcs],
                "domains": [d.to_dict() for d in self.domains],
                "reports": [r.to_dict() for r in self.reports],
                "extras": self.extras, "provenance": self.provenance}

    @classmethod
    def from_dict(cls, d: dict) -> "AtlasDocument":
        return cls(d["spec"], d.get("window"),
                   [TracedCurve.from_dict(c) for c in d.get("curves", [])],
                   [ZeroRecord.from_dict(z) for z in d.get("zeros", [])],
                   [StripRecord.from_dict(s) for s in d.get("strips", [])],
                   [MergeTree.from_dict(t) for t in d.get("merge_trees", [])],
                   [EtaArc.from_dict(a) for a in d.get("eta_arcs", [])],
                   [FundamentalDomain.from_dict(x) for x in d.get("domains", [])],
                   [CheckReport.from_dict(r) for r in d.get("reports", [])],
                   d.get("extras", {}), d.get("provenance", {}))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AtlasDocument":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json())
        return path

    @classmethod
    def load(cls, path) -> "AtlasDocument":
        return cls.from_json(Path(path).read_text())

    def dangling_references(self) -> list:
        """References that do not resolve inside the document (empty for a consistent document)."""
        curve_ids = {c.id for c in self.curves}
        zero_ids = {z.id for z in self.zeros}
        bad = []
        for s in self.strips:
            for ref in (s.lower, s.upper):
                if ref is not None and curve_ids and ref not in curve_ids:
                    bad.append(("strip", s.k, ref))
            for z in s.zero_ids + s.branch_ids:
                if zero_ids and z not in zero_ids:
                    bad.append(("strip", s.k, z))
        for t in self.merge_trees:
            for z in t.leaves + [n.branch_id for n in t.nodes]:
                if z not in zero_ids:
                    bad.append(("merge_tree", t.strip, z))
        for dmn in self.domains:
            if dmn.contains_zero not in zero_ids:
                bad.append(("domain", dmn.index, dmn.contains_zero))
            for b in dmn.boundary:
                if b["type"] in ("GammaPrime", "GammaRay") and b["ref"] not in curve_ids:
                    bad.append(("domain", dmn.index, b["ref"]))
        return bad


def provenance(tolerances: dict, command: str = "") -> dict:
    return {"tool": "dirichlet_atlas", "version": __version__, "command": command,
            "tolerances": dict(tolerances), "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}


# ---------------------------------------------------------------------------
# cache
# ---------------------------------------------------------------------------

def cache_key(spec_hash: str, layer: str, window: dict | None, tolerances: dict) -> str:
    payload = json.dumps({"spec": spec_hash, "layer": layer, "window": window, "tol": tolerances,
                          "version": __version__}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:24]


class Cache:
    """JSON payloads stored under content-hash names; ``None`` directory disables caching."""

    def __init__(self, directory=None):
        directory = directory or os.environ.get(CACHE_ENV)
        self.dir = Path(directory) if directory else None

    def get(self, key: str):
        if self.dir is None:
            return None
        p = self.dir / f"{key}.json"
        if not p.exists():
            return None
        return json.loads(p.read_text())

    def put(self, key: str, payload) -> None:
        if self.dir is None:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        # write then rename so concurrent readers never see a partial file
        fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, sort_keys=True)
        os.replace(tmp, self.dir / f"{key}.json")
