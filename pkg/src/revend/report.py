"""Serializable report documents (JSON-compatible dictionaries)."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from .criteria import ConformalReport
from .divergence import ClassifierConfig, DivergenceVerdict, Family, Kind, TailModel

SCHEMA_VERSION = 1


def clean_json(x):
    """Replace non-finite floats by None so the document is strict JSON."""
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {str(k): clean_json(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [clean_json(v) for v in x]
    return x


def verdict_to_dict(v: DivergenceVerdict) -> Dict[str, Any]:
    t = v.tail
    return clean_json({
        "kind": v.kind.value,
        "tail": {"family": t.family.value, "fit_window": list(t.fit_window),
                 "fit_quality": t.fit_quality, "estimate": t.estimate, "stderr": t.stderr},
        "horizon": v.horizon,
        "partials": [list(p) for p in v.partials],
        "value": v.value,
        "error": v.error,
        "note": v.note,
    })


def verdict_from_dict(d: Dict[str, Any]) -> DivergenceVerdict:
    t = d["tail"]
    tail = TailModel(Family(t["family"]), tuple(t["fit_window"]), t["fit_quality"],
                     t["estimate"], t["stderr"])
    return DivergenceVerdict(Kind(d["kind"]), tail, d["horizon"],
                             [tuple(p) for p in d["partials"]], d["value"], d["error"], d["note"])


def _evidence_out(ev: Dict) -> Dict:
    return clean_json(dict(ev))


def _evidence_in(ev: Dict) -> Dict:
    return {k: (list(v) if isinstance(v, list) else v) for k, v in ev.items()}


def conformal_to_dict(r: ConformalReport) -> Dict[str, Any]:
    return {
        "end_name": r.end_name,
        "kappa": r.kappa,
        "verdict": r.verdict,
        "fired": [[cid, _evidence_out(ev)] for cid, ev in r.fired],
        "consistency": [[cid, status, _evidence_out(ev)] for cid, status, ev in r.consistency],
        "integrals": {k: verdict_to_dict(v) for k, v in r.integrals.items()},
        "flags": list(r.flags),
        "params": clean_json(dict(r.params)),
    }


def conformal_from_dict(d: Dict[str, Any]) -> ConformalReport:
    return ConformalReport(
        end_name=d["end_name"],
        kappa=d["kappa"],
        verdict=d["verdict"],
        fired=[(cid, _evidence_in(ev)) for cid, ev in d["fired"]],
        consistency=[(cid, status, _evidence_in(ev)) for cid, status, ev in d["consistency"]],
        integrals={k: verdict_from_dict(v) for k, v in d["integrals"].items()},
        flags=list(d["flags"]),
        params=dict(d["params"]),
    )


def config_to_dict(cfg: ClassifierConfig) -> Dict[str, Any]:
    return asdict(cfg)


def config_from_dict(d: Dict[str, Any]) -> ClassifierConfig:
    return ClassifierConfig(**d)


@dataclass
class ReportDocument:
    reports: List[ConformalReport]
    config: ClassifierConfig
    tool_version: str
    timings: Optional[Dict[str, float]] = None
    extra: Dict[str, Any] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "config": config_to_dict(self.config),
            "reports": [conformal_to_dict(r) for r in self.reports],
            "timings": clean_json(self.timings) if self.timings is not None else None,
            "extra": clean_json(self.extra),
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ReportDocument":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {d.get('schema_version')!r}")
        return cls(
            reports=[conformal_from_dict(r) for r in d["reports"]],
            config=config_from_dict(d["config"]),
            tool_version=d["tool_version"],
            timings=d["timings"],
            extra=d.get("extra", {}),
            schema_version=d["schema_version"],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ReportDocument":
        return cls.from_dict(json.loads(text))
