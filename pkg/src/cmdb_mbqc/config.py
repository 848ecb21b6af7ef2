"""Run configuration: a versioned JSON document, validated strictly."""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from cmdb_mbqc.dense import DEFAULT_CAP
from cmdb_mbqc.lattice import LatticeSpec, Layout

SCHEMA_VERSION = 1
SCENARIOS = ("chain-to-cluster", "axis-frequencies", "oracle-crosscheck", "coupling-demo", "distill-2d")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scenario: str
    lattice: LatticeSpec = field(default_factory=LatticeSpec)
    seed: int = 0
    trials: int = 1
    forced: list[str] | None = None  # POVM axis string per chain
    forced_steps: dict[str, int] | None = None  # distillation/coupling outcomes by step key
    coupling: list[tuple[int, str]] | None = None  # (merge id, mode)
    oracle: bool = False
    dense_cap: int = DEFAULT_CAP
    out_dir: str = "out"
    workers: int = 1
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {', '.join(SCENARIOS)}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.oracle and self.lattice.n_qubits > self.dense_cap:
            raise ConfigError(
                f"oracle needs <= {self.dense_cap} qubits, lattice has {self.lattice.n_qubits}"
            )
        if self.forced is not None:
            if len(self.forced) != self.lattice.chains:
                raise ConfigError("forced needs one axis string per chain")
            for s in self.forced:
                if len(s) != self.lattice.sites_per_chain or set(s) - set("xyz"):
                    raise ConfigError(f"forced string {s!r} must be {self.lattice.sites_per_chain} letters from xyz")
        if self.coupling is not None:
            self.coupling = [(int(m), str(mode)) for m, mode in self.coupling]
            for _, mode in self.coupling:
                if mode not in ("connect", "disconnect"):
                    raise ConfigError(f"coupling mode {mode!r} is not connect/disconnect")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lattice"] = self.lattice.to_dict()
        if self.coupling is not None:
            d["coupling"] = [list(c) for c in self.coupling]
        return d


_LATTICE_KEYS = {"chains", "sites_per_chain", "layout", "stagger"}


def _line_of(text: str, key: str) -> int | None:
    m = re.search(rf'"{re.escape(key)}"\s*:', text)
    return None if m is None else text.count("\n", 0, m.start()) + 1


def _where(text: str, key: str) -> str:
    line = _line_of(text, key)
    return f"line {line}: " if line else ""


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("line 1: config must be a JSON object")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(
            f"{_where(text, 'schema_version')}schema_version must be {SCHEMA_VERSION}, got {data.get('schema_version')!r}"
        )
    known = {f.name for f in fields(RunConfig)}
    for key in data:
        if key not in known:
            raise ConfigError(f"{_where(text, key)}unknown field {key!r}")
    if "scenario" not in data:
        raise ConfigError("line 1: missing required field 'scenario'")
    lat = data.get("lattice", {})
    if not isinstance(lat, dict):
        raise ConfigError(f"{_where(text, 'lattice')}lattice must be an object")
    for key in lat:
        if key not in _LATTICE_KEYS:
            raise ConfigError(f"{_where(text, key)}unknown lattice field {key!r}")
    try:
        if "layout" in lat:
            Layout(lat["layout"])
        data["lattice"] = LatticeSpec(**lat)
    except ValueError as exc:
        raise ConfigError(f"{_where(text, 'lattice')}{exc}") from None
    for key in ("seed", "trials", "dense_cap", "workers"):
        if key in data and (not isinstance(data[key], int) or isinstance(data[key], bool)):
            raise ConfigError(f"{_where(text, key)}{key} must be an integer")
    if "oracle" in data and not isinstance(data["oracle"], bool):
        raise ConfigError(f"{_where(text, 'oracle')}oracle must be true or false")
    try:
        return RunConfig(**data)
    except ConfigError as exc:
        raise ConfigError(f"{_where(text, _blame(str(exc)))}{exc}") from None


def _blame(msg: str) -> str:
    for key in ("scenario", "trials", "workers", "oracle", "forced", "coupling"):
        if msg.startswith(key) or key in msg.split()[:3]:
            return key
    return "scenario"


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)
