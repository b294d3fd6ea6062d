"""
Scenario presets
Probe definitions for every tabulated state, grouped into suites, loaded from a
human-editable JSON file and validated with pydantic.
"""
import json
import logging
import math
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from config import config
from core.errors import ConfigError
from core.states import Family, ProbeSpec, PureState, Role, build_probe, parse_configuration

logger = logging.getLogger(__name__)

# Four-mode ququart suites need a 256-dimensional eigensolve per quadrature point
EXPENSIVE_DIMENSION = 256


class Reference(BaseModel):
    mean_hb: Optional[float] = None
    mean_holevo: Optional[float] = None
    # tabulated Holevo values that the exact output states do not reproduce to 1e-3
    holevo_tolerance: Optional[float] = Field(default=None, gt=0.0)


class ProbeConfig(BaseModel):
    """One probe: mode roles plus the family that fixes its amplitudes"""
    name: str = "custom"
    label: str = "custom"
    configuration: Optional[str] = None
    d: int = Field(default=2, ge=2, le=4)
    family: Family
    theta: float = Field(default=math.pi / 2, ge=0.0, le=math.pi)
    weights: Optional[Tuple[float, float, float]] = None
    pair: Optional[Tuple[int, int]] = None
    blocks: Optional[List[List[int]]] = None
    amplitudes: Optional[List[float]] = None
    dims: Optional[List[int]] = None
    roles: Optional[List[Role]] = None
    noise: Optional[List[float]] = None
    reference: Optional[Reference] = None

    @model_validator(mode="after")
    def _fill_modes(self) -> "ProbeConfig":
        if self.roles is None:
            if self.configuration is None:
                raise ValueError("either 'configuration' or 'roles' is required")
            self.roles = list(parse_configuration(self.configuration))
        elif self.configuration is not None and tuple(self.roles) != parse_configuration(self.configuration):
            raise ValueError(f"roles {[r.value for r in self.roles]} disagree with configuration {self.configuration}")
        if self.dims is None:
            self.dims = [self.d] * len(self.roles)
        if len(self.dims) != len(self.roles):
            raise ValueError(f"{len(self.roles)} roles given for {len(self.dims)} modes")
        if self.configuration is None:
            signals = sum(1 for r in self.roles if r == Role.SIGNAL)
            idlers = len(self.roles) - signals
            self.configuration = f"{signals}S{idlers}I" if idlers else f"{signals}S"
        self.configuration = self.configuration.upper()
        return self

    @property
    def matrix_size(self) -> int:
        return math.prod(self.dims)

    @property
    def expensive(self) -> bool:
        return self.matrix_size >= EXPENSIVE_DIMENSION

    def spec(self) -> ProbeSpec:
        return ProbeSpec(
            family=self.family,
            dims=tuple(self.dims),
            roles=tuple(self.roles),
            theta=self.theta,
            weights=self.weights,
            pair=self.pair,
            blocks=tuple(tuple(b) for b in self.blocks) if self.blocks else None,
            amplitudes=self.amplitudes,
        )

    def build(self) -> PureState:
        return build_probe(self.spec())


class PresetFile(BaseModel):
    version: int = 1
    aliases: Dict[str, str] = Field(default_factory=dict)
    suites: Dict[str, List[str]] = Field(default_factory=dict)
    presets: List[ProbeConfig]

    @model_validator(mode="after")
    def _check_names(self) -> "PresetFile":
        names = [p.name for p in self.presets]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"duplicate preset names: {duplicates}")
        known = set(names)
        for suite, members in self.suites.items():
            missing = [m for m in members if m not in known]
            if missing:
                raise ValueError(f"suite '{suite}' names unknown presets: {missing}")
        for alias, target in self.aliases.items():
            if target not in known:
                raise ValueError(f"alias '{alias}' points to unknown preset '{target}'")
        return self

    def get(self, name: str) -> ProbeConfig:
        key = self.aliases.get(name.lower(), name.lower())
        for preset in self.presets:
            if preset.name == key:
                return preset
        raise ConfigError(f"Unknown preset '{name}' (see `presets` for the list)")

    def suite(self, ref: str) -> Tuple[str, List[ProbeConfig]]:
        """'four-ququart' or 'four-ququart-3s1i' -> (suite name, presets in table order)"""
        ref = ref.lower()
        for name in sorted(self.suites, key=len, reverse=True):
            if ref == name or ref.startswith(name + "-"):
                entries = [self.get(n) for n in self.suites[name]]
                configuration = ref[len(name) + 1:].upper()
                if configuration:
                    entries = [e for e in entries if e.configuration == configuration]
                    if not entries:
                        raise ConfigError(f"Suite '{name}' has no {configuration} states")
                return name, entries
        raise ConfigError(f"Unknown suite '{ref}' (choose from {', '.join(sorted(self.suites))})")


@lru_cache(maxsize=8)
def _load(path: str) -> PresetFile:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read presets file {path}: {e}") from e
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Presets file {path} is not valid JSON: {e}") from e
    presets = PresetFile.model_validate(data)
    logger.debug("Loaded %d presets in %d suites from %s", len(presets.presets), len(presets.suites), path)
    return presets


def load_presets(path: str = None) -> PresetFile:
    return _load(str(path or config.presets_path))


def resolve_probe(ref: str, path: str = None) -> ProbeConfig:
    """A preset name, or the path of a JSON file holding one probe definition"""
    candidate = Path(ref)
    if candidate.suffix.lower() == ".json":
        if not candidate.is_file():
            raise ConfigError(f"Scenario file {ref} not found")
        return ProbeConfig.model_validate_json(candidate.read_text(encoding="utf-8"))
    return load_presets(path).get(ref)
