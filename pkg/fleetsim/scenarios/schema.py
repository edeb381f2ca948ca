"""Scenario configuration schema, YAML parsing and serialization"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Any, List, Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from fleetsim.config.settings import settings
from fleetsim.dynamics.control_laws import ControlGains
from fleetsim.dynamics.estimator import EstimatorGains
from fleetsim.dynamics.graph_topology import Topology, TopologyError, build_topology
from fleetsim.dynamics.neurodynamics import ShuntingParams
from fleetsim.dynamics.vessel_model import REFERENCE_PARAMS, PhysicalParams, PhysicalParamsError

Vector6 = Annotated[List[float], Field(min_length=6, max_length=6)]

ZEROS6 = [0.0] * 6


class ScenarioConfigError(ValueError):
    """Invalid scenario text or file; carries the source, line and field when known"""

    def __init__(self, message: str, source: str = "<text>", line: int | None = None, field: str | None = None):
        self.source = source
        self.line = line
        self.field = field
        where = source if line is None else f"{source}:{line}"
        if field:
            where = f"{where} [{field}]"
        super().__init__(f"{where}: {message}")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PhysicalParamsConfig(_Strict):
    """Physical parameters in SI units, added-mass terms negative"""

    m: float
    I_x: float
    I_y: float
    I_z: float
    beta_vx: float
    beta_vy: float
    beta_vz: float
    beta_wx: float
    beta_wy: float
    beta_wz: float
    beta_dvx: float
    beta_dvy: float
    beta_dvz: float
    beta_dwx: float
    beta_dwy: float
    beta_dwz: float

    @model_validator(mode="after")
    def _physical(self) -> "PhysicalParamsConfig":
        try:
            self.to_params().validate()
        except PhysicalParamsError as e:
            raise ValueError(str(e)) from e
        return self

    def to_params(self) -> PhysicalParams:
        return PhysicalParams(**self.model_dump())

    @classmethod
    def from_params(cls, p: PhysicalParams) -> "PhysicalParamsConfig":
        return cls(**{name: getattr(p, name) for name in cls.model_fields})


class VesselConfig(_Strict):
    eta0: Vector6
    nu0: Vector6 = Field(default_factory=lambda: list(ZEROS6))
    params: PhysicalParamsConfig = Field(default_factory=lambda: PhysicalParamsConfig.from_params(REFERENCE_PARAMS))


class EdgeConfig(_Strict):
    i: int
    j: int
    weight: float = 1.0


class OffsetConfig(_Strict):
    """Formation offset Delta_ij: desired eta_i - eta_j"""

    i: int
    j: int
    offset: Vector6


class TopologyConfig(_Strict):
    edges: List[EdgeConfig] = Field(default_factory=list)
    reference_access: List[float]
    offsets: List[OffsetConfig] = Field(default_factory=list)


class ShuntingConfig(_Strict):
    a: float = Field(gt=0.0)
    b: float = Field(gt=0.0)
    d: float = Field(gt=0.0)


class GainConfig(_Strict):
    """Gain diagonals; L and P belong to the estimator"""

    K1: Vector6
    K2: Vector6
    L: Vector6
    P: Vector6
    shunting: Optional[ShuntingConfig] = None
    sat_layer: float = Field(default=1.0, gt=0.0)
    tau_limit: Optional[Vector6] = None
    b_floor: Optional[float] = Field(default=None, gt=0.0)

    @field_validator("K1", "K2", "L", "P", "tau_limit")
    @classmethod
    def _positive(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is not None and any(x <= 0.0 for x in v):
            raise ValueError(f"gain diagonal entries must be strictly positive, got {v}")
        return v

    def control_gains(self) -> ControlGains:
        shunting = None if self.shunting is None else ShuntingParams(self.shunting.a, self.shunting.b, self.shunting.d)
        return ControlGains(
            K1=np.asarray(self.K1, dtype=np.float64),
            K2=np.asarray(self.K2, dtype=np.float64),
            shunting=shunting,
            sat_layer=self.sat_layer,
            tau_limit=None if self.tau_limit is None else np.asarray(self.tau_limit, dtype=np.float64),
            **({} if self.b_floor is None else {"b_floor": self.b_floor}),
        )

    def estimator_gains(self) -> EstimatorGains:
        return EstimatorGains.from_diagonals(self.L, self.P)


class ReferenceConfig(_Strict):
    """
    Reference trajectory eta^d(t)

    exp_ramp: origin + rate * t + amplitude * (1 - exp(-decay * t))
    sinusoid: origin + amplitude * sin(omega * t + phase)
    """

    kind: Literal["exp_ramp", "sinusoid"] = "exp_ramp"
    origin: Vector6 = Field(default_factory=lambda: list(ZEROS6))
    rate: Vector6 = Field(default_factory=lambda: list(ZEROS6))
    amplitude: Vector6 = Field(default_factory=lambda: list(ZEROS6))
    decay: float = Field(default=1.0, gt=0.0)
    omega: float = 1.0
    phase: Vector6 = Field(default_factory=lambda: list(ZEROS6))

    def is_stationary(self) -> bool:
        if self.kind == "exp_ramp":
            return not any(self.rate) and not any(self.amplitude)
        return self.omega == 0.0 or not any(self.amplitude)


class DisturbanceConfig(_Strict):
    """Force-level disturbance d(t) in N and N*m"""

    kind: Literal["none", "sinusoidal"] = "none"
    amplitudes: Vector6 = Field(default_factory=lambda: [110.0, 110.0, 110.0, 0.5, 0.5, 0.5])
    frequency: float = 1.0
    scale: float = Field(default=1.0, ge=0.0)

    @field_validator("amplitudes")
    @classmethod
    def _nonnegative(cls, v: List[float]) -> List[float]:
        if any(x < 0.0 for x in v):
            raise ValueError(f"disturbance amplitudes must be >= 0, got {v}")
        return v


class NoiseConfig(_Strict):
    """Gaussian measurement noise standard deviations per channel"""

    kind: Literal["none", "gaussian"] = "none"
    sigma_eta: Vector6 = Field(default_factory=lambda: [0.01] * 6)
    sigma_v: Vector6 = Field(default_factory=lambda: [0.01] * 6)

    @field_validator("sigma_eta", "sigma_v")
    @classmethod
    def _nonnegative(cls, v: List[float]) -> List[float]:
        if any(x < 0.0 for x in v):
            raise ValueError(f"noise standard deviations must be >= 0, got {v}")
        return v


class ScenarioConfig(_Strict):
    """One fully specified simulation run"""

    name: str
    controller: Literal["blc", "lc", "lsmc"]
    vessels: List[VesselConfig] = Field(min_length=1)
    topology: TopologyConfig
    gains: GainConfig
    reference: ReferenceConfig
    disturbance: DisturbanceConfig = Field(default_factory=DisturbanceConfig)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    dt: float = Field(default_factory=lambda: settings.default_dt, gt=0.0)
    horizon: float = Field(default_factory=lambda: settings.default_horizon, ge=0.0)
    record_every: int = Field(default_factory=lambda: settings.default_record_every, ge=1)
    seed: int = Field(default_factory=lambda: settings.default_seed)

    @field_validator("controller", mode="before")
    @classmethod
    def _lowercase(cls, v: Any) -> Any:
        return v.lower() if isinstance(v, str) else v

    @model_validator(mode="after")
    def _consistency(self) -> "ScenarioConfig":
        n = len(self.vessels)
        try:
            topology = self.build_topology()
        except TopologyError as e:
            raise ValueError(f"topology: {e}") from e

        stored = {}
        for off in self.topology.offsets:
            if not (0 <= off.i < n and 0 <= off.j < n):
                raise ValueError(f"offset ({off.i}, {off.j}) references a vessel outside [0, {n})")
            if topology.adjacency[off.i, off.j] <= 0.0:
                raise ValueError(f"offset ({off.i}, {off.j}) given for a non-adjacent pair")
            if any(off.offset[3:]):
                raise ValueError(f"offset ({off.i}, {off.j}) must have zero attitude components")
            if (off.i, off.j) in stored:
                raise ValueError(f"offset ({off.i}, {off.j}) given twice")
            stored[(off.i, off.j)] = off.offset

        for (i, j), delta in stored.items():
            reverse = stored.get((j, i))
            if reverse is not None and any(a != -b for a, b in zip(delta, reverse)):
                raise ValueError(f"offsets must satisfy Delta_{i}{j} = -Delta_{j}{i}, got {delta} and {reverse}")

        if self.controller == "blc" and self.gains.shunting is None:
            raise ValueError("controller blc requires gains.shunting (a, b, d)")

        if np.any(topology.reference_access == 0.0) and not self.reference.is_stationary():
            raise ValueError(
                "vessels with reference_access 0 cannot obtain the reference rate; "
                "use b_i > 0 for every vessel or a stationary reference"
            )
        return self

    @property
    def n_vessels(self) -> int:
        return len(self.vessels)

    def build_topology(self) -> Topology:
        edges = [(e.i, e.j, e.weight) for e in self.topology.edges]
        return build_topology(edges, self.topology.reference_access, len(self.vessels))

    def offsets_array(self) -> np.ndarray:
        """(n, n, 6) Delta_ij; a stored Delta_ij implies Delta_ji = -Delta_ij"""
        n = self.n_vessels
        offsets = np.zeros((n, n, 6))
        for off in self.topology.offsets:
            offsets[off.j, off.i] = -np.asarray(off.offset)
        for off in self.topology.offsets:
            offsets[off.i, off.j] = off.offset
        return offsets


def _node_line(node: yaml.Node | None, loc: tuple) -> int | None:
    """1-based line of the YAML node addressed by a pydantic error location"""
    line = None if node is None else node.start_mark.line + 1
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            match = next((v for k, v in node.value if k.value == key), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            match = node.value[key]
        else:
            match = None
        if match is None:
            break
        node = match
        line = node.start_mark.line + 1
    return line


def parse_config(text: str, source: str = "<text>") -> ScenarioConfig:
    """
    Parse and validate a YAML scenario

    Args:
        text: YAML document
        source: Name used in error messages

    Returns:
        Validated ScenarioConfig

    Raises:
        ScenarioConfigError: YAML syntax error, empty document, unknown key or violated invariant
    """
    try:
        data = yaml.safe_load(text)
        root = yaml.compose(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ScenarioConfigError(
            f"invalid YAML: {getattr(e, 'problem', e)}",
            source=source,
            line=None if mark is None else mark.line + 1,
        ) from e

    if data is None:
        raise ScenarioConfigError("empty scenario document", source=source)
    if not isinstance(data, dict):
        raise ScenarioConfigError("scenario document must be a mapping", source=source, line=1)

    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = tuple(first["loc"])
        field = ".".join(str(part) for part in loc) or None
        raise ScenarioConfigError(first["msg"], source=source, line=_node_line(root, loc), field=field) from e


def serialize_config(cfg: ScenarioConfig) -> str:
    """YAML text that parse_config maps back to an equal config"""
    return yaml.safe_dump(cfg.model_dump(mode="python"), sort_keys=False, default_flow_style=None)


def read_config_file(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioConfigError(f"cannot read scenario file: {e.strerror}", source=str(path)) from e
    return parse_config(text, source=str(path))
