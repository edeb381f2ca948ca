"""Config builders shared by the test modules"""

from __future__ import annotations

from fleetsim.scenarios.schema import ScenarioConfig


def short(cfg: ScenarioConfig, horizon: float, **updates) -> ScenarioConfig:
    """Validated copy of a config with a shorter horizon"""
    data = cfg.model_dump()
    data.update(horizon=horizon, **updates)
    return ScenarioConfig.model_validate(data)


def single_vessel_config(controller: str = "lc", **updates) -> ScenarioConfig:
    """One vessel at rest at the origin with a stationary reference"""
    data = {
        "name": "single",
        "controller": controller,
        "vessels": [{"eta0": [0.0] * 6}],
        "topology": {"edges": [], "reference_access": [1.0]},
        "gains": {
            "K1": [1.0] * 6,
            "K2": [1.0] * 6,
            "L": [100.0] * 6,
            "P": [0.1] * 6,
            "shunting": {"a": 10.0, "b": 50.0, "d": 50.0},
        },
        "reference": {"kind": "exp_ramp"},
    }
    data.update(updates)
    return ScenarioConfig.model_validate(data)
