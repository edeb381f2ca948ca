"""Bundled scenarios: three experiments times three controllers"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Dict, List

import yaml

from fleetsim.scenarios.schema import GainConfig, ScenarioConfig, ScenarioConfigError, read_config_file

DATA_DIR = Path(__file__).parent / "data"

SCENARIOS = ("scenario1", "scenario2", "scenario3")
CONTROLLERS = ("blc", "lc", "lsmc")


@lru_cache(maxsize=1)
def reference_gains() -> Dict[str, GainConfig]:
    """Gain table per controller from data/reference_gains.yaml"""
    with open(DATA_DIR / "reference_gains.yaml", "r", encoding="utf-8") as f:
        table = yaml.safe_load(f)
    return {name: GainConfig.model_validate(gains) for name, gains in table.items()}


def reference_scenario(index: int) -> ScenarioConfig:
    """Bundled file reference_scenario<index>.yaml as shipped (BLC gains)"""
    return read_config_file(DATA_DIR / f"reference_scenario{index}.yaml")


def with_controller(cfg: ScenarioConfig, controller: str, name: str | None = None) -> ScenarioConfig:
    """Same scenario under another controller with that controller's gain table"""
    controller = controller.lower()
    gains = reference_gains().get(controller)
    if gains is None:
        raise ScenarioConfigError(f"unknown controller '{controller}'", field="controller")
    data = cfg.model_dump()
    data.update(controller=controller, gains=gains.model_dump(), name=name or cfg.name)
    return ScenarioConfig.model_validate(data)


def builtin_scenarios() -> List[ScenarioConfig]:
    """
    The nine bundled configs, named scenario<k>-<controller>

    Returns:
        scenario1..3 (nominal, disturbance, noise) times blc, lc, lsmc
    """
    configs = []
    for k, scenario in enumerate(SCENARIOS, start=1):
        base = reference_scenario(k)
        for controller in CONTROLLERS:
            configs.append(with_controller(base, controller, name=f"{scenario}-{controller}"))
    return configs


def builtin_names() -> List[str]:
    return [f"{s}-{c}" for s in SCENARIOS for c in CONTROLLERS] + [f"reference_{s}" for s in SCENARIOS]


def load_config(name_or_path: str) -> ScenarioConfig:
    """
    Resolve a builtin name or a scenario file path

    Accepted names: scenario<k>-<controller>, scenario<k> (BLC), reference_scenario<k>.

    Raises:
        ScenarioConfigError: unknown name, unreadable file or invalid content
    """
    key = name_or_path.strip().lower()
    if key.startswith("reference_"):
        key = key[len("reference_"):]
    scenario, _, controller = key.partition("-")
    if scenario in SCENARIOS:
        base = reference_scenario(SCENARIOS.index(scenario) + 1)
        if not controller:
            return base
        return with_controller(base, controller, name=f"{scenario}-{controller}")

    path = Path(name_or_path)
    if not path.exists():
        raise ScenarioConfigError(
            f"no builtin scenario or file named '{name_or_path}' (builtins: {', '.join(builtin_names())})",
            source=name_or_path,
        )
    return read_config_file(path)
