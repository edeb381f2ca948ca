"""Shunting neural dynamics used as a bounded smooth filter of the auxiliary variable z"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True)
class ShuntingParams:
    """
    Shunting model constants, shared by the six DOFs of a vessel

    Attributes:
        a: Passive decay rate [1/s]
        b: Upper activity bound
        d: Lower activity bound magnitude
    """

    a: float
    b: float
    d: float

    def __post_init__(self) -> None:
        if self.a <= 0.0 or self.b <= 0.0 or self.d <= 0.0:
            raise ValueError(f"Shunting constants must be positive, got a={self.a}, b={self.b}, d={self.d}")


@dataclass(frozen=True)
class NeuroState:
    """Neural activities of one vessel, each confined to [-d, b]"""

    vartheta: NDArray[np.float64]

    @classmethod
    def initial(cls) -> "NeuroState":
        return cls(np.zeros(6))

    def within_bounds(self, p: ShuntingParams, tolerance: float = 0.0) -> bool:
        return bool(np.all(self.vartheta >= -p.d - tolerance) and np.all(self.vartheta <= p.b + tolerance))


def shunting_activation(z: NDArray[np.float64], p: ShuntingParams) -> NDArray[np.float64]:
    """g(z) = b z for z >= 0, d z for z < 0"""
    return np.where(z >= 0.0, p.b * z, p.d * z)


def shunting_rate(state: NeuroState, z: NDArray[np.float64], p: ShuntingParams) -> NDArray[np.float64]:
    """vartheta_dot = -(a + |z|) vartheta + g(z), componentwise"""
    return -(p.a + np.abs(z)) * state.vartheta + shunting_activation(z, p)


def shunting_equilibrium(z: NDArray[np.float64], p: ShuntingParams) -> NDArray[np.float64]:
    """Fixed point g(z) / (a + |z|) for a constant input"""
    return shunting_activation(z, p) / (p.a + np.abs(z))
