"""Communication graph of the fleet: adjacency, Laplacian and the consensus gain matrix L + B"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import eigvalsh
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from fleetsim.config.settings import settings

logger = logging.getLogger(__name__)

Edge = Tuple[int, int, float]


class TopologyError(ValueError):
    """Raised when a communication graph cannot be constructed"""


@dataclass(frozen=True)
class Topology:
    """
    Undirected weighted communication graph with reference-access weights

    Attributes:
        n_vessels: Number of vessels (graph vertices)
        adjacency: Symmetric (n, n) matrix of edge weights a_ij, zero diagonal
        reference_access: Length-n vector of weights b_i on the reference trajectory
    """

    n_vessels: int
    adjacency: NDArray[np.float64]
    reference_access: NDArray[np.float64]

    def __post_init__(self) -> None:
        # read-only once built
        self.adjacency.setflags(write=False)
        self.reference_access.setflags(write=False)

    def neighbors(self, i: int) -> list[int]:
        """Indices j with a_ij > 0, in ascending order"""
        return [int(j) for j in np.flatnonzero(self.adjacency[i] > 0.0)]


@dataclass(frozen=True)
class ConsensusGain:
    """L + B together with its positive-definiteness report"""

    matrix: NDArray[np.float64]
    min_eigenvalue: float
    positive_definite: bool


def build_topology(
    edges: Iterable[Edge],
    reference_access: Sequence[float],
    n: int,
) -> Topology:
    """
    Build a symmetric topology from an undirected edge list

    Args:
        edges: (i, j, weight) triples, each entered in both directions
        reference_access: b_i per vessel
        n: Number of vessels

    Returns:
        Validated Topology

    Raises:
        TopologyError: index out of range, non-positive weight, self-edge or bad b vector
    """
    if n < 1:
        raise TopologyError(f"Fleet must contain at least one vessel, got n={n}")

    b = np.asarray(reference_access, dtype=np.float64).copy()
    if b.shape != (n,):
        raise TopologyError(f"reference_access must have length {n}, got shape {b.shape}")
    if np.any(b < 0.0) or not np.all(np.isfinite(b)):
        raise TopologyError(f"reference_access weights must be finite and >= 0, got {b.tolist()}")

    adjacency = np.zeros((n, n), dtype=np.float64)
    for i, j, weight in edges:
        if not (0 <= i < n and 0 <= j < n):
            raise TopologyError(f"Edge ({i}, {j}) references a vessel outside [0, {n})")
        if i == j:
            raise TopologyError(f"Self-edge on vessel {i} is not allowed")
        if weight < 0.0:
            raise TopologyError(f"Edge ({i}, {j}) has negative weight {weight}")
        if weight == 0.0 or not np.isfinite(weight):
            raise TopologyError(f"Edge ({i}, {j}) must have a finite positive weight, got {weight}")
        adjacency[i, j] = weight
        adjacency[j, i] = weight

    return Topology(n_vessels=n, adjacency=adjacency, reference_access=b)


def laplacian(t: Topology) -> NDArray[np.float64]:
    """L = D - A with D the diagonal of row sums"""
    return np.diag(t.adjacency.sum(axis=1)) - t.adjacency


def consensus_gain_matrix(t: Topology, tolerance: float | None = None) -> ConsensusGain:
    """
    Consensus gain matrix L + B and whether it is positive definite

    Args:
        t: Topology
        tolerance: Smallest eigenvalue must exceed this (default: settings.pd_tolerance)

    Returns:
        ConsensusGain report; a non-PD result is reported, not raised
    """
    tol = settings.pd_tolerance if tolerance is None else tolerance
    matrix = laplacian(t) + np.diag(t.reference_access)
    min_eig = float(eigvalsh(matrix)[0])
    return ConsensusGain(matrix=matrix, min_eigenvalue=min_eig, positive_definite=min_eig > tol)


def is_connected(t: Topology) -> bool:
    """True iff every vessel is reachable from vessel 0 over positive-weight edges"""
    if t.n_vessels == 1:
        return True
    reached = breadth_first_order(
        csr_matrix((t.adjacency > 0.0).astype(np.float64)), i_start=0, directed=False, return_predecessors=False
    )
    return len(reached) == t.n_vessels


def check_assumptions(t: Topology) -> list[str]:
    """
    Check the connectivity and reference-access conditions the consensus laws rely on

    Returns:
        Human-readable problems; empty when the graph is connected and some b_i > 0
    """
    problems = []
    if not is_connected(t):
        problems.append("communication graph is not connected")
    if not np.any(t.reference_access > 0.0):
        problems.append("no vessel has access to the reference trajectory (all b_i = 0)")
    gain = consensus_gain_matrix(t)
    if not gain.positive_definite:
        problems.append(f"L + B is not positive definite (min eigenvalue {gain.min_eigenvalue:.3e})")
    for problem in problems:
        logger.warning("Topology check: %s", problem)
    return problems
