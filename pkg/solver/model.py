"""
Problem instances for the multi-AP deadline downlink.

An instance is N access points, M clients, an interval of tau slots and the
N x M matrix of per-slot success probabilities. Client and AP indices are
0-based throughout the package; Unserved is encoded as -1.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import serde
import serde.json

from . import rng
from .errors import InvalidInstance

logger = logging.getLogger("solver.model")

UNSERVED = -1

# Two APs one coverage radius apart in the unit square.
COVERAGE_RADIUS = 1 / 3
AP_POSITIONS = [[1 / 3, 1 / 2], [2 / 3, 1 / 2]]


@serde.serde
@dataclass
class Geometry:
    ap_positions: List[List[float]]
    coverage_radius: float
    client_positions: List[List[float]]

    def success_matrix(self) -> np.ndarray:
        aps = np.asarray(self.ap_positions, dtype=float)
        clients = np.asarray(self.client_positions, dtype=float).reshape(-1, 2)
        distance = np.linalg.norm(aps[:, None, :] - clients[None, :, :], axis=2)
        return np.clip(1.0 - np.minimum(distance / self.coverage_radius, 1.0), 0.0, 1.0)


@serde.serde
@dataclass
class Instance:
    n_aps: int
    n_clients: int
    tau: int
    success: List[List[float]]
    weights: Optional[List[float]] = None
    geometry: Optional[Geometry] = None

    @property
    def p(self) -> np.ndarray:
        return np.asarray(self.success, dtype=float).reshape(self.n_aps, self.n_clients)

    @property
    def w(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(self.n_clients)
        return np.asarray(self.weights, dtype=float)

    @property
    def weighted(self) -> bool:
        return self.weights is not None and any(w != 1 for w in self.weights)

    @property
    def empty(self) -> bool:
        return self.n_clients == 0

    @property
    def w_max(self) -> float:
        return float(self.w.max()) if self.n_clients else 1.0

    def with_weights(self, weights) -> "Instance":
        return build_instance(self.n_aps, self.n_clients, self.tau, self.success, weights)


def greedy_sorted(instance: Instance, ap: int, clients) -> List[int]:
    """Descending w_j * p_ij, ties by ascending client index."""
    p = instance.success[ap]
    w = instance.w
    return sorted(clients, key=lambda j: (-w[j] * p[j], j))


@serde.serde
@dataclass
class Partition:
    owner: List[int]
    order: List[List[int]] = field(default_factory=list)

    @classmethod
    def from_owner(cls, instance: Instance, owner) -> "Partition":
        owner = [int(o) for o in owner]
        members = [[] for _ in range(instance.n_aps)]
        for j, ap in enumerate(owner):
            if ap != UNSERVED:
                members[ap].append(j)
        order = [greedy_sorted(instance, ap, clients) for ap, clients in enumerate(members)]
        return cls(owner=owner, order=order)

    @classmethod
    def unserved(cls, instance: Instance) -> "Partition":
        return cls.from_owner(instance, [UNSERVED] * instance.n_clients)

    def validate(self, instance: Instance):
        if len(self.owner) != instance.n_clients:
            raise InvalidInstance(f"partition covers {len(self.owner)} clients, instance has {instance.n_clients}")
        if len(self.order) != instance.n_aps:
            raise InvalidInstance(f"partition orders {len(self.order)} APs, instance has {instance.n_aps}")

        seen = set()
        for ap, clients in enumerate(self.order):
            for j in clients:
                if not 0 <= j < instance.n_clients:
                    raise InvalidInstance(f"AP {ap} serves unknown client {j}")
                if j in seen:
                    raise InvalidInstance(f"client {j} is served twice")
                if self.owner[j] != ap:
                    raise InvalidInstance(f"client {j} is ordered on AP {ap} but owned by {self.owner[j]}")
                seen.add(j)

        for j, ap in enumerate(self.owner):
            if ap != UNSERVED and j not in seen:
                raise InvalidInstance(f"client {j} is owned by AP {ap} but missing from its order")
            if ap != UNSERVED and not 0 <= ap < instance.n_aps:
                raise InvalidInstance(f"client {j} is owned by unknown AP {ap}")


def build_instance(n_aps, n_clients, tau, success, weights=None, geometry=None) -> Instance:
    for name, value in (('n_aps', n_aps), ('n_clients', n_clients), ('tau', tau)):
        if isinstance(value, bool) or int(value) != value or value < 1:
            raise InvalidInstance(f"{name} must be a positive integer, got {value}")
    n_aps, n_clients, tau = int(n_aps), int(n_clients), int(tau)

    if len(success) != n_aps or any(len(row) != n_clients for row in success):
        shape = f"{len(success)}x{len(success[0]) if len(success) else 0}"
        raise InvalidInstance(f"dimension mismatch: success matrix is {shape}, expected {n_aps}x{n_clients}")

    success = [[float(v) for v in row] for row in success]
    for i, row in enumerate(success):
        for j, v in enumerate(row):
            if not math.isfinite(v) or v < 0 or v > 1:
                raise InvalidInstance(f"success probability p[{i}][{j}]={v} is outside [0, 1]")

    if weights is not None:
        if len(weights) != n_clients:
            raise InvalidInstance(f"dimension mismatch: {len(weights)} weights for {n_clients} clients")
        weights = [float(w) for w in weights]
        for j, w in enumerate(weights):
            if not math.isfinite(w) or w < 1:
                raise InvalidInstance(f"weight of client {j} is {w}, weights must be >= 1")

    return Instance(n_aps=n_aps, n_clients=n_clients, tau=tau, success=success,
                    weights=weights, geometry=geometry)


def empty_instance(n_aps, tau) -> Instance:
    """Marker for an interval without demand; every solver reports capacity 0."""
    return Instance(n_aps=n_aps, n_clients=0, tau=tau, success=[[] for _ in range(n_aps)], weights=[])


def sample_coverage_point(generator, ap_positions, radius):
    """Uniform point in the union of the coverage disks, by rejection from the bounding box."""
    aps = np.asarray(ap_positions, dtype=float)
    low = aps.min(axis=0) - radius
    high = aps.max(axis=0) + radius
    while True:
        point = generator.uniform(low, high)
        if np.min(np.linalg.norm(aps - point, axis=1)) <= radius:
            return point


def generate_geometric_instance(seed, n_clients, tau):
    if n_clients < 1:
        raise InvalidInstance(f"n_clients must be positive, got {n_clients}")

    generator = rng.generator(seed, rng.GEOMETRY)
    clients = [sample_coverage_point(generator, AP_POSITIONS, COVERAGE_RADIUS).tolist() for _ in range(n_clients)]
    geometry = Geometry(ap_positions=[list(p) for p in AP_POSITIONS], coverage_radius=COVERAGE_RADIUS,
                        client_positions=clients)

    logger.debug(f"generated geometry for seed {seed} with {n_clients} clients")
    instance = build_instance(len(AP_POSITIONS), n_clients, tau, geometry.success_matrix().tolist(), geometry=geometry)
    return instance, geometry


def virtual_origins(demand) -> List[int]:
    """Original client of every virtual client produced by virtual_expand."""
    return [j for j, count in enumerate(demand) for _ in range(int(count))]


def virtual_expand(instance: Instance, demand) -> Instance:
    if len(demand) != instance.n_clients:
        raise InvalidInstance(f"demand has {len(demand)} entries, instance has {instance.n_clients} clients")
    if any(int(d) != d or d < 0 for d in demand):
        raise InvalidInstance(f"demand must be nonnegative integers, got {demand}")

    origins = virtual_origins(demand)
    if not origins:
        return empty_instance(instance.n_aps, instance.tau)

    success = [[row[j] for j in origins] for row in instance.success]
    weights = None
    if instance.weights is not None:
        weights = [instance.weights[j] for j in origins]

    geometry = None
    if instance.geometry is not None:
        g = instance.geometry
        geometry = Geometry(ap_positions=g.ap_positions, coverage_radius=g.coverage_radius,
                            client_positions=[g.client_positions[j] for j in origins])

    return build_instance(instance.n_aps, len(origins), instance.tau, success, weights, geometry)


def save_instance(instance: Instance, path):
    with open(path, 'w') as f:
        f.write(serde.json.to_json(instance))


def load_instance(path) -> Instance:
    with open(path) as f:
        raw = serde.json.from_json(Instance, f.read())
    return build_instance(raw.n_aps, raw.n_clients, raw.tau, raw.success, raw.weights, raw.geometry)
