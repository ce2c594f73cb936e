"""
AS-level topologies with business relationships.

Text format, one link per line::

    # comment
    <as_id> <as_id> <p2c|p2p> [mass_a mass_b]

``a b p2c`` declares ``a`` the provider of ``b``. Node masses and synthetic
energy profiles may also come from a JSON sidecar::

    {"<as_id>": {"mass": m, "energy": {"mean_energy_intensity": e, "idle_power": p}}}
"""

import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path as FilePath
from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np

from core.errors import GraphParseError, ModelValidationError
from logic.model.network import Tier

logger = logging.getLogger(__name__)


class Relation(str, Enum):
    CUSTOMER_TO_PROVIDER = "p2c"
    PEER_TO_PEER = "p2p"


class Step(str, Enum):
    """Direction of one traversed link."""

    UP = "up"
    PEER = "peer"
    DOWN = "down"


@dataclass(frozen=True)
class EnergyProfile:
    mean_energy_intensity: float
    idle_power: float

    def __post_init__(self):
        for name in ("mean_energy_intensity", "idle_power"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ModelValidationError(f"energy profile {name} must be non-negative, got {value}")
            object.__setattr__(self, name, value)


def as_key(as_id: str) -> Tuple[int, int, str]:
    """Sort key ordering numeric AS ids numerically and the rest lexicographically."""
    return (0, int(as_id), "") if as_id.isdigit() else (1, 0, as_id)


def path_key(path: Iterable[str]) -> Tuple:
    return tuple(as_key(a) for a in path)


class AsGraph:
    """AS graph backed by a ``networkx.DiGraph``.

    Every link is stored in both directions; the ``step`` edge attribute says
    how traversing it moves through the hierarchy.
    """

    def __init__(self):
        self.graph = nx.DiGraph()

    def add_node(self, as_id: str, mass: Optional[float] = None, energy: Optional[EnergyProfile] = None) -> None:
        as_id = str(as_id)
        if as_id not in self.graph:
            self.graph.add_node(as_id, mass=None, energy=None)
        if mass is not None:
            mass = float(mass)
            if not math.isfinite(mass) or mass < 0:
                raise ModelValidationError(f"AS {as_id} has invalid mass {mass}")
            self.graph.nodes[as_id]["mass"] = mass
        if energy is not None:
            self.graph.nodes[as_id]["energy"] = energy

    def add_link(self, a: str, b: str, relation: Relation) -> None:
        a, b, relation = str(a), str(b), Relation(relation)
        if a == b:
            raise ModelValidationError(f"self-link at AS {a}")
        forward = Step.DOWN if relation == Relation.CUSTOMER_TO_PROVIDER else Step.PEER
        backward = Step.UP if relation == Relation.CUSTOMER_TO_PROVIDER else Step.PEER
        existing = self.graph.get_edge_data(a, b)
        if existing is not None:
            if existing["step"] != forward:
                raise ModelValidationError(f"conflicting relations between AS {a} and AS {b}")
            return
        self.add_node(a)
        self.add_node(b)
        self.graph.add_edge(a, b, step=forward)
        self.graph.add_edge(b, a, step=backward)

    @property
    def nodes(self) -> List[str]:
        return sorted(self.graph.nodes, key=as_key)

    def __len__(self) -> int:
        return self.graph.number_of_nodes()

    def __contains__(self, as_id: str) -> bool:
        return str(as_id) in self.graph

    @property
    def links(self) -> List[Tuple[str, str, Relation]]:
        """Each link once: (provider, customer, p2c) or (a, b, p2p) with a before b."""
        links = []
        for a, b, step in self.graph.edges(data="step"):
            if step == Step.DOWN or (step == Step.PEER and as_key(a) < as_key(b)):
                relation = Relation.CUSTOMER_TO_PROVIDER if step == Step.DOWN else Relation.PEER_TO_PEER
                links.append((a, b, relation))
        return sorted(links, key=lambda link: (as_key(link[0]), as_key(link[1])))

    def step(self, a: str, b: str) -> Optional[Step]:
        data = self.graph.get_edge_data(a, b)
        return Step(data["step"]) if data is not None else None

    def neighbors(self, as_id: str) -> List[str]:
        return sorted(self.graph.successors(as_id), key=as_key)

    def providers(self, as_id: str) -> List[str]:
        return [b for b in self.neighbors(as_id) if self.step(as_id, b) == Step.UP]

    def customers(self, as_id: str) -> List[str]:
        return [b for b in self.neighbors(as_id) if self.step(as_id, b) == Step.DOWN]

    def peers(self, as_id: str) -> List[str]:
        return [b for b in self.neighbors(as_id) if self.step(as_id, b) == Step.PEER]

    def degree(self, as_id: str) -> int:
        return self.graph.out_degree(as_id)

    def mass(self, as_id: str) -> Optional[float]:
        return self.graph.nodes[as_id]["mass"]

    def energy(self, as_id: str) -> Optional[EnergyProfile]:
        return self.graph.nodes[as_id]["energy"]

    def subgraph(self, keep: Iterable[str]) -> "AsGraph":
        sub = AsGraph()
        sub.graph = self.graph.subgraph(set(keep)).copy()
        return sub

    def has_provider_cycle(self) -> bool:
        up = nx.DiGraph((a, b) for a, b, step in self.graph.edges(data="step") if step == Step.UP)
        return not nx.is_directed_acyclic_graph(up)


def _parse_mass(token: str, line_number: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise GraphParseError(f"invalid mass '{token}'", line_number)
    if not math.isfinite(value) or value < 0:
        raise GraphParseError(f"mass must be a non-negative number, got '{token}'", line_number)
    return value


def parse_as_graph(text: str) -> AsGraph:
    graph = AsGraph()
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 5):
            raise GraphParseError(f"expected '<as> <as> <p2c|p2p> [mass mass]', got '{raw.strip()}'", line_number)
        a, b, relation = parts[:3]
        if relation not in (Relation.CUSTOMER_TO_PROVIDER.value, Relation.PEER_TO_PEER.value):
            raise GraphParseError(f"unknown relation '{relation}'", line_number)
        if a == b:
            raise GraphParseError(f"self-link at AS {a}", line_number)
        try:
            graph.add_link(a, b, Relation(relation))
        except ModelValidationError as e:
            raise GraphParseError(str(e), line_number)
        if len(parts) == 5:
            for as_id, token in ((a, parts[3]), (b, parts[4])):
                mass = _parse_mass(token, line_number)
                known = graph.mass(as_id)
                if known is not None and known != mass:
                    raise GraphParseError(f"conflicting masses for AS {as_id}", line_number)
                graph.add_node(as_id, mass=mass)
    return graph


def apply_sidecar(graph: AsGraph, document: Dict) -> None:
    """Attach masses and energy profiles from a parsed sidecar document."""
    for as_id, entry in document.items():
        if as_id not in graph:
            logger.warning("sidecar entry for unknown AS %s ignored", as_id)
            continue
        energy = entry.get("energy")
        try:
            graph.add_node(
                as_id,
                mass=entry.get("mass"),
                energy=EnergyProfile(**energy) if energy is not None else None,
            )
        except TypeError as e:
            raise ModelValidationError(f"invalid sidecar entry for AS {as_id}: {e}")


def ingest_as_graph(file_path: str, sidecar_path: Optional[str] = None) -> AsGraph:
    path = FilePath(file_path)
    if not path.exists():
        raise ModelValidationError(f"AS graph file '{file_path}' not found")
    graph = parse_as_graph(path.read_text(encoding="utf-8"))
    if sidecar_path:
        try:
            document = json.loads(FilePath(sidecar_path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            raise ModelValidationError(f"cannot read sidecar '{sidecar_path}': {e}")
        apply_sidecar(graph, document)
    logger.info("loaded AS graph with %d nodes and %d links", len(graph), len(graph.links))
    return graph


def write_as_graph(graph: AsGraph, file_path: str) -> None:
    lines = [f"{a} {b} {relation.value}" for a, b, relation in graph.links]
    FilePath(file_path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def sidecar_document(graph: AsGraph) -> Dict[str, Dict]:
    document = {}
    for as_id in graph.nodes:
        entry = {}
        if graph.mass(as_id) is not None:
            entry["mass"] = graph.mass(as_id)
        energy = graph.energy(as_id)
        if energy is not None:
            entry["energy"] = {"mean_energy_intensity": energy.mean_energy_intensity,
                               "idle_power": energy.idle_power}
        document[as_id] = entry
    return document


def tier_classify(graph: AsGraph) -> Dict[str, Tier]:
    """T1: no provider. T2: only T1 providers. T3: only T1/T2 providers. Other otherwise."""
    tiers: Dict[str, Tier] = {}
    for as_id in graph.nodes:
        if not graph.providers(as_id):
            tiers[as_id] = Tier.T1
    for tier, allowed in ((Tier.T2, {Tier.T1}), (Tier.T3, {Tier.T1, Tier.T2})):
        changed = True
        while changed:
            changed = False
            for as_id in graph.nodes:
                if as_id in tiers:
                    continue
                if all(tiers.get(p) in allowed for p in graph.providers(as_id)):
                    tiers[as_id] = tier
                    changed = True
    for as_id in graph.nodes:
        tiers.setdefault(as_id, Tier.OTHER)
    return tiers


def prune_to_core(graph: AsGraph, size: int) -> AsGraph:
    """Repeatedly drop every minimum-degree AS at once, stopping before fewer than ``size`` remain."""
    if size < 1:
        raise ModelValidationError("core size must be at least 1")
    keep = set(graph.nodes)
    while len(keep) > size:
        sub = graph.subgraph(keep)
        degrees = {a: sub.degree(a) for a in keep}
        lowest = min(degrees.values())
        removal = {a for a, degree in degrees.items() if degree == lowest}
        if len(keep) - len(removal) < size:
            break
        keep -= removal
        logger.debug("pruned %d ASes of degree %d, %d remain", len(removal), lowest, len(keep))
    return graph.subgraph(keep)


def _log_uniform(rng: np.random.Generator, bounds: Tuple[float, float]) -> float:
    low, high = bounds
    return float(math.exp(rng.uniform(math.log(low), math.log(high))))


def generate_synthetic_graph(num_nodes: int, seed: int,
                             tier1_share: float = 0.08, tier2_share: float = 0.3,
                             peering_probability: float = 0.3,
                             mass_ranges: Optional[Dict[Tier, Tuple[float, float]]] = None,
                             energy_intensity_range: Tuple[float, float] = (0.005, 0.05),
                             idle_energy_range: Tuple[float, float] = (1e4, 1e6)) -> AsGraph:
    """Tiered hierarchy: a tier-1 peering clique, multihomed tier-2 ASes with lateral peering, tier-3 stubs.

    Energy intensities are in kWh per GB, idle energy in kWh per time window.
    """
    if num_nodes < 3:
        raise ModelValidationError("a synthetic graph needs at least 3 ASes")
    rng = np.random.default_rng(seed)
    masses = mass_ranges or {Tier.T1: (1e6, 1e7), Tier.T2: (1e4, 1e6), Tier.T3: (1e2, 1e4)}
    n1 = max(2, round(tier1_share * num_nodes))
    n2 = max(1, min(num_nodes - n1 - 1, round(tier2_share * num_nodes)))
    ids = [str(i + 1) for i in range(num_nodes)]
    tier1, tier2, tier3 = ids[:n1], ids[n1:n1 + n2], ids[n1 + n2:]

    graph = AsGraph()
    for tier, members in ((Tier.T1, tier1), (Tier.T2, tier2), (Tier.T3, tier3)):
        for as_id in members:
            graph.add_node(as_id, mass=_log_uniform(rng, masses[tier]), energy=EnergyProfile(
                mean_energy_intensity=_log_uniform(rng, energy_intensity_range),
                idle_power=_log_uniform(rng, idle_energy_range),
            ))

    for i, a in enumerate(tier1):
        for b in tier1[i + 1:]:
            graph.add_link(a, b, Relation.PEER_TO_PEER)
    for as_id in tier2:
        count = min(len(tier1), int(rng.integers(1, 3)))
        for provider in rng.choice(tier1, size=count, replace=False):
            graph.add_link(str(provider), as_id, Relation.CUSTOMER_TO_PROVIDER)
    for i, a in enumerate(tier2):
        for b in tier2[i + 1:]:
            if rng.random() < peering_probability:
                graph.add_link(a, b, Relation.PEER_TO_PEER)
    for as_id in tier3:
        count = int(rng.integers(1, 3))
        pool = tier2 if rng.random() < 0.85 else tier1
        for provider in rng.choice(pool, size=min(count, len(pool)), replace=False):
            graph.add_link(str(provider), as_id, Relation.CUSTOMER_TO_PROVIDER)
    logger.info("generated synthetic AS graph: %d tier-1, %d tier-2, %d tier-3 ASes",
                len(tier1), len(tier2), len(tier3))
    return graph
