"""
Gao-Rexford path enumeration.

A path is valley-free when its links climb customer to provider zero or more
times, cross at most one peering link, and then only descend provider to
customer.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

from logic.netgen.as_graph import AsGraph, Step, path_key

logger = logging.getLogger(__name__)

AsPath = Tuple[str, ...]

# phase reached after each kind of step; None marks a valley
_NEXT_PHASE = {
    (0, Step.UP): 0,
    (0, Step.PEER): 1,
    (0, Step.DOWN): 2,
    (1, Step.DOWN): 2,
    (2, Step.DOWN): 2,
}


def _advance(phase: int, step: Step):
    return _NEXT_PHASE.get((phase, step))


def is_gao_rexford(graph: AsGraph, path: Sequence[str]) -> bool:
    path = [str(a) for a in path]
    if len(path) < 2 or len(set(path)) != len(path):
        return False
    phase = 0
    for a, b in zip(path, path[1:]):
        step = graph.step(a, b)
        if step is None:
            return False
        phase = _advance(phase, step)
        if phase is None:
            return False
    return True


def _walks(graph: AsGraph, path: List[str], phase: int, dst: str, max_hops: int) -> Iterator[AsPath]:
    current = path[-1]
    if current == dst:
        yield tuple(path)
        return
    if len(path) >= max_hops:
        return
    for neighbor in graph.neighbors(current):
        if neighbor in path:
            continue
        following = _advance(phase, graph.step(current, neighbor))
        if following is None:
            continue
        path.append(neighbor)
        yield from _walks(graph, path, following, dst, max_hops)
        path.pop()


def enumerate_paths(graph: AsGraph, src: str, dst: str, k: int, max_hops: int) -> List[AsPath]:
    """Up to k valley-free paths of at most ``max_hops`` ASes, shortest first, ties by AS ids."""
    src, dst = str(src), str(dst)
    if src == dst or k < 1 or src not in graph or dst not in graph:
        return []
    found = sorted(_walks(graph, [src], 0, dst, max_hops), key=lambda p: (len(p), path_key(p)))
    return found[:k]


@dataclass(frozen=True)
class MarketCandidate:
    """An AS pair with its enumerated paths."""

    source: str
    destination: str
    paths: Tuple[AsPath, ...]

    @property
    def mean_hops(self) -> float:
        return sum(len(p) - 1 for p in self.paths) / len(self.paths)

    @property
    def pair(self) -> Tuple[str, str]:
        return self.source, self.destination
