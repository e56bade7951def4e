"""Prerequisite DAG over topics: validation and deterministic ordering."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import CyclicPrerequisites


@dataclass(frozen=True)
class PrerequisiteGraph:
    """Directed acyclic graph; an edge (p, d) means p is prerequisite to d."""

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise ValueError("graph nodes must be unique")
        for prereq, dependent in self.edges:
            if prereq not in node_set or dependent not in node_set:
                raise ValueError(f"edge ({prereq!r}, {dependent!r}) references a non-node")
        topological_order(self)  # raises CyclicPrerequisites on a cycle

    def prerequisites_of(self, topic_id: str) -> list[str]:
        return [prereq for prereq, dependent in self.edges if dependent == topic_id]


def topological_order(graph: PrerequisiteGraph) -> list[str]:
    """Kahn's algorithm with a heap, so equal-depth nodes come out in
    lexicographic order. Raises CyclicPrerequisites when no order exists."""
    indegree = {node: 0 for node in graph.nodes}
    successors: dict[str, list[str]] = {node: [] for node in graph.nodes}
    for prereq, dependent in graph.edges:
        indegree[dependent] += 1
        successors[prereq].append(dependent)

    ready = [node for node, degree in indegree.items() if degree == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for nxt in successors[node]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(ready, nxt)

    if len(order) != len(graph.nodes):
        raise CyclicPrerequisites(_find_cycle(graph, indegree))
    return order


def _find_cycle(graph: PrerequisiteGraph, indegree: dict[str, int]) -> list[str]:
    # Residual indegree counts only edges from other stuck nodes, so every
    # stuck node has a stuck predecessor and a backwards walk must loop.
    remaining = {node for node, degree in indegree.items() if degree > 0}
    predecessors: dict[str, list[str]] = {node: [] for node in remaining}
    for prereq, dependent in graph.edges:
        if prereq in remaining and dependent in remaining:
            predecessors[dependent].append(prereq)

    path: list[str] = [min(remaining)]
    seen_at = {path[0]: 0}
    while True:
        node = min(predecessors[path[-1]])
        if node in seen_at:
            backwards = path[seen_at[node]:]
            cycle = list(reversed(backwards))
            pivot = cycle.index(min(cycle))
            return cycle[pivot:] + cycle[:pivot]
        seen_at[node] = len(path)
        path.append(node)
