"""Continuous-variable cluster states and their nullifiers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .gaussian import (
    ConfigurationError,
    GaussianState,
    ModeLabel,
    QuadratureCombination,
    QuadratureOrdering,
    SymplecticTransform,
    apply,
    light,
    vacuum_state,
)

_A = 1 / math.sqrt(2)
_B = 1 / math.sqrt(10)
_C = 2 / math.sqrt(10)

# Output quadrature -> {input quadrature: coefficient}, squeezing factors
# stripped. Inputs are named "x1", "p3", ...; outputs in (X1, P1, ..., P4) order.
LINEAR4_TABLE: dict[str, dict[str, float]] = {
    "X1": {"x1": _A, "x2": _B, "p3": -_C},
    "P1": {"p1": _A, "p2": _B, "x3": _C},
    "X2": {"p1": -_A, "p2": _B, "x3": _C},
    "P2": {"x1": _A, "x2": -_B, "p3": _C},
    "X3": {"x2": -_C, "p3": -_B, "p4": -_A},
    "P3": {"p2": -_C, "x3": _B, "x4": _A},
    "X4": {"p2": _C, "x3": -_B, "x4": _A},
    "P4": {"x2": -_C, "p3": -_B, "p4": _A},
}


def _quadrature_index(name: str) -> int:
    quad, mode = name[0].lower(), int(name[1:])
    return 2 * (mode - 1) + (quad == "p")


def table_to_matrix(table: dict[str, dict[str, float]]) -> np.ndarray:
    n = len(table)
    M = np.zeros((n, n))
    for out, row in table.items():
        for inp, coeff in row.items():
            M[_quadrature_index(out), _quadrature_index(inp)] = coeff
    return M


@dataclass(frozen=True)
class GraphSpec:
    n_vertices: int
    edges: frozenset[frozenset[int]]

    def __init__(self, n_vertices: int, edges: Iterable[Sequence[int]] = ()):
        if int(n_vertices) != n_vertices or n_vertices < 1:
            raise ConfigurationError(f"graph needs n >= 1 vertices, got {n_vertices!r}")
        seen = set()
        for e in edges:
            a, b = (int(v) for v in e)
            if a == b:
                raise ConfigurationError(f"self-loop at vertex {a}")
            for v in (a, b):
                if not 1 <= v <= n_vertices:
                    raise ConfigurationError(f"vertex {v} outside 1..{n_vertices}")
            edge = frozenset((a, b))
            if edge in seen:
                raise ConfigurationError(f"duplicate edge {sorted(edge)}")
            seen.add(edge)
        object.__setattr__(self, "n_vertices", int(n_vertices))
        object.__setattr__(self, "edges", frozenset(seen))

    @classmethod
    def linear(cls, n: int) -> "GraphSpec":
        return cls(n, [(i, i + 1) for i in range(1, n)])

    @classmethod
    def from_json(cls, source: str | Path) -> "GraphSpec":
        """Load ``{"n": int, "edges": [[a, b], ...]}``; a path or a JSON string."""
        text = Path(source).read_text() if _looks_like_path(source) else str(source)
        doc = json.loads(text)
        if not isinstance(doc, dict) or "n" not in doc:
            raise ConfigurationError("graph document needs an 'n' field")
        edges = doc.get("edges", [])
        if not all(isinstance(e, list) and len(e) == 2 for e in edges):
            raise ConfigurationError("'edges' must be a list of [a, b] pairs")
        return cls(doc["n"], edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(tuple(sorted(e)) for e in self.edges)

    def neighbors(self, a: int) -> list[int]:
        return sorted(v for e in self.edges if a in e for v in e if v != a)


def _looks_like_path(source) -> bool:
    if isinstance(source, Path):
        return True
    return not str(source).lstrip().startswith("{")


def uniform_profile(r: float, n: int = 4) -> np.ndarray:
    return validate_profile([r] * n)


def validate_profile(profile, n: int | None = None) -> np.ndarray:
    r = np.asarray(profile, dtype=float).reshape(-1)
    if not np.all(np.isfinite(r)):
        raise ConfigurationError(f"squeezing parameters must be finite, got {profile!r}")
    if n is not None and r.size != n:
        raise ConfigurationError(f"expected {n} squeezing parameters, got {r.size}")
    return r


def nullifiers(
    graph: GraphSpec, modes: Sequence[ModeLabel] | None = None, ordering: QuadratureOrdering | None = None
) -> list[QuadratureCombination]:
    """``p_a - sum_{b in N(a)} x_b`` for each vertex ``a``.

    Vertex ``a`` maps to ``modes[a - 1]`` (default: light modes 1..n) inside
    ``ordering`` (default: just those modes).
    """
    if modes is None:
        modes = [light(i) for i in range(1, graph.n_vertices + 1)]
    if len(modes) != graph.n_vertices:
        raise ConfigurationError("one mode per vertex required")
    ordering = ordering or QuadratureOrdering(modes)
    out = []
    for a in range(1, graph.n_vertices + 1):
        terms = [(1.0, "p", modes[a - 1])]
        terms += [(-1.0, "x", modes[b - 1]) for b in graph.neighbors(a)]
        label = f"p{a}" + "".join(f"-x{b}" for b in graph.neighbors(a))
        out.append(QuadratureCombination.from_terms(ordering, terms, label))
    return out


def linear4_network(table: dict[str, dict[str, float]] | None = None) -> SymplecticTransform:
    """Passive network turning four squeezed inputs into the linear cluster."""
    return SymplecticTransform(table_to_matrix(table or LINEAR4_TABLE), "linear4_network")


def squeezer_bank(profile) -> SymplecticTransform:
    r = validate_profile(profile)
    diag = np.ravel(np.column_stack([np.exp(r), np.exp(-r)]))
    return SymplecticTransform(np.diag(diag), "squeezers")


def linear4_modes() -> list[ModeLabel]:
    return [light(i) for i in range(1, 5)]


def build_linear4_cluster(profile) -> GaussianState:
    r = validate_profile(profile, 4)
    ordering = QuadratureOrdering(linear4_modes())
    state = apply(squeezer_bank(r), vacuum_state(ordering))
    return apply(linear4_network(), state)


def edge_gate(n_modes: int, a: int, b: int) -> SymplecticTransform:
    """Shear ``p_a += x_b``, ``p_b += x_a`` on vertices ``a``, ``b`` (1-based)."""
    M = np.eye(2 * n_modes)
    M[2 * (a - 1) + 1, 2 * (b - 1)] = 1.0
    M[2 * (b - 1) + 1, 2 * (a - 1)] = 1.0
    return SymplecticTransform(M, f"cz({a},{b})")


def build_graph_cluster(graph: GraphSpec, profile, modes: Sequence[ModeLabel] | None = None) -> GaussianState:
    """p-squeezed vacua entangled by one shear gate per edge.

    Each nullifier reduces to the squeezed momentum of its own vertex, so
    its variance is ``exp(-2 r_a) / 4``.
    """
    r = validate_profile(profile, graph.n_vertices)
    modes = list(modes) if modes is not None else [light(i) for i in range(1, graph.n_vertices + 1)]
    ordering = QuadratureOrdering(modes)
    state = apply(squeezer_bank(r), vacuum_state(ordering))
    for a, b in graph.sorted_edges():
        state = apply(edge_gate(graph.n_vertices, a, b), state)
    return state

