"""Distribution graph, price-direction edges and service migration vectors."""

from __future__ import annotations

from dataclasses import dataclass

from .cost import preference_norm, site_lease_cost
from .model import Scenario, top_k_index

# Sites are ordered by what they charge for a single channel.
REFERENCE_LOAD = 1


@dataclass(frozen=True)
class DirectionEdge:
    src: str  # pricier site
    dst: str  # cheaper site


@dataclass(frozen=True)
class MigrationVector:
    bundle: str
    target: str
    origin: str
    deg: float
    save: int  # cents

    @property
    def key(self) -> tuple[str, str]:
        return (self.bundle, self.target)


@dataclass(frozen=True)
class MigrationGraph:
    sites: tuple[str, ...]
    bundles: tuple[str, ...]
    direction_edges: tuple[DirectionEdge, ...]
    vectors: tuple[MigrationVector, ...]

    def vectors_by_bundle(self) -> dict[str, list[MigrationVector]]:
        out: dict[str, list[MigrationVector]] = {}
        for v in self.vectors:
            out.setdefault(v.bundle, []).append(v)
        return out


def marginal_price(s: Scenario, site_id: str) -> int:
    return site_lease_cost(s.site(site_id), REFERENCE_LOAD)


def build_direction_edges(s: Scenario) -> list[DirectionEdge]:
    price = {sid: marginal_price(s, sid) for sid in s.site_ids}
    return [
        DirectionEdge(i, j)
        for i in s.site_ids
        for j in s.site_ids
        if price[i] > price[j]
    ]


def generate_migration_vectors(s: Scenario, edges: list[DirectionEdge] | None = None) -> list[MigrationVector]:
    if edges is None:
        edges = build_direction_edges(s)
    cheaper: dict[str, set[str]] = {}
    for e in edges:
        cheaper.setdefault(e.src, set()).add(e.dst)

    norm = preference_norm(s)
    vectors = []
    for b in s.active_bundles:
        ranked = top_k_index(s, b.region)
        origin = ranked[0]
        p_top = s.preference(b.region, origin)
        here = site_lease_cost(s.site(origin), b.stream_count)
        for target in ranked[1:]:
            if target not in cheaper.get(origin, ()):
                continue
            save = here - site_lease_cost(s.site(target), b.stream_count)
            # Step pricing can invert the single-channel order at larger loads.
            if save <= 0:
                continue
            loss = b.demand * (p_top - s.preference(b.region, target))
            deg = loss / norm if norm > 0 else 0.0
            vectors.append(MigrationVector(b.region, target, origin, deg, save))
    return vectors


def build_migration_graph(s: Scenario) -> MigrationGraph:
    edges = build_direction_edges(s)
    vectors = generate_migration_vectors(s, edges)
    return MigrationGraph(
        sites=tuple(s.site_ids),
        bundles=tuple(b.region for b in s.active_bundles),
        direction_edges=tuple(edges),
        vectors=tuple(vectors),
    )


def dump_graph(g: MigrationGraph) -> str:
    """Plain-text adjacency listing, one edge or vector per line."""
    lines = [f"site {sid}" for sid in g.sites]
    lines += [f"bundle {bid}" for bid in g.bundles]
    lines += [f"edge {e.src} -> {e.dst}" for e in g.direction_edges]
    lines += [
        f"vector {v.bundle}: {v.origin} -> {v.target} deg={v.deg:.5f} save={v.save / 100:.2f}"
        for v in g.vectors
    ]
    return "\n".join(lines) + "\n"
