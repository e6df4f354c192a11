"""Problem graphs and their gauge duals.

A polynomial maps to a multigraph with one vertex per term and one edge
per variable; the two endpoints of an edge are the (at most two) terms
containing that variable. Each term's written variable order gives the
cyclic order of edges around its vertex, so the instance carries a
combinatorial embedding. The dual gauge graph has one spin per link, one
plaquette per term, and one gauge site per efficient cycle = face of
that embedding.

Benchmark instance families: the periodic L x L square lattice, and the
dual of a random four-regular graph whose gauge sites are its chordless
cycles up to a length threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConsistencyError, GenerationError, MappingError, ParseError
from .hubo import HuboPolynomial

DEFAULT_MAX_CYCLE_LEN = 6


# ----------------------------------------------------------------------
# Primal graph (one vertex per term, one edge per variable)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class HuboGraph:
    """Term/variable incidence multigraph with per-vertex edge rotations.

    ``vertex_edges[v]`` lists the edges at vertex v in written order;
    ``edge_endpoints[e]`` holds one vertex for a dangling edge (variable
    in a single term) or two distinct vertices otherwise.
    """

    n_edges: int
    vertex_coeffs: tuple[float, ...]
    vertex_edges: tuple[tuple[int, ...], ...]
    edge_endpoints: tuple[tuple[int, ...], ...]

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_edges)

    def is_dangling(self, edge: int) -> bool:
        return len(self.edge_endpoints[edge]) == 1


def build_hubo_graph(poly: HuboPolynomial) -> HuboGraph:
    """Vertices = terms, edges = variables joining the terms containing them.

    Every variable must appear in one term (dangling edge) or two terms;
    three or more occurrences have no two-endpoint edge and are rejected.
    """
    occurrences: list[list[int]] = [[] for _ in range(poly.n_vars)]
    for ti, term in enumerate(poly.terms):
        for v in term.variables:
            occurrences[v].append(ti)
    for v, occ in enumerate(occurrences):
        if len(occ) == 0:
            raise MappingError(f"variable {v} appears in no term")
        if len(occ) > 2:
            raise MappingError(
                f"variable {v} appears in {len(occ)} terms; the dual mapping "
                "supports at most two occurrences per variable"
            )
    return HuboGraph(
        n_edges=poly.n_vars,
        vertex_coeffs=tuple(t.coefficient for t in poly.terms),
        vertex_edges=tuple(t.rotation for t in poly.terms),
        edge_endpoints=tuple(tuple(occ) for occ in occurrences),
    )


def _trace_faces(graph: HuboGraph) -> list[tuple[int, ...]]:
    """Orbits of the face permutation of the rotation-system embedding.

    A dart is (edge, head vertex). Arriving at a vertex via an edge, the
    face continues along that edge's successor in the vertex rotation.
    Dangling edges carry no darts.
    """
    succ: dict[tuple[int, int], int] = {}
    for v, rot in enumerate(graph.vertex_edges):
        cyc = [e for e in rot if not graph.is_dangling(e)]
        for i, e in enumerate(cyc):
            succ[(v, e)] = cyc[(i + 1) % len(cyc)]

    def other_end(edge: int, vertex: int) -> int:
        a, b = graph.edge_endpoints[edge]
        return b if vertex == a else a

    faces: list[tuple[int, ...]] = []
    seen: set[tuple[int, int]] = set()
    for e0 in range(graph.n_edges):
        if graph.is_dangling(e0):
            continue
        for h0 in graph.edge_endpoints[e0]:
            if (e0, h0) in seen:
                continue
            face: list[int] = []
            edge, head = e0, h0
            while (edge, head) not in seen:
                seen.add((edge, head))
                face.append(edge)
                edge = succ[(head, edge)]
                head = other_end(edge, head)
            faces.append(tuple(face))
    return faces


def _is_simple_cycle(graph: HuboGraph, face: Sequence[int]) -> bool:
    if len(face) < 2 or len(set(face)) != len(face):
        return False
    # walk the face and collect visited vertices
    verts = set()
    for e in face:
        verts.update(graph.edge_endpoints[e])
    return len(verts) == len(face)


def _cycle_vertex_order(graph: HuboGraph, face: Sequence[int]) -> list[int]:
    """Cyclic vertex order of a simple cycle given its edge order."""
    if len(face) == 2:  # pair of parallel edges
        return list(graph.edge_endpoints[face[0]])
    order = []
    for i in range(len(face)):
        e, f = face[i], face[(i + 1) % len(face)]
        shared = set(graph.edge_endpoints[e]) & set(graph.edge_endpoints[f])
        order.append(min(shared))  # length >= 3: exactly one shared vertex
    return order


def _has_chord(graph: HuboGraph, face: Sequence[int]) -> bool:
    """True if some edge outside the cycle joins two non-consecutive
    cycle vertices. Edges parallel to a cycle edge are not chords."""
    vorder = _cycle_vertex_order(graph, face)
    pos = {v: i for i, v in enumerate(vorder)}
    k = len(vorder)
    in_face = set(face)
    for v in vorder:
        for e in graph.vertex_edges[v]:
            if e in in_face or graph.is_dangling(e):
                continue
            a, b = graph.edge_endpoints[e]
            if a in pos and b in pos:
                gap = (pos[a] - pos[b]) % k
                if gap not in (1, k - 1):
                    return True
    return False


def find_efficient_cycles(graph: HuboGraph, k_m: int) -> list[tuple[int, ...]]:
    """Gauge-site cycles: faces of the term-order embedding of the graph,
    kept when they are simple, chordless, and no longer than ``k_m``.

    Composite faces (for example the outer boundary of two glued cycles)
    always carry a chord and are filtered out, which is what makes the
    survivors "efficient". Output is deduplicated and sorted by the
    sorted edge-index tuple, so it is independent of edge input order.
    """
    if k_m < 2:
        return []
    out = set()
    for face in _trace_faces(graph):
        if len(face) > k_m or not _is_simple_cycle(graph, face):
            continue
        if _has_chord(graph, face):
            continue
        out.add(tuple(sorted(face)))
    return sorted(out, key=lambda c: (len(c), c))


# ----------------------------------------------------------------------
# Dual gauge graph
# ----------------------------------------------------------------------

class Plaquette(NamedTuple):
    coefficient: float
    links: tuple[int, ...]  # boundary order preserved


@dataclass(frozen=True)
class GaugeOperator:
    """Product of sigma_x over a site's links; target eigenvalue +1."""

    links: tuple[int, ...]
    target_eigenvalue: int = 1

    def __post_init__(self):
        if not self.links:
            raise ValueError("gauge operator needs at least one link")
        if tuple(sorted(set(self.links))) != self.links:
            raise ValueError("gauge operator links must be sorted and unique")


@dataclass(frozen=True)
class GGraph:
    """Dual gauge graph: spins on links, one plaquette per polynomial term,
    one site (gauge operator) per efficient cycle."""

    n_links: int
    plaquettes: tuple[Plaquette, ...]
    sites: tuple[GaugeOperator, ...]

    def __post_init__(self):
        for p in self.plaquettes:
            if not p.links or any(l < 0 or l >= self.n_links for l in p.links):
                raise ValueError(f"plaquette links out of range: {p.links}")
        for s in self.sites:
            if s.links[-1] >= self.n_links:
                raise ValueError(f"site links out of range: {s.links}")

    @property
    def n_plaquettes(self) -> int:
        return len(self.plaquettes)

    @property
    def reference_energy(self) -> float:
        """Energy of a configuration satisfying every plaquette
        (all products +1 for negative couplings): -sum |J_p| when all
        J_p < 0, used as the ground-state reference for the benchmark
        families where it is exact."""
        return -sum(abs(p.coefficient) for p in self.plaquettes)

    def to_polynomial(self) -> HuboPolynomial:
        """Plaquette polynomial; boundary order becomes the written order."""
        return HuboPolynomial.from_terms(
            self.n_links, [(p.coefficient, p.links) for p in self.plaquettes]
        )


def check_gauge_commutation(g: GGraph) -> None:
    """Every (site, plaquette) link overlap must be even; raises otherwise."""
    pmasks = [sum(1 << l for l in p.links) for p in g.plaquettes]
    for s in g.sites:
        smask = sum(1 << l for l in s.links)
        for pi, pm in enumerate(pmasks):
            if (smask & pm).bit_count() % 2:
                raise ConsistencyError(
                    f"site {s.links} overlaps plaquette {pi} oddly; "
                    "cycle search produced a non-commuting operator"
                )


def build_dual(graph: HuboGraph, k_m: int = DEFAULT_MAX_CYCLE_LEN) -> GGraph:
    """Dual of the term/variable graph: terms become plaquettes, efficient
    cycles become gauge sites. The commutation invariant is verified."""
    plaquettes = tuple(
        Plaquette(c, edges)
        for c, edges in zip(graph.vertex_coeffs, graph.vertex_edges)
    )
    sites = tuple(GaugeOperator(c) for c in find_efficient_cycles(graph, k_m))
    g = GGraph(n_links=graph.n_edges, plaquettes=plaquettes, sites=sites)
    check_gauge_commutation(g)
    return g


def map_polynomial(poly: HuboPolynomial, k_m: int = DEFAULT_MAX_CYCLE_LEN) -> GGraph:
    """Full pipeline: polynomial -> incidence graph -> dual gauge graph."""
    return build_dual(build_hubo_graph(poly), k_m)


# ----------------------------------------------------------------------
# Instance generators
# ----------------------------------------------------------------------

def gen_torus_lattice(L: int) -> GGraph:
    """Periodic L x L square lattice: 2L^2 links, L^2 four-link plaquettes
    with coupling -1, L^2 four-link star sites.

    Link indexing: link(x, y, d) = 2*(x*L + y) + d with d = 0 for the
    horizontal link leaving (x, y) and d = 1 for the vertical one.
    """
    if L < 2:
        raise ValueError(f"torus lattice needs L >= 2, got {L}")

    def h(x: int, y: int) -> int:
        return 2 * ((x % L) * L + (y % L))

    def v(x: int, y: int) -> int:
        return 2 * ((x % L) * L + (y % L)) + 1

    plaquettes = []
    sites = []
    for x in range(L):
        for y in range(L):
            # counterclockwise boundary of the unit square at (x, y)
            plaquettes.append(
                Plaquette(-1.0, (h(x, y), v(x + 1, y), h(x, y + 1), v(x, y)))
            )
            sites.append(
                GaugeOperator(tuple(sorted((h(x, y), h(x - 1, y), v(x, y), v(x, y - 1)))))
            )
    return GGraph(n_links=2 * L * L, plaquettes=tuple(plaquettes), sites=tuple(sites))


def random_regular_graph(
    degree: int, n_vertices: int, rng: np.random.Generator, max_tries: int = 2000
) -> list[tuple[int, int]]:
    """Simple connected regular graph via the pairing model with rejection."""
    if (degree * n_vertices) % 2:
        raise ValueError("degree * n_vertices must be even")
    if not 0 < degree < n_vertices:
        raise ValueError("need 0 < degree < n_vertices")
    stubs = np.repeat(np.arange(n_vertices), degree)
    for _ in range(max_tries):
        perm = rng.permutation(stubs)
        pairs = perm.reshape(-1, 2)
        edges = set()
        ok = True
        for a, b in pairs:
            a, b = int(a), int(b)
            if a == b:
                ok = False
                break
            key = (a, b) if a < b else (b, a)
            if key in edges:
                ok = False
                break
            edges.add(key)
        if not ok:
            continue
        # connectivity
        adj: list[list[int]] = [[] for _ in range(n_vertices)]
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) == n_vertices:
            return sorted(edges)
    raise GenerationError(
        f"no simple connected {degree}-regular graph on {n_vertices} vertices "
        f"after {max_tries} pairings; try a different seed"
    )


def short_chordless_cycles(
    n_vertices: int, edges: Sequence[tuple[int, int]], k_m: int
) -> list[tuple[int, ...]]:
    """All chordless simple cycles of length <= k_m, as sorted tuples of
    edge indices (positions in ``edges``). Each cycle is found once from
    its minimum vertex; the result is canonically sorted."""
    edge_index = {}
    adj: list[list[int]] = [[] for _ in range(n_vertices)]
    for i, (a, b) in enumerate(edges):
        key = (a, b) if a < b else (b, a)
        edge_index[key] = i
        adj[a].append(b)
        adj[b].append(a)
    for lst in adj:
        lst.sort()
    neigh = [set(lst) for lst in adj]

    def chordless(cycle: list[int]) -> bool:
        k = len(cycle)
        for i in range(k):
            for j in range(i + 2, k):
                if i == 0 and j == k - 1:
                    continue
                if cycle[j] in neigh[cycle[i]]:
                    return False
        return True

    out = []
    path: list[int] = []

    def extend(root: int, u: int):
        for w in adj[u]:
            if w == root and len(path) >= 3:
                if path[1] < path[-1]:  # count each cycle once per direction
                    if chordless(path):
                        cyc = path + [root]
                        es = sorted(
                            edge_index[(min(a, b), max(a, b))]
                            for a, b in zip(cyc, cyc[1:])
                        )
                        out.append(tuple(es))
            elif w > root and w not in path and len(path) < k_m:
                path.append(w)
                extend(root, w)
                path.pop()

    for root in range(n_vertices):
        path[:] = [root]
        extend(root, root)
        path.clear()
    return sorted(set(out), key=lambda c: (len(c), c))


def gen_four_regular_dual(
    n_vertices: int, seed: int, k_m: int = DEFAULT_MAX_CYCLE_LEN
) -> GGraph:
    """Dual of a random simple connected four-regular graph.

    Links are the graph's edges (2 * n_vertices of them), each vertex
    becomes a four-link plaquette with coupling -1, and the gauge sites
    are the graph's chordless cycles of length <= k_m.
    """
    if n_vertices < 5:
        raise ValueError(f"need n_vertices >= 5, got {n_vertices}")
    rng = np.random.default_rng(seed)
    edges = random_regular_graph(4, n_vertices, rng)
    incident: list[list[int]] = [[] for _ in range(n_vertices)]
    for i, (a, b) in enumerate(edges):
        incident[a].append(i)
        incident[b].append(i)
    plaquettes = tuple(Plaquette(-1.0, tuple(links)) for links in incident)
    sites = tuple(
        GaugeOperator(c) for c in short_chordless_cycles(n_vertices, edges, k_m)
    )
    return GGraph(n_links=2 * n_vertices, plaquettes=plaquettes, sites=sites)


# ----------------------------------------------------------------------
# Gauge-graph text format:
#   links <n>
#   plaq <J> <l1> ... <lk>     (1-based link indices, boundary order)
#   site <l1> ... <lk>
# ----------------------------------------------------------------------

def serialize_ggraph(g: GGraph) -> str:
    lines = [f"links {g.n_links}"]
    for p in g.plaquettes:
        lines.append(f"plaq {p.coefficient!r} " + " ".join(str(l + 1) for l in p.links))
    for s in g.sites:
        lines.append("site " + " ".join(str(l + 1) for l in s.links))
    return "\n".join(lines) + "\n"


def parse_ggraph(text: str) -> GGraph:
    n_links = None
    plaquettes: list[Plaquette] = []
    sites: list[GaugeOperator] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n_links is None:
            if fields[0] != "links" or len(fields) != 2:
                raise ParseError(f"expected 'links <n>', got {line!r}", lineno)
            n_links = int(fields[1])
            continue
        try:
            if fields[0] == "plaq":
                coeff = float(fields[1])
                links = [int(f) - 1 for f in fields[2:]]
                if not links:
                    raise ParseError("plaquette with no links", lineno)
                plaquettes.append(Plaquette(coeff, tuple(links)))
            elif fields[0] == "site":
                links = sorted(int(f) - 1 for f in fields[1:])
                sites.append(GaugeOperator(tuple(links)))
            else:
                raise ParseError(f"unknown record {fields[0]!r}", lineno)
        except (ValueError, IndexError):
            raise ParseError(f"malformed line {line!r}", lineno) from None
        if any(l < 0 or (n_links is not None and l >= n_links) for l in links):
            raise ParseError(f"link index out of range 1..{n_links}", lineno)
    if n_links is None:
        raise ParseError("missing 'links <n>' header")
    return GGraph(n_links=n_links, plaquettes=tuple(plaquettes), sites=tuple(sites))
