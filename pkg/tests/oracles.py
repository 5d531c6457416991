"""Random instance generators and brute-force oracles shared by the tests.

The oracles are deliberately naive re-implementations working at the
higher-order level or by exhaustive enumeration, so they share no code path
with the engine they check.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter

from hogdb import (
    Edge,
    HigherOrderGraph,
    HyperEdge,
    Node,
    NodeTuple,
    Simplex,
    Subgraph,
    SubgraphEdge,
)
from hogdb.values import props_key

LABELS = ("A", "B", "C")


def random_value(rng: random.Random):
    pick = rng.randrange(6)
    if pick == 0:
        return rng.randint(-5, 5)
    if pick == 1:
        return rng.choice([0.5, -1.25, 3.0, 1e-3])
    if pick == 2:
        return rng.choice(["x", "y", "", "ümlaut", "a,b"])
    if pick == 3:
        return rng.random() < 0.5
    if pick == 4:
        return [rng.randint(0, 3) for _ in range(rng.randint(0, 3))]
    return rng.randint(0, 2)


def random_features(rng: random.Random, rich: bool = True):
    labels = {label for label in LABELS if rng.random() < 0.3}
    if not rich:
        return labels, ({"w": rng.randint(0, 1)} if rng.random() < 0.5 else {})
    props = {key: random_value(rng) for key in ("k", "w", "name") if rng.random() < 0.4}
    return labels, props


def random_graph(rng: random.Random, family: str, *, n_max: int = 50, rich: bool = True,
                 caps: dict | None = None) -> HigherOrderGraph:
    """Seeded random valid instance of ``family``.

    ``caps`` bounds the count of each collection (keys ``n``, ``m``,
    ``count``, ``links``); by default sizes scale with ``n``.
    """
    caps = caps or {}
    g = HigherOrderGraph()
    n = rng.randint(0, min(n_max, caps.get("n", n_max)))
    for i in range(n):
        labels, props = random_features(rng, rich)
        g.add(Node(f"v{i}", labels, props))
    nodes = sorted(g.nodes)
    if n < 2:
        return g
    count = rng.randint(0, caps.get("count", max(1, n // 3)))
    if family == "hypergraph":
        for j in range(count):
            k = rng.randint(2, min(6, n))
            labels, props = random_features(rng, rich)
            g.add(HyperEdge(rng.sample(nodes, k), labels, props, f"h{j}"))
    elif family == "simplicial":
        faces = set()
        for _ in range(count):
            top = rng.sample(nodes, rng.randint(2, min(4, n)))
            for size in range(2, len(top) + 1):
                faces.update(frozenset(c) for c in itertools.combinations(top, size))
        for j, face in enumerate(sorted(faces, key=sorted)):
            labels, props = random_features(rng, rich)
            g.add(Simplex(face, labels, props, f"x{j}"))
    elif family in ("tuple", "subgraph"):
        m = rng.randint(0, caps.get("m", n))
        for j in range(m):
            labels, props = random_features(rng, rich)
            g.add(Edge(rng.choice(nodes), rng.choice(nodes), labels, props, f"e{j}"))
        if family == "tuple":
            for j in range(count):
                k = rng.randint(2, 6)
                positions = sorted(rng.sample(range(0, 10), k)) if rng.random() < 0.3 else list(range(k))
                members = [rng.choice(nodes) for _ in range(k)]
                labels, props = random_features(rng, rich)
                g.add(NodeTuple(tuple(zip(positions, members)), labels, props, f"t{j}"))
        else:
            edges = list(g.edges.values())
            for j in range(count):
                chosen = {v for v in nodes if rng.random() < 0.3}
                inner = [e.uid for e in edges if e.src in chosen and e.dst in chosen and rng.random() < 0.6]
                labels, props = random_features(rng, rich)
                g.add(Subgraph(chosen, inner, labels, props, f"s{j}"))
            subs = sorted(g.subgraphs)
            if subs:
                for j in range(rng.randint(0, caps.get("links", len(subs)))):
                    labels, props = random_features(rng, rich)
                    g.add(SubgraphEdge(rng.choice(subs), rng.choice(subs), labels, props, f"f{j}"))
    return g


def relabel(graph: HigherOrderGraph, rng: random.Random) -> HigherOrderGraph:
    """An isomorphic copy: fresh uids for everything, node uids permuted."""
    node_map = dict(zip(graph.nodes, rng.sample([f"p{i}" for i in range(len(graph.nodes))], len(graph.nodes))))
    edge_map = {u: f"q{i}" for i, u in enumerate(rng.sample(sorted(graph.edges), len(graph.edges)))}
    sub_map = {u: f"r{i}" for i, u in enumerate(rng.sample(sorted(graph.subgraphs), len(graph.subgraphs)))}
    out = HigherOrderGraph()
    for u, nd in graph.nodes.items():
        out.add(Node(node_map[u], nd.labels, nd.properties))
    for u, e in graph.edges.items():
        out.add(Edge(node_map[e.src], node_map[e.dst], e.labels, e.properties, edge_map[u]))
    for i, h in enumerate(graph.hyperedges.values()):
        out.add(HyperEdge({node_map[m] for m in h.members}, h.labels, h.properties, f"H{i}"))
    for i, s in enumerate(graph.simplices.values()):
        out.add(Simplex({node_map[m] for m in s.vertices}, s.labels, s.properties, f"X{i}"))
    for i, t in enumerate(graph.tuples.values()):
        out.add(NodeTuple(tuple((p, node_map[m]) for p, m in t.elements), t.labels, t.properties, f"T{i}"))
    for u, s in graph.subgraphs.items():
        out.add(Subgraph({node_map[x] for x in s.subgraph_nodes}, {edge_map[x] for x in s.subgraph_edges},
                         s.labels, s.properties, sub_map[u]))
    for i, f in enumerate(graph.subgraph_edges.values()):
        out.add(SubgraphEdge(sub_map[f.src], sub_map[f.dst], f.labels, f.properties, f"F{i}"))
    return out


# ---------------------------------------------------------------------------
# higher-order isomorphism by brute force
# ---------------------------------------------------------------------------

def _feat(entity) -> tuple:
    return (tuple(sorted(entity.labels)), props_key(entity.properties))


def _bijections(groups1: dict, groups2: dict):
    """All bijections between equally keyed groups, as dicts."""
    if Counter({k: len(v) for k, v in groups1.items()}) != Counter({k: len(v) for k, v in groups2.items()}):
        return
    keys = sorted(groups1, key=repr)
    per_key = [[list(zip(groups1[k], perm)) for perm in itertools.permutations(groups2[k])] for k in keys]
    for combo in itertools.product(*per_key):
        yield dict(pair for part in combo for pair in part)


def _group(items: dict, key) -> dict:
    out: dict = {}
    for uid, item in items.items():
        out.setdefault(key(item), []).append(uid)
    return out


def ho_isomorphic(g1: HigherOrderGraph, g2: HigherOrderGraph) -> bool:
    """True iff some relabeling of nodes, edges and subgraphs maps g1 onto g2."""
    sizes = lambda g: (len(g.nodes), len(g.edges), len(g.hyperedges), len(g.simplices), len(g.tuples),
                       len(g.subgraphs), len(g.subgraph_edges))
    if sizes(g1) != sizes(g2):
        return False
    for pi in _bijections(_group(g1.nodes, _feat), _group(g2.nodes, _feat)):
        if Counter((frozenset(pi[m] for m in h.members), _feat(h)) for h in g1.hyperedges.values()) != \
                Counter((h.members, _feat(h)) for h in g2.hyperedges.values()):
            continue
        if Counter((frozenset(pi[m] for m in s.vertices), _feat(s)) for s in g1.simplices.values()) != \
                Counter((s.vertices, _feat(s)) for s in g2.simplices.values()):
            continue
        if Counter((tuple((p, pi[m]) for p, m in t.elements), _feat(t)) for t in g1.tuples.values()) != \
                Counter((t.elements, _feat(t)) for t in g2.tuples.values()):
            continue
        e1 = _group(g1.edges, lambda e: (pi[e.src], pi[e.dst], _feat(e)))
        e2 = _group(g2.edges, lambda e: (e.src, e.dst, _feat(e)))
        for sigma in _bijections(e1, e2):
            s1 = _group(g1.subgraphs, lambda s: (frozenset(pi[x] for x in s.subgraph_nodes),
                                                 frozenset(sigma[x] for x in s.subgraph_edges), _feat(s)))
            s2 = _group(g2.subgraphs, lambda s: (s.subgraph_nodes, s.subgraph_edges, _feat(s)))
            for rho in _bijections(s1, s2):
                f1 = Counter((rho[f.src], rho[f.dst], _feat(f)) for f in g1.subgraph_edges.values())
                f2 = Counter((f.src, f.dst, _feat(f)) for f in g2.subgraph_edges.values())
                if f1 == f2:
                    return True
    return False


# ---------------------------------------------------------------------------
# closure
# ---------------------------------------------------------------------------

def powerset_missing(simplices) -> set:
    """Every (simplex, face) pair where a face of size >= 2 is absent."""
    present = set(simplices)
    missing = set()
    for s in present:
        members = sorted(s)
        for mask in range(1, 2 ** len(members)):
            face = frozenset(m for i, m in enumerate(members) if mask >> i & 1)
            if 2 <= len(face) < len(s) and face not in present:
                missing.add((s, face))
    return missing


def closure_of(simplices) -> set:
    out = set()
    for s in simplices:
        members = sorted(s)
        for mask in range(1, 2 ** len(members)):
            face = frozenset(m for i, m in enumerate(members) if mask >> i & 1)
            if len(face) >= 2:
                out.add(face)
    return out


# ---------------------------------------------------------------------------
# higher-order delete semantics, applied to the model
# ---------------------------------------------------------------------------

def model_delete_node(g: HigherOrderGraph, uid: str, family: str) -> None:
    del g.nodes[uid]
    for hid, h in list(g.hyperedges.items()):
        if uid in h.members:
            if len(h.members) == 2:
                del g.hyperedges[hid]
            else:
                g.hyperedges[hid] = HyperEdge(h.members - {uid}, h.labels, h.properties, hid)
    for sid, s in list(g.simplices.items()):
        if uid in s.vertices:
            del g.simplices[sid]
    dead_edges = {eid for eid, e in g.edges.items() if uid in (e.src, e.dst)}
    for eid in dead_edges:
        model_delete_edge(g, eid)
    for tid, t in list(g.tuples.items()):
        g.tuples[tid] = NodeTuple(tuple(el for el in t.elements if el[1] != uid), t.labels, t.properties, tid)
    for sid, s in list(g.subgraphs.items()):
        g.subgraphs[sid] = Subgraph(s.subgraph_nodes - {uid}, s.subgraph_edges, s.labels, s.properties, sid)


def model_delete_edge(g: HigherOrderGraph, uid: str) -> None:
    del g.edges[uid]
    for sid, s in list(g.subgraphs.items()):
        if uid in s.subgraph_edges:
            g.subgraphs[sid] = Subgraph(s.subgraph_nodes, s.subgraph_edges - {uid}, s.labels, s.properties, sid)


def model_delete_subgraph(g: HigherOrderGraph, uid: str) -> None:
    del g.subgraphs[uid]
    for fid, f in list(g.subgraph_edges.items()):
        if uid in (f.src, f.dst):
            del g.subgraph_edges[fid]


def model_delete_simplex(g: HigherOrderGraph, uid: str) -> None:
    verts = g.simplices[uid].vertices
    for sid, s in list(g.simplices.items()):
        if verts <= s.vertices:
            del g.simplices[sid]
