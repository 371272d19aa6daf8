"""Combinatorial closed oriented triangulated surfaces.

Half-edge ``h = 3*f + c`` runs from ``faces[f][c]`` to ``faces[f][(c + 1) % 3]``.
Faces are listed counterclockwise.  The link of a vertex is traversed
clockwise by ``h -> next(twin(h))`` over the outgoing half-edges, which is
the order in which the cross-ratio sum equation telescopes.

Deck transformations of the universal cover are handled as reduced words in
the generators of a :class:`FundamentalDomain`; a word is a tuple of nonzero
ints, ``+(r+1)`` for generator ``r`` and ``-(r+1)`` for its inverse.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class TriangulationError(ValueError):
    pass


class NonManifold(TriangulationError):
    pass


class OrientationMismatch(TriangulationError):
    pass


class NotClosed(TriangulationError):
    pass


Word = tuple


def word_mul(a: Word, b: Word) -> Word:
    """Freely reduced product ``a * b``."""
    out = list(a)
    for s in b:
        if out and out[-1] == -s:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def word_inv(a: Word) -> Word:
    return tuple(-s for s in reversed(a))


@dataclass(frozen=True)
class VertexLink:
    vertex: int
    corners: tuple  # outgoing half-edges, clockwise, starting at the lowest id

    @property
    def degree(self) -> int:
        return len(self.corners)


@dataclass(eq=False)
class Triangulation:
    """A validated triangulation; build instances with :func:`build`."""

    n_vertices: int
    faces: tuple
    twin: np.ndarray
    edge_of: np.ndarray
    edges: tuple  # (h, twin h) with h < twin h, ordered by h
    links: tuple
    genus: int

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_half_edges(self) -> int:
        return 3 * len(self.faces)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @staticmethod
    def face(h: int) -> int:
        return h // 3

    @staticmethod
    def next(h: int) -> int:
        return 3 * (h // 3) + (h + 1) % 3

    @staticmethod
    def prev(h: int) -> int:
        return 3 * (h // 3) + (h + 2) % 3

    def origin(self, h: int) -> int:
        return self.faces[h // 3][h % 3]

    def target(self, h: int) -> int:
        return self.faces[h // 3][(h + 1) % 3]

    def rotate_cw(self, h: int) -> int:
        """Next outgoing half-edge at ``origin(h)`` in clockwise order."""
        return self.next(int(self.twin[h]))

    def face_edges(self, f: int) -> tuple:
        """Edge ids of face ``f`` in corner order (ij, jk, ki)."""
        return tuple(int(self.edge_of[3 * f + c]) for c in range(3))

    def face_neighbors(self, f: int) -> list:
        return [int(self.twin[3 * f + c]) // 3 for c in range(3)]

    def has_loops(self) -> bool:
        return any(self.origin(h) == self.target(h) for h, _ in self.edges)

    def to_dict(self) -> dict:
        gluing = [[[h // 3, h % 3], [int(t) // 3, int(t) % 3]] for h, t in self.edges]
        return {
            "n_vertices": self.n_vertices,
            "faces": [list(f) for f in self.faces],
            "corner_gluing": gluing,
        }


def _match_by_vertices(faces, n_half):
    by_pair = {}
    for h in range(n_half):
        f, c = divmod(h, 3)
        key = (faces[f][c], faces[f][(c + 1) % 3])
        by_pair.setdefault(key, []).append(h)
    twin = np.full(n_half, -1, dtype=int)
    for (i, j), hs in by_pair.items():
        if len(hs) > 1:
            if i == j:
                raise NonManifold(f"loop edges at vertex {i} need an explicit corner_gluing")
            if (j, i) in by_pair and len(by_pair[(j, i)]) > 1:
                raise NonManifold(
                    f"edges between {i} and {j} are ambiguous; pass corner_gluing")
            raise OrientationMismatch(f"half-edge {i}->{j} appears {len(hs)} times")
        opposite = by_pair.get((j, i))
        if not opposite:
            raise NotClosed(f"edge {i}->{j} has no partner {j}->{i}")
        twin[hs[0]] = opposite[0]
    return twin


def _twin_from_gluing(faces, gluing, n_half):
    twin = np.full(n_half, -1, dtype=int)
    for pair in gluing:
        (f0, c0), (f1, c1) = pair
        a, b = 3 * int(f0) + int(c0), 3 * int(f1) + int(c1)
        if not (0 <= a < n_half and 0 <= b < n_half):
            raise TriangulationError(f"gluing {pair} out of range")
        if a == b or twin[a] >= 0 or twin[b] >= 0:
            raise NonManifold(f"half-edge glued twice or to itself in {pair}")
        twin[a], twin[b] = b, a
    if (twin < 0).any():
        raise NotClosed(f"unglued half-edges: {np.flatnonzero(twin < 0).tolist()}")
    for a in range(n_half):
        b = twin[a]
        fa, ca = divmod(a, 3)
        fb, cb = divmod(int(b), 3)
        if (faces[fa][ca], faces[fa][(ca + 1) % 3]) != (faces[fb][(cb + 1) % 3], faces[fb][cb]):
            raise OrientationMismatch(f"half-edges {a} and {int(b)} do not run in opposite directions")
    return twin


def build(faces: Sequence[Sequence[int]], n_vertices: int,
          corner_gluing: Iterable | None = None) -> Triangulation:
    """Validate faces (and an optional half-edge gluing) into a Triangulation.

    Without ``corner_gluing`` half-edges are paired by their vertex pairs,
    which only works when no two edges join the same vertices.
    """
    faces = tuple(tuple(int(v) for v in f) for f in faces)
    if not faces:
        raise TriangulationError("no faces")
    if n_vertices < 1:
        raise TriangulationError("need at least one vertex")
    for f in faces:
        if len(f) != 3:
            raise TriangulationError(f"face {f} is not a triangle")
        if any(v < 0 or v >= n_vertices for v in f):
            raise TriangulationError(f"face {f} has a vertex index out of range")
    n_half = 3 * len(faces)
    if corner_gluing is None:
        twin = _match_by_vertices(faces, n_half)
    else:
        twin = _twin_from_gluing(faces, list(corner_gluing), n_half)

    edge_of = np.full(n_half, -1, dtype=int)
    edges = []
    for h in range(n_half):
        if edge_of[h] < 0:
            edge_of[h] = edge_of[twin[h]] = len(edges)
            edges.append((h, int(twin[h])))

    # connectivity of the dual graph
    seen = {0}
    queue = deque([0])
    while queue:
        f = queue.popleft()
        for c in range(3):
            g = int(twin[3 * f + c]) // 3
            if g not in seen:
                seen.add(g)
                queue.append(g)
    if len(seen) != len(faces):
        raise NonManifold("surface is disconnected")

    outgoing = [[] for _ in range(n_vertices)]
    for h in range(n_half):
        f, c = divmod(h, 3)
        outgoing[faces[f][c]].append(h)
    links = []
    for v in range(n_vertices):
        if not outgoing[v]:
            raise NonManifold(f"vertex {v} is not used by any face")
        start = min(outgoing[v])
        cyc = [start]
        h = 3 * (int(twin[start]) // 3) + (int(twin[start]) + 1) % 3
        while h != start:
            cyc.append(h)
            if len(cyc) > len(outgoing[v]):
                break
            t = int(twin[h])
            h = 3 * (t // 3) + (t + 1) % 3
        if len(cyc) != len(outgoing[v]):
            raise NonManifold(f"link of vertex {v} is not a single cycle")
        links.append(VertexLink(v, tuple(cyc)))

    chi = n_vertices - len(edges) + len(faces)
    if chi > 2 or chi % 2:
        raise NonManifold(f"Euler characteristic {chi} is not that of a closed orientable surface")
    return Triangulation(n_vertices, faces, twin, edge_of, tuple(edges), tuple(links), (2 - chi) // 2)


def vertex_link(T: Triangulation, i: int) -> VertexLink:
    if not 0 <= i < T.n_vertices:
        raise IndexError(i)
    return T.links[i]


def from_dict(data: dict) -> Triangulation:
    return build(data["faces"], int(data["n_vertices"]), data.get("corner_gluing"))


@dataclass(eq=False)
class FundamentalDomain:
    """Dual spanning tree of faces plus one generator per non-tree edge.

    Generator ``r`` belongs to the half-edge ``positive[r]`` (the lower id of
    its edge): the copy of ``face(twin(positive[r]))`` lying across
    ``positive[r]`` from the base copy of ``face(positive[r])`` is its image
    under generator ``r``.
    """

    triangulation: Triangulation
    root: int
    order: tuple  # faces in BFS order
    parent_half: dict  # child face -> half-edge of the parent crossed to reach it
    tree_edges: frozenset
    positive: tuple
    generator_of_edge: dict = field(default_factory=dict)

    @property
    def n_generators(self) -> int:
        return len(self.positive)

    def cross(self, h: int, word: Word) -> Word:
        """Deck word of the face copy across ``h`` from the copy ``word * face(h)``."""
        e = int(self.triangulation.edge_of[h])
        r = self.generator_of_edge.get(e)
        if r is None:
            return word
        return word_mul(word, ((r + 1),) if h == self.positive[r] else (-(r + 1),))

    def tree_path(self, f: int) -> list:
        """Half-edges crossed going from the root to ``f`` inside the domain."""
        path = []
        while f != self.root:
            h = self.parent_half[f]
            path.append(h)
            f = h // 3
        return path[::-1]

    def walk_vertex(self, h: int, word: Word = ()) -> list:
        """Clockwise walk around the universal-cover vertex at ``origin(h)``.

        Returns ``[(h_m, word_m)]`` where the m-th spoke is half-edge ``h_m`` in
        the copy ``word_m * face(h_m)``.
        """
        T = self.triangulation
        out = []
        cur, w = h, word
        while True:
            out.append((cur, w))
            t = int(T.twin[cur])
            w = self.cross(cur, w)
            cur = T.next(t)
            if cur == h:
                return out

    def closing_word(self, h: int) -> Word:
        """Word accumulated after one full turn around ``origin(h)`` (a relator)."""
        T = self.triangulation
        w: Word = ()
        cur = h
        while True:
            w = self.cross(cur, w)
            cur = T.next(int(T.twin[cur]))
            if cur == h:
                return w


def fundamental_domain(T: Triangulation, root: int = 0,
                       tree: Iterable[int] | None = None) -> FundamentalDomain:
    """Breadth-first dual spanning tree from ``root``; ``tree`` overrides the edge set."""
    if not 0 <= root < T.n_faces:
        raise IndexError(root)
    allowed = None if tree is None else {int(e) for e in tree}
    if allowed is not None and len(allowed) != T.n_faces - 1:
        raise TriangulationError("a dual spanning tree has |F|-1 edges")
    seen = {root}
    order = [root]
    parent_half = {}
    tree_edges = set()
    queue = deque([root])
    while queue:
        f = queue.popleft()
        for c in range(3):
            h = 3 * f + c
            e = int(T.edge_of[h])
            if allowed is not None and e not in allowed:
                continue
            g = int(T.twin[h]) // 3
            if g in seen:
                continue
            seen.add(g)
            order.append(g)
            parent_half[g] = h
            tree_edges.add(e)
            queue.append(g)
    if len(seen) != T.n_faces:
        raise TriangulationError("given tree does not span the faces")
    positive = []
    gen_of = {}
    for e, (h, _t) in enumerate(T.edges):
        if e not in tree_edges:
            gen_of[e] = len(positive)
            positive.append(h)
    return FundamentalDomain(T, root, tuple(order), parent_half, frozenset(tree_edges),
                             tuple(positive), gen_of)
