"""Combinatorial ideal triangulations of punctured surfaces.

Conventions used throughout the package:

* Each triangle has corners 0, 1, 2 in counterclockwise order; side k is the
  directed side from corner k to corner k+1 (mod 3).
* A gluing identifies two sides with reversed direction, so the glued surface
  is oriented: if side (t, k) is glued to (t', k'), corner k of t is
  identified with corner k'+1 of t' and corner k+1 of t with corner k'.
* A curve is given as a cyclic strip of steps (triangle, entering side,
  leaving side); a step leaving through side in+1 turns right, through side
  in+2 turns left.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ValidationError, GeometryError

Side = tuple[int, int]  # (triangle index, side index 0..2)

__all__ = [
    "IdealTriangulation",
    "CurveOnSurface",
    "LRSequence",
    "FlipData",
    "build_surface",
    "builtin_names",
    "builtin_curve",
    "lr_word",
    "reroute_through_flip",
    "random_surface",
    "random_curve",
]


class IdealTriangulation:
    """Gluing data for an ideal triangulation of an oriented punctured surface.

    Edges carry stable string labels; all derived data (puncture links, Euler
    characteristic, dual spanning tree) is computed once at construction and
    the object is immutable afterwards.
    """

    def __init__(self, edges, name: str | None = None):
        """edges: sequence of (side, side, label) triples covering every side once."""
        self.name = name
        self.edge_ids = tuple(str(lab) for _, _, lab in edges)
        if len(set(self.edge_ids)) != len(self.edge_ids):
            raise ValidationError("duplicate edge labels")
        self.edge_index = {lab: i for i, lab in enumerate(self.edge_ids)}

        sides_seen: dict[Side, int] = {}
        self._edge_sides: list[tuple[Side, Side]] = []
        for i, (s1, s2, _) in enumerate(edges):
            s1 = (int(s1[0]), int(s1[1]))
            s2 = (int(s2[0]), int(s2[1]))
            if s1 == s2:
                raise ValidationError(f"side {s1} glued to itself")
            for s in (s1, s2):
                if not (0 <= s[1] < 3):
                    raise ValidationError(f"bad side index in {s}")
                if s in sides_seen:
                    raise ValidationError(f"side {s} used twice (gluing not an involution)")
                sides_seen[s] = i
            self._edge_sides.append((min(s1, s2), max(s1, s2)))
        self._side_edge = sides_seen

        tris = {t for t, _ in sides_seen}
        self.num_triangles = max(tris) + 1 if tris else 0
        expected = {(t, k) for t in range(self.num_triangles) for k in range(3)}
        if set(sides_seen) != expected:
            raise ValidationError("gluing must cover each side of each triangle exactly once")
        self.num_edges = len(self._edge_sides)

        self._glue = {}
        for s1, s2 in self._edge_sides:
            self._glue[s1] = s2
            self._glue[s2] = s1

        if not self._connected():
            raise ValidationError("triangulation is not connected")

        # Puncture links: orbits of the corner walk (t, c) -> glued(t, c) + 1.
        self.corner_cycles = self._corner_cycles()
        self.punctures = len(self.corner_cycles)
        self._corner_puncture = {}
        for p, cyc in enumerate(self.corner_cycles):
            for corner in cyc:
                self._corner_puncture[corner] = p

        # Euler characteristic n - E + F = 2 - 2g.
        chi = self.punctures - self.num_edges + self.num_triangles
        if chi % 2 != 0:
            raise ValidationError("odd Euler characteristic")
        self.genus = (2 - chi) // 2
        if self.genus < 0 or self.punctures < 1 or 2 * self.genus - 2 + self.punctures <= 0:
            raise ValidationError(
                f"unsupported surface type g={self.genus}, n={self.punctures}"
            )
        if self.num_edges != 6 * self.genus - 6 + 3 * self.punctures:
            raise ValidationError("edge count does not match 6g-6+3n")

        self._tree_sides, self._tree_parent = self._dual_tree()
        self.nontree_edges = tuple(
            i for i in range(self.num_edges)
            if self._edge_sides[i][0] not in self._tree_sides
            and self._edge_sides[i][1] not in self._tree_sides
        )

    # -- basic accessors ---------------------------------------------------

    def glued(self, side: Side) -> Side:
        return self._glue[side]

    def side_edge(self, side: Side) -> int:
        return self._side_edge[side]

    def edge_sides(self, e: int) -> tuple[Side, Side]:
        return self._edge_sides[e]

    def triangle_edges(self, t: int) -> tuple[int, int, int]:
        return tuple(self._side_edge[(t, k)] for k in range(3))

    def corner_puncture(self, t: int, c: int) -> int:
        return self._corner_puncture[(t, c)]

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return (
            f"IdealTriangulation{tag}(g={self.genus}, n={self.punctures}, "
            f"F={self.num_triangles}, E={self.num_edges})"
        )

    # -- derived structure ---------------------------------------------------

    def _connected(self) -> bool:
        if self.num_triangles == 0:
            return False
        seen = {0}
        stack = [0]
        while stack:
            t = stack.pop()
            for k in range(3):
                t2 = self._glue[(t, k)][0]
                if t2 not in seen:
                    seen.add(t2)
                    stack.append(t2)
        return len(seen) == self.num_triangles

    def _corner_cycles(self):
        remaining = {(t, c) for t in range(self.num_triangles) for c in range(3)}
        cycles = []
        while remaining:
            start = min(remaining)
            cyc = []
            cur = start
            while True:
                cyc.append(cur)
                remaining.discard(cur)
                t2, k2 = self._glue[(cur[0], cur[1])]
                cur = (t2, (k2 + 1) % 3)
                if cur == start:
                    break
            cycles.append(tuple(cyc))
        return tuple(cycles)

    def puncture_links(self) -> list[list[str]]:
        """Per puncture, the cyclic list of incident edge labels with multiplicity."""
        return [
            [self.edge_ids[self._side_edge[(t, c)]] for (t, c) in cyc]
            for cyc in self.corner_cycles
        ]

    def _dual_tree(self):
        """BFS spanning tree of the dual graph, rooted at triangle 0.

        Returns (tree side set, parent map t -> side crossed from parent into t).
        """
        parent: dict[int, Side | None] = {0: None}
        tree_sides = set()
        queue = [0]
        while queue:
            t = queue.pop(0)
            for k in range(3):
                s = (t, k)
                t2, _ = self._glue[s]
                if t2 not in parent:
                    parent[t2] = s
                    tree_sides.add(s)
                    tree_sides.add(self._glue[s])
                    queue.append(t2)
        return frozenset(tree_sides), parent

    def tree_path_sides(self, t: int) -> list[Side]:
        """Sides crossed walking the dual tree from triangle 0 to triangle t."""
        path = []
        while t != 0:
            s = self._tree_parent[t]
            path.append(s)
            t = s[0]
        path.reverse()
        return path

    def is_nontree(self, e: int) -> bool:
        return e in self.nontree_edges

    def word_of_sides(self, sides) -> list[tuple[int, int]]:
        """Free-group word of a based dual loop, as (non-tree edge, +-1) letters.

        Crossing a non-tree edge from its primary (lexicographically smaller)
        side contributes the generator, from the other side its inverse; tree
        crossings contribute nothing.
        """
        word = []
        for s in sides:
            e = self._side_edge[s]
            if self.is_nontree(e):
                primary = self._edge_sides[e][0]
                word.append((e, 1 if s == primary else -1))
        return word

    def based_link_loop_sides(self, t: int, c: int) -> list[Side]:
        """Crossing sequence of a based loop around the puncture at corner (t, c).

        tree path out of triangle 0, once around the vertex link, tree path back.
        """
        out = self.tree_path_sides(t)
        link = []
        cur = (t, c)
        while True:
            link.append(cur)
            t2, k2 = self._glue[cur]
            cur = (t2, (k2 + 1) % 3)
            if cur == (t, c):
                break
        back = [self._glue[s] for s in reversed(out)]
        return out + link + back

    def generator_loop_sides(self, e: int) -> list[Side]:
        """Crossing sequence of the based loop crossing edge e from its primary side."""
        sA, sB = self._edge_sides[e]
        out = self.tree_path_sides(sA[0])
        back = [self._glue[s] for s in reversed(self.tree_path_sides(sB[0]))]
        return out + [sA] + back

    # -- flips ---------------------------------------------------------------

    def is_flippable(self, edge_id: str) -> bool:
        e = self.edge_index[edge_id]
        sA, sB = self._edge_sides[e]
        return sA[0] != sB[0]

    def flip_data(self, edge_id: str) -> "FlipData":
        e = self.edge_index[edge_id]
        sA, sB = self._edge_sides[e]
        if sA[0] == sB[0]:
            raise GeometryError(f"flip undefined: edge {edge_id} is self-folded")
        (tA, iA), (tB, iB) = sA, sB
        slots = (
            (tA, (iA + 1) % 3),
            (tA, (iA + 2) % 3),
            (tB, (iB + 1) % 3),
            (tB, (iB + 2) % 3),
        )
        side_map = {
            slots[0]: (tB, 1),
            slots[1]: (tA, 0),
            slots[2]: (tA, 1),
            slots[3]: (tB, 0),
            sA: (tA, 2),
            sB: (tB, 2),
        }
        return FlipData(edge_id=edge_id, edge=e, tA=tA, iA=iA, tB=tB, iB=iB,
                        slots=slots, side_map=side_map)

    def flip(self, edge_id: str) -> "IdealTriangulation":
        """Re-diagonalize the quadrilateral around edge_id; labels are preserved."""
        fd = self.flip_data(edge_id)
        edges = []
        for i, (s1, s2) in enumerate(self._edge_sides):
            n1 = fd.side_map.get(s1, s1)
            n2 = fd.side_map.get(s2, s2)
            edges.append((n1, n2, self.edge_ids[i]))
        return IdealTriangulation(edges, name=None)

    # -- canonical form --------------------------------------------------------

    def canonical_key(self):
        """Canonical form of the labeled triangulation (triangle order and
        corner rotations quotiented out; edge labels kept meaningful)."""
        tris = []
        for t in range(self.num_triangles):
            trip = self.triangle_edges(t)
            rots = [trip[k:] + trip[:k] for k in range(3)]
            tris.append(min(rots))
        return tuple(sorted(tris))

    def unlabeled_canonical_key(self):
        """Canonical form of the underlying unlabeled oriented complex:
        minimum over starting flags of the BFS-normalized gluing encoding."""
        best = None
        for t0 in range(self.num_triangles):
            for k0 in range(3):
                order = {t0: 0}
                rot = {t0: k0}
                tris = [t0]
                enc = []
                i = 0
                while i < len(tris):
                    t = tris[i]
                    i += 1
                    for li in range(3):
                        t2, k2 = self._glue[(t, (rot[t] + li) % 3)]
                        if t2 not in order:
                            order[t2] = len(tris)
                            rot[t2] = k2
                            tris.append(t2)
                        enc.append((order[t2], (k2 - rot[t2]) % 3))
                key = tuple(enc)
                if best is None or key < best:
                    best = key
        return best

    # -- serialization -----------------------------------------------------------

    def to_spec_dict(self) -> dict:
        return {
            "genus": self.genus,
            "punctures": self.punctures,
            "triangles": list(range(self.num_triangles)),
            "gluing": [[list(s1), list(s2)] for s1, s2 in self._edge_sides],
        }

    def surface_ref(self):
        """Name for built-ins, else the full spec dict (used in output files)."""
        return self.name if self.name else self.to_spec_dict()


@dataclass(frozen=True)
class FlipData:
    """Bookkeeping for one flip: the quad slots in ccw order f12, f23, f34, f41
    and where every affected side lands in the flipped triangulation."""

    edge_id: str
    edge: int
    tA: int
    iA: int
    tB: int
    iB: int
    slots: tuple[Side, Side, Side, Side]
    side_map: dict


@dataclass(frozen=True)
class CurveOnSurface:
    """Closed curve as a cyclic strip of (triangle, entering side, leaving side)."""

    steps: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(tuple(s) for s in self.steps))

    def validate(self, T: IdealTriangulation):
        if not self.steps:
            raise ValidationError("empty curve")
        for t, i, o in self.steps:
            if not (0 <= t < T.num_triangles and 0 <= i < 3 and 0 <= o < 3):
                raise ValidationError(f"bad step {(t, i, o)}")
            if i == o:
                raise ValidationError("step enters and leaves through the same side")
        for idx, (t, i, o) in enumerate(self.steps):
            t2, i2, _ = self.steps[(idx + 1) % len(self.steps)]
            if T.glued((t, o)) != (t2, i2):
                raise ValidationError(
                    f"steps {idx} and {idx + 1} are not glued compatibly"
                )

    def __len__(self):
        return len(self.steps)

    def repeated(self, k: int) -> "CurveOnSurface":
        return CurveOnSurface(self.steps * k)


@dataclass(frozen=True)
class LRSequence:
    """Cyclic word of (edge label, sign) crossings; sign +1 = left, -1 = right."""

    letters: tuple[tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "letters", tuple((str(e), int(s)) for e, s in self.letters)
        )
        for _, s in self.letters:
            if s not in (-1, 1):
                raise ValidationError("signs must be +-1")

    def __len__(self):
        return len(self.letters)

    def rotated(self, k: int) -> "LRSequence":
        n = len(self.letters)
        k %= max(n, 1)
        return LRSequence(self.letters[k:] + self.letters[:k])


def lr_word(T: IdealTriangulation, curve: CurveOnSurface) -> LRSequence:
    """Left-right word of a curve: per step the crossed edge and the turn sign."""
    curve.validate(T)
    letters = []
    for t, i, o in curve.steps:
        if o == (i + 2) % 3:
            eps = 1
        elif o == (i + 1) % 3:
            eps = -1
        else:  # i == o already rejected by validate
            raise ValidationError("invalid step")
        letters.append((T.edge_ids[T.side_edge((t, o))], eps))
    return LRSequence(tuple(letters))


def reroute_through_flip(
    T: IdealTriangulation, curve: CurveOnSurface, edge_id: str
) -> CurveOnSurface:
    """Rewrite a strip on T as a strip on T.flip(edge_id) crossing the same
    surviving edges; crossings of the flipped edge are recomputed."""
    curve.validate(T)
    fd = T.flip_data(edge_id)
    T2 = T.flip(edge_id)

    def mapped(side):
        return fd.side_map.get(side, side)

    # Surviving directed crossings: (exit side, entry side) pairs in T2.
    crossings = []
    for t, i, o in curve.steps:
        if T.side_edge((t, o)) == fd.edge:
            continue
        exit_side = mapped((t, o))
        entry_side = mapped(T.glued((t, o)))
        crossings.append((exit_side, entry_side))
    if not crossings:
        raise GeometryError("curve crosses only the flipped edge")

    new_diag = {fd.tA: (fd.tA, 2), fd.tB: (fd.tB, 2)}
    steps = []
    for j, (_, entry) in enumerate(crossings):
        nxt_exit = crossings[(j + 1) % len(crossings)][0]
        t_in = entry[0]
        if nxt_exit[0] == t_in:
            steps.append((t_in, entry[1], nxt_exit[1]))
        else:
            # must cross the new diagonal between the two new triangles
            d1 = new_diag.get(t_in)
            if d1 is None:
                raise GeometryError("re-routing failed: disconnected crossings")
            d2 = T2.glued(d1)
            if d2[0] != nxt_exit[0]:
                raise GeometryError("re-routing failed: crossing does not chain")
            steps.append((t_in, entry[1], d1[1]))
            steps.append((d2[0], d2[1], nxt_exit[1]))
    out = CurveOnSurface(tuple(steps))
    out.validate(T2)
    return out


# -- built-in surfaces ----------------------------------------------------------

def _s_1_1():
    return IdealTriangulation(
        [((0, 0), (1, 0), "e1"),
         ((0, 1), (1, 1), "e2"),
         ((0, 2), (1, 2), "e3")],
        name="s_1_1",
    )


def _s_0_3():
    return IdealTriangulation(
        [((0, 0), (1, 0), "e1"),
         ((0, 1), (1, 2), "e2"),
         ((0, 2), (1, 1), "e3")],
        name="s_0_3",
    )


def _s_0_4():
    # two squares (front with diagonal e1, back with diagonal e2) glued along
    # their four common sides; combinatorially the boundary of a tetrahedron
    return IdealTriangulation(
        [((0, 2), (1, 0), "e1"),
         ((2, 2), (3, 2), "e2"),
         ((0, 0), (3, 0), "e3"),
         ((0, 1), (2, 1), "e4"),
         ((1, 1), (2, 0), "e5"),
         ((1, 2), (3, 1), "e6")],
        name="s_0_4",
    )


def _s_1_2():
    # torus built from two unit squares side by side, each cut by a diagonal
    return IdealTriangulation(
        [((0, 0), (1, 1), "e1"),
         ((0, 2), (1, 0), "e2"),
         ((0, 1), (3, 2), "e3"),
         ((2, 0), (3, 1), "e4"),
         ((2, 2), (3, 0), "e5"),
         ((1, 2), (2, 1), "e6")],
        name="s_1_2",
    )


_BUILTINS = {
    "s_1_1": _s_1_1,
    "s_0_3": _s_0_3,
    "s_0_4": _s_0_4,
    "s_1_2": _s_1_2,
}


def builtin_names():
    return sorted(_BUILTINS)


def build_surface(spec) -> IdealTriangulation:
    """Build a triangulation from a built-in name, a spec dict, or a JSON path/string."""
    if isinstance(spec, IdealTriangulation):
        return spec
    if isinstance(spec, str):
        if spec in _BUILTINS:
            return _BUILTINS[spec]()
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError:
            raise ValidationError(
                f"unknown surface {spec!r}; built-ins are {builtin_names()}"
            ) from None
    if not isinstance(spec, dict):
        raise ValidationError("surface spec must be a name or a JSON object")
    try:
        gluing = spec["gluing"]
    except KeyError:
        raise ValidationError("surface spec needs a 'gluing' table") from None
    edges = [
        (tuple(s1), tuple(s2), f"e{i + 1}") for i, (s1, s2) in enumerate(gluing)
    ]
    T = IdealTriangulation(edges, name=spec.get("name"))
    if "genus" in spec and int(spec["genus"]) != T.genus:
        raise ValidationError(f"declared genus {spec['genus']} but computed {T.genus}")
    if "punctures" in spec and int(spec["punctures"]) != T.punctures:
        raise ValidationError(
            f"declared punctures {spec['punctures']} but computed {T.punctures}"
        )
    if "triangles" in spec and len(spec["triangles"]) != T.num_triangles:
        raise ValidationError("declared triangle list does not match gluing table")
    return T


_S11_CURVES = {
    "a": ((0, 0, 1), (1, 1, 0)),
    "b": ((0, 0, 2), (1, 2, 0)),
    "c": ((0, 2, 1), (1, 1, 2)),
}


def builtin_curve(T: IdealTriangulation, name: str) -> CurveOnSurface:
    """Standard generator strips on built-in surfaces (currently s_1_1: a, b, c)."""
    if T.name == "s_1_1" and name in _S11_CURVES:
        c = CurveOnSurface(_S11_CURVES[name])
        c.validate(T)
        return c
    raise ValidationError(f"no built-in curve {name!r} on {T.name or 'custom surface'}")


# -- random instances (test and experiment support) -----------------------------

def random_surface(rng, triangles: int = 4, max_tries: int = 2000) -> IdealTriangulation:
    """Random connected triangulation without self-folded edges.

    rng is a numpy Generator; triangles must be even.
    """
    if triangles % 2 != 0:
        raise ValidationError("triangle count must be even")
    sides = [(t, k) for t in range(triangles) for k in range(3)]
    for _ in range(max_tries):
        perm = list(rng.permutation(len(sides)))
        pairs = [(sides[perm[2 * i]], sides[perm[2 * i + 1]]) for i in range(len(sides) // 2)]
        if any(s1[0] == s2[0] for s1, s2 in pairs):
            continue  # reject self-folded edges
        edges = [(s1, s2, f"e{i + 1}") for i, (s1, s2) in enumerate(pairs)]
        try:
            return IdealTriangulation(edges)
        except ValidationError:
            continue
    raise ValidationError("failed to sample a valid triangulation")


def random_curve(T: IdealTriangulation, rng, max_len: int = 200) -> CurveOnSurface:
    """Random closed strip: a no-backtrack walk restarted until it recurs."""
    for _ in range(200):
        t, i = 0, 0
        start = (t, i)
        steps = []
        for _ in range(max_len):
            o = (i + 1 + int(rng.integers(2))) % 3
            steps.append((t, i, o))
            t, i = T.glued((t, o))
            if (t, i) == start:
                return CurveOnSurface(tuple(steps))
    raise GeometryError("failed to close a random strip")
