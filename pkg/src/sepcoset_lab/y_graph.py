"""The set Y = {y : S(1, y; D) empty} and the second Cayley graph on Y and H.

Searches in the Y-graph use the same corridor budget as the relative graph:
vertices lie within X-distance ``R`` of the normal-form path between the
endpoints, and an edge u -> v exists when u^-1 v is a nontrivial subgroup
element (any length) or a member of Y of X-length at most ``L``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .group_model import IDENTITY, GroupElement, GroupModel, HLetter, shortlex_key
from .relative_graph import (
    AT_BUDGET,
    ExplorationBudget,
    ExtNat,
    PartialityError,
    alphabet,
    all_geodesics,
    letter_bound,
    ball_elements,
    corridor_offset,
)
from .separating_cosets import check_D, sep_cosets

_MEMBER: dict = {}
_YBALL: dict = {}
_DIST: dict = {}


def y_member(model: GroupModel, y: GroupElement, D, b: ExplorationBudget) -> bool:
    if model.free_rank == 0 and model.declared_infinite_metric:
        # every edge is a subgroup edge with d^ proven infinite off the diagonal,
        # so any geodesic to y != 1 has an essential component
        return not y.word
    key = (id(model), y.word, D, b)
    hit = _MEMBER.get(key)
    if hit is None:
        hit = (model, not sep_cosets(model, IDENTITY, y, D, b))
        _MEMBER[key] = hit
    return hit[1]


def in_subgroup(model: GroupModel, w: GroupElement) -> bool:
    return any(model.subgroup_membership(w, lam) for lam in range(model.n_families))


_LETTER: dict = {}


def is_y_letter(model, w: GroupElement, D, b: ExplorationBudget, max_len: Optional[int] = None) -> Optional[bool]:
    """Edge test of the Y-graph for a label w (identity excluded).

    Returns None when membership of w in Y is not certified at ``b``.
    """
    if not w.word or len(w.word) > (b.L if max_len is None else max_len):
        return False
    key = (id(model), w.word, D, b)
    hit = _LETTER.get(key)
    if hit is None or hit[0] is not model:
        try:
            val = in_subgroup(model, w) or y_member(model, w, D, b)
        except PartialityError:
            val = None
        hit = (model, val)
        _LETTER[key] = hit
    return hit[1]


@dataclass
class YBall:
    D: object
    budget: ExplorationBudget
    radius: int
    members: list


def y_ball(model: GroupModel, radius: int, D, b: ExplorationBudget) -> YBall:
    key = (id(model), radius, D, b)
    hit = _YBALL.get(key)
    if hit is None or hit[0] is not model:
        members = [g for g in ball_elements(model, radius) if y_member(model, g, D, b)]
        hit = (model, YBall(D, b, radius, members))
        _YBALL[key] = hit
    return hit[1]


def corridor_vertices(model: GroupModel, t: tuple, R: int) -> list:
    """All vertices within X-distance R of the normal-form path 1 -> t."""
    steps = [model.multiplier(model.atoms_of(s)) for s in alphabet(model, 1)]
    seen = {}
    for i in range(len(t) + 1):
        p = t[:i]
        seen.setdefault(p, None)
        frontier = [p]
        for _ in range(R):
            nxt = []
            for u in frontier:
                for mult in steps:
                    v = mult(u)
                    if v not in seen and corridor_offset(v, t) <= R:
                        seen[v] = None
                        nxt.append(v)
            frontier = nxt
    return list(seen)


def _lcp(v: tuple, t: tuple) -> int:
    i = 0
    for x, y in zip(v, t):
        if x != y:
            break
        i += 1
    return i


class YSearch:
    """BFS from the identity to ``t`` in the Y-graph restricted to the corridor.

    Candidate neighbours of u are corridor vertices whose projection to the
    path lies within L of the projection of u; X-distance is at least the
    projection difference, so no edge of X-length <= L is skipped.
    """

    def __init__(self, model: GroupModel, t: tuple, D, b: ExplorationBudget,
                 member_budget: Optional[ExplorationBudget] = None):
        self.model, self.t, self.D, self.b = model, t, D, b
        # Y-membership is certified by sep_cosets itself, so a wider corridor
        # can reuse the verdicts of the base budget.
        self.mb = b if member_budget is None else member_budget
        self.uncertain = False
        self.vertices = sorted(corridor_vertices(model, t, b.R), key=shortlex_key)
        buckets: dict = {}
        for v in self.vertices:
            buckets.setdefault(_lcp(v, t), []).append(v)
        self._buckets = buckets
        self._corridor = set(self.vertices)
        self._h_mults = [model.multiplier(model.atoms_of(s)) for s in alphabet(model, letter_bound(b, t))
                         if isinstance(s, HLetter)]
        self._nbrs: dict = {}
        self.dist = {(): 0}
        frontier = [()]
        d = 0
        # Edges are only tested towards undiscovered vertices; before each
        # layer the direct edges to t are tried, which settles the last layer
        # without expanding it.
        while frontier and t not in self.dist:
            d += 1
            if any(self._edge(u, t) for u in frontier):
                self.dist[t] = d
                break
            nxt = []
            for u in frontier:
                for v in self._candidates(u):
                    if v not in self.dist and self._edge(u, v):
                        self.dist[v] = d
                        nxt.append(v)
            frontier = nxt

    def _candidates(self, u: tuple):
        """Corridor vertices that may be joined to u: Y-letters of length at
        most L (projection within L) and subgroup letters of any length."""
        pu = _lcp(u, self.t)
        L = self.b.L
        seen = set()
        for p in range(max(0, pu - L), pu + L + 1):
            for v in self._buckets.get(p, ()):
                if v != u and abs(len(v) - len(u)) <= L:
                    seen.add(v)
                    yield v
        for mult in self._h_mults:
            v = mult(u)
            if v in self._corridor and v not in seen and v != u:
                yield v

    def _edge(self, u: tuple, v: tuple) -> bool:
        model = self.model
        if u == v:
            return False
        w = model.mul(model.inv(GroupElement(u)), GroupElement(v))
        if in_subgroup(model, w):
            return True
        if len(w.word) > self.b.L:
            return False
        ok = is_y_letter(model, w, self.D, self.mb, self.b.L)
        if ok is None:
            self.uncertain = True
        return bool(ok)

    def nbrs(self, u: tuple) -> list:
        hit = self._nbrs.get(u)
        if hit is None:
            hit = [v for v in self._candidates(u) if self._edge(u, v)]
            self._nbrs[u] = hit
        return hit

    @property
    def distance(self) -> ExtNat:
        d = self.dist.get(self.t)
        return AT_BUDGET if d is None else ExtNat.fin(d)

    def geodesic_vertex_paths(self, cap: int):
        """Vertex sequences of Y-graph geodesics 1 -> t in shortlex order of vertices."""
        if self.t not in self.dist:
            return [], False
        target = self.dist[self.t]
        by_d: dict = {}
        for v, dv in self.dist.items():
            by_d.setdefault(dv, []).append(v)
        layers = {target: {self.t}}
        for d in range(target, 0, -1):
            layers[d - 1] = {u for u in by_d.get(d - 1, ()) if layers[d].intersection(self.nbrs(u))}
        out = []
        overflow = False
        stack = [((),)]
        while stack:
            path = stack.pop()
            k = len(path) - 1
            if k == target:
                if len(out) >= cap:
                    overflow = True
                    break
                out.append(path)
                continue
            succ = set(self.nbrs(path[-1])) & layers[k + 1]
            for v in sorted(succ, key=shortlex_key, reverse=True):
                stack.append(path + (v,))
        return out, overflow


def _search(model, t, D, b, mb=None) -> YSearch:
    key = (id(model), t, D, b, mb)
    hit = _DIST.get(key)
    if hit is None or hit[0] is not model:
        hit = (model, YSearch(model, t, D, b, mb))
        _DIST[key] = hit
    return hit[1]


def y_distance(model: GroupModel, f: GroupElement, g: GroupElement, D, b: ExplorationBudget):
    """(d_Y(f, g), stable).

    Values 0 and 1 are exact.  A value 2 is exact once f^-1 g is known not to
    be a single Y- or H-letter.  Larger values are compared with a search at
    the widened budget.
    """
    check_D(D)
    t = model.mul(model.inv(f), g)
    if not t.word:
        return ExtNat.fin(0), True
    if in_subgroup(model, t):
        return ExtNat.fin(1), True
    # Y has no length bound: t itself is a letter iff S(1, t; D) is empty
    direct = is_y_letter(model, t, D, b, len(t.word))
    if direct:
        return ExtNat.fin(1), True
    first = _search(model, t.word, D, b)
    d = first.distance
    if d.finite and d.value == 1:
        return d, True
    if first.uncertain:
        return d, False
    if d.finite and d.value == 2 and direct is False:
        return d, True
    wide = _search(model, t.word, D, b.widened(), b)
    return d, d == wide.distance and not wide.uncertain


def stable_y_distance(model, f, g, D, b) -> int:
    d, ok = y_distance(model, f, g, D, b)
    if not ok or not d.finite:
        raise PartialityError(f"Y-distance {model.format(f)} -> {model.format(g)} not stable at {b}")
    return d.value


@dataclass
class QiGap:
    lower_ok: bool
    upper_ok: bool
    n_sep: int
    d_y: int

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def qi_gap(model: GroupModel, f, g, D, b: ExplorationBudget) -> QiGap:
    """Both sides of (d_Y - 1)/2 <= |S(f, g; D)| <= 3 d_Y."""
    n = len(sep_cosets(model, f, g, D, b))
    dy = stable_y_distance(model, f, g, D, b)
    return QiGap(Fraction(dy - 1, 2) <= n, n <= 3 * dy, n, dy)


def y_geodesics(model, f, g, D, b: ExplorationBudget):
    """Vertex lists of Y-graph geodesics f -> g."""
    t = model.mul(model.inv(f), g)
    paths, overflow = _search(model, t.word, D, b).geodesic_vertex_paths(b.cap)
    out = [[model.mul(f, GroupElement(v)) for v in p] for p in paths]
    return out, overflow


def hausdorff_gap(model: GroupModel, f, g, D, b: ExplorationBudget) -> int:
    """Largest Y-distance Hausdorff gap between X-geodesics and Y-geodesics f -> g."""
    xs = all_geodesics(model, f, g, b)
    ys, overflow = y_geodesics(model, f, g, D, b)
    if xs.overflow or overflow:
        raise PartialityError("geodesic enumeration truncated")
    x_sets = [p.vertices(model) for p in xs.paths]
    worst = 0
    cache: dict = {}

    def dy(u, v):
        key = (u, v)
        if key not in cache:
            cache[key] = stable_y_distance(model, u, v, D, b)
        return cache[key]

    for P in x_sets:
        for Q in ys:
            h1 = max(min(dy(p, q) for q in Q) for p in P)
            h2 = max(min(dy(p, q) for p in P) for q in Q)
            worst = max(worst, h1, h2)
    return worst


def acylindricity_probe(model: GroupModel, eps: int, sep: int, D, b: ExplorationBudget, radius: int,
                        pairs: Optional[Sequence] = None, n_pairs: int = 4, seed: int = 0) -> dict:
    """Largest number of g in the ball moving both x and y by at most eps.

    A finite report over sampled pairs with d_Y(x, y) >= sep, not a proof.
    """
    pool = ball_elements(model, radius)
    if pairs is None:
        rng = random.Random(seed)
        pairs = []
        tries = 0
        while len(pairs) < n_pairs and tries < 200 * n_pairs:
            tries += 1
            x, y = rng.choice(pool), rng.choice(pool)
            try:
                if stable_y_distance(model, x, y, D, b) >= sep:
                    pairs.append((x, y))
            except PartialityError:
                continue
    best = 0
    witness = None
    for x, y in pairs:
        count = 0
        for g in pool:
            if (stable_y_distance(model, x, model.mul(g, x), D, b) <= eps
                    and stable_y_distance(model, y, model.mul(g, y), D, b) <= eps):
                count += 1
        if count > best:
            best, witness = count, (model.format(x), model.format(y))
    return {"max_count": best, "pairs": len(pairs), "witness": witness, "label": "ESTIMATE"}


def clear_cache():
    _MEMBER.clear()
    _LETTER.clear()
    _YBALL.clear()
    _DIST.clear()


def export_members(model: GroupModel) -> list:
    """Certified Y-membership verdicts for ``model`` as (word, D, budget, verdict) rows."""
    rows = []
    for (_, word, D, b), (m, val) in _MEMBER.items():
        if m is model:
            rows.append((model.format(GroupElement(word)), str(D), b.as_text(), val))
    return sorted(rows)


def import_members(model: GroupModel, rows) -> int:
    from fractions import Fraction
    n = 0
    for text, D, btext, val in rows:
        R, L, cap = (int(x) for x in btext.split(","))
        d = Fraction(D)
        d = int(d) if d.denominator == 1 else d
        _MEMBER[(id(model), model.parse(text).word, d, ExplorationBudget(R, L, cap))] = (model, bool(val))
        n += 1
    return n
