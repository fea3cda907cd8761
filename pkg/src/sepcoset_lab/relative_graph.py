"""Budgeted exploration of the relative Cayley graph.

The graph has vertex set G and an edge g -> g*s for every generator s and
every nontrivial subgroup element s.  Subgroups may be infinite, so every
search runs inside an :class:`ExplorationBudget`.  A query f -> g is
translated to 1 -> t with t = f^-1 g; vertices are kept within X-distance
``R`` of the normal-form path 1 -> t (the corridor).  Every subgroup edge
between corridor vertices is available (see :func:`letter_bound`); ``L``
bounds the Y-letters of the second Cayley graph.  Distances therefore depend
only on f^-1 g and every query is a single cached search from the identity.
A value is called stable when it is unchanged at (R + 2, L + 2).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .group_model import (
    IDENTITY,
    CosetRef,
    GroupElement,
    GroupModel,
    HLetter,
    XLetter,
    shortlex_key,
)


class BudgetError(ValueError):
    """A query left the explored ball."""


class PartialityError(RuntimeError):
    """A result would be incomplete at the given budget."""


class UnstableError(RuntimeError):
    """A value changed when the budget was widened."""


class ModelInconsistency(RuntimeError):
    """A sampled configuration contradicts a proven bound (indicates a bug)."""


@dataclass(frozen=True)
class ExplorationBudget:
    R: int = 1
    L: int = 8
    cap: int = 256

    def __post_init__(self):
        if min(self.R, self.L, self.cap) < 0:
            raise ValueError("budget entries must be non-negative")

    def widened(self, by: int = 2) -> "ExplorationBudget":
        return ExplorationBudget(self.R + by, self.L + by, self.cap)

    def as_text(self) -> str:
        return f"{self.R},{self.L},{self.cap}"


@dataclass(frozen=True)
class ExtNat:
    """A natural number, infinity-at-budget, or proven infinity."""

    value: Optional[int] = None
    kind: str = "fin"  # "fin" | "budget" | "proven"

    @staticmethod
    def fin(n: int) -> "ExtNat":
        return ExtNat(n, "fin")

    @property
    def finite(self) -> bool:
        return self.kind == "fin"

    def exceeds(self, D) -> Optional[bool]:
        """Certified ``self > D``; None when truncation leaves it undecided."""
        if self.kind == "fin":
            return self.value > D
        if self.kind == "proven":
            return True
        return None

    def __str__(self):
        if self.kind == "fin":
            return str(self.value)
        return "inf" if self.kind == "proven" else "inf@budget"

    def to_json(self):
        return self.value if self.kind == "fin" else str(self)


PROVEN_INF = ExtNat(None, "proven")
AT_BUDGET = ExtNat(None, "budget")


@dataclass(frozen=True)
class PathRec:
    base: GroupElement
    labels: tuple
    geodesic: bool = False
    budget: Optional[ExplorationBudget] = None

    def vertices(self, model: GroupModel) -> list:
        out = [self.base]
        for s in self.labels:
            out.append(model.mul_atoms(out[-1], model.atoms_of(s)))
        return out

    def end(self, model: GroupModel) -> GroupElement:
        return self.vertices(model)[-1]

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True)
class Component:
    lam: int
    coset: CosetRef
    entrance: GroupElement
    exit: GroupElement
    start: int  # index of first edge
    stop: int  # one past the last edge


@dataclass
class GeodesicSet:
    distance: ExtNat
    paths: list
    overflow: bool
    budget: ExplorationBudget


# --- budgeted searches -----------------------------------------------------
def corridor_offset(v: tuple, t: tuple) -> int:
    """X-distance from ``v`` to the normal-form path 1 -> ``t``."""
    i = 0
    for x, y in zip(v, t):
        if x != y:
            break
        i += 1
    return len(v) - i


def in_corridor(v: tuple, t: tuple, R: int) -> bool:
    """corridor_offset(v, t) <= R, via a prefix comparison."""
    k = len(v) - R
    return k <= 0 or (k <= len(t) and v[:k] == t[:k])


class Search:
    """Breadth-first search from the identity towards ``t``.

    Only vertices within X-distance ``R`` of the normal-form path 1 -> t are
    visited (the corridor).  ``forbid`` names a family lam whose edges are
    dropped while their source lies in the subgroup itself; that is the
    admissible graph used for the relative metric d^_lam.
    """

    def __init__(self, model: GroupModel, t: tuple, budget: ExplorationBudget, forbid: Optional[int] = None):
        self.model = model
        self.t = t
        self.budget = budget
        self.forbid = forbid
        self.letters = alphabet(model, letter_bound(budget, t))
        self.letter_atoms = [model.atoms_of(s) for s in self.letters]
        self.inverse_atoms = [model.atoms_of(model.letter_inverse(s)) for s in self.letters]
        self.mults = [model.multiplier(a) for a in self.letter_atoms]
        self.inv_mults = [model.multiplier(a) for a in self.inverse_atoms]
        self.dist: dict = {}
        self._dag = None
        self._search()

    def _allowed(self, i: int, word: tuple) -> bool:
        s = self.letters[i]
        if self.forbid is None or not isinstance(s, HLetter) or s.lam != self.forbid:
            return True
        return self.model.subgroup_membership(GroupElement(word), self.forbid) is None

    def _search(self):
        R, t = self.budget.R, self.t
        dist = self.dist
        dist[()] = 0
        frontier = [()]
        d = 0
        check = self.forbid is not None
        while frontier and t not in dist:
            d += 1
            nxt = []
            for u in frontier:
                for i, mult in enumerate(self.mults):
                    if check and not self._allowed(i, u):
                        continue
                    v = mult(u)
                    if v not in dist and in_corridor(v, t, R):
                        dist[v] = d
                        nxt.append(v)
            frontier = nxt

    @property
    def distance(self) -> ExtNat:
        d = self.dist.get(self.t)
        return AT_BUDGET if d is None else ExtNat.fin(d)

    def predecessors(self, word: tuple):
        """Pairs (letter index, u) with u*letter = word and dist(u) = dist(word) - 1."""
        d = self.dist[word]
        out = []
        for i, mult in enumerate(self.inv_mults):
            u = mult(word)
            if self.dist.get(u) == d - 1 and self._allowed(i, u):
                out.append((i, u))
        return out

    def dag(self) -> dict:
        """Successor lists (letter index, vertex) of the geodesic DAG 1 -> t.

        Every path from the identity to t through this DAG is a geodesic and
        every geodesic arises this way.  Successors follow the alphabet order.
        """
        if self._dag is not None:
            return self._dag
        word = self.t
        dag: dict = {}
        if word in self.dist:
            on_geo = {word}
            layer = {word}
            while layer:
                prev = set()
                for v in layer:
                    for _, u in self.predecessors(v):
                        prev.add(u)
                on_geo |= prev
                layer = prev
            for u in on_geo:
                du = self.dist[u]
                succ = []
                if u != word:
                    for i, mult in enumerate(self.mults):
                        v = mult(u)
                        if v in on_geo and self.dist[v] == du + 1 and self._allowed(i, u):
                            succ.append((i, v))
                dag[u] = succ
        self._dag = dag
        return dag

    def geodesic_labels(self, cap: int):
        """Label-index sequences of geodesics 1 -> t in lexicographic order."""
        dag = self.dag()
        if not dag:
            return [], False
        out: list = []
        overflow = False
        stack = [((), ())]
        # iterative DFS; children pushed in reverse so output is lexicographic
        while stack:
            u, labels = stack.pop()
            if u == self.t:
                if len(out) >= cap:
                    overflow = True
                    break
                out.append(labels)
                continue
            stack.extend((v, labels + (i,)) for i, v in reversed(dag[u]))
        return out, overflow

    def count_geodesics(self) -> int:
        dag = self.dag()
        if not dag:
            return 0
        memo = {self.t: 1}
        for u in sorted(dag, key=self.dist.__getitem__, reverse=True):
            if u != self.t:
                memo[u] = sum(memo[v] for _, v in dag[u])
        return memo[()]


class Ball:
    """Plain breadth-first enumeration of an X-ball (used to list elements)."""

    def __init__(self, model: GroupModel, radius: int):
        letters = alphabet(model, 1)
        atoms = [model.atoms_of(s) for s in letters]
        self.dist = {(): 0}
        frontier = [()]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for a in atoms:
                    v = model.right_mul(u, a)
                    if len(v) <= radius and v not in self.dist:
                        self.dist[v] = d
                        nxt.append(v)
            frontier = nxt


_SEARCHES: dict = {}
_BALLS: dict = {}


def letter_bound(b: ExplorationBudget, t: tuple) -> int:
    """Largest subgroup-letter X-length used when searching towards t.

    Two vertices of the corridor differ by at most len(t) + 2R, so letters up
    to that length make the corridor graph complete; L only acts as a floor.
    """
    return max(b.L, len(t) + 2 * b.R)


_ALPHABETS: dict = {}


def alphabet(model: GroupModel, L: int) -> list:
    """Edge labels of the budgeted graph in the fixed alphabet order."""
    key = (id(model), L)
    hit = _ALPHABETS.get(key)
    if hit is None or hit[0] is not model:
        letters = list(model.x_letters())
        for lam in range(model.n_families):
            letters += [HLetter(lam, e) for e in model.h_enumerate(lam, L)]
        hit = (model, sorted(letters, key=model.letter_key))
        _ALPHABETS[key] = hit
    return hit[1]


def get_search(model: GroupModel, t: tuple, budget: ExplorationBudget, forbid: Optional[int] = None) -> Search:
    key = (id(model), t, budget.R, budget.L, forbid)
    hit = _SEARCHES.get(key)
    if hit is None or hit.model is not model:
        hit = Search(model, t, ExplorationBudget(budget.R, budget.L, 0), forbid)
        _SEARCHES[key] = hit
    return hit


def clear_cache():
    _SEARCHES.clear()
    _ALPHABETS.clear()
    _BALLS.clear()
    _REL_CACHE.clear()


# --- operations -------------------------------------------------------------
def neighbors(model: GroupModel, g: GroupElement, b: ExplorationBudget) -> list:
    if model.x_length(g) > b.R:
        raise BudgetError("vertex outside radius")
    out = []
    for s in alphabet(model, b.L):
        v = model.mul_atoms(g, model.atoms_of(s))
        if model.x_length(v) <= b.R:
            out.append((s, v))
    return out


def _offset(model, f, g) -> tuple:
    return model.mul(model.inv(f), g).word


def rel_distance(model: GroupModel, f: GroupElement, g: GroupElement, b: ExplorationBudget):
    """(distance, stable) in the relative Cayley graph."""
    t = _offset(model, f, g)
    d = get_search(model, t, b).distance
    return d, d == corridor_distance(model, t, b.widened())


def corridor_distance(model: GroupModel, t: tuple, b: ExplorationBudget) -> ExtNat:
    """Distance 1 -> t inside the corridor, by bidirectional search (cached)."""
    key = (id(model), None, t, b.R, b.L)
    hit = _REL_CACHE.get(key)
    if hit is None or hit[0] is not model:
        hit = (model, _admissible_search(model, None, t, b))
        _REL_CACHE[key] = hit
    return hit[1]


def stable_distance(model, f, g, b) -> int:
    d, ok = rel_distance(model, f, g, b)
    if not ok or not d.finite:
        raise UnstableError(f"distance {model.format(f)} -> {model.format(g)} not stable at {b}")
    return d.value


def all_geodesics(model: GroupModel, f: GroupElement, g: GroupElement, b: ExplorationBudget) -> GeodesicSet:
    t = _offset(model, f, g)
    search = get_search(model, t, b)
    seqs, overflow = search.geodesic_labels(b.cap)
    paths = [PathRec(f, tuple(search.letters[i] for i in seq), True, b) for seq in seqs]
    d = search.distance
    return GeodesicSet(d, paths, overflow, b)


def components(model: GroupModel, p: PathRec) -> list:
    """Maximal runs of subgroup edges of one family along ``p``."""
    verts = p.vertices(model)
    out = []
    i, n = 0, len(p.labels)
    while i < n:
        s = p.labels[i]
        if not isinstance(s, HLetter):
            i += 1
            continue
        j = i + 1
        while j < n and isinstance(p.labels[j], HLetter) and p.labels[j].lam == s.lam:
            j += 1
        coset = model.coset_canonical(verts[i], s.lam)
        out.append(Component(s.lam, coset, verts[i], verts[j], i, j))
        i = j
    return out


def geodesic_components(model: GroupModel, f: GroupElement, g: GroupElement, b: ExplorationBudget) -> list:
    """Every component occurring on some geodesic f -> g, without listing geodesics.

    A component is a maximal run of same-family subgroup edges on a geodesic;
    runs are read off the geodesic DAG, so the result never truncates.
    """
    t = _offset(model, f, g)
    search = get_search(model, t, b)
    dag = search.dag()
    letters = search.letters
    fam = [s.lam if isinstance(s, HLetter) else None for s in letters]
    preds: dict = {u: [] for u in dag}
    for u, succ in dag.items():
        for i, v in succ:
            preds[v].append((i, u))
    out = []
    seen = set()
    for u0, succ in dag.items():
        for i, v in succ:
            lam = fam[i]
            if lam is None:
                continue
            # u0 must start the run on at least one geodesic
            if u0 and all(fam[j] == lam for j, _ in preds[u0]):
                continue
            stack = [v]
            while stack:
                w = stack.pop()
                nxt = dag[w]
                if w == t or any(fam[j] != lam for j, _ in nxt):
                    key = (u0, w, lam)
                    if key not in seen:
                        seen.add(key)
                        ent = model.mul(f, GroupElement(u0))
                        out.append(Component(lam, model.coset_canonical(ent, lam), ent,
                                             model.mul(f, GroupElement(w)), search.dist[u0], search.dist[w]))
                stack.extend(x for j, x in nxt if fam[j] == lam)
    out.sort(key=lambda c: (c.start, c.stop, shortlex_key(c.entrance.word), shortlex_key(c.exit.word)))
    return out


def polygon_components(model: GroupModel, sides: Sequence[PathRec]):
    """All components of a closed polygon, each tagged isolated or not.

    Returns a list of (side index, Component, isolated flag).  Two components
    are connected when they lie in the same coset of the same family.
    """
    tagged = [(k, c) for k, p in enumerate(sides) for c in components(model, p)]
    counts: dict = {}
    for _, c in tagged:
        counts[c.coset] = counts.get(c.coset, 0) + 1
    return [(k, c, counts[c.coset] == 1) for k, c in tagged]


def _admissible_search(model: GroupModel, lam: Optional[int], t: tuple, b: ExplorationBudget) -> ExtNat:
    """Bidirectional BFS 1 <-> t avoiding lam-edges inside the subgroup itself.

    With ``lam`` None no edge is avoided and the plain corridor distance results.
    """
    if not t:
        return ExtNat.fin(0)
    letters = alphabet(model, letter_bound(b, t))
    mults = [model.multiplier(model.atoms_of(s)) for s in letters]
    fam = [lam is not None and isinstance(s, HLetter) and s.lam == lam for s in letters]
    R = b.R

    def inside(w):
        return lam is not None and model.subgroup_membership(GroupElement(w), lam) is not None

    seen = [{(): 0}, {t: 0}]
    frontier = [[()], [t]]
    # the letter set is closed under inverses, so both sides expand alike
    while frontier[0] and frontier[1]:
        side = 0 if len(frontier[0]) <= len(frontier[1]) else 1
        mine, other = seen[side], seen[1 - side]
        nxt = []
        best = None
        for u in frontier[side]:
            u_in = inside(u)
            du = mine[u] + 1
            for i, mult in enumerate(mults):
                if fam[i] and u_in:
                    continue
                v = mult(u)
                if v in mine or not in_corridor(v, t, R):
                    continue
                mine[v] = du
                nxt.append(v)
                if v in other:
                    total = du + other[v]
                    best = total if best is None else min(best, total)
        if best is not None:
            return ExtNat.fin(best)
        frontier[side] = nxt
    return AT_BUDGET


_REL_CACHE: dict = {}


def relative_metric(model: GroupModel, lam: int, f: GroupElement, g: GroupElement, b: ExplorationBudget,
                    use_declared: bool = True):
    """(d^_lam(f, g), stable).  Off the coset the value is proven infinite."""
    t = _offset(model, f, g)
    if model.subgroup_membership(GroupElement(t), lam) is None:
        return PROVEN_INF, True
    if not t:
        return ExtNat.fin(0), True
    if use_declared and model.declared_infinite_metric:
        return PROVEN_INF, True
    out = []
    for bb in (b, b.widened()):
        key = (id(model), lam, t, bb.R, bb.L)
        if key not in _REL_CACHE:
            _REL_CACHE[key] = (model, _admissible_search(model, lam, t, bb))
        out.append(_REL_CACHE[key][1])
    return out[0], out[0] == out[1]


def gap(model: GroupModel, c: Component, b: ExplorationBudget) -> ExtNat:
    value, stable = relative_metric(model, c.lam, c.entrance, c.exit, b)
    if not stable:
        return AT_BUDGET
    return value


# --- hyperbolic-geometry utilities -------------------------------------------
DistFn = Callable[[GroupElement, GroupElement], int]


def xh_distance_fn(model: GroupModel, b: ExplorationBudget) -> DistFn:
    return lambda x, y: stable_distance(model, x, y, b)


def gromov_product(x, y, o, dist: DistFn) -> Fraction:
    return Fraction(dist(x, o) + dist(y, o) - dist(x, y), 2)


def _matrix(points, dist):
    n = len(points)
    m = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            m[i][j] = m[j][i] = dist(points[i], points[j])
    return m


def delta_estimate(points: Sequence, dist: DistFn, basepoints: Optional[Sequence[int]] = None) -> Fraction:
    """Largest defect of the four-point condition over the sample.

    ``basepoints`` are indices into ``points`` used as w; default is all.
    """
    n = len(points)
    if n < 2:
        return Fraction(0)
    m = _matrix(points, dist)
    ws = range(n) if basepoints is None else basepoints
    worst = Fraction(0)
    for w in ws:
        dw = m[w]
        gp = [[Fraction(dw[i] + dw[j] - m[i][j], 2) for j in range(n)] for i in range(n)]
        for x in range(n):
            gx = gp[x]
            for y in range(n):
                gxy = gx[y]
                gy = gp[y]
                for z in range(n):
                    defect = min(gxy, gy[z]) - gx[z]
                    if defect > worst:
                        worst = defect
    return worst


@dataclass
class VisualMetric:
    D: list
    eps: float
    eps_prime: float
    gromov: list


def visual_metric_chain(points: Sequence, eps: float, o, dist: DistFn, delta) -> VisualMetric:
    """Chain-infimum metric over a finite point set (Floyd-Warshall)."""
    eps_prime = math.exp(eps * float(delta)) - 1
    if eps_prime > math.sqrt(2) - 1 + 1e-12:
        bound = math.log(math.sqrt(2)) / float(delta) if delta else math.inf
        raise ValueError(f"epsilon too large: need epsilon <= {bound:.6g} for delta {delta}")
    n = len(points)
    gp = [[gromov_product(points[i], points[j], o, dist) for j in range(n)] for i in range(n)]
    D = [[0.0 if i == j else math.exp(-eps * float(gp[i][j])) for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            dik = D[i][k]
            for j in range(n):
                if dik + D[k][j] < D[i][j]:
                    D[i][j] = dik + D[k][j]
    return VisualMetric(D, eps, eps_prime, gp)


@dataclass
class CEstimate:
    C: Fraction
    n_polygons: int
    n_isolated: int
    seed: int
    running_max: list = field(default_factory=list)
    worst: Optional[tuple] = None


def isolated_gaps(model: GroupModel, sides: Sequence[PathRec], b: ExplorationBudget) -> list:
    """d^ values of the isolated components with distinct endpoints."""
    out = []
    for k, c, iso in polygon_components(model, sides):
        if not iso or c.entrance == c.exit:
            continue
        value, stable = relative_metric(model, c.lam, c.entrance, c.exit, b)
        if value.kind == "proven":
            raise ModelInconsistency(
                f"isolated component with infinite relative metric on side {k}: "
                f"{model.format(c.entrance)} -> {model.format(c.exit)}")
        if not stable or not value.finite:
            raise PartialityError("isolated component gap not certified at budget")
        out.append((k, c, value.value))
    return out


def ball_elements(model: GroupModel, radius: int) -> list:
    """All elements of X-length <= radius in shortlex order."""
    # X letters reach everything in the free part; factor syllables have length 1
    key = (id(model), radius)
    if key not in _BALLS or _BALLS[key][0] is not model:
        _BALLS[key] = (model, Ball(model, radius))
    words = sorted(_BALLS[key][1].dist, key=shortlex_key)
    return [GroupElement(w) for w in words]


def sample_polygon(model, rng: random.Random, pool: Sequence, n: int, b: ExplorationBudget):
    verts = [rng.choice(pool) for _ in range(n)]
    sides = []
    for i in range(n):
        gs = all_geodesics(model, verts[i], verts[(i + 1) % n], b)
        if gs.overflow or not gs.paths:
            return verts, None
        sides.append(rng.choice(gs.paths))
    return verts, sides


def estimate_C(model: GroupModel, b: ExplorationBudget, n_values=(2, 3, 4, 5), samples: int = 1000,
               radius: int = 4, seed: int = 0, polygons=None) -> CEstimate:
    """Running maximum of d^(a-, a+)/n over isolated components of geodesic n-gons.

    ``polygons`` may supply explicit lists of sides; otherwise n-gons are
    sampled from the ball of the given radius with a seeded generator.
    """
    rng = random.Random(seed)
    pool = ball_elements(model, radius)
    best = Fraction(0)
    running = []
    n_iso = 0
    count = 0
    worst = None
    if polygons is None:
        polygons = []
        for i in range(samples):
            n = n_values[i % len(n_values)]
            _, sides = sample_polygon(model, rng, pool, n, b)
            if sides is not None:
                polygons.append(sides)
    for sides in polygons:
        n = len(sides)
        count += 1
        for k, c, value in isolated_gaps(model, sides, b):
            n_iso += 1
            if Fraction(value, n) > best:
                best = Fraction(value, n)
                worst = (tuple(model.format(p.base) for p in sides), model.format(c.entrance),
                         model.format(c.exit), value)
        running.append(best)
    return CEstimate(best, count, n_iso, seed, running, worst)


def penetrated_by_all(model: GroupModel, f: GroupElement, g: GroupElement, coset: CosetRef,
                      b: ExplorationBudget) -> bool:
    """True when every geodesic f -> g has a component in ``coset``.

    Decided on the geodesic DAG: drop the subgroup edges lying in the coset
    and test whether g is still reachable.
    """
    t = _offset(model, f, g)
    search = get_search(model, t, b)
    dag = search.dag()
    if not dag:
        raise PartialityError(f"{model.format(g)} not reached from {model.format(f)} at {b}")
    local = model.coset_canonical(model.mul(model.inv(f), coset.rep), coset.lam)
    fam = [s.lam if isinstance(s, HLetter) else None for s in search.letters]
    seen = {()}
    stack = [()]
    while stack:
        u = stack.pop()
        if u == t:
            return False
        inside = None
        for i, v in dag[u]:
            if fam[i] == coset.lam:
                if inside is None:
                    inside = model.coset_canonical(GroupElement(u), coset.lam) == local
                if inside:
                    continue
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return True
