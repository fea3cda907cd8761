"""Eventually periodic geodesic rays and the finite-stage boundary machinery."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .group_model import GroupElement, GroupModel, IDENTITY, ModelError
from .relative_graph import (
    ExplorationBudget,
    PartialityError,
    PathRec,
    UnstableError,
    all_geodesics,
    get_search,
    rel_distance,
    relative_metric,
    stable_distance,
)
from .separating_cosets import check_D, sep_cosets
from .y_graph import y_distance


class SchemeRejected(ValueError):
    def __init__(self, n: int, msg: str = ""):
        super().__init__(msg or f"truncation at depth {n} is not geodesic")
        self.n = n


class WindowError(RuntimeError):
    """The tested window was too short to certify the answer."""


@dataclass(frozen=True)
class RayScheme:
    base: GroupElement
    prefix: tuple
    period: tuple

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be nonempty")

    def label(self, i: int):
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def labels(self, n: int) -> tuple:
        return tuple(self.label(i) for i in range(n))

    def vertices(self, model: GroupModel, n: int) -> list:
        return PathRec(self.base, self.labels(n)).vertices(model)

    def point(self, model: GroupModel, n: int) -> GroupElement:
        return self.vertices(model, n)[-1]

    def translate(self, model: GroupModel, g: GroupElement) -> "RayScheme":
        return RayScheme(model.mul(g, self.base), self.prefix, self.period)

    def shift(self, k: int) -> "RayScheme":
        """The same ray started at its k-th vertex (requires k >= len(prefix))."""
        return RayScheme(self.base, self.labels(k), self.period)


def parse_scheme(model: GroupModel, text: str) -> RayScheme:
    """Parse ``base=1 prefix=[] period=[h:ab^3, x:a]``."""
    fields = dict(re.findall(r"(\w+)\s*=\s*(\[[^\]]*\]|\S+)", text))
    if "period" not in fields:
        raise ModelError(f"scheme needs a period: {text!r}")

    def letters(v):
        v = v.strip()
        if not (v.startswith("[") and v.endswith("]")):
            raise ModelError(f"expected [..] list, got {v!r}")
        body = v[1:-1].strip()
        return tuple(model.parse_letter(x) for x in body.split(",")) if body else ()

    return RayScheme(model.parse(fields.get("base", "1")), letters(fields.get("prefix", "[]")),
                     letters(fields["period"]))


def format_scheme(model: GroupModel, s: RayScheme) -> str:
    fl = lambda ls: "[" + ", ".join(model.format_letter(x) for x in ls) + "]"
    return f"base={model.format(s.base)} prefix={fl(s.prefix)} period={fl(s.period)}"


def ray_truncation(model: GroupModel, s: RayScheme, n: int, b: ExplorationBudget) -> PathRec:
    """First n labels of the scheme; rejects the scheme if the path is not geodesic."""
    if n < 0:
        raise ValueError("depth must be non-negative")
    labels = s.labels(n)
    verts = PathRec(s.base, labels).vertices(model)
    d, stable = rel_distance(model, s.base, verts[-1], b)
    if not stable or not d.finite:
        raise PartialityError(f"distance to depth {n} not stable at {b}")
    if d.value != n:
        # locate the first failing depth
        for m in range(1, n + 1):
            dm = stable_distance(model, s.base, verts[m], b)
            if dm != m:
                raise SchemeRejected(m)
    return PathRec(s.base, labels, True, b)


def ray_sep_cosets(model: GroupModel, s: RayScheme, depth: int, D, b: ExplorationBudget) -> list:
    ray_truncation(model, s, depth, b)
    return sep_cosets(model, s.base, s.point(model, depth), D, b)


@dataclass
class ConvergenceReport:
    rows: list  # (depth, |S|, d_Y, d_Y stable, qi ok)
    verdict: str


def convergence_check(model: GroupModel, s: RayScheme, depths: Sequence[int], D, b: ExplorationBudget) -> ConvergenceReport:
    """Growth table of |S(x_0, x_n; D)| and d_Y(x_0, x_n) along the ray."""
    if list(depths) != sorted(set(depths)):
        raise ValueError("depths must be strictly increasing")
    rows = []
    for n in depths:
        S = ray_sep_cosets(model, s, n, D, b)
        dy, stable = y_distance(model, s.base, s.point(model, n), D, b)
        dyv = dy.value if dy.finite else None
        qi = None
        if stable and dyv is not None:
            qi = (dyv - 1) / 2 <= len(S) <= 3 * dyv
        rows.append((n, len(S), dyv, stable, qi))
    sizes = [r[1] for r in rows]
    dys = [r[2] for r in rows]
    all_stable = all(r[3] for r in rows)
    if len(rows) >= 2 and all_stable and all(a < c for a, c in zip(sizes, sizes[1:])) \
            and all(a is not None and c is not None and a < c for a, c in zip(dys, dys[1:])):
        verdict = "diverging"
    elif len(rows) >= 2 and len(set(sizes)) == 1:
        verdict = "not diverging at tested depths"
    else:
        verdict = "inconclusive"
    return ConvergenceReport(rows, verdict)


@dataclass
class ConcatPoint:
    k: int
    f_values: list
    window: int


def concat_point(model: GroupModel, x: GroupElement, s: RayScheme, b: ExplorationBudget,
                 max_depth: Optional[int] = None) -> ConcatPoint:
    """Least k where n - d(y_n, x) is constant on [k, k + 2 * period].

    Also checks that every geodesic x -> y_k followed by the ray is geodesic
    over the window.
    """
    p = len(s.period)
    window = 2 * p
    if max_depth is None:
        max_depth = len(s.prefix) + 4 * p + model.x_length(model.mul(model.inv(s.base), x))
    ray_truncation(model, s, max_depth, b)
    verts = s.vertices(model, max_depth)
    f = [n - stable_distance(model, verts[n], x, b) for n in range(max_depth + 1)]
    for k in range(0, max_depth - window + 1):
        if len(set(f[k:k + window + 1])) == 1:
            # geodesic x -> y_k followed by the ray stays geodesic over the window
            dk = stable_distance(model, x, verts[k], b)
            for j in range(1, window + 1):
                if stable_distance(model, x, verts[k + j], b) != dk + j:
                    raise UnstableError("concatenation not geodesic over the window")
            return ConcatPoint(k, f, window)
    raise WindowError(f"no stabilisation of n - d(y_n, x) up to depth {max_depth}")


@dataclass
class PhiPrefix:
    target: str
    labels: tuple
    certified: int


def greedy_lexmin(model: GroupModel, f: GroupElement, g: GroupElement, b: ExplorationBudget) -> tuple:
    """Letter-by-letter minimum over the geodesics f -> g."""
    t = model.mul(model.inv(f), g).word
    search = get_search(model, t, b)
    if t not in search.dist:
        raise PartialityError("target not reached at budget")
    # vertices on some geodesic
    on_geo = {t}
    layer = {t}
    while layer:
        prev = set()
        for v in layer:
            for _, u in search.predecessors(v):
                prev.add(u)
        on_geo |= prev
        layer = prev
    u, d, out = (), 0, []
    while u != t:
        for i, mult in enumerate(search.mults):
            v = mult(u)
            if v in on_geo and search.dist.get(v) == d + 1:
                out.append(search.letters[i])
                u, d = v, d + 1
                break
        else:  # pragma: no cover - a geodesic vertex always has a successor
            raise RuntimeError("greedy construction stalled")
    return tuple(out)


def phi_prefix(model: GroupModel, target, b: ExplorationBudget, D=None, depth: Optional[int] = None) -> PhiPrefix:
    """Lexicographically least geodesic label sequence to the target.

    ``target`` is a group element (distance from the identity) or a
    RayScheme truncated at ``depth``.  For a scheme the certified length is
    the distance to the entrance of the last separating coset of the
    truncation; the prefix up to that entrance is shared by geodesics to all
    deeper points of the ray.
    """
    if isinstance(target, RayScheme):
        if depth is None or D is None:
            raise ValueError("scheme targets need depth and D")
        check_D(D)
        ray_truncation(model, target, depth, b)
        end = target.point(model, depth)
        labels = greedy_lexmin(model, target.base, end, b)
        S = sep_cosets(model, target.base, end, D, b)
        certified = S[-1].distance if S else 0
        return PhiPrefix(format_target(model, target, depth), labels, certified)
    if stable_distance(model, IDENTITY, target, b) is None:  # pragma: no cover
        raise PartialityError("unstable")
    labels = greedy_lexmin(model, IDENTITY, target, b)
    return PhiPrefix(model.format(target), labels, len(labels))


def format_target(model, s: RayScheme, depth: int) -> str:
    return f"{format_scheme(model, s)} depth={depth}"


@dataclass
class Alignment:
    coset: object
    entrance_gap: object
    exit_gap: object


def _common_endpoint(model, s1: RayScheme, s2: RayScheme, depth: int):
    """Depths n1, n2 with equal vertices and equal continuing labels, if any."""
    v1 = s1.vertices(model, depth)
    v2 = s2.vertices(model, depth + len(s2.prefix) + len(s2.period))
    index2 = {v.word: i for i, v in enumerate(v2)}
    p = len(s1.period)
    for n1 in range(depth, -1, -1):
        n2 = index2.get(v1[n1].word)
        if n2 is None:
            continue
        if all(s1.label(n1 + j) == s2.label(n2 + j) for j in range(2 * p)):
            return n1, n2
    return None


def align_same_limit(model: GroupModel, s1: RayScheme, s2: RayScheme, D, depth: int, b: ExplorationBudget,
                     C_hat=None) -> list:
    """Entrance and exit d^ gaps of the cosets shared by two same-limit rays.

    The two schemes must reach a common vertex after which their labels
    agree; the records are compared on truncations ending at that vertex.
    """
    check_D(D)
    if len(s1.period) != len(s2.period):
        raise ValueError("same-limit schemes must share the period length")
    hit = _common_endpoint(model, s1, s2, depth)
    if hit is None:
        raise WindowError("tails do not coincide in the depth window")
    n1, n2 = hit
    # push both to the same far vertex
    p = len(s1.period)
    extra = max(0, depth - n1)
    extra = ((extra + p - 1) // p) * p
    m1, m2 = n1 + extra, n2 + extra
    S1 = ray_sep_cosets(model, s1, m1, D, b)
    S2 = ray_sep_cosets(model, s2, m2, D, b)
    by_coset = {r.coset: r for r in S2}
    out = []
    for r in S1:
        q = by_coset.get(r.coset)
        if q is None:
            continue
        e_in, _ = relative_metric(model, r.coset.lam, r.entrance, q.entrance, b)
        e_out, _ = relative_metric(model, r.coset.lam, r.exit, q.exit, b)
        out.append(Alignment(r.coset, e_in, e_out))
    if not out:
        raise WindowError("no common coset in the depth window")
    if C_hat is not None:
        for a in out:
            for gap in (a.entrance_gap, a.exit_gap):
                if not gap.finite or gap.value > 4 * C_hat:
                    from .separating_cosets import TheoremViolation
                    raise TheoremViolation(f"alignment gap {gap} exceeds 4C = {4 * C_hat}")
    return out


@dataclass
class KReport:
    K: int
    counts: list  # per family
    window: list  # per family: largest |k| (or element count) scanned


def pigeonhole_K(model: GroupModel, t, b: ExplorationBudget, window: Optional[int] = None) -> KReport:
    """(max over families of |{h : d^(1, h) <= t}|)^2, counting h = 1.

    For finite factors every element is examined.  For the cyclic family the
    exponents are scanned until two consecutive exponents on each side
    exceed the threshold (or ``window`` is reached, which is an error).
    """
    counts, windows = [], []
    for lam in range(model.n_families):
        if model.declared_infinite_metric:
            elems = model.h_enumerate(lam, 1)
            c = 1 + sum(1 for e in elems
                        if relative_metric(model, lam, IDENTITY, model.sub_element(lam, e), b)[0].exceeds(t) is False)
            counts.append(c)
            windows.append(len(elems))
            continue
        c = 1
        reach = 0
        for sign in (1, -1):
            over = 0
            k = 0
            while over < 2:
                k += 1
                if window is not None and k > window:
                    raise WindowError(f"threshold {t} not certified within |k| <= {window}")
                h = model.sub_element(lam, sign * k)
                val, stable = relative_metric(model, lam, IDENTITY, h, b)
                if not stable or val.exceeds(t) is None:
                    raise WindowError(f"d^(1, h) for k={sign * k} not certified at {b}")
                if val.exceeds(t):
                    over += 1
                else:
                    over = 0
                    c += 1
            reach = max(reach, k)
        counts.append(c)
        windows.append(reach)
    m = max(counts) if counts else 1
    return KReport(m * m, counts, windows)
