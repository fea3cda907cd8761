"""Separating cosets S(f, g; D) with their linear order and entrance/exit data."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .group_model import CosetRef, GroupElement, GroupModel
from .relative_graph import (
    ExplorationBudget,
    ExtNat,
    PartialityError,
    PathRec,
    components,
    gap,
    geodesic_components,
    rel_distance,
)


class TheoremViolation(RuntimeError):
    """A finite check contradicted a proven statement."""


@dataclass(frozen=True)
class SepCosetRecord:
    coset: CosetRef
    entrance: GroupElement
    exit: GroupElement
    gap: ExtNat
    index: int = 0
    distance: int = 0  # d(f, entrance) on the first witnessing geodesic
    witnesses: tuple = field(default=(), compare=False)  # (entrance, exit) per geodesic


def check_D(D) -> None:
    if not D > 0:
        raise ValueError(f"D must be positive, got {D}")


def essential_penetrations(model: GroupModel, p: PathRec, D, b: ExplorationBudget) -> list:
    """Components of ``p`` whose relative-metric gap exceeds ``D``, in order."""
    check_D(D)
    out = []
    for c in components(model, p):
        g = gap(model, c, b)
        verdict = g.exceeds(D)
        if verdict is None:
            raise PartialityError(
                f"gap of {model.format(c.entrance)} -> {model.format(c.exit)} not certified against D={D}")
        if verdict:
            out.append(SepCosetRecord(c.coset, c.entrance, c.exit, g, len(out), c.start))
    return out


_CACHE: dict = {}


def sep_cosets(model: GroupModel, f: GroupElement, g: GroupElement, D, b: ExplorationBudget) -> list:
    """Ordered (f, g; D)-separating cosets.

    Union over all geodesics f -> g of the essentially penetrated cosets,
    sorted by distance from ``f``.  Components are read from the geodesic
    DAG, so no geodesic is missed.  Refuses (PartialityError) rather than
    under-report when distances or gaps are not certified.
    """
    check_D(D)
    key = (id(model), f, g, D, b)
    hit = _CACHE.get(key)
    if hit is not None and hit[0] is model:
        return hit[1]
    d, stable = rel_distance(model, f, g, b)
    if not stable or not d.finite:
        raise PartialityError(f"distance {model.format(f)} -> {model.format(g)} not stable at {b}")
    found: dict = {}
    for c in geodesic_components(model, f, g, b):
        value = gap(model, c, b)
        verdict = value.exceeds(D)
        if verdict is None:
            raise PartialityError(
                f"gap of {model.format(c.entrance)} -> {model.format(c.exit)} not certified against D={D}")
        if not verdict:
            continue
        r = SepCosetRecord(c.coset, c.entrance, c.exit, value, 0, c.start)
        if c.coset not in found:
            found[c.coset] = [r, []]
        found[c.coset][1].append((c.entrance, c.exit))
    ordered = sorted(found.values(), key=lambda v: (v[0].distance, model.shortlex_key(v[0].coset.rep), v[0].coset.lam))
    out = []
    for i, (r, wit) in enumerate(ordered):
        out.append(SepCosetRecord(r.coset, r.entrance, r.exit, r.gap, i, r.distance, tuple(wit)))
    _CACHE[key] = (model, out)
    return out


def coset_set(records) -> set:
    return {r.coset for r in records}


def coset_list(records) -> list:
    return [r.coset for r in records]


def translate_coset(model: GroupModel, h: GroupElement, c: CosetRef) -> CosetRef:
    return model.coset_canonical(model.mul(h, c.rep), c.lam)


@dataclass
class TripleSplit:
    S: list
    left: list  # S'
    right: list  # S''
    F: list


def split_ordered(S: list, left_ok, right_ok) -> tuple:
    """Greedy split of an ordered coset list.

    The longest prefix contained in the left set and the longest suffix
    contained in the right set are kept; what lies strictly between them is
    the leftover window F.  When prefix and suffix overlap the split point is
    placed at the end of the prefix.
    """
    n = len(S)
    a = 0
    while a < n and left_ok(S[a]):
        a += 1
    c = n
    while c > 0 and right_ok(S[c - 1]):
        c -= 1
    if c <= a:
        return S[:a], S[a:], []
    return S[:a], S[c:], S[a:c]


def triple_split(model: GroupModel, f, g, z, D, b: ExplorationBudget, C_hat=None) -> TripleSplit:
    """Partition S(f, g; D) into S' in S(f, z; D), S'' in S(z, g; D) and F with |F| <= 4."""
    check_D(D)
    if C_hat is not None and D < 11 * C_hat:
        raise ValueError(f"D={D} below 11*C={11 * C_hat}")
    S = coset_list(sep_cosets(model, f, g, D, b))
    left = coset_set(sep_cosets(model, f, z, D, b))
    right = coset_set(sep_cosets(model, z, g, D, b))
    s1, s2, F = split_ordered(S, left.__contains__, right.__contains__)
    if len(F) > 4:
        raise TheoremViolation(
            f"|F|={len(F)} for f={model.format(f)} g={model.format(g)} z={model.format(z)} D={D} budget={b}")
    return TripleSplit(S, s1, s2, F)


def clear_cache():
    _CACHE.clear()
