"""Pairs of ray directions: bi-infinite windows, the penetration dichotomy,
splicing of geodesics through a shared coset, and the F4 decomposition.

A bi-infinite geodesic between two directions only exists here as a window:
the reversed truncation of one scheme joined to the truncation of another.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .group_model import CosetRef, GroupElement, GroupModel, HLetter
from .relative_graph import (
    ExplorationBudget,
    PathRec,
    components,
    gap,
    penetrated_by_all,
    stable_distance,
)
from .rays import RayScheme, WindowError, greedy_lexmin, ray_truncation
from .separating_cosets import TheoremViolation, check_D, coset_list, sep_cosets, split_ordered


@dataclass
class BiInfiniteWindow:
    xi: RayScheme
    eta: RayScheme
    n: int
    path: PathRec
    records: list

    @property
    def cosets(self) -> list:
        return coset_list(self.records)


def _same(a: RayScheme, b: RayScheme) -> bool:
    return a.base == b.base and a.prefix == b.prefix and a.period == b.period


def central_window(model: GroupModel, xi: RayScheme, eta: RayScheme, n: int, D,
                   b: ExplorationBudget, reposition: bool = False) -> BiInfiniteWindow:
    """Geodesic x_-n -> x_n running back along ``xi`` and out along ``eta``.

    The bases are joined by the lex-least geodesic between them.  When the
    joined path is not geodesic the window is refused, unless ``reposition``
    is set; then the lex-least geodesic between the two far ends is used.
    The records are S(x_-n, x_n; D) either way.
    """
    check_D(D)
    if n < 0:
        raise ValueError("window radius must be non-negative")
    start = xi.point(model, n)
    if _same(xi, eta) or (n == 0 and xi.base == eta.base):
        # the window between a direction and itself is empty by convention
        return BiInfiniteWindow(xi, eta, n, PathRec(start, (), n == 0, b), [])
    ray_truncation(model, xi, n, b)
    ray_truncation(model, eta, n, b)
    back = tuple(model.letter_inverse(s) for s in reversed(xi.labels(n)))
    bridge = greedy_lexmin(model, xi.base, eta.base, b) if xi.base != eta.base else ()
    labels = back + tuple(bridge) + eta.labels(n)
    end = eta.point(model, n)
    if stable_distance(model, start, end, b) != len(labels):
        if not reposition:
            raise WindowError(f"join of the two rays is not geodesic at window {n}")
        labels = greedy_lexmin(model, start, end, b)
    path = PathRec(start, tuple(labels), True, b)
    return BiInfiniteWindow(xi, eta, n, path, sep_cosets(model, start, end, D, b))


def window_cosets(model, xi, eta, n, D, b) -> list:
    return central_window(model, xi, eta, n, D, b, reposition=True).cosets


def dichotomy_check(model: GroupModel, xi: RayScheme, eta: RayScheme, zeta: RayScheme, coset: CosetRef,
                    n: int, D, b: ExplorationBudget, C_hat=None) -> str:
    """Side ('xi-zeta' or 'zeta-eta') all of whose window geodesics penetrate ``coset``."""
    check_D(D)
    if C_hat is not None and D < 6 * C_hat:
        raise ValueError(f"D={D} below 6*C={6 * C_hat}")
    if coset not in window_cosets(model, xi, eta, n, D, b):
        raise ValueError("coset is not separating in the (xi, eta) window")
    for name, (u, v) in (("xi-zeta", (xi, zeta)), ("zeta-eta", (zeta, eta))):
        if _same(u, v):
            continue
        w = central_window(model, u, v, n, D, b, reposition=True)
        if penetrated_by_all(model, w.path.base, w.path.end(model), coset, b):
            return name
    raise TheoremViolation(
        f"neither side penetrates {model.format(coset.rep)}H_{coset.lam} at window {n}, D={D}, budget={b}")


def _component_in(model, p: PathRec, coset: CosetRef):
    for c in components(model, p):
        if c.coset == coset:
            return c
    raise ValueError(f"path does not penetrate {model.format(coset.rep)}H_{coset.lam}")


def splice(model: GroupModel, beta: PathRec, alpha: PathRec, coset: CosetRef, b: ExplorationBudget,
           C_hat=None) -> PathRec:
    """beta up to its entrance of the coset, one subgroup edge, then alpha from its exit."""
    cb = _component_in(model, beta, coset)
    ca = _component_in(model, alpha, coset)
    if C_hat is not None:
        g = gap(model, cb, b)
        if g.exceeds(3 * C_hat) is not True:
            raise ValueError(f"gap {g} of the coset on beta is not above 3C = {3 * C_hat}")
    h = model.mul(model.inv(cb.entrance), ca.exit)
    mid = ()
    if h.word:
        k = model.subgroup_membership(h, coset.lam)
        mid = (HLetter(coset.lam, k),)
    labels = beta.labels[:cb.start] + mid + alpha.labels[ca.stop:]
    out = PathRec(beta.base, labels, False, b)
    end = out.end(model)
    if stable_distance(model, beta.base, end, b) != len(labels):
        raise TheoremViolation(
            f"spliced path {model.format(beta.base)} -> {model.format(end)} is not geodesic at {b}")
    return PathRec(beta.base, labels, True, b)


@dataclass
class F4Split:
    S: list
    left: list
    right: list
    F: list


def f4_split(model: GroupModel, xi: RayScheme, eta: RayScheme, zeta: RayScheme, n: int, D,
             b: ExplorationBudget, C_hat=None) -> F4Split:
    """Window partition of S(xi, eta; D) into S' | F | S'' with |F| <= 4."""
    check_D(D)
    if C_hat is not None and D < 11 * C_hat:
        raise ValueError(f"D={D} below 11*C={11 * C_hat}")
    S = window_cosets(model, xi, eta, n, D, b)
    left = set(window_cosets(model, xi, zeta, n, D, b))
    right = set(window_cosets(model, zeta, eta, n, D, b))
    s1, s2, F = split_ordered(S, left.__contains__, right.__contains__)
    if len(F) > 4:
        raise TheoremViolation(f"|F|={len(F)} at window {n}, D={D}, budget={b}")
    return F4Split(S, s1, s2, F)
