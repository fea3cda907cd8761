"""Tail equivalence of eventually periodic sequences, and a windowed tail
comparison of lex-least geodesic labels for a direction and its translate.

Two sequences are tail equivalent when they agree after dropping finite
(possibly different-length) prefixes.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .group_model import GroupElement, GroupModel, HLetter, XLetter
from .relative_graph import ExplorationBudget, PathRec, components
from .rays import RayScheme, _common_endpoint, phi_prefix
from .separating_cosets import check_D, sep_cosets, translate_coset


def _primitive_root(period: tuple) -> tuple:
    n = len(period)
    for d in range(1, n + 1):
        if n % d == 0 and period[:d] * (n // d) == period:
            return period[:d]
    return period  # pragma: no cover


@dataclass(frozen=True)
class EvPeriodicSeq:
    """pre + period + period + ...  Always stored in canonical form."""
    pre: tuple
    period: tuple

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be nonempty")
        pre, per = tuple(self.pre), _primitive_root(tuple(self.period))
        # absorb trailing preperiod tokens into a rotated period
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = per[-1:] + per[:-1]
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "period", per)

    def __getitem__(self, i: int):
        if i < len(self.pre):
            return self.pre[i]
        return self.period[(i - len(self.pre)) % len(self.period)]

    def prefix(self, n: int) -> tuple:
        return tuple(self[i] for i in range(n))

    def shift(self, k: int) -> "EvPeriodicSeq":
        """The sequence with its first k tokens dropped."""
        if k <= len(self.pre):
            return EvPeriodicSeq(self.pre[k:], self.period)
        r = (k - len(self.pre)) % len(self.period)
        return EvPeriodicSeq((), self.period[r:] + self.period[:r])

    def __str__(self):
        return f"pre=[{','.join(map(str, self.pre))}];per=[{','.join(map(str, self.period))}]"


def parse_seq(text: str) -> EvPeriodicSeq:
    """``pre=[2,3];per=[0,1]`` (tokens are integers, or strings if not numeric)."""
    parts = dict(re.findall(r"(pre|per)\s*=\s*\[([^\]]*)\]", text))
    if "per" not in parts:
        raise ValueError(f"missing per=[...] in {text!r}")

    def toks(s):
        out = []
        for t in s.split(","):
            t = t.strip()
            if t:
                out.append(int(t) if re.fullmatch(r"-?\d+", t) else t)
        return tuple(out)

    return EvPeriodicSeq(toks(parts.get("pre", "")), toks(parts["per"]))


def tail_equivalent(w0: EvPeriodicSeq, w1: EvPeriodicSeq):
    """(equivalent, witness).  The witness (n, m) has w0[n + i] == w1[m + i]
    for all i and is least in (n + m, n).

    On canonical forms the tails are equivalent iff the primitive periods are
    rotations of each other.  A witness, if any, exists with n < |pre0| + p
    and m < |pre1| + p (subtract a period otherwise), so the box scan is
    complete.
    """
    p0, p1 = w0.period, w1.period
    if len(p0) != len(p1) or not any(p0[r:] + p0[:r] == p1 for r in range(len(p0))):
        return False, None
    p = len(p0)
    best = None
    for n in range(len(w0.pre) + p):
        s0 = w0.shift(n)
        for m in range(len(w1.pre) + p):
            if (best is None or (n + m, n) < (best[0] + best[1], best[0])) and s0 == w1.shift(m):
                best = (n, m)
    return True, best


# --- labels as tokens --------------------------------------------------------
def _zigzag(k: int) -> int:
    return 2 * k if k >= 0 else -2 * k - 1


def _pair(a: int, b: int) -> int:
    return (a + b) * (a + b + 1) // 2 + b


def letter_token(letter) -> int:
    """An injection of the letters into the naturals (X letters even, subgroup letters odd)."""
    if isinstance(letter, XLetter):
        return 2 * (2 * letter.gen + (0 if letter.sign > 0 else 1))
    if isinstance(letter, HLetter):
        return 2 * _pair(letter.lam, _zigzag(letter.elem)) + 1
    raise TypeError(f"not a letter: {letter!r}")


@dataclass
class TailVerdict:
    verdict: str  # "tail-agree (window)", "tail-disagree (window)" or "inconclusive"
    witness: Optional[tuple]
    same_direction: bool
    compared: int
    reason: str = ""


def _entrance_index(model, p: PathRec, coset) -> Optional[int]:
    for c in components(model, p):
        if c.coset == coset:
            return c.start
    return None


def phi_pair_tailcheck(model: GroupModel, s1: RayScheme, s2: RayScheme, g: GroupElement, D,
                       b: ExplorationBudget, depth: int) -> TailVerdict:
    """Compare the certified lex-least prefixes for s1 and s2 (a proxy for g.s1).

    The two label sequences are aligned at the first separating coset of s1
    whose g-translate is separating for s2, and compared over the certified
    part.  Fewer than two periods of certified overlap gives "inconclusive".
    """
    check_D(D)
    same = _common_endpoint(model, s1.translate(model, g), s2, depth) is not None
    f1 = phi_prefix(model, s1, b, D=D, depth=depth)
    f2 = phi_prefix(model, s2, b, D=D, depth=depth)
    need = 2 * max(len(s1.period), len(s2.period))
    path1 = PathRec(s1.base, f1.labels, True, b)
    path2 = PathRec(s2.base, f2.labels, True, b)
    S1 = sep_cosets(model, s1.base, s1.point(model, depth), D, b)
    S2 = {r.coset for r in sep_cosets(model, s2.base, s2.point(model, depth), D, b)}
    for r in S1:
        c2 = translate_coset(model, g, r.coset)
        if c2 not in S2:
            continue
        m1 = _entrance_index(model, path1, r.coset)
        m2 = _entrance_index(model, path2, c2)
        if m1 is None or m2 is None:
            continue
        overlap = min(f1.certified - m1, f2.certified - m2)
        if overlap < need:
            return TailVerdict("inconclusive", None, same, max(overlap, 0),
                               f"certified overlap {overlap} below {need}")
        a, c = f1.labels[m1:m1 + overlap], f2.labels[m2:m2 + overlap]
        if a == c:
            return TailVerdict("tail-agree (window)", (m1, m2), same, overlap)
        return TailVerdict("tail-disagree (window)", None, same, overlap, "aligned labels differ")
    if min(f1.certified, f2.certified) < need:
        return TailVerdict("inconclusive", None, same, 0, "certified prefixes too short")
    return TailVerdict("tail-disagree (window)", None, same, 0, "no common separating coset in the window")


def seq_from_labels(pre: Sequence, period: Sequence) -> EvPeriodicSeq:
    return EvPeriodicSeq(tuple(letter_token(s) for s in pre), tuple(letter_token(s) for s in period))


def tail_equivalent_bounded(w0: EvPeriodicSeq, w1: EvPeriodicSeq):
    """Second route to :func:`tail_equivalent` by direct window comparison.

    Shifts are scanned in a box large enough to contain the least witness and
    the shifted sequences are compared over max(pre) + |p0| + |p1| tokens,
    which suffices by the periodicity lemma.
    """
    p0, p1 = len(w0.period), len(w1.period)
    span = p0 * p1
    window = max(len(w0.pre), len(w1.pre)) + p0 + p1
    shifts = [(n, m) for n in range(len(w0.pre) + span + 1) for m in range(len(w1.pre) + span + 1)]
    for n, m in sorted(shifts, key=lambda x: (x[0] + x[1], x[0])):
        if all(w0[n + i] == w1[m + i] for i in range(window)):
            return True, (n, m)
    return False, None
