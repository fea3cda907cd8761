"""Words, normal forms and the two built-in group models.

Elements are stored as tuples of *atoms*.  An atom is either a free
generator ``(-(gen + 1), sign)`` or a nontrivial element of a finite factor
``(lam, index)``.  A normal form never contains a cancelling pair of free
atoms nor two adjacent atoms from the same finite factor, so equal group
elements have equal tuples and the tuple can be hashed directly.

Two models are provided:

* ``FreeCyclic``: a free group of rank ``r`` with the single cyclic subgroup
  generated by a cyclically reduced, non-power relator word ``W``.
* ``FreeProduct``: a free product of finite groups (given by multiplication
  tables) and a free group of rank ``r``; the finite factors form the family.
"""
from __future__ import annotations

import csv
import os
import re
import string
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence


class ModelError(ValueError):
    """Raised for malformed letters, words or model descriptions."""


@dataclass(frozen=True)
class XLetter:
    gen: int
    sign: int

    def inverse(self) -> "XLetter":
        return XLetter(self.gen, -self.sign)


@dataclass(frozen=True)
class HLetter:
    lam: int
    elem: int  # table index for a finite factor, exponent k for <W>

    def inverse(self, model: "GroupModel") -> "HLetter":
        return HLetter(self.lam, model.sub_inverse(self.lam, self.elem))


Letter = "XLetter | HLetter"


@dataclass(frozen=True)
class GroupElement:
    word: tuple = ()

    def __len__(self):
        return len(self.word)

    @property
    def is_identity(self) -> bool:
        return not self.word


IDENTITY = GroupElement(())


@dataclass(frozen=True)
class CosetRef:
    lam: int
    rep: GroupElement


def _free_atom(gen: int, sign: int) -> tuple:
    return (-(gen + 1), sign)


def _atom_key(atom) -> tuple:
    # X atoms first, ordered by (id, + before -); factor atoms after them.
    a, b = atom
    if a < 0:
        return (0, -a - 1, 0 if b > 0 else 1)
    return (1, a, b)


def shortlex_key(word: Sequence) -> tuple:
    return (len(word), tuple(_atom_key(t) for t in word))


def cyclic_table(n: int) -> list:
    return [[(i + j) % n for j in range(n)] for i in range(n)]


def check_table(table) -> None:
    """Validate that ``table`` is a group table with identity at index 0."""
    n = len(table)
    if n < 2 or any(len(row) != n for row in table):
        raise ModelError("multiplication table must be square with at least 2 rows")
    rng = range(n)
    for i in rng:
        for j in rng:
            v = table[i][j]
            if not isinstance(v, int) or not 0 <= v < n:
                raise ModelError(f"table entry ({i},{j}) out of range")
    for i in rng:
        if table[0][i] != i or table[i][0] != i:
            raise ModelError("index 0 must be the identity")
        if 0 not in table[i]:
            raise ModelError(f"element {i} has no inverse")
    for i in rng:
        for j in rng:
            for k in rng:
                if table[table[i][j]][k] != table[i][table[j][k]]:
                    raise ModelError(f"table not associative at ({i},{j},{k})")


class GroupModel:
    """Common algebra for both models; subclasses fill in the family."""

    kind = "abstract"
    declared_infinite_metric = False

    def __init__(self, free_rank: int, tables: Sequence, names: Sequence[str]):
        self.free_rank = free_rank
        self.tables = [list(map(list, t)) for t in tables]
        self._inv = []
        for t in self.tables:
            n = len(t)
            self._inv.append([next(j for j in range(n) if t[i][j] == 0) for i in range(n)])
        self.names = list(names)

    # --- basic algebra -------------------------------------------------
    def reduce(self, atoms: Iterable, stack: Optional[list] = None) -> tuple:
        out = [] if stack is None else stack
        tables = self.tables
        for a, b in atoms:
            if out:
                ta, tb = out[-1]
                if ta == a:
                    if a < 0:
                        if tb == -b:
                            out.pop()
                            continue
                    else:
                        r = tables[a][tb][b]
                        out.pop()
                        if r:
                            out.append((a, r))
                        continue
            out.append((a, b))
        return tuple(out)

    def atoms_of(self, letter) -> tuple:
        if isinstance(letter, XLetter):
            if not 0 <= letter.gen < self.free_rank or letter.sign not in (1, -1):
                raise ModelError(f"bad X letter {letter}")
            return (_free_atom(letter.gen, letter.sign),)
        if isinstance(letter, HLetter):
            self._check_sub(letter.lam, letter.elem)
            return self.sub_expansion(letter.lam, letter.elem)
        raise ModelError(f"not a letter: {letter!r}")

    def normalize(self, letters: Iterable) -> GroupElement:
        out: list = []
        for s in letters:
            self.reduce(self.atoms_of(s), out)
        return GroupElement(tuple(out))

    def mul(self, g: GroupElement, h: GroupElement) -> GroupElement:
        if not h.word:
            return g
        return GroupElement(self.reduce(h.word, list(g.word)))

    def multiplier(self, atoms: tuple):
        """Return a fast function u -> normal form of u * atoms (atoms reduced)."""
        if all(t[0] < 0 for t in atoms):
            m = len(atoms)
            inv = tuple((t[0], -t[1]) for t in atoms)
            first_inv = inv[0]

            def free_mul(u):
                if not u or u[-1] != first_inv:
                    return u + atoms
                n = len(u)
                k = 1
                while k < m and k < n and u[n - 1 - k] == inv[k]:
                    k += 1
                return u[: n - k] + atoms[k:]
            return free_mul
        if len(atoms) == 1:
            lam, e = atoms[0]
            row = [r[e] for r in self.tables[lam]]

            def factor_mul(u):
                if u and u[-1][0] == lam:
                    r = row[u[-1][1]]
                    return u[:-1] + ((lam, r),) if r else u[:-1]
                return u + atoms
            return factor_mul
        return lambda u: self.reduce(atoms, list(u))

    def right_mul(self, u: tuple, atoms: tuple) -> tuple:
        return self.reduce(atoms, list(u))

    def mul_atoms(self, g: GroupElement, atoms: tuple) -> GroupElement:
        return GroupElement(self.reduce(atoms, list(g.word)))

    def inv_atom(self, atom) -> tuple:
        a, b = atom
        if a < 0:
            return (a, -b)
        return (a, self._inv[a][b])

    def inv(self, g: GroupElement) -> GroupElement:
        return GroupElement(tuple(self.inv_atom(t) for t in reversed(g.word)))

    def x_length(self, g: GroupElement) -> int:
        return len(g.word)

    def shortlex_key(self, g: GroupElement) -> tuple:
        return shortlex_key(g.word)

    def letter_inverse(self, letter):
        if isinstance(letter, XLetter):
            return letter.inverse()
        return letter.inverse(self)

    def letter_key(self, letter) -> tuple:
        """Total order on the alphabet: X letters, then H letters by (lam, shortlex)."""
        if isinstance(letter, XLetter):
            return (0, letter.gen, 0 if letter.sign > 0 else 1)
        return (1, letter.lam, shortlex_key(self.sub_expansion(letter.lam, letter.elem)))

    def x_letters(self) -> list:
        return [XLetter(g, s) for g in range(self.free_rank) for s in (1, -1)]

    # --- family interface (overridden) -------------------------------
    @property
    def n_families(self) -> int:
        raise NotImplementedError

    def _check_sub(self, lam: int, elem: int) -> None:
        raise NotImplementedError

    def sub_expansion(self, lam: int, elem: int) -> tuple:
        raise NotImplementedError

    def sub_inverse(self, lam: int, elem: int) -> int:
        raise NotImplementedError

    def subgroup_membership(self, g: GroupElement, lam: int) -> Optional[int]:
        raise NotImplementedError

    def coset_canonical(self, g: GroupElement, lam: int) -> CosetRef:
        raise NotImplementedError

    def h_enumerate(self, lam: int, x_budget: int) -> list:
        raise NotImplementedError

    def sub_element(self, lam: int, elem: int) -> GroupElement:
        return GroupElement(self.sub_expansion(lam, elem)) if elem else IDENTITY

    def describe(self) -> str:
        raise NotImplementedError

    # --- text ----------------------------------------------------------
    def format(self, g: GroupElement) -> str:
        return format_atoms(self, g.word)

    def parse(self, text: str) -> GroupElement:
        return GroupElement(self.reduce(parse_atoms(self, text)))

    def format_letter(self, letter) -> str:
        if isinstance(letter, XLetter):
            return "x:" + format_atoms(self, (_free_atom(letter.gen, letter.sign),))
        return "h:" + self.format_sub(letter.lam, letter.elem)

    def format_sub(self, lam: int, elem: int) -> str:
        return format_atoms(self, self.sub_expansion(lam, elem))

    def parse_letter(self, text: str):
        text = text.strip()
        kind, _, body = text.partition(":")
        if not body:
            raise ModelError(f"letter must look like x:<gen> or h:<element>: {text!r}")
        kind = kind.strip().lower()
        if kind == "x":
            atoms = parse_atoms(self, body)
            if len(atoms) != 1 or atoms[0][0] >= 0:
                raise ModelError(f"not a single X letter: {text!r}")
            a, s = atoms[0]
            return XLetter(-a - 1, s)
        if kind == "h":
            return self._parse_h(body)
        raise ModelError(f"unknown letter kind {kind!r}")

    def _parse_h(self, body: str):
        # "ab^3" for the cyclic family means W^3; otherwise parse as a word.
        m = re.fullmatch(r"\s*(.+?)\s*\^\s*(-?\d+)\s*", body)
        if m:
            base = GroupElement(self.reduce(parse_atoms(self, m.group(1))))
            for lam in range(self.n_families):
                e = self.subgroup_membership(base, lam)
                if e:
                    k = int(m.group(2))
                    g = IDENTITY
                    step = base if k > 0 else self.inv(base)
                    for _ in range(abs(k)):
                        g = self.mul(g, step)
                    return self._h_from_element(g, body)
        return self._h_from_element(self.parse(body), body)

    def _h_from_element(self, g: GroupElement, text: str):
        for lam in range(self.n_families):
            e = self.subgroup_membership(g, lam)
            if e:
                return HLetter(lam, e)
        raise ModelError(f"{text!r} is not a nontrivial subgroup element")


class FreeCyclic(GroupModel):
    """Free group of rank ``rank`` with the family {<W>}."""

    kind = "free_cyclic"
    declared_infinite_metric = False

    def __init__(self, rank: int = 2, relator: str = "ab"):
        if not 1 <= rank <= 26:
            raise ModelError("rank must be between 1 and 26")
        super().__init__(rank, [], string.ascii_lowercase[:rank])
        w = self.reduce(parse_atoms(self, relator))
        if not w:
            raise ModelError("relator must be nontrivial")
        if self.inv_atom(w[0]) == w[-1] and len(w) > 1:
            raise ModelError("relator must be cyclically reduced")
        n = len(w)
        for p in range(1, n):
            if n % p == 0 and w[:p] * (n // p) == w:
                raise ModelError("relator must not be a proper power")
        self.W = w
        self.W_inv = tuple(self.inv_atom(t) for t in reversed(w))
        self.relator_text = relator

    @property
    def n_families(self) -> int:
        return 1

    def _check_sub(self, lam, elem):
        if lam != 0 or not isinstance(elem, int) or elem == 0:
            raise ModelError(f"bad H letter ({lam}, {elem})")

    def sub_expansion(self, lam, elem):
        # W is cyclically reduced, so W^k needs no reduction.
        return (self.W if elem > 0 else self.W_inv) * abs(elem)

    def sub_inverse(self, lam, elem):
        return -elem

    def subgroup_membership(self, g, lam):
        if lam != 0:
            raise ModelError(f"no family {lam}")
        n, w = len(self.W), g.word
        if not w:
            return 0
        if len(w) % n:
            return None
        k = len(w) // n
        if w == self.W * k:
            return k
        if w == self.W_inv * k:
            return -k
        return None

    def coset_canonical(self, g, lam):
        if lam != 0:
            raise ModelError(f"no family {lam}")
        bound = 2 * len(g.word) // len(self.W) + 2
        best = g.word
        for k in range(-bound, bound + 1):
            if k:
                cand = self.reduce(self.sub_expansion(0, k), list(g.word))
                if shortlex_key(cand) < shortlex_key(best):
                    best = cand
        return CosetRef(0, GroupElement(best))

    def h_enumerate(self, lam, x_budget):
        if lam != 0:
            raise ModelError(f"no family {lam}")
        kmax = x_budget // len(self.W)
        ks = [k for k in range(-kmax, kmax + 1) if k]
        return sorted(ks, key=lambda k: shortlex_key(self.sub_expansion(0, k)))

    def format_sub(self, lam, elem):
        rel = format_atoms(self, self.W)
        if len(self.W) == 1:
            return f"{rel}^{elem}" if elem != 1 else rel
        return f"({rel})^{elem}" if elem != 1 else f"({rel})"

    def describe(self):
        return f"free_cyclic rank={self.free_rank} relator={self.relator_text}"


class FreeProduct(GroupModel):
    """Free product of finite factors (the family) and a free group."""

    kind = "free_product"
    declared_infinite_metric = True

    def __init__(self, tables: Sequence, free_rank: int = 0, labels: Optional[Sequence[str]] = None):
        for t in tables:
            check_table(t)
        if not tables:
            raise ModelError("free product needs at least one finite factor")
        names = string.ascii_lowercase[: len(tables) + free_rank]
        if len(names) < len(tables) + free_rank:
            raise ModelError("too many generators")
        super().__init__(free_rank, tables, names[len(tables):])
        self.factor_names = list(names[: len(tables)])
        self.labels = list(labels) if labels else [f"T{len(t)}" for t in tables]
        self.cyclic = [t == cyclic_table(len(t)) for t in self.tables]

    @property
    def n_families(self) -> int:
        return len(self.tables)

    def _check_sub(self, lam, elem):
        if not 0 <= lam < len(self.tables) or not isinstance(elem, int) or not 0 < elem < len(self.tables[lam]):
            raise ModelError(f"bad H letter ({lam}, {elem})")

    def sub_expansion(self, lam, elem):
        return ((lam, elem),)

    def sub_inverse(self, lam, elem):
        return self._inv[lam][elem]

    def subgroup_membership(self, g, lam):
        if not 0 <= lam < len(self.tables):
            raise ModelError(f"no family {lam}")
        w = g.word
        if not w:
            return 0
        if len(w) == 1 and w[0][0] == lam:
            return w[0][1]
        return None

    def coset_canonical(self, g, lam):
        w = g.word
        if w and w[-1][0] == lam:
            w = w[:-1]
        return CosetRef(lam, GroupElement(w))

    def h_enumerate(self, lam, x_budget):
        if not 0 <= lam < len(self.tables):
            raise ModelError(f"no family {lam}")
        if x_budget < 1:
            return []
        return list(range(1, len(self.tables[lam])))

    def describe(self):
        return f"free_product factors={','.join(self.labels)} free_rank={self.free_rank}"


# --- word text ---------------------------------------------------------
def _gen_names(model: GroupModel) -> dict:
    names = {}
    for i, ch in enumerate(model.names):
        names[ch] = ("x", i)
    for lam, ch in enumerate(getattr(model, "factor_names", [])):
        names[ch] = ("f", lam)
    return names


def _power_atoms(model: GroupModel, kind: str, idx: int, k: int) -> list:
    if kind == "x":
        return [_free_atom(idx, 1 if k > 0 else -1)] * abs(k)
    n = len(model.tables[idx])
    if not model.cyclic[idx]:
        raise ModelError("powers of a table factor need explicit indices like c[3]")
    e = k % n
    return [(idx, e)] if e else []


_TOKEN = re.compile(r"\s*(?:(?P<open>\()|(?P<close>\))(?:\^(?P<cexp>-?\d+))?|(?P<one>1)(?![\d\[])|"
                    r"(?P<name>[a-z])(?:\[(?P<idx>\d+)\])?(?:\^(?P<exp>-?\d+))?)")


def parse_atoms(model: GroupModel, text: str) -> list:
    """Parse words such as ``a(ab)^2``, ``b^-1a``, ``a^2b^4`` or ``c[3]``."""
    names = _gen_names(model)
    text = text.replace("·", "").replace("*", "").replace("⁻¹", "^-1").strip()
    stack: list = [[]]
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ModelError(f"cannot parse word {text!r} at {pos}")
        pos = m.end()
        if m.group("open"):
            stack.append([])
        elif m.group("close") is not None and m.group("close"):
            if len(stack) == 1:
                raise ModelError(f"unbalanced parenthesis in {text!r}")
            inner = stack.pop()
            k = int(m.group("cexp") or 1)
            block = inner if k > 0 else [model.inv_atom(t) for t in reversed(inner)]
            stack[-1].extend(block * abs(k))
        elif m.group("one"):
            continue
        else:
            ch = m.group("name")
            if ch not in names:
                raise ModelError(f"unknown generator {ch!r}")
            kind, idx = names[ch]
            k = int(m.group("exp") or 1)
            if m.group("idx") is not None:
                if kind != "f":
                    raise ModelError("indices only apply to finite factors")
                e = int(m.group("idx"))
                if not 0 <= e < len(model.tables[idx]):
                    raise ModelError(f"index {e} out of range")
                atoms = [(idx, e)] if e else []
                if k < 0:
                    atoms = [model.inv_atom(t) for t in atoms]
                stack[-1].extend(atoms * abs(k))
            else:
                stack[-1].extend(_power_atoms(model, kind, idx, k))
    if len(stack) != 1:
        raise ModelError(f"unbalanced parenthesis in {text!r}")
    return stack[0]


def format_atoms(model: GroupModel, word: Sequence) -> str:
    if not word:
        return "1"
    out = []
    i = 0
    while i < len(word):
        a, b = word[i]
        if a < 0:
            j = i
            while j < len(word) and word[j] == word[i]:
                j += 1
            name = model.names[-a - 1]
            k = (j - i) * b
            out.append(name if k == 1 else f"{name}^{k}")
            i = j
            continue
        name = model.factor_names[a]
        if model.cyclic[a]:
            out.append(name if b == 1 else f"{name}^{b}")
        else:
            out.append(f"{name}[{b}]")
        i += 1
    return "".join(out)


# --- model files -------------------------------------------------------
def load_model_text(text: str, base_dir: str = ".") -> GroupModel:
    """Load ``[model] kind=... key=value`` text.

    ``factors`` accepts ``Zn`` for cyclic factors and ``table:path.csv`` for a
    CSV multiplication table (row/column 0 is the identity).
    """
    fields = {}
    seen = False
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[model]"):
            seen = True
            line = line[len("[model]"):]
        elif line.startswith("["):
            raise ModelError(f"unknown section {line!r}")
        for tok in line.split():
            key, eq, val = tok.partition("=")
            if not eq:
                raise ModelError(f"expected key=value, got {tok!r}")
            fields[key.strip()] = val.strip()
    if not seen:
        raise ModelError("missing [model] section")
    kind = fields.get("kind")
    try:
        if kind == "free_cyclic":
            return FreeCyclic(int(fields.get("rank", 2)), fields.get("relator", "ab"))
        if kind == "free_product":
            tables, labels = [], []
            for spec in fields.get("factors", "").split(","):
                spec = spec.strip()
                if re.fullmatch(r"Z\d+", spec):
                    tables.append(cyclic_table(int(spec[1:])))
                elif spec.startswith("table:"):
                    path = os.path.join(base_dir, spec[len("table:"):])
                    with open(path, newline="") as fh:
                        tables.append([[int(c) for c in row] for row in csv.reader(fh) if row])
                else:
                    raise ModelError(f"bad factor {spec!r}")
                labels.append(spec)
            return FreeProduct(tables, int(fields.get("free_rank", 0)), labels)
    except (OSError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(str(exc)) from exc
    raise ModelError(f"unknown model kind {kind!r}")


def load_model(path: str) -> GroupModel:
    with open(path) as fh:
        return load_model_text(fh.read(), os.path.dirname(os.path.abspath(path)))


def builtin(name: str) -> GroupModel:
    if name in ("free_cyclic", "fc"):
        return FreeCyclic(2, "ab")
    if name in ("free_product", "fp"):
        return FreeProduct([cyclic_table(3), cyclic_table(5)], 0, ["Z3", "Z5"])
    raise ModelError(f"unknown built-in model {name!r}")
