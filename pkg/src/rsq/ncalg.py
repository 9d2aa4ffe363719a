"""Exact double brackets on the path algebra of the doubled tadpole / cyclic quiver.

Letters are pairs (kind, i):

    x_i: i -> i+1     y_i, z_i, X_i = x_i^{-1}: i+1 -> i     v: 0 -> inf     w: inf -> 0

(indices mod m; the tadpole is m = 1 with x a loop). A word is (tail, letters);
the empty word at vertex i is the idempotent e_i. Composition is left to right:
ab is a followed by b and vanishes unless head(a) = tail(b). The vertex inf is
encoded as -1.

Two alphabets are supported. With star 'y' the generators are x, y (and the
inverses X); with star 'z' the partner of x is z = y + x^{-1}, whose generator
table differs only by the missing e (x) e term in the (x, z) bracket.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

__all__ = [
    "INF",
    "QuiverSig",
    "tadpole",
    "cyclic",
    "NCElement",
    "TensorElement",
    "word_mul",
    "dbl_gen",
    "dbl",
    "loday",
    "necklace_reduce",
    "check_identity",
    "IdentityResult",
    "substitute",
    "E_r",
    "a3_decomposition",
    "SuiteResult",
    "CheckResult",
    "SUITES",
    "run_suite",
]

INF = -1
HALF = Fraction(1, 2)

Letter = tuple[str, int]
Word = tuple[int, tuple[Letter, ...]]


@dataclass(frozen=True)
class QuiverSig:
    """Quiver signature: cycle length m, tadpole flag, partner letter and localization."""

    m: int
    is_tadpole: bool = False
    star: str = "y"
    localized: bool = True

    def __post_init__(self) -> None:
        if self.m < 1 or (self.is_tadpole and self.m != 1) or (not self.is_tadpole and self.m < 2):
            raise ValueError("tadpole needs m = 1, cyclic quivers need m >= 2")
        if self.star not in ("y", "z"):
            raise ValueError("star must be 'y' or 'z'")

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(range(self.m))

    def tail(self, l: Letter) -> int:
        k, i = l
        if k == "x":
            return i
        if k in ("y", "z", "X"):
            return (i + 1) % self.m
        return 0 if k == "v" else INF

    def head(self, l: Letter) -> int:
        k, i = l
        if k == "x":
            return (i + 1) % self.m
        if k in ("y", "z", "X"):
            return i
        return INF if k == "v" else 0

    def vertex_order(self, c: int) -> list[Letter]:
        """Arrows incident to c, in the fixed order used by the bracket."""
        s = self.star
        if c == INF:
            return [("v", 0), ("w", 0)]
        if self.is_tadpole:
            return [("x", 0), (s, 0), ("v", 0), ("w", 0)]
        m = self.m
        p = (c - 1) % m
        order = [("x", p), (s, p), ("x", c), (s, c)]
        if c == 0:
            order += [("v", 0), ("w", 0)]
        return order

    def epsilon(self, l: Letter) -> int:
        return 1 if l[0] in ("x", "v") else -1

    def partner(self, l: Letter) -> Letter | None:
        k, i = l
        return {"x": (self.star, i), self.star: ("x", i), "v": ("w", 0), "w": ("v", 0)}.get(k)

    def letters(self) -> list[Letter]:
        out: list[Letter] = []
        for i in range(self.m):
            out += [("x", i), (self.star, i), ("X", i)]
        return out + [("v", 0), ("w", 0)]


def tadpole(star: str = "y", localized: bool = True) -> QuiverSig:
    return QuiverSig(1, True, star, localized)


def cyclic(m: int, star: str = "y", localized: bool = True) -> QuiverSig:
    return QuiverSig(m, False, star, localized)


# ---- words ----------------------------------------------------------------


def _inverse_pair(a: Letter, b: Letter) -> bool:
    return a[1] == b[1] and {a[0], b[0]} == {"x", "X"}


def word_head(sig: QuiverSig, w: Word) -> int:
    return sig.head(w[1][-1]) if w[1] else w[0]


def concat(sig: QuiverSig, u: Word | None, v: Word | None) -> Word | None:
    """Product of two reduced words, cancelling x x^{-1} pairs at the seam; None if zero."""
    if u is None or v is None:
        return None
    if word_head(sig, u) != v[0]:
        return None
    a, b = u[1], v[1]
    k = 0
    while k < len(a) and k < len(b) and _inverse_pair(a[len(a) - 1 - k], b[k]):
        k += 1
    if k == 0:
        return (u[0], a + b)
    return (u[0], a[: len(a) - k] + b[k:])


def letter_word(sig: QuiverSig, l: Letter) -> Word:
    return (sig.tail(l), (l,))


def idem(v: int) -> Word:
    return (v, ())


def format_word(w: Word) -> str:
    if not w[1]:
        return "e_inf" if w[0] == INF else f"e_{w[0]}"
    parts = []
    for k, i in w[1]:
        name = {"X": "x^-1"}.get(k, k)
        parts.append(name if k in ("v", "w") else f"{name}_{i}" if k != "X" else f"x_{i}^-1")
    return "*".join(parts)


# ---- elements -------------------------------------------------------------


def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if v != 0}


class NCElement:
    """Finite rational combination of reduced words; treated as immutable."""

    __slots__ = ("sig", "terms")

    def __init__(self, sig: QuiverSig, terms: Mapping[Word, Fraction] | None = None):
        self.sig = sig
        self.terms: dict[Word, Fraction] = _clean(dict(terms or {}))

    # constructors
    @classmethod
    def word(cls, sig: QuiverSig, w: Word, coeff=1) -> "NCElement":
        return cls(sig, {w: Fraction(coeff)})

    @classmethod
    def letter(cls, sig: QuiverSig, l: Letter) -> "NCElement":
        return cls.word(sig, letter_word(sig, l))

    @classmethod
    def zero(cls, sig: QuiverSig) -> "NCElement":
        return cls(sig)

    @classmethod
    def unit(cls, sig: QuiverSig, with_inf: bool = False) -> "NCElement":
        vs = list(sig.vertices) + ([INF] if with_inf else [])
        return cls(sig, {idem(v): Fraction(1) for v in vs})

    # arithmetic
    def _same(self, other: "NCElement") -> None:
        if self.sig != other.sig:
            raise ValueError("elements live in different algebras")

    def __add__(self, other: "NCElement") -> "NCElement":
        self._same(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return NCElement(self.sig, out)

    def __neg__(self) -> "NCElement":
        return NCElement(self.sig, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "NCElement") -> "NCElement":
        return self + (-other)

    def scale(self, c) -> "NCElement":
        c = Fraction(c)
        return NCElement(self.sig, {w: c * v for w, v in self.terms.items()})

    def __rmul__(self, c) -> "NCElement":
        return self.scale(c)

    def __mul__(self, other) -> "NCElement":
        if not isinstance(other, NCElement):
            return self.scale(other)
        return word_mul(self, other)

    def __pow__(self, k: int) -> "NCElement":
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = NCElement.unit(self.sig)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, NCElement) and self.sig == other.sig and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.sig, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"NCElement({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        items = sorted(self.terms.items(), key=lambda kv: (len(kv[0][1]), kv[0][1], kv[0][0]))
        return " + ".join(f"{c}*{format_word(w)}" if c != 1 else format_word(w) for w, c in items)


class TensorElement:
    """Finite rational combination of word pairs u (x) v."""

    __slots__ = ("sig", "terms")

    def __init__(self, sig: QuiverSig, terms: Mapping[tuple[Word, Word], Fraction] | None = None):
        self.sig = sig
        self.terms: dict[tuple[Word, Word], Fraction] = _clean(dict(terms or {}))

    @classmethod
    def pure(cls, a: NCElement, b: NCElement) -> "TensorElement":
        out: dict = {}
        for u, c in a.terms.items():
            for v, d in b.terms.items():
                out[(u, v)] = out.get((u, v), 0) + c * d
        return cls(a.sig, out)

    def __add__(self, other: "TensorElement") -> "TensorElement":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return TensorElement(self.sig, out)

    def __neg__(self) -> "TensorElement":
        return TensorElement(self.sig, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "TensorElement") -> "TensorElement":
        return self + (-other)

    def scale(self, c) -> "TensorElement":
        c = Fraction(c)
        return TensorElement(self.sig, {k: c * v for k, v in self.terms.items()})

    def flip(self) -> "TensorElement":
        return TensorElement(self.sig, {(v, u): c for (u, v), c in self.terms.items()})

    def outer(self, left: NCElement | None = None, right: NCElement | None = None) -> "TensorElement":
        """left (u (x) v) right = left u (x) v right."""
        sig = self.sig
        out: dict = {}
        lt = left.terms if left is not None else None
        rt = right.terms if right is not None else None
        for (u, v), c in self.terms.items():
            us = [(concat(sig, p, u), a) for p, a in lt.items()] if lt is not None else [(u, 1)]
            vs = [(concat(sig, v, q), b) for q, b in rt.items()] if rt is not None else [(v, 1)]
            for uu, a in us:
                if uu is None:
                    continue
                for vv, b in vs:
                    if vv is None:
                        continue
                    out[(uu, vv)] = out.get((uu, vv), 0) + c * a * b
        return TensorElement(sig, out)

    def multiply(self) -> NCElement:
        out: dict = {}
        for (u, v), c in self.terms.items():
            w = concat(self.sig, u, v)
            if w is not None:
                out[w] = out.get(w, 0) + c
        return NCElement(self.sig, out)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TensorElement) and self.sig == other.sig and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.sig, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "Tensor(0)"
        items = sorted(self.terms.items(), key=lambda kv: (kv[0][0][1], kv[0][1][1], kv[0][0][0], kv[0][1][0]))
        return "Tensor(" + " + ".join(f"{c}*{format_word(u)}(x){format_word(v)}" for (u, v), c in items) + ")"


def word_mul(a: NCElement, b: NCElement) -> NCElement:
    a._same(b)
    sig = a.sig
    out: dict = {}
    for u, c in a.terms.items():
        for v, d in b.terms.items():
            w = concat(sig, u, v)
            if w is not None:
                out[w] = out.get(w, 0) + c * d
    return NCElement(sig, out)


# ---- generator table ------------------------------------------------------

Term = tuple[Fraction, Word, Word]


def _order_terms(sig: QuiverSig, a: Letter, b: Letter) -> dict[int, list[Term]]:
    """Pieces of the a < b rule, keyed by the vertex they live at."""
    ta, ha, tb, hb = sig.tail(a), sig.head(a), sig.tail(b), sig.head(b)
    wa, wb = letter_word(sig, a), letter_word(sig, b)
    out: dict[int, list[Term]] = {}
    if ha == tb:
        out.setdefault(ha, []).append((HALF, idem(ha), concat(sig, wa, wb)))
    if hb == ta:
        out.setdefault(ta, []).append((HALF, concat(sig, wb, wa), idem(ta)))
    if ha == hb:
        out.setdefault(ha, []).append((-HALF, wb, wa))
    if ta == tb:
        out.setdefault(ta, []).append((-HALF, wa, wb))
    return out


def _flip_neg(terms: Iterable[Term]) -> list[Term]:
    return [(-c, v, u) for c, u, v in terms]


def _base_table(sig: QuiverSig, a: Letter, b: Letter) -> list[Term]:
    """Brackets between x, partner, v, w letters."""
    wa, wb = letter_word(sig, a), letter_word(sig, b)
    ta, ha = sig.tail(a), sig.head(a)
    if a == b:
        if ta != ha:
            return []
        eps = Fraction(sig.epsilon(a))
        sq = concat(sig, wa, wa)
        return [(eps * HALF, sq, idem(ta)), (-eps * HALF, idem(ha), sq)]
    if sig.partner(a) == b:
        if a[0] not in ("x", "v"):
            return _flip_neg(_base_table(sig, b, a))
        out: list[Term] = []
        if not (a[0] == "x" and sig.star == "z"):
            out.append((Fraction(1), idem(ha), idem(ta)))
        out.append((HALF, concat(sig, wb, wa), idem(ta)))
        out.append((HALF, idem(ha), concat(sig, wa, wb)))
        if ha == ta:
            out.append((HALF, wb, wa))
            out.append((-HALF, wa, wb))
        return out
    out = []
    ab = _order_terms(sig, a, b)
    ba = _order_terms(sig, b, a)
    for c in sorted(set(ab) | set(ba)):
        order = sig.vertex_order(c)
        if order.index(a) < order.index(b):
            out += ab.get(c, [])
        else:
            out += _flip_neg(ba.get(c, []))
    return out


def _outer_terms(sig: QuiverSig, terms: Iterable[Term], left: Word, right: Word, sign: int) -> list[Term]:
    out = []
    for c, u, v in terms:
        uu, vv = concat(sig, left, u), concat(sig, v, right)
        if uu is not None and vv is not None:
            out.append((sign * c, uu, vv))
    return out


@lru_cache(maxsize=None)
def _table(sig: QuiverSig, a: Letter, b: Letter) -> tuple[Term, ...]:
    if b[0] == "X":
        # <<a, x^{-1}>> = -x^{-1} <<a, x>> x^{-1}
        inv = letter_word(sig, b)
        base = _table(sig, a, ("x", b[1]))
        return tuple(_merge(_outer_terms(sig, base, inv, inv, -1)))
    if a[0] == "X":
        return tuple(_merge(_flip_neg(_table(sig, b, a))))
    return tuple(_merge(_base_table(sig, a, b)))


def _merge(terms: Iterable[Term]) -> list[Term]:
    acc: dict = {}
    for c, u, v in terms:
        if u is None or v is None:
            continue
        acc[(u, v)] = acc.get((u, v), 0) + c
    return [(c, u, v) for (u, v), c in acc.items() if c != 0]


def _check_letter(sig: QuiverSig, l: Letter) -> None:
    if l not in sig.letters():
        raise ValueError(f"letter {l} is not in the alphabet of {sig}")


def dbl_gen(sig: QuiverSig, a: Letter, b: Letter) -> TensorElement:
    _check_letter(sig, a)
    _check_letter(sig, b)
    return TensorElement(sig, {(u, v): c for c, u, v in _table(sig, a, b)})


# ---- brackets on elements -------------------------------------------------


def _pair_terms(sig: QuiverSig, wa: Word, wb: Word):
    """Yield (coeff, left, right) of <<wa, wb>> = sum b_<j Q' a_>i (x) a_<i Q'' b_>j."""
    A, B = wa[1], wb[1]
    for i, ai in enumerate(A):
        a_lt = (wa[0], A[:i])
        a_gt = (sig.head(ai), A[i + 1 :])
        for j, bj in enumerate(B):
            terms = _table(sig, ai, bj)
            if not terms:
                continue
            b_lt = (wb[0], B[:j])
            b_gt = (sig.head(bj), B[j + 1 :])
            for c, u, v in terms:
                left = concat(sig, concat(sig, b_lt, u), a_gt)
                if left is None:
                    continue
                right = concat(sig, concat(sig, a_lt, v), b_gt)
                if right is None:
                    continue
                yield c, left, right


def dbl(a: NCElement, b: NCElement) -> TensorElement:
    """Double bracket: derivation in the second argument (outer action), extended by antisymmetry."""
    a._same(b)
    sig = a.sig
    out: dict = {}
    for wa, ca in a.terms.items():
        for wb, cb in b.terms.items():
            k = ca * cb
            for c, l, r in _pair_terms(sig, wa, wb):
                out[(l, r)] = out.get((l, r), 0) + k * c
    return TensorElement(sig, out)


def loday(a: NCElement, b: NCElement) -> NCElement:
    """{a, b} = multiplication applied to <<a, b>>."""
    a._same(b)
    sig = a.sig
    out: dict = {}
    for wa, ca in a.terms.items():
        for wb, cb in b.terms.items():
            k = ca * cb
            for c, l, r in _pair_terms(sig, wa, wb):
                w = concat(sig, l, r)
                if w is not None:
                    out[w] = out.get(w, 0) + k * c
    return NCElement(sig, out)


# ---- reduction modulo commutators ----------------------------------------


def _idem_rep(sig: QuiverSig, v: int) -> int:
    # with x inverted, e_i = x_i x_i^{-1} ~ x_i^{-1} x_i = e_{i+1}
    if sig.localized and v != INF:
        return 0
    return v


def _necklace_word(sig: QuiverSig, w: Word) -> Word | None:
    t, L = w
    if not L:
        return idem(_idem_rep(sig, t))
    if sig.head(L[-1]) != t:
        return None
    while len(L) >= 2 and _inverse_pair(L[-1], L[0]):
        v = sig.head(L[0])
        L = L[1:-1]
        t = v if not L else sig.tail(L[0])
    if not L:
        return idem(_idem_rep(sig, t))
    best = min(L[r:] + L[:r] for r in range(len(L)))
    return (sig.tail(best[0]), best)


def necklace_reduce(e: NCElement) -> NCElement:
    """Canonical form modulo [A, A]: open words vanish, closed words become minimal rotations."""
    out: dict = {}
    for w, c in e.terms.items():
        r = _necklace_word(e.sig, w)
        if r is not None:
            out[r] = out.get(r, 0) + c
    return NCElement(e.sig, out)


class IdentityResult(NamedTuple):
    ok: bool
    diff: NCElement


def check_identity(lhs: NCElement, rhs: NCElement, mod_comm: bool = False) -> IdentityResult:
    d = lhs - rhs
    if mod_comm:
        d = necklace_reduce(d)
    return IdentityResult(d.is_zero(), d)


# ---- helpers for the identity suites -------------------------------------


def gen(sig: QuiverSig, kind: str) -> NCElement:
    """Sum over the cycle of the given letter kind ('x', 'y', 'z', 'X')."""
    if kind == "z" and sig.star == "y":
        return gen(sig, "y") + gen(sig, "X")
    if kind in ("v", "w"):
        return NCElement.letter(sig, (kind, 0))
    out = NCElement.zero(sig)
    for i in range(sig.m):
        out = out + NCElement.letter(sig, (kind, i))
    return out


def substitute(e: NCElement, target: QuiverSig, images: Callable[[Letter], NCElement]) -> NCElement:
    """Algebra map sending each letter l to images(l)."""
    out = NCElement.zero(target)
    for (t, L), c in e.terms.items():
        acc = NCElement.word(target, idem(t))
        for l in L:
            acc = acc * images(l)
        out = out + acc.scale(c)
    return out


def substitute_tensor(T: TensorElement, target: QuiverSig, images: Callable[[Letter], NCElement]) -> TensorElement:
    out = TensorElement(target)
    for (u, v), c in T.terms.items():
        a = substitute(NCElement.word(T.sig, u), target, images)
        b = substitute(NCElement.word(T.sig, v), target, images)
        out = out + TensorElement.pure(a, b).scale(c)
    return out


def z_images(target: QuiverSig) -> Callable[[Letter], NCElement]:
    """Letters of the z-alphabet written in the y-alphabet: z_i -> y_i + x_i^{-1}."""

    def img(l: Letter) -> NCElement:
        if l[0] == "z":
            return NCElement.letter(target, ("y", l[1])) + NCElement.letter(target, ("X", l[1]))
        return NCElement.letter(target, l)

    return img


def E_r(sig: QuiverSig, r: int) -> TensorElement:
    """E_r = sum_i e_{i+r} (x) e_i over the cycle vertices."""
    m = sig.m
    return TensorElement(sig, {(idem((i + r) % m), idem(i)): Fraction(1) for i in range(m)})


def a3_decomposition(a: NCElement, T: TensorElement, max_power: int, r_values: Sequence[int]) -> dict | None:
    """Exact coefficients c with T = sum c[(i, r)] (a^i E_r - E_r a^i), or None if impossible."""
    import sympy

    basis = {}
    for i in range(max_power + 1):
        p = a**i
        for r in r_values:
            E = E_r(a.sig, r)
            basis[(i, r)] = E.outer(left=p) - E.outer(right=p)
    keys = sorted({k for B in basis.values() for k in B.terms} | set(T.terms), key=repr)
    cols = list(basis)
    M = sympy.Matrix([[sympy.Rational(basis[c].terms.get(k, 0)) for c in cols] for k in keys])
    rhs = sympy.Matrix([sympy.Rational(T.terms.get(k, 0)) for k in keys])
    try:
        sol, params = M.gauss_jordan_solve(rhs)
    except ValueError:
        return None
    sol = sol.subs({s: 0 for s in params})
    return {c: Fraction(int(v.p), int(v.q)) for c, v in zip(cols, sol) if v != 0}


# ---- suites ---------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class SuiteResult:
    suite: str
    quiver: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, res: IdentityResult | bool, detail: str = "") -> None:
        if isinstance(res, IdentityResult):
            self.checks.append(CheckResult(name, res.ok, detail or ("" if res.ok else str(res.diff)[:500])))
        else:
            self.checks.append(CheckResult(name, bool(res), detail))

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "quiver": self.quiver,
            "pass": self.passed,
            "checks": [{"name": c.name, "pass": c.ok, "detail": c.detail} for c in self.checks],
        }


def _label(sig: QuiverSig) -> str:
    return "tadpole" if sig.is_tadpole else f"cyclic:{sig.m}"


def default_max_deg(m: int, tadpole_quiver: bool) -> int:
    return 6 if tadpole_quiver else 2 * m + 2


def _z_table_agrees(zsig: QuiverSig, ysig: QuiverSig) -> bool:
    img = z_images(ysig)
    letters = [l for l in zsig.letters() if l[0] in ("x", "z", "X")]
    for a, b in itertools.product(letters, repeat=2):
        lhs = substitute_tensor(dbl_gen(zsig, a, b), ysig, img)
        rhs = dbl(img(a), img(b))
        if lhs != rhs:
            return False
    return True


def suite_commuting_powers(sig: QuiverSig, max_deg: int, direct_z_deg: int | None = None) -> SuiteResult:
    """{p^a, p^b} = 0 exactly for p in x, y, xy, z and a, b <= max_deg."""
    res = SuiteResult("commuting-powers", _label(sig))
    ysig = QuiverSig(sig.m, sig.is_tadpole, "y", True)
    zsig = QuiverSig(sig.m, sig.is_tadpole, "z", True)
    x, y = gen(ysig, "x"), gen(ysig, "y")
    bases = {"x": x, "y": y, "xy": x * y}
    for name, p in bases.items():
        powers = [p**k for k in range(max_deg + 1)]
        for a in range(1, max_deg + 1):
            for b in range(a, max_deg + 1):
                br = loday(powers[a], powers[b])
                res.add(f"{{{name}^{a},{name}^{b}}}=0", IdentityResult(br.is_zero(), br))
    res.add("z-alphabet table = substituted y-alphabet table", _z_table_agrees(zsig, ysig))
    z = gen(zsig, "z")
    zp = [z**k for k in range(max_deg + 1)]
    for a in range(1, max_deg + 1):
        for b in range(a, max_deg + 1):
            br = loday(zp[a], zp[b])
            res.add(f"{{z^{a},z^{b}}}=0", IdentityResult(br.is_zero(), br))
    if direct_z_deg is None:
        direct_z_deg = min(max_deg, 4 if sig.is_tadpole else 3)
    zy = gen(ysig, "z")
    zyp = [zy**k for k in range(direct_z_deg + 1)]
    for a in range(1, direct_z_deg + 1):
        for b in range(a, direct_z_deg + 1):
            br = loday(zyp[a], zyp[b])
            res.add(f"{{(y+x^-1)^{a},(y+x^-1)^{b}}}=0", IdentityResult(br.is_zero(), br))
    return res


def _sum(sig: QuiverSig, items: Iterable[NCElement]) -> NCElement:
    out = NCElement.zero(sig)
    for it in items:
        out = out + it
    return out


def suite_trace_brackets(sig: QuiverSig, max_deg: int) -> SuiteResult:
    """Brackets of x^a, yx^b, zx^b modulo commutators."""
    res = SuiteResult("trace-brackets", _label(sig))
    m = sig.m
    plain = QuiverSig(m, sig.is_tadpole, "y", False)
    loc = QuiverSig(m, sig.is_tadpole, "y", True)

    def forms(s: QuiverSig):
        x, y = gen(s, "x"), gen(s, "y")
        return x, y, (lambda k: x**k)

    if sig.is_tadpole:
        exps_a = list(range(0, max_deg + 1))
        exps_b = list(range(0, max_deg + 1))
    else:
        exps_a = [a for a in range(0, max_deg + 1) if a % m == 0]
        exps_b = [b for b in range(1, max_deg + 1) if (b - 1) % m == 0]

    # y-forms, in A (no inverses)
    x, y, xp = forms(plain)
    for a in exps_a:
        for b in exps_b:
            if a + b > 2 * max_deg:
                continue
            lhs = loday(xp(a), y * xp(b))
            rhs = (xp(a + b - 1).scale(a) if a + b >= 1 else NCElement.zero(plain)) + (y * xp(a + b)).scale(a)
            res.add(f"{{x^{a},yx^{b}}}", check_identity(lhs, rhs, True))
    for b in exps_b:
        for c in exps_b:
            lhs = loday(y * xp(b), y * xp(c))
            rhs = (y * xp(b + c - 1)).scale(b - c) if b + c >= 1 else NCElement.zero(plain)
            rhs = rhs + _sum(plain, (y * xp(t) * y * xp(b + c - t) for t in range(1, b + 1)))
            rhs = rhs - _sum(plain, (y * xp(t) * y * xp(b + c - t) for t in range(1, c + 1)))
            res.add(f"{{yx^{b},yx^{c}}}", check_identity(lhs, rhs, True))

    # z-forms, in A' (x inverted), z = y + x^{-1}
    x, y, xp = forms(loc)
    z = y + gen(loc, "X")
    for a in exps_a:
        for b in exps_b:
            lhs = loday(xp(a), z * xp(b))
            rhs = (z * xp(a + b)).scale(a)
            res.add(f"{{x^{a},zx^{b}}}", check_identity(lhs, rhs, True))
    for b in exps_b:
        for c in exps_b:
            lhs = loday(z * xp(b), z * xp(c))
            rhs = _sum(loc, (z * xp(t) * z * xp(b + c - t) for t in range(1, b + 1)))
            rhs = rhs - _sum(loc, (z * xp(t) * z * xp(b + c - t) for t in range(1, c + 1)))
            res.add(f"{{zx^{b},zx^{c}}}", check_identity(lhs, rhs, True))
    return res


def suite_flow_lemma(sig: QuiverSig, ks: Sequence[int] | None = None) -> SuiteResult:
    """{y^k, v} = {y^k, w} = 0 and {y^k, x} for k in m N."""
    res = SuiteResult("flow-lemma", _label(sig))
    s = QuiverSig(sig.m, sig.is_tadpole, "y", False)
    m = s.m
    ks = list(ks) if ks is not None else [m, 2 * m]
    x, y = gen(s, "x"), gen(s, "y")
    v, w = gen(s, "v"), gen(s, "w")
    for k in ks:
        if k % m:
            raise ValueError(f"k = {k} is not a multiple of m = {m}")
        yk = y**k
        br_v, br_w = loday(yk, v), loday(yk, w)
        res.add(f"{{y^{k},v}}=0", IdentityResult(br_v.is_zero(), br_v))
        res.add(f"{{y^{k},w}}=0", IdentityResult(br_w.is_zero(), br_w))
        drift = yk * x if not s.is_tadpole else x * yk
        rhs = (y ** (k - 1)).scale(-k) - drift.scale(k)
        res.add(f"{{y^{k},x}}", check_identity(loday(yk, x), rhs, False))
    return res


SUITES = ("commuting-powers", "trace-brackets", "flow-lemma")


def run_suite(name: str, sig: QuiverSig, max_deg: int | None = None) -> SuiteResult:
    if max_deg is None:
        max_deg = default_max_deg(sig.m, sig.is_tadpole)
    if name == "commuting-powers":
        return suite_commuting_powers(sig, max_deg)
    if name == "trace-brackets":
        return suite_trace_brackets(sig, max_deg)
    if name == "flow-lemma":
        return suite_flow_lemma(sig)
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
