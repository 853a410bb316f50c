"""Commutative multivariate polynomials over exact fields, monomial orders,
Buchberger's algorithm with cofactor tracking, and inconsistency certificates.

Polynomials are sparse: a dict from exponent tuples to nonzero scalars of an
:class:`~nonassoc.exactnum.Field`.  All arithmetic is exact.  Inside the
Buchberger engine the rational case runs fraction-free on primitive integer
term dicts (contents are stripped and folded into a replay log), and the
prime-field case runs on monic residue dicts; either way every new basis
element records an exact provenance so cofactors over the original
generators can be reconstructed on demand.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .exactnum import Field, field_for_characteristic, gcd, strip_factor


class RingMismatchError(ValueError):
    pass


class ConsistentSystemError(ValueError):
    """Raised when an inconsistency certificate is requested for an ideal
    that does not contain 1."""


# ---------------------------------------------------------------------------
# polynomials


class CoeffPoly:
    """Sparse commutative polynomial in a fixed, ordered variable tuple."""

    __slots__ = ("vars", "field", "terms")

    def __init__(self, vars: tuple[str, ...], field: Field, terms: dict | None = None):
        self.vars = tuple(vars)
        self.field = field
        t = {}
        if terms:
            n = len(self.vars)
            for e, c in terms.items():
                if len(e) != n:
                    raise ValueError(f"exponent vector {e} does not match {n} variables")
                if not field.is_zero(c):
                    t[e] = c
        self.terms = t

    # -- constructors

    @classmethod
    def zero(cls, vars, field):
        return cls(vars, field)

    @classmethod
    def const(cls, vars, field, c):
        c = field.from_int(c) if isinstance(c, int) else c
        return cls(vars, field, {(0,) * len(vars): c})

    @classmethod
    def variable(cls, vars, field, name):
        e = [0] * len(vars)
        e[list(vars).index(name)] = 1
        return cls(vars, field, {tuple(e): field.one})

    # -- queries

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_value(self):
        if not self.terms:
            return self.field.from_int(0)
        return self.terms[(0,) * len(self.vars)]

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def same_ring(self, other: "CoeffPoly") -> bool:
        return self.vars == other.vars and self.field == other.field

    def _check_ring(self, other):
        if not self.same_ring(other):
            raise RingMismatchError(
                f"ring mismatch: {self.vars}/{self.field} vs {other.vars}/{other.field}"
            )

    # -- arithmetic

    def __add__(self, other):
        self._check_ring(other)
        fadd, fzero = self.field.add, self.field.is_zero
        zero = self.field.from_int(0)
        t = dict(self.terms)
        for e, c in other.terms.items():
            s = fadd(t.get(e, zero), c)
            if fzero(s):
                t.pop(e, None)
            else:
                t[e] = s
        r = CoeffPoly.zero(self.vars, self.field)
        r.terms = t
        return r

    def __neg__(self):
        fneg = self.field.neg
        r = CoeffPoly.zero(self.vars, self.field)
        r.terms = {e: fneg(c) for e, c in self.terms.items()}
        return r

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        if self.field.is_zero(c):
            return CoeffPoly.zero(self.vars, self.field)
        fmul = self.field.mul
        r = CoeffPoly.zero(self.vars, self.field)
        r.terms = {e: fmul(c, v) for e, v in self.terms.items()}
        return r

    def mul_term(self, c, exps):
        """Multiply by the single term c * x^exps."""
        if self.field.is_zero(c):
            return CoeffPoly.zero(self.vars, self.field)
        fmul = self.field.mul
        r = CoeffPoly.zero(self.vars, self.field)
        r.terms = {
            tuple(a + b for a, b in zip(e, exps)): fmul(c, v) for e, v in self.terms.items()
        }
        return r

    def __mul__(self, other):
        if not isinstance(other, CoeffPoly):
            return self.scale(other)
        self._check_ring(other)
        fadd, fmul, fzero = self.field.add, self.field.mul, self.field.is_zero
        zero = self.field.from_int(0)
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = fadd(t.get(e, zero), fmul(c1, c2))
                if fzero(s):
                    t.pop(e, None)
                else:
                    t[e] = s
        r = CoeffPoly.zero(self.vars, self.field)
        r.terms = t
        return r

    def __eq__(self, other):
        return (
            isinstance(other, CoeffPoly)
            and self.vars == other.vars
            and self.field == other.field
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.vars, self.field, frozenset(self.terms.items())))

    # -- leading data

    def leading(self, order: "MonomialOrder"):
        """(exponent tuple, coefficient) of the leading term."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=order.key)
        return e, self.terms[e]

    def sorted_terms(self, order: "MonomialOrder", reverse=True):
        return sorted(self.terms.items(), key=lambda t: order.key(t[0]), reverse=reverse)

    # -- evaluation

    def evaluate(self, values: dict):
        """Total evaluation; values maps every variable name to a scalar."""
        f = self.field
        acc = f.from_int(0)
        pts = [values[v] for v in self.vars]
        for e, c in self.terms.items():
            t = c
            for x, k in zip(pts, e):
                for _ in range(k):
                    t = f.mul(t, x)
            acc = f.add(acc, t)
        return acc

    def substitute_var(self, name: str, value) -> "CoeffPoly":
        """Substitute one variable by a scalar, keeping the ring."""
        i = list(self.vars).index(name)
        f = self.field
        out = CoeffPoly.zero(self.vars, self.field)
        for e, c in self.terms.items():
            t = c
            for _ in range(e[i]):
                t = f.mul(t, value)
            e2 = e[:i] + (0,) + e[i + 1 :]
            out += CoeffPoly(self.vars, f, {e2: t})
        return out

    def map_coefficients(self, target_field: Field) -> "CoeffPoly":
        """Push coefficients into another field (rationals reduce mod p when
        the denominator is invertible)."""
        out = {}
        for e, c in self.terms.items():
            if isinstance(c, Fraction):
                if target_field.characteristic:
                    num = target_field.from_int(c.numerator)
                    den = target_field.from_int(c.denominator)
                    v = target_field.mul(num, target_field.inv(den))
                else:
                    v = c
            else:
                v = target_field.from_int(c)
            out[e] = v
        return CoeffPoly(self.vars, target_field, out)

    def __repr__(self):
        return f"CoeffPoly({poly_to_text(self)})"


# ---------------------------------------------------------------------------
# text form: "-1 + 3/2*l1^2*m3 - m5"


def poly_to_text(p: CoeffPoly, order: "MonomialOrder | None" = None) -> str:
    if not p.terms:
        return "0"
    order = order or MonomialOrder.degrevlex(p.vars)
    parts = []
    for e, c in p.sorted_terms(order):
        factors = []
        for name, k in zip(p.vars, e):
            if k == 1:
                factors.append(name)
            elif k > 1:
                factors.append(f"{name}^{k}")
        cs = p.field.format(c)
        neg = cs.startswith("-")
        if neg:
            cs = cs[1:]
        if factors and cs == "1":
            body = "*".join(factors)
        elif factors:
            body = cs + "*" + "*".join(factors)
        else:
            body = cs
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts)


def poly_from_text(text: str, vars: tuple[str, ...], field: Field) -> CoeffPoly:
    import re

    token_re = re.compile(r"\s*(?:(\d+/\d+|\d+)|([A-Za-z][A-Za-z0-9_]*)|(\^)|(\*)|([+-]))")
    pos = 0
    terms: dict = {}
    sign = 1
    term_coeff = None
    term_exps = None
    in_term = False
    idx = {v: i for i, v in enumerate(vars)}
    fadd, fzero = field.add, field.is_zero
    zero = field.from_int(0)

    def flush():
        nonlocal term_coeff, term_exps, in_term, sign
        if not in_term:
            return
        c = term_coeff if term_coeff is not None else field.one
        if sign < 0:
            c = field.neg(c)
        e = tuple(term_exps)
        s = fadd(terms.get(e, zero), c)
        if fzero(s):
            terms.pop(e, None)
        else:
            terms[e] = s
        term_coeff, term_exps, in_term, sign = None, None, False, 1

    while pos < len(text):
        m = token_re.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ValueError(f"cannot parse polynomial near {text[pos:pos+20]!r}")
            break
        pos = m.end()
        num, name, caret, star, pm = m.groups()
        if pm:
            flush()
            if pm == "-":
                sign = -sign
            continue
        if caret or star:
            if not in_term:
                raise ValueError("misplaced operator in polynomial text")
            if caret:
                raise ValueError("exponent without a variable")
            continue
        if not in_term:
            in_term = True
            term_coeff = None
            term_exps = [0] * len(vars)
        if num:
            c = field.parse(num)
            term_coeff = c if term_coeff is None else field.mul(term_coeff, c)
        elif name:
            if name not in idx:
                raise ValueError(f"unknown variable {name!r}")
            exp = 1
            m2 = token_re.match(text, pos)
            if m2 and m2.group(3):  # caret
                pos = m2.end()
                m3 = token_re.match(text, pos)
                if not m3 or not m3.group(1):
                    raise ValueError("expected exponent after ^")
                pos = m3.end()
                exp = int(m3.group(1))
            term_exps[idx[name]] += exp
    flush()
    return CoeffPoly(vars, field, terms)


# ---------------------------------------------------------------------------
# monomial orders


class MonomialOrder:
    """Monomial order on a fixed variable tuple.

    ``perm`` lists variable positions from most to least significant; the
    default permutation is the declaration order.  ``key`` is usable with
    ``max``/``sorted``; ``heapkey`` is its negation for min-heaps.
    """

    KINDS = ("degrevlex", "deglex", "lex")

    def __init__(self, kind: str, vars: tuple[str, ...], perm: tuple[int, ...] | None = None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown order kind {kind!r}")
        self.kind = kind
        self.vars = tuple(vars)
        n = len(self.vars)
        self.perm = tuple(perm) if perm is not None else tuple(range(n))
        if sorted(self.perm) != list(range(n)):
            raise ValueError("order permutation must be a bijection on the variables")
        self._revperm = tuple(reversed(self.perm))

    @classmethod
    def degrevlex(cls, vars, perm=None):
        return cls("degrevlex", vars, perm)

    @classmethod
    def lex(cls, vars, perm=None):
        return cls("lex", vars, perm)

    @classmethod
    def deglex(cls, vars, perm=None):
        return cls("deglex", vars, perm)

    def with_swapped(self, a: str, b: str) -> "MonomialOrder":
        """Same order kind with two variables exchanged in significance."""
        ia, ib = self.vars.index(a), self.vars.index(b)
        perm = list(self.perm)
        pa, pb = perm.index(ia), perm.index(ib)
        perm[pa], perm[pb] = perm[pb], perm[pa]
        return MonomialOrder(self.kind, self.vars, tuple(perm))

    def key(self, e: tuple) -> tuple:
        if self.kind == "degrevlex":
            return (sum(e), tuple(-e[p] for p in self._revperm))
        if self.kind == "deglex":
            return (sum(e), tuple(e[p] for p in self.perm))
        return tuple(e[p] for p in self.perm)

    def heapkey(self, e: tuple) -> tuple:
        if self.kind == "degrevlex":
            return (-sum(e), tuple(e[p] for p in self._revperm))
        if self.kind == "deglex":
            return (-sum(e), tuple(-e[p] for p in self.perm))
        return tuple(-e[p] for p in self.perm)

    def spec(self) -> str:
        token = {"degrevlex": "dp", "deglex": "Dp", "lex": "lp"}[self.kind]
        if self.perm == tuple(range(len(self.vars))):
            return token
        seq = " ".join(self.vars[p] for p in self.perm)
        return f"{token} seq {seq}"

    @classmethod
    def from_spec(cls, spec: str, vars: tuple[str, ...]) -> "MonomialOrder":
        """Parse "dp", "lp", "Dp", optionally followed by "swap A B" or
        "seq V1 V2 ..." to permute variable significance."""
        words = spec.split()
        if not words:
            raise ValueError("empty order spec")
        kinds = {"dp": "degrevlex", "degrevlex": "degrevlex", "lp": "lex", "lex": "lex",
                 "Dp": "deglex", "deglex": "deglex"}
        if words[0] not in kinds:
            raise ValueError(f"unsupported order spec {words[0]!r}")
        order = cls(kinds[words[0]], vars)
        rest = words[1:]
        while rest:
            if rest[0] == "swap" and len(rest) >= 3:
                order = order.with_swapped(rest[1], rest[2])
                rest = rest[3:]
            elif rest[0] == "seq" and len(rest) == len(vars) + 1:
                perm = tuple(vars.index(w) for w in rest[1:])
                order = cls(order.kind, vars, perm)
                rest = []
            else:
                raise ValueError(f"unsupported order spec tail {' '.join(rest)!r}")
        return order

    def __eq__(self, other):
        return (
            isinstance(other, MonomialOrder)
            and (self.kind, self.vars, self.perm) == (other.kind, other.vars, other.perm)
        )

    def __hash__(self):
        return hash((self.kind, self.vars, self.perm))

    def __repr__(self):
        return f"MonomialOrder({self.kind}, perm={self.perm})"


# ---------------------------------------------------------------------------
# monomial helpers


def _divides(a: tuple, b: tuple) -> bool:
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def _monomial_lcm(a: tuple, b: tuple) -> tuple:
    return tuple(x if x > y else y for x, y in zip(a, b))


def _monomial_div(a: tuple, b: tuple) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def _monomial_mul(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# division (public, exact quotients over the field)


def normal_form(f: CoeffPoly, G: list[CoeffPoly], order: MonomialOrder):
    """Multivariate division of f by the ordered list G.

    Returns (remainder, quotients) with f == sum(q_i * g_i) + remainder and
    no remainder monomial divisible by a leading monomial of G.  The divisor
    scan is deterministic (list order).
    """
    if not G:
        raise ValueError("divisor list must be nonempty")
    for g in G:
        f._check_ring(g)
    field = f.field
    fmul, fneg, fadd, fzero = field.mul, field.neg, field.add, field.is_zero
    zero = field.from_int(0)
    quotients = [CoeffPoly.zero(f.vars, field) for _ in G]
    entries = []
    for i, g in enumerate(G):
        if not g.is_zero():
            lt, lc = g.leading(order)
            entries.append((lt, sum(lt), field.inv(lc), g, i))
    heapkey = order.heapkey
    terms = dict(f.terms)
    heap = [(heapkey(e), e) for e in terms]
    heapq.heapify(heap)
    seen = set(terms)
    remainder: dict = {}
    while heap:
        _, mono = heapq.heappop(heap)
        c = terms.pop(mono, None)
        if c is None or fzero(c):
            continue
        deg = sum(mono)
        hit = None
        for lt, ltdeg, inv_lc, g, gi in entries:
            if ltdeg <= deg and _divides(lt, mono):
                hit = (lt, inv_lc, g, gi)
                break
        if hit is None:
            remainder[mono] = c
            continue
        lt, inv_lc, g, gi = hit
        q = fmul(c, inv_lc)
        shift = _monomial_div(mono, lt)
        quotients[gi] += CoeffPoly(f.vars, field, {shift: q})
        for e, gc in g.terms.items():
            if e == lt:
                continue
            tgt = _monomial_mul(e, shift)
            s = fadd(terms.get(tgt, zero), fneg(fmul(q, gc)))
            if fzero(s):
                terms.pop(tgt, None)
            else:
                terms[tgt] = s
                if tgt not in seen:
                    seen.add(tgt)
                    heapq.heappush(heap, (heapkey(tgt), tgt))
    rem = CoeffPoly.zero(f.vars, field)
    rem.terms = remainder
    return rem, quotients


# ---------------------------------------------------------------------------
# fraction-free / modular reduction kernels (engine internals)


def _reduce_int(terms: dict, entries, order: MonomialOrder):
    """Fraction-free reduction of an integer term dict.

    entries: list of (lt, ltdeg, lc:int>0, terms:dict, gid) scanned in order.
    Returns (remainder_dict, events); each event (a, gid, q, shift) means the
    running value was replaced by a*value - q*x^shift*g_gid.
    """
    heapkey = order.heapkey
    heap = [(heapkey(e), e) for e in terms]
    heapq.heapify(heap)
    seen = set(terms)
    remainder: dict = {}
    events = []
    while heap:
        _, mono = heapq.heappop(heap)
        c = terms.pop(mono, None)
        if not c:
            continue
        deg = sum(mono)
        hit = None
        for lt, ltdeg, lc, gterms, gid in entries:
            if ltdeg <= deg and _divides(lt, mono):
                hit = (lt, lc, gterms, gid)
                break
        if hit is None:
            remainder[mono] = c
            continue
        lt, lc, gterms, gid = hit
        d = math.gcd(c, lc)
        a = lc // d       # scale applied to the whole running value
        q = c // d        # multiple of g subtracted
        shift = _monomial_div(mono, lt)
        if a != 1:
            for e in terms:
                terms[e] *= a
            for e in remainder:
                remainder[e] *= a
        events.append((a, gid, q, shift))
        for e, gc in gterms.items():
            if e == lt:
                continue
            tgt = _monomial_mul(e, shift)
            s = terms.get(tgt, 0) - q * gc
            if s:
                terms[tgt] = s
                if tgt not in seen:
                    seen.add(tgt)
                    heapq.heappush(heap, (heapkey(tgt), tgt))
            else:
                terms.pop(tgt, None)
    return remainder, events


def _reduce_modp(terms: dict, entries, order: MonomialOrder, p: int):
    """Reduction mod p by monic entries (lt, ltdeg, terms, gid).

    Returns (remainder_dict, events); each event (gid, q, shift) means
    value -= q*x^shift*g_gid.
    """
    heapkey = order.heapkey
    heap = [(heapkey(e), e) for e in terms]
    heapq.heapify(heap)
    seen = set(terms)
    remainder: dict = {}
    events = []
    while heap:
        _, mono = heapq.heappop(heap)
        c = terms.pop(mono, None)
        if not c:
            continue
        deg = sum(mono)
        hit = None
        for lt, ltdeg, gterms, gid in entries:
            if ltdeg <= deg and _divides(lt, mono):
                hit = (lt, gterms, gid)
                break
        if hit is None:
            remainder[mono] = c
            continue
        lt, gterms, gid = hit
        q = c  # entries are monic
        shift = _monomial_div(mono, lt)
        events.append((gid, q, shift))
        for e, gc in gterms.items():
            if e == lt:
                continue
            tgt = _monomial_mul(e, shift)
            s = (terms.get(tgt, 0) - q * gc) % p
            if s:
                terms[tgt] = s
                if tgt not in seen:
                    seen.add(tgt)
                    heapq.heappush(heap, (heapkey(tgt), tgt))
            else:
                terms.pop(tgt, None)
    return remainder, events


def _int_content_normalize(terms: dict, order: MonomialOrder):
    """Divide an integer term dict by its content, sign-normalized to a
    positive leading coefficient.  Returns (primitive_terms, gamma) with
    input == gamma * primitive."""
    g = 0
    for c in terms.values():
        g = math.gcd(g, c)
        if g == 1:
            break
    lt = max(terms, key=order.key)
    if terms[lt] < 0:
        g = -g
    if g != 1:
        terms = {e: c // g for e, c in terms.items()}
    return terms, g


# ---------------------------------------------------------------------------
# Buchberger engine with provenance


class _Engine:
    """Buchberger completion with exact provenance.

    Every working element k records a representation over earlier elements
    (inputs have trivial provenance), so any element expands to exact
    cofactors over the original generators on demand.  Pair selection is the
    normal strategy (minimal lcm degree, ties by canonical pair index) with
    the Gebauer-Moeller coprime and chain criteria; the run is fully
    deterministic.
    """

    def __init__(self, F: list[CoeffPoly], order: MonomialOrder, stop_on_unit=True):
        if not F:
            raise ValueError("generator list must be nonempty")
        first = F[0]
        for f in F:
            first._check_ring(f)
        self.vars, self.field = first.vars, first.field
        self.char0 = self.field.characteristic == 0
        self.p = self.field.characteristic
        self.order = order
        self.inputs = list(F)
        self.work: list[dict] = []         # int dicts (primitive / monic residues)
        self.prov: list[dict] = []         # id -> {('in', i) | ('el', j): CoeffPoly}
        self.lts: list[tuple] = []
        self.lcs: list[int] = []
        self.alive: list[bool] = []
        self.stop_on_unit = stop_on_unit
        self.unit_id: int | None = None
        self._cof_cache: dict[int, dict[int, CoeffPoly]] = {}
        self.pairs_processed = 0

    # -- scalar helpers

    def _const(self, c) -> CoeffPoly:
        return CoeffPoly.const(self.vars, self.field, c)

    def _mono(self, c, exps) -> CoeffPoly:
        return CoeffPoly(self.vars, self.field, {exps: c})

    def value(self, pid: int) -> CoeffPoly:
        f = self.field
        conv = (lambda c: Fraction(c)) if self.char0 else (lambda c: c)
        return CoeffPoly(self.vars, f, {e: conv(c) for e, c in self.work[pid].items()})

    # -- element bookkeeping

    def _add_element(self, wterms: dict, provenance: dict) -> int:
        pid = len(self.work)
        self.work.append(wterms)
        self.prov.append(provenance)
        lt = max(wterms, key=self.order.key)
        self.lts.append(lt)
        self.lcs.append(wterms[lt])
        self.alive.append(True)
        if len(wterms) == 1 and not any(lt):
            self.unit_id = pid
        return pid

    def _entries(self):
        if self.char0:
            ents = [
                (self.lts[i], sum(self.lts[i]), self.lcs[i], self.work[i], i)
                for i in range(len(self.work))
                if self.alive[i]
            ]
        else:
            ents = [
                (self.lts[i], sum(self.lts[i]), self.work[i], i)
                for i in range(len(self.work))
                if self.alive[i]
            ]
        ents.sort(key=lambda t: (t[1], self.order.key(t[0]), t[-1]))
        return ents

    # -- input registration

    def _register_input(self, i: int, f: CoeffPoly):
        if f.is_zero():
            return None
        if self.char0:
            den = 1
            for c in f.terms.values():
                den = den * c.denominator // math.gcd(den, c.denominator)
            iterms = {e: int(c * den) for e, c in f.terms.items()}
            iterms, g = _int_content_normalize(iterms, self.order)
            gamma = Fraction(g, den)  # f == gamma * primitive
            prov = {("in", i): self._const(Fraction(1) / gamma)}
        else:
            lt, lc = f.leading(self.order)
            inv = self.field.inv(lc)
            iterms = {e: (c * inv) % self.p for e, c in f.terms.items()}
            prov = {("in", i): self._const(inv)}
        return self._add_element(iterms, prov)

    # -- provenance assembly from reduction events

    def _assemble_prov(self, base: dict, events, gamma_inv) -> dict:
        """base: {key: CoeffPoly} for the unreduced start value; events from
        the matching reduction kernel.  Returns provenance of result/gamma."""
        field = self.field
        prov: dict = {}
        if self.char0:
            suffix = [Fraction(1)] * (len(events) + 1)
            for s in range(len(events) - 1, -1, -1):
                suffix[s] = suffix[s + 1] * events[s][0]
            total = suffix[0]
            for key, poly in base.items():
                prov[key] = poly.scale(total * gamma_inv)
            for s, (a, gid, q, shift) in enumerate(events):
                key = ("el", gid)
                add = self._mono(Fraction(-q) * suffix[s + 1] * gamma_inv, shift)
                prov[key] = prov.get(key, CoeffPoly.zero(self.vars, field)) + add
        else:
            for key, poly in base.items():
                prov[key] = poly.scale(gamma_inv)
            for gid, q, shift in events:
                key = ("el", gid)
                add = self._mono(field.mul(field.neg(q), gamma_inv), shift)
                prov[key] = prov.get(key, CoeffPoly.zero(self.vars, field)) + add
        return {k: v for k, v in prov.items() if not v.is_zero()}

    def _reduce_new(self, start_terms: dict, base: dict):
        """Fully reduce start_terms against the current basis, normalize and
        register the result.  Returns the new element id or None if zero."""
        if self.char0:
            rem, events = _reduce_int(start_terms, self._entries(), self.order)
            if not rem:
                return None
            rem, g = _int_content_normalize(rem, self.order)
            gamma_inv = Fraction(1, g)
            prov = self._assemble_prov(base, events, gamma_inv)
        else:
            rem, events = _reduce_modp(start_terms, self._entries(), self.order, self.p)
            if not rem:
                return None
            lt = max(rem, key=self.order.key)
            inv = self.field.inv(rem[lt])
            rem = {e: (c * inv) % self.p for e, c in rem.items()}
            prov = self._assemble_prov(base, events, inv)
        return self._add_element(rem, prov)

    # -- main loop

    def run(self):
        order = self.order
        pairs: set[tuple[int, int]] = set()
        heap: list = []

        def push_pair(i, j):
            lcm = _monomial_lcm(self.lts[i], self.lts[j])
            heapq.heappush(heap, (sum(lcm), j, i))
            pairs.add((i, j))

        def gm_update(new):
            t_new = self.lts[new]
            for (i, j) in list(pairs):
                lcm_ij = _monomial_lcm(self.lts[i], self.lts[j])
                if (
                    _divides(t_new, lcm_ij)
                    and _monomial_lcm(self.lts[i], t_new) != lcm_ij
                    and _monomial_lcm(self.lts[j], t_new) != lcm_ij
                ):
                    pairs.discard((i, j))
            cand = [i for i in range(new) if self.alive[i]]
            lcms = {i: _monomial_lcm(self.lts[i], t_new) for i in cand}
            kept = []
            for i in cand:
                li = lcms[i]
                if any(_divides(lcms[j], li) and lcms[j] != li for j in cand if j != i):
                    continue
                kept.append(i)
            by_lcm: dict[tuple, list[int]] = {}
            for i in kept:
                by_lcm.setdefault(lcms[i], []).append(i)
            for lcm, members in sorted(by_lcm.items(), key=lambda kv: (sum(kv[0]), kv[0])):
                if any(
                    all(a == 0 or b == 0 for a, b in zip(self.lts[i], t_new))
                    for i in members
                ):
                    continue
                push_pair(min(members), new)
            for i in cand:
                if _divides(t_new, self.lts[i]):
                    self.alive[i] = False

        for i, f in enumerate(self.inputs):
            pid = self._register_input(i, f)
            if pid is None:
                continue
            if self.unit_id is not None and self.stop_on_unit:
                return
            gm_update(pid)

        while heap:
            _, j, i = heapq.heappop(heap)
            if (i, j) not in pairs:
                continue
            pairs.discard((i, j))
            self.pairs_processed += 1
            lcm = _monomial_lcm(self.lts[i], self.lts[j])
            mi = _monomial_div(lcm, self.lts[i])
            mj = _monomial_div(lcm, self.lts[j])
            if self.char0:
                lci, lcj = self.lcs[i], self.lcs[j]
                d = math.gcd(lci, lcj)
                ai, aj = lcj // d, lci // d
                s: dict = {}
                for e, c in self.work[i].items():
                    s[_monomial_mul(e, mi)] = ai * c
                for e, c in self.work[j].items():
                    tgt = _monomial_mul(e, mj)
                    v = s.get(tgt, 0) - aj * c
                    if v:
                        s[tgt] = v
                    else:
                        s.pop(tgt, None)
                base = {
                    ("el", i): self._mono(Fraction(ai), mi),
                    ("el", j): self._mono(Fraction(-aj), mj),
                }
            else:
                s = {}
                for e, c in self.work[i].items():
                    s[_monomial_mul(e, mi)] = c
                for e, c in self.work[j].items():
                    tgt = _monomial_mul(e, mj)
                    v = (s.get(tgt, 0) - c) % self.p
                    if v:
                        s[tgt] = v
                    else:
                        s.pop(tgt, None)
                base = {
                    ("el", i): self._mono(self.field.one, mi),
                    ("el", j): self._mono(self.field.neg(self.field.one), mj),
                }
            if not s:
                continue
            pid = self._reduce_new(s, base)
            if pid is None:
                continue
            if self.unit_id is not None and self.stop_on_unit:
                return
            gm_update(pid)

    # -- reduced basis with provenance

    def reduced_basis_ids(self) -> list[tuple[CoeffPoly, int]]:
        """Minimal, fully interreduced, monic basis as (poly, id) pairs;
        interreduction results are registered as provenated elements."""
        order, field = self.order, self.field
        if self.unit_id is not None:
            c = self.value(self.unit_id).constant_value()
            one = self._const(field.one)
            pid = self._add_element(
                {(0,) * len(self.vars): 1},
                {("el", self.unit_id): self._const(field.inv(c))},
            )
            return [(one, pid)]
        chosen: list[int] = []
        ids = [i for i in range(len(self.work)) if self.alive[i]]
        ids.sort(key=lambda i: (order.key(self.lts[i]), i))
        for i in ids:
            if any(_divides(self.lts[j], self.lts[i]) for j in chosen):
                continue
            chosen = [j for j in chosen if not _divides(self.lts[i], self.lts[j])]
            chosen.append(i)
        chosen.sort(key=lambda i: order.key(self.lts[i]))
        out: list[tuple[CoeffPoly, int]] = []
        for i in chosen:
            others = [j for j in chosen if j != i]
            if self.char0:
                entries = [
                    (self.lts[j], sum(self.lts[j]), self.lcs[j], self.work[j], j)
                    for j in others
                ]
                rem, events = _reduce_int(dict(self.work[i]), entries, order)
                lt = max(rem, key=order.key)
                lc = Fraction(rem[lt])
                # suffix products were applied to work[i] too: value = A*w_i - sum(...)
                base = {("el", i): self._const(Fraction(1))}
                prov = self._assemble_prov(base, events, 1 / lc)
                mterms = {e: Fraction(c) / lc for e, c in rem.items()}
            else:
                entries = [
                    (self.lts[j], sum(self.lts[j]), self.work[j], j) for j in others
                ]
                rem, events = _reduce_modp(dict(self.work[i]), entries, order, self.p)
                lt = max(rem, key=order.key)
                inv = field.inv(rem[lt])
                base = {("el", i): self._const(field.one)}
                prov = self._assemble_prov(base, events, inv)
                mterms = {e: (c * inv) % self.p for e, c in rem.items()}
            poly = CoeffPoly(self.vars, field, mterms)
            pid = len(self.work)
            self.work.append({})  # reduced-basis values kept as CoeffPoly only
            self.prov.append(prov)
            self.lts.append(lt)
            self.lcs.append(1)
            self.alive.append(False)
            out.append((poly, pid))
        out.sort(key=lambda t: order.key(t[0].leading(order)[0]))
        return out

    # -- cofactor expansion

    def cofactors(self, pid: int) -> dict[int, CoeffPoly]:
        """Express working element pid exactly over the original inputs."""
        needed = []
        seen = {pid}
        stack = [pid]
        while stack:
            k = stack.pop()
            needed.append(k)
            for src in self.prov[k]:
                if src[0] == "el" and src[1] not in seen and src[1] not in self._cof_cache:
                    seen.add(src[1])
                    stack.append(src[1])
        zero = CoeffPoly.zero(self.vars, self.field)
        for k in sorted(needed):
            if k in self._cof_cache:
                continue
            acc: dict[int, CoeffPoly] = {}
            for src, mult in self.prov[k].items():
                if src[0] == "in":
                    i = src[1]
                    acc[i] = acc.get(i, zero) + mult
                else:
                    for i, c in self._cof_cache[src[1]].items():
                        acc[i] = acc.get(i, zero) + mult * c
            self._cof_cache[k] = {i: c for i, c in acc.items() if not c.is_zero()}
        return self._cof_cache[pid]


# ---------------------------------------------------------------------------
# public operations


def buchberger(F: list[CoeffPoly], order: MonomialOrder, lift: bool = False):
    """Gröbner basis of <F>; with ``lift`` also cofactor rows T with
    G[j] == sum(T[j][i] * F[i]).

    The returned basis is reduced (minimal, interreduced, monic), hence
    unique for the ideal and order.  Empty or all-zero input yields [].
    """
    F_nz = [f for f in F if not f.is_zero()]
    if not F_nz:
        return ([], [] if lift else None)
    index_map = [i for i, f in enumerate(F) if not f.is_zero()]
    eng = _Engine(F_nz, order)
    eng.run()
    basis = eng.reduced_basis_ids()
    G = [p for p, _ in basis]
    if not lift:
        return G, None
    rows = []
    for _, pid in basis:
        cof = eng.cofactors(pid)
        rows.append({index_map[i]: c for i, c in cof.items()})
    return G, rows


def reduce_basis(G: list[CoeffPoly], order: MonomialOrder) -> list[CoeffPoly]:
    """Unique monic reduced basis of the ideal generated by the Gröbner
    basis G; idempotent."""
    G = [g for g in G if not g.is_zero()]
    if not G:
        return []
    field = G[0].field
    lts = [g.leading(order)[0] for g in G]
    keep = []
    for i in range(len(G)):
        if any(
            _divides(lts[j], lts[i]) and (lts[j] != lts[i] or j < i)
            for j in range(len(G))
            if j != i
        ):
            continue
        keep.append(i)
    out = []
    for i in keep:
        others = [G[j] for j in keep if j != i]
        if others:
            rem, _ = normal_form(G[i], others, order)
        else:
            rem = G[i]
        if rem.is_zero():
            continue
        _, lc = rem.leading(order)
        out.append(rem.scale(field.inv(lc)))
    out.sort(key=lambda p: order.key(p.leading(order)[0]))
    return out


def s_polynomial(f: CoeffPoly, g: CoeffPoly, order: MonomialOrder) -> CoeffPoly:
    ltf, lcf = f.leading(order)
    ltg, lcg = g.leading(order)
    lcm = _monomial_lcm(ltf, ltg)
    field = f.field
    return f.mul_term(field.inv(lcf), _monomial_div(lcm, ltf)) - g.mul_term(
        field.inv(lcg), _monomial_div(lcm, ltg)
    )


def is_groebner_basis(G: list[CoeffPoly], order: MonomialOrder) -> bool:
    """Direct Buchberger criterion: every S-polynomial reduces to zero."""
    G = [g for g in G if not g.is_zero()]
    for i in range(len(G)):
        for j in range(i + 1, len(G)):
            s = s_polynomial(G[i], G[j], order)
            if s.is_zero():
                continue
            rem, _ = normal_form(s, G, order)
            if not rem.is_zero():
                return False
    return True


# ---------------------------------------------------------------------------
# certificates


@dataclass
class Certificate:
    """Self-contained witness that target == sum(cofactors[i]*generators[i])."""

    field: Field
    order: MonomialOrder
    generators: list[CoeffPoly]
    cofactors: list[CoeffPoly]
    target: CoeffPoly

    def __post_init__(self):
        if len(self.cofactors) != len(self.generators):
            raise ValueError("cofactor count must equal generator count")


def certify_inconsistency(F: list[CoeffPoly], order: MonomialOrder) -> Certificate:
    """Produce cofactors writing 1 as a combination of F.

    Raises ConsistentSystemError when the reduced basis is not {1}.
    """
    F = list(F)
    F_nz = [f for f in F if not f.is_zero()]
    if not F_nz:
        raise ConsistentSystemError("empty system generates the zero ideal")
    index_map = [i for i, f in enumerate(F) if not f.is_zero()]
    eng = _Engine(F_nz, order)
    eng.run()
    basis = eng.reduced_basis_ids()
    if len(basis) != 1 or not basis[0][0].is_constant():
        raise ConsistentSystemError("system is consistent: reduced basis is not {1}")
    one, pid = basis[0]
    cof = eng.cofactors(pid)
    field = F_nz[0].field
    zero = CoeffPoly.zero(F_nz[0].vars, field)
    by_orig = {index_map[i]: c for i, c in cof.items()}
    cofactors = [by_orig.get(i, zero) for i in range(len(F))]
    return Certificate(field, order, F, cofactors, one)


def verify_certificate(cert: Certificate):
    """Independent re-check by direct polynomial arithmetic only.

    Returns (valid, diff) where diff = recomputed - target.
    """
    acc = CoeffPoly.zero(cert.target.vars, cert.field)
    for c, f in zip(cert.cofactors, cert.generators):
        acc += c * f
    diff = acc - cert.target
    return diff.is_zero(), diff


def integer_member(F: list[CoeffPoly], order: MonomialOrder):
    """A positive integer m in <F> with integer-coefficient cofactors,
    obtained from a unit certificate by clearing the lcm of all cofactor
    denominators.  Returns (m, cofactors)."""
    cert = certify_inconsistency(F, order)
    if cert.field.characteristic != 0:
        raise ValueError("integer membership is a rational-coefficient operation")
    den_lcm = 1
    for c in cert.cofactors:
        for v in c.terms.values():
            den_lcm = den_lcm * v.denominator // math.gcd(den_lcm, v.denominator)
    m = den_lcm
    cofactors = [c.scale(Fraction(m)) for c in cert.cofactors]
    return m, cofactors


@dataclass
class CharTransferReport:
    """Outcome of comparing two unit-multiple constants.

    ``primes`` lists primes that need a direct modular recheck;
    ``remainder`` is what is left of gcd(m, m2) after stripping factors of 2
    (and small trial primes) and equals 1 in the intended scenario.
    """

    gcd: int
    two_exponent: int
    remainder: int
    primes: list[int]
    small_prime_factors: dict[int, int] = dc_field(default_factory=dict)


def char_transfer(m: int, m2: int, trial_bound: int = 10000) -> CharTransferReport:
    """gcd the two constants and strip factors of 2 (plus small trial
    primes); any prime left in the gcd needs its own modular rerun."""
    if m <= 0 or m2 <= 0:
        raise ValueError("constants must be positive")
    g = gcd(m, m2)
    primes = []
    small: dict[int, int] = {}
    rem, k = g, 0
    if g > 1:
        rem, k = strip_factor(g, 2)
        if k:
            primes.append(2)
            small[2] = k
        p = 3
        while p <= trial_bound and rem > 1:
            if rem % p == 0:
                rem, kp = strip_factor(rem, p)
                primes.append(p)
                small[p] = kp
            p += 2
    return CharTransferReport(g, k, rem, primes, small)


# ---------------------------------------------------------------------------
# certificate file format (plain text, self-contained)


def certificate_to_text(cert: Certificate) -> str:
    lines = [
        f"characteristic {cert.field.characteristic}",
        "vars " + " ".join(cert.target.vars),
        "order " + cert.order.spec(),
        "target " + poly_to_text(cert.target, cert.order),
        f"generators {len(cert.generators)}",
    ]
    lines += [poly_to_text(g, cert.order) for g in cert.generators]
    lines.append(f"cofactors {len(cert.cofactors)}")
    lines += [poly_to_text(c, cert.order) for c in cert.cofactors]
    return "\n".join(lines) + "\n"


def certificate_from_text(text: str) -> Certificate:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    it = iter(lines)

    def expect(prefix):
        try:
            ln = next(it)
        except StopIteration:
            raise ValueError("malformed certificate: truncated file") from None
        if not ln.startswith(prefix):
            raise ValueError(f"malformed certificate: expected {prefix!r}, got {ln!r}")
        return ln[len(prefix):].strip()

    char = int(expect("characteristic"))
    field = field_for_characteristic(char)
    vars = tuple(expect("vars").split())
    order = MonomialOrder.from_spec(expect("order"), vars)
    target = poly_from_text(expect("target"), vars, field)
    n = int(expect("generators"))
    try:
        generators = [poly_from_text(next(it), vars, field) for _ in range(n)]
        k = int(expect("cofactors"))
        cofactors = [poly_from_text(next(it), vars, field) for _ in range(k)]
    except StopIteration:
        raise ValueError("malformed certificate: truncated file") from None
    return Certificate(field, order, generators, cofactors, target)


# ---------------------------------------------------------------------------
# small zero-dimensional solver (two variables)


def _univariate_rational_roots(p: CoeffPoly, var: str) -> list[Fraction]:
    """Rational roots of a univariate rational polynomial (rational root
    test; exact)."""
    i = list(p.vars).index(var)
    if any(e[j] for e in p.terms for j in range(len(p.vars)) if j != i):
        raise ValueError("polynomial is not univariate in " + var)
    coeffs: dict[int, Fraction] = {e[i]: c for e, c in p.terms.items()}
    if not coeffs:
        raise ValueError("zero polynomial has every root")
    den = 1
    for c in coeffs.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    ic = {k: int(c * den) for k, c in coeffs.items()}
    roots: list[Fraction] = []
    if min(ic) > 0:
        roots.append(Fraction(0))
        low = min(ic)
        ic = {k - low: v for k, v in ic.items()}
    deg = max(ic)
    lead, trail = ic[deg], ic.get(0, 0)
    if deg == 0:
        return roots

    def divisors(n):
        n = abs(n)
        out = set()
        d = 1
        while d * d <= n:
            if n % d == 0:
                out.add(d)
                out.add(n // d)
            d += 1
        return out

    for a in sorted(divisors(trail)):
        for b in sorted(divisors(lead)):
            for cand in (Fraction(a, b), Fraction(-a, b)):
                if cand in roots:
                    continue
                if sum(c * cand**k for k, c in ic.items()) == 0:
                    roots.append(cand)
    return sorted(roots)


def solve_two_variable_system(F: list[CoeffPoly]):
    """All rational solutions of a zero-dimensional system in two rational
    variables, via lex elimination and the rational root test.

    Returns a sorted list of (a, b) Fraction pairs.  Raises when the system
    is inconsistent or not zero-dimensional.
    """
    if not F or F[0].field.characteristic != 0 or len(F[0].vars) != 2:
        raise ValueError("expects rational polynomials in exactly two variables")
    vars = F[0].vars
    order = MonomialOrder.lex(vars)
    G, _ = buchberger(F, order)
    if G and G[0].is_constant():
        raise ValueError("system is inconsistent")
    lts = [g.leading(order)[0] for g in G]
    for i in range(2):
        if not any(e[i] > 0 and e[1 - i] == 0 for e in lts):
            raise ValueError("system is not zero-dimensional")
    uni = [g for g in G if all(e[0] == 0 for e in g.terms)]
    points = []
    for b in _univariate_rational_roots(uni[0], vars[1]):
        cands: set[Fraction] = set()
        for g in G:
            s = g.substitute_var(vars[1], b)
            if not s.is_zero() and all(e[1] == 0 for e in s.terms) and any(
                e[0] > 0 for e in s.terms
            ):
                cands.update(_univariate_rational_roots(s, vars[0]))
                break
        for a in sorted(cands):
            if all(f.evaluate({vars[0]: a, vars[1]: b}) == 0 for f in F):
                points.append((a, b))
    return sorted(set(points))
