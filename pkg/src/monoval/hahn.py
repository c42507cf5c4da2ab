"""Generalized power series streams with exponents in Z^m (lex order).

A stream is a finite list of closed-form segments:

* ``FiniteTerms``: finitely many (exponent, coefficient) pairs;
* ``APFamily``: the infinite (or index-bounded) sum of
  ``c * i^e * r^i * t^(start + (i-1)*step)`` for i = 1, 2, ...,
  with step >_lex 0 so the support stays well ordered.

This class of segments is the smallest one closed under the
operations the monomialization procedure needs: it covers both
tails of the worked four-variable example (coefficient rules ``i``
and ``u3^(3*i)``), survives scalar multiplication and monomial
shifts unchanged, and a family with its head removed is again a sum
of at most e+1 families (binomial re-indexing).

Enumeration merges segments lazily in increasing lex order, summing
coefficients of equal exponents and skipping terms that vanish (in
characteristic p the family rule kills indices divisible by p).
Each stream carries ``cert``, an exclusive lex bound below which its
term data is trustworthy; products of two infinite families and
geometric inversions are certified only up to a computable bound,
and every query past a budget or certification horizon raises
InconclusiveError rather than guessing.
"""

import heapq
from dataclasses import dataclass, replace
from math import comb

from .errors import InconclusiveError
from .lexgroup import (
    INFINITY,
    is_lex_positive,
    lex_cmp,
    lex_min,
    vadd,
    vscale,
    vsub,
)


class NoLimitError(ValueError):
    """The requested family does not sit isolated at the head of the
    stream, so no limit step applies."""


@dataclass(frozen=True)
class Budget:
    """Enumeration limits: max_terms per stream, a total work bound
    (raw candidate terms processed), an optional global lex ceiling,
    and the depth of geometric inverse expansions."""

    max_terms: int = 256
    lex_ceiling: object = None
    inv_depth: int = 16

    @property
    def work(self):
        return self.max_terms * 64


DEFAULT_BUDGET = Budget()


@dataclass(frozen=True)
class FiniteTerms:
    """Strictly increasing (exponent, coefficient) pairs, coefficients
    nonzero.  Built through canonicalization only."""

    terms: tuple

    def first_exponent(self):
        return self.terms[0][0]


@dataclass(frozen=True)
class APFamily:
    """Sum over i of  c * i^e * r^i  at exponent start + (i-1)*step.

    count is None for an infinite family, else the last index N.
    """

    start: tuple
    step: tuple
    c: object
    e: int = 0
    r: object = None
    count: object = None

    def __post_init__(self):
        if not is_lex_positive(self.step):
            raise ValueError("family step %r must be lex-positive"
                             % (self.step,))
        if self.e < 0:
            raise ValueError("negative index power")
        if self.count is not None and self.count < 1:
            raise ValueError("empty index range")
        if len(self.start) != len(self.step):
            raise ValueError("start and step rank differ")

    def exponent(self, i):
        return vadd(self.start, vscale(i - 1, self.step))

    def coeff(self, i):
        tower = self.c.tower
        out = self.c * (self.r ** i)
        if self.e:
            out = out * (tower.from_int(i) ** self.e)
        return out

    def first_exponent(self):
        return self.start

    def head_coeff(self):
        return self.coeff(1)

    def scaled(self, beta):
        return replace(self, c=self.c * beta)

    def shifted(self, exp):
        return replace(self, start=vadd(self.start, exp))

    def advanced(self):
        """Head term plus the rest as a list of families: re-index
        i -> i+1 and expand (i+1)^e binomially."""
        head = (self.exponent(1), self.head_coeff())
        tail_count = None if self.count is None else self.count - 1
        tails = []
        if tail_count is None or tail_count >= 1:
            base = self.c * self.r
            for k in range(self.e + 1):
                ck = base * comb(self.e, k)
                tails.append(APFamily(vadd(self.start, self.step), self.step,
                                      ck, k, self.r, tail_count))
        return head, tails


_EXPAND_LIMIT = 100000


def _canonical(segments):
    """Merge finite parts, expand bounded families, group infinite
    families by (start, step, e, r), drop zero coefficients, and
    order segments deterministically."""
    finite = {}
    fams = {}

    def add_finite(exp, co):
        if exp in finite:
            s = finite[exp] + co
            if s.is_zero:
                del finite[exp]
            else:
                finite[exp] = s
        elif not co.is_zero:
            finite[exp] = co

    for seg in segments:
        if isinstance(seg, FiniteTerms):
            for exp, co in seg.terms:
                add_finite(tuple(exp), co)
        elif isinstance(seg, APFamily):
            if seg.c.is_zero or seg.r is None or seg.r.is_zero:
                continue
            if seg.count is not None:
                if seg.count > _EXPAND_LIMIT:
                    raise ValueError("bounded family too large to expand")
                for i in range(1, seg.count + 1):
                    co = seg.coeff(i)
                    if not co.is_zero:
                        add_finite(seg.exponent(i), co)
            else:
                key = (seg.start, seg.step, seg.e, seg.r)
                if key in fams:
                    fams[key] = fams[key] + seg.c
                else:
                    fams[key] = seg.c
        else:
            raise TypeError("unknown segment %r" % (seg,))

    out = []
    if finite:
        out.append(FiniteTerms(tuple(sorted(finite.items()))))
    for (start, step, e, r), c in fams.items():
        if not c.is_zero:
            out.append(APFamily(start, step, c, e, r, None))
    out.sort(key=_segment_sort_key)
    return tuple(out)


def _segment_sort_key(seg):
    if isinstance(seg, FiniteTerms):
        return (seg.first_exponent(), 0, (), 0, "")
    return (seg.start, 1, seg.step, seg.e, str(seg.r))


def _finite_iter(seg):
    return iter(seg.terms)


def _family_iter(seg):
    i = 1
    rpow = seg.r
    while seg.count is None or i <= seg.count:
        co = seg.c * rpow
        if seg.e:
            co = co * (seg.c.tower.from_int(i) ** seg.e)
        if not co.is_zero:
            yield seg.exponent(i), co
        i += 1
        rpow = rpow * seg.r


class HahnStream:
    """Canonical segment list plus a memoized enumeration prefix.

    A stream memoizes internally and is confined to one thread at a
    time; the segment data itself is immutable.
    """

    __slots__ = ("segments", "cert", "_prefix", "_iter", "_done",
                 "_cert_blocked", "_work", "_work_limit", "_blown")

    def __init__(self, segments=(), cert=INFINITY):
        self.segments = _canonical(segments)
        self.cert = cert
        self._prefix = []
        self._iter = None
        self._done = False
        self._cert_blocked = False
        self._work = 0
        self._work_limit = None
        self._blown = False

    @classmethod
    def zero(cls):
        return cls(())

    @classmethod
    def single(cls, exp, coeff):
        if coeff.is_zero:
            return cls(())
        return cls((FiniteTerms(((tuple(exp), coeff),)),))

    @property
    def is_structurally_zero(self):
        return not self.segments

    def structural_min(self):
        """Smallest exponent any segment could emit (a lower bound for
        nu_t); None for a structurally empty stream."""
        if not self.segments:
            return None
        return min(seg.first_exponent() for seg in self.segments)

    def as_single_term(self):
        """(exp, coeff) when the stream is exactly one certain term."""
        if (self.cert is INFINITY and len(self.segments) == 1
                and isinstance(self.segments[0], FiniteTerms)
                and len(self.segments[0].terms) == 1):
            return self.segments[0].terms[0]
        return None

    def _tick(self):
        """Charge one unit of enumeration work; aborts the merge when
        the caller's budget runs out mid-stride (long cancellation
        plateaus would otherwise spin between yields)."""
        self._work += 1
        if self._work_limit is not None and self._work > self._work_limit:
            self._blown = True
            raise InconclusiveError("enumeration work budget exhausted")

    def _merge(self):
        heap = []
        seq = 0
        for seg in self.segments:
            it = _finite_iter(seg) if isinstance(seg, FiniteTerms) \
                else _family_iter(seg)
            first = next(it, None)
            self._tick()
            if first is not None:
                heap.append((first[0], seq, first[1], it))
                seq += 1
        heapq.heapify(heap)
        last = None
        while heap:
            exp, _, co, it = heapq.heappop(heap)
            self._tick()
            total = co
            while heap and heap[0][0] == exp:
                _, _, co2, it2 = heapq.heappop(heap)
                self._tick()
                total = total + co2
                nxt = next(it2, None)
                if nxt is not None:
                    heapq.heappush(heap, (nxt[0], seq, nxt[1], it2))
                    seq += 1
            nxt = next(it, None)
            if nxt is not None:
                heapq.heappush(heap, (nxt[0], seq, nxt[1], it))
                seq += 1
            if total.is_zero:
                continue
            if self.cert is not INFINITY and lex_cmp(exp, self.cert) >= 0:
                self._cert_blocked = True
                return
            assert last is None or lex_cmp(last, exp) < 0
            last = exp
            yield exp, total

    def _ensure(self, k, budget):
        """Extend the memoized prefix to k terms if possible.  Returns
        True when k terms are available, False when the stream ended
        before k terms; raises InconclusiveError on any budget or
        certification stop."""
        while len(self._prefix) < k:
            if self._done:
                return False
            if self._cert_blocked:
                raise InconclusiveError(
                    "stream not certified beyond %r" % (self.cert,))
            if len(self._prefix) >= budget.max_terms:
                raise InconclusiveError(
                    "term budget %d exhausted" % budget.max_terms)
            if self._blown or self._work > budget.work:
                raise InconclusiveError("enumeration work budget exhausted")
            if self._iter is None:
                self._iter = self._merge()
            self._work_limit = budget.work
            term = next(self._iter, None)
            if term is None:
                if not self._cert_blocked:
                    self._done = True
                continue
            self._prefix.append(term)
        return True

    def __repr__(self):
        parts = []
        for seg in self.segments[:4]:
            if isinstance(seg, FiniteTerms):
                parts.append("terms<%d>" % len(seg.terms))
            else:
                parts.append("family@%r" % (seg.start,))
        if len(self.segments) > 4:
            parts.append("...")
        cert = "" if self.cert is INFINITY else " cert<%r" % (self.cert,)
        return "<stream %s%s>" % (" + ".join(parts) or "0", cert)


def _guard_ceiling(terms, budget):
    if budget.lex_ceiling is None:
        return
    for exp, _ in terms:
        if lex_cmp(exp, budget.lex_ceiling) > 0:
            raise InconclusiveError(
                "term %r lies above the lex ceiling %r"
                % (exp, budget.lex_ceiling))


def nu_t(s, budget=DEFAULT_BUDGET):
    """Exponent of the first nonzero term; INFINITY when the stream
    provably has none."""
    if s._ensure(1, budget):
        _guard_ceiling(s._prefix[:1], budget)
        return s._prefix[0][0]
    return INFINITY


def leading_term(s, budget=DEFAULT_BUDGET):
    """(exponent, coefficient) of the first term, or None when the
    stream is provably zero."""
    if s._ensure(1, budget):
        _guard_ceiling(s._prefix[:1], budget)
        return s._prefix[0]
    return None


def first_terms(s, k, budget=DEFAULT_BUDGET):
    """The first k enumerated terms (fewer when the stream ends)."""
    have = s._ensure(k, budget)
    out = list(s._prefix[:k] if have else s._prefix)
    _guard_ceiling(out, budget)
    return out


def add(a, b):
    return HahnStream(a.segments + b.segments, lex_min(a.cert, b.cert))


def neg(a):
    segs = []
    for seg in a.segments:
        if isinstance(seg, FiniteTerms):
            segs.append(FiniteTerms(tuple((e, -c) for e, c in seg.terms)))
        else:
            segs.append(replace(seg, c=-seg.c))
    return HahnStream(tuple(segs), a.cert)


def sub(a, b):
    return add(a, neg(b))


def scale(a, beta):
    if beta.is_zero:
        return HahnStream(())
    segs = []
    for seg in a.segments:
        if isinstance(seg, FiniteTerms):
            segs.append(FiniteTerms(tuple((e, c * beta) for e, c in seg.terms)))
        else:
            segs.append(seg.scaled(beta))
    return HahnStream(tuple(segs), a.cert)


def term_mul(a, coeff, exp):
    """Multiply by the single term coeff * t^exp."""
    if coeff.is_zero:
        return HahnStream(())
    segs = []
    for seg in a.segments:
        if isinstance(seg, FiniteTerms):
            segs.append(FiniteTerms(tuple((vadd(e, exp), c * coeff)
                                          for e, c in seg.terms)))
        else:
            segs.append(seg.scaled(coeff).shifted(exp))
    cert = a.cert if a.cert is INFINITY else vadd(a.cert, exp)
    return HahnStream(tuple(segs), cert)


_PREFIX_CACHE = {}


def _family_prefix(fam, k):
    """First k nonzero terms of a family plus the exponent of the
    first unexamined index (INFINITY when the family is exhausted)."""
    key = (fam, k)
    hit = _PREFIX_CACHE.get(key)
    if hit is not None:
        return hit
    terms = []
    i = 1
    rpow = fam.r
    nxt = INFINITY
    while fam.count is None or i <= fam.count:
        if len(terms) >= k:
            nxt = fam.exponent(i)
            break
        co = fam.c * rpow
        if fam.e:
            co = co * (fam.c.tower.from_int(i) ** fam.e)
        if not co.is_zero:
            terms.append((fam.exponent(i), co))
        i += 1
        rpow = rpow * fam.r
    out = (tuple(terms), nxt)
    _PREFIX_CACHE[key] = out
    return out


_BOX_CACHE = {}


def _family_box(fa, fb, budget):
    """Product of two infinite families over a bounded index box,
    certified up to the smallest exponent possibly omitted."""
    k = min(budget.max_terms, 12)
    key = (fa, fb, k, budget.max_terms)
    hit = _BOX_CACHE.get(key)
    if hit is not None:
        return hit
    ta, na = _family_prefix(fa, k)
    tb, nb = _family_prefix(fb, k)
    prods = {}
    for ea, ca in ta:
        for eb, cb in tb:
            e = vadd(ea, eb)
            co = ca * cb
            if e in prods:
                s = prods[e] + co
                if s.is_zero:
                    del prods[e]
                else:
                    prods[e] = s
            elif not co.is_zero:
                prods[e] = co
    cert = INFINITY
    if na is not INFINITY:
        cert = lex_min(cert, vadd(na, fb.start))
    if nb is not INFINITY:
        cert = lex_min(cert, vadd(nb, fa.start))
    kept = sorted((e, c) for e, c in prods.items()
                  if cert is INFINITY or lex_cmp(e, cert) < 0)
    if len(kept) > budget.max_terms:
        # keep the stream small; everything past the cut is still
        # accounted for by the (now earlier) certificate
        cert = kept[budget.max_terms][0]
        kept = kept[:budget.max_terms]
    segs = (FiniteTerms(tuple(kept)),) if kept else ()
    out = HahnStream(segs, cert)
    _BOX_CACHE[key] = out
    return out


def _cap_cert(stream, cap):
    if cap is INFINITY:
        return stream
    return HahnStream(stream.segments, lex_min(stream.cert, cap))


_SEGMENT_CAP = 24
_HOSTILE_WEIGHT = 16
_HOSTILE_KEEP = 8


def _hostile(seg):
    """An unbounded family is cheap to enumerate only when its ratio
    is a monomial quotient (so r^i never gains terms) and its scale
    coefficient stays small.  Anything else pays a growing polynomial
    gcd per term."""
    return (isinstance(seg, APFamily) and seg.count is None
            and (seg.r.weight > 2 or seg.c.weight > _HOSTILE_WEIGHT))


def _expand_hostile(stream, budget):
    """Replace families whose closed-form coefficients have grown into
    large rational functions with short certified prefixes.  Computing
    c * r^i for such a family costs a large polynomial gcd per term,
    so enumerating or boxing it deeply is never worth the exactness."""
    segs = []
    cert = stream.cert
    changed = False
    for seg in stream.segments:
        if _hostile(seg):
            changed = True
            terms = []
            for i in range(1, _HOSTILE_KEEP + 1):
                co = seg.coeff(i)
                if not co.is_zero:
                    terms.append((seg.exponent(i), co))
            if terms:
                segs.append(FiniteTerms(tuple(terms)))
            cert = lex_min(cert, seg.exponent(_HOSTILE_KEEP + 1))
        else:
            segs.append(seg)
    if not changed:
        return stream
    return HahnStream(tuple(segs), cert)


def _compact(stream, budget):
    """Bound the retained representation by the term budget; dropped
    terms are covered by lowering the certificate to the first
    exponent cut off.  Also sheds structure at or past the
    certificate, which is untrusted anyway, and flattens streams
    whose segment count would make further arithmetic quadratic."""
    stream = _expand_hostile(stream, budget)
    if stream.cert is not INFINITY:
        segs = []
        changed = False
        for seg in stream.segments:
            if lex_cmp(seg.first_exponent(), stream.cert) >= 0:
                changed = True
                continue
            if isinstance(seg, FiniteTerms):
                kept = tuple(t for t in seg.terms
                             if lex_cmp(t[0], stream.cert) < 0)
                if len(kept) != len(seg.terms):
                    changed = True
                    if kept:
                        segs.append(FiniteTerms(kept))
                    continue
            segs.append(seg)
        if changed:
            stream = HahnStream(tuple(segs), stream.cert)
    for k, seg in enumerate(stream.segments):
        if isinstance(seg, FiniteTerms) and \
                len(seg.terms) > budget.max_terms:
            cut = seg.terms[budget.max_terms][0]
            kept = FiniteTerms(seg.terms[:budget.max_terms])
            segs = (stream.segments[:k] + (kept,)
                    + stream.segments[k + 1:])
            stream = HahnStream(segs, lex_min(stream.cert, cut))
            break
    if len(stream.segments) > _SEGMENT_CAP:
        try:
            stream = _flatten(stream, budget)
        except InconclusiveError:
            pass
    return stream


def mul(a, b, budget=DEFAULT_BUDGET):
    """Product stream.  Exact whenever at most one factor carries
    infinite families; family-by-family parts are certified up to
    their index-box bound."""
    if a.is_structurally_zero or b.is_structurally_zero:
        # a factor that is exactly zero (infinite cert) kills the
        # product outright; one that is merely zero-so-far caps the
        # certification at where its hidden terms could first land
        if a.is_structurally_zero and a.cert is INFINITY:
            return HahnStream(())
        if b.is_structurally_zero and b.cert is INFINITY:
            return HahnStream(())
        if a.is_structurally_zero and b.is_structurally_zero:
            return HahnStream((), vadd(a.cert, b.cert))
        if a.is_structurally_zero:
            return HahnStream((), vadd(a.cert, b.structural_min()))
        return HahnStream((), vadd(b.cert, a.structural_min()))

    sa = a.as_single_term()
    if sa is not None:
        return term_mul(b, sa[1], sa[0])
    sb = b.as_single_term()
    if sb is not None:
        return term_mul(a, sb[1], sb[0])

    fin_a = [seg for seg in a.segments if isinstance(seg, FiniteTerms)]
    fam_a = [seg for seg in a.segments if isinstance(seg, APFamily)]
    fin_b = [seg for seg in b.segments if isinstance(seg, FiniteTerms)]
    fam_b = [seg for seg in b.segments if isinstance(seg, APFamily)]

    parts = []
    for seg in fin_a:
        for exp, co in seg.terms:
            parts.append(term_mul(b, co, exp))
    if fam_a:
        # the family segments are exact closed forms; hidden mass of a
        # beyond a.cert is accounted for by the final cap below
        fam_a_stream = HahnStream(tuple(fam_a))
        for seg in fin_b:
            for exp, co in seg.terms:
                parts.append(term_mul(fam_a_stream, co, exp))
        for fa in fam_a:
            for fb in fam_b:
                parts.append(_family_box(fa, fb, budget))

    segs = []
    cert = INFINITY
    for p in parts:
        segs.extend(p.segments)
        cert = lex_min(cert, p.cert)
    total = HahnStream(tuple(segs), cert)
    cap = INFINITY
    if a.cert is not INFINITY:
        cap = lex_min(cap, vadd(a.cert, b.structural_min()))
    if b.cert is not INFINITY:
        cap = lex_min(cap, vadd(b.cert, a.structural_min()))
    return _compact(_cap_cert(total, cap), budget)


def inverse(s, budget=DEFAULT_BUDGET):
    """Multiplicative inverse via the certified leading term.

    Exact closed forms for a single term (monomial shift) and a
    binomial (geometric family); otherwise a truncated geometric
    expansion certified up to (depth+1) * nu(tail/lead).
    """
    lead = leading_term(s, budget)
    if lead is None:
        raise ZeroDivisionError("inverse of the zero stream")
    A, c = lead
    negA = vscale(-1, A)
    cinv = c ** -1

    single = s.as_single_term()
    if single is not None:
        return HahnStream.single(negA, cinv)

    # binomial fast path: exactly lead + one more certain term
    if s.cert is INFINITY and len(s.segments) == 1 and \
            isinstance(s.segments[0], FiniteTerms) and \
            len(s.segments[0].terms) == 2:
        (e1, c1), (e2, c2) = s.segments[0].terms
        ratio = -(c2 / c1)
        d = vsub(e2, e1)
        geo = APFamily(vadd(negA, d), d, cinv, 0, ratio, None)
        return HahnStream((FiniteTerms(((negA, cinv),)), geo))

    # general: s = c t^A (1 + rho), invert the unit by geometric sums.
    # The expansion only has to be certified deep enough, not wide, so
    # it runs under a tight term cap of its own.
    tight = budget if budget.max_terms <= 64 else \
        replace(budget, max_terms=64)
    if any(isinstance(seg, APFamily) for seg in s.segments):
        # working from a certified finite prefix keeps every power in
        # the expansion finite, so no family boxes pile up below
        s = _flatten(s, tight)
    rho = _compact(term_mul(sub(s, HahnStream.single(A, c)), cinv, negA),
                   tight)
    v_rho = nu_t(rho, budget)
    if v_rho is INFINITY:
        return HahnStream.single(negA, cinv)
    if not is_lex_positive(v_rho):
        raise InconclusiveError("tail does not shrink: nu %r" % (v_rho,))
    depth = budget.inv_depth
    acc = HahnStream.single((0,) * len(A), c.tower.one)
    power = acc
    neg_rho = neg(rho)
    for _ in range(depth):
        power = mul(power, neg_rho, tight)
        if power.is_structurally_zero:
            # anything further lies at or past power.cert, which the
            # accumulated certificate already covers
            acc = add(acc, power)
            break
        acc = add(acc, power)
    cap = vscale(depth + 1, v_rho)
    acc = _cap_cert(acc, cap)
    return _compact(term_mul(acc, cinv, negA), budget)


def _flatten(s, budget):
    """Certified finite prefix of a stream, as plain terms.  The last
    enumerated exponent becomes the new certificate, so the result is
    trustworthy exactly as far as it is explicit.  Keeps the geometric
    expansion below finite even when the tail carries families."""
    s = _expand_hostile(s, budget)
    want = min(budget.max_terms, 24)
    terms = []
    exhausted = False
    while len(terms) < want:
        try:
            nxt = first_terms(s, len(terms) + 1, budget)
        except InconclusiveError:
            break
        if len(nxt) <= len(terms):
            terms = nxt
            exhausted = True
            break
        terms = nxt
    if exhausted:
        return HahnStream((FiniteTerms(tuple(terms)),) if terms else (),
                          s.cert)
    if not terms:
        raise InconclusiveError("no certified prefix to flatten")
    cut = terms[-1][0]
    return HahnStream((FiniteTerms(tuple(terms[:-1])),)
                      if len(terms) > 1 else (), cut)


def stream_pow(s, k, budget=DEFAULT_BUDGET):
    """Integer power; negative k inverts first."""
    if k == 0:
        term = s.as_single_term()
        tower = term[1].tower if term else _any_tower(s)
        return HahnStream.single((0,) * _rank(s), tower.one)
    single = s.as_single_term()
    if single is not None:
        exp, co = single
        return HahnStream.single(vscale(k, exp), co ** k)
    if k < 0:
        return stream_pow(inverse(s, budget), -k, budget)
    result = None
    base = s
    while True:
        if k & 1:
            result = base if result is None else mul(result, base, budget)
        k >>= 1
        if not k:
            break
        base = mul(base, base, budget)
    return result


def _rank(s):
    for seg in s.segments:
        return len(seg.first_exponent())
    raise ValueError("rank of an empty stream is undetermined")


def _any_tower(s):
    for seg in s.segments:
        if isinstance(seg, FiniteTerms):
            return seg.terms[0][1].tower
        return seg.c.tower
    raise ValueError("empty stream has no coefficient tower")


def monomial_image(R, images, budget=DEFAULT_BUDGET):
    """phi(Y^R): product over l of images[l] ** R[l].

    Negative exponents invert streams, which requires certified
    leading terms.
    """
    if len(R) != len(images):
        raise ValueError("exponent tuple and image list lengths differ")
    result = None
    for r_l, img in zip(R, images):
        if not r_l:
            continue
        factor = stream_pow(img, r_l, budget)
        result = factor if result is None else mul(result, factor, budget)
    if result is None:
        if not images:
            raise ValueError("empty image list")
        tower = _any_tower(images[0])
        return HahnStream.single((0,) * _rank(images[0]), tower.one)
    return result


def subtract_segment_limit(s, family):
    """Remove an entire infinite family that forms the current head of
    the stream: its first term is the stream's leading term and every
    other segment lies above all of the family's (unbounded) support.

    Raises NoLimitError when the family is not present or not
    isolated, InconclusiveError when certification cannot see the
    family's head.
    """
    if family.count is not None:
        raise NoLimitError("only infinite families can be taken as limits")
    matches = [seg for seg in s.segments if seg == family]
    if not matches:
        raise NoLimitError("family %r is not a segment of the stream"
                           % (family,))
    head = family.exponent(1)
    if s.cert is not INFINITY and lex_cmp(head, s.cert) >= 0:
        raise InconclusiveError(
            "family head %r is beyond the certified prefix" % (head,))
    p = next(k for k, d in enumerate(family.step) if d)
    for seg in s.segments:
        if seg == family:
            continue
        first = seg.first_exponent()
        if not first[:p] > family.start[:p]:
            raise NoLimitError(
                "segment starting at %r interleaves with the family"
                % (first,))
    rest = tuple(seg for seg in s.segments if seg != family)
    return HahnStream(rest, s.cert)
