"""Truncated multivariate formal series and monomial valuations.

A TruncSeries is a finite sparse map from exponent tuples (length n,
negative entries allowed for Laurent monomials) to nonzero tower
coefficients, together with a truncation witness: the total degree up
to which the support is known to be exact (INFINITY when the series is
a polynomial known completely).  Valuation queries refuse to answer
when the witness cannot certify the minimum.

Substitutions realize the two field transformations of the procedure:
monoidal maps X_l -> Y_l * Y_i^q and coordinate changes
Y_j -> Z_j + correction.
"""

from .errors import InconclusiveError
from .lexgroup import INFINITY, DimensionError, degree_L, is_lex_positive, lex_cmp


def _tdeg(exps):
    return sum(exps)


class TruncSeries:
    """Immutable sparse series with an exactness witness."""

    __slots__ = ("n", "coeffs", "witness")

    def __init__(self, n, coeffs, witness=INFINITY):
        clean = {}
        for exps, c in coeffs.items():
            exps = tuple(exps)
            if len(exps) != n:
                raise DimensionError(
                    "exponent %r does not have %d entries" % (exps, n))
            if not c.is_zero:
                clean[exps] = c
        self.n = n
        self.coeffs = clean
        self.witness = witness

    @classmethod
    def zero(cls, n):
        return cls(n, {})

    @classmethod
    def monomial(cls, n, exps, c):
        return cls(n, {tuple(exps): c})

    @classmethod
    def variable(cls, n, j, tower):
        exps = [0] * n
        exps[j] = 1
        return cls(n, {tuple(exps): tower.one})

    @property
    def is_zero(self):
        return not self.coeffs

    def support(self):
        return set(self.coeffs)

    def min_total_degree(self):
        if not self.coeffs:
            return 0
        return min(_tdeg(e) for e in self.coeffs)

    def has_negative_exponent(self):
        return any(x < 0 for e in self.coeffs for x in e)

    def truncate(self, bound):
        """Drop terms of total degree above `bound` and weaken the
        witness accordingly."""
        kept = {e: c for e, c in self.coeffs.items() if _tdeg(e) <= bound}
        wit = bound if self.witness is INFINITY else min(self.witness, bound)
        return TruncSeries(self.n, kept, wit)

    def _check_compatible(self, other):
        if self.n != other.n:
            raise DimensionError("series in %d and %d variables"
                                 % (self.n, other.n))

    def __add__(self, other):
        self._check_compatible(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            if e in out:
                s = out[e] + c
                if s.is_zero:
                    del out[e]
                else:
                    out[e] = s
            else:
                out[e] = c
        return TruncSeries(self.n, out, _min_witness(self.witness, other.witness))

    def __neg__(self):
        return TruncSeries(self.n, {e: -c for e, c in self.coeffs.items()},
                           self.witness)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        if c.is_zero:
            return TruncSeries(self.n, {}, self.witness)
        return TruncSeries(self.n, {e: c * x for e, x in self.coeffs.items()},
                           self.witness)

    def __mul__(self, other):
        self._check_compatible(other)
        out = {}
        for ea, ca in self.coeffs.items():
            for eb, cb in other.coeffs.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                prod = ca * cb
                if e in out:
                    s = out[e] + prod
                    if s.is_zero:
                        del out[e]
                    else:
                        out[e] = s
                elif not prod.is_zero:
                    out[e] = prod
        wit = _product_witness(self, other)
        return TruncSeries(self.n, out, wit)

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("series powers take nonnegative integers")
        if k == 0:
            if not self.coeffs:
                raise ValueError("0th power of a zero series is undefined here")
            tower = next(iter(self.coeffs.values())).tower
            return TruncSeries(self.n, {(0,) * self.n: tower.one})
        result = None
        base = self
        while True:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if not k:
                break
            base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return (self.n == other.n and self.coeffs == other.coeffs
                and self.witness == other.witness)

    def __repr__(self):
        if not self.coeffs:
            body = "0"
        else:
            parts = []
            for e in sorted(self.coeffs):
                mono = "*".join("x%d^%d" % (k + 1, v)
                                for k, v in enumerate(e) if v)
                parts.append("(%s)%s" % (self.coeffs[e],
                                         "*" + mono if mono else ""))
            body = " + ".join(parts)
        wit = "exact" if self.witness is INFINITY else "deg<=%r" % (self.witness,)
        return "<series %s [%s]>" % (body, wit)


def _min_witness(a, b):
    if a is INFINITY:
        return b
    if b is INFINITY:
        return a
    return min(a, b)


def _product_witness(f, g):
    """Terms missing from f have total degree above f.witness; their
    products with g start at f.witness + g.min_total_degree + 1."""
    if f.witness is INFINITY and g.witness is INFINITY:
        return INFINITY
    cands = []
    if f.witness is not INFINITY:
        cands.append(f.witness + g.min_total_degree())
    if g.witness is not INFINITY:
        cands.append(g.witness + f.min_total_degree())
    return min(cands)


def monomial_value(f, L):
    """min_lex of degree_L over the support of f; INFINITY for the
    exact zero series.

    L must consist of lex-positive vectors (one per variable).  For a
    truncated series the minimum is certified only when it lies
    strictly below everything the unseen tail could contribute:
    unseen terms have total degree at least witness+1, hence L-degree
    at least (witness+1) * min_lex(L) when the support is
    nonnegative.  Raises InconclusiveError otherwise.
    """
    if len(L) != f.n:
        raise DimensionError("need %d value vectors, got %d" % (f.n, len(L)))
    for B in L:
        if not is_lex_positive(B):
            raise ValueError("value vector %r is not positive" % (B,))
    if not f.coeffs:
        if f.witness is INFINITY:
            return INFINITY
        raise InconclusiveError(
            "series is zero up to degree %r; cannot certify v = infinity"
            % (f.witness,))
    best = None
    for exps in f.coeffs:
        d = degree_L(exps, L)
        if best is None or lex_cmp(d, best) < 0:
            best = d
    if f.witness is INFINITY:
        return best
    if f.has_negative_exponent():
        raise InconclusiveError(
            "truncated Laurent support cannot certify a minimum")
    bmin = min(L)
    bound = tuple((f.witness + 1) * x for x in bmin)
    if lex_cmp(best, bound) < 0:
        return best
    raise InconclusiveError(
        "candidate value %r is not below the truncation horizon %r"
        % (best, bound))


def monoidal_subst(f, l, i, q):
    """Substitute X_l -> Y_l * Y_i^q (q >= 0), other variables renamed
    in place."""
    if l == i:
        raise ValueError("monoidal substitution needs distinct variables")
    if q < 0:
        raise ValueError("negative monoidal count")
    if q == 0:
        return f
    out = {}
    for exps, c in f.coeffs.items():
        e = list(exps)
        e[i] += q * exps[l]
        e = tuple(e)
        if e in out:
            s = out[e] + c
            if s.is_zero:
                del out[e]
            else:
                out[e] = s
        else:
            out[e] = c
    wit = f.witness
    if wit is not INFINITY and f.coeffs:
        drop = min(0, min(exps[l] for exps in f.coeffs))
        wit = wit + q * drop
    return TruncSeries(f.n, out, wit)


def coordinate_change(f, j, correction, unit):
    """Substitute Y_j -> Z_j + correction, where `correction` is a
    TruncSeries not involving variable j and `unit` is the coefficient
    1 of the working tower (needed to build the empty product).

    Exponents of variable j in f must be nonnegative.
    """
    if any(exps[j] for exps in correction.coeffs):
        raise ValueError("correction refers to the substituted variable")
    n = f.n
    zj = TruncSeries.variable(n, j, unit.tower)
    repl = zj + correction
    total = TruncSeries.zero(n)
    one = TruncSeries(n, {(0,) * n: unit})
    powers = {0: one}

    def repl_pow(k):
        if k not in powers:
            powers[k] = repl_pow(k - 1) * repl
        return powers[k]

    for exps, c in f.coeffs.items():
        aj = exps[j]
        if aj < 0:
            raise ValueError("cannot substitute into a negative power "
                             "of the changed variable")
        rest = list(exps)
        rest[j] = 0
        term = TruncSeries.monomial(n, tuple(rest), c)
        total = total + term * repl_pow(aj)

    wit = total.witness
    if f.witness is not INFINITY:
        d = min(1, repl.min_total_degree())
        from_f = (f.witness + 1) * d - 1 if d > 0 else -1
        wit = _min_witness(wit, from_f)
    return TruncSeries(n, total.coeffs, wit)
