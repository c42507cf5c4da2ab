"""The end-to-end monomialization procedure.

Input: a valuation v = nu_t . phi presented by one stream per
variable.  The run proceeds in rounds:

1. *prepare* — echelon-reduce the tuple of leading values into a
   basis of the current value group; replay every recorded row
   operation as a monoidal substitution X_l -> Y_l * Y_i^q on the
   image streams; pick one carrier variable per basis row.
2. *discover* — for each non-carrier variable in index order, run
   the subtraction loop: express the current leading value B in the
   basis, divide coefficients to get the unique candidate alpha, and
   either subtract alpha * phi(Y^R) (finite step), remove a whole
   matching closed-form family at once (limit step), adjoin the next
   declared transcendental residue, or — when B falls outside the
   group — absorb the accumulated corrections into a coordinate
   change and restart at 1 with the extended value group.

Across restarts either the group rank grows or the echelon pivot
tuple strictly improves; this is asserted and bounds the run.  The
final assembly composes the per-variable data back through the
monoidal log into the original variables: psi streams, the list of
transcendental residues with representatives, and final_L — the
exponent data of the resulting monomial valuation.
"""

import random
from dataclasses import dataclass, field as dataclass_field, replace

from . import hahn
from .coeff import Tower
from .errors import InconclusiveError, PurityError, StructureError
from .hahn import (
    APFamily,
    DEFAULT_BUDGET,
    FiniteTerms,
    HahnStream,
    NoLimitError,
)
from .lexgroup import (
    INFINITY,
    NotInSubgroup,
    degree_L,
    echelon_reduce,
    is_lex_positive,
    lex_cmp,
    solve_in_basis,
    vadd,
    vscale,
)


# --------------------------------------------------------------- log


@dataclass(frozen=True)
class Monoidal:
    """X_l = Y_l * Y_i**q (variables by 0-based index, q >= 1)."""
    l: int
    i: int
    q: int


@dataclass(frozen=True)
class SwapVars:
    """Variable interchange; the run tracks carriers by index instead
    of reordering, so this entry is never emitted here."""
    l: int
    i: int


@dataclass(frozen=True)
class CoordChange:
    """X_j = Z_j + sum of alpha * Z**R (+ an optional infinite family
    of such terms, exponents start + (i-1)*step over the variables)."""
    j: int
    terms: tuple
    tail: object = None


@dataclass(frozen=True)
class TransformLog:
    entries: tuple

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


# ------------------------------------------------------------- input


@dataclass(frozen=True)
class ValuationSpec:
    """A rank-m valuation on k((X_1..X_n)) centered in k[[X]],
    presented by the images phi(X_i) and the declared transcendental
    residue symbols in their intended discovery order."""

    tower: Tower
    m: int
    names: tuple
    images: tuple
    symbols: tuple = ()
    max_steps: int = 64
    budget: object = DEFAULT_BUDGET

    def __post_init__(self):
        if self.m < 1:
            raise StructureError("rank m must be at least 1")
        if len(self.images) != len(self.names):
            raise StructureError("need exactly one image per variable")
        if len(self.names) - self.m != len(self.symbols):
            raise StructureError(
                "maximal dimension requires %d declared residue symbols, "
                "got %d" % (len(self.names) - self.m, len(self.symbols)))
        for s in self.symbols:
            if s not in self.tower.symbols:
                raise StructureError("symbol %r missing from the "
                                     "coefficient tower" % (s,))

    @property
    def n(self):
        return len(self.names)


# ----------------------------------------------------------- results


@dataclass(frozen=True)
class TermStep:
    """One finite subtraction: alpha * Y^R cancelled the value B.
    `stream` keeps the exact t-side series that was subtracted."""
    alpha: object
    R: tuple
    B: tuple
    stream: object = dataclass_field(default=None, compare=False,
                                     repr=False)

    def t_stream(self):
        return self.stream


@dataclass(frozen=True)
class FamilyStep:
    """One limit step: the whole family (Y-side closed form `yfam`,
    t-side form `tfam`) removed at once starting at value B."""
    yfam: APFamily
    tfam: APFamily
    B: tuple

    def t_stream(self):
        return HahnStream((self.tfam,))


@dataclass(frozen=True)
class SettledVar:
    """Final record for one variable: a basis carrier or a
    transcendental residue, with the corrections spent on it."""
    var: int
    kind: str                  # "carrier" | "residue"
    value: tuple
    corrections: tuple = ()
    symbol: str = None
    alpha: object = None       # trailing coefficient (residue case)
    denominator: tuple = None  # R_B of the residue representative


@dataclass(frozen=True)
class ResidueRecord:
    symbol: str
    var: int
    denominator: tuple
    alpha: object
    corrections: tuple


@dataclass(frozen=True)
class MonomializationResult:
    spec: ValuationSpec
    basis: object
    carriers: tuple
    log: TransformLog
    settled: tuple
    residues: tuple
    final_L: tuple
    psi: tuple


@dataclass(frozen=True)
class VerifyReport:
    checked: int
    mismatches: tuple
    inconclusive: int

    @property
    def ok(self):
        return not self.mismatches


# ------------------------------------------------------- run state


def _fuse_heads(s):
    """Absorb exact cancellations between the finite part and family
    heads: a finite term that negates a family's first coefficient at
    its first exponent advances the family instead.  Keeps the
    symbolic head of the stream aligned with its numeric head so
    limit detection can see isolated families."""
    changed = True
    while changed:
        changed = False
        finite = {}
        fams = []
        for seg in s.segments:
            if isinstance(seg, FiniteTerms):
                finite.update(seg.terms)
            else:
                fams.append(seg)
        for k, f in enumerate(fams):
            h = f.exponent(1)
            co = finite.get(h)
            if co is None or not (co + f.coeff(1)).is_zero:
                continue
            del finite[h]
            _, tails = f.advanced()
            segs = []
            if finite:
                segs.append(FiniteTerms(tuple(sorted(finite.items()))))
            segs.extend(fams[:k] + fams[k + 1:])
            segs.extend(tails)
            s = HahnStream(tuple(segs), s.cert)
            changed = True
            break
    return s


class EngineState:
    """Mutable state of one monomialization run.  A run owns its
    state exclusively; distinct runs share nothing mutable."""

    def __init__(self, spec):
        self.spec = spec
        self.tower = spec.tower
        self.m = spec.m
        self.n = spec.n
        self.budget = spec.budget
        self.images = list(spec.images)
        self.log = []
        self.settled = {}
        self.adjoined = []
        self.sb = None
        self.carriers = []
        self._remainders = {}
        # correction series removed from a variable's image by a
        # coordinate change, needed to reassemble the original psi
        self._cc_streams = {}
        # composition of the original variables as monomials in the
        # current ones: orig X_i = prod of current Y_l ** expr[i][l]
        self.orig_expr = [[1 if a == b else 0 for b in range(self.n)]
                          for a in range(self.n)]
        self._restarts = 0

    # -- values ------------------------------------------------------

    def value_of(self, j):
        v = hahn.nu_t(self.images[j], self.budget)
        if v is INFINITY:
            raise StructureError(
                "image of %s is zero; phi is not injective on "
                "coordinates" % self.spec.names[j])
        return v

    def values(self):
        return [self.value_of(j) for j in range(self.n)]

    # -- prepare -----------------------------------------------------

    def prepare(self):
        """Echelon-reduce current values, replay the row operations as
        monoidal substitutions, reassign carriers, and (after the
        first round) assert the finiteness-lemma progress measure."""
        prev = self.sb
        vals = self.values()
        for j, row in enumerate(vals):
            if not is_lex_positive(row):
                raise StructureError(
                    "value %r of %s is not positive: the valuation is "
                    "not centered in the power series ring"
                    % (row, self.spec.names[j]))
        # settled variables are frozen: their values already lie in the
        # span of the carrier values, so reducing only the active rows
        # loses nothing and never rewrites a finished variable
        active = [j for j in range(self.n) if j not in self.settled]
        sb, ops = echelon_reduce([vals[j] for j in active])
        for op in ops:
            self._apply_monoidal(active[op.l], active[op.i], -op.q)
        self.sb = sb
        self._assign_carriers()
        if prev is not None:
            self._assert_progress(prev, sb)
        return sb

    def _apply_monoidal(self, l, i, q):
        """X_l = Y_l * Y_i**q: divide image l by image i, q times."""
        if q < 1:
            raise StructureError("internal: monoidal with q=%d" % q)
        factor = hahn.stream_pow(self.images[i], -q, self.budget)
        self.images[l] = hahn.mul(self.images[l], factor, self.budget)
        if l in self._cc_streams:
            # corrections removed from l earlier live one coordinate
            # level up; carry them along so the reassembly identity
            # (image + corrections) * partners stays true
            self._cc_streams[l] = [hahn.mul(c, factor, self.budget)
                                   for c in self._cc_streams[l]]
        for row in self.orig_expr:
            if row[l]:
                row[i] += q * row[l]
        self.log.append(Monoidal(l, i, q))

    def _assign_carriers(self):
        carriers = []
        taken = set()
        vals = self.values()
        for row in self.sb.basis:
            pick = None
            for j in range(self.n):
                if j in taken or j in self.settled:
                    continue
                if vals[j] == row:
                    pick = j
                    break
            if pick is None:
                raise StructureError(
                    "internal: no free variable carries the basis "
                    "value %r" % (row,))
            carriers.append(pick)
            taken.add(pick)
        self.carriers = carriers

    def _assert_progress(self, prev, cur):
        if cur.rank > prev.rank:
            return
        if cur.rank < prev.rank:
            raise StructureError("internal: value group rank dropped "
                                 "from %d to %d" % (prev.rank, cur.rank))
        if cur.pivot_cols != prev.pivot_cols:
            raise StructureError(
                "internal: pivot columns moved %r -> %r at equal rank"
                % (prev.pivot_cols, cur.pivot_cols))
        if not all(q <= p for q, p in zip(cur.pivots, prev.pivots)) or \
                not any(q < p for q, p in zip(cur.pivots, prev.pivots)):
            raise StructureError(
                "internal: restart made no progress: pivots %r -> %r"
                % (prev.pivots, cur.pivots))

    # -- discovery ---------------------------------------------------

    def discover(self, j):
        """Run the subtraction loop on variable j.  Returns "settled"
        or "restart" (after emitting the coordinate change)."""
        name = self.spec.names[j]
        working = self.images[j]
        corrections = []
        subtracted = []        # values of performed finite steps
        prev_B = None

        while True:
            working = _fuse_heads(working)
            try:
                lead = hahn.leading_term(working, self.budget)
            except InconclusiveError as exc:
                raise InconclusiveError(
                    "no certified leading term for %s after %d "
                    "subtractions" % (name, len(subtracted)),
                    detail={"variable": name,
                            "prefix": tuple(subtracted)}) from exc
            if lead is None:
                raise PurityError(
                    "%s minus its corrections has value infinity: the "
                    "valuation vanishes on a coordinate relation and "
                    "is not of maximal dimension" % name)
            B, lc = lead
            if prev_B is not None and not lex_cmp(prev_B, B) < 0:
                raise StructureError(
                    "internal: leading values of %s did not increase "
                    "(%r then %r)" % (name, prev_B, B))
            prev_B = B

            try:
                R = solve_in_basis(B, self.sb, self.n,
                                   tuple(self.carriers))
            except NotInSubgroup:
                self._emit_coordchange(j, corrections, working)
                return "restart"

            gY = hahn.monomial_image(R, self.images, self.budget)
            gl = hahn.leading_term(gY, self.budget)
            if gl is None or gl[0] != B:
                raise StructureError(
                    "internal: phi(Y^%r) has value %r, expected %r"
                    % (R, gl and gl[0], B))
            alpha = lc / gl[1]

            if not alpha.is_in_subfield(self.adjoined):
                self._settle_residue(j, B, lc, alpha, R,
                                     corrections, working)
                return "settled"

            lim = self._match_limit_family(working, B, lc)
            if lim is not None:
                step, working = lim
                corrections.append(step)
                continue

            if len(subtracted) >= self.spec.max_steps:
                raise InconclusiveError(
                    "%s: no family matched after %d subtractions"
                    % (name, len(subtracted)),
                    detail={"variable": name,
                            "prefix": tuple(subtracted)})
            piece = hahn.scale(gY, alpha)
            working = hahn.sub(working, piece)
            corrections.append(TermStep(alpha, R, B, piece))
            subtracted.append(B)

    def _match_limit_family(self, working, B, lc):
        """If the head of `working` is an isolated infinite family
        whose coefficient quotients against the carrier images stay in
        the adjoined subfield, remove the whole family at once and
        return (FamilyStep, remainder)."""
        fam = None
        for seg in working.segments:
            if isinstance(seg, APFamily) and seg.count is None and \
                    seg.exponent(1) == B:
                fam = seg
                break
        if fam is None:
            return None
        if fam.coeff(1) != lc:
            return None           # the head mixes other contributions
        carrier_coeffs = []
        for c in self.carriers:
            single = self.images[c].as_single_term()
            if single is None:
                return None       # carrier tails: no closed quotient
            carrier_coeffs.append(single[1])
        try:
            R_start = solve_in_basis(fam.start, self.sb, self.n,
                                     tuple(self.carriers))
            R_step = solve_in_basis(fam.step, self.sb, self.n,
                                    tuple(self.carriers))
        except NotInSubgroup:
            return None           # a later family value leaves the group
        c_start = self.tower.one
        c_step = self.tower.one
        for pos, c in zip(self.carriers, carrier_coeffs):
            if R_start[pos]:
                c_start = c_start * c ** R_start[pos]
            if R_step[pos]:
                c_step = c_step * c ** R_step[pos]
        # alpha_i = fam.c * i^e * r^i / (c_start * c_step^(i-1))
        #         = (fam.c * c_step / c_start) * i^e * (r / c_step)^i
        c_y = fam.c * c_step / c_start
        r_y = fam.r / c_step
        if not (c_y.is_in_subfield(self.adjoined)
                and r_y.is_in_subfield(self.adjoined)):
            return None
        if not is_lex_positive(R_step):
            return None           # not representable as a Y-family
        yfam = APFamily(R_start, R_step, c_y, fam.e, r_y, None)
        try:
            remainder = hahn.subtract_segment_limit(working, fam)
        except NoLimitError:
            return None
        return FamilyStep(yfam, fam, B), remainder

    def _settle_residue(self, j, B, lc, alpha, R, corrections, working):
        name = self.spec.names[j]
        fresh = alpha.symbols_used() - set(self.adjoined)
        if len(self.adjoined) >= len(self.spec.symbols):
            raise PurityError(
                "%s needs a new transcendental residue but all %d "
                "declared symbols are already adjoined: the valuation "
                "does not have maximal dimension as presented"
                % (name, len(self.spec.symbols)))
        expected = self.spec.symbols[len(self.adjoined)]
        if fresh != {expected}:
            raise PurityError(
                "%s: residue coefficient %s involves %s, expected "
                "exactly the declared symbol %s"
                % (name, alpha, ", ".join(sorted(fresh)) or "no symbol",
                   expected))
        if alpha.degree_in(expected) > 1:
            raise PurityError(
                "%s: residue coefficient %s is not a degree-one "
                "quotient in %s; the residue field extension is not "
                "purely the declared one" % (name, alpha, expected))
        for step in corrections:
            if isinstance(step, TermStep) and \
                    not lex_cmp(step.B, B) < 0:
                raise StructureError("internal: correction chain of %s "
                                     "is not increasing" % name)
        self.adjoined.append(expected)
        self.settled[j] = SettledVar(
            var=j, kind="residue", value=B,
            corrections=tuple(corrections), symbol=expected,
            alpha=alpha, denominator=R)
        # the remainder stream (alpha t^B + its tail) is the image of
        # the final variable Z_j; keep it for assembly
        self._remainders[j] = working

    def _coordchange_entry(self, j, corrections):
        terms = []
        tail = None
        for step in corrections:
            if isinstance(step, TermStep):
                if tail is not None:
                    raise StructureError(
                        "internal: finite corrections after a limit "
                        "step on %s are not representable"
                        % self.spec.names[j])
                terms.append((step.alpha, step.R))
            else:
                if tail is not None:
                    raise StructureError(
                        "internal: two limit families on %s in one "
                        "round" % self.spec.names[j])
                tail = step.yfam
        return CoordChange(j, tuple(terms), tail)

    def _emit_coordchange(self, j, corrections, remainder):
        entry = self._coordchange_entry(j, corrections)
        for i, row in enumerate(self.orig_expr):
            if i != j and row[j]:
                raise StructureError(
                    "internal: variable %s is both a monoidal partner "
                    "and coordinate-changed" % self.spec.names[j])
        self.log.append(entry)
        self._cc_streams.setdefault(j, []).extend(
            step.t_stream() for step in corrections)
        self.images[j] = remainder
        self._restarts += 1

    # -- main loop ---------------------------------------------------

    def run(self):
        self.prepare()
        while True:
            j = self._next_unsettled()
            if j is None:
                break
            outcome = self.discover(j)
            if outcome == "restart":
                self.prepare()
        if self.sb.rank != self.m:
            raise PurityError(
                "attainable values generate a group of rank %d, not "
                "the declared rank %d: the valuation does not have "
                "rank m as presented" % (self.sb.rank, self.m))
        for k, c in enumerate(self.carriers):
            self.settled[c] = SettledVar(var=c, kind="carrier",
                                         value=self.sb.basis[k])
            self._remainders[c] = self.images[c]
        return self._assemble()

    def _next_unsettled(self):
        for j in range(self.n):
            if j not in self.settled and j not in self.carriers:
                return j
        return None

    # -- assembly ----------------------------------------------------

    def _assemble(self):
        # final coordinate changes for residues with corrections
        for j in range(self.n):
            rec = self.settled[j]
            if rec.kind != "residue" or not rec.corrections:
                continue
            for i, row in enumerate(self.orig_expr):
                if i != j and row[j]:
                    raise StructureError(
                        "internal: residue variable %s needs a final "
                        "coordinate change but is a monoidal partner "
                        "of %s" % (self.spec.names[j],
                                   self.spec.names[i]))
            self.log.append(self._coordchange_entry(j, rec.corrections))

        final_L = []
        psi = []
        for i in range(self.n):
            row = self.orig_expr[i]
            if row[i] < 1:
                raise StructureError("internal: composition lost "
                                     "variable %s" % self.spec.names[i])
            # one copy of the variable itself carries its corrections;
            # everything else in the row (including surplus powers of
            # itself picked up through partner rewrites) is a monomial
            # cofactor in the current variables
            partners = tuple(e - 1 if l == i else e
                             for l, e in enumerate(row))
            shift = None
            for l, e in enumerate(partners):
                if not e:
                    continue
                part = vscale(e, self.settled[l].value)
                shift = part if shift is None else vadd(shift, part)
            B = self.settled[i].value
            final_L.append(B if shift is None else vadd(B, shift))
            full = self.images[i]
            for removed in self._cc_streams.get(i, ()):
                full = hahn.add(full, removed)
            if any(partners):
                full = hahn.mul(
                    full,
                    hahn.monomial_image(partners, self.images,
                                        self.budget),
                    self.budget)
            psi.append(full)

        residues = tuple(
            ResidueRecord(rec.symbol, rec.var, rec.denominator,
                          rec.alpha, rec.corrections)
            for rec in (self.settled[j] for j in range(self.n))
            if rec.kind == "residue")
        if len(residues) != self.n - self.m:
            raise StructureError("internal: %d residues for dimension "
                                 "%d" % (len(residues), self.n - self.m))

        settled = tuple(self.settled[j] for j in range(self.n))
        return MonomializationResult(
            spec=self.spec, basis=self.sb,
            carriers=tuple(self.carriers),
            log=TransformLog(tuple(self.log)),
            settled=settled, residues=residues,
            final_L=tuple(final_L), psi=tuple(psi))

    # -- final coordinate images ------------------------------------

    def final_images(self):
        """Streams presenting the images of the final Z variables:
        the settled remainder of each variable, composed through the
        monoidal relations."""
        out = []
        for i in range(self.n):
            row = list(self.orig_expr[i])
            row[i] -= 1
            rem = self._remainders[i]
            if any(row):
                rem = hahn.mul(rem,
                               hahn.monomial_image(tuple(row),
                                                   self.images,
                                                   self.budget),
                               self.budget)
            out.append(rem)
        return out


# ------------------------------------------------------- public ops


def prepare(spec):
    """One preparation round: (prepared spec, basis, log)."""
    state = EngineState(spec)
    sb = state.prepare()
    prepared = replace(spec, images=tuple(state.images))
    return prepared, sb, TransformLog(tuple(state.log))


def discover_residue(state, j):
    """Run the subtraction loop on variable j of a prepared state."""
    return state.discover(j)


def monomialize(spec):
    """Full run; returns a MonomializationResult.  The engine state is
    attached as `_state` for verification plumbing."""
    state = EngineState(spec)
    result = state.run()
    object.__setattr__(result, "_state", state)
    return result


def verify_monomial(result, degree=4, trials=200, rng=None,
                    budget=None):
    """Recomposition check: for random polynomials f in the final
    variables, nu_t of f evaluated at the final images must equal the
    monomial value min over monomials of sum a_i * final_L_i."""
    state = getattr(result, "_state", None)
    if state is None:
        raise StructureError("result was not produced by monomialize")
    budget = budget or result.spec.budget
    zetas = state.final_images()
    n = result.spec.n
    tower = result.spec.tower
    rng = rng or random.Random(97)

    mono_cache = {}

    def mono_image(exps):
        cached = mono_cache.get(exps)
        if cached is None:
            try:
                cached = hahn.monomial_image(exps, zetas, budget)
            except InconclusiveError as exc:
                cached = exc
            mono_cache[exps] = cached
        if isinstance(cached, InconclusiveError):
            raise cached
        return cached

    mismatches = []
    inconclusive = 0
    checked = 0
    for _ in range(trials):
        nmono = rng.randint(1, 4)
        poly = {}
        for _ in range(nmono):
            total = rng.randint(1, degree)
            exps = [0] * n
            for _ in range(total):
                exps[rng.randint(0, n - 1)] += 1
            c = tower.from_int(rng.randint(-5, 5))
            if c.is_zero:
                continue
            key = tuple(exps)
            prev = poly.get(key)
            s = c if prev is None else prev + c
            if s.is_zero:
                poly.pop(key, None)
            else:
                poly[key] = s
        if not poly:
            continue
        expect = None
        for exps in poly:
            v = degree_L(exps, result.final_L)
            expect = v if expect is None else \
                (v if lex_cmp(v, expect) < 0 else expect)
        stream = HahnStream(())
        try:
            for exps, c in poly.items():
                stream = hahn.add(stream, hahn.scale(mono_image(exps), c))
            got = hahn.nu_t(stream, budget)
        except InconclusiveError:
            inconclusive += 1
            continue
        checked += 1
        if got != expect:
            mismatches.append({"poly": poly, "expected": expect,
                               "got": got})
    return VerifyReport(checked=checked, mismatches=tuple(mismatches),
                        inconclusive=inconclusive)
