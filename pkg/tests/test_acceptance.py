"""Acceptance gate: one test per deliverable criterion.

Each test is a single pass/fail line under `pytest -v`:

  1. golden reproduction of the worked four-variable example,
  2. its intermediate checkpoint values,
  3. the lattice layer against a Hermite-normal-form oracle,
  4. the valuation axioms on random truncated series,
  5. stream arithmetic against a sparse-polynomial oracle,
  6. recomposition of forward-constructed monomializable inputs,
  7. the negative paths (purity rejection, budget starvation).

Oracles are shared with the per-module test files so the same frozen
reference implementations back both suites.
"""

import random
import time
from pathlib import Path

import pytest

from monoval import cli
from monoval.coeff import GroundField, Tower
from monoval.engine import Monoidal, monomialize, verify_monomial
from monoval.errors import InconclusiveError, PurityError
from monoval.hahn import (
    APFamily,
    Budget,
    HahnStream,
    add,
    first_terms,
    mul,
    nu_t,
    scale,
    sub,
    term_mul,
)
from monoval.lexgroup import INFINITY, echelon_reduce, replay_rowops, vadd

from test_engine import _random_monomializable_spec
from test_hahn import (
    BIG,
    F5U,
    Q2,
    _lmin,
    _poly_add,
    _poly_mul,
    _random_stream,
    _terms_below,
)
from test_lexgroup import row_echelon_oracle, same_row_lattice

SPECS = Path(cli.__file__).parent / "specs"
EXAMPLE = str(SPECS / "example_f5.vspec")
STARVED = str(SPECS / "example_starved.vspec")
PURITY = str(SPECS / "purity_quadratic.vspec")


def test_c1_golden_example_reproduction():
    """Worked example (F5, four variables, rank 3): one monoidal
    transformation, the four output series term-exact through ten
    enumerated terms (including characteristic-5 coefficient skips),
    the residue presentation, and the final monomial values; < 5 s."""
    t0 = time.perf_counter()
    spec = cli.load_spec(EXAMPLE).spec
    res = monomialize(spec)
    tower = spec.tower
    one = tower.one
    u3 = tower.gen("u3")

    monos = [e for e in res.log if isinstance(e, Monoidal)]
    assert len(monos) == 1
    assert cli._monoidal_reading(spec.names, monos[0]) == "X4 -> Y4*Y1^2"

    # over F5 the i-th coefficient i vanishes at i = 5, 10, ...: the
    # enumeration of the second series must skip those exponents
    want = [
        [((0, 0, 1), one)],
        [((0, 0, j), tower.from_int(j % 5))
         for j in (1, 2, 3, 4, 6, 7, 8, 9, 11, 12)],
        [((0, 0, 1), u3)],
        [((0, 0, 3 * i), u3 ** (3 * i)) for i in range(1, 11)],
    ]
    for stream, terms in zip(res.psi, want):
        assert first_terms(stream, 10, BIG) == terms

    assert len(res.residues) == 1
    rec = res.residues[0]
    assert rec.symbol == "u3"
    assert spec.names[rec.var] == "X3"
    assert cli._representative_text(spec.names, rec.var,
                                    rec.denominator) == "X3/X1"

    assert res.final_L == ((0, 0, 1), (0, 1, 0), (0, 0, 1), (1, 0, 0))
    assert time.perf_counter() - t0 < 5.0


def test_c2_intermediate_checkpoints():
    """Checkpoint values along the example's discovery: the first
    finite subtraction, the first family limit, and both again in the
    coordinates after the monoidal transformation."""
    spec = cli.load_spec(EXAMPLE).spec
    one = spec.tower.one
    u3 = spec.tower.gen("u3")
    x1, x2, _, x4 = spec.images

    assert nu_t(sub(x2, x1), BIG) == (0, 0, 2)

    fam2 = HahnStream((APFamily((0, 0, 1), (0, 0, 1), one, 1, one, None),))
    assert nu_t(sub(x2, fam2), BIG) == (0, 1, 0)

    y4 = term_mul(x4, one, (0, 0, -2))
    assert nu_t(sub(y4, scale(x1, u3 ** 3)), BIG) == (0, 0, 4)

    fam4 = HahnStream((APFamily((0, 0, 1), (0, 0, 3), one, 0,
                                u3 ** 3, None),))
    assert nu_t(sub(y4, fam4), BIG) == (1, 0, -2)


def test_c3_lattice_property_suite():
    """500 random positive integer matrices (up to 5 rows, dimension
    up to 4, entries 1..20): the echelon basis generates the same row
    lattice as a Hermite-normal-form oracle and agrees with it on
    pivots, has staircase shape, contains every input row, and is
    reproduced by replaying the operation log; < 10 s."""
    t0 = time.perf_counter()
    rng = random.Random(500500)
    for _ in range(500):
        n = rng.randint(1, 5)
        m = rng.randint(1, 4)
        rows = [tuple(rng.randint(1, 20) for _ in range(m))
                for _ in range(n)]
        sb, ops = echelon_reduce(rows)

        assert same_row_lattice(rows, sb.basis)

        assert all(b > a for a, b in zip(sb.pivot_cols, sb.pivot_cols[1:]))
        for row, piv, col in zip(sb.basis, sb.pivots, sb.pivot_cols):
            assert all(x == 0 for x in row[:col])
            assert row[col] == piv > 0

        oracle_pivots = []
        for row in row_echelon_oracle(rows):
            lead = next(k for k, x in enumerate(row) if x)
            oracle_pivots.append((lead, abs(row[lead])))
        assert sorted(oracle_pivots) == sorted(zip(sb.pivot_cols, sb.pivots))

        for row in rows:
            sb.solve(row)

        assert set(replay_rowops(rows, ops)) == set(sb.basis)
    assert time.perf_counter() - t0 < 10.0


def test_c4_valuation_axioms():
    """1000 random truncated-series pairs, half over F5 and half over
    Q: the value of a product is the sum of the values, exactly, and
    the value of a sum obeys the ultrametric inequality with equality
    whenever the two values differ."""
    rng = random.Random(271000)
    for tower in (F5U, Q2):
        checked = 0
        while checked < 500:
            a, ea, _ = _random_stream(rng, tower, allow_family=False)
            b, eb, _ = _random_stream(rng, tower, allow_family=False)
            if not ea or not eb:
                continue
            na, nb = nu_t(a, BIG), nu_t(b, BIG)
            p = mul(a, b, Budget(max_terms=64))
            assert nu_t(p, BIG) == vadd(na, nb)
            s = add(a, b)
            ns = nu_t(s, BIG)
            if ns is not INFINITY:
                assert not (ns < _lmin(na, nb))
            if na != nb:
                assert ns == _lmin(na, nb)
            checked += 1


def test_c5_hahn_arithmetic_vs_polynomial_oracle():
    """500 random stream pairs (finite parts plus occasional infinite
    families): sums and products agree with a sparse-polynomial
    oracle on every enumerated term below the completeness bound of
    the truncated expansions; < 10 s."""
    t0 = time.perf_counter()
    rng = random.Random(161161)
    checked = 0
    while checked < 500:
        tower = F5U if rng.random() < 0.5 else Q2
        a, ea, ba = _random_stream(rng, tower)
        b, eb, bb = _random_stream(rng, tower)
        if not ea or not eb:
            continue

        s = add(a, b)
        bound = _lmin(ba, bb)
        want = sorted((e, c) for e, c in _poly_add(ea, eb).items()
                      if bound is INFINITY or e < bound)
        assert _terms_below(s, bound, BIG) == want

        p = mul(a, b, Budget(max_terms=64))
        pbound = INFINITY
        if ba is not INFINITY:
            pbound = _lmin(pbound, vadd(ba, min(eb)))
        if bb is not INFINITY:
            pbound = _lmin(pbound, vadd(bb, min(ea)))
        if p.cert is not INFINITY:
            pbound = _lmin(pbound, p.cert)
        pwant = sorted((e, c) for e, c in _poly_mul(ea, eb).items()
                       if pbound is INFINITY or e < pbound)
        assert _terms_below(p, pbound, BIG) == pwant
        checked += 1
    assert time.perf_counter() - t0 < 10.0


def test_c6_recomposition_synthetic_specs():
    """20 forward-constructed monomializable inputs (up to 4
    variables, rank up to 3, built by scrambling a known monomial
    answer through random coordinate changes and monoidal maps):
    monomialization recovers a monomial valuation and spot-checking
    200 random polynomials per input finds no mismatches."""
    tower = Tower(GroundField.prime(5), ("u", "w"))
    rng = random.Random(606060)
    done = 0
    attempts = 0
    while done < 20 and attempts < 60:
        attempts += 1
        n = rng.choice((2, 3, 4))
        m = rng.randint(max(1, n - 2), min(3, n))
        spec = _random_monomializable_spec(rng, tower, n, m)
        try:
            res = monomialize(spec)
        except PurityError:
            continue          # collision made a symbol slot algebraic
        report = verify_monomial(res, degree=3, trials=200, rng=rng)
        assert report.mismatches == ()
        assert report.checked >= 150
        done += 1
    assert done == 20


def test_c7_negative_paths(capsys):
    """The purity-violating input exits with the purity error code;
    the budget-starved example exits inconclusive and reports a
    pseudo-convergent prefix of length max_steps."""
    assert cli.main(["monomialize", PURITY]) == 4
    capsys.readouterr()

    doc = cli.load_spec(STARVED)
    assert cli.main(["monomialize", STARVED]) == 3
    err = capsys.readouterr().err
    shown = [line for line in err.splitlines() if line.startswith("  (")]
    assert len(shown) == doc.spec.max_steps == 2

    with pytest.raises(InconclusiveError) as exc:
        monomialize(doc.spec)
    prefix = exc.value.detail["prefix"]
    assert len(prefix) == doc.spec.max_steps
    assert prefix == ((0, 0, 1), (0, 0, 2))
