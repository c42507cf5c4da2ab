"""Engine tests: frozen traces of the worked four-variable run
(preparation, both limit steps, the transcendental residue, final
assembly), the small two-variable flows, the error taxonomy, and the
recomposition property check.
"""

import random

import pytest

from monoval import hahn
from monoval.coeff import GroundField, Tower
from monoval.engine import (
    CoordChange,
    EngineState,
    FamilyStep,
    Monoidal,
    TermStep,
    ValuationSpec,
    discover_residue,
    monomialize,
    prepare,
    verify_monomial,
)
from monoval.errors import InconclusiveError, PurityError, StructureError
from monoval.hahn import APFamily, FiniteTerms, HahnStream, first_terms, nu_t
from monoval.lexgroup import degree_L, lex_cmp

F5U = Tower(GroundField.prime(5), ("u3",))
Q = Tower(GroundField.rationals())
QU = Tower(GroundField.rationals(), ("u",))


def example_spec(max_steps=64):
    """The worked example: rank-3 valuation on k[[X1..X4]], k = F5,
    one transcendental residue u3 = X3/X1."""
    one = F5U.one
    u3 = F5U.gen("u3")
    x1 = HahnStream.single((0, 0, 1), one)
    x2 = HahnStream((APFamily((0, 0, 1), (0, 0, 1), one, 1, one, None),
                     FiniteTerms((((0, 1, 0), one),))))
    x3 = HahnStream.single((0, 0, 1), u3)
    x4 = HahnStream((APFamily((0, 0, 3), (0, 0, 3), one, 0, u3 ** 3, None),
                     FiniteTerms((((1, 0, 0), one),))))
    return ValuationSpec(tower=F5U, m=3, names=("X1", "X2", "X3", "X4"),
                         images=(x1, x2, x3, x4), symbols=("u3",),
                         max_steps=max_steps)


def two_var_spec(second_image, symbols=("u",), m=1, max_steps=64):
    return ValuationSpec(tower=QU, m=m, names=("X1", "X2"),
                         images=(HahnStream.single((1,), QU.one),
                                 second_image),
                         symbols=symbols, max_steps=max_steps)


# ------------------------------------------------------------ prepare

def test_prepare_example_one_monoidal():
    prepped, sb, log = prepare(example_spec())
    assert list(log) == [Monoidal(3, 0, 2)]
    assert [nu_t(im) for im in prepped.images] == [(0, 0, 1)] * 4
    assert sb.basis == ((0, 0, 1),)


def test_prepare_already_basis_empty_log():
    imgs = tuple(HahnStream.single(tuple(int(k == i) for k in range(3)),
                                   Q.one) for i in range(3))
    spec = ValuationSpec(tower=Q, m=3, names=("X1", "X2", "X3"),
                         images=imgs)
    prepped, sb, log = prepare(spec)
    assert len(log) == 0
    assert sb.basis == ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def test_prepare_2335_values_form_basis_of_z2():
    spec = ValuationSpec(tower=Q, m=2, names=("X1", "X2"),
                         images=(HahnStream.single((2, 3), Q.one),
                                 HahnStream.single((3, 5), Q.one)))
    prepped, sb, log = prepare(spec)
    vals = [nu_t(im) for im in prepped.images]
    assert sorted(vals) == sorted(sb.basis)
    # (2,3) and (3,5) generate all of Z^2, so the basis must too
    assert sb.contains((1, 0)) and sb.contains((0, 1))
    for entry in log:
        assert isinstance(entry, Monoidal) and entry.q >= 1


def test_prepare_rejects_nonpositive_value():
    spec = ValuationSpec(tower=Q, m=1, names=("X1",),
                         images=(HahnStream.single((-1,), Q.one),))
    with pytest.raises(StructureError):
        prepare(spec)


# ----------------------------------------------------------- discover

def test_discover_limit_step_hits_new_value():
    # variable X2: subtractions alpha_i = i align with the declared
    # family; the limit's remainder value (0,1,0) leaves the group
    state = EngineState(example_spec())
    state.prepare()
    assert discover_residue(state, 1) == "restart"
    cc = state.log[-1]
    assert isinstance(cc, CoordChange) and cc.j == 1
    assert cc.terms == ()
    assert cc.tail == APFamily((1, 0, 0, 0), (1, 0, 0, 0),
                               F5U.one, 1, F5U.one, None)
    assert nu_t(state.images[1]) == (0, 1, 0)


def test_discover_residue_u3():
    state = EngineState(example_spec())
    state.prepare()
    discover_residue(state, 1)
    state.prepare()
    assert discover_residue(state, 2) == "settled"
    rec = state.settled[2]
    assert rec.kind == "residue"
    assert rec.symbol == "u3"
    assert rec.alpha == F5U.gen("u3")
    assert rec.denominator == (1, 0, 0, 0)
    assert rec.value == (0, 0, 1)
    assert rec.corrections == ()


def test_discover_second_limit_after_residue():
    state = EngineState(example_spec())
    state.prepare()
    discover_residue(state, 1)
    state.prepare()
    discover_residue(state, 2)
    assert discover_residue(state, 3) == "restart"
    cc = state.log[-1]
    assert isinstance(cc, CoordChange) and cc.j == 3
    u3 = F5U.gen("u3")
    assert cc.tail == APFamily((1, 0, 0, 0), (3, 0, 0, 0),
                               F5U.one, 0, u3 ** 3, None)
    assert nu_t(state.images[3]) == (1, 0, -2)


def test_discover_finite_subtraction_then_residue():
    u = QU.gen("u")
    img = HahnStream((FiniteTerms((((1,), QU.one), ((2,), u))),))
    state = EngineState(two_var_spec(img))
    state.prepare()
    assert discover_residue(state, 1) == "settled"
    rec = state.settled[1]
    assert rec.symbol == "u" and rec.value == (2,)
    (step,) = rec.corrections
    assert isinstance(step, TermStep)
    assert step.alpha == QU.one and step.R == (1, 0) and step.B == (1,)


# -------------------------------------------------------- monomialize

def test_full_example_log_and_assembly():
    res = monomialize(example_spec())
    u3 = F5U.gen("u3")
    assert list(res.log) == [
        Monoidal(3, 0, 2),
        CoordChange(1, (), APFamily((1, 0, 0, 0), (1, 0, 0, 0),
                                    F5U.one, 1, F5U.one, None)),
        CoordChange(3, (), APFamily((1, 0, 0, 0), (3, 0, 0, 0),
                                    F5U.one, 0, u3 ** 3, None)),
    ]
    assert res.basis.basis == ((1, 0, -2), (0, 1, 0), (0, 0, 1))
    assert res.carriers == (3, 1, 0)
    assert res.final_L == ((0, 0, 1), (0, 1, 0), (0, 0, 1), (1, 0, 0))
    (r,) = res.residues
    assert r.symbol == "u3" and r.var == 2
    assert r.denominator == (1, 0, 0, 0) and r.alpha == u3
    kinds = [s.kind for s in res.settled]
    assert kinds == ["carrier", "carrier", "residue", "carrier"]


def test_full_example_psi_reproduces_the_input_series():
    spec = example_spec()
    res = monomialize(spec)
    for image, psi in zip(example_spec().images, res.psi):
        assert first_terms(psi, 10) == first_terms(image, 10)


def test_full_example_psi_chains_strictly_increase():
    res = monomialize(example_spec())
    for psi in res.psi:
        terms = first_terms(psi, 8)
        for a, b in zip(terms, terms[1:]):
            assert lex_cmp(a[0], b[0]) < 0


def test_monomialize_standard_basis_is_identity():
    imgs = tuple(HahnStream.single(tuple(int(k == i) for k in range(3)),
                                   Q.one) for i in range(3))
    spec = ValuationSpec(tower=Q, m=3, names=("X1", "X2", "X3"),
                         images=imgs)
    res = monomialize(spec)
    assert len(res.log) == 0
    assert res.residues == ()
    assert res.final_L == ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def test_monomialize_immediate_residue():
    res = monomialize(two_var_spec(HahnStream.single((1,), QU.gen("u"))))
    assert len(res.log) == 0
    assert res.final_L == ((1,), (1,))
    (r,) = res.residues
    assert r.symbol == "u" and r.corrections == ()


def test_monomialize_subtraction_records_final_coordchange():
    u = QU.gen("u")
    img = HahnStream((FiniteTerms((((1,), QU.one), ((2,), u))),))
    res = monomialize(two_var_spec(img))
    assert list(res.log) == [CoordChange(1, ((QU.one, (1, 0)),), None)]
    assert res.final_L == ((1,), (2,))
    assert first_terms(res.psi[1], 3) == [((1,), QU.one), ((2,), u)]


def test_residue_count_matches_dimension():
    res = monomialize(example_spec())
    assert len(res.residues) == res.spec.n - res.spec.m == 1


# ------------------------------------------------------------- verify

def test_verify_final_variable_values():
    res = monomialize(example_spec())
    zetas = res._state.final_images()
    assert [nu_t(z) for z in zetas] == list(res.final_L)
    # f = Z4 and f = Z1*Z3 from the worked example
    assert nu_t(zetas[3]) == (1, 0, 0)
    z1z3 = hahn.mul(zetas[0], zetas[2])
    assert nu_t(z1z3) == (0, 0, 2)
    assert degree_L((1, 0, 1, 0), res.final_L) == (0, 0, 2)


def test_verify_random_polynomials_over_f5():
    res = monomialize(example_spec())
    report = verify_monomial(res, degree=4, trials=200,
                             rng=random.Random(20240517))
    assert report.mismatches == ()
    assert report.checked >= 150
    assert report.ok


def test_verify_two_var_with_correction():
    u = QU.gen("u")
    img = HahnStream((FiniteTerms((((1,), QU.one), ((2,), u))),))
    res = monomialize(two_var_spec(img))
    report = verify_monomial(res, degree=3, trials=80,
                             rng=random.Random(7))
    assert report.mismatches == () and report.checked >= 50


# -------------------------------------------------------------- errors

def test_starved_run_reports_pseudo_convergent_prefix():
    # same example but the family is only listed up to i = 40, so the
    # engine must grind term by term and give up at max_steps
    one = F5U.one
    x2 = HahnStream((APFamily((0, 0, 1), (0, 0, 1), one, 1, one, 40),
                     FiniteTerms((((0, 1, 0), one),))))
    spec = ValuationSpec(tower=F5U, m=2, names=("X1", "X2"),
                         images=(HahnStream.single((0, 0, 1), one), x2),
                         max_steps=2)
    with pytest.raises(InconclusiveError) as exc:
        monomialize(spec)
    prefix = exc.value.detail["prefix"]
    assert len(prefix) == 2
    assert prefix == ((0, 0, 1), (0, 0, 2))
    for a, b in zip(prefix, prefix[1:]):
        assert lex_cmp(a, b) < 0


def test_purity_degree_two_coefficient():
    u = QU.gen("u")
    with pytest.raises(PurityError):
        monomialize(two_var_spec(HahnStream.single((1,), u * u)))


def test_purity_wrong_symbol():
    tower = Tower(GroundField.rationals(), ("u", "w"))
    spec = ValuationSpec(
        tower=tower, m=1, names=("X1", "X2"),
        images=(HahnStream.single((1,), tower.one),
                HahnStream.single((1,), tower.gen("w"))),
        symbols=("u",))
    with pytest.raises(PurityError):
        monomialize(spec)


def test_purity_vanishing_combination():
    img = HahnStream.single((1,), QU.from_int(3))
    spec = ValuationSpec(tower=QU, m=2, names=("X1", "X2"),
                         images=(HahnStream.single((1,), QU.one), img))
    with pytest.raises(PurityError):
        monomialize(spec)


def test_spec_requires_one_symbol_per_residue():
    with pytest.raises(StructureError):
        ValuationSpec(tower=QU, m=1, names=("X1", "X2"),
                      images=(HahnStream.single((1,), QU.one),
                              HahnStream.single((1,), QU.gen("u"))),
                      symbols=())


def test_spec_rejects_unknown_symbol():
    with pytest.raises(StructureError):
        ValuationSpec(tower=QU, m=1, names=("X1", "X2"),
                      images=(HahnStream.single((1,), QU.one),
                              HahnStream.single((1,), QU.gen("u"))),
                      symbols=("nope",))


# --------------------------------------------- synthetic random specs

def _random_monomializable_spec(rng, tower, n, m):
    """Forward construction: pick a value basis and transcendental
    slots, then present each variable as a unit times a monomial in
    hidden uniformizers so the run must rediscover the structure."""
    while True:
        rows = [[rng.randint(0, 2) for _ in range(m)] for _ in range(m)]
        for k in range(m):
            rows[k][k] = rng.randint(1, 2)
        det = _det(rows)
        if det != 0:
            break
    symbols = tower.symbols[:n - m]
    images = []
    for i in range(n):
        if i < m:
            exp = tuple(rows[i])
            co = tower.one
        else:
            base = rows[rng.randrange(m)]
            exp = tuple(base)
            co = tower.gen(symbols[i - m])
        extra = []
        if rng.random() < 0.5:
            bump = tuple(a + b for a, b in
                         zip(exp, rows[rng.randrange(m)]))
            extra.append((bump, tower.from_int(rng.randint(1, 4))))
        images.append(HahnStream((FiniteTerms(
            tuple([(exp, co)] + extra)),)))
    return ValuationSpec(tower=tower, m=m,
                         names=tuple("X%d" % (i + 1) for i in range(n)),
                         images=tuple(images), symbols=symbols)


def _det(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = 0
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        total += (-1) ** j * rows[0][j] * _det(minor)
    return total


def test_random_specs_monomialize_and_verify():
    tower = Tower(GroundField.prime(5), ("u", "w"))
    rng = random.Random(808017)
    done = 0
    for _ in range(40):
        n = rng.choice((2, 3, 4))
        m = rng.randint(max(1, n - 2), n)
        spec = _random_monomializable_spec(rng, tower, n, m)
        try:
            res = monomialize(spec)
        except PurityError:
            continue          # collision made a symbol slot algebraic
        report = verify_monomial(res, degree=3, trials=40, rng=rng)
        assert report.mismatches == ()
        done += 1
    assert done >= 25
