import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qonion.classgroup import (
    Discriminant,
    InvalidFormError,
    QuadraticForm,
    RandomElementParams,
    class_number,
    compose,
    default_exponent_count,
    enumerate_reduced,
    inverse,
    power,
    principal_form,
    random_element,
    reduce,
)
from qonion.errors import ResourceLimitError

D167 = Discriminant(-167)
IDENTITY = QuadraticForm(1, 1, 42)


# --- independent oracles ----------------------------------------------------

def sl2_equivalent(f, g, bound=14):
    """Exhaustive search for an SL2(Z) change of variables carrying f to g."""
    a, b, c = f.triple()
    for alpha, beta, gamma, delta in itertools.product(range(-bound, bound + 1), repeat=4):
        if alpha * delta - beta * gamma != 1:
            continue
        a2 = a * alpha * alpha + b * alpha * gamma + c * gamma * gamma
        b2 = 2 * a * alpha * beta + b * (alpha * delta + beta * gamma) + 2 * c * gamma * delta
        c2 = a * beta * beta + b * beta * delta + c * delta * delta
        if (a2, b2, c2) == g.triple():
            return True
    return False


def oracle_reduce(f):
    """Step-by-step reduction: normalize, then swap outer coefficients."""
    a, b, c = f.triple()
    delta = f.discriminant
    for _ in range(10_000):
        if not (-a < b <= a):
            r = b % (2 * a)
            if r > a:
                r -= 2 * a
            b, c = r, (r * r - delta) // (4 * a)
        elif a > c:
            a, b, c = c, -b, a
        elif (abs(b) == a or a == c) and b < 0:
            b = -b
        else:
            return QuadraticForm(a, b, c)
    raise AssertionError("oracle reduction did not terminate")


@pytest.fixture(scope="module")
def cayley():
    forms = enumerate_reduced(D167)
    return forms, {(f, g): compose(f, g) for f in forms for g in forms}


# --- reduce -------------------------------------------------------------------

def test_reduce_already_reduced():
    assert reduce(QuadraticForm(1, 1, 42)) == QuadraticForm(1, 1, 42)


@pytest.mark.parametrize("raw, expected", [
    ((21, -13, 4), (4, 3, 11)),
    ((42, 41, 11), (2, 1, 21)),
])
def test_reduce_derived_cases(raw, expected):
    f = QuadraticForm(*raw)
    reduced = reduce(f)
    assert reduced.triple() == expected
    assert reduced == oracle_reduce(f)
    assert sl2_equivalent(f, reduced)


def test_reduce_idempotent_and_discriminant_preserving():
    for raw in [(21, -13, 4), (42, 41, 11), (6, 5, 8), (7, 1, 6)]:
        f = QuadraticForm(*raw)
        r = reduce(f)
        assert r.discriminant == f.discriminant
        assert reduce(r) == r
        assert r.is_reduced


def test_invalid_forms_rejected():
    with pytest.raises(InvalidFormError):
        QuadraticForm(-1, 1, 42)
    with pytest.raises(InvalidFormError):
        QuadraticForm(1, 5, 1)  # discriminant 21 >= 0
    with pytest.raises(InvalidFormError):
        Discriminant(-5)  # 3 mod 4
    with pytest.raises(InvalidFormError):
        Discriminant(4)


# --- compose / inverse / power --------------------------------------------------

def test_identity_composes_trivially(cayley):
    forms, table = cayley
    for f in forms:
        assert table[(IDENTITY, f)] == f


def test_opposite_form_is_inverse():
    assert compose(QuadraticForm(2, 1, 21), QuadraticForm(2, -1, 21)) == IDENTITY


def test_compose_golden_square(cayley):
    forms, table = cayley
    # golden value frozen after the Cayley table passed the group axioms
    assert table[(QuadraticForm(2, 1, 21), QuadraticForm(2, 1, 21))] == QuadraticForm(4, -3, 11)


def test_group_axioms_exhaustive(cayley):
    forms, table = cayley
    assert len(forms) == 11
    for f, g in itertools.product(forms, repeat=2):
        assert table[(f, g)] in forms  # closure
        assert table[(f, g)] == table[(g, f)]  # abelian
    for f in forms:
        assert table[(IDENTITY, f)] == f
        assert any(table[(f, g)] == IDENTITY for g in forms)
    for f, g, h in itertools.product(forms, repeat=3):
        assert table[(table[(f, g)], h)] == table[(f, table[(g, h)])]


@pytest.mark.parametrize("delta", [-23, -15])
def test_group_axioms_small_discriminants(delta):
    forms = enumerate_reduced(Discriminant(delta))
    ident = principal_form(Discriminant(delta))
    for f, g in itertools.product(forms, repeat=2):
        assert compose(f, g) in forms
        assert compose(f, g) == compose(g, f)
    for f in forms:
        assert compose(ident, f) == f
        assert any(compose(f, g) == ident for g in forms)


def test_compose_discriminant_mismatch():
    with pytest.raises(InvalidFormError):
        compose(QuadraticForm(1, 1, 42), QuadraticForm(1, 1, 6))


def test_inverse_examples(cayley):
    forms, table = cayley
    assert inverse(IDENTITY) == IDENTITY
    assert inverse(QuadraticForm(4, 3, 11)) == QuadraticForm(4, -3, 11)
    assert inverse(QuadraticForm(6, 5, 8)) == QuadraticForm(6, -5, 8)
    for f in forms:
        assert table[(f, inverse(f))] == IDENTITY


def test_power_examples(cayley):
    forms, _ = cayley
    g = QuadraticForm(2, 1, 21)
    assert power(g, 0) == IDENTITY
    for f in forms:
        assert power(f, 11) == IDENTITY  # Lagrange at group order 11
    sequential = IDENTITY
    for _ in range(5):
        sequential = compose(sequential, g)
    assert power(g, 5) == sequential


def test_power_mod_order(cayley):
    forms, _ = cayley
    for f in forms:
        for n in (13, 24, 110):
            assert power(f, n) == power(f, n % 11)


# --- enumeration -----------------------------------------------------------------

def test_class_numbers():
    assert class_number(D167) == 11
    assert class_number(Discriminant(-3)) == 1
    assert class_number(Discriminant(-23)) == 3


def test_enumerate_reduced_listings():
    minus167 = [f.triple() for f in enumerate_reduced(D167)]
    assert minus167 == [
        (1, 1, 42), (2, -1, 21), (2, 1, 21), (3, -1, 14), (3, 1, 14),
        (4, -3, 11), (4, 3, 11), (6, -5, 8), (6, -1, 7), (6, 1, 7), (6, 5, 8),
    ]
    assert [f.triple() for f in enumerate_reduced(Discriminant(-4))] == [(1, 0, 1)]
    assert [f.triple() for f in enumerate_reduced(Discriminant(-15))] == [(1, 1, 4), (2, 1, 2)]
    assert [f.triple() for f in enumerate_reduced(Discriminant(-23))] == [
        (1, 1, 6), (2, -1, 3), (2, 1, 3),
    ]


def test_enumeration_count_matches_class_number():
    for delta in (-167, -23, -15, -4, -3, -163, -55):
        d = Discriminant(delta)
        assert len(enumerate_reduced(d)) == class_number(d)


def test_enumeration_guard():
    with pytest.raises(ResourceLimitError):
        class_number(Discriminant(-(10**7 + 3)))


# --- random elements ----------------------------------------------------------

def test_random_element_single_step_word():
    g = QuadraticForm(2, 1, 2)  # order 2 in the class group of -15
    for seed in (0, 1, 99):
        e, f = random_element(RandomElementParams(g, 2, 1, 1, seed))
        assert e == 1
        assert f == g


def test_random_element_range_postcondition():
    g = QuadraticForm(2, 1, 21)
    for seed in range(25):
        e, f = random_element(RandomElementParams(g, 11, 4, 9, seed))
        assert 0 <= e < 11
        assert f == power(g, e)


def test_random_element_golden_replay():
    # replay the documented draw order with an independent SplitMix64 copy
    mask = (1 << 64) - 1

    def mix(state):
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        return state, z ^ (z >> 31)

    def draw_below(state, n):
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            state, z = mix(state)
            if z < limit:
                return state, z % n

    state = 42
    exponents, word = [], []
    for _ in range(4):
        state, v = draw_below(state, 10)
        exponents.append(1 + v)
    for _ in range(7):
        state, v = draw_below(state, 4)
        word.append(v)
    expected_e = sum(exponents[s] for s in word) % 11

    e, f = random_element(RandomElementParams(QuadraticForm(2, 1, 21), 11, 4, 7, 42))
    assert (e, f.triple()) == (expected_e, power(QuadraticForm(2, 1, 21), expected_e).triple())
    assert e == 7  # frozen golden value


def test_random_element_rejects_composite_order():
    with pytest.raises(ValueError):
        RandomElementParams(QuadraticForm(2, 1, 21), 12, 2, 2, 0)


def test_default_exponent_count():
    assert default_exponent_count(11) == 3 * 4
    assert default_exponent_count(11, c=1) == 4


# --- property tests ----------------------------------------------------------------

FORMS_167 = enumerate_reduced(D167)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FORMS_167), st.sampled_from(FORMS_167))
def test_compose_commutative_property(f, g):
    assert compose(f, g) == compose(g, f)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FORMS_167), st.integers(min_value=0, max_value=500))
def test_power_reduces_mod_group_order(f, n):
    assert power(f, n) == power(f, n % 11)
