"""Exact combinatorics: parities, triple signs, Aronhold sets, the layout table."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quartic_bitangents.characteristics import (
    ZERO,
    AronholdSet,
    Characteristic,
    all_characteristics,
    build_char_matrix,
    complete_fundamental,
    enumerate_aronhold_sets,
    even_characteristics,
    is_fundamental_system,
    odd_characteristics,
    parity,
    parity_sign,
    standard_aronhold_set,
    standard_char_matrix,
    symplectic_pairing,
    translate_aronhold,
    triple_sign,
)
from quartic_bitangents.errors import SyzygeticTriple

characteristics = st.builds(
    Characteristic.from_label, st.integers(0, 7), st.integers(0, 7)
)

# Frozen golden: the 8x8 characteristic table of the base-zero Aronhold set
# (77, 64, 51, 46, 23, 15, 32), row notation.
GOLDEN_LAYOUT = (
    ("[000,000]", "[111,111]", "[110,100]", "[101,001]", "[100,110]", "[010,011]", "[001,101]", "[011,010]"),
    ("[111,111]", "[000,000]", "[001,011]", "[010,110]", "[011,001]", "[101,100]", "[110,010]", "[100,101]"),
    ("[110,100]", "[001,011]", "[000,000]", "[011,101]", "[010,010]", "[100,111]", "[111,001]", "[101,110]"),
    ("[101,001]", "[010,110]", "[011,101]", "[000,000]", "[001,111]", "[111,010]", "[100,100]", "[110,011]"),
    ("[100,110]", "[011,001]", "[010,010]", "[001,111]", "[000,000]", "[110,101]", "[101,011]", "[111,100]"),
    ("[010,011]", "[101,100]", "[100,111]", "[111,010]", "[110,101]", "[000,000]", "[011,110]", "[001,001]"),
    ("[001,101]", "[110,010]", "[111,001]", "[100,100]", "[101,011]", "[011,110]", "[000,000]", "[010,111]"),
    ("[011,010]", "[100,101]", "[101,110]", "[110,011]", "[111,100]", "[001,001]", "[010,111]", "[000,000]"),
)


def test_label_roundtrip():
    for i in range(8):
        for j in range(8):
            m = Characteristic.from_label(i, j)
            assert m.label == (i, j)
            assert Characteristic.from_text(m.text) == m
            assert Characteristic.parse(m.code) == m
            assert Characteristic.parse(m.text) == m


def test_text_parse_rejects_garbage():
    with pytest.raises(ValueError):
        Characteristic.from_text("[12,001]")
    with pytest.raises(ValueError):
        Characteristic.from_label(8, 0)


def test_addition_is_componentwise_mod_two():
    a = Characteristic.from_text("[110,100]")
    b = Characteristic.from_text("[101,001]")
    assert (a + b).text == "[011,101]"
    assert (a + a) == ZERO
    assert (a + ZERO) == a


def test_parity_basics():
    assert parity(ZERO) == "even"
    assert parity(Characteristic.from_text("[111,111]")) == "odd"


def test_parity_counts():
    assert len(even_characteristics()) == 36
    assert len(odd_characteristics()) == 28


def test_parity_agrees_with_label_popcount():
    for m in all_characteristics():
        i, j = m.label
        assert (parity_sign(m) == -1) == (bin(i & j).count("1") % 2 == 1)


def test_triple_sign_repeated_argument():
    for m in all_characteristics():
        assert triple_sign(m, m, m) == 1


def test_triple_sign_reference_triple_is_azygetic():
    triple = [Characteristic.from_text(t) for t in ("[111,111]", "[110,100]", "[101,001]")]
    assert triple_sign(*triple) == -1


def test_odd_triple_counts():
    odds = odd_characteristics()
    azygetic = sum(
        1 for a, b, c in itertools.combinations(odds, 3) if triple_sign(a, b, c) == -1
    )
    assert azygetic == 2016
    assert len(list(itertools.combinations(odds, 3))) - azygetic == 1260


@settings(max_examples=200, deadline=None)
@given(characteristics, characteristics, characteristics)
def test_triple_sign_permutation_invariant(m1, m2, m3):
    reference = triple_sign(m1, m2, m3)
    for p in itertools.permutations((m1, m2, m3)):
        assert triple_sign(*p) == reference


def test_pairing_with_zero():
    for m in all_characteristics():
        assert symplectic_pairing(m, ZERO) == 1
        assert symplectic_pairing(m, m) == 1


def test_pairing_symmetric_exhaustive():
    for m in all_characteristics():
        for n in all_characteristics():
            assert symplectic_pairing(m, n) == symplectic_pairing(n, m)


@settings(max_examples=200, deadline=None)
@given(characteristics, characteristics, characteristics)
def test_pairing_bilinear_in_second_argument(m, n1, n2):
    assert symplectic_pairing(m, n1 + n2) == symplectic_pairing(m, n1) * symplectic_pairing(m, n2)


def test_pairing_nontrivial_character_count():
    # brute-force oracle: every m != 0 pairs to -1 with exactly half of F_2^6
    for m in all_characteristics():
        if m == ZERO:
            continue
        negative = sum((1 - symplectic_pairing(m, n)) // 2 for n in all_characteristics())
        assert negative == 32


def test_fundamental_system_recognition():
    row0 = [Characteristic.from_text(t) for t in GOLDEN_LAYOUT[0]]
    assert is_fundamental_system(row0)
    assert is_fundamental_system(list(reversed(row0)))
    broken = row0[:-1] + [row0[1]]
    assert not is_fundamental_system(broken)


def test_aronhold_set_validation():
    with pytest.raises(ValueError):
        AronholdSet.from_codes((77, 64, 51, 46, 23, 15, 15))
    with pytest.raises(ValueError):
        AronholdSet.from_codes((77, 64, 51, 46, 23, 15, 0))  # 0 is even


def test_enumeration_counts():
    sets_ = enumerate_aronhold_sets()
    assert len(sets_) == 288
    per_base = {}
    for s in sets_:
        per_base.setdefault(s.base, []).append(s)
    assert len(per_base) == 36
    assert all(len(group) == 8 for group in per_base.values())
    base_zero = per_base[ZERO]
    standard = standard_aronhold_set()
    assert any(s.member_set() == standard.member_set() for s in base_zero)


def test_every_aronhold_triple_azygetic():
    for s in enumerate_aronhold_sets():
        for a, b, c in itertools.combinations(s.members, 3):
            assert triple_sign(a, b, c) == -1
        assert s.base.is_even


def test_translation_matches_layout_row():
    standard = standard_aronhold_set()
    translated = translate_aronhold(standard, 0)
    expected = {
        Characteristic.from_text(t)
        for t in ("[111,111]", "[001,011]", "[010,110]", "[011,001]", "[101,100]", "[110,010]", "[100,101]")
    }
    assert translated.member_set() == expected
    assert translated.base == ZERO


def test_translation_is_involution():
    standard = standard_aronhold_set()
    once = translate_aronhold(standard, 3)
    again = translate_aronhold(once, 3)
    assert again.members == standard.members


def test_translates_pairwise_distinct():
    standard = standard_aronhold_set()
    member_sets = {standard.member_set()}
    member_sets.update(translate_aronhold(standard, i).member_set() for i in range(7))
    assert len(member_sets) == 8


def test_char_matrix_equals_golden():
    matrix = build_char_matrix(standard_aronhold_set())
    for i in range(8):
        for k in range(8):
            assert matrix.entry(i, k).text == GOLDEN_LAYOUT[i][k], (i, k)
    assert standard_char_matrix().codes() == matrix.codes()


def test_char_matrix_spot_entries():
    matrix = standard_char_matrix()
    assert matrix.entry(2, 3).text == "[011,101]"
    for i in range(8):
        assert matrix.entry(i, i) == ZERO


def test_char_matrix_invariants_all_sets():
    odds = sorted(m.label for m in odd_characteristics())
    for s in enumerate_aronhold_sets():
        matrix = build_char_matrix(s)
        for i in range(8):
            for k in range(8):
                assert matrix.entry(i, k) == matrix.entry(k, i)
                if i == k:
                    assert matrix.entry(i, k) == s.base
        off = sorted(m.label for _, _, m in matrix.off_diagonal_pairs())
        assert off == odds


def _aligned_equal(m1, m2):
    sets1 = [m1.row_members(i) for i in range(8)]
    sets2 = [m2.row_members(i) for i in range(8)]
    if sorted(map(sorted, (tuple(x.label for x in s) for s in sets1))) != sorted(
        map(sorted, (tuple(x.label for x in s) for s in sets2))
    ):
        return False
    perm = [sets2.index(s) for s in sets1]
    return all(
        m2.entry(perm[i], perm[k]) == m1.entry(i, k) for i in range(8) for k in range(8)
    )


def test_exactly_36_matrices_up_to_simultaneous_permutation():
    per_base = {}
    for s in enumerate_aronhold_sets():
        per_base.setdefault(s.base, []).append(build_char_matrix(s))
    assert len(per_base) == 36
    for base, matrices in per_base.items():
        reference = matrices[0]
        for other in matrices[1:]:
            assert _aligned_equal(reference, other), base.text


def test_complete_fundamental_reference_triple():
    completion = complete_fundamental(77, 64, 51)
    assert sorted(m.code for m in completion) == [0, 4, 57, 61, 70]
    assert all(m.is_even for m in completion)
    triple = [Characteristic.from_code(c) for c in (77, 64, 51)]
    assert is_fundamental_system(triple + list(completion))


def test_complete_fundamental_permutation_invariant():
    assert complete_fundamental(51, 77, 64) == complete_fundamental(77, 64, 51)


def test_complete_fundamental_rejects_syzygetic():
    odds = odd_characteristics()
    syzygetic = next(
        (a, b, c)
        for a, b, c in itertools.combinations(odds, 3)
        if triple_sign(a, b, c) == 1
    )
    with pytest.raises(SyzygeticTriple):
        complete_fundamental(*syzygetic)
