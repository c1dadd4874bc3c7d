import numpy as np
import pytest
from hypothesis import given, strategies as st

from josephson_qrc.errors import InvalidSpecificationError
from josephson_qrc.fock import FockSpec, annihilation, embed, number, projector


def test_annihilation_cutoff_one():
    a = annihilation(1)
    assert a.shape == (2, 2)
    np.testing.assert_array_equal(a, [[0, 1], [0, 0]])


def test_annihilation_sqrt_two_entry():
    assert annihilation(7)[1, 2] == pytest.approx(1.41421356, abs=1e-8)


def test_annihilation_kills_vacuum():
    vac = np.zeros(8)
    vac[0] = 1
    np.testing.assert_array_equal(annihilation(7) @ vac, np.zeros(8))


@pytest.mark.parametrize("cutoff", [0, -1, 2.5])
def test_annihilation_rejects_bad_cutoff(cutoff):
    with pytest.raises(InvalidSpecificationError):
        annihilation(cutoff)


@given(st.integers(1, 12))
def test_truncated_commutator(cutoff):
    a = annihilation(cutoff)
    comm = a @ a.conj().T - a.conj().T @ a
    expected = np.eye(cutoff + 1)
    expected[-1, -1] = -cutoff
    # sqrt(n)**2 can be one ulp away from n
    np.testing.assert_allclose(comm, expected, rtol=0, atol=4 * np.finfo(float).eps * cutoff)


@given(st.integers(1, 12))
def test_number_operator_diagonal(cutoff):
    a = annihilation(cutoff)
    np.testing.assert_allclose(a.conj().T @ a, np.diag(np.arange(cutoff + 1)), rtol=0,
                               atol=4 * np.finfo(float).eps * cutoff)


def test_embed_dimension_and_commutation():
    spec = FockSpec(7, 7)
    A = embed(annihilation(7), "a", spec)
    B = embed(annihilation(7), "b", spec)
    assert A.shape == (64, 64)
    np.testing.assert_array_equal(A @ B - B @ A, np.zeros((64, 64)))


def test_embedded_number_matches_loop_oracle():
    spec = FockSpec(3, 4)
    n_a = number("a", spec)
    n_b = number("b", spec)
    for na in range(4):
        for nb in range(5):
            i = na * 5 + nb
            assert n_a[i, i] == pytest.approx(na)
            assert n_b[i, i] == pytest.approx(nb)
    assert np.count_nonzero(n_a - np.diag(np.diag(n_a))) == 0


@given(st.integers(1, 5), st.integers(1, 5))
def test_embed_spectrum_multiplicity(ca, cb):
    spec = FockSpec(ca, cb)
    ev = np.sort(np.linalg.eigvalsh(number("a", spec)))
    expected = np.sort(np.repeat(np.arange(ca + 1), cb + 1))
    np.testing.assert_allclose(ev, expected, atol=1e-12)


def test_embed_rejects_mismatched_dimension():
    with pytest.raises(InvalidSpecificationError):
        embed(annihilation(3), "a", FockSpec(7, 7))
    with pytest.raises(InvalidSpecificationError):
        embed(annihilation(7), "c", FockSpec(7, 7))


def test_annihilators_single_band():
    spec = FockSpec(7, 7)
    for op, offset in ((spec.a, 8), (spec.b, 1)):
        rows, cols = np.nonzero(op)
        assert set(cols - rows) == {offset}


def test_projector_vacuum_and_index_convention():
    spec = FockSpec(7, 7)
    p0 = projector(0, 0, spec)
    assert np.trace(p0) == 1 and p0[0, 0] == 1
    p33 = projector(3, 3, spec)
    assert p33[27, 27] == 1 and np.count_nonzero(p33) == 1


def test_projector_completeness():
    spec = FockSpec(2, 3)
    total = sum(projector(i, j, spec) for i in range(3) for j in range(4))
    np.testing.assert_array_equal(total, np.eye(12))


def test_projector_out_of_range():
    with pytest.raises(InvalidSpecificationError):
        projector(8, 0, FockSpec(7, 7))
    with pytest.raises(InvalidSpecificationError):
        projector(0, -1, FockSpec(7, 7))


def test_spec_invariants():
    assert FockSpec().dim == 64
    assert FockSpec(2, 3).dim == 12
    with pytest.raises(InvalidSpecificationError):
        FockSpec(0, 3)
