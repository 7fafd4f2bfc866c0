import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpv_lssvm import (AlphaPolynomial, Dataset, HyperParams, LengthMismatch,
                       NonFinite, TooShort, UnstablePolynomial,
                       companion_from_alpha, read_dataset_csv, validate_dataset,
                       write_dataset_csv)


def test_companion_rejects_empty_alpha():
    with pytest.raises(ValueError):
        AlphaPolynomial([])


def test_companion_first_order_origin():
    A, C = companion_from_alpha(AlphaPolynomial([0.0]))
    assert A.tolist() == [[0.0]]
    assert C.tolist() == [[1.0]]


def test_companion_second_order():
    A, C = companion_from_alpha(AlphaPolynomial([-1.2, 0.35]))
    np.testing.assert_array_equal(A, [[0.0, -0.35], [1.0, 1.2]])
    np.testing.assert_array_equal(C, [[0.0, 1.0]])
    # q^2 - 1.2 q + 0.35 = (q - 0.5)(q - 0.7)
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(A).real), [0.5, 0.7], atol=1e-12)


def test_companion_pair_is_observable():
    A, C = companion_from_alpha(AlphaPolynomial([-1.2, 0.35, 0.01]))
    obs = np.vstack([C @ np.linalg.matrix_power(A, k) for k in range(3)])
    assert np.linalg.matrix_rank(obs) == 3


def test_unstable_alpha_rejected():
    with pytest.raises(UnstablePolynomial):
        AlphaPolynomial([-2.5, 1.0])  # roots 0.5 and 2
    with pytest.raises(UnstablePolynomial):
        AlphaPolynomial([-1.0])  # root on the unit circle


def test_complex_alpha_rejected():
    with pytest.raises(ValueError):
        AlphaPolynomial(np.array([0.1 + 0.5j]))


stable_roots = st.lists(
    st.tuples(st.floats(0.0, 0.95), st.floats(0.0, np.pi)), min_size=1, max_size=3)


def _alpha_from_polar(pairs):
    roots = []
    for r, th in pairs:
        if th < 0.3:
            roots.append(r * np.cos(th))
        else:
            z = r * np.exp(1j * th)
            roots += [z, np.conj(z)]
    return AlphaPolynomial.from_roots(roots)


@settings(max_examples=60, deadline=None)
@given(stable_roots)
def test_companion_round_trip_and_spectral_radius(pairs):
    alpha = _alpha_from_polar(pairs)
    A, _ = companion_from_alpha(alpha)
    np.testing.assert_allclose(np.poly(A)[1:], alpha.coeffs, atol=1e-10)
    assert np.max(np.abs(np.linalg.eigvals(A))) < 1.0


def test_validate_ok_at_case_study_length(rng):
    d = Dataset(rng.standard_normal(800), rng.standard_normal(800),
                rng.uniform(-0.25, 0.25, 800))
    validate_dataset(d, 2)


def test_length_mismatch_names_field():
    with pytest.raises(LengthMismatch) as exc:
        Dataset([1.0, 2.0, 3.0], [1.0, 2.0], [0.0, 0.0, 0.0])
    assert exc.value.field == "y"


def test_too_short():
    d = Dataset([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [0.0, 0.1, 0.2])
    with pytest.raises(TooShort):
        validate_dataset(d, 2)
    validate_dataset(d, 1)


def test_non_finite_names_field():
    with pytest.raises(NonFinite) as exc:
        Dataset([1.0, np.nan, 3.0], [1.0, 2.0, 3.0], [0.0, 0.1, 0.2])
    assert exc.value.field == "u"
    with pytest.raises(NonFinite):
        Dataset([1.0], [1.0], [0.0], Ts=0.0)


def test_dataset_is_immutable(small_data):
    with pytest.raises(ValueError):
        small_data.u[0] = 1.0


def test_vector_scheduling_shape(rng):
    d = Dataset(np.zeros(5), np.zeros(5), rng.standard_normal((5, 3)))
    assert d.n_p == 3 and d.p.shape == (5, 3)


@pytest.mark.parametrize("kwargs", [{"gamma": 0}, {"sigma": -1}, {"n_x": 0}, {"n_x": 1.5}])
def test_hyperparams_invariants(kwargs):
    with pytest.raises(ValueError):
        HyperParams(**kwargs)


def test_csv_round_trip(tmp_path, rng):
    d = Dataset(rng.standard_normal(7), rng.standard_normal(7),
                rng.standard_normal((7, 2)), Ts=0.1)
    path = tmp_path / "d.csv"
    write_dataset_csv(d, path)
    assert path.read_text().splitlines()[0] == "k,u,y,p_1,p_2"
    back = read_dataset_csv(path, Ts=0.1)
    np.testing.assert_array_equal(back.u, d.u)
    np.testing.assert_array_equal(back.y, d.y)
    np.testing.assert_array_equal(back.p, d.p)
