"""Markov parameters, transfer functions, and minimality analysis."""

import numpy as np
import pytest

from porous_equiv import (
    PoleOnAxisError,
    StateSpace,
    TransferFunction,
    build_state_space,
    controllability_matrix,
    frequency_response,
    is_minimal,
    linalg,
    markov_parameters,
    observability_matrix,
    transfer_function,
)
from porous_equiv.realization import krylov_ranks, markov_deviation

from conftest import (
    EXAMPLE1_A,
    EXAMPLE1_REDUCED_A,
    EXAMPLE2_A,
    EXAMPLE2_CTRB,
    EXAMPLE2_MINC,
    EXAMPLE2_MRMT,
    EXAMPLE2_TF_DEN,
    EXAMPLE2_TF_NUM,
    random_network,
)


class TestKrylovMatrices:
    def test_example2_controllability_is_integer_reference(self, example2):
        ss, _ = example2
        ctrb = controllability_matrix(ss)
        np.testing.assert_allclose(ctrb, EXAMPLE2_CTRB, atol=1e-9)
        np.testing.assert_allclose(ctrb[:, 0], [1, 0, 0, 0, 0])

    def test_single_compartment(self):
        ss, _ = build_state_space_n1()
        np.testing.assert_allclose(controllability_matrix(ss), [[1.0]])
        np.testing.assert_allclose(observability_matrix(ss), [[1.0]])

    def test_example1_krylov_recurrence(self, example1):
        ss, _ = example1
        b = ss.b
        ab = ss.a @ b
        a2b = ss.a @ ab
        np.testing.assert_allclose(a2b, -b - 8 * ab, atol=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_rank_duality(self, seed):
        rng = np.random.default_rng(700 + seed)
        ss, _ = build_state_space(random_network(rng))
        rank_c, rank_o = krylov_ranks(ss)
        assert rank_c == rank_o

    @pytest.mark.parametrize("seed", range(10))
    def test_rank_duality_raw_svd_moderate_scales(self, seed):
        # the raw spectral-threshold ranks are only meaningful when the
        # Krylov columns do not span many decades
        rng = np.random.default_rng(750 + seed)
        spec = random_network(rng, vol_range=(0.2, 5.0), rate_range=(0.2, 5.0))
        ss, _ = build_state_space(spec)
        rank_c = linalg.numerical_rank(controllability_matrix(ss))
        rank_o = linalg.numerical_rank(observability_matrix(ss))
        assert rank_c == rank_o
        assert (rank_c, rank_o) == krylov_ranks(ss)


def build_state_space_n1():
    from porous_equiv import NetworkSpec
    return build_state_space(NetworkSpec(volumes=(1.0,)))


class TestMinimality:
    def test_example1_not_minimal(self, example1):
        ss, _ = example1
        report = is_minimal(ss)
        assert not report
        assert report.rank == 2
        assert report.dimension == 4
        assert len(report.singular_values) == 4
        assert report.singular_values[1] / report.singular_values[2] > 1e10

    def test_example2_minimal(self, example2):
        ss, _ = example2
        assert is_minimal(ss)

    def test_single_compartment_minimal(self):
        ss, _ = build_state_space_n1()
        assert is_minimal(ss)

    def test_duplicate_rate_groups_reported(self):
        from porous_equiv import NetworkSpec
        # star with zones 2 and 4 sharing rate 1.0
        spec = NetworkSpec(
            volumes=(1.0, 2.0, 1.0, 3.0),
            edges=((1, 2, 2.0), (1, 3, 5.0), (1, 4, 3.0)),
        )
        ss, _ = build_state_space(spec)
        report = is_minimal(ss)
        assert not report.minimal
        assert report.rank == 3
        assert report.duplicate_rate_groups == ((2, 4),)

    def test_non_star_has_no_rate_groups(self, example2):
        ss, _ = example2
        assert is_minimal(ss).duplicate_rate_groups is None


class TestMarkov:
    def test_first_parameter_is_one(self, example2):
        ss, _ = example2
        m = markov_parameters(ss, 3)
        assert m[0] == 1.0
        assert m[1] == ss.a[0, 0]

    def test_reference_forms_agree(self, example2):
        ss, _ = example2
        # published star and chain forms carry 7 significant digits
        assert markov_deviation(ss, EXAMPLE2_MRMT, 10) < 1e-6
        assert markov_deviation(ss, EXAMPLE2_MINC, 10) < 1e-6

    def test_example1_full_vs_reduced(self):
        full = markov_parameters(EXAMPLE1_A, 6)
        reduced = markov_parameters(EXAMPLE1_REDUCED_A, 6)
        np.testing.assert_allclose(full, reduced, rtol=1e-12, atol=1e-12)


class TestTransferFunction:
    def test_example2_coefficients(self, example2):
        ss, _ = example2
        tf = transfer_function(ss)
        np.testing.assert_allclose(tf.num, EXAMPLE2_TF_NUM, atol=1e-9)
        np.testing.assert_allclose(tf.den, EXAMPLE2_TF_DEN, atol=1e-9)

    def test_single_compartment(self):
        ss, _ = build_state_space_n1()
        tf = transfer_function(ss)
        np.testing.assert_allclose(tf.num, [1.0])
        np.testing.assert_allclose(tf.den, [1.0, 1.0])

    def test_example1_coprime_reduction(self):
        tf = transfer_function(EXAMPLE1_A)
        # the non-minimal modes cancel: the 2x2 aggregate gives
        # (z + 1) / ((z + 7)(z + 1) - 6) by direct elimination
        assert len(tf.den) == 3
        np.testing.assert_allclose(tf.num, [1.0, 1.0], atol=1e-9)
        np.testing.assert_allclose(tf.den, [1.0, 8.0, 1.0], atol=1e-9)
        reduced = transfer_function(EXAMPLE1_REDUCED_A)
        np.testing.assert_allclose(reduced.num, tf.num, atol=1e-12)
        np.testing.assert_allclose(reduced.den, tf.den, atol=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_dc_gain_one_and_hurwitz(self, seed):
        rng = np.random.default_rng(800 + seed)
        ss, _ = build_state_space(random_network(rng))
        tf = transfer_function(ss)
        assert tf.dc_gain == pytest.approx(1.0, abs=1e-9)
        assert np.all(tf.poles().real < 0)

    @pytest.mark.parametrize("seed", range(8))
    def test_similarity_invariance(self, seed):
        # moderate rate spread: the transformed matrix loses the network
        # structure, so its coefficients go through the general recursion
        rng = np.random.default_rng(900 + seed)
        spec = random_network(rng, n=int(rng.integers(2, 7)),
                              vol_range=(0.1, 10.0), rate_range=(0.1, 10.0))
        ss, _ = build_state_space(spec)
        n = ss.n
        r = np.eye(n)
        r[1:, 1:] = rng.normal(size=(n - 1, n - 1)) + 3 * np.eye(n - 1)
        transformed = linalg.solve(r, ss.a @ r)
        tf_a = transfer_function(ss)
        tf_b = transfer_function(transformed)
        scale = max(1.0, np.max(np.abs(tf_a.den)))
        assert max(
            np.max(np.abs(np.subtract(tf_a.num, tf_b.num))),
            np.max(np.abs(np.subtract(tf_a.den, tf_b.den))),
        ) < 1e-8 * scale

    def test_strict_properness_enforced(self):
        with pytest.raises(ValueError):
            TransferFunction(num=(1.0, 2.0), den=(1.0, 1.0))


class TestFrequencyResponse:
    def test_dc_of_first_order(self):
        tf = TransferFunction(num=(1.0,), den=(1.0, 1.0))
        value = frequency_response(tf, [0.0])[0]
        assert value == pytest.approx(1.0 + 0.0j)

    def test_example2_dc_gain(self, example2):
        ss, _ = example2
        tf = transfer_function(ss)
        value = frequency_response(tf, [0.0])[0]
        assert value.real == pytest.approx(1.0, abs=1e-12)
        assert value.imag == pytest.approx(0.0, abs=1e-12)

    def test_rolloff(self, example2):
        ss, _ = example2
        tf = transfer_function(ss)
        high = frequency_response(tf, [1e6])[0]
        assert abs(high) < 1e-5

    def test_pole_on_axis(self):
        tf = TransferFunction(num=(1.0,), den=(0.0, 1.0))  # pole at z = 0
        with pytest.raises(PoleOnAxisError):
            frequency_response(tf, [1.0])
