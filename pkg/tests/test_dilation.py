"""Tests for canonical dilations, minimality and fiber-map recovery."""

from __future__ import annotations

import math

import numpy as np
import pytest

from rowdil.dilation import (
    DilationMap,
    adjoint_powers,
    canonical_dilation,
    factor_dilation,
    is_minimal,
    match_minimal_dilations,
    minimality_rank,
    validate_dilation,
)
from rowdil.errors import DimensionMismatch, NotDilation, NotMinimal, NotPure
from rowdil.kernel_spaces import KernelSpec, MultiIndex, TruncatedSpace
from rowdil.numerics import Tolerances, operator_norm, random_isometry, random_unitary
from rowdil.row_contractions import (
    OperatorTuple,
    compressed_shift,
    defect,
    purity_residuals,
    random_pure_tuple,
    random_spherical_unitary,
)

SHIFT_2 = np.array([[0.0, 0.0], [1.0, 0.0]])
ROT_30 = np.array(
    [
        [math.cos(math.pi / 6), -math.sin(math.pi / 6)],
        [math.sin(math.pi / 6), math.cos(math.pi / 6)],
    ]
)


def _shift(n, N, lam=1.0):
    return compressed_shift(TruncatedSpace(KernelSpec(n, lam), max_degree=N))


def _unitary_error(U):
    return operator_norm(U.conj().T @ U - np.eye(U.shape[1]))


# ── DilationMap ──────────────────────────────────────────────────────


class TestDilationMap:
    """Tests for the coefficient container."""

    def test_missing_coefficients_are_zero(self):
        """Unlisted multi-indices get zero blocks."""
        Pi = DilationMap(n=2, source_dim=3, fiber_dim=1, degree_cut=2)
        assert len(Pi.indices) == 6
        assert np.all(Pi.matrix() == 0)
        assert Pi.matrix().shape == (6, 3)

    def test_rejects_bad_shape(self):
        """Every block is fiber_dim x source_dim."""
        with pytest.raises(DimensionMismatch):
            DilationMap(n=1, source_dim=2, fiber_dim=1, degree_cut=1, coefficients={MultiIndex((0,)): np.eye(2)})

    def test_rejects_key_past_cut(self):
        """Keys beyond degree_cut are rejected."""
        with pytest.raises(DimensionMismatch, match="outside"):
            DilationMap(
                n=1,
                source_dim=1,
                fiber_dim=1,
                degree_cut=1,
                coefficients={MultiIndex((2,)): np.ones((1, 1))},
            )

    def test_coordinate_weights(self):
        """Coordinate blocks carry sqrt(k! / |k|!)."""
        Pi = DilationMap(
            n=2,
            source_dim=1,
            fiber_dim=1,
            degree_cut=2,
            coefficients={MultiIndex((1, 1)): np.ones((1, 1))},
        )
        assert Pi.coordinate_block(MultiIndex((1, 1)))[0, 0] == pytest.approx(math.sqrt(0.5))
        assert Pi.gram()[0, 0] == pytest.approx(0.5)

    def test_with_fiber_map(self):
        """(I tensor W) Pi multiplies every coefficient."""
        Pi = canonical_dilation(random_pure_tuple(2, 3, seed=0, nilpotent=True), 3)
        W = random_isometry(Pi.fiber_dim + 1, Pi.fiber_dim, rng=1)
        scrambled = Pi.with_fiber_map(W)
        assert scrambled.fiber_dim == Pi.fiber_dim + 1
        for k in Pi.indices:
            np.testing.assert_allclose(scrambled.coefficients[k], W @ Pi.coefficients[k])
        with pytest.raises(DimensionMismatch):
            Pi.with_fiber_map(np.eye(Pi.fiber_dim + 1))


# ── canonical_dilation ───────────────────────────────────────────────


class TestCanonicalDilation:
    """Tests for the canonical dilation of pure row contractions."""

    def test_zero_tuple(self):
        """T = 0 on C embeds onto the constants."""
        Pi = canonical_dilation(OperatorTuple([np.zeros((1, 1))]), 2)
        assert Pi.fiber_dim == 1
        assert Pi.coefficients[MultiIndex((0,))][0, 0] == pytest.approx(1.0)
        assert all(np.all(c == 0) for k, c in Pi.coefficients.items() if k.degree > 0)

    def test_two_dim_shift(self):
        """Shift on span{1, z}: c_0 = (1, 0), c_1 = (0, 1)."""
        Pi = canonical_dilation(OperatorTuple([SHIFT_2]), 2)
        np.testing.assert_allclose(Pi.coefficients[MultiIndex((0,))], [[1.0, 0.0]], atol=1e-15)
        np.testing.assert_allclose(Pi.coefficients[MultiIndex((1,))], [[0.0, 1.0]], atol=1e-15)
        np.testing.assert_allclose(Pi.coefficients[MultiIndex((2,))], [[0.0, 0.0]], atol=1e-15)

    def test_drury_arveson_isometry(self):
        """Compressed shift n = 2, N = 2: Pi* Pi = I."""
        Pi = canonical_dilation(_shift(2, 2), 2)
        assert Pi.isometry_defect() < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("N", [1, 2, 3, 4])
    def test_compressed_shift_suite(self, n, N):
        """Isometric, intertwining and minimal for every compressed shift."""
        T = _shift(n, N)
        Pi = canonical_dilation(T, N)
        assert Pi.isometry_defect() <= 1e-10
        assert Pi.intertwining_residual(T) <= 1e-10
        assert minimality_rank(Pi) == defect(T).defect_dim

    @pytest.mark.parametrize("lam", [2.0, 3.0])
    def test_weighted_shifts(self, lam):
        """Compressed H(K_lambda) shifts dilate into Drury-Arveson space as well."""
        T = _shift(2, 3, lam)
        Pi = canonical_dilation(T, 3)
        assert Pi.isometry_defect() <= 1e-10
        assert Pi.intertwining_residual(T) <= 1e-10
        assert is_minimal(Pi)

    def test_not_pure(self):
        """A spherical unitary is rejected with its residual."""
        with pytest.raises(NotPure) as excinfo:
            canonical_dilation(random_spherical_unitary(2, 3, seed=0), 5)
        assert excinfo.value.residual == pytest.approx(1.0)
        assert excinfo.value.n_cut == 5

    def test_defect_equals_purity_tail(self):
        """For a non-nilpotent tuple the isometry defect is the purity tail."""
        T = random_pure_tuple(2, 3, seed=2)
        loose = Tolerances(residual_tol=0.5)
        Pi = canonical_dilation(T, 3, loose)
        tail = purity_residuals(T, 4)[-1]
        assert Pi.isometry_defect() == pytest.approx(tail, rel=1e-6)
        assert Pi.intertwining_residual(T) <= 1e-10

    def test_intertwining_detects_wrong_tuple(self):
        """The residual is positive against a different tuple."""
        Pi = canonical_dilation(_shift(2, 2), 2)
        other = _shift(2, 2).mixed(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert Pi.intertwining_residual(other) > 0.1

    def test_adjoint_powers(self):
        """T*^k is the adjoint of T^k."""
        T = random_pure_tuple(2, 4, seed=3)
        for k, Pk in adjoint_powers(T, 3).items():
            np.testing.assert_allclose(Pk, T.power(k).conj().T, atol=1e-13)


# ── Minimality ───────────────────────────────────────────────────────


class TestMinimality:
    """Tests for the coefficient-rank minimality surrogate."""

    @pytest.mark.parametrize("seed", range(3))
    def test_canonical_is_minimal(self, seed):
        """The canonical dilation has rank equal to its defect dimension."""
        T = random_pure_tuple(2, 4, seed=seed, nilpotent=True)
        Pi = canonical_dilation(T, 3)
        assert minimality_rank(Pi) == defect(T).defect_dim == Pi.fiber_dim

    def test_embedded_not_minimal(self):
        """A non-surjective fiber isometry breaks minimality."""
        Pi = canonical_dilation(_shift(2, 2), 2)
        embedded = Pi.with_fiber_map(random_isometry(3, 1, rng=0))
        assert minimality_rank(embedded) == 1
        assert not is_minimal(embedded)

    def test_zero_map(self):
        """The zero map has rank 0."""
        assert minimality_rank(DilationMap(n=2, source_dim=2, fiber_dim=2, degree_cut=1)) == 0


# ── Uniqueness and factorization ─────────────────────────────────────


class TestMatchMinimalDilations:
    """Tests for recovering the unitary between minimal dilations."""

    def test_rotation(self):
        """A 30 degree fiber rotation is recovered exactly."""
        Pi1 = canonical_dilation(OperatorTuple([np.zeros((2, 2))]), 1)
        Pi2 = Pi1.with_fiber_map(ROT_30)
        U, residual = match_minimal_dilations(Pi1, Pi2)
        np.testing.assert_allclose(U, ROT_30, atol=1e-12)
        assert residual < 1e-12

    def test_identity(self):
        """Matching a dilation with itself gives I."""
        Pi = canonical_dilation(_shift(2, 3), 3)
        U, residual = match_minimal_dilations(Pi, Pi)
        np.testing.assert_allclose(U, np.eye(Pi.fiber_dim), atol=1e-12)
        assert residual < 1e-12

    @pytest.mark.parametrize("seed", range(20))
    def test_seeded_scrambles(self, seed):
        """Uniqueness up to a unitary, realized on 20 seeded scrambles."""
        T = random_pure_tuple(2, 4, seed=100 + seed, nilpotent=True)
        Pi = canonical_dilation(T, 3)
        U0 = random_unitary(Pi.fiber_dim, seed)
        U, residual = match_minimal_dilations(Pi, Pi.with_fiber_map(U0))
        assert residual < 1e-10
        assert operator_norm(U - U0) <= 1e-8
        assert _unitary_error(U) <= 1e-8

    def test_not_minimal(self):
        """Both dilations must be minimal."""
        Pi = canonical_dilation(_shift(2, 2), 2)
        with pytest.raises(NotMinimal):
            match_minimal_dilations(Pi, Pi.with_fiber_map(np.array([[1.0], [0.0]])))

    def test_header_mismatch(self):
        """Different degree cuts cannot be matched."""
        T = _shift(2, 2)
        with pytest.raises(DimensionMismatch, match="degree_cut"):
            match_minimal_dilations(canonical_dilation(T, 2), canonical_dilation(T, 3))


class TestFactorDilation:
    """Tests for factoring a dilation through the canonical one."""

    def test_identity(self):
        """Pi = Pic gives V = I."""
        T = random_pure_tuple(2, 3, seed=5, nilpotent=True)
        Pic = canonical_dilation(T, 3)
        V, residual = factor_dilation(Pic, Pic, T)
        np.testing.assert_allclose(V, np.eye(Pic.fiber_dim), atol=1e-12)
        assert residual < 1e-12

    def test_inclusion(self):
        """Embedding into E_c plus C^2 is recovered as the inclusion."""
        T = random_pure_tuple(2, 3, seed=6, nilpotent=True)
        Pic = canonical_dilation(T, 3)
        e = Pic.fiber_dim
        inclusion = np.vstack([np.eye(e), np.zeros((2, e))])
        V, residual = factor_dilation(Pic.with_fiber_map(inclusion), Pic, T)
        np.testing.assert_allclose(V, inclusion, atol=1e-12)
        assert residual < 1e-12

    @pytest.mark.parametrize("seed", range(20))
    def test_seeded_isometries(self, seed):
        """Random isometric embeddings are recovered with V* V = I."""
        T = random_pure_tuple(3, 5, seed=200 + seed, nilpotent=True)
        Pic = canonical_dilation(T, 4)
        W = random_isometry(Pic.fiber_dim + 2, Pic.fiber_dim, rng=seed)
        V, residual = factor_dilation(Pic.with_fiber_map(W), Pic, T)
        assert residual <= 1e-8
        assert _unitary_error(V) <= 1e-8
        np.testing.assert_allclose(V, W, atol=1e-10)

    def test_rejects_non_isometric(self):
        """A map that is not isometric is not a dilation."""
        Pic = canonical_dilation(_shift(2, 2), 2)
        with pytest.raises(NotDilation, match="isometric"):
            factor_dilation(Pic.with_fiber_map(2.0 * np.eye(Pic.fiber_dim)), Pic)

    def test_rejects_non_intertwining(self):
        """A map for another tuple fails the intertwining check."""
        T = _shift(2, 2)
        swapped = T.mixed(np.array([[0.0, 1.0], [1.0, 0.0]]))
        Pi_other = canonical_dilation(swapped, 2)
        with pytest.raises(NotDilation, match="intertwine"):
            validate_dilation(Pi_other, T)

    def test_validate_passes(self):
        """Canonical dilations validate against their own tuple."""
        T = _shift(3, 2)
        iso, inter = validate_dilation(canonical_dilation(T, 2), T)
        assert iso < 1e-12
        assert inter < 1e-12
