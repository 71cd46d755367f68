"""Tests for polynomial multipliers, K-inner functions and multiplier norms."""

from __future__ import annotations

import math

import numpy as np
import pytest

from rowdil.errors import (
    DimensionMismatch,
    NotHomogeneous,
    NotPartialIsometry,
    NotQuasiHomogeneous,
    ZeroPolynomial,
)
from rowdil.inner_functions import (
    MatrixPolynomial,
    QuasiHomogeneityCertificate,
    beurling_wandering,
    hk_norm,
    is_K_inner,
    multiplier_block_norm,
    multiplier_from_representation,
    multiplier_matrix,
    multiplier_norm_truncated,
    non_closed_range_probe,
    quasi_homogeneous_decompose,
    verify_norm_equality,
)
from rowdil.invariant_subspaces import representation_via_dilation, zero_based_subspace
from rowdil.kernel_spaces import KernelSpec, MultiIndex, TruncatedSpace
from rowdil.numerics import random_unitary
from rowdil.row_contractions import compressed_shift

DA2 = KernelSpec.drury_arveson(2)


def _scalar(n, terms):
    return MatrixPolynomial.scalar(n, terms)


# ── MatrixPolynomial ─────────────────────────────────────────────────


class TestMatrixPolynomial:
    """Tests for the coefficient container."""

    def test_drops_zero_coefficients(self):
        """Zero coefficients do not enter the support."""
        p = _scalar(2, {"1,0": 1.0, "0,1": 0.0})
        assert p.support == [MultiIndex((1, 0))]
        assert p.degree == 1

    def test_zero_polynomial(self):
        """An empty coefficient map is the zero polynomial."""
        p = _scalar(2, {})
        assert p.is_zero
        assert p.degree == 0

    def test_shape_checked(self):
        """Coefficients of the wrong shape are rejected."""
        with pytest.raises(DimensionMismatch):
            MatrixPolynomial(n=2, source_dim=2, target_dim=1, coefficients={MultiIndex((1, 0)): np.eye(2)})

    def test_key_length_checked(self):
        """Keys must have n entries."""
        with pytest.raises(DimensionMismatch):
            _scalar(2, {"1,0,0": 1.0})

    def test_evaluate(self):
        """Evaluation sums the monomials."""
        p = _scalar(2, {"2,0": 1.0, "0,1": 3.0})
        np.testing.assert_allclose(p([0.5, 0.1]), [[0.25 + 0.3]])

    def test_homogeneity(self):
        assert _scalar(2, {"2,0": 1.0, "1,1": 1.0}).is_homogeneous
        assert not _scalar(2, {"2,0": 1.0, "0,1": 1.0}).is_homogeneous

    def test_restricted(self):
        """Restriction multiplies every coefficient on the right."""
        Theta = MatrixPolynomial(n=1, source_dim=2, target_dim=1, coefficients={MultiIndex((1,)): [[1.0, 2.0]]})
        sub = Theta.restricted(np.array([[0.0], [1.0]]))
        assert sub.source_dim == 1
        np.testing.assert_allclose(sub.coefficient(MultiIndex((1,))), [[2.0]])
        np.testing.assert_allclose(sub.coefficient(MultiIndex((0,))), [[0.0]])


# ── H(K) norm ────────────────────────────────────────────────────────


class TestHkNorm:
    """Tests for the weighted coefficient norm."""

    def test_constant(self):
        assert hk_norm(_scalar(2, {"0,0": 1.0}), DA2) == pytest.approx(1.0)

    def test_z1z2(self):
        """||z1 z2||^2 = 1/2 in Drury-Arveson space."""
        assert hk_norm(_scalar(2, {"1,1": 1.0}), DA2) == pytest.approx(math.sqrt(0.5))

    def test_cube_lambda_two(self):
        """||z^3||^2 = 3! / (2)_3 = 1/4."""
        assert hk_norm(_scalar(1, {"3": 1.0}), KernelSpec(1, 2.0)) == pytest.approx(0.5)

    def test_needs_single_column(self):
        Theta = MatrixPolynomial.constant(2, np.eye(2))
        with pytest.raises(DimensionMismatch):
            hk_norm(Theta, DA2)


# ── K-inner ──────────────────────────────────────────────────────────


class TestIsKInner:
    """Tests for the coefficient form of the K-inner conditions."""

    def test_normalized_monomial(self):
        """sqrt(2) z1 z2 is K-inner for Drury-Arveson space."""
        ok, violation = is_K_inner(_scalar(2, {"1,1": math.sqrt(2)}), DA2)
        assert ok
        assert violation < 1e-12

    def test_shift_condition_fails(self):
        """(1 + z) / sqrt(2) has unit norm but is not K-inner."""
        p = _scalar(1, {"0": 1 / math.sqrt(2), "1": 1 / math.sqrt(2)})
        ok, violation = is_K_inner(p, KernelSpec.drury_arveson(1))
        assert not ok
        assert violation == pytest.approx(0.5)

    def test_wrong_norm(self):
        ok, violation = is_K_inner(_scalar(2, {"1,1": 1.0}), DA2)
        assert not ok
        assert violation == pytest.approx(0.5)

    def test_row_of_coordinates(self):
        """[z1, z2] U is K-inner for any unitary U."""
        U = random_unitary(2, 3)
        Theta = MatrixPolynomial(
            n=2,
            source_dim=2,
            target_dim=1,
            coefficients={MultiIndex((1, 0)): U[0:1, :], MultiIndex((0, 1)): U[1:2, :]},
        )
        ok, violation = is_K_inner(Theta, DA2)
        assert ok, violation

    def test_probe_degree_too_small(self):
        with pytest.raises(ValueError, match="probe_degree"):
            is_K_inner(_scalar(2, {"1,1": 1.0}), DA2, probe_degree=2)


# ── Quasi-homogeneity ────────────────────────────────────────────────


class TestQuasiHomogeneous:
    """Tests for the weight search."""

    def test_mixed_weights(self):
        """z1^2 + z2 is leveled by weights (1, 2)."""
        cert = quasi_homogeneous_decompose(_scalar(2, {"2,0": 1.0, "0,1": 1.0}))
        assert cert == QuasiHomogeneityCertificate((1, 2), 2)

    def test_homogeneous(self):
        cert = quasi_homogeneous_decompose(_scalar(2, {"1,0": 1.0, "0,1": 1.0}))
        assert cert == QuasiHomogeneityCertificate((1, 1), 1)

    def test_none(self):
        """1 + z1 is not quasi-homogeneous."""
        assert quasi_homogeneous_decompose(_scalar(2, {"0,0": 1.0, "1,0": 1.0})) is None

    def test_zero_raises(self):
        with pytest.raises(ZeroPolynomial):
            quasi_homogeneous_decompose(_scalar(2, {}))

    def test_certifies(self):
        cert = QuasiHomogeneityCertificate((1, 2), 2)
        assert cert.level(MultiIndex((2, 1))) == 4
        assert cert.certifies(_scalar(2, {"2,0": 1.0}))
        assert not cert.certifies(_scalar(2, {"1,0": 1.0}))


# ── Block norms ──────────────────────────────────────────────────────


class TestMultiplierBlockNorm:
    """Tests for the quasi-homogeneous block decomposition of M_p."""

    def test_block_zero_is_hk_norm(self):
        """Block 0 acts on the constants, so its norm is ||p||."""
        p = _scalar(2, {"2,0": 1.0, "0,1": 2.0})
        spec = KernelSpec(2, 2.0)
        cert = quasi_homogeneous_decompose(p)
        assert multiplier_block_norm(p, spec, cert, 0) == pytest.approx(hk_norm(p, spec))

    def test_shift_on_hardy_disc(self):
        """Every block of z on the disc has norm one."""
        p = _scalar(1, {"1": 1.0})
        cert = quasi_homogeneous_decompose(p)
        spec = KernelSpec.hardy(1)
        for block in range(6):
            assert multiplier_block_norm(p, spec, cert, block) == pytest.approx(1.0)

    def test_empty_block(self):
        """A level with no monomials gives a zero block."""
        p = _scalar(2, {"1,0": 1.0})
        cert = QuasiHomogeneityCertificate((2, 2), 2)
        assert multiplier_block_norm(p, DA2, cert, 1) == 0.0

    def test_rejects_wrong_certificate(self):
        p = _scalar(2, {"2,0": 1.0, "0,1": 1.0})
        with pytest.raises(NotQuasiHomogeneous):
            multiplier_block_norm(p, DA2, QuasiHomogeneityCertificate((1, 1), 2), 0)


class TestVerifyNormEquality:
    """Tests for the multiplier norm of quasi-homogeneous polynomials."""

    @pytest.mark.parametrize("terms", [{"1,1": 1.0}, {"2,0": 1.0, "0,1": 1.0}, {"3,0": 1.0}])
    @pytest.mark.parametrize("lam", [1.0, 2.0, 3.0])
    def test_max_block_equals_hk_norm(self, terms, lam):
        """The largest block norm is the H(K) norm."""
        p = _scalar(2, terms)
        report = verify_norm_equality(p, KernelSpec(2, lam), block_max=12)
        assert report.max_block == pytest.approx(report.hk_norm, abs=1e-9)
        assert report.passed
        assert report.k_inner

    def test_report_dict(self):
        report = verify_norm_equality(_scalar(2, {"1,1": 1.0}), DA2, block_max=3)
        data = report.to_dict()
        assert data["pass"] is True
        assert len(data["block_norms"]) == 4
        assert data["certificate"] == {"weights": [1, 1], "degree": 2}

    def test_constant(self):
        """Every block of a constant has norm |c|."""
        report = verify_norm_equality(_scalar(2, {"0,0": -3.0}), DA2, block_max=5)
        np.testing.assert_allclose(report.block_norms, 3.0)
        assert report.passed

    def test_scaling(self):
        """Block norms and the H(K) norm scale by |c|."""
        p = _scalar(2, {"2,0": 1.0, "0,1": 0.5j})
        spec = KernelSpec(2, 2.0)
        base = verify_norm_equality(p, spec, block_max=4)
        scaled = verify_norm_equality(p.scaled(-2.0j), spec, block_max=4)
        assert scaled.hk_norm == pytest.approx(2 * base.hk_norm)
        np.testing.assert_allclose(scaled.block_norms, 2 * np.asarray(base.block_norms), rtol=1e-12)

    def test_blocks_match_truncation(self):
        """For homogeneous p the truncated norm is the max over blocks up to N."""
        p = _scalar(2, {"2,0": 1.0, "1,1": -0.5})
        cert = quasi_homogeneous_decompose(p)
        for N in range(5):
            blocks = [multiplier_block_norm(p, DA2, cert, b) for b in range(N + 1)]
            assert multiplier_norm_truncated(p, DA2, N) == pytest.approx(max(blocks), abs=1e-10)

    def test_not_quasi_homogeneous(self):
        with pytest.raises(NotQuasiHomogeneous):
            verify_norm_equality(_scalar(2, {"0,0": 1.0, "1,0": 1.0}), DA2, block_max=2)


# ── Truncated multiplier ─────────────────────────────────────────────


class TestMultiplierMatrix:
    """Tests for the truncated multiplication operator."""

    def test_shapes(self):
        Theta = MatrixPolynomial(n=2, source_dim=2, target_dim=1, coefficients={MultiIndex((1, 0)): [[1.0, 0.0]]})
        M, domain, codomain = multiplier_matrix(Theta, DA2, 3)
        assert domain.max_degree == 3
        assert codomain.max_degree == 4
        assert M.shape == (codomain.num_monomials, 2 * domain.num_monomials)

    def test_constant_is_embedding(self):
        """A constant unitary acts as itself on every fiber."""
        U = random_unitary(2, 0)
        M, _, codomain = multiplier_matrix(MatrixPolynomial.constant(2, U), DA2, 2)
        np.testing.assert_allclose(M, np.kron(np.eye(codomain.num_monomials), U), atol=1e-14)

    def test_kernel_mismatch(self):
        with pytest.raises(DimensionMismatch):
            multiplier_matrix(_scalar(2, {"1,0": 1.0}), KernelSpec(3, 1.0), 2)

    def test_degree_zero_is_hk_norm(self):
        p = _scalar(2, {"2,0": 1.0, "1,1": 2.0})
        spec = KernelSpec(2, 2.0)
        assert multiplier_norm_truncated(p, spec, 0) == pytest.approx(hk_norm(p, spec))

    def test_nondecreasing(self):
        p = _scalar(2, {"0,0": 1.0, "1,0": 0.5, "1,1": 1.0})
        norms = [multiplier_norm_truncated(p, DA2, N) for N in range(6)]
        assert all(b >= a - 1e-12 for a, b in zip(norms, norms[1:]))

    def test_k_inner_is_contractive(self):
        """sqrt(2) z1 z2 is a contractive multiplier."""
        p = _scalar(2, {"1,1": math.sqrt(2)})
        for N in range(11):
            assert multiplier_norm_truncated(p, DA2, N) <= 1 + 1e-9

    def test_non_inner_exceeds_one(self):
        """1 + z on the disc has multiplier norm approaching 2."""
        p = _scalar(1, {"0": 1.0, "1": 1.0})
        value = multiplier_norm_truncated(p, KernelSpec.hardy(1), 8)
        assert 1.9 < value < 2.0
        assert value == pytest.approx(math.sqrt(2 + 2 * math.cos(math.pi / 10)))


# ── Beurling decomposition ───────────────────────────────────────────


class TestBeurlingWandering:
    """Tests for splitting a partially isometric multiplier."""

    def test_constant_identity(self):
        result = beurling_wandering(MatrixPolynomial.constant(2, np.eye(2)), DA2, 3)
        assert result.F_basis.shape == (2, 2)
        assert result.is_generating
        assert result.theta0_k_inner

    def test_row_of_coordinates(self):
        """[z1, z2] U is a partial isometry whose whole fiber generates."""
        U = random_unitary(2, 5)
        Theta = MatrixPolynomial(
            n=2,
            source_dim=2,
            target_dim=1,
            coefficients={MultiIndex((1, 0)): U[0:1, :], MultiIndex((0, 1)): U[1:2, :]},
        )
        result = beurling_wandering(Theta, DA2, 4)
        assert result.partial_isometry_residual < 1e-10
        assert result.F_basis.shape[1] == 2
        assert result.is_generating

    def test_not_partial_isometry(self):
        """diag(sqrt(2) z1 z2, 0) is not a partial isometry."""
        Theta = MatrixPolynomial(
            n=2,
            source_dim=2,
            target_dim=2,
            coefficients={MultiIndex((1, 1)): np.diag([math.sqrt(2), 0.0])},
        )
        with pytest.raises(NotPartialIsometry):
            beurling_wandering(Theta, DA2, 4)

    def test_diagonal_example(self):
        """The first fiber slot carries the K-inner part and generates."""
        Theta = MatrixPolynomial(
            n=2,
            source_dim=2,
            target_dim=2,
            coefficients={MultiIndex((1, 1)): np.diag([math.sqrt(2), 0.0])},
        )
        result = beurling_wandering(Theta, DA2, 4, require_partial_isometry=False)
        assert result.F_basis.shape == (2, 1)
        np.testing.assert_allclose(np.abs(result.F_basis[:, 0]), [1.0, 0.0], atol=1e-12)
        assert result.theta0_k_inner
        assert result.is_generating


# ── Range probe ──────────────────────────────────────────────────────


class TestNonClosedRangeProbe:
    """Tests for the smallest nonzero singular value of truncated M_p."""

    def test_z1_in_two_variables(self):
        """sigma_min(M_z1) = 1 / sqrt(N + 1)."""
        n_list = [1, 2, 3, 4, 6, 8]
        values = non_closed_range_probe(_scalar(2, {"1,0": 1.0}), n_list)
        np.testing.assert_allclose(values, [1 / math.sqrt(N + 1) for N in n_list], rtol=1e-10)
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_z1z2(self):
        n_list = [1, 3, 5]
        values = non_closed_range_probe(_scalar(2, {"1,1": 1.0}), n_list)
        np.testing.assert_allclose(values, [1 / math.sqrt(N + 2) for N in n_list], rtol=1e-10)

    def test_one_variable_closed(self):
        """On the disc multiplication by z is an isometry."""
        values = non_closed_range_probe(_scalar(1, {"1": 1.0}), [1, 4, 8])
        np.testing.assert_allclose(values, 1.0, rtol=1e-12)

    def test_other_kernel(self):
        values = non_closed_range_probe(_scalar(2, {"1,0": 1.0}), [2, 4], spec=KernelSpec.hardy(2))
        assert len(values) == 2
        assert all(v > 0 for v in values)

    @pytest.mark.parametrize("terms", [{"1,0": 1.0, "2,0": 1.0}, {"0,0": 1.0}, {}])
    def test_rejects(self, terms):
        with pytest.raises(NotHomogeneous):
            non_closed_range_probe(_scalar(2, terms), [2])


# ── From a representation ────────────────────────────────────────────


class TestMultiplierFromRepresentation:
    """Tests for reading Theta off a representation map."""

    def test_origin_subspace_gives_coordinate_row(self):
        """The functions vanishing at 0 are represented by [z1, z2] U."""
        space = TruncatedSpace(DA2, max_degree=5)
        T = compressed_shift(space)
        S = zero_based_subspace(space, [0.0, 0.0])
        Pi = representation_via_dilation(S, T, 5)
        Theta = multiplier_from_representation(Pi, space)
        assert Theta.source_dim == 2
        ok, violation = is_K_inner(Theta, DA2)
        assert ok, violation
        z = np.array([0.3, -0.2j])
        value = Theta(z)
        assert (value @ value.conj().T)[0, 0].real == pytest.approx(np.vdot(z, z).real)

    def test_dimension_mismatch(self):
        space = TruncatedSpace(DA2, max_degree=4)
        S = zero_based_subspace(space, [0.0, 0.0])
        Pi = representation_via_dilation(S, compressed_shift(space), 4)
        with pytest.raises(DimensionMismatch):
            multiplier_from_representation(Pi, TruncatedSpace(DA2, max_degree=3))

    def test_point_subspace_does_not_generate(self):
        """Theta for S_a is partially isometric, K-inner on F, and F does not generate."""
        space = TruncatedSpace(DA2, max_degree=10)
        Pi = representation_via_dilation(zero_based_subspace(space, [0.05, 0.0]), compressed_shift(space), 10)
        Theta = multiplier_from_representation(Pi, space)
        assert Theta.source_dim == 2
        result = beurling_wandering(Theta, DA2, 4)
        assert result.partial_isometry_residual < 1e-8
        assert result.F_basis.shape == (2, 1)
        assert result.theta0_k_inner, result.theta0_violation
        assert not result.is_generating
