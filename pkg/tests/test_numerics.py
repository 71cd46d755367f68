"""Tests for the shared linear-algebra primitives."""

from __future__ import annotations

import numpy as np
import pytest

from rowdil.errors import ConfigError, DimensionMismatch, NotPSD
from rowdil.numerics import (
    DEFAULT_TOLERANCES,
    PRESETS,
    Tolerances,
    complement_within,
    fix_phases,
    get_preset,
    intersect_subspaces,
    lstsq_intertwiner,
    null_space,
    numerical_rank,
    operator_norm,
    orthonormal_range,
    principal_angle_gap,
    psd_sqrt,
    random_isometry,
    random_unitary,
    unit_eigenspace,
)


def _random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# ── Tolerances ───────────────────────────────────────────────────────


class TestTolerances:
    """Tests for the Tolerances configuration object."""

    def test_defaults(self):
        """Defaults match the documented thresholds."""
        tol = Tolerances()
        assert tol.rank_tol == 1e-10
        assert tol.residual_tol == 1e-8
        assert tol.psd_clip == 1e-12

    @pytest.mark.parametrize("field", ["rank_tol", "residual_tol", "psd_clip"])
    @pytest.mark.parametrize("value", [0.0, -1e-3, 1.0, 2.0])
    def test_rejects_out_of_range(self, field, value):
        """Every field must lie strictly between 0 and 1."""
        with pytest.raises(ConfigError, match=field):
            Tolerances(**{field: value})

    def test_with_methods_copy(self):
        """with_* return modified copies."""
        tol = DEFAULT_TOLERANCES.with_residual_tol(1e-6)
        assert tol.residual_tol == 1e-6
        assert DEFAULT_TOLERANCES.residual_tol == 1e-8
        assert DEFAULT_TOLERANCES.with_rank_tol(1e-9).rank_tol == 1e-9
        assert DEFAULT_TOLERANCES.with_psd_clip(1e-11).psd_clip == 1e-11

    def test_from_env_override(self):
        """ROWDIL_TOL replaces residual_tol."""
        tol = DEFAULT_TOLERANCES.from_env({"ROWDIL_TOL": "1e-6"})
        assert tol.residual_tol == 1e-6

    def test_from_env_unset(self):
        """Missing variable leaves tolerances unchanged."""
        assert DEFAULT_TOLERANCES.from_env({}) == DEFAULT_TOLERANCES

    @pytest.mark.parametrize("raw", ["abc", "5", "-1e-3"])
    def test_from_env_invalid(self, raw):
        """Unparsable or out-of-range values are configuration errors."""
        with pytest.raises(ConfigError):
            DEFAULT_TOLERANCES.from_env({"ROWDIL_TOL": raw})

    def test_presets(self):
        """Named presets are available and unknown names list alternatives."""
        assert get_preset("default") == DEFAULT_TOLERANCES
        assert get_preset("strict").residual_tol < get_preset("loose").residual_tol
        assert set(PRESETS) == {"default", "strict", "loose"}
        with pytest.raises(KeyError, match="Available"):
            get_preset("nope")


# ── orthonormal_range ────────────────────────────────────────────────


class TestOrthonormalRange:
    """Tests for orthonormal_range and numerical_rank."""

    def test_identity(self):
        """Identity gives a full orthonormal basis."""
        Q = orthonormal_range(np.eye(3))
        assert Q.shape == (3, 3)
        np.testing.assert_allclose(Q.conj().T @ Q, np.eye(3), atol=1e-12)

    def test_proportional_columns(self):
        """Rank-one matrix gives one column."""
        assert orthonormal_range(np.array([[1.0, 2.0], [2.0, 4.0]])).shape == (2, 1)

    def test_dependent_column(self):
        """A column equal to the sum of two others does not add rank."""
        rng = np.random.default_rng(0)
        A = rng.standard_normal((5, 3))
        A[:, 2] = A[:, 0] + A[:, 1]
        Q = orthonormal_range(A)
        assert Q.shape == (5, 2)
        assert numerical_rank(A) == 2
        # span check: A is reproduced by projecting onto Q
        np.testing.assert_allclose(Q @ (Q.conj().T @ A), A, atol=1e-10)

    def test_zero_matrix(self):
        """Zero matrix has an empty range."""
        assert orthonormal_range(np.zeros((4, 2))).shape == (4, 0)
        assert numerical_rank(np.zeros((4, 2))) == 0

    def test_projection_stable(self):
        """Orthonormal input spans the same space after re-orthonormalizing."""
        Q = random_isometry(6, 3, rng=1)
        assert principal_angle_gap(orthonormal_range(Q), Q) < 1e-12

    def test_reference_scale(self):
        """An absolute reference suppresses uniformly tiny matrices."""
        A = 1e-14 * np.eye(2)
        assert numerical_rank(A) == 2
        assert numerical_rank(A, reference=1.0) == 0

    def test_phases_fixed(self):
        """Each column's largest entry is real and positive."""
        Q = orthonormal_range(np.array([[0.0, -2.0j], [1.0j, 0.0]]))
        pivots = np.argmax(np.abs(Q), axis=0)
        leading = Q[pivots, np.arange(Q.shape[1])]
        np.testing.assert_allclose(leading.imag, 0.0, atol=1e-15)
        assert np.all(leading.real > 0)

    def test_fix_phases_keeps_span(self):
        """Phase fixing does not move the span."""
        Q = random_isometry(5, 2, rng=4)
        assert principal_angle_gap(fix_phases(Q), Q) < 1e-12
        assert fix_phases(np.zeros((3, 0))).shape == (3, 0)

    def test_rejects_vector(self):
        """Non-2-D input is rejected."""
        with pytest.raises(DimensionMismatch, match="must be 2D"):
            orthonormal_range(np.ones(3))


class TestNullSpaceAndComplement:
    """Tests for null_space and complement_within."""

    def test_null_space(self):
        """Kernel of a rank-one map in C^3 is two-dimensional."""
        A = np.array([[1.0, 1.0, 0.0]])
        K = null_space(A)
        assert K.shape == (3, 2)
        np.testing.assert_allclose(A @ K, 0, atol=1e-12)

    def test_complement(self):
        """Complement of e1 inside span(e1, e2) is e2."""
        B = np.eye(3)[:, :2].astype(complex)
        C = complement_within(B, np.eye(3)[:, :1])
        assert C.shape == (3, 1)
        assert principal_angle_gap(C, np.eye(3)[:, 1:2]) < 1e-12

    def test_complement_of_nothing(self):
        """Removing an empty span leaves the basis alone."""
        B = np.eye(3)[:, :2]
        np.testing.assert_allclose(complement_within(B, np.zeros((3, 0))), B)


# ── psd_sqrt ─────────────────────────────────────────────────────────


class TestPsdSqrt:
    """Tests for the PSD square root."""

    def test_projection(self):
        """A projection is its own root."""
        np.testing.assert_allclose(psd_sqrt(np.diag([1.0, 0.0])), np.diag([1.0, 0.0]), atol=1e-12)

    def test_diagonal(self):
        """Diagonal entries are rooted."""
        np.testing.assert_allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-12)

    def test_nearly_singular(self):
        """Tiny and zero eigenvalues are handled through the spectral route."""
        U = random_unitary(3, rng=7)
        X = U @ np.diag([2.0, 1e-13, 0.0]) @ U.conj().T
        R = psd_sqrt(X)
        np.testing.assert_allclose(R, R.conj().T, atol=1e-14)
        assert np.linalg.eigvalsh(R).min() >= -1e-12
        assert operator_norm(R @ R - X) < 1e-10

    def test_random_projection_idempotent(self):
        """psd_sqrt(P) = P for orthogonal projections."""
        Q = random_isometry(5, 2, rng=3)
        P = Q @ Q.conj().T
        assert operator_norm(psd_sqrt(P) - P) <= DEFAULT_TOLERANCES.residual_tol

    def test_clips_small_negative(self):
        """Eigenvalues in [-psd_clip, 0] become zero."""
        R = psd_sqrt(np.diag([1.0, -5e-13]))
        np.testing.assert_allclose(R, np.diag([1.0, 0.0]), atol=1e-15)

    def test_rejects_negative(self):
        """A genuinely negative eigenvalue raises NotPSD."""
        with pytest.raises(NotPSD):
            psd_sqrt(np.diag([1.0, -1e-3]))

    def test_rejects_non_square(self):
        """Non-square input raises DimensionMismatch."""
        with pytest.raises(DimensionMismatch, match="square"):
            psd_sqrt(np.ones((2, 3)))


# ── operator_norm and principal_angle_gap ────────────────────────────


class TestOperatorNorm:
    """Tests for operator_norm."""

    def test_zero(self):
        assert operator_norm(np.zeros((3, 3))) == 0.0

    def test_unitary(self):
        assert operator_norm(random_unitary(4, rng=2)) == pytest.approx(1.0, rel=1e-12)

    def test_golden_ratio(self):
        """[[1,1],[0,1]] has norm (1 + sqrt 5) / 2."""
        assert operator_norm(np.array([[1.0, 1.0], [0.0, 1.0]])) == pytest.approx(
            (1 + np.sqrt(5)) / 2, rel=1e-12
        )

    def test_submultiplicative(self):
        """||AB|| <= ||A|| ||B|| on random pairs."""
        rng = np.random.default_rng(11)
        for _ in range(10):
            A = _random_complex(rng, (4, 4))
            B = _random_complex(rng, (4, 4))
            assert operator_norm(A @ B) <= operator_norm(A) * operator_norm(B) + 1e-10


class TestPrincipalAngleGap:
    """Tests for principal_angle_gap."""

    def test_equal(self):
        Q = random_isometry(4, 2, rng=5)
        assert principal_angle_gap(Q, Q) < 1e-12

    def test_orthogonal_lines(self):
        assert principal_angle_gap(np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]])) == pytest.approx(1.0)

    def test_diagonal_line(self):
        e1 = np.array([[1.0], [0.0]])
        d = np.array([[1.0], [1.0]]) / np.sqrt(2)
        assert principal_angle_gap(e1, d) == pytest.approx(1 / np.sqrt(2), rel=1e-12)

    def test_pseudometric(self):
        """Symmetric and satisfies the triangle inequality."""
        spans = [random_isometry(5, 2, rng=seed) for seed in range(3)]
        a, b, c = spans
        assert principal_angle_gap(a, b) == pytest.approx(principal_angle_gap(b, a), abs=1e-14)
        assert principal_angle_gap(a, c) <= principal_angle_gap(a, b) + principal_angle_gap(b, c) + 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            principal_angle_gap(np.eye(2), np.eye(3))


# ── intersections ────────────────────────────────────────────────────


class TestIntersections:
    """Tests for intersect_subspaces and unit_eigenspace."""

    def test_common_line(self):
        """Two planes in C^3 meet in a line."""
        P1 = np.eye(3)[:, :2]
        P2 = np.eye(3)[:, 1:]
        I = intersect_subspaces(P1, P2)
        assert I.shape == (3, 1)
        assert principal_angle_gap(I, np.eye(3)[:, 1:2]) < 1e-12

    def test_trivial_intersection(self):
        assert intersect_subspaces(np.eye(3)[:, :1], np.eye(3)[:, 1:]).shape == (3, 0)

    def test_empty_operand(self):
        assert intersect_subspaces(np.eye(3), np.zeros((3, 0))).shape == (3, 0)

    def test_unit_eigenspace(self):
        G = np.diag([1.0, 0.5, 1.0 - 1e-12, 0.0])
        assert unit_eigenspace(G).shape == (4, 2)


# ── lstsq_intertwiner ────────────────────────────────────────────────


class TestLstsqIntertwiner:
    """Tests for the stacked least-squares solver."""

    def test_identity_block(self):
        B = np.array([[1.0, 2.0], [3.0, 4.0]])
        X, residual = lstsq_intertwiner([np.eye(2)], [B])
        np.testing.assert_allclose(X, B, atol=1e-12)
        assert residual < 1e-12

    def test_overdetermined_consistent(self):
        """A known X is recovered exactly from several blocks."""
        rng = np.random.default_rng(4)
        X0 = _random_complex(rng, (3, 2))
        ins = [_random_complex(rng, (2, 3)) for _ in range(4)]
        X, residual = lstsq_intertwiner(ins, [X0 @ a for a in ins])
        np.testing.assert_allclose(X, X0, atol=1e-10)
        assert residual < 1e-12

    def test_inconsistent(self):
        """Inconsistent data yields the normal-equations minimizer and a positive residual."""
        rng = np.random.default_rng(9)
        ins = [_random_complex(rng, (2, 3)) for _ in range(3)]
        outs = [_random_complex(rng, (2, 3)) for _ in range(3)]
        X, residual = lstsq_intertwiner(ins, outs)
        A, B = np.hstack(ins), np.hstack(outs)
        X_normal = B @ A.conj().T @ np.linalg.inv(A @ A.conj().T)
        np.testing.assert_allclose(X, X_normal, atol=1e-10)
        assert residual > 1e-3

    def test_empty(self):
        with pytest.raises(DimensionMismatch, match="at least one"):
            lstsq_intertwiner([], [])

    def test_inconsistent_shapes(self):
        with pytest.raises(DimensionMismatch):
            lstsq_intertwiner([np.eye(2), np.eye(3)], [np.eye(2), np.eye(3)])


# ── random matrices ──────────────────────────────────────────────────


class TestRandomMatrices:
    """Tests for random_unitary and random_isometry."""

    def test_unitary(self):
        U = random_unitary(5, rng=0)
        np.testing.assert_allclose(U.conj().T @ U, np.eye(5), atol=1e-12)

    def test_deterministic(self):
        np.testing.assert_array_equal(random_unitary(3, rng=42), random_unitary(3, rng=42))

    def test_isometry(self):
        V = random_isometry(5, 2, rng=1)
        np.testing.assert_allclose(V.conj().T @ V, np.eye(2), atol=1e-12)

    def test_isometry_shape_check(self):
        with pytest.raises(DimensionMismatch):
            random_isometry(2, 3)
