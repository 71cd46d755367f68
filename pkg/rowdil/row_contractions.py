"""Commuting matrix tuples, the map P_T, purity and defect operators.

For a tuple ``T = (T_1, ..., T_n)`` on ``C^d`` the completely positive map
``P_T(X) = sum_i T_i X T_i*`` drives everything here: ``T`` is a row
contraction when ``P_T(I) <= I`` and pure when ``P_T^m(I) -> 0``. The defect
``D = (I - P_T(I))^(1/2)`` and its range ``E_c`` feed the canonical dilation.

Example:
    >>> from rowdil.kernel_spaces import KernelSpec, TruncatedSpace
    >>> T = compressed_shift(TruncatedSpace(KernelSpec(2, 1.0), max_degree=2))
    >>> purity_residuals(T, 4)[-1]
    0.0
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator, List, Sequence, Tuple

import numpy as np

from rowdil.errors import DimensionMismatch, NotCommuting, NotRowContraction
from rowdil.kernel_spaces import KernelSpec, MultiIndex, TruncatedSpace, multiplication_matrix, truncation_dimension
from rowdil.numerics import (
    DEFAULT_TOLERANCES,
    Tolerances,
    as_matrix,
    operator_norm,
    orthonormal_range,
    projector,
    psd_sqrt,
    random_unitary,
)

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)

# Slack on ||P_T(I)|| <= 1 when deciding row contractivity.
ROW_CONTRACTION_SLACK = 1e-10

# Relative slack on commutators, scaled by max(1, max ||T_i||^2).
COMMUTATOR_SLACK = 1e-10


class OperatorTuple:
    """An n-tuple of commuting d x d complex matrices.

    Commutativity is checked at construction. Tuples obtained by compressing
    a multiplication tuple to a degree truncation also carry a
    ``boundary_mask`` marking the top graded component, where the
    truncation makes the tuple artificially zero; invariance and
    intertwining checks leave those coordinates out.

    Args:
        matrices: The matrices ``T_1, ..., T_n``.
        boundary_mask: Optional boolean vector of length ``d``.
        check_commuting: Skip the commutator check when False.

    Raises:
        NotCommuting: If some commutator is too large.
        DimensionMismatch: If the matrices are not all square of one size.
    """

    __slots__ = ("_matrices", "_boundary_mask")

    def __init__(
        self,
        matrices: Sequence[ArrayLike],
        *,
        boundary_mask: ArrayLike | None = None,
        check_commuting: bool = True,
    ) -> None:
        if len(matrices) == 0:
            raise DimensionMismatch("an operator tuple needs at least one matrix")
        mats = []
        for i, T in enumerate(matrices):
            M = as_matrix(T, f"T_{i + 1}").copy()
            if M.shape[0] != M.shape[1]:
                raise DimensionMismatch(f"T_{i + 1} must be square, got shape {M.shape}")
            if mats and M.shape != mats[0].shape:
                raise DimensionMismatch(f"T_{i + 1} has shape {M.shape}, expected {mats[0].shape}")
            M.setflags(write=False)
            mats.append(M)
        self._matrices: Tuple[NDArray[np.complex128], ...] = tuple(mats)

        if boundary_mask is None:
            self._boundary_mask = None
        else:
            mask = np.asarray(boundary_mask, dtype=bool).copy()
            if mask.shape != (self.dim,):
                raise DimensionMismatch(f"boundary_mask must have shape ({self.dim},), got {mask.shape}")
            mask.setflags(write=False)
            self._boundary_mask = mask

        if check_commuting:
            worst = self.commutator_norm()
            scale = max(1.0, max(operator_norm(T) for T in mats) ** 2)
            if worst > COMMUTATOR_SLACK * scale:
                raise NotCommuting(f"tuple does not commute: max ||T_i T_j - T_j T_i|| = {worst:.3e}")

    @property
    def n(self) -> int:
        return len(self._matrices)

    @property
    def dim(self) -> int:
        return self._matrices[0].shape[0]

    @property
    def matrices(self) -> Tuple[NDArray[np.complex128], ...]:
        return self._matrices

    @property
    def boundary_mask(self) -> NDArray[np.bool_] | None:
        """Top-degree coordinates of a truncated multiplication tuple, if known."""
        return self._boundary_mask

    def interior_mask(self) -> NDArray[np.bool_]:
        """Coordinates where the tuple acts without truncation."""
        if self._boundary_mask is None:
            return np.ones(self.dim, dtype=bool)
        return ~self._boundary_mask

    def adjoints(self) -> List[NDArray[np.complex128]]:
        return [T.conj().T for T in self._matrices]

    def commutator_norm(self) -> float:
        """Largest ``||T_i T_j - T_j T_i||`` over pairs."""
        worst = 0.0
        for i in range(self.n):
            for j in range(i + 1, self.n):
                Ti, Tj = self._matrices[i], self._matrices[j]
                worst = max(worst, operator_norm(Ti @ Tj - Tj @ Ti))
        return worst

    def power(self, k: MultiIndex) -> NDArray[np.complex128]:
        """``T^k = T_1^{k_1} ... T_n^{k_n}``."""
        if k.n != self.n:
            raise DimensionMismatch(f"multi-index has {k.n} entries, tuple has n={self.n}")
        out = np.eye(self.dim, dtype=np.complex128)
        for T, e in zip(self._matrices, k.exponents):
            for _ in range(e):
                out = out @ T
        return out

    def conjugated(self, U: ArrayLike) -> OperatorTuple:
        """``(U T_i U*)_i`` for a unitary ``U``; the boundary is dropped."""
        U = as_matrix(U, "U")
        if U.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"U must be {self.dim}x{self.dim}, got {U.shape}")
        return OperatorTuple([U @ T @ U.conj().T for T in self._matrices])

    def mixed(self, A: ArrayLike) -> OperatorTuple:
        """``T'_i = sum_j A_ij T_j``; a unitary ``A`` preserves ``P_T``."""
        A = as_matrix(A, "A")
        if A.shape != (self.n, self.n):
            raise DimensionMismatch(f"A must be {self.n}x{self.n}, got {A.shape}")
        stacked = np.stack(self._matrices)
        return OperatorTuple(
            list(np.tensordot(A, stacked, axes=(1, 0))),
            boundary_mask=self._boundary_mask,
        )

    def scaled(self, c: complex) -> OperatorTuple:
        return OperatorTuple([c * T for T in self._matrices], boundary_mask=self._boundary_mask)

    def compressed(self, basis: ArrayLike, *, check_commuting: bool = True) -> OperatorTuple:
        """``(b* T_i b)_i`` for orthonormal columns ``b``."""
        b = as_matrix(basis, "basis")
        if b.shape[0] != self.dim:
            raise DimensionMismatch(f"basis has {b.shape[0]} rows, tuple acts on C^{self.dim}")
        return OperatorTuple(
            [b.conj().T @ T @ b for T in self._matrices],
            check_commuting=check_commuting,
        )

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[NDArray[np.complex128]]:
        return iter(self._matrices)

    def __getitem__(self, i: int) -> NDArray[np.complex128]:
        return self._matrices[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OperatorTuple):
            return NotImplemented
        if self.n != other.n or self.dim != other.dim:
            return False
        return all(np.array_equal(a, b) for a, b in zip(self._matrices, other._matrices))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"OperatorTuple(n={self.n}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class DefectData:
    """Defect operator ``D = (I - P_T(I))^(1/2)`` and its range.

    Attributes:
        D: Hermitian PSD d x d matrix.
        defect_basis: Orthonormal columns spanning ``E_c``.
    """

    D: NDArray[np.complex128]
    defect_basis: NDArray[np.complex128]

    @property
    def defect_dim(self) -> int:
        return self.defect_basis.shape[1]

    def coordinates(self) -> NDArray[np.complex128]:
        """``D`` as a map into ``E_c`` coordinates (``defect_dim x d``)."""
        return self.defect_basis.conj().T @ self.D


def apply_PT(T: OperatorTuple, X: ArrayLike) -> NDArray[np.complex128]:
    """``P_T(X) = sum_i T_i X T_i*``.

    Raises:
        DimensionMismatch: If ``X`` is not ``dim x dim``.
    """
    X = as_matrix(X, "X")
    if X.shape != (T.dim, T.dim):
        raise DimensionMismatch(f"X must be {T.dim}x{T.dim}, got {X.shape}")
    out = np.zeros_like(X)
    for Ti in T:
        out += Ti @ X @ Ti.conj().T
    return out


def is_row_contraction(T: OperatorTuple) -> Tuple[bool, float]:
    """Return ``(||P_T(I)|| <= 1 + slack, ||P_T(I)||)``."""
    row_norm = operator_norm(apply_PT(T, np.eye(T.dim)))
    return row_norm <= 1.0 + ROW_CONTRACTION_SLACK, row_norm


def _require_row_contraction(T: OperatorTuple) -> None:
    ok, row_norm = is_row_contraction(T)
    if not ok:
        raise NotRowContraction(row_norm)


def purity_residuals(T: OperatorTuple, m_max: int) -> List[float]:
    """``||P_T^m(I)||`` for ``m = 1 ... m_max``.

    The sequence is nonincreasing for a row contraction and reaches exact
    zero past the nilpotency order of a compressed shift.

    Raises:
        NotRowContraction: If ``||P_T(I)|| > 1``.
    """
    if m_max < 1:
        raise ValueError(f"m_max must be positive, got {m_max}")
    _require_row_contraction(T)
    X = np.eye(T.dim, dtype=np.complex128)
    residuals = []
    for _ in range(m_max):
        X = apply_PT(T, X)
        residuals.append(operator_norm(X))
    logger.debug("purity residuals: first %.3e, last %.3e after %d steps", residuals[0], residuals[-1], m_max)
    return residuals


def is_pure(T: OperatorTuple, m_max: int = 200, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Whether ``||P_T^{m_max}(I)|| < residual_tol``."""
    return purity_residuals(T, m_max)[-1] < tol.residual_tol


def defect_from_gram(G: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES) -> DefectData:
    """Defect data of ``I - G`` for a Hermitian ``0 <= G <= I``.

    The range of ``I - G`` is thresholded absolutely (against 1) so that a
    co-isometric ``G = I`` yields an empty defect space rather than noise.
    """
    G = as_matrix(G, "G")
    if G.shape[0] != G.shape[1]:
        raise DimensionMismatch(f"G must be square, got shape {G.shape}")
    X = np.eye(G.shape[0]) - (G + G.conj().T) / 2
    basis = orthonormal_range(X, tol, reference=1.0)
    P = projector(basis)
    D = P @ psd_sqrt(X, tol) @ P
    D = (D + D.conj().T) / 2
    logger.debug("defect rank %d of %d", basis.shape[1], G.shape[0])
    return DefectData(D=D, defect_basis=basis)


def defect(T: OperatorTuple, tol: Tolerances = DEFAULT_TOLERANCES) -> DefectData:
    """Defect operator and defect space of a row contraction.

    Raises:
        NotRowContraction: If ``||P_T(I)|| > 1``.
        NotPSD: If ``I - P_T(I)`` has a clearly negative eigenvalue.
    """
    _require_row_contraction(T)
    return defect_from_gram(apply_PT(T, np.eye(T.dim)), tol)


def compressed_shift(space: TruncatedSpace) -> OperatorTuple:
    """The multiplication tuple compressed to a truncation.

    The top graded component is recorded as the tuple's boundary.
    """
    return OperatorTuple(
        [multiplication_matrix(space, i) for i in range(space.n)],
        boundary_mask=space.top_degree_mask(),
    )


def _leading_monomial_shift(n: int, d: int) -> OperatorTuple:
    """Drury-Arveson shift compressed to the first ``d`` graded monomials.

    A graded-order prefix is closed under lowering exponents, so its
    complement is invariant and the compression stays commuting and nilpotent.
    """
    degree = 0
    while truncation_dimension(n, degree) < d:
        degree += 1
    space = TruncatedSpace(KernelSpec.drury_arveson(n), degree)
    return OperatorTuple([multiplication_matrix(space, i)[:d, :d] for i in range(n)])


def random_pure_tuple(
    n: int,
    d: int,
    seed: int,
    scale: float = 0.5,
    *,
    nilpotent: bool = False,
) -> OperatorTuple:
    """Seeded random pure commuting row contraction on ``C^d``.

    Built from a compressed shift, recombined by a random unitary
    ``n x n`` matrix, conjugated by a random unitary and scaled. Unless
    ``nilpotent`` is set, a random scalar tuple ``mu I`` with
    ``||mu|| <= (1 - scale) / 2`` is added, which keeps the row norm at most
    ``(1 + scale) / 2``.

    Args:
        n: Number of operators.
        d: State space dimension.
        seed: Seed for ``numpy.random.default_rng``.
        scale: Row norm of the shift part, in (0, 1).
        nilpotent: Skip the scalar part.

    Example:
        >>> T = random_pure_tuple(2, 4, seed=7)
        >>> is_row_contraction(T)[0]
        True
    """
    if not 0.0 < scale < 1.0:
        raise ValueError(f"scale must lie in (0, 1), got {scale!r}")
    if n < 1 or d < 1:
        raise ValueError(f"n and d must be positive, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    base = _leading_monomial_shift(n, d)
    T = base.mixed(random_unitary(n, rng)).conjugated(random_unitary(d, rng)).scaled(scale)
    if nilpotent:
        return T
    direction = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    mu = direction / np.linalg.norm(direction) * rng.uniform(0.0, (1.0 - scale) / 2)
    eye = np.eye(d)
    return OperatorTuple([Ti + m * eye for Ti, m in zip(T, mu)])


def random_spherical_unitary(n: int, d: int, seed: int) -> OperatorTuple:
    """Seeded commuting tuple with ``P_T(I) = I`` (never pure).

    Simultaneously diagonal with joint eigenvalues on the unit sphere, then
    conjugated by a random unitary.
    """
    if n < 1 or d < 1:
        raise ValueError(f"n and d must be positive, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((d, n)) + 1j * rng.standard_normal((d, n))
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    U = random_unitary(d, rng)
    diagonal = OperatorTuple([np.diag(points[:, i]) for i in range(n)])
    return diagonal.conjugated(U)


__all__ = [
    "OperatorTuple",
    "DefectData",
    "ROW_CONTRACTION_SLACK",
    "COMMUTATOR_SLACK",
    "apply_PT",
    "is_row_contraction",
    "purity_residuals",
    "is_pure",
    "defect",
    "defect_from_gram",
    "compressed_shift",
    "random_pure_tuple",
    "random_spherical_unitary",
]
