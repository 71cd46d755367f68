"""Joint invariant subspaces, wandering subspaces and their representations.

Every invariant subspace ``S`` of a pure tuple is the range of a partial
isometry ``Pi: H^2_n(E) -> H`` with ``Pi M_{z_i} = T_i Pi``. Its wandering
subspace ``W = S - span(T_i S)`` can be read off directly or from the
representation as ``Pi((ker Pi)^perp ∩ E)``; both routes are implemented and
must agree.

Truncation contract: when a tuple carries a boundary (the top graded
component of a compressed shift), invariance is tested on the domain
``S ∩ {degree < N}``, which is where the compressed shift acts like the true
one. Subspaces such as ``S_a = {f : f(a) = 0}`` are exactly invariant in
that sense.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Tuple

import numpy as np

from rowdil.dilation import adjoint_powers
from rowdil.errors import (
    DimensionMismatch,
    MalformedRepresentation,
    NotInvariant,
    NotPure,
    RangeMismatch,
    RowdilError,
)
from rowdil.kernel_spaces import KernelSpec, TruncatedSpace, multi_indices, multiplication_matrix, point_evaluation_vector
from rowdil.numerics import (
    DEFAULT_TOLERANCES,
    INTERSECTION_THRESHOLD,
    Tolerances,
    as_matrix,
    complement_within,
    fix_phases,
    intersect_subspaces,
    lstsq_intertwiner,
    null_space,
    operator_norm,
    orthonormal_range,
    principal_angle_gap,
)
from rowdil.row_contractions import OperatorTuple, defect, purity_residuals

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)

# Slack on basis* basis = I for a Subspace.
ORTHONORMALITY_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of ``C^m`` given by orthonormal columns.

    Example:
        >>> S = Subspace.span(np.array([[1.0], [1.0]]))
        >>> S.dim, S.ambient_dim
        (1, 2)
    """

    basis: NDArray[np.complex128]

    def __post_init__(self) -> None:
        B = as_matrix(self.basis, "basis").copy()
        err = operator_norm(B.conj().T @ B - np.eye(B.shape[1]))
        if err > ORTHONORMALITY_SLACK:
            raise RowdilError(f"subspace basis is not orthonormal: ||B* B - I|| = {err:.3e}")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @classmethod
    def span(cls, vectors: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
        """Span of the columns of ``vectors``."""
        return cls(orthonormal_range(vectors, tol))

    @classmethod
    def full(cls, ambient_dim: int) -> Subspace:
        return cls(np.eye(ambient_dim, dtype=np.complex128))

    @classmethod
    def zero(cls, ambient_dim: int) -> Subspace:
        return cls(np.zeros((ambient_dim, 0), dtype=np.complex128))

    @classmethod
    def from_mask(cls, mask: ArrayLike) -> Subspace:
        """Coordinate subspace of the positions where ``mask`` is true."""
        m = np.asarray(mask, dtype=bool)
        return cls(np.eye(m.size, dtype=np.complex128)[:, m])

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> NDArray[np.complex128]:
        return self.basis @ self.basis.conj().T

    def gap(self, other: Subspace) -> float:
        """Principal-angle gap to another subspace."""
        return principal_angle_gap(self.basis, other.basis)

    def contains(self, other: Subspace, threshold: float = 1e-10) -> bool:
        """Whether ``other`` lies inside this subspace."""
        if other.dim == 0:
            return True
        return operator_norm(other.basis - self.projector() @ other.basis) <= threshold

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def _check_ambient(S: Subspace, T: OperatorTuple) -> None:
    if S.ambient_dim != T.dim:
        raise DimensionMismatch(f"subspace lives in C^{S.ambient_dim}, tuple acts on C^{T.dim}")


def invariance_domain(S: Subspace, T: OperatorTuple, tol: Tolerances = DEFAULT_TOLERANCES) -> NDArray[np.complex128]:
    """Orthonormal basis of ``S`` minus the tuple's boundary coordinates."""
    _check_ambient(S, T)
    if T.boundary_mask is None or not np.any(T.boundary_mask) or S.dim == 0:
        return S.basis
    coords = null_space(S.basis[T.boundary_mask, :], tol)
    return S.basis @ coords


def _invariance_residual(S: Subspace, T: OperatorTuple, domain: NDArray[np.complex128]) -> float:
    if domain.shape[1] == 0:
        return 0.0
    leak = np.eye(T.dim) - S.projector()
    return max(operator_norm(leak @ Ti @ domain) for Ti in T)


def is_invariant(S: Subspace, T: OperatorTuple, tol: Tolerances = DEFAULT_TOLERANCES) -> Tuple[bool, float]:
    """Return ``(residual <= residual_tol, max_i ||(I - P_S) T_i P_dom||)``."""
    residual = _invariance_residual(S, T, invariance_domain(S, T, tol))
    return residual <= tol.residual_tol, residual


def _require_invariant(S: Subspace, T: OperatorTuple, tol: Tolerances) -> NDArray[np.complex128]:
    domain = invariance_domain(S, T, tol)
    residual = _invariance_residual(S, T, domain)
    if residual > tol.residual_tol:
        raise NotInvariant(residual)
    return domain


def wandering_subspace(S: Subspace, T: OperatorTuple, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """``W = S - span(T_1 S_dom, ..., T_n S_dom)``.

    Raises:
        NotInvariant: If ``S`` is not invariant under the truncation contract.
    """
    domain = _require_invariant(S, T, tol)
    if domain.shape[1] == 0:
        return S
    images = orthonormal_range(np.hstack([Ti @ domain for Ti in T]), tol)
    W = Subspace(fix_phases(complement_within(S.basis, images, tol)))
    logger.debug("wandering subspace: dim %d inside dim %d", W.dim, S.dim)
    return W


def wandering_violation(W: Subspace, T: OperatorTuple, max_order: int) -> float:
    """Largest ``|<w, T^k w'>|`` over basis vectors and ``1 <= |k| <= max_order``."""
    _check_ambient(W, T)
    if W.dim == 0:
        return 0.0
    worst = 0.0
    for k in multi_indices(T.n, max_order):
        if k.degree == 0:
            continue
        worst = max(worst, float(np.max(np.abs(W.basis.conj().T @ T.power(k) @ W.basis))))
    return worst


def generated_subspace(W: Subspace, T: OperatorTuple, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """``span{T^k w : w in W}``, grown until the rank stabilizes.

    Each round adjoins ``T_i`` applied to the interior part of ``G`` (its
    projection off the boundary coordinates) and re-orthonormalizes; at most
    ``ambient_dim`` rounds. For a compressed shift this is the ideal that
    ``W`` generates in the polynomials modulo degree ``N + 1``, so a vector
    with a nonzero constant term generates the whole truncation.
    """
    _check_ambient(W, T)
    G = W.basis
    interior = T.interior_mask()
    for step in range(T.dim + 1):
        if G.shape[1] == 0:
            break
        domain = orthonormal_range(np.where(interior[:, None], G, 0.0), tol, reference=1.0)
        if domain.shape[1] == 0:
            break
        grown = orthonormal_range(np.hstack([G] + [Ti @ domain for Ti in T]), tol)
        if grown.shape[1] == G.shape[1]:
            break
        logger.debug("generated subspace step %d: rank %d -> %d", step, G.shape[1], grown.shape[1])
        G = grown
    return Subspace(G)


def zero_based_subspace(space: TruncatedSpace, a: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """``S_a = {f : f(a) = 0}`` inside a scalar truncation.

    Raises:
        PointOutsideBall: If ``||a|| >= 1``.
    """
    v = point_evaluation_vector(space, a)
    return Subspace(fix_phases(null_space(v.conj()[None, :], tol)))


def full_subspace(space: TruncatedSpace) -> Subspace:
    return Subspace.full(space.dimension)


class RepresentationMap:
    """Partial isometry ``Pi`` from truncated ``H^2_n(C^e)`` onto a subspace.

    Held as the matrix of ``Pi`` on the orthonormal basis of the truncated
    Drury-Arveson space of degree ``degree_cut``, columns monomial-major and
    fiber-minor.

    Raises:
        MalformedRepresentation: If the column count does not match the header.
    """

    __slots__ = ("_matrix", "_n", "_fiber_dim", "_degree_cut", "_domain")

    def __init__(self, matrix: ArrayLike, *, n: int, fiber_dim: int, degree_cut: int) -> None:
        M = as_matrix(matrix, "matrix").copy()
        if n < 1 or fiber_dim < 0 or degree_cut < 0:
            raise MalformedRepresentation(
                f"invalid header: n={n}, fiber_dim={fiber_dim}, degree_cut={degree_cut}"
            )
        expected = math.comb(degree_cut + n, n) * fiber_dim
        if M.shape[1] != expected:
            raise MalformedRepresentation(
                f"representation has {M.shape[1]} columns, expected {expected} "
                f"for n={n}, fiber_dim={fiber_dim}, degree_cut={degree_cut}"
            )
        M.setflags(write=False)
        self._matrix = M
        self._n = n
        self._fiber_dim = fiber_dim
        self._degree_cut = degree_cut
        self._domain = TruncatedSpace(KernelSpec.drury_arveson(n), degree_cut, max(fiber_dim, 1))

    @property
    def matrix(self) -> NDArray[np.complex128]:
        return self._matrix

    @property
    def n(self) -> int:
        return self._n

    @property
    def fiber_dim(self) -> int:
        return self._fiber_dim

    @property
    def degree_cut(self) -> int:
        return self._degree_cut

    @property
    def ambient_dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def domain(self) -> TruncatedSpace:
        return self._domain

    def block(self, p: int) -> NDArray[np.complex128]:
        """Columns of the ``p``-th monomial (``ambient_dim x fiber_dim``)."""
        e = self._fiber_dim
        return self._matrix[:, p * e : (p + 1) * e]

    def blocks(self) -> List[NDArray[np.complex128]]:
        return [self.block(p) for p in range(self._domain.num_monomials)]

    def constant_block(self) -> NDArray[np.complex128]:
        """``Pi`` restricted to the constants ``E``."""
        return self.block(0)

    def range_basis(self, tol: Tolerances = DEFAULT_TOLERANCES) -> NDArray[np.complex128]:
        return orthonormal_range(self._matrix, tol)

    def coimage_basis(self, tol: Tolerances = DEFAULT_TOLERANCES) -> NDArray[np.complex128]:
        """Orthonormal basis of ``(ker Pi)^perp`` in the truncated domain."""
        return orthonormal_range(self._matrix.conj().T, tol)

    def partial_isometry_residual(self) -> float:
        """``||Pi Pi* Pi - Pi||``."""
        P = self._matrix
        return operator_norm(P @ P.conj().T @ P - P)

    def intertwining_residual(self, T: OperatorTuple) -> float:
        """``max_i ||Pi M_{z_i} - T_i Pi||`` on columns below the degree cut."""
        if T.n != self._n or T.dim != self.ambient_dim:
            raise DimensionMismatch(
                f"tuple (n={T.n}, dim={T.dim}) does not match representation "
                f"(n={self._n}, ambient_dim={self.ambient_dim})"
            )
        if self._fiber_dim == 0:
            return 0.0
        interior = ~self._domain.top_degree_mask()
        worst = 0.0
        for i, Ti in enumerate(T):
            M = multiplication_matrix(self._domain, i)
            R = self._matrix @ M - Ti @ self._matrix
            worst = max(worst, operator_norm(R[:, interior]))
        return worst

    def with_fiber_map(self, V: ArrayLike) -> RepresentationMap:
        """``Pi (I tensor V)`` for ``V: C^e' -> C^e``."""
        V = as_matrix(V, "V")
        if V.shape[0] != self._fiber_dim:
            raise DimensionMismatch(f"V must have {self._fiber_dim} rows, got shape {V.shape}")
        return RepresentationMap(
            np.hstack([B @ V for B in self.blocks()]),
            n=self._n,
            fiber_dim=V.shape[1],
            degree_cut=self._degree_cut,
        )

    def __repr__(self) -> str:
        return (
            f"RepresentationMap(n={self._n}, fiber_dim={self._fiber_dim}, "
            f"degree_cut={self._degree_cut}, ambient_dim={self.ambient_dim})"
        )


def representation_via_dilation(
    S: Subspace,
    T: OperatorTuple,
    n_cut: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> RepresentationMap:
    """Canonical representation ``Pi = i_S Pi_S*`` of an invariant subspace.

    ``Pi_S`` is the canonical dilation of the restriction ``R_i = b* T_i P_dom b``
    with ``b = basis(S)``, the graded form of ``T|_S``: ``T_i P_dom`` maps
    ``S`` into ``S``. The column at ``z^k eta`` is
    ``sqrt(|k|! / k!) b R^k D_R eta``, so every column lies in ``S``.

    On a truncation ``R`` is only nearly commuting and nilpotent, so the
    partial-isometry and intertwining residuals of the result are small
    rather than zero; a partial-isometry residual above ``residual_tol`` is
    logged as a warning.

    Raises:
        NotInvariant: If ``S`` is not invariant.
        NotPure: If ``||P_T^{n_cut + 1}(I)|| > residual_tol``.
        RangeMismatch: If the range of ``Pi`` falls short of ``S``.
    """
    domain = _require_invariant(S, T, tol)
    tail = purity_residuals(T, n_cut + 1)[-1]
    if tail > tol.residual_tol:
        raise NotPure(tail, n_cut)
    b = S.basis
    P_dom = domain @ domain.conj().T
    R = OperatorTuple([b.conj().T @ Ti @ P_dom @ b for Ti in T], check_commuting=False)
    data = defect(R, tol)
    fiber = data.D @ data.defect_basis
    columns = [
        math.sqrt(k.multinomial) * (b @ Rk.conj().T @ fiber)
        for k, Rk in adjoint_powers(R, n_cut).items()
    ]
    Pi = RepresentationMap(np.hstack(columns), n=T.n, fiber_dim=data.defect_dim, degree_cut=n_cut)
    range_gap = principal_angle_gap(Pi.range_basis(tol), b)
    if range_gap > tol.residual_tol:
        raise RangeMismatch(range_gap, f"representation range misses part of S: gap {range_gap:.3e}")
    pi_residual = Pi.partial_isometry_residual()
    if pi_residual > tol.residual_tol:
        logger.warning("truncated representation is not a partial isometry: residual %.3e", pi_residual)
    logger.debug(
        "representation: fiber %d, cut %d, restriction commutator %.3e",
        data.defect_dim,
        n_cut,
        R.commutator_norm(),
    )
    return Pi


def wandering_from_representation(
    Pi: RepresentationMap,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Subspace:
    """``W = Pi((ker Pi)^perp ∩ E)``.

    The intersection of the coimage with the constants ``E`` is taken from
    the spectrum of the sum of the two projections.
    """
    if Pi.fiber_dim == 0:
        return Subspace.zero(Pi.ambient_dim)
    constants = np.eye(Pi.matrix.shape[1], Pi.fiber_dim, dtype=np.complex128)
    F = intersect_subspaces(Pi.coimage_basis(tol), constants, INTERSECTION_THRESHOLD)
    logger.debug("wandering from representation: dim (ker Pi)^perp ∩ E = %d", F.shape[1])
    if F.shape[1] == 0:
        return Subspace.zero(Pi.ambient_dim)
    return Subspace(fix_phases(orthonormal_range(Pi.matrix @ F, tol)))


def compare_representations(
    Pi1: RepresentationMap,
    Pi2: RepresentationMap,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Tuple[NDArray[np.complex128], float]:
    """Recover ``V: E_1 -> E_2`` with ``Pi1 = Pi2 (I tensor V)``.

    Returns:
        ``(V, residual)``; a passing ``V`` should be a partial isometry and a
        warning is logged otherwise.

    Raises:
        DimensionMismatch: On different headers or ambient spaces.
        RangeMismatch: If the ranges differ.
    """
    if (Pi1.n, Pi1.degree_cut, Pi1.ambient_dim) != (Pi2.n, Pi2.degree_cut, Pi2.ambient_dim):
        raise DimensionMismatch(
            f"representations differ: (n, degree_cut, ambient_dim) = "
            f"{(Pi1.n, Pi1.degree_cut, Pi1.ambient_dim)} vs {(Pi2.n, Pi2.degree_cut, Pi2.ambient_dim)}"
        )
    gap = principal_angle_gap(Pi1.range_basis(tol), Pi2.range_basis(tol))
    if gap > tol.residual_tol:
        raise RangeMismatch(gap)
    # Pi1_k = Pi2_k V, solved as V* Pi2_k* = Pi1_k*
    Vh, residual = lstsq_intertwiner(
        [B.conj().T for B in Pi2.blocks()],
        [B.conj().T for B in Pi1.blocks()],
    )
    V = Vh.conj().T
    if residual <= tol.residual_tol and V.size:
        err = operator_norm(V @ V.conj().T @ V - V)
        if err > tol.residual_tol:
            logger.warning("recovered fiber map is not a partial isometry: residual %.3e", err)
    return V, residual


def compare_with_canonical(
    Pi: RepresentationMap,
    Pic: RepresentationMap,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Tuple[NDArray[np.complex128], float]:
    """Recover the isometry ``V: E_c -> E`` with ``Pi = Pic (I tensor V*)``."""
    X, residual = compare_representations(Pi, Pic, tol)
    V = X.conj().T
    if residual <= tol.residual_tol and V.shape[1] > 0:
        err = operator_norm(V.conj().T @ V - np.eye(V.shape[1]))
        if err > tol.residual_tol:
            logger.warning("map into the canonical fiber is not isometric: ||V*V - I|| = %.3e", err)
    return V, residual


__all__ = [
    "Subspace",
    "invariance_domain",
    "is_invariant",
    "wandering_subspace",
    "wandering_violation",
    "generated_subspace",
    "zero_based_subspace",
    "full_subspace",
    "RepresentationMap",
    "representation_via_dilation",
    "wandering_from_representation",
    "compare_representations",
    "compare_with_canonical",
]
