"""Dilations of pure row contractions into the Drury-Arveson space.

A dilation of ``T`` on ``H = C^d`` is an isometry ``Pi: H -> H^2_n(E)`` with
``M_{z_i}* Pi = Pi T_i*``. Here it is held as its function coefficients,
``(Pi h)(z) = sum_k (c_k h) z^k``, truncated at a degree cut.

The canonical dilation expands ``D (I - sum_i z_i T_i*)^(-1)`` as
``sum_k (|k|! / k!) z^k D T*^k``. For nilpotent tuples the cut loses
nothing; otherwise the lost mass ``||P_T^{N+1}(I)||`` shows up as the
isometry defect.

Two minimal dilations of one tuple differ by a unitary on the fiber, and
any dilation factors through the canonical one by an isometry.
:func:`match_minimal_dilations` and :func:`factor_dilation` recover those
maps by least squares over all coefficient blocks at once.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Mapping, Optional, Tuple

import numpy as np

from rowdil.errors import DimensionMismatch, NotDilation, NotMinimal, NotPure
from rowdil.kernel_spaces import KernelSpec, MultiIndex, TruncatedSpace, multi_indices, multiplication_matrix
from rowdil.numerics import (
    DEFAULT_TOLERANCES,
    Tolerances,
    as_matrix,
    lstsq_intertwiner,
    numerical_rank,
    operator_norm,
)
from rowdil.row_contractions import OperatorTuple, defect, purity_residuals

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)


def adjoint_powers(T: OperatorTuple, max_degree: int) -> Dict[MultiIndex, NDArray[np.complex128]]:
    """``T*^k`` for every ``|k| <= max_degree``, keyed in graded order."""
    adjoints = T.adjoints()
    powers: Dict[MultiIndex, NDArray[np.complex128]] = {}
    for k in multi_indices(T.n, max_degree):
        if k.degree == 0:
            powers[k] = np.eye(T.dim, dtype=np.complex128)
            continue
        i = next(j for j, e in enumerate(k.exponents) if e > 0)
        powers[k] = adjoints[i] @ powers[k - MultiIndex.unit(T.n, i)]
    return powers


@dataclass(frozen=True, eq=False)
class DilationMap:
    """Truncated map ``Pi: C^d -> H^2_n(C^e)`` given by function coefficients.

    Attributes:
        n: Number of variables.
        source_dim: ``d``.
        fiber_dim: ``e``.
        degree_cut: Largest total degree kept.
        coefficients: ``c_k`` as ``e x d`` matrices; missing keys are zero.
    """

    n: int
    source_dim: int
    fiber_dim: int
    degree_cut: int
    coefficients: Mapping[MultiIndex, NDArray[np.complex128]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 1 or self.source_dim < 0 or self.fiber_dim < 0 or self.degree_cut < 0:
            raise DimensionMismatch(
                f"invalid dilation header: n={self.n}, source_dim={self.source_dim}, "
                f"fiber_dim={self.fiber_dim}, degree_cut={self.degree_cut}"
            )
        indices = multi_indices(self.n, self.degree_cut)
        allowed = set(indices)
        for k in self.coefficients:
            if k not in allowed:
                raise DimensionMismatch(f"coefficient key {k.key} is outside degree_cut={self.degree_cut}")
        filled: Dict[MultiIndex, NDArray[np.complex128]] = {}
        for k in indices:
            if k in self.coefficients:
                c = as_matrix(self.coefficients[k], f"c_{k.key}").copy()
                if c.shape != (self.fiber_dim, self.source_dim):
                    raise DimensionMismatch(
                        f"c_{k.key} has shape {c.shape}, expected ({self.fiber_dim}, {self.source_dim})"
                    )
            else:
                c = np.zeros((self.fiber_dim, self.source_dim), dtype=np.complex128)
            c.setflags(write=False)
            filled[k] = c
        object.__setattr__(self, "coefficients", filled)

    @property
    def target_space(self) -> TruncatedSpace:
        """Truncated ``H^2_n(C^e)`` the map lands in."""
        return TruncatedSpace(KernelSpec.drury_arveson(self.n), self.degree_cut, max(self.fiber_dim, 1))

    @property
    def indices(self) -> List[MultiIndex]:
        return list(self.coefficients)

    def weight(self, k: MultiIndex) -> float:
        """Drury-Arveson weight ``k! / |k|!``."""
        return 1.0 / k.multinomial

    def coordinate_block(self, k: MultiIndex) -> NDArray[np.complex128]:
        """``sqrt(w_k) c_k``: rows of the orthonormal-coordinate matrix at ``z^k``."""
        return math.sqrt(self.weight(k)) * self.coefficients[k]

    def coordinate_blocks(self) -> List[NDArray[np.complex128]]:
        return [self.coordinate_block(k) for k in self.coefficients]

    def matrix(self) -> NDArray[np.complex128]:
        """Orthonormal-coordinate matrix, monomial-major and fiber-minor."""
        if self.fiber_dim == 0:
            return np.zeros((0, self.source_dim), dtype=np.complex128)
        return np.vstack(self.coordinate_blocks())

    def gram(self) -> NDArray[np.complex128]:
        """``Pi* Pi = sum_k w_k c_k* c_k``."""
        G = np.zeros((self.source_dim, self.source_dim), dtype=np.complex128)
        for k, c in self.coefficients.items():
            G += self.weight(k) * (c.conj().T @ c)
        return G

    def isometry_defect(self) -> float:
        """``||Pi* Pi - I||``."""
        return operator_norm(self.gram() - np.eye(self.source_dim))

    def intertwining_residual(self, T: OperatorTuple) -> float:
        """``max_i ||M_{z_i}* Pi - Pi T_i*||`` below the degree cut.

        Rows of top degree are left out, since ``M_{z_i}*`` would need the
        coefficients one degree past the cut there.
        """
        if T.n != self.n or T.dim != self.source_dim:
            raise DimensionMismatch(
                f"tuple (n={T.n}, dim={T.dim}) does not match dilation (n={self.n}, source_dim={self.source_dim})"
            )
        if self.fiber_dim == 0:
            return 0.0
        space = self.target_space
        interior = ~space.top_degree_mask()
        P = self.matrix()
        worst = 0.0
        for i, Ti in enumerate(T):
            M = multiplication_matrix(space, i)
            R = M.conj().T @ P - P @ Ti.conj().T
            worst = max(worst, operator_norm(R[interior]))
        return worst

    def apply(self, h: ArrayLike) -> NDArray[np.complex128]:
        """Orthonormal coordinates of ``Pi h``."""
        return self.matrix() @ np.asarray(h, dtype=np.complex128)

    def with_fiber_map(self, W: ArrayLike) -> DilationMap:
        """``(I tensor W) Pi`` for a fiber map ``W: C^e -> C^e'``."""
        W = as_matrix(W, "W")
        if W.shape[1] != self.fiber_dim:
            raise DimensionMismatch(f"W must have {self.fiber_dim} columns, got shape {W.shape}")
        return DilationMap(
            n=self.n,
            source_dim=self.source_dim,
            fiber_dim=W.shape[0],
            degree_cut=self.degree_cut,
            coefficients={k: W @ c for k, c in self.coefficients.items()},
        )

    def __repr__(self) -> str:
        return (
            f"DilationMap(n={self.n}, source_dim={self.source_dim}, "
            f"fiber_dim={self.fiber_dim}, degree_cut={self.degree_cut})"
        )


def canonical_dilation(
    T: OperatorTuple,
    n_cut: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> DilationMap:
    """Canonical dilation ``(Pi_c h)(z) = D (I - sum z_i T_i*)^(-1) h`` cut at degree ``n_cut``.

    The fiber is the defect space ``E_c`` in the coordinates of
    ``defect(T).defect_basis``; ``c_k = (|k|! / k!) Q* D T*^k``.

    Args:
        T: Pure commuting row contraction.
        n_cut: Degree cut.
        tol: Tolerances; ``residual_tol`` bounds the purity tail.

    Raises:
        NotPure: If ``||P_T^{n_cut + 1}(I)|| > residual_tol``.
        NotRowContraction: If ``T`` is not a row contraction.

    Example:
        >>> from rowdil.row_contractions import OperatorTuple
        >>> Pi = canonical_dilation(OperatorTuple([np.zeros((1, 1))]), 2)
        >>> Pi.fiber_dim, Pi.isometry_defect()
        (1, 0.0)
    """
    if n_cut < 0:
        raise ValueError(f"n_cut must be nonnegative, got {n_cut}")
    tail = purity_residuals(T, n_cut + 1)[-1]
    if tail > tol.residual_tol:
        raise NotPure(tail, n_cut)
    data = defect(T, tol)
    QD = data.coordinates()
    coefficients = {k: k.multinomial * (QD @ Tk) for k, Tk in adjoint_powers(T, n_cut).items()}
    Pi = DilationMap(
        n=T.n,
        source_dim=T.dim,
        fiber_dim=data.defect_dim,
        degree_cut=n_cut,
        coefficients=coefficients,
    )
    logger.debug(
        "canonical dilation: fiber %d, cut %d, purity tail %.3e", data.defect_dim, n_cut, tail
    )
    return Pi


def minimality_rank(Pi: DilationMap, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Rank of the joint coefficient range ``[c_k]_k`` inside the fiber.

    ``Pi`` is minimal when this equals ``fiber_dim``.
    """
    if Pi.fiber_dim == 0 or Pi.source_dim == 0:
        return 0
    return numerical_rank(np.hstack(Pi.coordinate_blocks()), tol)


def is_minimal(Pi: DilationMap, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return minimality_rank(Pi, tol) == Pi.fiber_dim


def _check_compatible(Pi1: DilationMap, Pi2: DilationMap) -> None:
    for name in ("n", "source_dim", "degree_cut"):
        a, b = getattr(Pi1, name), getattr(Pi2, name)
        if a != b:
            raise DimensionMismatch(f"dilations differ in {name}: {a} vs {b}")


def _isometry_error(V: NDArray[np.complex128]) -> float:
    return operator_norm(V.conj().T @ V - np.eye(V.shape[1]))


def validate_dilation(
    Pi: DilationMap,
    T: Optional[OperatorTuple] = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    *,
    isometry_allowance: float = 0.0,
) -> Tuple[float, float]:
    """Check the isometry and (when ``T`` is given) intertwining residuals.

    Args:
        Pi: Map to check.
        T: Tuple it should dilate.
        tol: Tolerances; both residuals must be within ``residual_tol``.
        isometry_allowance: Extra isometry slack, e.g. a known truncation tail.

    Returns:
        ``(isometry_defect, intertwining_residual)``; the latter is 0.0 without ``T``.

    Raises:
        NotDilation: If a residual is too large.
    """
    iso = Pi.isometry_defect()
    if iso > tol.residual_tol + isometry_allowance:
        raise NotDilation(f"map is not isometric: ||Pi* Pi - I|| = {iso:.3e}")
    inter = 0.0
    if T is not None:
        inter = Pi.intertwining_residual(T)
        if inter > tol.residual_tol:
            raise NotDilation(f"map does not intertwine: residual {inter:.3e}")
    return iso, inter


def match_minimal_dilations(
    Pi1: DilationMap,
    Pi2: DilationMap,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Tuple[NDArray[np.complex128], float]:
    """Recover ``U: E_1 -> E_2`` with ``Pi2 = (I tensor U) Pi1``.

    Returns:
        ``(U, residual)``; when the residual passes ``U`` should be unitary,
        and a warning is logged if it is not.

    Raises:
        DimensionMismatch: If the dilations have different headers.
        NotMinimal: If either dilation is not minimal.
    """
    _check_compatible(Pi1, Pi2)
    for label, Pi in (("first", Pi1), ("second", Pi2)):
        rank = minimality_rank(Pi, tol)
        if rank != Pi.fiber_dim:
            raise NotMinimal(f"{label} dilation is not minimal: coefficient rank {rank} < fiber {Pi.fiber_dim}")
    U, residual = lstsq_intertwiner(Pi1.coordinate_blocks(), Pi2.coordinate_blocks())
    if residual <= tol.residual_tol and U.shape[0] == U.shape[1]:
        err = _isometry_error(U)
        if err > tol.residual_tol:
            logger.warning("recovered fiber map is not unitary: ||U*U - I|| = %.3e", err)
    logger.debug("matched minimal dilations: residual %.3e", residual)
    return U, residual


def factor_dilation(
    Pi: DilationMap,
    Pic: DilationMap,
    T: Optional[OperatorTuple] = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Tuple[NDArray[np.complex128], float]:
    """Recover the isometry ``V: E_c -> E`` with ``Pi = (I tensor V) Pic``.

    ``Pi`` is validated first; its isometry defect may exceed
    ``residual_tol`` by the canonical dilation's own truncation defect.

    Raises:
        DimensionMismatch: If the headers differ.
        NotDilation: If ``Pi`` fails validation.
    """
    _check_compatible(Pi, Pic)
    validate_dilation(Pi, T, tol, isometry_allowance=Pic.isometry_defect())
    V, residual = lstsq_intertwiner(Pic.coordinate_blocks(), Pi.coordinate_blocks())
    if residual <= tol.residual_tol and V.shape[1] > 0:
        err = _isometry_error(V)
        if err > tol.residual_tol:
            logger.warning("recovered factor is not isometric: ||V*V - I|| = %.3e", err)
    logger.debug("factored dilation: residual %.3e", residual)
    return V, residual


__all__ = [
    "DilationMap",
    "adjoint_powers",
    "canonical_dilation",
    "minimality_rank",
    "is_minimal",
    "validate_dilation",
    "match_minimal_dilations",
    "factor_dilation",
]
