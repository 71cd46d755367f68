"""Polynomial K-multipliers, K-inner functions and multiplier norms.

A polynomial ``Theta(z) = sum_k A_k z^k`` with ``A_k: E -> E*`` acts as a
multiplier from ``H^2_n(E)`` into ``H(K_lambda) (x) E*``. It is K-inner when it
is isometric on the constants and ``Theta E`` is orthogonal to every
``z^j Theta E`` with ``j != 0``. K-inner functions are contractive
multipliers, and a quasi-homogeneous ``p`` has multiplier norm equal to its
``H(K_lambda)`` norm. Both facts are checked here on finite pieces:

* :func:`multiplier_norm_truncated` - the norm of ``M_Theta`` restricted to
  degree ``<= N``, nondecreasing in ``N``
* :func:`multiplier_block_norm` - the exact norm of one quasi-homogeneous block
* :func:`beurling_wandering` - the fiber ``F`` on which ``M_Theta`` is
  isometric on constants, and whether it generates
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from rowdil.errors import (
    DimensionMismatch,
    NotHomogeneous,
    NotPartialIsometry,
    NotQuasiHomogeneous,
    ZeroPolynomial,
)
from rowdil.kernel_spaces import KernelSpec, MultiIndex, TruncatedSpace, monomial_norm_sq
from rowdil.numerics import (
    DEFAULT_TOLERANCES,
    INTERSECTION_THRESHOLD,
    Tolerances,
    as_matrix,
    intersect_subspaces,
    null_space,
    operator_norm,
    orthonormal_range,
    unit_eigenspace,
)

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    from rowdil.invariant_subspaces import RepresentationMap

logger = logging.getLogger(__name__)

# Default bound on quasi-homogeneous weight entries.
WEIGHT_BOUND = 12

# Relative slack for the block-norm equality check.
NORM_EQUALITY_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class MatrixPolynomial:
    """``Theta(z) = sum_k A_k z^k`` with ``A_k`` of shape ``target_dim x source_dim``.

    Zero coefficients are dropped, so ``support`` lists exactly the
    multi-indices with ``A_k != 0``.

    Example:
        >>> p = MatrixPolynomial.scalar(2, {"1,1": 2.0 ** 0.5})
        >>> p.degree, p.is_homogeneous
        (2, True)
    """

    n: int
    source_dim: int
    target_dim: int
    coefficients: Mapping[MultiIndex, NDArray[np.complex128]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 1 or self.source_dim < 0 or self.target_dim < 0:
            raise DimensionMismatch(
                f"invalid polynomial header: n={self.n}, source_dim={self.source_dim}, "
                f"target_dim={self.target_dim}"
            )
        kept: Dict[MultiIndex, NDArray[np.complex128]] = {}
        for k in sorted(self.coefficients):
            if k.n != self.n:
                raise DimensionMismatch(f"coefficient key {k.key} has {k.n} entries, expected {self.n}")
            A = as_matrix(self.coefficients[k], f"A_{k.key}").copy()
            if A.shape != (self.target_dim, self.source_dim):
                raise DimensionMismatch(
                    f"A_{k.key} has shape {A.shape}, expected ({self.target_dim}, {self.source_dim})"
                )
            if np.any(A != 0):
                A.setflags(write=False)
                kept[k] = A
        object.__setattr__(self, "coefficients", kept)

    @classmethod
    def scalar(cls, n: int, terms: Mapping[Union[MultiIndex, str], complex]) -> MatrixPolynomial:
        """Scalar polynomial from ``{k: a_k}``; keys may be ``"k1,k2"`` strings."""
        coefficients = {}
        for key, value in terms.items():
            k = MultiIndex.from_key(key) if isinstance(key, str) else key
            coefficients[k] = np.array([[value]], dtype=np.complex128)
        return cls(n=n, source_dim=1, target_dim=1, coefficients=coefficients)

    @classmethod
    def constant(cls, n: int, A: ArrayLike) -> MatrixPolynomial:
        A = as_matrix(A, "A")
        return cls(n=n, source_dim=A.shape[1], target_dim=A.shape[0], coefficients={MultiIndex.zero(n): A})

    @property
    def support(self) -> List[MultiIndex]:
        return list(self.coefficients)

    @property
    def degree(self) -> int:
        """Largest ``|k|`` in the support; 0 for the zero polynomial."""
        return max((k.degree for k in self.coefficients), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def is_scalar(self) -> bool:
        return self.source_dim == 1 and self.target_dim == 1

    @property
    def is_homogeneous(self) -> bool:
        return len({k.degree for k in self.coefficients}) <= 1

    def coefficient(self, k: MultiIndex) -> NDArray[np.complex128]:
        """``A_k``, zero outside the support."""
        if k in self.coefficients:
            return self.coefficients[k]
        return np.zeros((self.target_dim, self.source_dim), dtype=np.complex128)

    def __call__(self, z: ArrayLike) -> NDArray[np.complex128]:
        """``Theta(z)`` as a ``target_dim x source_dim`` matrix."""
        point = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        out = np.zeros((self.target_dim, self.source_dim), dtype=np.complex128)
        for k, A in self.coefficients.items():
            out += k.monomial(point) * A
        return out

    def scaled(self, c: complex) -> MatrixPolynomial:
        return MatrixPolynomial(
            n=self.n,
            source_dim=self.source_dim,
            target_dim=self.target_dim,
            coefficients={k: c * A for k, A in self.coefficients.items()},
        )

    def restricted(self, F: ArrayLike) -> MatrixPolynomial:
        """``Theta`` composed with the injection of ``span(F)`` into ``E``."""
        F = as_matrix(F, "F")
        if F.shape[0] != self.source_dim:
            raise DimensionMismatch(f"F must have {self.source_dim} rows, got shape {F.shape}")
        return MatrixPolynomial(
            n=self.n,
            source_dim=F.shape[1],
            target_dim=self.target_dim,
            coefficients={k: A @ F for k, A in self.coefficients.items()},
        )

    def __repr__(self) -> str:
        return (
            f"MatrixPolynomial(n={self.n}, {self.target_dim}x{self.source_dim}, "
            f"degree={self.degree}, terms={len(self.coefficients)})"
        )


@dataclass(frozen=True)
class QuasiHomogeneityCertificate:
    """Weights ``m`` and level ``l`` with ``sum_i m_i k_i = l`` on the support."""

    weights: Tuple[int, ...]
    degree: int

    def level(self, k: MultiIndex) -> int:
        return sum(m * e for m, e in zip(self.weights, k.exponents))

    def certifies(self, p: MatrixPolynomial) -> bool:
        return len(self.weights) == p.n and all(self.level(k) == self.degree for k in p.support)

    def to_dict(self) -> Dict[str, Any]:
        return {"weights": list(self.weights), "degree": self.degree}


def _require_scalar(p: MatrixPolynomial, what: str) -> None:
    if not p.is_scalar:
        raise DimensionMismatch(f"{what} needs a scalar polynomial, got {p.target_dim}x{p.source_dim}")


def hk_norm(p: MatrixPolynomial, spec: KernelSpec) -> float:
    """``||p||_{H(K)} = sqrt(sum_k ||A_k||^2 w_k)`` for ``E = C``.

    Example:
        >>> hk_norm(MatrixPolynomial.scalar(1, {"3": 1.0}), KernelSpec(1, 2.0))
        0.5
    """
    if p.source_dim != 1:
        raise DimensionMismatch(f"hk_norm needs a single column, got source_dim={p.source_dim}")
    total = sum(monomial_norm_sq(spec, k) * float(np.sum(np.abs(A) ** 2)) for k, A in p.coefficients.items())
    return math.sqrt(total)


def is_K_inner(
    Theta: MatrixPolynomial,
    spec: KernelSpec,
    probe_degree: Optional[int] = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Tuple[bool, float]:
    """Check the two defining conditions of a K-inner function.

    (a) ``sum_k w_k A_k* A_k = I_E``; (b) for ``1 <= |j| <= probe_degree``,
    ``sum_k w_{k+j} A_k* A_{k+j} = 0``. Both are exact coefficient sums.

    Args:
        Theta: Polynomial to check.
        spec: Kernel whose weights define the inner product.
        probe_degree: Largest shift order; defaults to ``degree + 1``.
        tol: Pass threshold is ``residual_tol``.

    Returns:
        ``(violation <= residual_tol, violation)``.
    """
    if probe_degree is None:
        probe_degree = Theta.degree + 1
    if probe_degree < Theta.degree + 1:
        raise ValueError(f"probe_degree must be at least degree + 1 = {Theta.degree + 1}, got {probe_degree}")
    gram = np.zeros((Theta.source_dim, Theta.source_dim), dtype=np.complex128)
    for k, A in Theta.coefficients.items():
        gram += monomial_norm_sq(spec, k) * (A.conj().T @ A)
    violation = operator_norm(gram - np.eye(Theta.source_dim))

    shifts: Dict[MultiIndex, NDArray[np.complex128]] = {}
    for m, Am in Theta.coefficients.items():
        for k, Ak in Theta.coefficients.items():
            if m == k or not m.dominates(k):
                continue
            j = m - k
            if j.degree > probe_degree:
                continue
            term = monomial_norm_sq(spec, m) * (Ak.conj().T @ Am)
            shifts[j] = shifts.get(j, 0) + term
    for S in shifts.values():
        violation = max(violation, operator_norm(S))
    return violation <= tol.residual_tol, violation


def quasi_homogeneous_decompose(
    p: MatrixPolynomial,
    bound: int = WEIGHT_BOUND,
) -> Optional[QuasiHomogeneityCertificate]:
    """Lex-smallest positive weights ``m <= bound`` leveling the support, or None.

    Raises:
        ZeroPolynomial: If ``p`` has no nonzero coefficient.

    Example:
        >>> quasi_homogeneous_decompose(MatrixPolynomial.scalar(2, {"2,0": 1, "0,1": 1}))
        QuasiHomogeneityCertificate(weights=(1, 2), degree=2)
    """
    _require_scalar(p, "quasi-homogeneous decomposition")
    if p.is_zero:
        raise ZeroPolynomial("the zero polynomial has no quasi-homogeneous structure")
    support = p.support
    for weights in itertools.product(range(1, bound + 1), repeat=p.n):
        cert = QuasiHomogeneityCertificate(tuple(weights), 0)
        levels = {cert.level(k) for k in support}
        if len(levels) == 1:
            return QuasiHomogeneityCertificate(tuple(weights), levels.pop())
    return None


def _indices_at_level(weights: Sequence[int], level: int) -> List[MultiIndex]:
    """All ``k`` with ``sum_i m_i k_i = level``, in graded order."""
    ranges = [range(level // m + 1) for m in weights]
    found = [
        MultiIndex(exps)
        for exps in itertools.product(*ranges)
        if sum(m * e for m, e in zip(weights, exps)) == level
    ]
    return sorted(found)


def multiplier_block_norm(
    p: MatrixPolynomial,
    spec: KernelSpec,
    cert: QuasiHomogeneityCertificate,
    block: int,
) -> float:
    """Norm of ``M_p`` from the level-``block`` monomials of ``H^2_n`` into ``H(K)``.

    The entry taking ``z^k`` to ``z^{s+k}`` is
    ``a_s sqrt(w^K_{s+k}) / sqrt(w^{DA}_k)``.

    Raises:
        NotQuasiHomogeneous: If ``cert`` does not certify ``p``.
    """
    _require_scalar(p, "block norms")
    if not cert.certifies(p):
        raise NotQuasiHomogeneous(f"weights {cert.weights} do not level the support at {cert.degree}")
    if block < 0:
        raise ValueError(f"block must be nonnegative, got {block}")
    domain = _indices_at_level(cert.weights, block)
    if not domain:
        return 0.0
    codomain = _indices_at_level(cert.weights, block + cert.degree)
    rows = {j: r for r, j in enumerate(codomain)}
    da = KernelSpec.drury_arveson(p.n)
    M = np.zeros((len(codomain), len(domain)), dtype=np.complex128)
    for c, k in enumerate(domain):
        scale = 1.0 / math.sqrt(monomial_norm_sq(da, k))
        for s, A in p.coefficients.items():
            j = s + k
            M[rows[j], c] += A[0, 0] * math.sqrt(monomial_norm_sq(spec, j)) * scale
    return operator_norm(M)


def multiplier_matrix(
    Theta: MatrixPolynomial,
    spec: KernelSpec,
    N: int,
) -> Tuple[NDArray[np.complex128], TruncatedSpace, TruncatedSpace]:
    """Matrix of ``M_Theta`` from truncated ``H^2_n(E)`` to ``H(K) (x) E*``.

    The domain holds degree ``<= N``, the codomain degree ``<= N + deg``, so
    nothing is cut off.

    Returns:
        ``(matrix, domain, codomain)``.
    """
    if spec.n != Theta.n:
        raise DimensionMismatch(f"polynomial has n={Theta.n}, kernel has n={spec.n}")
    e, f = Theta.source_dim, Theta.target_dim
    domain = TruncatedSpace(KernelSpec.drury_arveson(Theta.n), N, max(e, 1))
    codomain = TruncatedSpace(spec, N + Theta.degree, max(f, 1))
    M = np.zeros((codomain.num_monomials * f, domain.num_monomials * e), dtype=np.complex128)
    for col, k in enumerate(domain.indices):
        scale = 1.0 / math.sqrt(domain.weight(k))
        for s, A in Theta.coefficients.items():
            j = s + k
            row = codomain.position(j) // codomain.fiber_dim
            M[row * f : (row + 1) * f, col * e : (col + 1) * e] += math.sqrt(codomain.weight(j)) * scale * A
    return M, domain, codomain


def multiplier_norm_truncated(Theta: MatrixPolynomial, spec: KernelSpec, N: int) -> float:
    """``||M_Theta||`` restricted to degree ``<= N``; nondecreasing in ``N``."""
    M, _, _ = multiplier_matrix(Theta, spec, N)
    return operator_norm(M)


@dataclass
class NormEqualityReport:
    """Outcome of comparing block multiplier norms with the H(K) norm."""

    hk_norm: float
    block_norms: List[float]
    certificate: QuasiHomogeneityCertificate
    k_inner: bool
    k_inner_violation: float

    @property
    def max_block(self) -> float:
        return max(self.block_norms, default=0.0)

    @property
    def passed(self) -> bool:
        return abs(self.max_block - self.hk_norm) <= NORM_EQUALITY_SLACK * max(1.0, self.hk_norm)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "hk_norm": self.hk_norm,
            "block_norms": list(self.block_norms),
            "max_block": self.max_block,
            "pass": self.passed,
            "certificate": self.certificate.to_dict(),
            "normalized_k_inner": self.k_inner,
            "normalized_k_inner_violation": self.k_inner_violation,
        }


def verify_norm_equality(
    p: MatrixPolynomial,
    spec: KernelSpec,
    block_max: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    *,
    bound: int = WEIGHT_BOUND,
) -> NormEqualityReport:
    """Compare the block norms for levels ``0 ... block_max`` with ``hk_norm(p)``.

    Also checks whether ``p / hk_norm(p)`` is K-inner.

    Raises:
        NotQuasiHomogeneous: If no weights up to ``bound`` level the support.
        ZeroPolynomial: If ``p = 0``.
    """
    cert = quasi_homogeneous_decompose(p, bound)
    if cert is None:
        raise NotQuasiHomogeneous(f"no positive weights up to {bound} level the support of {p!r}")
    norm = hk_norm(p, spec)
    blocks = [multiplier_block_norm(p, spec, cert, b) for b in range(block_max + 1)]
    k_inner, violation = is_K_inner(p.scaled(1.0 / norm), spec, tol=tol)
    report = NormEqualityReport(
        hk_norm=norm,
        block_norms=blocks,
        certificate=cert,
        k_inner=k_inner,
        k_inner_violation=violation,
    )
    logger.debug("norm equality: hk %.12g, max block %.12g", norm, report.max_block)
    return report


@dataclass
class BeurlingResult:
    """The fiber ``F``, the K-inner part ``Theta0`` and the generating verdict."""

    F_basis: NDArray[np.complex128]
    theta0: MatrixPolynomial
    is_generating: bool
    partial_isometry_residual: float
    theta0_k_inner: bool
    theta0_violation: float


def beurling_wandering(
    Theta: MatrixPolynomial,
    spec: KernelSpec,
    N: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    *,
    require_partial_isometry: bool = True,
) -> BeurlingResult:
    """Split a partially isometric multiplier into its K-inner part.

    The partial-isometry residual is measured on the co-invariant
    compression ``P_N M_Theta P_N``, which keeps only codomain degrees
    ``<= N``. Since ``M_Theta*`` never raises degree, that compression has
    ``A A* = P_N M M* P_N``, a projection exactly when ``M_Theta`` is a
    partial isometry seen through the truncation.

    ``F`` is the eigenvalue-1 eigenspace of the constant block
    ``sum_k w_k A_k* A_k`` of ``M_Theta* M_Theta``; ``Theta0 = Theta|_F``. The
    subspace ``F`` generates when ``(ker M_Theta)^perp`` meets
    ``H^2_n(F)^perp`` only in zero, tested on the degree-``N`` truncation
    with the full codomain.

    Raises:
        NotPartialIsometry: If ``||A A* A - A|| > residual_tol`` and
            ``require_partial_isometry`` is set.
    """
    M, domain, codomain = multiplier_matrix(Theta, spec, N)
    low = np.repeat([k.degree <= N for k in codomain.indices], Theta.target_dim)
    A = M[low, :]
    residual = operator_norm(A @ A.conj().T @ A - A)
    if residual > tol.residual_tol:
        if require_partial_isometry:
            raise NotPartialIsometry(residual)
        logger.warning("multiplier is not a partial isometry at N=%d: residual %.3e", N, residual)
    e = Theta.source_dim
    constant = M[:, :e]
    F = unit_eigenspace(constant.conj().T @ constant, INTERSECTION_THRESHOLD)
    theta0 = Theta.restricted(F)
    ok, violation = is_K_inner(theta0, spec, tol=tol)
    if not ok:
        logger.warning("restricted multiplier fails the K-inner check: violation %.3e", violation)

    coimage = orthonormal_range(M.conj().T, tol)
    F_perp = null_space(F.conj().T, tol)
    outside_F = np.kron(np.eye(domain.num_monomials), F_perp)
    overlap = intersect_subspaces(coimage, outside_F)
    logger.debug("beurling: dim F = %d, overlap %d", F.shape[1], overlap.shape[1])
    return BeurlingResult(
        F_basis=F,
        theta0=theta0,
        is_generating=overlap.shape[1] == 0,
        partial_isometry_residual=residual,
        theta0_k_inner=ok,
        theta0_violation=violation,
    )


def non_closed_range_probe(
    p: MatrixPolynomial,
    n_list: Sequence[int],
    spec: Optional[KernelSpec] = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> List[float]:
    """Smallest nonzero singular value of the truncated ``M_p`` for each ``N``.

    A sequence decreasing to zero shows that ``p H^2_n`` is not closed.

    Raises:
        NotHomogeneous: If ``p`` is not homogeneous of positive degree.
    """
    _require_scalar(p, "range probe")
    if p.is_zero or not p.is_homogeneous or p.degree == 0:
        raise NotHomogeneous(f"range probe needs a homogeneous polynomial of positive degree, got {p!r}")
    target = KernelSpec.drury_arveson(p.n) if spec is None else spec
    values = []
    for N in n_list:
        M, _, _ = multiplier_matrix(p, target, N)
        s = scipy.linalg.svdvals(M)
        nonzero = s[s > tol.rank_tol * s[0]]
        values.append(float(nonzero[-1]))
        logger.debug("range probe N=%d: sigma_min %.6g", N, values[-1])
    return values


def multiplier_from_representation(Pi: RepresentationMap, space: TruncatedSpace) -> MatrixPolynomial:
    """The multiplier ``Theta(z) eta = (Pi eta)(z)`` of a representation.

    ``space`` is the scalar truncation that ``Pi`` maps into.
    """
    if space.fiber_dim != 1 or space.dimension != Pi.ambient_dim:
        raise DimensionMismatch(
            f"representation maps into dimension {Pi.ambient_dim}, space has {space.dimension} "
            f"(fiber {space.fiber_dim})"
        )
    C = Pi.constant_block()
    coefficients = {}
    for p, k in enumerate(space.indices):
        coefficients[k] = C[p : p + 1, :] / math.sqrt(space.monomial_weights[p])
    return MatrixPolynomial(n=space.n, source_dim=Pi.fiber_dim, target_dim=1, coefficients=coefficients)


__all__ = [
    "MatrixPolynomial",
    "QuasiHomogeneityCertificate",
    "NormEqualityReport",
    "BeurlingResult",
    "WEIGHT_BOUND",
    "hk_norm",
    "is_K_inner",
    "quasi_homogeneous_decompose",
    "multiplier_block_norm",
    "multiplier_matrix",
    "multiplier_norm_truncated",
    "verify_norm_equality",
    "beurling_wandering",
    "non_closed_range_probe",
    "multiplier_from_representation",
]
