"""Dense linear-algebra primitives with explicit rank and residual tolerances.

All matrices are complex and dense. Rank decisions threshold singular values
relative to the largest one, so results do not depend on the overall scale
of the input.

Example:
    >>> import numpy as np
    >>> from rowdil.numerics import orthonormal_range, psd_sqrt
    >>> orthonormal_range(np.array([[1.0, 2.0], [2.0, 4.0]])).shape
    (2, 1)
    >>> np.allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    True
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, fields, replace
from typing import TYPE_CHECKING, Dict, Mapping, Sequence

import numpy as np
import scipy.linalg

from rowdil.errors import ConfigError, DimensionMismatch, NotPSD

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)

TOLERANCE_ENV_VAR = "ROWDIL_TOL"

# Eigenvalue slack used when intersecting subspaces and locating unit eigenspaces.
INTERSECTION_THRESHOLD = 1e-8


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every rowdil operation.

    Attributes:
        rank_tol: Singular values below ``rank_tol * sigma_max`` count as zero.
        residual_tol: Default pass/fail threshold for residual checks.
        psd_clip: Negative eigenvalues of nominally PSD matrices with magnitude
            below this are clipped to zero; larger ones are an error.
    """

    rank_tol: float = 1e-10
    residual_tol: float = 1e-8
    psd_clip: float = 1e-12

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{f.name} must lie in (0, 1), got {value!r}")

    def with_rank_tol(self, rank_tol: float) -> Tolerances:
        """Return a copy with a different rank threshold."""
        return replace(self, rank_tol=rank_tol)

    def with_residual_tol(self, residual_tol: float) -> Tolerances:
        """Return a copy with a different residual threshold."""
        return replace(self, residual_tol=residual_tol)

    def with_psd_clip(self, psd_clip: float) -> Tolerances:
        """Return a copy with a different PSD clipping threshold."""
        return replace(self, psd_clip=psd_clip)

    def from_env(self, environ: Mapping[str, str] | None = None) -> Tolerances:
        """Return a copy with ``residual_tol`` taken from ``ROWDIL_TOL`` if set.

        Args:
            environ: Mapping to read instead of ``os.environ``.

        Raises:
            ConfigError: If the variable is set but not a number in (0, 1).
        """
        env = os.environ if environ is None else environ
        raw = env.get(TOLERANCE_ENV_VAR)
        if raw is None or raw.strip() == "":
            return self
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"{TOLERANCE_ENV_VAR} must be a number, got {raw!r}") from None
        logger.debug("residual_tol overridden from %s: %g", TOLERANCE_ENV_VAR, value)
        return self.with_residual_tol(value)

    def to_dict(self) -> Dict[str, float]:
        return {"rank_tol": self.rank_tol, "residual_tol": self.residual_tol, "psd_clip": self.psd_clip}


DEFAULT_TOLERANCES = Tolerances()

# Named presets for common use cases
PRESETS: Dict[str, Tolerances] = {
    "default": DEFAULT_TOLERANCES,
    "strict": Tolerances(rank_tol=1e-12, residual_tol=1e-10, psd_clip=1e-14),
    "loose": Tolerances(rank_tol=1e-8, residual_tol=1e-6, psd_clip=1e-10),
}


def get_preset(name: str) -> Tolerances:
    """Get a named tolerance preset.

    Args:
        name: Preset name. One of: default, strict, loose.

    Raises:
        KeyError: If preset name is not found.
    """
    if name not in PRESETS:
        available = ", ".join(sorted(PRESETS.keys()))
        raise KeyError(f"Unknown preset '{name}'. Available: {available}")
    return PRESETS[name]


def as_matrix(A: ArrayLike, name: str = "matrix") -> NDArray[np.complex128]:
    """Coerce to a 2-D complex array, rejecting anything else."""
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2D, got shape {M.shape}")
    return M


def _rank_from_singular_values(s: NDArray[np.float64], tol: Tolerances, reference: float | None) -> int:
    if s.size == 0:
        return 0
    scale = float(s[0]) if reference is None else reference
    if scale == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_tol * scale))


def numerical_rank(
    A: ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
    *,
    reference: float | None = None,
) -> int:
    """Number of singular values above ``rank_tol`` times ``sigma_max``.

    Args:
        A: Matrix to inspect.
        tol: Tolerances to apply.
        reference: Scale to threshold against instead of ``sigma_max``.
    """
    M = as_matrix(A)
    if M.size == 0:
        return 0
    return _rank_from_singular_values(scipy.linalg.svdvals(M), tol, reference)


def orthonormal_range(
    A: ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
    *,
    reference: float | None = None,
) -> NDArray[np.complex128]:
    """Orthonormal basis (as columns) of the numerical range of ``A``.

    The column count equals the numerical rank. A zero matrix yields a
    result with zero columns.

    Args:
        A: Matrix whose column span is wanted.
        tol: Tolerances to apply.
        reference: Scale to threshold against instead of ``sigma_max``.

    Example:
        >>> orthonormal_range(np.eye(3)).shape
        (3, 3)
    """
    M = as_matrix(A)
    if M.size == 0:
        return np.zeros((M.shape[0], 0), dtype=np.complex128)
    U, s, _ = scipy.linalg.svd(M, full_matrices=False)
    rank = _rank_from_singular_values(s, tol, reference)
    return fix_phases(U[:, :rank])


def fix_phases(Q: ArrayLike) -> NDArray[np.complex128]:
    """Rotate each column so its largest-magnitude entry is real and positive.

    Orthonormality and spans are unchanged; the result no longer depends on
    the phase conventions of the LAPACK driver.
    """
    Q = as_matrix(Q, "Q").copy()
    if Q.size == 0:
        return Q
    pivots = np.argmax(np.abs(Q), axis=0)
    leading = Q[pivots, np.arange(Q.shape[1])]
    nonzero = np.abs(leading) > 0
    Q[:, nonzero] *= np.conj(leading[nonzero]) / np.abs(leading[nonzero])
    return Q


def null_space(A: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES) -> NDArray[np.complex128]:
    """Orthonormal basis of the numerical kernel of ``A``."""
    M = as_matrix(A)
    rows, cols = M.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    if rows == 0 or not np.any(M):
        return np.eye(cols, dtype=np.complex128)
    _, s, Vh = scipy.linalg.svd(M, full_matrices=True)
    rank = _rank_from_singular_values(s, tol, None)
    return Vh[rank:].conj().T


def complement_within(
    B: ArrayLike,
    Q: ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> NDArray[np.complex128]:
    """Orthonormal basis of ``span(B)`` minus the projection of ``span(Q)`` onto it.

    ``B`` must have orthonormal columns. When ``span(Q)`` lies inside
    ``span(B)`` this is the orthogonal complement of ``span(Q)`` in ``span(B)``.
    """
    B = as_matrix(B, "B")
    Q = as_matrix(Q, "Q")
    if B.shape[0] != Q.shape[0]:
        raise DimensionMismatch(f"row counts differ: {B.shape[0]} vs {Q.shape[0]}")
    if Q.shape[1] == 0 or B.shape[1] == 0:
        return B.copy()
    coords = B.conj().T @ Q
    return B @ null_space(coords.conj().T, tol)


def psd_sqrt(X: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES) -> NDArray[np.complex128]:
    """Hermitian PSD square root via eigendecomposition with clipping.

    Eigenvalues in ``[-psd_clip, 0]`` are clipped to zero before the root
    is taken.

    Raises:
        NotPSD: If an eigenvalue is below ``-psd_clip``.
        DimensionMismatch: If ``X`` is not square.

    Example:
        >>> np.allclose(psd_sqrt(np.diag([1.0, 0.0])), np.diag([1.0, 0.0]))
        True
    """
    M = as_matrix(X, "X")
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"X must be square, got shape {M.shape}")
    if M.shape[0] == 0:
        return M.copy()
    H = (M + M.conj().T) / 2
    evals, evecs = scipy.linalg.eigh(H)
    if evals[0] < -tol.psd_clip:
        raise NotPSD(float(evals[0]), tol.psd_clip)
    roots = np.sqrt(np.clip(evals, 0.0, None))
    R = (evecs * roots) @ evecs.conj().T
    return (R + R.conj().T) / 2


def operator_norm(A: ArrayLike) -> float:
    """Largest singular value; zero for empty matrices."""
    M = np.asarray(A, dtype=np.complex128)
    if M.size == 0:
        return 0.0
    if M.ndim == 1:
        return float(np.linalg.norm(M))
    return float(scipy.linalg.svdvals(M)[0])


def projector(Q: ArrayLike) -> NDArray[np.complex128]:
    """Orthogonal projection ``Q Q*`` onto the span of orthonormal columns."""
    Q = as_matrix(Q, "Q")
    return Q @ Q.conj().T


def principal_angle_gap(Q1: ArrayLike, Q2: ArrayLike) -> float:
    """Norm of the difference of the two orthogonal projections.

    Zero exactly when the spans agree, one when some direction of one span
    is orthogonal to the other.

    Raises:
        DimensionMismatch: If the row dimensions differ.
    """
    Q1 = as_matrix(Q1, "Q1")
    Q2 = as_matrix(Q2, "Q2")
    if Q1.shape[0] != Q2.shape[0]:
        raise DimensionMismatch(
            f"subspaces live in different spaces: {Q1.shape[0]} vs {Q2.shape[0]} rows"
        )
    return max(operator_norm(projector(Q1) - projector(Q2)), 0.0)


def intersect_subspaces(
    Q1: ArrayLike,
    Q2: ArrayLike,
    threshold: float = INTERSECTION_THRESHOLD,
) -> NDArray[np.complex128]:
    """Orthonormal basis of ``span(Q1) ∩ span(Q2)``.

    Uses the spectrum of ``P1 + P2``: intersection vectors are exactly the
    eigenvectors with eigenvalue 2, accepted down to ``2 - threshold``.
    """
    Q1 = as_matrix(Q1, "Q1")
    Q2 = as_matrix(Q2, "Q2")
    if Q1.shape[0] != Q2.shape[0]:
        raise DimensionMismatch(f"row counts differ: {Q1.shape[0]} vs {Q2.shape[0]}")
    if Q1.shape[1] == 0 or Q2.shape[1] == 0:
        return np.zeros((Q1.shape[0], 0), dtype=np.complex128)
    evals, evecs = scipy.linalg.eigh(projector(Q1) + projector(Q2))
    keep = evals >= 2.0 - threshold
    logger.debug("intersection: %d of %d eigenvalues at 2", int(keep.sum()), evals.size)
    return evecs[:, keep]


def unit_eigenspace(
    G: ArrayLike,
    threshold: float = INTERSECTION_THRESHOLD,
) -> NDArray[np.complex128]:
    """Orthonormal eigenvectors of Hermitian ``G`` with eigenvalue 1 (within ``threshold``)."""
    M = as_matrix(G, "G")
    if M.shape[0] == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    evals, evecs = scipy.linalg.eigh((M + M.conj().T) / 2)
    return evecs[:, np.abs(evals - 1.0) <= threshold]


def lstsq_intertwiner(
    blocks_in: Sequence[ArrayLike],
    blocks_out: Sequence[ArrayLike],
) -> tuple[NDArray[np.complex128], float]:
    """Least-squares ``X`` minimizing ``sum_j ||X @ blocks_in[j] - blocks_out[j]||_F^2``.

    The blocks are stacked side by side and solved as one system, so the
    minimizer balances all blocks at once.

    Returns:
        ``(X, residual)`` where residual is the Frobenius norm of the stacked misfit.

    Raises:
        DimensionMismatch: On an empty block list or inconsistent shapes.

    Example:
        >>> B = np.array([[1.0, 2.0], [3.0, 4.0]])
        >>> X, residual = lstsq_intertwiner([np.eye(2)], [B])
        >>> np.allclose(X, B), residual < 1e-12
        (True, True)
    """
    if len(blocks_in) == 0:
        raise DimensionMismatch("at least one block pair is required")
    if len(blocks_in) != len(blocks_out):
        raise DimensionMismatch(
            f"block lists differ in length: {len(blocks_in)} vs {len(blocks_out)}"
        )
    ins = [as_matrix(b, "blocks_in") for b in blocks_in]
    outs = [as_matrix(b, "blocks_out") for b in blocks_out]
    d_in, d_out = ins[0].shape[0], outs[0].shape[0]
    for j, (a, b) in enumerate(zip(ins, outs)):
        if a.shape[0] != d_in or b.shape[0] != d_out or a.shape[1] != b.shape[1]:
            raise DimensionMismatch(
                f"block {j} has shapes {a.shape} -> {b.shape}, expected ({d_in}, k) -> ({d_out}, k)"
            )
    A = np.hstack(ins)
    B = np.hstack(outs)
    if A.shape[1] == 0:
        return np.zeros((d_out, d_in), dtype=np.complex128), 0.0
    solution, _, rank, _ = scipy.linalg.lstsq(A.T, B.T)
    X = solution.T
    residual = float(np.linalg.norm(X @ A - B))
    logger.debug("lstsq intertwiner: rank %d of %d, residual %.3e", rank, d_in, residual)
    return X, residual


def random_unitary(dim: int, rng: int | np.random.Generator | None = None) -> NDArray[np.complex128]:
    """Haar-distributed unitary matrix (QR of a complex Gaussian, phases fixed)."""
    gen = np.random.default_rng(rng)
    Z = (gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))) / np.sqrt(2.0)
    if dim == 0:
        return Z.astype(np.complex128)
    Q, R = scipy.linalg.qr(Z)
    diag = np.diag(R)
    phases = diag / np.abs(diag)
    return Q * phases


def random_isometry(
    rows: int,
    cols: int,
    rng: int | np.random.Generator | None = None,
) -> NDArray[np.complex128]:
    """Random isometry ``C^cols -> C^rows`` (first columns of a Haar unitary)."""
    if cols > rows:
        raise DimensionMismatch(f"an isometry needs cols <= rows, got {cols} > {rows}")
    return random_unitary(rows, rng)[:, :cols]


__all__ = [
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "PRESETS",
    "get_preset",
    "TOLERANCE_ENV_VAR",
    "INTERSECTION_THRESHOLD",
    "as_matrix",
    "numerical_rank",
    "orthonormal_range",
    "fix_phases",
    "null_space",
    "complement_within",
    "psd_sqrt",
    "operator_norm",
    "projector",
    "principal_angle_gap",
    "intersect_subspaces",
    "unit_eigenspace",
    "lstsq_intertwiner",
    "random_unitary",
    "random_isometry",
]
