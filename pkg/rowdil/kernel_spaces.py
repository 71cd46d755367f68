"""Truncated spaces H(K_lambda) on the unit ball of C^n.

The kernel ``K_lambda(z, w) = (1 - <z, w>)^(-lambda)`` has the monomials as an
orthogonal basis with ``||z^k||^2 = k! / (lambda)_|k|``. A
:class:`TruncatedSpace` keeps the polynomials of degree at most ``N`` (with
values in ``C^d``) and works in the orthonormalized basis
``e_k = z^k / sqrt(w_k)``, so every inner product downstream is Euclidean.

Familiar members of the family:

* Drury-Arveson space ``H^2_n``: ``lambda = 1``
* Hardy space of the ball: ``lambda = n``
* Bergman space of the ball: ``lambda = n + 1``
* weighted Bergman spaces: ``lambda = n + 1 + alpha``
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import total_ordering
from typing import TYPE_CHECKING, Dict, Iterator, List, Tuple

import numpy as np
from scipy.special import comb

from rowdil.errors import DimensionMismatch, PointOutsideBall

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)


@total_ordering
@dataclass(frozen=True)
class MultiIndex:
    """Exponent vector ``k`` in N^n.

    Ordering is graded: first by total degree, then lexicographically with
    larger leading exponents first, so degree one reads ``z_1, z_2, ..., z_n``.

    Example:
        >>> sorted([MultiIndex((0, 1)), MultiIndex((1, 0)), MultiIndex((0, 0))])
        [MultiIndex((0, 0)), MultiIndex((1, 0)), MultiIndex((0, 1))]
    """

    exponents: Tuple[int, ...]

    def __post_init__(self) -> None:
        exps = tuple(int(e) for e in self.exponents)
        if not exps:
            raise ValueError("multi-index needs at least one entry")
        if any(e < 0 for e in exps):
            raise ValueError(f"exponents must be nonnegative, got {exps}")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def zero(cls, n: int) -> MultiIndex:
        return cls((0,) * n)

    @classmethod
    def unit(cls, n: int, i: int) -> MultiIndex:
        """The multi-index ``e_i`` (0-based ``i``)."""
        exps = [0] * n
        exps[i] = 1
        return cls(tuple(exps))

    @classmethod
    def from_key(cls, key: str) -> MultiIndex:
        """Parse the serialized form ``"k1,k2,...,kn"``."""
        try:
            return cls(tuple(int(part) for part in key.split(",")))
        except ValueError:
            raise ValueError(f"malformed multi-index key: {key!r}") from None

    @property
    def n(self) -> int:
        return len(self.exponents)

    @property
    def degree(self) -> int:
        """Total degree ``|k|``."""
        return sum(self.exponents)

    @property
    def factorial(self) -> int:
        """``k! = k_1! ... k_n!``."""
        return math.prod(math.factorial(e) for e in self.exponents)

    @property
    def multinomial(self) -> int:
        """``|k|! / k!``."""
        return math.factorial(self.degree) // self.factorial

    @property
    def key(self) -> str:
        return ",".join(str(e) for e in self.exponents)

    def shifted(self, i: int) -> MultiIndex:
        """``k + e_i`` (0-based ``i``)."""
        exps = list(self.exponents)
        exps[i] += 1
        return MultiIndex(tuple(exps))

    def __add__(self, other: MultiIndex) -> MultiIndex:
        if self.n != other.n:
            raise DimensionMismatch(f"cannot add multi-indices of lengths {self.n} and {other.n}")
        return MultiIndex(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __sub__(self, other: MultiIndex) -> MultiIndex:
        """Componentwise difference; raises ValueError if any entry goes negative."""
        if self.n != other.n:
            raise DimensionMismatch(f"cannot subtract multi-indices of lengths {self.n} and {other.n}")
        return MultiIndex(tuple(a - b for a, b in zip(self.exponents, other.exponents)))

    def dominates(self, other: MultiIndex) -> bool:
        """True if ``self >= other`` componentwise."""
        return all(a >= b for a, b in zip(self.exponents, other.exponents))

    def monomial(self, z: ArrayLike) -> complex:
        """Value of ``z^k`` at a point."""
        point = np.asarray(z, dtype=np.complex128)
        return complex(np.prod(point ** np.asarray(self.exponents)))

    def _sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        return (self.degree, tuple(-e for e in self.exponents))

    def __lt__(self, other: MultiIndex) -> bool:
        if not isinstance(other, MultiIndex):
            return NotImplemented
        return self._sort_key() < other._sort_key()

    def __repr__(self) -> str:
        return f"MultiIndex({self.exponents!r})"


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Compositions of ``total`` into ``parts`` entries, largest first entry first."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def homogeneous_indices(n: int, degree: int) -> List[MultiIndex]:
    """All multi-indices of total degree ``degree`` in graded order."""
    return [MultiIndex(c) for c in _compositions(degree, n)]


def multi_indices(n: int, max_degree: int) -> List[MultiIndex]:
    """All multi-indices with ``|k| <= max_degree``, in graded order."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if max_degree < 0:
        raise ValueError(f"max_degree must be nonnegative, got {max_degree}")
    out: List[MultiIndex] = []
    for d in range(max_degree + 1):
        out.extend(homogeneous_indices(n, d))
    return out


def truncation_dimension(n: int, max_degree: int) -> int:
    """Number of monomials of degree at most ``max_degree`` in ``n`` variables."""
    return int(comb(max_degree + n, n, exact=True))


@dataclass(frozen=True)
class KernelSpec:
    """Ambient space H(K_lambda) on the ball of C^n.

    Attributes:
        n: Ball dimension.
        lam: Kernel exponent, at least 1.
    """

    n: int
    lam: float = 1.0

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not self.lam >= 1.0:
            raise ValueError(f"lambda must be >= 1, got {self.lam!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "lam", float(self.lam))

    @classmethod
    def drury_arveson(cls, n: int) -> KernelSpec:
        return cls(n, 1.0)

    @classmethod
    def hardy(cls, n: int) -> KernelSpec:
        return cls(n, float(n))

    @classmethod
    def bergman(cls, n: int) -> KernelSpec:
        return cls(n, float(n + 1))

    @classmethod
    def weighted_bergman(cls, n: int, alpha: float) -> KernelSpec:
        if alpha <= -1.0:
            raise ValueError(f"alpha must be > -1, got {alpha!r}")
        return cls(n, n + 1.0 + alpha)

    @property
    def family(self) -> str:
        """Name of the classical space this kernel gives, if any."""
        if self.lam == 1.0:
            return "drury-arveson"
        if self.lam == float(self.n):
            return "hardy"
        if self.lam == float(self.n + 1):
            return "bergman"
        return "weighted-bergman" if self.lam > self.n + 1 else "k-lambda"

    def to_dict(self) -> Dict[str, float]:
        return {"n": self.n, "lambda": self.lam}


def monomial_norm_sq(spec: KernelSpec, k: MultiIndex) -> float:
    """``||z^k||^2 = k! / (lambda)_|k|`` in H(K_lambda).

    Built by the recursion ``w_{k+e_i} = w_k (k_i + 1) / (lambda + |k|)``,
    which never forms a factorial.

    Example:
        >>> monomial_norm_sq(KernelSpec(2, 1.0), MultiIndex((1, 1)))
        0.5
    """
    if k.n != spec.n:
        raise DimensionMismatch(f"multi-index has {k.n} entries, space has n={spec.n}")
    weight = 1.0
    total = 0
    for exponent in k.exponents:
        for step in range(exponent):
            weight *= (step + 1) / (spec.lam + total)
            total += 1
    return weight


def _ball_point(z: ArrayLike, n: int) -> NDArray[np.complex128]:
    point = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if point.shape != (n,):
        raise DimensionMismatch(f"point must have {n} coordinates, got shape {point.shape}")
    norm = float(np.linalg.norm(point))
    if norm >= 1.0:
        raise PointOutsideBall(norm)
    return point


def kernel_eval(spec: KernelSpec, z: ArrayLike, w: ArrayLike) -> complex:
    """``K_lambda(z, w) = (1 - <z, w>)^(-lambda)`` on the principal branch.

    Raises:
        PointOutsideBall: If either point has norm >= 1.
    """
    zp = _ball_point(z, spec.n)
    wp = _ball_point(w, spec.n)
    base = 1.0 - complex(np.vdot(wp, zp))
    return base ** (-spec.lam)


class TruncatedSpace:
    """Polynomials of degree <= ``max_degree`` in H(K_lambda) tensor C^d.

    Coordinates refer to the orthonormal basis ``z^k e_j / sqrt(w_k)``,
    ordered monomial-major (graded order) and fiber-minor, so position
    ``p * d + j`` holds monomial ``indices[p]`` in fiber slot ``j``.

    Example:
        >>> space = TruncatedSpace(KernelSpec(2, 1.0), max_degree=2)
        >>> space.dimension
        6
    """

    __slots__ = ("_spec", "_max_degree", "_fiber_dim", "_indices", "_positions", "_monomial_weights")

    def __init__(self, spec: KernelSpec, max_degree: int, fiber_dim: int = 1) -> None:
        if int(max_degree) != max_degree or max_degree < 0:
            raise ValueError(f"max_degree must be a nonnegative integer, got {max_degree!r}")
        if int(fiber_dim) != fiber_dim or fiber_dim < 1:
            raise ValueError(f"fiber_dim must be a positive integer, got {fiber_dim!r}")
        self._spec = spec
        self._max_degree = int(max_degree)
        self._fiber_dim = int(fiber_dim)
        self._indices = tuple(multi_indices(spec.n, self._max_degree))
        self._positions = {k: p for p, k in enumerate(self._indices)}
        weights = np.empty(len(self._indices))
        # walk the graded order so each weight extends an earlier one
        for p, k in enumerate(self._indices):
            if k.degree == 0:
                weights[p] = 1.0
                continue
            i = next(j for j, e in enumerate(k.exponents) if e > 0)
            parent = k - MultiIndex.unit(spec.n, i)
            weights[p] = weights[self._positions[parent]] * k.exponents[i] / (spec.lam + parent.degree)
        weights.setflags(write=False)
        self._monomial_weights = weights

    @property
    def spec(self) -> KernelSpec:
        return self._spec

    @property
    def n(self) -> int:
        return self._spec.n

    @property
    def max_degree(self) -> int:
        return self._max_degree

    @property
    def fiber_dim(self) -> int:
        return self._fiber_dim

    @property
    def indices(self) -> Tuple[MultiIndex, ...]:
        """Monomial exponents in graded order."""
        return self._indices

    @property
    def num_monomials(self) -> int:
        return len(self._indices)

    @property
    def dimension(self) -> int:
        """``binom(N + n, n) * d``."""
        return len(self._indices) * self._fiber_dim

    @property
    def basis(self) -> List[Tuple[MultiIndex, int]]:
        """Ordered ``(multi-index, fiber slot)`` labels of the coordinates."""
        return [(k, j) for k in self._indices for j in range(self._fiber_dim)]

    @property
    def monomial_weights(self) -> NDArray[np.float64]:
        """``w_k`` per monomial (read-only)."""
        return self._monomial_weights

    @property
    def weights(self) -> NDArray[np.float64]:
        """``w_k`` per coordinate, repeated across fiber slots."""
        return np.repeat(self._monomial_weights, self._fiber_dim)

    def position(self, k: MultiIndex, j: int = 0) -> int:
        """Coordinate index of ``z^k e_j``."""
        try:
            return self._positions[k] * self._fiber_dim + j
        except KeyError:
            raise KeyError(f"{k!r} is not in the degree-{self._max_degree} truncation") from None

    def contains(self, k: MultiIndex) -> bool:
        return k in self._positions

    def weight(self, k: MultiIndex) -> float:
        return float(self._monomial_weights[self._positions[k]])

    def degrees(self) -> NDArray[np.int64]:
        """Total degree of each coordinate."""
        return np.repeat([k.degree for k in self._indices], self._fiber_dim)

    def degree_mask(self, max_degree: int) -> NDArray[np.bool_]:
        """Coordinates of degree at most ``max_degree``."""
        return self.degrees() <= max_degree

    def top_degree_mask(self) -> NDArray[np.bool_]:
        """Coordinates in the top graded component, where truncation acts."""
        return self.degrees() == self._max_degree

    def with_fiber(self, fiber_dim: int) -> TruncatedSpace:
        """Same monomials, different fiber dimension."""
        return TruncatedSpace(self._spec, self._max_degree, fiber_dim)

    def to_dict(self) -> Dict[str, float]:
        return {
            "n": self.n,
            "lambda": self._spec.lam,
            "max_degree": self._max_degree,
            "fiber_dim": self._fiber_dim,
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedSpace):
            return NotImplemented
        return (
            self._spec == other._spec
            and self._max_degree == other._max_degree
            and self._fiber_dim == other._fiber_dim
        )

    def __hash__(self) -> int:
        return hash((self._spec, self._max_degree, self._fiber_dim))

    def __repr__(self) -> str:
        return (
            f"TruncatedSpace(n={self.n}, lambda={self._spec.lam:g}, "
            f"max_degree={self._max_degree}, fiber_dim={self._fiber_dim})"
        )


def multiplication_matrix(space: TruncatedSpace, i: int) -> NDArray[np.complex128]:
    """Compression of ``M_{z_i}`` to the truncation, in orthonormal coordinates.

    The entry taking ``e_k`` to ``e_{k+e_i}`` is ``sqrt(w_{k+e_i} / w_k)``;
    the top-degree component is mapped to zero.

    Args:
        space: Truncated space.
        i: Coordinate index, 0-based.
    """
    if not 0 <= i < space.n:
        raise ValueError(f"coordinate index must lie in [0, {space.n}), got {i}")
    m = space.num_monomials
    M = np.zeros((m, m), dtype=np.complex128)
    lam = space.spec.lam
    for p, k in enumerate(space.indices):
        if k.degree == space.max_degree:
            continue
        target = k.shifted(i)
        # w_{k+e_i} / w_k = (k_i + 1) / (lambda + |k|)
        M[space.position(target) // space.fiber_dim, p] = math.sqrt((k.exponents[i] + 1) / (lam + k.degree))
    if space.fiber_dim == 1:
        return M
    return np.kron(M, np.eye(space.fiber_dim))


def point_evaluation_vector(space: TruncatedSpace, a: ArrayLike) -> NDArray[np.complex128]:
    """Vector ``v`` with ``<f, v> = f(a)`` for every coordinate vector ``f``.

    In orthonormal coordinates ``v_k = conj(a^k) / sqrt(w_k)``; this is also
    the truncation of the kernel function ``K(., a)``.

    Raises:
        PointOutsideBall: If ``||a|| >= 1``.
    """
    if space.fiber_dim != 1:
        raise DimensionMismatch(f"point evaluation needs fiber_dim 1, got {space.fiber_dim}")
    point = _ball_point(a, space.n)
    values = np.array([k.monomial(point) for k in space.indices])
    return np.conj(values) / np.sqrt(space.monomial_weights)


def kernel_section(space: TruncatedSpace, w: ArrayLike) -> NDArray[np.complex128]:
    """Coordinates of the degree-N truncation of ``K(., w)``."""
    return point_evaluation_vector(space, w)


def evaluate(space: TruncatedSpace, coords: ArrayLike, z: ArrayLike) -> NDArray[np.complex128]:
    """Value at ``z`` of the function with the given coordinates.

    Returns a vector of length ``fiber_dim`` (per column if ``coords`` is a
    matrix of coordinate columns).
    """
    c = np.asarray(coords, dtype=np.complex128)
    if c.shape[0] != space.dimension:
        raise DimensionMismatch(f"coordinates have length {c.shape[0]}, space has {space.dimension}")
    point = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if point.shape != (space.n,):
        raise DimensionMismatch(f"point must have {space.n} coordinates, got shape {point.shape}")
    scale = np.array([k.monomial(point) for k in space.indices]) / np.sqrt(space.monomial_weights)
    d = space.fiber_dim
    blocks = c.reshape((space.num_monomials, d) + c.shape[1:])
    return np.tensordot(scale, blocks, axes=(0, 0))


__all__ = [
    "MultiIndex",
    "KernelSpec",
    "TruncatedSpace",
    "homogeneous_indices",
    "multi_indices",
    "truncation_dimension",
    "monomial_norm_sq",
    "kernel_eval",
    "multiplication_matrix",
    "point_evaluation_vector",
    "kernel_section",
    "evaluate",
]
