"""Exception hierarchy for rowdil.

Every error derives from :class:`RowdilError`, itself a ``ValueError``, so
callers that only guard against bad input keep working. The CLI maps
:class:`ConfigError` to exit code 3 and every other :class:`RowdilError`
to exit code 2.
"""

from __future__ import annotations


class RowdilError(ValueError):
    """Base class for all rowdil errors."""


class ConfigError(RowdilError):
    """Unreadable, malformed or inconsistent configuration or data file."""


class DimensionMismatch(RowdilError):
    """Operands whose shapes or lengths do not fit together."""


class PreconditionError(RowdilError):
    """A mathematical precondition of an operation does not hold."""


class NotPSD(PreconditionError):
    """A nominally positive semidefinite matrix has a negative eigenvalue."""

    def __init__(self, min_eigenvalue: float, clip: float) -> None:
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"matrix is not positive semidefinite: min eigenvalue "
            f"{min_eigenvalue:.3e} < -{clip:.1e}"
        )


class NotCommuting(PreconditionError):
    """Tuple members fail the commutativity check."""


class NotRowContraction(PreconditionError):
    """Sum T_i T_i* exceeds the identity."""

    def __init__(self, row_norm: float) -> None:
        self.row_norm = row_norm
        super().__init__(f"tuple is not a row contraction: ||P_T(I)|| = {row_norm:.6g}")


class NotPure(PreconditionError):
    """The purity residual is still above tolerance at the requested cut."""

    def __init__(self, residual: float, n_cut: int) -> None:
        self.residual = residual
        self.n_cut = n_cut
        super().__init__(
            f"tuple is not pure at n_cut={n_cut}: ||P_T^{n_cut + 1}(I)|| = {residual:.3e}; "
            f"raise n_cut or check the tuple"
        )


class NotMinimal(PreconditionError):
    """A dilation whose coefficients do not span its fiber."""


class NotDilation(PreconditionError):
    """A map that fails the isometry or intertwining checks of a dilation."""


class NotInvariant(PreconditionError):
    """A subspace that is not jointly invariant under the tuple."""

    def __init__(self, residual: float) -> None:
        self.residual = residual
        super().__init__(f"subspace is not invariant: residual {residual:.3e}")


class RangeMismatch(PreconditionError):
    """A representation whose range is not the expected subspace."""

    def __init__(self, gap: float, message: str | None = None) -> None:
        self.gap = gap
        super().__init__(message or f"representations have different ranges: gap {gap:.3e}")


class MalformedRepresentation(PreconditionError):
    """A representation map with inconsistent internal data."""


class NotPartialIsometry(PreconditionError):
    """A multiplier whose truncated matrix is not a partial isometry."""

    def __init__(self, residual: float) -> None:
        self.residual = residual
        super().__init__(
            f"multiplier is not a partial isometry: ||M M* M - M|| = {residual:.3e}"
        )


class NotQuasiHomogeneous(PreconditionError):
    """No positive integer weight vector levels the polynomial's support."""


class NotHomogeneous(PreconditionError):
    """The polynomial is not homogeneous of positive degree."""


class ZeroPolynomial(PreconditionError):
    """The polynomial has no nonzero coefficient."""


class PointOutsideBall(PreconditionError):
    """A point with Euclidean norm >= 1."""

    def __init__(self, norm: float) -> None:
        self.norm = norm
        super().__init__(f"point must lie in the open unit ball, got norm {norm:.6g}")


__all__ = [
    "RowdilError",
    "ConfigError",
    "DimensionMismatch",
    "PreconditionError",
    "NotPSD",
    "NotCommuting",
    "NotRowContraction",
    "NotPure",
    "NotMinimal",
    "NotDilation",
    "NotInvariant",
    "RangeMismatch",
    "MalformedRepresentation",
    "NotPartialIsometry",
    "NotQuasiHomogeneous",
    "NotHomogeneous",
    "ZeroPolynomial",
    "PointOutsideBall",
]
