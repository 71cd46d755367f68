"""Experiment configuration and the verification commands behind the CLI.

An experiment is one JSON object::

    {
      "id": "da-shift",
      "command": "dilate",
      "seed": 0,
      "space": {"n": 2, "lambda": 1.0, "max_degree": 2},
      "tuple": {"kind": "compressed_shift"},
      "probes": {"n_cut": 4},
      "tolerances": {"residual_tol": 1e-10}
    }

A config file holds either one such object or ``{"experiments": [...]}``.
Each ``cmd_*`` function returns a report dict with a ``passed`` flag and an
optional ``table``; :func:`run_experiment` turns exceptions into exit codes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from rowdil.dilation import canonical_dilation, factor_dilation, match_minimal_dilations, minimality_rank
from rowdil.errors import ConfigError, NotPure, NotRowContraction
from rowdil.inner_functions import (
    MatrixPolynomial,
    is_K_inner,
    multiplier_norm_truncated,
    non_closed_range_probe,
    verify_norm_equality,
)
from rowdil.invariant_subspaces import (
    Subspace,
    full_subspace,
    generated_subspace,
    is_invariant,
    representation_via_dilation,
    wandering_from_representation,
    wandering_subspace,
    wandering_violation,
    zero_based_subspace,
)
from rowdil.kernel_spaces import KernelSpec, TruncatedSpace
from rowdil.numerics import DEFAULT_TOLERANCES, Tolerances, operator_norm, random_isometry, random_unitary
from rowdil.row_contractions import (
    OperatorTuple,
    compressed_shift,
    is_row_contraction,
    purity_residuals,
    random_pure_tuple,
    random_spherical_unitary,
)
from rowdil.serialization import (
    complex_from_json,
    kernel_spec_from_dict,
    load_json,
    polynomial_from_dict,
    space_from_dict,
    subspace_from_dict,
    tuple_from_dict,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PRECONDITION = 2
EXIT_CONFIG = 3

TUPLE_KINDS = ("compressed_shift", "random", "spherical_unitary", "file")
SUBSPACE_KINDS = ("full", "zero_based", "file")

DEFAULT_N_LIST = tuple(range(2, 11))


# ── Configuration ────────────────────────────────────────────────────


@dataclass(frozen=True)
class TupleSource:
    """Where the operator tuple comes from."""

    kind: str = "compressed_shift"
    n: Optional[int] = None
    dim: Optional[int] = None
    seed: Optional[int] = None
    scale: float = 0.5
    nilpotent: bool = False
    path: Optional[Path] = None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind}
        if self.kind in ("random", "spherical_unitary"):
            data.update(n=self.n, dim=self.dim, seed=self.seed)
        if self.kind == "random":
            data.update(scale=self.scale, nilpotent=self.nilpotent)
        if self.kind == "file":
            data["path"] = str(self.path)
        return data


@dataclass(frozen=True)
class SubspaceSource:
    """Which invariant subspace to study."""

    kind: str = "full"
    point: Optional[Tuple[complex, ...]] = None
    path: Optional[Path] = None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind}
        if self.point is not None:
            data["point"] = [[z.real, z.imag] for z in self.point]
        if self.path is not None:
            data["path"] = str(self.path)
        return data


@dataclass(frozen=True)
class ProbeDepths:
    """Truncation and probe depths.

    ``n_cut = None`` picks the first cut whose purity tail passes, searching
    up to ``m_max``.
    """

    n_cut: Optional[int] = None
    m_max: int = 200
    probe_degree: Optional[int] = None
    block_max: int = 12
    n_list: Tuple[int, ...] = DEFAULT_N_LIST

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_cut": self.n_cut,
            "m_max": self.m_max,
            "probe_degree": self.probe_degree,
            "block_max": self.block_max,
            "n_list": list(self.n_list),
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """One fully parsed experiment.

    Attributes:
        command: One of :data:`COMMANDS`.
        id: Report key; batches are sorted by it.
        seed: Default seed for random sources and scrambles.
        space: Truncated space, if the command needs one.
        kernel: Target kernel for multiplier commands.
        tuple_source: Operator tuple source.
        subspace_source: Subspace source for ``wandering``.
        polynomial: Polynomial for ``multnorm`` and ``probe-range``.
        probes: Depths.
        tolerances: Thresholds for this experiment.
        trials: Number of seeded scrambles for ``uniqueness``.
    """

    command: str
    id: str
    seed: int = 0
    space: Optional[TruncatedSpace] = None
    kernel: Optional[KernelSpec] = None
    tuple_source: TupleSource = field(default_factory=TupleSource)
    subspace_source: SubspaceSource = field(default_factory=SubspaceSource)
    polynomial: Optional[MatrixPolynomial] = None
    probes: ProbeDepths = field(default_factory=ProbeDepths)
    tolerances: Tolerances = DEFAULT_TOLERANCES
    trials: int = 20

    def with_seed(self, seed: int) -> ExperimentConfig:
        """Return a copy whose default seed (and random tuple seed) is ``seed``."""
        source = self.tuple_source
        if source.kind in ("random", "spherical_unitary"):
            source = replace(source, seed=seed)
        return replace(self, seed=seed, tuple_source=source)

    def with_tolerances(self, tolerances: Tolerances) -> ExperimentConfig:
        return replace(self, tolerances=tolerances)

    @classmethod
    def from_dict(
        cls,
        data: Any,
        *,
        default_command: Optional[str] = None,
        base_dir: Optional[Path] = None,
    ) -> ExperimentConfig:
        """Parse one experiment object.

        Args:
            data: Decoded JSON object.
            default_command: Command to use when ``data`` names none.
            base_dir: Directory that relative file paths are resolved against.

        Raises:
            ConfigError: On unknown names, missing sections or bad values.
        """
        if not isinstance(data, dict):
            raise ConfigError(f"experiment must be a JSON object, got {type(data).__name__}")
        command = data.get("command", default_command)
        if command is None:
            raise ConfigError("experiment names no command")
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}. Available: {', '.join(sorted(COMMANDS))}")
        if default_command is not None and command != default_command:
            raise ConfigError(f"experiment command {command!r} does not match {default_command!r}")
        exp_id = data.get("id", command)
        if not isinstance(exp_id, str) or not exp_id:
            raise ConfigError(f"experiment id must be a nonempty string, got {exp_id!r}")
        seed = _int(data.get("seed", 0), "seed")
        base = base_dir or Path.cwd()

        space_data = _section(data["space"], "space") if "space" in data else None
        space = space_from_dict(space_data) if space_data and "max_degree" in space_data else None
        kernel = kernel_spec_from_dict(space_data) if space_data is not None else None
        polynomial = polynomial_from_dict(data["polynomial"]) if "polynomial" in data else None
        return cls(
            command=command,
            id=exp_id,
            seed=seed,
            space=space,
            kernel=kernel,
            tuple_source=_tuple_source(data.get("tuple", {}), seed, base),
            subspace_source=_subspace_source(data.get("subspace", {}), base),
            polynomial=polynomial,
            probes=_probes(data.get("probes", {})),
            tolerances=_tolerances(data.get("tolerances", {})),
            trials=_int(data.get("trials", 20), "trials", 1),
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "command": self.command,
            "id": self.id,
            "seed": self.seed,
            "probes": self.probes.to_dict(),
            "tolerances": self.tolerances.to_dict(),
        }
        if self.space is not None:
            data["space"] = self.space.to_dict()
        elif self.kernel is not None:
            data["space"] = self.kernel.to_dict()
        if self.command in ("dilate", "wandering", "uniqueness"):
            data["tuple"] = self.tuple_source.to_dict()
        if self.command == "wandering":
            data["subspace"] = self.subspace_source.to_dict()
        if self.command == "uniqueness":
            data["trials"] = self.trials
        return data


def _int(value: Any, what: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{what} must be an integer >= {minimum}, got {value!r}")
    return value


def _section(value: Any, what: str) -> Mapping[str, Any]:
    if not isinstance(value, dict):
        raise ConfigError(f"{what} must be a JSON object, got {type(value).__name__}")
    return value


def _resolve(path: Any, base: Path, what: str) -> Path:
    if not isinstance(path, str) or not path:
        raise ConfigError(f"{what}.path must be a nonempty string")
    p = Path(path)
    return p if p.is_absolute() else base / p


def _tuple_source(value: Any, seed: int, base: Path) -> TupleSource:
    data = _section(value, "tuple")
    kind = data.get("kind", "compressed_shift")
    if kind not in TUPLE_KINDS:
        raise ConfigError(f"unknown tuple kind {kind!r}. Available: {', '.join(TUPLE_KINDS)}")
    if kind == "file":
        return TupleSource(kind=kind, path=_resolve(data.get("path"), base, "tuple"))
    if kind == "compressed_shift":
        return TupleSource(kind=kind)
    n = _int(data.get("n"), "tuple.n", 1) if "n" in data else None
    dim = _int(data.get("dim"), "tuple.dim", 1)
    tuple_seed = _int(data.get("seed", seed), "tuple.seed")
    if kind == "spherical_unitary":
        return TupleSource(kind=kind, n=n, dim=dim, seed=tuple_seed)
    scale = data.get("scale", 0.5)
    if isinstance(scale, bool) or not isinstance(scale, (int, float)) or not 0.0 < scale <= 1.0:
        raise ConfigError(f"tuple.scale must lie in (0, 1], got {scale!r}")
    if scale == 1.0:
        # a scale-one random source is the spherical unitary contrast case
        return TupleSource(kind="spherical_unitary", n=n, dim=dim, seed=tuple_seed)
    nilpotent = data.get("nilpotent", False)
    if not isinstance(nilpotent, bool):
        raise ConfigError(f"tuple.nilpotent must be a boolean, got {nilpotent!r}")
    return TupleSource(kind=kind, n=n, dim=dim, seed=tuple_seed, scale=float(scale), nilpotent=nilpotent)


def _subspace_source(value: Any, base: Path) -> SubspaceSource:
    data = _section(value, "subspace")
    kind = data.get("kind", "full")
    if kind not in SUBSPACE_KINDS:
        raise ConfigError(f"unknown subspace kind {kind!r}. Available: {', '.join(SUBSPACE_KINDS)}")
    if kind == "file":
        return SubspaceSource(kind=kind, path=_resolve(data.get("path"), base, "subspace"))
    if kind == "zero_based":
        raw = data.get("point")
        if not isinstance(raw, list) or not raw:
            raise ConfigError("subspace.point must be a nonempty list of coordinates")
        point = tuple(complex_from_json(v, "subspace.point") for v in raw)
        return SubspaceSource(kind=kind, point=point)
    return SubspaceSource(kind=kind)


def _probes(value: Any) -> ProbeDepths:
    data = _section(value, "probes")
    n_cut = data.get("n_cut")
    n_list = data.get("n_list", list(DEFAULT_N_LIST))
    if not isinstance(n_list, list) or not n_list:
        raise ConfigError("probes.n_list must be a nonempty list of integers")
    return ProbeDepths(
        n_cut=None if n_cut is None else _int(n_cut, "probes.n_cut"),
        m_max=_int(data.get("m_max", 200), "probes.m_max", 1),
        probe_degree=None if data.get("probe_degree") is None else _int(data["probe_degree"], "probes.probe_degree"),
        block_max=_int(data.get("block_max", 12), "probes.block_max"),
        n_list=tuple(_int(N, "probes.n_list entry") for N in n_list),
    )


def _tolerances(value: Any) -> Tolerances:
    data = _section(value, "tolerances")
    unknown = set(data) - {"rank_tol", "residual_tol", "psd_clip"}
    if unknown:
        raise ConfigError(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
    for name, v in data.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"tolerances.{name} must be a number, got {v!r}")
    return replace(DEFAULT_TOLERANCES, **{k: float(v) for k, v in data.items()})


def load_experiments(
    path: Path,
    *,
    default_command: Optional[str] = None,
) -> List[ExperimentConfig]:
    """Read a config file holding one experiment or ``{"experiments": [...]}``.

    Raises:
        ConfigError: On malformed content or duplicate ids.
        OSError: If the file cannot be read.
    """
    path = Path(path)
    data = load_json(path)
    base = path.parent
    if isinstance(data, dict) and "experiments" in data:
        items = data["experiments"]
        if not isinstance(items, list) or not items:
            raise ConfigError("experiments must be a nonempty list")
    else:
        items = [data]
    configs = [ExperimentConfig.from_dict(item, default_command=default_command, base_dir=base) for item in items]
    ids = [c.id for c in configs]
    duplicates = sorted({i for i in ids if ids.count(i) > 1})
    if duplicates:
        raise ConfigError(f"duplicate experiment id(s): {', '.join(duplicates)}")
    return sorted(configs, key=lambda c: c.id)


# ── Sources ──────────────────────────────────────────────────────────


def _require_space(config: ExperimentConfig) -> TruncatedSpace:
    if config.space is None:
        raise ConfigError(f"{config.command} needs a space section with n and max_degree")
    return config.space


def build_tuple(config: ExperimentConfig) -> OperatorTuple:
    """The operator tuple named by ``config.tuple_source``."""
    source = config.tuple_source
    if source.kind == "compressed_shift":
        return compressed_shift(_require_space(config))
    if source.kind == "file":
        return tuple_from_dict(load_json(source.path))
    n = source.n
    if n is None:
        if config.kernel is None:
            raise ConfigError("random tuples need tuple.n or space.n")
        n = config.kernel.n
    seed = config.seed if source.seed is None else source.seed
    if source.kind == "spherical_unitary":
        return random_spherical_unitary(n, source.dim, seed)
    return random_pure_tuple(n, source.dim, seed, source.scale, nilpotent=source.nilpotent)


def build_subspace(config: ExperimentConfig) -> Subspace:
    source = config.subspace_source
    space = _require_space(config)
    if source.kind == "full":
        return full_subspace(space)
    if source.kind == "zero_based":
        if len(source.point) != space.n:
            raise ConfigError(f"subspace.point has {len(source.point)} coordinates, expected {space.n}")
        return zero_based_subspace(space, np.array(source.point), config.tolerances)
    S = subspace_from_dict(load_json(source.path))
    if S.ambient_dim != space.dimension:
        raise ConfigError(f"subspace lives in dimension {S.ambient_dim}, space has {space.dimension}")
    return S


def _require_polynomial(config: ExperimentConfig) -> MatrixPolynomial:
    if config.polynomial is None:
        raise ConfigError(f"{config.command} needs a polynomial section")
    return config.polynomial


def _target_kernel(config: ExperimentConfig, p: MatrixPolynomial) -> KernelSpec:
    if config.kernel is None:
        return KernelSpec.drury_arveson(p.n)
    if config.kernel.n != p.n:
        raise ConfigError(f"polynomial has n={p.n}, space has n={config.kernel.n}")
    return config.kernel


def choose_cut(T: OperatorTuple, probes: ProbeDepths, tol: Tolerances) -> Tuple[int, List[float]]:
    """Degree cut to use and the purity residuals ``m = 1 ... m_max``.

    Raises:
        NotPure: If no cut up to ``m_max - 1`` brings the tail below ``residual_tol``.
    """
    m_max = probes.m_max if probes.n_cut is None else max(probes.m_max, probes.n_cut + 1)
    residuals = purity_residuals(T, m_max)
    if probes.n_cut is not None:
        return probes.n_cut, residuals
    for m, r in enumerate(residuals, start=1):
        if r <= tol.residual_tol:
            return m - 1, residuals
    raise NotPure(residuals[-1], m_max - 1)


# ── Commands ─────────────────────────────────────────────────────────


def cmd_dilate(config: ExperimentConfig) -> Dict[str, Any]:
    """Purity, canonical dilation, isometry and intertwining residuals, minimality."""
    tol = config.tolerances
    T = build_tuple(config)
    ok, row_norm = is_row_contraction(T)
    if not ok:
        raise NotRowContraction(row_norm)
    n_cut, residuals = choose_cut(T, config.probes, tol)
    Pi = canonical_dilation(T, n_cut, tol)
    iso = Pi.isometry_defect()
    inter = Pi.intertwining_residual(T)
    rank = minimality_rank(Pi, tol)
    checks = {
        "isometry": iso <= tol.residual_tol,
        "intertwining": inter <= tol.residual_tol,
        "minimal": rank == Pi.fiber_dim,
    }
    return {
        "tuple": {"n": T.n, "dim": T.dim, "row_norm": row_norm},
        "degree_cut": n_cut,
        "purity_tail": residuals[n_cut] if n_cut < len(residuals) else residuals[-1],
        "fiber_dim": Pi.fiber_dim,
        "isometry_defect": iso,
        "intertwining_residual": inter,
        "minimality_rank": rank,
        "checks": checks,
        "passed": all(checks.values()),
        "table": {
            "headers": ["m", "purity_residual"],
            "rows": [[m, r] for m, r in enumerate(residuals, start=1)],
        },
    }


def cmd_wandering(config: ExperimentConfig) -> Dict[str, Any]:
    """Both wandering subspace computations on one invariant subspace."""
    tol = config.tolerances
    space = _require_space(config)
    T = build_tuple(config)
    if T.dim != space.dimension:
        raise ConfigError(f"tuple acts on dimension {T.dim}, space has {space.dimension}")
    S = build_subspace(config)
    invariant, residual = is_invariant(S, T, tol)
    W = wandering_subspace(S, T, tol)
    n_cut = space.max_degree if config.probes.n_cut is None else config.probes.n_cut
    Pi = representation_via_dilation(S, T, n_cut, tol)
    W_rep = wandering_from_representation(Pi, tol)
    gap = W.gap(W_rep)
    G = generated_subspace(W, T, tol)
    generated_gap = G.gap(S)
    checks = {"agreement": gap <= tol.residual_tol}
    return {
        "subspace": {"dim": S.dim, "invariance_residual": residual, "invariant": invariant},
        "wandering_dim": W.dim,
        "representation_wandering_dim": W_rep.dim,
        "agreement_gap": gap,
        "wandering_violation": wandering_violation(W, T, space.max_degree),
        "representation_fiber_dim": Pi.fiber_dim,
        "partial_isometry_residual": Pi.partial_isometry_residual(),
        "generated_dim": G.dim,
        "generated_gap": generated_gap,
        "generating": generated_gap <= tol.residual_tol,
        "checks": checks,
        "passed": all(checks.values()),
    }


def cmd_multnorm(config: ExperimentConfig) -> Dict[str, Any]:
    """Quasi-homogeneous detection, block norms against ``hk_norm``, truncated norms."""
    tol = config.tolerances
    p = _require_polynomial(config)
    spec = _target_kernel(config, p)
    report = verify_norm_equality(p, spec, config.probes.block_max, tol)
    if config.probes.probe_degree is not None:
        ok, violation = is_K_inner(p.scaled(1.0 / report.hk_norm), spec, config.probes.probe_degree, tol)
        report.k_inner, report.k_inner_violation = ok, violation
    truncated = [multiplier_norm_truncated(p, spec, N) for N in config.probes.n_list]
    result = report.to_dict()
    result.update(
        kernel=spec.to_dict(),
        truncated_norms={str(N): v for N, v in zip(config.probes.n_list, truncated)},
        checks={"norm_equality": report.passed},
        passed=report.passed,
        table={
            "headers": ["block", "norm"],
            "rows": [[b, v] for b, v in enumerate(report.block_norms)],
        },
    )
    return result


def cmd_probe_range(config: ExperimentConfig) -> Dict[str, Any]:
    """Smallest nonzero singular value of truncated ``M_p`` over ``n_list``."""
    tol = config.tolerances
    p = _require_polynomial(config)
    spec = _target_kernel(config, p)
    n_list = sorted(set(config.probes.n_list))
    values = non_closed_range_probe(p, n_list, spec, tol)
    decreasing = all(b < a for a, b in zip(values, values[1:]))
    checks = {"strictly_decreasing": decreasing} if p.n >= 2 else {}
    return {
        "kernel": spec.to_dict(),
        "sigma_min": {str(N): v for N, v in zip(n_list, values)},
        "strictly_decreasing": decreasing,
        "checks": checks,
        "passed": all(checks.values()),
        "table": {"headers": ["N", "sigma_min"], "rows": [[N, v] for N, v in zip(n_list, values)]},
    }


def cmd_uniqueness(config: ExperimentConfig) -> Dict[str, Any]:
    """Recover seeded fiber scrambles and isometric embeddings of the canonical dilation."""
    tol = config.tolerances
    T = build_tuple(config)
    n_cut, _ = choose_cut(T, config.probes, tol)
    Pic = canonical_dilation(T, n_cut, tol)
    e = Pic.fiber_dim
    rng = np.random.default_rng(config.seed)
    rows = []
    for trial in range(config.trials):
        U0 = random_unitary(e, rng)
        U, match_residual = match_minimal_dilations(Pic, Pic.with_fiber_map(U0), tol)
        V0 = random_isometry(e + 1 + trial % 3, e, rng)
        V, factor_residual = factor_dilation(Pic.with_fiber_map(V0), Pic, T, tol)
        rows.append(
            [
                trial,
                match_residual,
                operator_norm(U - U0),
                operator_norm(U.conj().T @ U - np.eye(e)),
                factor_residual,
                operator_norm(V.conj().T @ V - np.eye(e)),
            ]
        )
    worst = np.max(np.array([row[1:] for row in rows]), axis=0)
    checks = {
        "match_residual": worst[0] <= tol.residual_tol,
        "recovered_unitary": worst[1] <= tol.residual_tol and worst[2] <= tol.residual_tol,
        "factor_residual": worst[3] <= tol.residual_tol,
        "recovered_isometry": worst[4] <= tol.residual_tol,
    }
    return {
        "fiber_dim": e,
        "degree_cut": n_cut,
        "trials": config.trials,
        "worst": {
            "match_residual": worst[0],
            "unitary_error": worst[1],
            "unitarity_defect": worst[2],
            "factor_residual": worst[3],
            "isometry_defect": worst[4],
        },
        "checks": checks,
        "passed": all(checks.values()),
        "table": {
            "headers": [
                "trial",
                "match_residual",
                "unitary_error",
                "unitarity_defect",
                "factor_residual",
                "isometry_defect",
            ],
            "rows": rows,
        },
    }


COMMANDS = {
    "dilate": cmd_dilate,
    "wandering": cmd_wandering,
    "multnorm": cmd_multnorm,
    "probe-range": cmd_probe_range,
    "uniqueness": cmd_uniqueness,
}


# ── Running ──────────────────────────────────────────────────────────


@dataclass
class ExperimentOutcome:
    """Report and exit code of one experiment."""

    config: ExperimentConfig
    exit_code: int
    report: Dict[str, Any]
    table: Optional[Dict[str, Any]] = None

    @property
    def status(self) -> str:
        return {
            EXIT_OK: "passed",
            EXIT_CHECK_FAILED: "failed",
            EXIT_PRECONDITION: "precondition",
            EXIT_CONFIG: "config",
        }[self.exit_code]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.config.id,
            "command": self.config.command,
            "config": self.config.to_dict(),
            "status": self.status,
            "exit_code": self.exit_code,
            "result": self.report,
        }


def _error_report(exc: BaseException) -> Dict[str, Any]:
    return {"error": {"type": type(exc).__name__, "message": str(exc)}}


def run_experiment(config: ExperimentConfig) -> ExperimentOutcome:
    """Run one experiment and map its outcome to an exit code.

    ConfigError and OSError give EXIT_CONFIG, any other ValueError (every
    RowdilError is one) gives EXIT_PRECONDITION and a failed check gives
    EXIT_CHECK_FAILED.
    """
    logger.info("running %s (%s)", config.id, config.command)
    try:
        report = COMMANDS[config.command](config)
    except (ConfigError, OSError) as e:
        logger.info("%s stopped: %s", config.id, e)
        return ExperimentOutcome(config, EXIT_CONFIG, _error_report(e))
    except ValueError as e:
        logger.info("%s stopped: %s", config.id, e)
        return ExperimentOutcome(config, EXIT_PRECONDITION, _error_report(e))
    table = report.pop("table", None)
    code = EXIT_OK if report["passed"] else EXIT_CHECK_FAILED
    if code:
        failed = sorted(k for k, v in report.get("checks", {}).items() if not v)
        logger.warning("%s: failed check(s) %s", config.id, ", ".join(failed))
    return ExperimentOutcome(config, code, report, table)


def run_batch(configs: Sequence[ExperimentConfig]) -> List[ExperimentOutcome]:
    """Run experiments in id order."""
    return [run_experiment(c) for c in sorted(configs, key=lambda c: c.id)]


__all__ = [
    "EXIT_OK",
    "EXIT_CHECK_FAILED",
    "EXIT_PRECONDITION",
    "EXIT_CONFIG",
    "COMMANDS",
    "TupleSource",
    "SubspaceSource",
    "ProbeDepths",
    "ExperimentConfig",
    "ExperimentOutcome",
    "load_experiments",
    "build_tuple",
    "build_subspace",
    "choose_cut",
    "cmd_dilate",
    "cmd_wandering",
    "cmd_multnorm",
    "cmd_probe_range",
    "cmd_uniqueness",
    "run_experiment",
    "run_batch",
]
