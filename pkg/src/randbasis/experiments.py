"""Batch study: reference basis, randomized bases for every strategy, and CSV tables."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .coefficient import CoefficientField, read_tabulated
from .errors import ConfigurationError, DegenerateSampleError, DistanceError, RankDeficiencyError
from .fem import assemble
from .geometry import PatchPair, build_mesh
from .metrics import frame_from_basis, kolmogorov_distance, run_bound_suite
from .sampling import STRATEGIES, SamplingSpec, generate_samples
from .spectral import REFERENCE_TOL, randomized_basis, reference_basis

log = logging.getLogger(__name__)

EIGENVALUES_HEADER = ("source", "seed", "index", "lambda")
ENERGIES_HEADER = ("strategy", "seed", "n", "energy")
DISTANCES_HEADER = ("strategy", "seed", "m", "distance")
BOUNDS_HEADER = ("checker", "instance_seed", "lhs", "rhs", "holds")
MODES_HEADER = ("mode", "x", "y", "value")
FAILURES_HEADER = ("strategy", "seed", "error")

N_MODES_DUMPED = 4
BOUND_TRIALS = 100

CONFIG_KEYS = {
    "patch", "medium", "strategies", "distance_target_n", "distance_m_range", "seeds", "tol", "output_dir",
}
_SPEC_KEYS = {"strategy", "n_samples", "gaussian_width", "cov_sigma", "smooth_sigma", "kl_modes"}
_PATCH_KEYS = {"omega_half_width", "omega_star_half_width", "h"}


def _default_strategies():
    return tuple(SamplingSpec(s, n) for n in (20, 300) for s in STRATEGIES)


@dataclass(frozen=True)
class ExperimentConfig:
    patch: PatchPair = field(default_factory=PatchPair.paper)
    medium: CoefficientField = field(default_factory=CoefficientField.paper)
    strategies: tuple = field(default_factory=_default_strategies)
    distance_target_n: int = 5
    distance_m_range: tuple = tuple(range(5, 21))
    seeds: tuple = (0, 1, 2, 3, 4)
    tol: float = REFERENCE_TOL
    output_dir: Path = Path("results")

    def __post_init__(self):
        if not self.seeds:
            raise ConfigurationError("at least one seed is required")
        if not self.distance_m_range:
            raise ConfigurationError("distance_m_range must not be empty")
        if self.distance_target_n < 1:
            raise ConfigurationError("distance_target_n must be at least 1")
        if self.distance_target_n > min(self.distance_m_range):
            raise ConfigurationError(
                f"distance_target_n={self.distance_target_n} exceeds the smallest m in distance_m_range"
            )
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        unknown = set(raw) - CONFIG_KEYS
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        if "patch" in raw:
            p = raw["patch"]
            bad = set(p) - _PATCH_KEYS
            if bad:
                raise ConfigurationError(f"unknown patch keys: {sorted(bad)}")
            kw["patch"] = PatchPair(**p)
        half = kw.get("patch", PatchPair.paper()).omega_star_half_width
        kw["medium"] = _parse_medium(raw.get("medium", "paper"), half, base_dir)
        if "strategies" in raw:
            kw["strategies"] = tuple(_parse_spec(s) for s in raw["strategies"])
            if not kw["strategies"]:
                raise ConfigurationError("strategies must not be empty")
        if "distance_target_n" in raw:
            kw["distance_target_n"] = int(raw["distance_target_n"])
        if "distance_m_range" in raw:
            kw["distance_m_range"] = tuple(int(m) for m in raw["distance_m_range"])
        if "seeds" in raw:
            kw["seeds"] = tuple(int(s) for s in raw["seeds"])
        if "tol" in raw:
            kw["tol"] = float(raw["tol"])
        if "output_dir" in raw:
            out = Path(raw["output_dir"])
            kw["output_dir"] = out if out.is_absolute() or base_dir is None else base_dir / out
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(raw, dict):
            raise ConfigurationError(f"{path}: top level must be an object")
        return cls.from_dict(raw, base_dir=path.parent)

    def override(self, out_dir=None, seed=None, tol=None) -> "ExperimentConfig":
        kw = {}
        if out_dir is not None:
            kw["output_dir"] = Path(out_dir)
        if seed is not None:
            kw["seeds"] = (int(seed),)
        if tol is not None:
            kw["tol"] = float(tol)
        return replace(self, **kw)


def _parse_medium(raw, half_width, base_dir):
    if raw == "paper":
        return CoefficientField.paper(half_width)
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigurationError(f"medium must be 'paper' or an object with a 'kind', got {raw!r}")
    kind = raw["kind"]
    if kind == "paper" and set(raw) == {"kind"}:
        return CoefficientField.paper(half_width)
    if kind == "constant" and set(raw) == {"kind", "value"}:
        return CoefficientField.constant(float(raw["value"]), half_width)
    if kind == "tabulated" and set(raw) == {"kind", "path"}:
        path = Path(raw["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return read_tabulated(path, half_width)
    raise ConfigurationError(f"unsupported medium specification {raw!r}")


def _parse_spec(raw) -> SamplingSpec:
    if not isinstance(raw, dict):
        raise ConfigurationError(f"strategy entries must be objects, got {raw!r}")
    bad = set(raw) - _SPEC_KEYS
    if bad:
        # base_seed is deliberately absent: seeds come from the top-level list
        raise ConfigurationError(f"unknown strategy keys: {sorted(bad)}")
    if "strategy" not in raw or "n_samples" not in raw:
        raise ConfigurationError("strategy entries need 'strategy' and 'n_samples'")
    return SamplingSpec(**raw)


# -- execution -------------------------------------------------------------

@dataclass(eq=False)
class Study:
    """Everything shared by the stages of one run."""

    config: ExperimentConfig
    include_corners: bool
    mesh: object
    system: object
    reference: object

    @classmethod
    def prepare(cls, config: ExperimentConfig, include_corners: bool = False) -> "Study":
        mesh = build_mesh(config.patch)
        system = assemble(mesh, config.medium)
        ref = reference_basis(system, mesh, tol=config.tol, include_corners=include_corners)
        log.info("reference basis: %d eigenpairs, %d above tol", len(ref), ref.n_selected)
        return cls(config, include_corners, mesh, system, ref)


@dataclass
class StrategyOutcome:
    eigenvalues: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    distances: list = field(default_factory=list)
    failures: list = field(default_factory=list)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def reference_rows(study: Study):
    return [("reference", "", i + 1, lam) for i, lam in enumerate(study.reference.lambdas)]


def mode_rows(study: Study, n_modes: int = N_MODES_DUMPED):
    mesh = study.mesh
    pts = mesh.nodes[mesh.in_omega]
    modes = study.reference.restricted(mesh, n_modes)
    return [(k + 1, x, y, v) for k in range(modes.shape[1]) for (x, y), v in zip(pts, modes[:, k])]


def run_reference(config: ExperimentConfig, include_corners: bool = False, study: Study | None = None) -> Study:
    study = Study.prepare(config, include_corners) if study is None else study
    out = config.output_dir
    write_csv(out / "eigenvalues.csv", EIGENVALUES_HEADER, reference_rows(study))
    write_csv(out / "modes.csv", MODES_HEADER, mode_rows(study))
    return study


def evaluate_strategy(study: Study, spec: SamplingSpec) -> StrategyOutcome:
    """All table rows for one (strategy, N_r, seed) run."""
    cfg = study.config
    out = StrategyOutcome()
    label, seed = spec.label, spec.base_seed
    try:
        samples = generate_samples(spec, study.system, study.mesh, study.include_corners)
        basis = randomized_basis(study.system, samples, tol=cfg.tol, provenance=label)
        target = frame_from_basis(study.reference, cfg.distance_target_n)
        # nearly dependent samples can leave fewer modes than m after deflation;
        # the m-space is then the whole sample span
        distances = [
            (label, seed, m, kolmogorov_distance(study.system, frame_from_basis(basis, min(m, len(basis))), target))
            for m in cfg.distance_m_range
        ]
    except (DegenerateSampleError, RankDeficiencyError, DistanceError) as exc:
        log.warning("%s seed %d skipped: %s", label, seed, exc)
        out.failures.append((label, seed, f"{type(exc).__name__}: {exc}"))
        return out
    out.eigenvalues = [(label, seed, i + 1, lam) for i, lam in enumerate(basis.lambdas)]
    # modes are E(omega*)-orthonormal and E(omega)-orthogonal, so the energy of the
    # leading n-space is the running mean of their eigenvalues
    means = np.cumsum(basis.lambdas) / np.arange(1, len(basis) + 1)
    out.energies = [(label, seed, n + 1, e) for n, e in enumerate(means)]
    out.distances = distances
    return out


def run_strategies(config: ExperimentConfig, include_corners: bool = False, study: Study | None = None) -> StrategyOutcome:
    study = Study.prepare(config, include_corners) if study is None else study
    total = StrategyOutcome()
    for spec in config.strategies:
        for seed in config.seeds:
            res = evaluate_strategy(study, spec.with_seed(seed))
            total.eigenvalues += res.eigenvalues
            total.energies += res.energies
            total.distances += res.distances
            total.failures += res.failures
            log.info("%s seed %d done", spec.label, seed)
    out = config.output_dir
    write_csv(out / "eigenvalues.csv", EIGENVALUES_HEADER, reference_rows(study) + total.eigenvalues)
    write_csv(out / "energies.csv", ENERGIES_HEADER, total.energies)
    write_csv(out / "distances.csv", DISTANCES_HEADER, total.distances)
    write_csv(out / "failures.csv", FAILURES_HEADER, total.failures)
    return total


def bound_rows(trials: int = BOUND_TRIALS, seed: int = 0):
    rows = []
    for r in run_bound_suite(trials, seed):
        holds = "n/a" if r.holds is None else str(bool(r.holds)).lower()
        rows.append((r.checker, r.instance_seed, float(r.lhs), float(r.rhs), holds))
    return rows


def run_bounds(config: ExperimentConfig, trials: int = BOUND_TRIALS) -> Path:
    return write_csv(config.output_dir / "bounds.csv", BOUNDS_HEADER, bound_rows(trials, config.seeds[0]))
