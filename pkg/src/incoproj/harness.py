"""Benchmark harness: synthesize sparse signals, run projection arms
through the pursuit solvers, aggregate success/error statistics.

The protocol per arm: obtain P (random Gaussian, or one of the three
optimizers run on D), form the effective dictionary P @ D, re-normalize
its columns, then for every sparsity level S and trial recover the
planted coefficients from y = P x.  Signals are generated once per S from
a seed derived off the master seed, so every arm sees the same planted
(theta, x) pairs — a paired comparison.
"""

from __future__ import annotations

import hashlib
import io
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .altproj import AltProjConfig, altproj_optimize
from .coherence import offdiag_histogram
from .elad import EladConfig, FixedThreshold, RelativeThreshold, elad_optimize
from .errors import ConfigError, IncoprojError
from .linalg import Dictionary, as_matrix, column_norms, gram
from .matrixio import read_csv, read_matrix, write_csv, write_histogram
from .pursuit import basis_pursuit, omp
from .sapiro import sapiro_optimize

TRIALS_HEADER = [
    "S",
    "trial_index",
    "optimizer_name",
    "solver_name",
    "relative_error",
    "success",
    "seed_used",
    "status",
]
SUMMARY_HEADER = [
    "optimizer_name",
    "solver_name",
    "S",
    "mean_relative_error",
    "failure_rate",
    "trial_count",
]


def derive_seed(master_seed: int, *tags) -> int:
    """Stable 64-bit seed from the master seed and a tag tuple (not hash())."""
    payload = repr((int(master_seed),) + tuple(tags)).encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


@dataclass(frozen=True)
class GaussianSource:
    seed: int | None = None


@dataclass(frozen=True)
class FileSource:
    path: str


@dataclass(frozen=True)
class RandomArm:
    """Baseline: i.i.d. Gaussian projection, no optimization."""

    seed: int | None = None
    name: str = "none"


@dataclass(frozen=True)
class EladArm:
    cfg: EladConfig
    name: str = "elad"


@dataclass(frozen=True)
class SapiroArm:
    seed: int | None = None
    name: str = "sapiro"


@dataclass(frozen=True)
class AltProjArm:
    cfg: AltProjConfig
    name: str = "altproj"


Arm = RandomArm | EladArm | SapiroArm | AltProjArm


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    k: int
    m: int
    S_range: tuple[int, ...]
    N: int
    dictionary_source: GaussianSource | FileSource
    optimizers: tuple[Arm, ...]
    solver: str = "both"  # "omp" | "bp" | "both"
    failure_threshold: float = 1e-4
    master_seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.k < 2 or self.m < 1:
            raise ConfigError("need n >= 1, k >= 2, m >= 1")
        if not self.S_range:
            raise ConfigError("S_range must be nonempty")
        if any(S < 0 for S in self.S_range):
            raise ConfigError("sparsity levels must be >= 0")
        if any(S >= self.m for S in self.S_range):
            raise ConfigError("every S must be < m")
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if self.solver not in ("omp", "bp", "both"):
            raise ConfigError(f"unknown solver {self.solver!r}")
        names = [arm.name for arm in self.optimizers]
        if not names:
            raise ConfigError("at least one optimizer arm required")
        if len(set(names)) != len(names):
            raise ConfigError("optimizer arm names must be unique")

    @property
    def solvers(self) -> tuple[str, ...]:
        return ("omp", "bp") if self.solver == "both" else (self.solver,)


@dataclass(frozen=True)
class TrialRecord:
    S: int
    trial_index: int
    optimizer_name: str
    solver_name: str
    relative_error: float
    success: bool
    seed_used: int
    status: str

    def row(self) -> tuple:
        return (
            self.S,
            self.trial_index,
            self.optimizer_name,
            self.solver_name,
            self.relative_error,
            self.success,
            self.seed_used,
            self.status,
        )


@dataclass(frozen=True)
class SummaryCell:
    optimizer_name: str
    solver_name: str
    S: int
    mean_relative_error: float
    failure_rate: float
    trial_count: int

    def row(self) -> tuple:
        return (
            self.optimizer_name,
            self.solver_name,
            self.S,
            self.mean_relative_error,
            self.failure_rate,
            self.trial_count,
        )


@dataclass
class SweepSummary:
    """Per-(arm, solver, S) aggregates plus per-arm effective-Gram histograms."""

    cells: list[SummaryCell] = field(default_factory=list)
    arm_histograms: dict[str, list[tuple[float, int]]] = field(default_factory=dict)
    config_echo: str = ""

    def cell(self, optimizer_name: str, solver_name: str, S: int) -> SummaryCell:
        for c in self.cells:
            if (c.optimizer_name, c.solver_name, c.S) == (optimizer_name, solver_name, S):
                return c
        raise KeyError((optimizer_name, solver_name, S))

    def failure_curve(self, optimizer_name: str, solver_name: str) -> dict[int, float]:
        return {
            c.S: c.failure_rate
            for c in self.cells
            if c.optimizer_name == optimizer_name and c.solver_name == solver_name
        }


def resolve_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill in every unset seed deterministically from the master seed."""
    src = cfg.dictionary_source
    if isinstance(src, GaussianSource) and src.seed is None:
        src = GaussianSource(seed=derive_seed(cfg.master_seed, "dictionary"))
    arms = []
    for arm in cfg.optimizers:
        if isinstance(arm, (RandomArm, SapiroArm)) and arm.seed is None:
            arm = replace(arm, seed=derive_seed(cfg.master_seed, "arm", arm.name))
        arms.append(arm)
    return replace(cfg, dictionary_source=src, optimizers=tuple(arms))


def load_dictionary(cfg: ExperimentConfig) -> Dictionary:
    src = cfg.dictionary_source
    if isinstance(src, FileSource):
        data = read_matrix(src.path)
        if data.shape != (cfg.n, cfg.k):
            raise ConfigError(
                f"dictionary file {src.path} has shape {data.shape}, expected ({cfg.n}, {cfg.k})"
            )
        return Dictionary(data)
    rng = np.random.default_rng(src.seed)
    return Dictionary(rng.standard_normal((cfg.n, cfg.k)))


def arm_projection(arm: Arm, D, m: int) -> np.ndarray:
    """Materialize the projection matrix for one benchmark arm."""
    Dd = as_matrix(D, "dictionary")
    if isinstance(arm, RandomArm):
        if arm.seed is None:
            raise ConfigError("random arm seed unresolved; call resolve_config first")
        return np.random.default_rng(arm.seed).standard_normal((m, Dd.shape[0]))
    if isinstance(arm, SapiroArm):
        if arm.seed is None:
            raise ConfigError("sapiro arm seed unresolved; call resolve_config first")
        return sapiro_optimize(Dd, m, arm.seed)[0]
    if isinstance(arm, EladArm):
        if arm.cfg.m != m:
            raise ConfigError(f"elad arm m={arm.cfg.m} != experiment m={m}")
        return elad_optimize(Dd, arm.cfg)[0]
    if isinstance(arm, AltProjArm):
        if arm.cfg.m != m:
            raise ConfigError(f"altproj arm m={arm.cfg.m} != experiment m={m}")
        return altproj_optimize(Dd, arm.cfg)[0]
    raise ConfigError(f"unknown arm type {type(arm).__name__}")


def synthesize_signals(D, S: int, N: int, rng: np.random.Generator) -> list[tuple[np.ndarray, np.ndarray]]:
    """N planted pairs (theta, x = D @ theta) with exactly S Gaussian nonzeros each."""
    Dd = as_matrix(D, "dictionary")
    k = Dd.shape[1]
    if S > k:
        raise ValueError(f"S={S} exceeds atom count k={k}")
    out = []
    for _ in range(N):
        theta = np.zeros(k)
        if S > 0:
            support = rng.choice(k, size=S, replace=False)
            theta[support] = rng.standard_normal(S)
        out.append((theta, Dd @ theta))
    return out


def _solve_trial(solver_name: str, Dn: np.ndarray, y: np.ndarray, S: int):
    if solver_name == "omp":
        return omp(Dn, y, S)
    if solver_name == "bp":
        return basis_pursuit(Dn, y)
    raise ConfigError(f"unknown solver {solver_name!r}")


def run_sweep(cfg: ExperimentConfig) -> tuple[list[TrialRecord], SweepSummary]:
    """Run every (arm, S, trial, solver) combination; returns records and summary.

    Identical master seeds give identical planted signals in every arm, and
    the whole sweep is deterministic.  A trial whose solve raises a
    package error is recorded (status ``error:<Name>``, infinite relative
    error) instead of aborting the sweep.
    """
    cfg = resolve_config(cfg)
    D = load_dictionary(cfg)

    signal_seeds = {S: derive_seed(cfg.master_seed, "signals", S) for S in cfg.S_range}
    signals = {
        S: synthesize_signals(D, S, cfg.N, np.random.default_rng(signal_seeds[S]))
        for S in cfg.S_range
    }

    records: list[TrialRecord] = []
    histograms: dict[str, list[tuple[float, int]]] = {}
    for arm in cfg.optimizers:
        P = arm_projection(arm, D, cfg.m)
        Dhat = P @ D.data
        norms = column_norms(Dhat)
        degenerate = bool(np.any(norms <= 1e-12))
        if not degenerate:
            Dn = Dhat / norms
            histograms[arm.name] = offdiag_histogram(gram(Dhat), 50)
        else:
            histograms[arm.name] = []
        for S in cfg.S_range:
            for i, (theta, x) in enumerate(signals[S]):
                y = P @ x
                for solver_name in cfg.solvers:
                    if degenerate:
                        rel_err, status = float("inf"), "error:ZeroColumn"
                    else:
                        try:
                            res = _solve_trial(solver_name, Dn, y, S)
                            theta_hat = res.theta_hat.values / norms
                            denom = float(np.linalg.norm(theta))
                            if denom > 0.0:
                                rel_err = float(np.linalg.norm(theta_hat - theta)) / denom
                            else:
                                rel_err = 0.0 if not np.any(theta_hat) else float("inf")
                            status = res.status.value
                        except IncoprojError as exc:
                            rel_err, status = float("inf"), f"error:{type(exc).__name__}"
                    records.append(
                        TrialRecord(
                            S=S,
                            trial_index=i,
                            optimizer_name=arm.name,
                            solver_name=solver_name,
                            relative_error=rel_err,
                            success=bool(rel_err <= cfg.failure_threshold),
                            seed_used=signal_seeds[S],
                            status=status,
                        )
                    )

    summary = summarize(records)
    summary.arm_histograms = histograms
    summary.config_echo = config_echo(cfg)
    return records, summary


def summarize(records: list[TrialRecord]) -> SweepSummary:
    """Aggregate mean relative error / failure rate per (arm, solver, S) cell."""
    order: list[tuple[str, str, int]] = []
    groups: dict[tuple[str, str, int], list[TrialRecord]] = {}
    for rec in records:
        key = (rec.optimizer_name, rec.solver_name, rec.S)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec)
    cells = []
    for key in order:
        grp = groups[key]
        errors = np.asarray([r.relative_error for r in grp])
        cells.append(
            SummaryCell(
                optimizer_name=key[0],
                solver_name=key[1],
                S=key[2],
                mean_relative_error=float(np.mean(errors)),
                failure_rate=float(np.mean([not r.success for r in grp])),
                trial_count=len(grp),
            )
        )
    return SweepSummary(cells=cells)


def config_echo(cfg: ExperimentConfig) -> str:
    """Render the fully resolved configuration as flat key = value text."""
    cfg = resolve_config(cfg)
    buf = io.StringIO()

    def put(key, value):
        buf.write(f"{key} = {value}\n")

    put("n", cfg.n)
    put("k", cfg.k)
    put("m", cfg.m)
    put("S_range", ",".join(str(s) for s in cfg.S_range))
    put("N", cfg.N)
    src = cfg.dictionary_source
    if isinstance(src, FileSource):
        put("dictionary_source", f"file:{src.path}")
    else:
        put("dictionary_source", f"gaussian:{src.seed}")
    put("optimizers", ",".join(arm.name for arm in cfg.optimizers))
    put("solver", cfg.solver)
    put("failure_threshold", repr(cfg.failure_threshold))
    put("master_seed", cfg.master_seed)
    for arm in cfg.optimizers:
        if isinstance(arm, RandomArm):
            put("none.seed", arm.seed)
        elif isinstance(arm, SapiroArm):
            put("sapiro.seed", arm.seed)
        elif isinstance(arm, EladArm):
            mode = arm.cfg.threshold_mode
            if isinstance(mode, FixedThreshold):
                put("elad.mode", "fixed")
                put("elad.t", repr(mode.t))
            else:
                put("elad.mode", "relative")
                put("elad.percent", repr(mode.percent))
            put("elad.gamma", repr(arm.cfg.gamma))
            put("elad.iterations", arm.cfg.iterations)
            put("elad.seed", arm.cfg.seed)
        elif isinstance(arm, AltProjArm):
            put("altproj.t", repr(arm.cfg.t))
            put("altproj.iterations", arm.cfg.iterations)
            put("altproj.seed", arm.cfg.seed)
    return buf.getvalue()


def emit_reports(records: list[TrialRecord], summary: SweepSummary, out_dir) -> list[str]:
    """Write trials.csv, summary.csv, per-arm Gram histograms, and config.echo."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, "trials.csv")
    write_csv(path, TRIALS_HEADER, (r.row() for r in records))
    written.append(path)

    path = os.path.join(out_dir, "summary.csv")
    write_csv(path, SUMMARY_HEADER, (c.row() for c in summary.cells))
    written.append(path)

    for arm_name, hist in summary.arm_histograms.items():
        path = os.path.join(out_dir, f"gram_hist_{arm_name}.csv")
        write_histogram(path, hist)
        written.append(path)

    path = os.path.join(out_dir, "config.echo")
    with open(path, "w", newline="\n") as fh:
        fh.write(summary.config_echo)
    written.append(path)
    return written


def read_trials(path) -> list[TrialRecord]:
    """Parse trials.csv back into records (the emit round trip)."""
    header, rows = read_csv(path)
    if header != TRIALS_HEADER:
        raise ValueError(f"{path}: unexpected trials header {header}")
    out = []
    for row in rows:
        out.append(
            TrialRecord(
                S=int(row[0]),
                trial_index=int(row[1]),
                optimizer_name=row[2],
                solver_name=row[3],
                relative_error=float(row[4]),
                success=row[5] == "true",
                seed_used=int(row[6]),
                status=row[7],
            )
        )
    return out


# ---------------------------------------------------------------------------
# Flat key = value configuration files
# ---------------------------------------------------------------------------

_BASE_KEYS = {
    "n",
    "k",
    "m",
    "N",
    "S_range",
    "dictionary_source",
    "optimizers",
    "solver",
    "failure_threshold",
    "master_seed",
}
_ARM_KEYS = {
    "none.seed",
    "elad.mode",
    "elad.t",
    "elad.percent",
    "elad.gamma",
    "elad.iterations",
    "elad.seed",
    "sapiro.seed",
    "altproj.t",
    "altproj.iterations",
    "altproj.seed",
}


def _parse_int(kv: dict, key: str, default=None) -> int:
    if key not in kv:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return int(kv[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: expected integer, got {kv[key]!r}") from None


def _parse_float(kv: dict, key: str, default=None) -> float:
    if key not in kv:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(kv[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: expected number, got {kv[key]!r}") from None


def _parse_s_range(text: str) -> tuple[int, ...]:
    text = text.strip()
    try:
        if "-" in text and "," not in text:
            lo, hi = text.split("-", 1)
            values = tuple(range(int(lo), int(hi) + 1))
        else:
            values = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"S_range {text!r} is not 'lo-hi' or a comma list") from None
    if not values:
        raise ConfigError("S_range is empty")
    return values


def _parse_source(text: str) -> GaussianSource | FileSource:
    text = text.strip()
    if text == "gaussian":
        return GaussianSource()
    if text.startswith("gaussian:"):
        try:
            return GaussianSource(seed=int(text.split(":", 1)[1]))
        except ValueError:
            raise ConfigError(f"bad gaussian seed in {text!r}") from None
    if text.startswith("file:"):
        return FileSource(path=text.split(":", 1)[1])
    raise ConfigError(f"dictionary_source {text!r} not 'gaussian[:seed]' or 'file:path'")


def _build_arm(name: str, kv: dict, m: int, master_seed: int) -> Arm:
    if name == "none":
        seed = _parse_int(kv, "none.seed", derive_seed(master_seed, "arm", "none"))
        return RandomArm(seed=seed)
    if name == "sapiro":
        seed = _parse_int(kv, "sapiro.seed", derive_seed(master_seed, "arm", "sapiro"))
        return SapiroArm(seed=seed)
    if name == "elad":
        mode = kv.get("elad.mode", "relative").strip()
        if mode == "fixed":
            threshold = FixedThreshold(_parse_float(kv, "elad.t", 0.26))
        elif mode == "relative":
            threshold = RelativeThreshold(_parse_float(kv, "elad.percent", 26.0))
        else:
            raise ConfigError(f"elad.mode {mode!r} not 'fixed' or 'relative'")
        return EladArm(
            cfg=EladConfig(
                threshold_mode=threshold,
                gamma=_parse_float(kv, "elad.gamma", 0.6),
                iterations=_parse_int(kv, "elad.iterations", 50),
                m=m,
                seed=_parse_int(kv, "elad.seed", derive_seed(master_seed, "arm", "elad")),
            )
        )
    if name == "altproj":
        return AltProjArm(
            cfg=AltProjConfig(
                t=_parse_float(kv, "altproj.t", 0.26),
                m=m,
                iterations=_parse_int(kv, "altproj.iterations", 300),
                seed=_parse_int(kv, "altproj.seed", derive_seed(master_seed, "arm", "altproj")),
            )
        )
    raise ConfigError(f"unknown optimizer {name!r} (choose none, elad, sapiro, altproj)")


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse flat ``key = value`` configuration text (# comments allowed)."""
    kv: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in kv:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        kv[key] = value

    unknown = set(kv) - _BASE_KEYS - _ARM_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    m = _parse_int(kv, "m")
    master_seed = _parse_int(kv, "master_seed", 0)
    if "optimizers" not in kv:
        raise ConfigError("missing required key 'optimizers'")
    arm_names = [tok.strip() for tok in kv["optimizers"].split(",") if tok.strip()]
    arms = tuple(_build_arm(name, kv, m, master_seed) for name in arm_names)

    cfg = ExperimentConfig(
        n=_parse_int(kv, "n"),
        k=_parse_int(kv, "k"),
        m=m,
        S_range=_parse_s_range(kv.get("S_range", "") or _missing("S_range")),
        N=_parse_int(kv, "N"),
        dictionary_source=_parse_source(kv.get("dictionary_source", "gaussian")),
        optimizers=arms,
        solver=kv.get("solver", "both").strip(),
        failure_threshold=_parse_float(kv, "failure_threshold", 1e-4),
        master_seed=master_seed,
    )
    return resolve_config(cfg)


def _missing(key: str):
    raise ConfigError(f"missing required key {key!r}")


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)
