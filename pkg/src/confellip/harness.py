"""Monte Carlo experiments: volume/coverage histograms, moment tables and
surplus-volume studies on Matérn-correlated data.

Each experiment draws ``(X, Y)`` from a zero-mean distribution whose
covariance (or dispersion) is the Matérn Toeplitz matrix of size
``k + l``. A ridge predictor is fit once on ``n_split`` points; every
replicate then draws ``n_test`` independent (calibration set, test point)
pairs and averages the resulting volumes and coverage indicators.

Random numbers come from streams keyed by ``(seed, replicate, phase)``, so
results do not depend on execution order or the number of workers.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from confellip import kernels
from confellip.asymptotics import LimitModel, gaussian_q_infinity, gaussian_volume_moment, residual_covariance
from confellip.conformal import (
    CalibrationSet,
    bounding_box,
    build_score_machinery,
    conformal_rank,
    exact_region_membership,
    fit_ccle,
    is_full_space,
    probe_grid,
    radius_budget,
)
from confellip.errors import ConfigError, NotPositiveDefinite, UnsupportedDistribution
from confellip.predictor import RidgePredictor, predict, ridge_fit
from confellip.randgen import EllipticalSpec, RngStream, matern_covariance, normalized_tail_rates, sample_gamma_tail
from confellip.specfun import MaternParams, unit_ball_volume

CONFIG_KEYS = (
    "distribution", "k", "l", "nu", "sigma2", "length_scale", "n_split", "n_calib",
    "n_test", "n_histo", "alpha", "lambda", "mu0", "v_min", "seed", "grid_resolution",
)
REPORT_COLUMNS = (
    "replicate", "ell_mean_vol", "ell_coverage", "ell_empty_frac",
    "ell_fullspace_frac", "ball_mean_vol", "ball_coverage",
)
HISTOGRAM_BINS = {"gaussian": 75, "cauchy": 50, "gamma_tail": 50}
TRACKED = ("ell_mean_vol", "ell_coverage", "ball_mean_vol", "ball_coverage")


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment. ``lam`` is stored under the JSON key ``lambda``."""

    distribution: str = "gaussian"
    k: int = 6
    l: int = 3  # noqa: E741
    nu: float = 1.5
    sigma2: float = 1.0
    length_scale: float = 5.0
    n_split: int = 5000
    n_calib: int = 200
    n_test: int = 200
    n_histo: int = 200
    alpha: float = 0.1
    lam: float = 0.0
    mu0: float = 1e-3
    v_min: float | None = None
    seed: int = 0
    grid_resolution: int = 25

    def __post_init__(self):
        if self.distribution not in HISTOGRAM_BINS:
            raise ConfigError(f"unknown distribution {self.distribution!r}")
        for name in ("k", "l", "n_split", "n_calib", "n_test", "n_histo", "seed", "grid_resolution"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if self.k < 0 or self.l < 1:
            raise ConfigError(f"need k >= 0 and l >= 1, got k={self.k}, l={self.l}")
        for name in ("n_split", "n_calib", "n_test", "n_histo", "grid_resolution"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.n_calib < 2:
            raise ConfigError("n_calib must be at least 2")
        if not 1.0 / (self.n_calib + 1) < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (1/(n_calib+1), 1), got {self.alpha}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.lam < 0 or self.mu0 < 0:
            raise ConfigError("lambda and mu0 must be nonnegative")
        if self.v_min is not None and not self.v_min > 0:
            raise ConfigError("v_min must be positive or null")
        try:
            MaternParams(self.nu, self.sigma2, self.length_scale)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def p(self) -> int:
        return self.k + self.l

    @property
    def matern(self) -> MaternParams:
        return MaternParams(self.nu, self.sigma2, self.length_scale)

    @property
    def sigma(self) -> NDArray[np.float64]:
        """Covariance (dispersion for Cauchy) of the joint vector ``(X, Y)``."""
        return matern_covariance(self.p, self.matern)

    @property
    def law(self) -> EllipticalSpec:
        return EllipticalSpec(self.distribution, np.zeros(self.p), self.sigma)

    def with_updates(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["lambda"] = out.pop("lam")
        return {key: out[key] for key in CONFIG_KEYS}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        missing = [key for key in CONFIG_KEYS if key not in data]
        unknown = [key for key in data if key not in CONFIG_KEYS]
        if missing or unknown:
            raise ConfigError(f"config keys mismatch: missing={missing}, unknown={unknown}")
        kwargs = dict(data)
        kwargs["lam"] = kwargs.pop("lambda")
        for name in ("nu", "sigma2", "length_scale", "alpha", "lam", "mu0"):
            if isinstance(kwargs[name], bool) or not isinstance(kwargs[name], (int, float)):
                raise ConfigError(f"{name} must be a number")
            kwargs[name] = float(kwargs[name])
        if kwargs["v_min"] is not None:
            kwargs["v_min"] = float(kwargs["v_min"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data)


# ---------------------------------------------------------------------------
# One replicate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DrawOutcomes:
    """Per-test-point results of one replicate (arrays of length ``n_test``)."""

    ell_volume: NDArray[np.float64]
    ell_covered: NDArray[np.bool_]
    empty: NDArray[np.bool_]
    full_space: NDArray[np.bool_]
    ball_volume: NDArray[np.float64]
    ball_covered: NDArray[np.bool_]


@dataclass(frozen=True)
class ReplicateResult:
    """Averages over the ``n_test`` draws of one replicate."""

    replicate: int
    ell_mean_vol: float
    ell_coverage: float
    ell_empty_frac: float
    ell_fullspace_frac: float
    ball_mean_vol: float
    ball_coverage: float

    def empty_count(self, n_test: int) -> int:
        return int(round(self.ell_empty_frac * n_test))

    def full_space_count(self, n_test: int) -> int:
        return int(round(self.ell_fullspace_frac * n_test))


def fit_experiment_predictor(config: ExperimentConfig) -> RidgePredictor:
    """Ridge predictor fit once per experiment on ``n_split`` fresh points."""
    stream = RngStream.for_phase(config.seed, -1, "split")
    U = config.law.sample(stream, config.n_split)
    return ridge_fit(U[:, : config.k], U[:, config.k :], config.mu0)


def evaluate_tests(V: NDArray[np.float64], k: int, alpha: float, lam: float,
                   v_min: float | None = None, backend: str | None = None) -> DrawOutcomes:
    """Ellipsoid and ball outcomes for a batch of (calibration set, test point) pairs.

    ``V`` has shape ``(m, n + 1, k + l)``: rows ``(x, r)`` of ``m``
    calibration sets of size ``n``, each followed by its test row. Empty
    regions have volume 0 and never cover unless ``v_min`` floors them.
    """
    V = np.ascontiguousarray(V, dtype=np.float64)
    m, n1, p = V.shape
    n, l = n1 - 1, p - k  # noqa: E741
    rank = conformal_rank(n, alpha)
    impl = kernels.get_backend(backend)
    q, mx, logdet, resid, status = impl.ccle_batch(V, k, rank, lam)
    bad = np.flatnonzero(status)
    if bad.size:
        raise NotPositiveDefinite(
            f"ridge covariance not positive definite for {bad.size} of {m} test draws "
            f"(first index {bad[0]}); increase lambda"
        )
    full = is_full_space(q, n)
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = np.where(full, np.inf, radius_budget(q, n) - mx)
    v_l = unit_ball_volume(l)
    if v_min is not None:
        eps2 = (v_min / (v_l * np.exp(0.5 * logdet))) ** (2.0 / l)
        rho_eff = np.maximum(rho, eps2)
    else:
        rho_eff = rho
    empty = rho_eff < 0
    vol = np.zeros(m)
    pos = (rho_eff > 0) & ~full
    vol[pos] = v_l * np.exp(0.5 * logdet[pos] + 0.5 * l * np.log(rho_eff[pos]))
    vol[full] = np.inf
    covered = full | (resid <= rho_eff)

    R = V[:, :, k:]
    sq = np.einsum("mni,mni->mn", R, R)
    q_ball = np.partition(sq[:, :n], rank - 1, axis=1)[:, rank - 1]
    ball_vol = v_l * q_ball ** (0.5 * l)
    ball_cov = sq[:, n] <= q_ball
    return DrawOutcomes(vol, covered, empty, full, ball_vol, ball_cov)


def sample_replicate(config: ExperimentConfig, replicate: int,
                     predictor: RidgePredictor) -> NDArray[np.float64]:
    """Draw the ``(n_test, n_calib + 1, p)`` array of ``(x, residual)`` rows."""
    law = config.law
    calib = law.sample(RngStream.for_phase(config.seed, replicate, "calib"),
                        (config.n_test, config.n_calib))
    test = law.sample(RngStream.for_phase(config.seed, replicate, "test"), config.n_test)
    U = np.concatenate([calib, test[:, None, :]], axis=1)
    k = config.k
    X = U[..., :k]
    U[..., k:] -= X @ predictor.beta
    return U


def replicate_outcomes(config: ExperimentConfig, replicate: int,
                       predictor: RidgePredictor | None = None,
                       backend: str | None = None) -> DrawOutcomes:
    predictor = fit_experiment_predictor(config) if predictor is None else predictor
    V = sample_replicate(config, replicate, predictor)
    try:
        return evaluate_tests(V, config.k, config.alpha, config.lam, config.v_min, backend)
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(f"replicate {replicate}: {exc}") from None


def summarize_outcomes(replicate: int, out: DrawOutcomes) -> ReplicateResult:
    return ReplicateResult(
        replicate=int(replicate),
        ell_mean_vol=_fmean(out.ell_volume),
        ell_coverage=float(np.mean(out.ell_covered)),
        ell_empty_frac=float(np.mean(out.empty)),
        ell_fullspace_frac=float(np.mean(out.full_space)),
        ball_mean_vol=_fmean(out.ball_volume),
        ball_coverage=float(np.mean(out.ball_covered)),
    )


def run_replicate(config: ExperimentConfig, replicate_index: int,
                  predictor: RidgePredictor | None = None,
                  backend: str | None = None) -> ReplicateResult:
    """Volumes and coverage averaged over ``n_test`` fresh draws."""
    out = replicate_outcomes(config, replicate_index, predictor, backend)
    return summarize_outcomes(replicate_index, out)


def _fmean(values: Iterable[float]) -> float:
    values = list(map(float, values))
    if not values:
        return math.nan
    if any(math.isinf(v) for v in values):
        return math.inf
    return math.fsum(values) / len(values)


def _map_replicates(fn, indices: Sequence[int], n_jobs: int) -> list:
    if n_jobs <= 1:
        return [fn(i) for i in indices]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, indices))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HistogramSummary:
    mean: float
    std: float
    counts: list[int]
    edges: list[float]


def histogram_summary(values: Sequence[float], bins: int) -> HistogramSummary:
    """Mean, standard deviation and bin counts; aggregation does not depend on order."""
    finite = sorted(float(v) for v in values if math.isfinite(v))
    mean = _fmean(values)
    if len(finite) > 1 and math.isfinite(mean):
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in finite) / (len(finite) - 1))
    else:
        std = math.nan if not finite else 0.0
    if not finite:
        return HistogramSummary(mean, std, [], [])
    counts, edges = np.histogram(finite, bins=bins)
    return HistogramSummary(mean, std, counts.tolist(), edges.tolist())


@dataclass
class Report:
    """Per-replicate rows and the histogram summaries of the tracked statistics."""

    rows: list[ReplicateResult]
    config: dict | None = None
    bins: int = 75
    summaries: dict[str, HistogramSummary] = field(init=False)

    def __post_init__(self):
        self.summaries = {
            name: histogram_summary([getattr(r, name) for r in self.rows], self.bins)
            for name in TRACKED
        }

    def column(self, name: str) -> NDArray[np.float64]:
        return np.array([getattr(r, name) for r in self.rows], dtype=np.float64)

    def grand_mean(self, name: str) -> float:
        return _fmean(getattr(r, name) for r in self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Report):
            return NotImplemented
        return self.rows == other.rows


def run_histogram(config: ExperimentConfig, n_jobs: int = 1, backend: str | None = None,
                  replicates: Sequence[int] | None = None) -> Report:
    """``n_histo`` independent replicates sharing one fitted predictor."""
    predictor = fit_experiment_predictor(config)
    indices = list(range(config.n_histo)) if replicates is None else list(replicates)
    rows = _map_replicates(lambda r: run_replicate(config, r, predictor, backend), indices, n_jobs)
    rows.sort(key=lambda row: row.replicate)
    return Report(rows, config.to_dict(), HISTOGRAM_BINS[config.distribution])


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_rows(rows: Sequence[dict], columns: Sequence[str], path: str | Path) -> None:
    """CSV with a header row; floats at 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) if isinstance(row[c], float) else row[c] for c in columns])


def write_report(report: Report, path: str | Path, format: str = "csv") -> None:
    if format == "csv":
        write_rows([asdict(r) for r in report.rows], REPORT_COLUMNS, path)
    elif format == "json":
        payload = {
            "config": report.config,
            "bins": report.bins,
            "rows": [asdict(r) for r in report.rows],
            "summaries": {k: asdict(v) for k, v in report.summaries.items()},
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown report format {format!r}")


def read_report(path: str | Path, format: str = "csv") -> Report:
    if format == "json":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        rows = [ReplicateResult(**row) for row in payload["rows"]]
        return Report(rows, payload.get("config"), payload.get("bins", 75))
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = [
            ReplicateResult(int(rec["replicate"]), *(float(rec[c]) for c in REPORT_COLUMNS[1:]))
            for rec in reader
        ]
    return Report(rows)


# ---------------------------------------------------------------------------
# Moment table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentRow:
    q: float
    closed_form: float
    monte_carlo: float
    rel_error: float
    std_error: float


@dataclass(frozen=True)
class MomentTable:
    rows: list[MomentRow]
    empty_fraction: float
    coverage: float
    n_draws: int


def table1_experiment(config: ExperimentConfig, q_list: Sequence[float] = (1, 2, 3),
                      n_jobs: int = 1, backend: str | None = None) -> MomentTable:
    """Closed-form Gaussian volume moments against nested Monte Carlo means of ``Vol^q``.

    The Monte Carlo estimate averages ``Vol^q`` over ``n_test`` draws per
    replicate and then over ``n_histo`` replicates. The pooled empty-region
    frequency and coverage are returned as well.
    """
    if config.distribution != "gaussian":
        raise UnsupportedDistribution("the closed-form moments assume Gaussian data")
    predictor = fit_experiment_predictor(config)
    outs = _map_replicates(lambda r: replicate_outcomes(config, r, predictor, backend),
                           range(config.n_histo), n_jobs)
    rows = []
    for q in q_list:
        cf = gaussian_volume_moment(config.sigma, config.k, config.l, config.alpha, q)
        per_rep = [_fmean(o.ell_volume ** q) for o in outs]
        mc = _fmean(per_rep)
        se = float(np.std(per_rep, ddof=1) / math.sqrt(len(per_rep))) if len(per_rep) > 1 else math.nan
        rows.append(MomentRow(float(q), cf, mc, abs(mc - cf) / cf, se))
    n_draws = sum(o.empty.size for o in outs)
    empty = sum(int(o.empty.sum()) for o in outs) / n_draws
    coverage = sum(int(o.ell_covered.sum()) for o in outs) / n_draws
    return MomentTable(rows, empty, coverage, n_draws)


# ---------------------------------------------------------------------------
# Volume against the number of inputs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VolumeGrid:
    nu: list[float]
    k: list[int]
    volumes: NDArray[np.float64]

    @property
    def argmin_k(self) -> list[int]:
        return [self.k[int(np.argmin(row))] for row in self.volumes]

    def to_rows(self) -> list[dict]:
        best = self.argmin_k
        return [
            {"nu": nu, "k": k, "mean_volume": float(self.volumes[i, j]), "is_argmin": int(k == best[i])}
            for i, nu in enumerate(self.nu) for j, k in enumerate(self.k)
        ]


def table2_experiment(base_config: ExperimentConfig,
                      nu_list: Sequence[float] = (0.5, 1.5, 2.5, 3.5),
                      k_range: Sequence[int] = tuple(range(7)),
                      n_jobs: int = 1, backend: str | None = None) -> VolumeGrid:
    """Grand-mean ellipsoid volume for each smoothness and number of inputs.

    With ``k = 0`` nothing is conditioned on: the shape is the full ridge
    covariance of the outputs and the radius carries no input term.
    """
    volumes = np.empty((len(nu_list), len(k_range)))
    for i, nu in enumerate(nu_list):
        for j, k in enumerate(k_range):
            cfg = base_config.with_updates(nu=float(nu), k=int(k))
            volumes[i, j] = run_histogram(cfg, n_jobs, backend).grand_mean("ell_mean_vol")
    return VolumeGrid([float(v) for v in nu_list], [int(k) for k in k_range], volumes)


# ---------------------------------------------------------------------------
# Surplus volume of the ellipsoid over the exact region
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurplusRow:
    n: int
    est_surplus: float
    std_error: float
    violations: int
    n_instances: int


def default_probe_box(config: ExperimentConfig, predictor: RidgePredictor | None = None,
                      scale: float = 1.5):
    """Bounding box of the limit ellipsoid at ``x = 0``, widened by ``scale``.

    Uses the Gaussian limit quantile; for other families it is only a
    convenient fixed box.
    """
    predictor = fit_experiment_predictor(config) if predictor is None else predictor
    sigma_v = residual_covariance(config.sigma, predictor.beta)
    q_inf = gaussian_q_infinity(config.k, config.l, config.alpha)
    model = LimitModel(sigma_v, config.k, q_inf, config.lam)
    return bounding_box(model.center(np.zeros(config.k)), model.shape, q_inf, scale)


def surplus_volume_experiment(config: ExperimentConfig, n_list: Sequence[int] = (50, 200, 1000),
                              box=None, n_jobs: int = 1) -> list[SurplusRow]:
    """Grid estimate of ``Vol((E \\ C) cap K)`` for each calibration size.

    For every replicate a calibration set and test input are drawn; the
    fraction of grid points of ``K`` inside the ellipsoid ``E`` but outside
    the exact conformal region ``C``, times ``Vol(K)``, estimates the surplus.
    ``violations`` counts grid points in ``C`` but not in ``E``.
    """
    predictor = fit_experiment_predictor(config)
    if box is None:
        box = default_probe_box(config, predictor)
    lower, upper = (np.asarray(b, dtype=np.float64) for b in box)
    box_volume = float(np.prod(upper - lower))
    grid = probe_grid(lower, upper, config.grid_resolution)
    law = config.law
    k = config.k
    rows = []
    for n in n_list:
        def one(r: int, n: int = n):
            U = law.sample(RngStream.for_phase(config.seed, r, "calib").child("surplus", n), n)
            x_new = law.sample(RngStream.for_phase(config.seed, r, "test").child("surplus", n), 1)[0, :k]
            X = U[:, :k]
            calib = CalibrationSet(X, U[:, k:] - predict(predictor, X))
            region = fit_ccle(calib, config.alpha, config.lam).region(x_new)
            if box_volume == 0.0:
                return 0.0, 0
            in_ell = np.asarray(region.contains(grid), dtype=bool)
            machinery = build_score_machinery(calib, x_new, config.lam)
            in_exact = exact_region_membership(machinery, grid, config.alpha)
            surplus = np.count_nonzero(in_ell & ~in_exact) / grid.shape[0] * box_volume
            return surplus, int(np.count_nonzero(in_exact & ~in_ell))

        results = _map_replicates(one, range(config.n_histo), n_jobs)
        est = np.array([s for s, _ in results])
        se = float(est.std(ddof=1) / math.sqrt(est.size)) if est.size > 1 else math.nan
        rows.append(SurplusRow(int(n), _fmean(est), se, sum(v for _, v in results), est.size))
    return rows


# ---------------------------------------------------------------------------
# Tail-reversal counterexample
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailRow:
    alpha: float
    quantile_plain: float
    quantile_weighted: float
    reversed: bool


def counterexample_experiment(config: ExperimentConfig, n_samples: int = 10**6,
                              alphas: Sequence[float] = (0.1, 0.01, 0.002, 0.001)) -> list[TailRow]:
    """Empirical upper quantiles of ``sum T_i^2`` and ``sum delta_i T_i^2``.

    ``T`` has gamma-distributed squared coordinates with rates ``delta``
    taken from the normalized eigenvalues of the Matérn matrix of size
    ``l``, so the two sums have equal means; ``reversed`` flags levels where
    the unweighted sum has the larger quantile.
    """
    sigma = matern_covariance(config.l, config.matern)
    delta = normalized_tail_rates(np.linalg.eigvalsh(sigma))
    T = sample_gamma_tail(RngStream.for_phase(config.seed, 0, "aux"), delta, n_samples)
    sq = T * T
    plain = sq.sum(axis=1)
    weighted = sq @ delta
    rows = []
    for a in alphas:
        qp = float(np.quantile(plain, 1.0 - a))
        qw = float(np.quantile(weighted, 1.0 - a))
        rows.append(TailRow(float(a), qp, qw, qp > qw))
    return rows


# ---------------------------------------------------------------------------
# Calibration files
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationFile:
    X: NDArray[np.float64]
    Y: NDArray[np.float64]
    Yhat: NDArray[np.float64] | None

    @property
    def calibration_set(self) -> CalibrationSet:
        if self.Yhat is None:
            return CalibrationSet(self.X, self.Y)
        return CalibrationSet.from_outputs(self.X, self.Y, self.Yhat)


def _column_block(header: list[str], prefix: str) -> list[int]:
    idx, j = [], 1
    while f"{prefix}{j}" in header:
        idx.append(header.index(f"{prefix}{j}"))
        j += 1
    return idx


def read_calibration_csv(path: str | Path) -> CalibrationFile:
    """Read columns ``x1..xk, y1..yl`` and optional ``yhat1..yhatl``.

    Without ``yhat`` columns the ``y`` columns are taken to be residuals.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ConfigError(f"{path}: empty calibration file") from None
        data = [row for row in reader if row]
    xi, yi, hi = (_column_block(header, p) for p in ("x", "y", "yhat"))
    if not xi or not yi:
        raise ConfigError(f"{path}: header must contain x1.. and y1.. columns")
    if hi and len(hi) != len(yi):
        raise ConfigError(f"{path}: yhat columns must match y columns")
    if len(xi) + len(yi) + len(hi) != len(header):
        raise ConfigError(f"{path}: unexpected columns in header {header}")
    try:
        arr = np.array([[float(v) for v in row] for row in data], dtype=np.float64)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if arr.ndim != 2 or arr.shape[1] != len(header):
        raise ConfigError(f"{path}: ragged rows")
    return CalibrationFile(arr[:, xi], arr[:, yi], arr[:, hi] if hi else None)
