"""Command-line experiment harness.

Each run writes ``<out>/<command>/<UTC stamp>-<config hash>/`` holding
``config.json``, ``results.csv``, ``plot.svg`` and ``record.json``. CSV bytes
depend only on the config, never on the worker count or the clock.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import pr_error_amplitude, semicircle_density
from .combinatorics import clean_collapse_count_formula, enumerate_collapses
from .ensembles import ClosePairCount, RawValues, run_trials, tail_experiment
from .fredholm import dyson_tail_log_unit, gap_probability, p2_density
from .kernels import Ensemble, KernelSpec, gue_kernel
from .moments import (
    first_moment_local_expansion,
    gamma_for_mu,
    gamma_n_sq,
    gaudin_first_moment,
    heuristic_mu,
    jackknife_se,
    moment_report,
)
from .rng import check_seed
from .windows import Interval, IntervalKind

COMMANDS = ("verify-main-theorem", "moments", "first-moment", "collapses", "fredholm", "asymptotics", "sample")
# Fields that change how a run executes but not what it computes.
EXECUTION_ONLY = ("workers", "out")


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass
class RunConfig:
    command: str
    seed: int | None = None
    ensemble: str = "cue"
    n: int = 64
    window: str | None = None
    gamma: float | None = None
    mu: float = 1.0
    betas: list = field(default_factory=lambda: [0.5, 1.0, 1.5])
    trials: int = 20000
    k_max: int = 3
    k: int = 3
    s_grid: list = field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0, 3.0])
    m: int | None = None
    density: float = 1.0
    n_grid: list = field(default_factory=lambda: [50, 100, 200])
    x_ratio: float = 0.3
    tolerance: float | None = None
    workers: int | None = None
    out: str = "out"

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.command in ("verify-main-theorem", "moments", "sample") or (
            self.command == "first-moment" and self.trials > 0
        ):
            if self.seed is None:
                raise ConfigError("--seed is required for Monte Carlo commands")
        if self.seed is not None:
            try:
                self.seed = check_seed(self.seed)
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc)) from None
        self.ensemble = Ensemble(self.ensemble).value
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError("n must be a positive integer")
        self.n = int(self.n)
        if self.command in ("verify-main-theorem", "moments", "sample") and self.trials < 1:
            raise ConfigError("trials must be positive")
        if self.trials < 0:
            raise ConfigError("trials must be nonnegative")
        if self.gamma is not None and self.gamma <= 0:
            raise ConfigError("gamma must be positive")
        if self.mu <= 0:
            raise ConfigError("mu must be positive")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be positive")
        if not 1 <= self.k <= 5:
            raise ConfigError("k must be in 1..5")
        if any(s < 0 for s in self.s_grid):
            raise ConfigError("s grid values must be nonnegative")
        self.interval()
        return self

    def interval(self) -> Interval:
        kind = IntervalKind.ARC if self.ensemble == "cue" else IntervalKind.REAL
        if self.window is None:
            if kind is IntervalKind.ARC:
                return Interval.full_circle()
            half = 0.5 * math.sqrt(self.n)
            return Interval.real(-half, half)
        try:
            return Interval.parse(self.window, kind)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def identity(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if k not in EXECUTION_ONLY}

    def sha256(self) -> str:
        return hashlib.sha256(json.dumps(self.identity(), sort_keys=True).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Output helpers


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def render_csv(header: list[str], rows: list[list], checksum: str) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header + ["config_sha256"])
    for r in rows:
        w.writerow([_cell(v) for v in r] + [checksum])
    return buf.getvalue().encode()


def render_svg(csv_bytes: bytes, x_col: int, y_cols: list[int], title: str) -> bytes:
    """Line plot built only from the CSV text."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = list(csv.reader(io.StringIO(csv_bytes.decode())))
    head, body = rows[0], rows[1:]

    def col(i):
        out = []
        for r in body:
            try:
                out.append(float(r[i]))
            except ValueError:
                out.append(float("nan"))
        return out

    plt.rcParams["svg.hashsalt"] = "spacinglab"
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = col(x_col)
    for i, marker in zip(y_cols, ("o", "-", "s", "^")):
        ax.plot(xs, col(i), marker if marker != "-" else "-", label=head[i])
    ax.set_xlabel(head[x_col])
    ax.set_title(title)
    ax.legend()
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


@dataclass
class CommandResult:
    header: list
    rows: list
    plot: tuple  # (x column, y columns)
    failures: list = field(default_factory=list)
    summary: str = ""


# ---------------------------------------------------------------------------
# Commands


def cmd_verify_main_theorem(cfg: RunConfig) -> CommandResult:
    tol = 0.03 if cfg.tolerance is None else cfg.tolerance
    res = tail_experiment(Ensemble(cfg.ensemble), cfg.n, cfg.interval(), cfg.betas, cfg.trials, cfg.seed, cfg.workers)
    rows, failures = [], []
    for b, t, se in zip(res.betas, res.tail, res.se):
        theory = math.exp(-(b**3))
        diff = abs(t - theory)
        ok = diff <= tol
        rows.append([b, t, se, theory, diff, ok])
        if not ok:
            failures.append({"beta": float(b), "abs_diff": float(diff), "tolerance": tol})
    header = ["beta [rescaled]", "empirical_tail [prob]", "se [prob]", "theory_tail [prob]", "abs_diff [prob]", "within_tolerance"]
    return CommandResult(header, rows, (0, [1, 3]), failures)


def _moments_gamma(cfg: RunConfig) -> float:
    if cfg.gamma is not None:
        return cfg.gamma
    return gamma_for_mu(Ensemble(cfg.ensemble), cfg.n, cfg.interval(), cfg.mu)


def cmd_moments(cfg: RunConfig) -> CommandResult:
    nse = 3.0 if cfg.tolerance is None else cfg.tolerance
    gamma = _moments_gamma(cfg)
    rep = moment_report(Ensemble(cfg.ensemble), cfg.n, cfg.interval(), gamma, cfg.k_max, cfg.trials, cfg.seed, cfg.workers)
    rows, failures = [], []
    for k in range(1, rep.k_max + 1):
        emp, se, poi = rep.empirical[k - 1], rep.se[k - 1], rep.poisson[k - 1]
        ok = abs(emp - poi) <= nse * se
        rows.append([k, emp, se, poi, emp / poi, se / poi, gamma, rep.mu, rep.quadrature_first_moment, ok])
        if not ok:
            failures.append({"k": k, "empirical": emp, "poisson": poi, "se": se, "nse": nse})
    header = [
        "k", "empirical [count^k]", "se [count^k]", "poisson [count^k]", "ratio", "ratio_se",
        "gamma [rad or x]", "mu [count]", "quadrature_first_moment [count]", "within_tolerance",
    ]
    return CommandResult(header, rows, (0, [1, 3]), failures)


def cmd_first_moment(cfg: RunConfig) -> CommandResult:
    ens = Ensemble(cfg.ensemble)
    window = cfg.interval()
    gammas = [cfg.gamma] if cfg.gamma is not None else [f * 2.0 * math.pi / cfg.n for f in (0.01, 0.02, 0.05, 0.1)]
    spec = KernelSpec(ens, cfg.n)
    rows, failures = [], []
    for g in gammas:
        quad = gaudin_first_moment(spec, window, g)
        heur = heuristic_mu(ens, cfg.n, window, g)
        local = first_moment_local_expansion(spec, window, g)
        rel = abs(quad / heur - 1.0)
        budget = 10.0 * max(1.0 / cfg.n, gamma_n_sq(g, cfg.n)) if cfg.tolerance is None else cfg.tolerance
        mc = se = float("nan")
        if cfg.trials > 0:
            counts = run_trials(ens, cfg.n, cfg.seed, cfg.trials, ClosePairCount(window, g), cfg.workers)
            mc, se = float(counts.mean()), jackknife_se(counts)
        ok = rel <= budget
        rows.append([g, gamma_n_sq(g, cfg.n), quad, heur, local, rel, budget, mc, se, ok])
        if not ok:
            failures.append({"gamma": g, "rel_err": rel, "budget": budget})
    header = [
        "gamma [rad or x]", "gamma2n2", "gaudin [count]", "heuristic [count]", "local_expansion [count]",
        "rel_err", "budget", "monte_carlo [count]", "mc_se [count]", "within_tolerance",
    ]
    return CommandResult(header, rows, (0, [2, 3]), failures)


def cmd_collapses(cfg: RunConfig) -> CommandResult:
    counts = enumerate_collapses(cfg.k)
    rows = [
        ["total", "", counts.total, ""],
        ["clean", "", counts.clean, sum(clean_collapse_count_formula(cfg.k, l) for l in range(1, cfg.k + 1))],
        ["mixed", "", counts.mixed, ""],
    ]
    failures = []
    for l in range(1, cfg.k + 1):
        got, want = counts.clean_by_cluster.get(l, 0), clean_collapse_count_formula(cfg.k, l)
        rows.append(["clean_by_cluster", l, got, want])
        if got != want:
            failures.append({"l": l, "enumerated": got, "formula": want})
    summary = f"k={cfg.k}: total {counts.total}, clean {counts.clean}, mixed {counts.mixed}"
    return CommandResult(["quantity", "clusters", "enumerated [count]", "formula [count]"], rows, (1, [2, 3]), failures, summary)


def cmd_fredholm(cfg: RunConfig) -> CommandResult:
    rows = []
    for s in cfg.s_grid:
        if s == 0:
            rows.append([0.0, 0, 1.0, 0.0, 0.0, float("nan")])
            continue
        probe = gap_probability(s, cfg.m, cfg.density)
        dyson = dyson_tail_log_unit(s * cfg.density)
        rows.append([s, probe.m, probe.value, probe.log_value, p2_density(s, cfg.density, cfg.m), dyson])
    header = ["s [length]", "m", "gap_probability [prob]", "log_gap", "p2_density [1/length]", "dyson_tail_log"]
    return CommandResult(header, rows, (0, [2, 4]), [])


def cmd_asymptotics(cfg: RunConfig) -> CommandResult:
    rows, prev, failures = [], None, []
    for n in cfg.n_grid:
        amp = pr_error_amplitude(int(n), cfg.x_ratio)
        ratio = float("nan") if prev is None else prev / amp
        sc = abs(float(gue_kernel(int(n), 0.0, 0.0)) / float(semicircle_density(int(n), 0.0)) - 1.0)
        rows.append([int(n), cfg.x_ratio, amp, ratio, sc, n * sc])
        if prev is not None and not 1.5 <= ratio <= 3.0:
            failures.append({"n": int(n), "error_ratio": ratio})
        prev = amp
    header = ["n", "x_over_sqrt_n", "pr_error_amplitude", "error_ratio", "semicircle_rel_err", "n_times_rel_err"]
    return CommandResult(header, rows, (0, [2]), failures)


def cmd_sample(cfg: RunConfig) -> CommandResult:
    rows = []
    ens = Ensemble(cfg.ensemble)
    spectra = run_trials(ens, cfg.n, cfg.seed, cfg.trials, RawValues(), cfg.workers)
    spectra = spectra.reshape(cfg.trials, cfg.n)
    for t, vals in enumerate(spectra):
        for i, v in enumerate(vals):
            rows.append([t, i, v])
    unit = "rad" if ens is Ensemble.CUE else "x"
    return CommandResult(["trial", "index", f"eigenvalue [{unit}]"], rows, (1, [2]), [])


HANDLERS = {
    "verify-main-theorem": cmd_verify_main_theorem,
    "moments": cmd_moments,
    "first-moment": cmd_first_moment,
    "collapses": cmd_collapses,
    "fredholm": cmd_fredholm,
    "asymptotics": cmd_asymptotics,
    "sample": cmd_sample,
}


# ---------------------------------------------------------------------------
# Driver


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spacinglab", description="Eigenvalue spacing experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="JSON config; flags override it")
        s.add_argument("--seed", type=int)
        s.add_argument("--trials", type=int)
        s.add_argument("--n", type=int)
        s.add_argument("--ensemble", choices=[e.value for e in Ensemble])
        s.add_argument("--window", help="LO:HI; pi tokens allowed, e.g. 0:2pi")
        s.add_argument("--gamma", type=float)
        s.add_argument("--mu", type=float, help="target mean used to tune gamma when --gamma is absent")
        s.add_argument("--betas", type=_floats, help="comma-separated beta grid")
        s.add_argument("--k-max", type=int, dest="k_max")
        s.add_argument("--k", type=int)
        s.add_argument("--s-grid", type=_floats, dest="s_grid")
        s.add_argument("--m", type=int)
        s.add_argument("--density", type=float)
        s.add_argument("--n-grid", type=_ints, dest="n_grid")
        s.add_argument("--workers", type=int, help="parallel processes (default: $SPACINGLAB_WORKERS or 1)")
        s.add_argument("--out", help="output root directory")
        s.add_argument("--tolerance", type=float)
    return p


def load_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config is not None:
        try:
            values.update({k.replace("-", "_"): v for k, v in json.loads(args.config.read_text()).items()})
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    values.pop("command", None)
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for name in known - {"command"}:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return RunConfig(command=args.command, **values).validate()


def _sha(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def execute(cfg: RunConfig) -> tuple[int, Path]:
    """Run one command and write its output directory; returns (exit code, directory)."""
    start = time.perf_counter()
    result = HANDLERS[cfg.command](cfg)
    wall = time.perf_counter() - start
    checksum = cfg.sha256()
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    run_dir = Path(cfg.out) / cfg.command / f"{stamp}-{checksum[:12]}"
    run_dir.mkdir(parents=True, exist_ok=False)
    files = {
        "config.json": (json.dumps(cfg.identity(), sort_keys=True, indent=2) + "\n").encode(),
        "results.csv": render_csv(result.header, result.rows, checksum),
    }
    x_col, y_cols = result.plot
    files["plot.svg"] = render_svg(files["results.csv"], x_col, y_cols, cfg.command)
    for name, data in files.items():
        (run_dir / name).write_bytes(data)
    record = {
        "version": __version__,
        "command": cfg.command,
        "config": cfg.identity(),
        "config_sha256": checksum,
        "workers": cfg.workers,
        "checksums": {name: _sha(data) for name, data in files.items()},
        "wall_time_s": wall,
        "status": "fail" if result.failures else "ok",
    }
    (run_dir / "record.json").write_text(json.dumps(record, indent=2) + "\n")
    if result.summary:
        print(result.summary)
    print(run_dir)
    if result.failures:
        sys.stderr.write(json.dumps({"status": "fail", "command": cfg.command, "failures": result.failures}) + "\n")
        return 1, run_dir
    return 0, run_dir


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except (ConfigError, ValueError) as exc:
        sys.stderr.write(json.dumps({"status": "error", "error": str(exc)}) + "\n")
        return 2
    code, _ = execute(cfg)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
