"""Command-line front end.

Subcommands: simulate, design, compare, figures, selftest.  Exit codes are
0 success, 1 tolerance failure, 2 configuration error, 3 engine error.

A config file is flat YAML, for example::

    scenario: linear        # linear | parabolic | explicit | designed
    b1_squared: 0.75        # linear (or b1)
    z: 0.1                  # parabolic
    coefficients: [0.8, 0.3]  # explicit: B_k, with A_k = sqrt(1 - B_k^2)
    target: [0.5, 0.25]     # designed: f_0, f_1, ...
    N: 103
    T: 50
    engine: sparse          # sparse | dense | analytic
    out: results
    fig3_v: [-0.5, 0.0, 0.5]
    fig4_z: [0.05, 0.1, 0.2]
    jobs: 1
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import yaml

from memwalk import analytics, designer, engines, evolution
from memwalk.dense import MAX_MEMORY_SITES
from memwalk.evolution import Q, QTable
from memwalk.lattice import (
    InfeasibleError,
    LatticeConfig,
    ValidationError,
    WalkProgram,
    profiles_max_deviation,
)

log = logging.getLogger("memwalk")

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_ENGINE = 0, 1, 2, 3
COMPARE_TOL = 1e-10
ROUNDTRIP_TOL = 1e-12
COMPARE_MAX_N = 11
SCENARIOS = ("linear", "parabolic", "explicit", "designed")
DEFAULT_FIG3_V = (-0.5, 0.0, 0.5)
DEFAULT_FIG4_Z = (0.05, 0.1, 0.2)


class ConfigError(Exception):
    pass


def fmt(value: float) -> str:
    """17 significant digits, locale independent, always with a decimal point."""
    text = format(float(value) + 0.0, ".17g")  # folds -0.0
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "linear"
    b1: float | None = None
    z: float | None = None
    coefficients: tuple[float, ...] = ()
    target: tuple[float, ...] = ()
    N: int | None = None
    T: int = 10
    engine: str = "sparse"
    out: Path = Path("out")
    seed: int = 0
    fig3_v: tuple[float, ...] | None = None
    fig4_z: tuple[float, ...] | None = None
    jobs: int = 1

    @property
    def lattice(self) -> LatticeConfig:
        return LatticeConfig(self.N if self.N is not None else max(5, 2 * self.T + 3))


_KEYS = {
    "scenario", "b1", "b1_squared", "z", "coefficients", "target", "N", "T",
    "engine", "out", "seed", "fig3_v", "fig4_z", "jobs",
}


def _floats(value, key) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{key} must be a list of numbers")
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a list of numbers") from None


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping of keys to values")
    unknown = set(raw) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kw = {}
    try:
        if "scenario" in raw:
            kw["scenario"] = str(raw["scenario"])
        if "b1" in raw and "b1_squared" in raw:
            raise ConfigError("give either b1 or b1_squared, not both")
        if "b1" in raw:
            kw["b1"] = float(raw["b1"])
        if "b1_squared" in raw:
            b2 = float(raw["b1_squared"])
            if not 0.0 <= b2 <= 1.0:
                raise ConfigError(f"b1_squared must lie in [0, 1], got {b2}")
            kw["b1"] = math.sqrt(b2)
        if "z" in raw:
            kw["z"] = float(raw["z"])
        for key in ("coefficients", "target"):
            if key in raw:
                kw[key] = _floats(raw[key], key)
        for key in ("fig3_v", "fig4_z"):
            if key in raw:
                kw[key] = _floats(raw[key] or [], key)
        for key in ("N", "T", "seed", "jobs"):
            if key in raw:
                if isinstance(raw[key], bool) or int(raw[key]) != raw[key]:
                    raise ConfigError(f"{key} must be an integer")
                kw[key] = int(raw[key])
        if "engine" in raw:
            kw["engine"] = str(raw["engine"])
        if "out" in raw:
            kw["out"] = Path(str(raw["out"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    return validate(RunConfig(**kw))


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {SCENARIOS}, got {cfg.scenario!r}")
    if cfg.engine not in engines.ENGINES:
        raise ConfigError(f"engine must be one of {engines.ENGINES}, got {cfg.engine!r}")
    if cfg.T < 0:
        raise ConfigError(f"T must be >= 0, got {cfg.T}")
    if cfg.jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {cfg.jobs}")
    try:
        lat = cfg.lattice
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.engine == "dense" and lat.site_count > MAX_MEMORY_SITES:
        raise ConfigError(f"dense engine is capped at N={MAX_MEMORY_SITES}, got N={lat.site_count}")
    if cfg.T > lat.half:
        raise ConfigError(f"T={cfg.T} runs past the wrap of N={lat.site_count}; need T <= {lat.half}")
    return cfg


def load_config(path: Path | None, **overrides) -> RunConfig:
    raw = {}
    if path is not None:
        try:
            raw = yaml.safe_load(Path(path).read_text()) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from None
    raw = dict(raw) if isinstance(raw, dict) else raw
    if isinstance(raw, dict):
        raw.update({k: v for k, v in overrides.items() if v is not None})
    return parse_config(raw)


def build_program(cfg: RunConfig) -> WalkProgram:
    """Walk program for the configured scenario; raises ``ConfigError`` on
    infeasible parameters."""
    if cfg.scenario == "linear" and cfg.b1 is None:
        raise ConfigError("linear scenario needs b1 or b1_squared")
    if cfg.scenario == "parabolic" and cfg.z is None:
        raise ConfigError("parabolic scenario needs z")
    if cfg.scenario == "explicit" and not cfg.coefficients:
        raise ConfigError("explicit scenario needs a coefficients list")
    if cfg.scenario == "designed" and not cfg.target:
        raise ConfigError("designed scenario needs a target list")
    lat = cfg.lattice
    try:
        if cfg.scenario in ("linear", "parabolic"):
            kind = analytics.ScenarioParams(cfg.scenario, b1=cfg.b1, z=cfg.z)
            params = analytics.scenario_params(kind, cfg.T)
        elif cfg.scenario == "explicit":
            params = analytics.ClosedFormParams.from_b(cfg.coefficients)
        else:
            if len(cfg.target) < cfg.T:
                raise ConfigError(f"target has {len(cfg.target)} entries but T={cfg.T}")
            params = designer.design(cfg.target)
        return WalkProgram.from_coefficients(lat, params)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (int, str)) else fmt(v) for v in row])


def simulate(cfg: RunConfig, table: QTable = Q):
    program = build_program(cfg)
    return engines.run(program, cfg.T, cfg.engine, table)


def cmd_simulate(cfg: RunConfig) -> int:
    profiles = simulate(cfg)
    density_rows = []
    for prof in profiles:
        values = prof.as_dict()
        for x in range(-prof.t, prof.t + 1):
            density_rows.append((prof.t, x, values.get(x, 0.0)))
    _write_csv(cfg.out / "density.csv", ("t", "x", "p"), density_rows)
    _write_csv(
        cfg.out / "moments.csv",
        ("t", "mean", "var", "sigma"),
        [(p.t, p.mean, p.variance, p.sigma) for p in profiles],
    )
    log.info("wrote %s and %s", cfg.out / "density.csv", cfg.out / "moments.csv")
    return EXIT_OK


def read_target(path: Path) -> tuple[float, ...]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read target {path}: {exc}") from None
    if Path(path).suffix in (".yaml", ".yml", ".json"):
        data = yaml.safe_load(text)
        if isinstance(data, dict):
            data = data.get("target")
        return _floats(data, "target")
    tokens = []
    for line in text.splitlines():
        tokens += line.split("#", 1)[0].replace(",", " ").split()
    try:
        return tuple(float(t) for t in tokens)
    except ValueError as exc:
        raise ConfigError(f"cannot parse target {path}: {exc}") from None


def cmd_design(target: Sequence[float], out: Path, engine: str = "sparse") -> int:
    if not target:
        raise ConfigError("target is empty")
    try:
        params = designer.design(target)
    except InfeasibleError as exc:
        raise ConfigError(f"infeasible target: {exc}") from None
    T = len(target)
    lattice = designer.lattice_for(T)
    if engine == "dense" and lattice.site_count > MAX_MEMORY_SITES:
        raise ConfigError(f"dense round trip supports T <= {(MAX_MEMORY_SITES - 3) // 2}")
    _write_csv(
        out / "program.csv",
        ("k", "A_k", "B_k"),
        [(k, params.A[k - 1], params.B[k - 1]) for k in range(1, T + 1)],
    )
    rows = designer.roundtrip(target, engine, lattice)
    _write_csv(
        out / "roundtrip.csv",
        ("t", "x", "p_target", "p_sim", "delta"),
        [(t, x, p, q, q - p) for t, x, p, q in rows],
    )
    worst = max(abs(q - p) for _, _, p, q in rows)
    print(f"max |delta| = {fmt(worst)}")
    return EXIT_OK if worst <= ROUNDTRIP_TOL else EXIT_TOLERANCE


def corrupted_table() -> QTable:
    """Negative-control coin: the two left-mover entries on an empty right
    neighbour are swapped."""
    codes = list(Q.codes)
    codes[0], codes[2] = codes[2], codes[0]
    return QTable(tuple(codes))


def compare_engines(cfg: RunConfig, pair_list=None, table: QTable = Q) -> dict[tuple[str, str], float]:
    lat = cfg.lattice
    if lat.site_count > COMPARE_MAX_N:
        raise ConfigError(f"compare needs N <= {COMPARE_MAX_N}, got N={lat.site_count}")
    if pair_list is None:
        pair_list = [("sparse", "dense"), ("sparse", "analytic"), ("dense", "analytic")]
    program = build_program(cfg)
    runs = {}
    for name in {e for pair in pair_list for e in pair}:
        runs[name] = engines.run(program, cfg.T, name, Q if name == "analytic" else table)
    return {(a, b): profiles_max_deviation(runs[a], runs[b], lat) for a, b in pair_list}


def cmd_compare(cfg: RunConfig, pair_list=None, corrupt: bool = False) -> int:
    table = corrupted_table() if corrupt else Q
    devs = compare_engines(cfg, pair_list, table)
    ok = True
    for (a, b), d in devs.items():
        good = d <= COMPARE_TOL
        ok &= good
        print(f"{a:>8} vs {b:<8} max |dP| = {fmt(d)} {'ok' if good else 'FAIL'}")
    return EXIT_OK if ok else EXIT_TOLERANCE


def _fig3_series(v: float, T: int) -> list[tuple]:
    s = analytics.ScenarioParams.linear_velocity(v)
    lat = LatticeConfig(2 * T + 3)
    program = WalkProgram.from_coefficients(lat, analytics.scenario_params(s, T))
    profiles = evolution.run(program, T)
    return [(v, p.t, analytics.scenario_mean(s, p.t), p.mean) for p in profiles]


def _fig4_series(z: float, T: int) -> list[tuple]:
    s = analytics.ScenarioParams.parabolic(z)
    T = min(T, s.horizon)
    lat = LatticeConfig(2 * T + 3)
    program = WalkProgram.from_coefficients(lat, analytics.scenario_params(s, T))
    profiles = evolution.run(program, T)
    return [
        (z, p.t, analytics.scenario_mean(s, p.t), p.mean, analytics.scenario_sigma(s, p.t), p.sigma)
        for p in profiles
    ]


def _plot(path: Path, panels) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "memwalk"
    fig, axes = plt.subplots(len(panels), 1, figsize=(6, 3.2 * len(panels)), squeeze=False)
    for ax, (ylabel, series) in zip(axes[:, 0], panels):
        for label, ts, theory, sim in series:
            line = ax.plot(ts, sim, "--", label=label)[0]
            ax.plot(ts, theory, "o", ms=3, color=line.get_color())
        ax.set_xlabel("t")
        ax.set_ylabel(ylabel)
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _map(fn, args, jobs):
    if jobs == 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*args)))


def cmd_figures(cfg: RunConfig, which: str = "all") -> int:
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    todo = ("fig3", "fig4") if which == "all" else (which,)
    v_list = DEFAULT_FIG3_V if cfg.fig3_v is None else cfg.fig3_v
    z_list = DEFAULT_FIG4_Z if cfg.fig4_z is None else cfg.fig4_z
    if "fig3" in todo and not v_list:
        raise ConfigError("fig3 needs a non-empty fig3_v list")
    if "fig4" in todo and not z_list:
        raise ConfigError("fig4 needs a non-empty fig4_z list")
    for v in v_list:
        if not -1 <= v <= 1:
            raise ConfigError(f"fig3 velocity {v} outside [-1, 1]")
    for z in z_list:
        if not z > 0:
            raise ConfigError(f"fig4 z={z} must be positive")

    if "fig3" in todo:
        results = _map(_fig3_series, [(v, cfg.T) for v in v_list], cfg.jobs)
        rows = [r for series in results for r in series]
        _write_csv(out / "fig3.csv", ("v", "t", "mean_theory", "mean_sim"), rows)
        series = [
            (f"v = {v:g}", [r[1] for r in s], [r[2] for r in s], [r[3] for r in s])
            for v, s in zip(v_list, results)
        ]
        _plot(out / "fig3.svg", [("mean position", series)])
    if "fig4" in todo:
        results = _map(_fig4_series, [(z, cfg.T) for z in z_list], cfg.jobs)
        rows = [r for series in results for r in series]
        _write_csv(
            out / "fig4.csv", ("z", "t", "mean_theory", "mean_sim", "sigma_theory", "sigma_sim"), rows
        )
        means = [(f"z = {z:g}", [r[1] for r in s], [r[2] for r in s], [r[3] for r in s]) for z, s in zip(z_list, results)]
        sigmas = [(f"z = {z:g}", [r[1] for r in s], [r[4] for r in s], [r[5] for r in s]) for z, s in zip(z_list, results)]
        _plot(out / "fig4.svg", [("mean position", means), ("standard deviation", sigmas)])
    return EXIT_OK


def cmd_selftest(seed: int = 0) -> int:
    from memwalk import selftest

    results = selftest.run_all(seed)
    for name, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_TOLERANCE


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="memwalk", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path)
        sp.add_argument("--out", type=Path)
        sp.add_argument("--engine", choices=engines.ENGINES)

    sp = sub.add_parser("simulate", help="write density.csv and moments.csv")
    common(sp)
    sp = sub.add_parser("design", help="compile a target density into coefficients")
    sp.add_argument("target", type=Path, nargs="?", help="file of f_0, f_1, ... values")
    common(sp)
    sp = sub.add_parser("compare", help="cross-check sparse, dense and analytic engines")
    common(sp)
    sp.add_argument("--pairs", help="comma list of a:b engine pairs, e.g. sparse:sparse")
    sp.add_argument("--corrupt-qtable", action="store_true", help=argparse.SUPPRESS)
    sp = sub.add_parser("figures", help="mean and sigma trajectories with plots")
    common(sp)
    sp.add_argument("--figure", choices=("fig3", "fig4", "all"), default="all")
    sp = sub.add_parser("selftest", help="run the invariant checks")
    sp.add_argument("--seed", type=int, default=0)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "selftest":
            return cmd_selftest(args.seed)
        if args.command == "design":
            cfg_target = ()
            cfg = None
            if args.config is not None:
                cfg = load_config(args.config, out=str(args.out) if args.out else None)
                cfg_target = cfg.target
            if args.target is not None:
                cfg_target = read_target(args.target)
            out = args.out or (cfg.out if cfg else Path("out"))
            engine = args.engine or "sparse"
            return cmd_design(cfg_target, out, engine)
        cfg = load_config(args.config, out=str(args.out) if args.out else None, engine=args.engine)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "compare":
            pairs = None
            if args.pairs:
                pairs = [tuple(item.split(":", 1)) for item in args.pairs.split(",")]
                for pair in pairs:
                    if len(pair) != 2 or any(e not in engines.ENGINES for e in pair):
                        raise ConfigError(f"bad engine pair {':'.join(pair)!r}")
            return cmd_compare(cfg, pairs, args.corrupt_qtable)
        if args.command == "figures":
            return cmd_figures(cfg, args.figure)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
