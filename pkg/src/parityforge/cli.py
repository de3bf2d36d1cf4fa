"""Command-line driver: declarative JSON run configs, protocol execution,
parameter sweeps on a worker pool, and flat-file outputs.

Config keys (complex values are [re, im] pairs):

    protocol     squeeze | cat | gkp | hamiltonian
    ansatz       symmetric | linear | explicit
    M, t_max, theta, epsilon, n_cut, delta, comb_steps
    times        explicit squeeze schedule
    alphas       explicit cat schedule, [[re, im], ...]
    sweep        {"parameter": <numeric field>, "min", "max", "steps"}
    outputs      any of: report, state, state_full, wigner, log
    output_dir   where files go
    wigner_grid  {"x_range": [lo, hi], "p_range": [lo, hi], "resolution": n}
    jobs         sweep worker count (PARITYFORGE_JOBS overrides)

Exit status: 0 on success, 2 on configuration errors, 1 on runtime
failures; failures emit a one-line JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, protocols
from .channels import LossModel
from .errors import ConfigError, TailOverflow, ZeroProbability
from .fock import MixedState, PureState, TruncationConfig

SCHEMA_VERSION = "1"

_PROTOCOLS = ("squeeze", "cat", "gkp", "hamiltonian")
_ANSATZE = ("symmetric", "linear", "explicit")
_OUTPUTS = ("report", "state", "state_full", "wigner", "log")
_SWEEPABLE = ("t_max", "epsilon", "theta", "delta")


@dataclass
class RunConfig:
    protocol: str
    n_cut: int
    ansatz: str = "symmetric"
    M: int = 3
    t_max: float = 0.8
    theta: float = 0.0
    epsilon: float | tuple[float, ...] = 0.0
    delta: float | None = None
    comb_steps: int = 2
    times: tuple[float, ...] | None = None
    alphas: tuple[complex, ...] | None = None
    tail_tolerance: float = 1e-6
    sweep: dict | None = None
    outputs: tuple[str, ...] = ("report",)
    output_dir: str = "."
    wigner_grid: dict | None = None
    jobs: int | None = None
    raw: dict = field(default_factory=dict)

    @property
    def epsilons(self) -> tuple[float, ...]:
        if isinstance(self.epsilon, (int, float)):
            return (float(self.epsilon),)
        return tuple(float(e) for e in self.epsilon)


def _parse_complex_list(values) -> tuple[complex, ...]:
    out = []
    for v in values:
        if not (isinstance(v, (list, tuple)) and len(v) == 2):
            raise ConfigError(f"complex values must be [re, im] pairs, got {v!r}")
        out.append(complex(float(v[0]), float(v[1])))
    return tuple(out)


def load_config(path: str | Path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> RunConfig:
    known = {
        "protocol", "ansatz", "M", "t_max", "theta", "epsilon", "n_cut",
        "delta", "comb_steps", "times", "alphas", "tail_tolerance", "sweep",
        "outputs", "output_dir", "wigner_grid", "jobs",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "protocol" not in raw or "n_cut" not in raw:
        raise ConfigError("config requires 'protocol' and 'n_cut'")
    cfg = RunConfig(protocol=raw["protocol"], n_cut=int(raw["n_cut"]), raw=dict(raw))
    for key in ("ansatz", "M", "t_max", "theta", "delta", "comb_steps",
                "tail_tolerance", "sweep", "output_dir", "wigner_grid", "jobs"):
        if key in raw and raw[key] is not None:
            setattr(cfg, key, raw[key])
    cfg.M = int(cfg.M)
    cfg.comb_steps = int(cfg.comb_steps)
    if "epsilon" in raw:
        eps = raw["epsilon"]
        cfg.epsilon = tuple(float(e) for e in eps) if isinstance(eps, list) else float(eps)
    if "times" in raw and raw["times"] is not None:
        cfg.times = tuple(float(t) for t in raw["times"])
    if "alphas" in raw and raw["alphas"] is not None:
        cfg.alphas = _parse_complex_list(raw["alphas"])
    if "outputs" in raw and raw["outputs"] is not None:
        cfg.outputs = tuple(raw["outputs"])
    return cfg


def validate(cfg: RunConfig) -> dict:
    """Static checks; returns {"errors": [...], "warnings": [...], "notes": [...]}."""
    errors: list[str] = []
    warnings: list[str] = []
    notes: list[str] = []
    if cfg.protocol not in _PROTOCOLS:
        errors.append(f"unknown protocol {cfg.protocol!r}")
    if cfg.ansatz not in _ANSATZE:
        errors.append(f"unknown ansatz {cfg.ansatz!r}")
    if cfg.n_cut < 2:
        errors.append(f"n_cut must be >= 2, got {cfg.n_cut}")
    for token in cfg.outputs:
        if token not in _OUTPUTS:
            errors.append(f"unknown output token {token!r}")
    for eps in cfg.epsilons:
        if not 0.0 <= eps < 1.0:
            errors.append(f"epsilon must lie in [0, 1), got {eps}")

    if cfg.protocol in ("squeeze", "gkp", "hamiltonian"):
        if cfg.ansatz == "symmetric" and cfg.times is None and cfg.M % 2 == 0:
            errors.append(f"M must be odd for the symmetric ansatz, got M={cfg.M}")
        if cfg.ansatz == "linear" and cfg.M < 2:
            errors.append("linear ansatz needs M >= 2")
        if cfg.ansatz == "explicit" and cfg.times is None:
            errors.append("explicit ansatz requires 'times'")
        if cfg.t_max < 0:
            errors.append(f"t_max must be >= 0, got {cfg.t_max}")
    if cfg.protocol == "hamiltonian" and cfg.theta != 0.0:
        errors.append("hamiltonian protocol is defined for theta = 0")
    if cfg.protocol == "cat":
        if cfg.alphas is None and cfg.delta is None:
            errors.append("cat protocol requires 'delta' (lattice) or 'alphas' (explicit)")
    if cfg.protocol == "gkp":
        if cfg.delta is None:
            errors.append("gkp protocol requires 'delta'")
        elif cfg.comb_steps >= 1:
            # largest comb tooth sits at (2^steps - 1) * delta/2
            reach = (2 ** cfg.comb_steps - 1) * cfg.delta / 2.0
            needed = int(reach**2 + 6.0 * reach + 20)
            if cfg.n_cut < needed:
                warnings.append(
                    f"n_cut={cfg.n_cut} is tight for a comb reaching x={reach:.2f}; "
                    f"recommend n_cut >= {max(needed, 201)}"
                )
    if cfg.sweep is not None:
        param = cfg.sweep.get("parameter")
        if param not in _SWEEPABLE:
            errors.append(f"sweep parameter must be one of {_SWEEPABLE}, got {param!r}")
        for key in ("min", "max", "steps"):
            if key not in cfg.sweep:
                errors.append(f"sweep requires '{key}'")
        if "steps" in cfg.sweep and int(cfg.sweep["steps"]) < 1:
            errors.append("sweep steps must be >= 1")
        if "steps" in cfg.sweep and int(cfg.sweep["steps"]) == 1:
            notes.append("single-point sweep")
    else:
        notes.append("no sweep axis; single run")
    return {"errors": errors, "warnings": warnings, "notes": notes}


def _sequence_for(cfg: RunConfig) -> protocols.DisplacementSequence:
    if cfg.ansatz == "explicit":
        return protocols.DisplacementSequence(cfg.theta, cfg.times)
    if cfg.ansatz == "linear":
        return protocols.linear_sequence(cfg.M, cfg.t_max, cfg.theta)
    return protocols.symmetric_sequence(cfg.M, cfg.t_max, cfg.theta)


def _cat_sequence_for(cfg: RunConfig) -> protocols.CatSequence:
    if cfg.alphas is not None:
        return protocols.CatSequence(cfg.alphas)
    return protocols.cat_lattice_sequence(cfg.M, cfg.delta)


def execute_point(cfg: RunConfig, epsilon: float) -> dict:
    """Run one protocol instance; returns state, log and derived metrics."""
    trunc = TruncationConfig(cfg.n_cut, cfg.tail_tolerance)
    loss = LossModel(epsilon)
    result: dict = {"epsilon": epsilon}
    if cfg.protocol == "squeeze":
        state, log = protocols.run_squeezing(_sequence_for(cfg), loss, trunc)
    elif cfg.protocol == "cat":
        seq = _cat_sequence_for(cfg)
        state, log = protocols.run_cat(seq, loss, trunc)
        if seq.M == 2 and isinstance(state, PureState):
            reference = protocols.analytic_cat_m2(seq.alphas[0], seq.alphas[1], trunc)
            result["cat_fidelity_vs_analytic"] = analysis.fidelity(state, reference)
    elif cfg.protocol == "gkp":
        spec = protocols.GkpSpec(_sequence_for(cfg), cfg.delta, cfg.comb_steps)
        state, log = protocols.run_gkp(spec, loss, trunc)
        result["gkp_fit"] = analysis.fit_gkp(state, cfg.delta)
    elif cfg.protocol == "hamiltonian":
        seq = _sequence_for(cfg)
        h = analysis.parity_hamiltonian(seq.times, trunc)
        energy, state = analysis.ground_state(h)
        log = protocols.RunLog.from_steps(())
        result["ground_energy"] = energy
    else:
        raise ConfigError(f"unknown protocol {cfg.protocol!r}")
    result["state"] = state
    result["log"] = log
    if cfg.protocol != "cat":
        result["squeezing"] = analysis.squeezing_db(state)
    return result


def _report_payload(cfg: RunConfig, result: dict, timings: dict) -> dict:
    log: protocols.RunLog = result["log"]
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.raw,
        "run_log": {
            "per_step_probabilities": list(log.per_step_probabilities),
            "cumulative_probability": log.cumulative_probability,
        },
        "timings_seconds": timings,
    }
    if "squeezing" in result:
        rep: analysis.SqueezingReport = result["squeezing"]
        payload["squeezing"] = {
            "s_db": rep.s_db,
            "theta_min": rep.theta_min,
            "var_min": rep.var_min,
            "var_max": rep.var_max,
            "best_fit_r": rep.best_fit_xi.r if rep.best_fit_xi else None,
            "best_fit_phase": rep.best_fit_xi.phase if rep.best_fit_xi else None,
            "best_fit_fidelity": rep.best_fit_fidelity,
        }
    if "gkp_fit" in result:
        fit: analysis.GkpFitReport = result["gkp_fit"]
        payload["gkp_fit"] = {
            "r_opt": fit.r_opt,
            "sigma_env_opt": fit.sigma_env_opt,
            "fidelity": fit.fidelity,
        }
    if "ground_energy" in result:
        payload["ground_energy"] = result["ground_energy"]
    if "cat_fidelity_vs_analytic" in result:
        payload["cat_fidelity_vs_analytic"] = result["cat_fidelity_vs_analytic"]
    return payload


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_state_csv(state: PureState | MixedState, path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        if isinstance(state, PureState):
            w.writerow(["n", "re", "im"])
            for n, c in enumerate(state.amplitudes):
                w.writerow([n, _fmt(c.real), _fmt(c.imag)])
        else:
            w.writerow(["n", "rho_nn"])
            for n, v in enumerate(state.populations()):
                w.writerow([n, _fmt(v)])


def write_state_full_csv(state: MixedState, path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "n", "re", "im"])
        for m in range(state.dim):
            for n in range(state.dim):
                v = state.rho[m, n]
                w.writerow([m, n, _fmt(v.real), _fmt(v.imag)])


def write_wigner_csv(grid: analysis.WignerGrid, path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "p", "W"])
        for i, xv in enumerate(grid.x):
            for j, pv in enumerate(grid.p):
                w.writerow([_fmt(xv), _fmt(pv), _fmt(grid.values[i, j])])


def write_log_csv(log: protocols.RunLog, path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "success_probability"])
        for m, p in enumerate(log.per_step_probabilities, start=1):
            w.writerow([m, _fmt(p)])
        w.writerow(["cumulative", _fmt(log.cumulative_probability)])


def _grid_spec(cfg: RunConfig) -> analysis.GridSpec:
    if cfg.wigner_grid is None:
        if cfg.protocol == "cat" and cfg.delta is not None:
            reach = 2.0 * cfg.delta
            return analysis.GridSpec((-reach, reach), (-reach, reach))
        return analysis.GridSpec()
    g = cfg.wigner_grid
    return analysis.GridSpec(
        tuple(g.get("x_range", (-6.0, 6.0))),
        tuple(g.get("p_range", (-6.0, 6.0))),
        int(g.get("resolution", 241)),
    )


_SWEEP_CFG: RunConfig | None = None


def _sweep_init(raw_cfg: dict) -> None:
    global _SWEEP_CFG
    _SWEEP_CFG = config_from_dict(raw_cfg)


def _sweep_point(task: tuple[int, str, float, float]) -> dict:
    index, param, value, epsilon = task
    cfg = _SWEEP_CFG
    assert cfg is not None
    point = RunConfig(**{**cfg.__dict__})
    if param == "epsilon":
        epsilon = value
    else:
        setattr(point, param, value)
    row = {"index": index, param: value, "epsilon": epsilon}
    try:
        result = execute_point(point, epsilon)
        log: protocols.RunLog = result["log"]
        row["p_suc"] = log.cumulative_probability
        if "squeezing" in result:
            rep = result["squeezing"]
            row["s_db"] = rep.s_db
            row["r_opt"] = rep.best_fit_xi.r
            row["best_fit_fidelity"] = rep.best_fit_fidelity
        row["error"] = ""
    except (ZeroProbability, TailOverflow, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(cfg: RunConfig, out_dir: Path) -> Path:
    param = cfg.sweep["parameter"]
    lo, hi = float(cfg.sweep["min"]), float(cfg.sweep["max"])
    steps = int(cfg.sweep["steps"])
    values = np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])
    tasks = []
    index = 0
    epsilons = (0.0,) if param == "epsilon" else cfg.epsilons
    for value in values:
        for eps in epsilons:
            tasks.append((index, param, float(value), float(eps)))
            index += 1
    env_jobs = os.environ.get("PARITYFORGE_JOBS")
    if env_jobs is not None:
        jobs = int(env_jobs)
    elif cfg.jobs is not None:
        jobs = int(cfg.jobs)
    else:
        jobs = os.cpu_count() or 1
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_sweep_init,
                                 initargs=(cfg.raw,)) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        _sweep_init(cfg.raw)
        rows = [_sweep_point(t) for t in tasks]
    rows.sort(key=lambda r: r["index"])
    columns = ["index", param, "epsilon", "s_db", "p_suc", "r_opt",
               "best_fit_fidelity", "error"]
    path = out_dir / "sweep.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([
                row.get(c, "") if not isinstance(row.get(c), float) else _fmt(row[c])
                for c in columns
            ])
    return path


def run(cfg: RunConfig) -> int:
    diagnostics = validate(cfg)
    if diagnostics["errors"]:
        raise ConfigError("; ".join(diagnostics["errors"]))
    for msg in diagnostics["warnings"]:
        print(f"warning: {msg}", file=sys.stderr)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if cfg.sweep is not None:
        t0 = time.perf_counter()
        path = run_sweep(cfg, out_dir)
        print(f"wrote {path} in {time.perf_counter() - t0:.1f}s")
        return 0

    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    result = execute_point(cfg, cfg.epsilons[0])
    timings["protocol"] = time.perf_counter() - t0
    state = result["state"]

    if "wigner" in cfg.outputs:
        t0 = time.perf_counter()
        grid = analysis.wigner(state, _grid_spec(cfg))
        timings["wigner"] = time.perf_counter() - t0
        write_wigner_csv(grid, out_dir / "wigner.csv")
    if "state" in cfg.outputs:
        write_state_csv(state, out_dir / "state.csv")
    if "state_full" in cfg.outputs and isinstance(state, MixedState):
        write_state_full_csv(state, out_dir / "state_full.csv")
    if "log" in cfg.outputs:
        write_log_csv(result["log"], out_dir / "log.csv")
    if "report" in cfg.outputs:
        payload = _report_payload(cfg, result, timings)
        (out_dir / "report.json").write_text(json.dumps(payload, indent=2) + "\n")
    return 0


def _load_state_csv(path: Path) -> PureState | MixedState:
    with path.open() as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{path}: empty state file")
    header = rows[0]
    body = rows[1:]
    if header == ["n", "re", "im"]:
        amps = np.array([complex(float(r[1]), float(r[2])) for r in body])
        return PureState(amps)
    if header == ["m", "n", "re", "im"]:
        size = int(math.isqrt(len(body)))
        rho = np.zeros((size, size), dtype=complex)
        for r in body:
            rho[int(r[0]), int(r[1])] = complex(float(r[2]), float(r[3]))
        return MixedState(rho)
    raise ConfigError(f"{path}: unrecognized state header {header}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="parityforge",
                                     description="Parity-measurement state preparation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a protocol or sweep from a config")
    p_run.add_argument("config")
    p_run.add_argument("--jobs", type=int, default=None)

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config")

    p_wig = sub.add_parser("wigner", help="Wigner grid of a saved state")
    p_wig.add_argument("state_file")
    p_wig.add_argument("--grid", type=float, nargs=4,
                       metavar=("XMIN", "XMAX", "PMIN", "PMAX"),
                       default=(-6.0, 6.0, -6.0, 6.0))
    p_wig.add_argument("--resolution", type=int, default=241)
    p_wig.add_argument("--output", default="wigner.csv")

    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            cfg = load_config(args.config)
            diagnostics = validate(cfg)
            print(json.dumps(diagnostics, indent=2))
            if diagnostics["errors"]:
                raise ConfigError("; ".join(diagnostics["errors"]))
            return 0
        if args.command == "run":
            cfg = load_config(args.config)
            if args.jobs is not None:
                cfg.jobs = args.jobs
            return run(cfg)
        if args.command == "wigner":
            state = _load_state_csv(Path(args.state_file))
            xmin, xmax, pmin, pmax = args.grid
            grid = analysis.wigner(state, analysis.GridSpec(
                (xmin, xmax), (pmin, pmax), args.resolution))
            write_wigner_csv(grid, Path(args.output))
            return 0
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(json.dumps({"error": "ConfigError", "message": str(exc)}),
              file=sys.stderr)
        return 2
    except (ZeroProbability, TailOverflow) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ZeroProbability) and exc.step is not None:
            record["step"] = exc.step
        if isinstance(exc, TailOverflow):
            record["tail_mass"] = exc.tail
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
