"""Experiment runners behind the CLI.  Each returns (exit_status, summary, csv_files)."""

from __future__ import annotations

import csv
import io
import json
import logging
import warnings
from pathlib import Path

import numpy as np

from .config import DataSpec, Experiment, ExperimentConfig, config_to_dict
from .fourier import SpectralField, random_field
from .gn_inequality import check_gn, critical_exponent
from .linear_solver import EvolutionState, data_norm, verify_decay
from .propagator import EvolutionParams, decay_function, propagator_table
from .semilinear_solver import (
    BlowUpError,
    ExponentWarning,
    SemilinearConfig,
    decay_constants,
    estimate_epsilon0,
    fitted_decay_rate,
    picard_iterate,
    xt_weights,
)
from .spectral_groups import GroupSpec, mode_table, quadrature_grid

SCHEMA_VERSION = 1
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger(__name__)


def generate_data(spec: DataSpec, group: GroupSpec, truncation: int) -> tuple[SpectralField, SpectralField]:
    """Deterministic (u0, u1) from ``spec``; see :class:`DataSpec`."""
    table = mode_table(group, truncation)
    zero = SpectralField.zeros(group, truncation)
    if spec.profile == "zero":
        return zero, zero
    if spec.profile == "single-mode":
        c = np.zeros(len(table), dtype=complex)
        pos = table.position(spec.mode)
        if group.is_torus and any(spec.mode):
            # cos(k.x): half weight on k and -k
            c[pos] += 0.5
            c[table.conjugate_position[pos]] += 0.5
        else:
            c[pos] = 1.0
        u0, u1 = SpectralField(group, truncation, c), zero
    else:
        rng = np.random.default_rng(spec.seed)
        u0 = random_field(group, truncation, rng, spec.decay_exponent)
        u1 = random_field(group, truncation, rng, spec.decay_exponent)
    if spec.zero_mode is not None:
        c0, c1 = u0.coeffs.copy(), u1.coeffs.copy()
        c0[0], c1[0] = spec.zero_mode
        u0, u1 = SpectralField(group, truncation, c0), SpectralField(group, truncation, c1)
    if spec.amplitude is not None:
        norm = data_norm(u0, u1)
        if norm > 0:
            factor = spec.amplitude / norm
            u0, u1 = u0 * factor, u1 * factor
    return u0, u1


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _params(cfg: ExperimentConfig) -> EvolutionParams:
    return EvolutionParams(cfg.b, cfg.m_sq)


def _times(cfg: ExperimentConfig) -> np.ndarray:
    return np.linspace(cfg.t_max / cfg.n_times, cfg.t_max, cfg.n_times)


def run_linear_decay(cfg: ExperimentConfig):
    params = _params(cfg)
    u0, u1 = generate_data(cfg.data, cfg.group, cfg.K)
    report = verify_decay(EvolutionState.initial(u0, u1, params), _times(cfg),
                          fit_window=cfg.fit_window, rate_tolerance=cfg.tolerances.rate)
    summary = report.summary()
    summary["fitted_rate"] = report.fitted_rates.get("l2_u")
    return (EXIT_PASS if report.ok else EXIT_FAIL), summary, {"timeseries.csv": report.to_csv()}


def run_regime_sweep(cfg: ExperimentConfig):
    u0, u1 = generate_data(cfg.data, cfg.group, cfg.K)
    rows, results = [], []
    for b, m_sq in cfg.cases:
        params = EvolutionParams(b, m_sq)
        rep = verify_decay(EvolutionState.initial(u0, u1, params), _times(cfg),
                           fit_window=cfg.fit_window, rate_tolerance=cfg.tolerances.rate)
        s = rep.summary()
        results.append({"b": b, "m_sq": m_sq, **s})
        rows.append([b, m_sq, rep.regime, rep.expected_rate, rep.fitted_rates.get("l2_u", float("nan")),
                     rep.constants.get("l2_u", 0.0), rep.constants.get("h1dot_u", 0.0),
                     rep.constants.get("l2_ut", 0.0), rep.ok])
    ok = all(r["pass"] for r in results)
    header = ["b", "m_sq", "regime", "expected_rate", "fitted_rate_l2_u", "C_l2_u", "C_h1dot_u", "C_l2_ut", "pass"]
    return (EXIT_PASS if ok else EXIT_FAIL), {"cases": results, "pass": ok}, {"sweep.csv": csv_text(header, rows)}


def _semilinear_config(cfg: ExperimentConfig) -> SemilinearConfig:
    return SemilinearConfig(p=cfg.p, T=cfg.T, dt=cfg.dt, picard_tol=cfg.tolerances.picard_tol,
                            picard_max_iter=cfg.picard_max_iter, dealias_oversample=cfg.dealias_oversample)


def run_semilinear_existence(cfg: ExperimentConfig):
    params = _params(cfg)
    scfg = _semilinear_config(cfg)
    data = generate_data(cfg.data, cfg.group, cfg.K)
    amplitude = data_norm(*data)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ExponentWarning)
        report = picard_iterate(data, params, scfg)
    summary = {"picard": report.summary(), "data_norm": amplitude,
               "warnings": [str(w.message) for w in caught if issubclass(w.category, ExponentWarning)]}
    files = {"picard.csv": report.to_csv()}
    traj = report.trajectory
    ok = report.converged and all(r < cfg.tolerances.max_contraction for r in report.contraction_factors)
    if report.blowup_time is not None:
        summary["blowup_time"] = report.blowup_time
    if traj is not None and report.converged and amplitude > 0:
        rate = fitted_decay_rate(traj, cfg.fit_window)
        expected = params.decay_rate()
        summary["fitted_rate"] = rate
        summary["expected_rate"] = expected
        summary["decay_constants"] = decay_constants(traj, params, amplitude)
        rate_ok = abs(rate - expected) <= cfg.tolerances.rate * abs(expected)
        summary["rate_pass"] = bool(rate_ok)
        ok = ok and rate_ok
        n1, n2, n3 = traj.norms()
        env = decay_function(traj.times, params)
        files["norms.csv"] = csv_text(["t", "l2_u", "h1dot_u", "l2_ut", "d_envelope"],
                                      zip(traj.times, n1, n2, n3, env))
    summary["pass"] = bool(ok)
    return (EXIT_PASS if ok else EXIT_FAIL), summary, files


def run_epsilon_threshold(cfg: ExperimentConfig):
    params = _params(cfg)
    scfg = _semilinear_config(cfg)
    data = generate_data(cfg.data, cfg.group, cfg.K)
    try:
        found = estimate_epsilon0(data, params, scfg, growth_factor=cfg.growth_factor,
                                  start=cfg.start_amplitude, bisection_steps=cfg.bisection_steps)
    except RuntimeError as exc:
        return EXIT_FAIL, {"pass": False, "message": str(exc)}, {}
    summary = {"epsilon0": found.epsilon0, "tested": [list(t) for t in found.tested], "pass": found.epsilon0 > 0}
    files = {"epsilon_scan.csv": csv_text(["amplitude", "converged"], found.tested)}
    return EXIT_PASS, summary, files


def run_gn_probe(cfg: ExperimentConfig):
    n = cfg.group.topological_dimension
    critical_exponent(n)  # rejects n < 3
    grid = quadrature_grid(cfg.group, cfg.K, cfg.dealias_oversample or max(2, int(np.ceil(cfg.q / 2))))
    rng = np.random.default_rng(cfg.data.seed)
    fields = [random_field(cfg.group, cfg.K, rng, 1.0 + (i % 2)) for i in range(2 * cfg.n_fields)]
    half = check_gn(fields[: cfg.n_fields], n, cfg.q, grid)
    full = check_gn(fields, n, cfg.q, grid)
    drift = abs(full.max_ratio / half.max_ratio - 1.0)
    ok = bool(np.isfinite(full.max_ratio) and drift <= cfg.tolerances.gn_stability)
    summary = {"n": n, "q": cfg.q, "theta": full.theta, "max_ratio": half.max_ratio,
               "max_ratio_doubled": full.max_ratio, "relative_drift": drift, "pass": ok}
    return (EXIT_PASS if ok else EXIT_FAIL), summary, {"gn_samples.csv": full.to_csv()}


def run_propagator_table(cfg: ExperimentConfig):
    params = _params(cfg)
    times = np.linspace(0.0, cfg.t_max, cfg.n_times)
    table = propagator_table(times, params, cfg.lambda_sq)
    summary = {"regime": params.regime().value, "mode_regime": params.mode_regime(cfg.lambda_sq).value,
               "lambda_sq": cfg.lambda_sq, "rows": len(times), "pass": True}
    return EXIT_PASS, summary, {"propagator.csv": csv_text(["t", "g0", "g1", "d"], table)}


RUNNERS = {
    Experiment.LINEAR_DECAY: run_linear_decay,
    Experiment.REGIME_SWEEP: run_regime_sweep,
    Experiment.SEMILINEAR_EXISTENCE: run_semilinear_existence,
    Experiment.EPSILON_THRESHOLD: run_epsilon_threshold,
    Experiment.GN_PROBE: run_gn_probe,
    Experiment.PROPAGATOR_TABLE: run_propagator_table,
}


def run(cfg: ExperimentConfig, output_dir=None) -> int:
    """Run ``cfg`` and write summary.json plus CSV files; returns the exit status."""
    out = Path(output_dir or cfg.output or "results")
    out.mkdir(parents=True, exist_ok=True)
    try:
        status, summary, files = RUNNERS[cfg.experiment](cfg)
    except (BlowUpError, FloatingPointError) as exc:
        status, files = EXIT_FAIL, {}
        summary = {"pass": False, "message": f"numerical blow-up: {exc}",
                   "blowup_time": getattr(exc, "time", None)}
    except ValueError as exc:
        # inadmissible exponents, dt not dividing T and similar setup problems
        status, files, summary = EXIT_CONFIG, {}, {"pass": False, "message": str(exc)}
    doc = {"schema_version": SCHEMA_VERSION, "experiment": cfg.experiment.value,
           "config": config_to_dict(cfg), "result": summary, "exit_status": status}
    (out / "summary.json").write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n",
                                      encoding="utf-8")
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8", newline="")
    return status


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj).__name__)
