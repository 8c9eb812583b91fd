"""Mild solutions of u'' - Lu + b u' + m^2 u = |u|^p via Picard iteration of the Duhamel map.

    N u(t) = u_lin(t) + int_0^t S(t - s) [0, |u(s)|^p] ds   (S = exact linear flow)

The linear part is propagated exactly per mode.  The s-integral is the composite
trapezoid rule on a uniform grid; because the mode propagator is a semigroup the
trapezoid sum for every t_j is accumulated by the recursion

    W_{j+1} = S(dt) (W_j + dt/2 [0, F_j]) + dt/2 [0, F_{j+1}],

which equals the trapezoid sum term by term and costs O(steps * modes).
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import roots_jacobi

from .fourier import SpectralField, analyze_array, plancherel_sq, synthesize_array
from .linear_solver import EvolutionState, data_norm, evolve_coefficients, fit_log_rate, state_norms
from .propagator import EvolutionParams, Regime, decay_function, propagator_matrix
from .spectral_groups import GroupSpec, QuadratureGrid, default_oversample, mode_table, quadrature_grid

log = logging.getLogger(__name__)

TINY = 1e-300
_CHUNK = 32


class BlowUpError(FloatingPointError):
    """Non-finite values appeared; ``time`` is the first offending snapshot time."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class ExponentWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SemilinearConfig:
    p: float
    T: float
    dt: float | None = None
    picard_tol: float = 1e-10
    picard_max_iter: int = 50
    dealias_oversample: int | None = None
    divergence_patience: int = 3

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.dt is None:
            object.__setattr__(self, "dt", self.T / 1024)
        if not (0 < self.dt <= self.T):
            raise ValueError(f"dt must lie in (0, T], got {self.dt}")
        if self.dealias_oversample is None:
            object.__setattr__(self, "dealias_oversample", default_oversample(self.p))
        if self.dealias_oversample < 1:
            raise ValueError("dealias_oversample must be >= 1")
        if self.picard_tol <= 0 or self.picard_max_iter < 1:
            raise ValueError("picard_tol must be positive and picard_max_iter >= 1")

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    def times(self) -> np.ndarray:
        n = self.steps
        if not math.isclose(n * self.dt, self.T, rel_tol=1e-9):
            raise ValueError(f"T={self.T} is not an integer multiple of dt={self.dt}")
        return np.linspace(0.0, self.T, n + 1)

    def check_exponent(self, group: GroupSpec) -> bool:
        """Warn (not fail) when p or n falls outside the global-existence hypotheses."""
        n = group.topological_dimension
        if n < 3:
            warnings.warn(f"{group} has dimension {n} < 3; the existence theory assumes n >= 3",
                          ExponentWarning, stacklevel=2)
            return False
        if self.p > n / (n - 2):
            warnings.warn(f"p={self.p} exceeds n/(n-2)={n / (n - 2):.4g} for {group}",
                          ExponentWarning, stacklevel=2)
            return False
        return True


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots (u, ut) on a uniform time grid starting at 0; arrays are (steps + 1, M)."""

    group: GroupSpec
    truncation: int
    times: np.ndarray
    u: np.ndarray
    ut: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or len(times) == 0 or times[0] != 0:
            raise ValueError("trajectory times must be a nonempty array starting at 0")
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        m = len(mode_table(self.group, self.truncation))
        for name in ("u", "ut"):
            arr = getattr(self, name)
            if arr.shape != (len(times), m):
                raise ValueError(f"{name} has shape {arr.shape}, expected {(len(times), m)}")
        object.__setattr__(self, "times", times)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    @property
    def modes(self):
        return mode_table(self.group, self.truncation)

    def state(self, j: int, params: EvolutionParams) -> EvolutionState:
        return EvolutionState(
            SpectralField(self.group, self.truncation, self.u[j]),
            SpectralField(self.group, self.truncation, self.ut[j]),
            float(self.times[j]),
            params,
        )

    def norms(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return state_norms(self.u, self.ut, self.modes)

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        if len(self.times) != len(other.times) or not np.allclose(self.times, other.times, rtol=0, atol=1e-12):
            raise ValueError("trajectories live on different time grids")
        return Trajectory(self.group, self.truncation, self.times, self.u - other.u, self.ut - other.ut)

    def subsample(self, stride: int) -> "Trajectory":
        return Trajectory(self.group, self.truncation, self.times[::stride], self.u[::stride], self.ut[::stride])

    @classmethod
    def zeros(cls, group: GroupSpec, truncation: int, times) -> "Trajectory":
        times = np.asarray(times, dtype=float)
        m = len(mode_table(group, truncation))
        z = np.zeros((len(times), m), dtype=complex)
        return cls(group, truncation, times, z, z.copy())

    def save(self, path, **extra):
        np.savez(
            path,
            group=self.group.kind.value,
            truncation=self.truncation,
            times=self.times,
            u=self.u,
            ut=self.ut,
            **extra,
        )

    @classmethod
    def load(cls, path) -> tuple["Trajectory", dict]:
        with np.load(path, allow_pickle=False) as z:
            traj = cls(GroupSpec.from_name(str(z["group"])), int(z["truncation"]), z["times"], z["u"], z["ut"])
            extra = {k: z[k] for k in z.files if k not in {"group", "truncation", "times", "u", "ut"}}
        return traj, extra


def nonlinear_grid(group: GroupSpec, truncation: int, config: SemilinearConfig) -> QuadratureGrid:
    return quadrature_grid(group, truncation, config.dealias_oversample)


def power_samples(values: np.ndarray, p: float) -> np.ndarray:
    """|x|^p, computed as exp(p log|x|) with |x| < 1e-300 mapped to 0."""
    a = np.abs(values)
    if p == 2:
        return a * a
    out = np.zeros_like(a)
    nz = a >= TINY
    out[nz] = np.exp(p * np.log(a[nz]))
    return out


def nonlinearity_array(coeffs: np.ndarray, p: float, grid: QuadratureGrid, truncation: int) -> np.ndarray:
    """Coefficients of |u|^p for coefficient rows of shape (..., M)."""
    samples = synthesize_array(coeffs, grid, truncation, check=False)
    if not np.all(np.isfinite(samples)):
        raise BlowUpError("non-finite samples in the nonlinearity")
    return analyze_array(power_samples(samples, p), grid, truncation)


def nonlinearity(u: SpectralField, p: float, grid: QuadratureGrid) -> SpectralField:
    """|u|^p evaluated pointwise on ``grid`` and truncated back to u's modes."""
    if grid.group != u.group:
        raise ValueError(f"grid is for {grid.group}, field is on {u.group}")
    return SpectralField(u.group, u.truncation, nonlinearity_array(u.coeffs, p, grid, u.truncation))


def linear_trajectory(data: tuple[SpectralField, SpectralField], params: EvolutionParams,
                      times) -> Trajectory:
    u0, u1 = data
    u, ut = evolve_coefficients(u0.coeffs, u1.coeffs, times, params, u0.modes.eigenvalue_sq)
    return Trajectory(u0.group, u0.truncation, np.asarray(times, dtype=float), u, ut)


def _source_terms(u_traj: Trajectory, p: float, grid: QuadratureGrid) -> np.ndarray:
    out = np.empty_like(u_traj.u)
    for start in range(0, len(u_traj.times), _CHUNK):
        stop = start + _CHUNK
        try:
            out[start:stop] = nonlinearity_array(u_traj.u[start:stop], p, grid, u_traj.truncation)
        except BlowUpError as exc:
            bad = ~np.all(np.isfinite(u_traj.u[start:stop]), axis=1)
            t_bad = float(u_traj.times[start:stop][np.argmax(bad)]) if bad.any() else float(u_traj.times[start])
            raise BlowUpError(str(exc), t_bad) from None
    return out


def duhamel_term(sources: np.ndarray, times: np.ndarray, params: EvolutionParams,
                 lambda_sq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid approximation of int_0^t S(t - s) [0, F(s)] ds at every grid time."""
    n = len(times)
    wu = np.zeros_like(sources)
    wut = np.zeros_like(sources)
    if n == 1:
        return wu, wut
    dt = float(times[1] - times[0])
    a00, a01, a10, a11 = propagator_matrix(dt, params, lambda_sq)
    half = 0.5 * dt
    cur_u = np.zeros(sources.shape[1], dtype=complex)
    cur_ut = np.zeros(sources.shape[1], dtype=complex)
    for j in range(n - 1):
        vu = cur_u
        vut = cur_ut + half * sources[j]
        cur_u = a00 * vu + a01 * vut
        cur_ut = a10 * vu + a11 * vut + half * sources[j + 1]
        wu[j + 1] = cur_u
        wut[j + 1] = cur_ut
    return wu, wut


def apply_N(u_traj: Trajectory, data: tuple[SpectralField, SpectralField], params: EvolutionParams,
            config: SemilinearConfig, grid: QuadratureGrid | None = None,
            zero_nonlinearity: bool = False) -> Trajectory:
    """One application of the mild-solution operator to ``u_traj``.

    Both components come out together: the ut rows use the differentiated multipliers.
    ``zero_nonlinearity`` drops the integral term (consistency checks).
    """
    times = u_traj.times
    lin = linear_trajectory(data, params, times)
    if zero_nonlinearity:
        return lin
    if grid is None:
        grid = nonlinear_grid(u_traj.group, u_traj.truncation, config)
    sources = _source_terms(u_traj, config.p, grid)
    wu, wut = duhamel_term(sources, times, params, u_traj.modes.eigenvalue_sq)
    u = lin.u + wu
    ut = lin.ut + wut
    finite = np.all(np.isfinite(u), axis=1) & np.all(np.isfinite(ut), axis=1)
    if not finite.all():
        raise BlowUpError("non-finite Duhamel iterate", float(times[np.argmin(finite)]))
    return Trajectory(u_traj.group, u_traj.truncation, times, u, ut)


def xt_weights(times, params: EvolutionParams, weighting: str = "regularized") -> np.ndarray:
    if weighting not in ("regularized", "unregularized"):
        raise ValueError(f"unknown weighting {weighting!r}")
    return decay_function(times, params, regularized=(weighting == "regularized"))


def xt_norm(traj: Trajectory, params: EvolutionParams, weighting: str = "regularized") -> float:
    """sup_t d(t)^{-1} (||u|| + ||(-L)^{1/2} u|| + ||ut||) over the snapshot times.

    ``weighting="unregularized"`` uses the unregularized decay function; in the critical
    regime d(0) = 0, so snapshots with zero weight are left out of the sup.
    """
    n1, n2, n3 = traj.norms()
    total = n1 + n2 + n3
    w = np.atleast_1d(xt_weights(traj.times, params, weighting))
    keep = w > 0
    if not keep.any():
        return 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        vals = total[keep] / w[keep]
    if np.any(np.isnan(vals)):
        return float("inf")
    return float(np.max(vals))


@dataclass
class PicardReport:
    trajectory: Trajectory | None = field(repr=False)
    distances: list[float] = field(default_factory=list)
    contraction_factors: list[float] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    blowup_time: float | None = None
    message: str = ""
    residual: float | None = None
    xt_norm_solution: float | None = None
    xt_norm_solution_unregularized: float | None = None

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "distances": self.distances,
            "contraction_factors": self.contraction_factors,
            "blowup_time": self.blowup_time,
            "message": self.message,
            "residual": self.residual,
            "xt_norm_solution": self.xt_norm_solution,
            "xt_norm_solution_unregularized": self.xt_norm_solution_unregularized,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "distance", "contraction_factor"])
        for i, dist in enumerate(self.distances, start=1):
            rho = self.contraction_factors[i - 2] if i >= 2 else float("nan")
            w.writerow([i, f"{dist:.17g}", f"{rho:.17g}"])
        return buf.getvalue()


def save_checkpoint(path, traj: Trajectory, iteration: int, distances) -> None:
    traj.save(path, iteration=np.int64(iteration), distances=np.asarray(distances, dtype=float))


def load_checkpoint(path) -> tuple[Trajectory, int, list[float]]:
    traj, extra = Trajectory.load(path)
    return traj, int(extra["iteration"]), [float(x) for x in extra.get("distances", [])]


def picard_iterate(data: tuple[SpectralField, SpectralField], params: EvolutionParams,
                   config: SemilinearConfig, *, resume: tuple[Trajectory, int, list] | None = None,
                   checkpoint_path=None, check_residual: bool = False) -> PicardReport:
    """Iterate u <- N(u) from the linear solution until the X(T) step is below tolerance.

    Divergence (``divergence_patience`` consecutive contraction factors >= 1, or a
    blow-up signal) stops the run with ``converged=False`` and keeps the diagnostics.
    """
    u0 = data[0]
    config.check_exponent(u0.group)
    times = config.times()
    grid = nonlinear_grid(u0.group, u0.truncation, config)
    report = PicardReport(trajectory=None)

    if resume is None:
        current = linear_trajectory(data, params, times)
        start = 0
    else:
        current, start, report.distances = resume[0], resume[1], list(resume[2])
        report.contraction_factors = [
            b / a if a > 0 else 0.0 for a, b in zip(report.distances, report.distances[1:])
        ]

    growing = 0
    for it in range(start, config.picard_max_iter):
        try:
            nxt = apply_N(current, data, params, config, grid)
        except BlowUpError as exc:
            report.blowup_time = exc.time
            report.message = f"blow-up signal at t={exc.time}: {exc}"
            report.trajectory = current
            report.iterations = it
            return report
        dist = xt_norm(nxt - current, params)
        report.iterations = it + 1
        if not math.isfinite(dist):
            report.message = "X(T) distance is not finite"
            report.trajectory = nxt
            report.blowup_time = None
            return report
        if report.distances:
            prev = report.distances[-1]
            rho = dist / prev if prev > 0 else 0.0
            report.contraction_factors.append(rho)
            growing = growing + 1 if rho >= 1 else 0
        report.distances.append(dist)
        log.debug("picard iteration %d: distance %.3e", it + 1, dist)
        current = nxt
        if checkpoint_path is not None:
            save_checkpoint(checkpoint_path, current, report.iterations, report.distances)
        if dist < config.picard_tol:
            report.converged = True
            report.message = f"converged after {report.iterations} iterations"
            break
        if growing >= config.divergence_patience:
            report.message = f"diverging: contraction factor >= 1 for {growing} consecutive iterations"
            break
    else:
        report.message = f"no convergence within {config.picard_max_iter} iterations"

    report.trajectory = current
    report.xt_norm_solution = xt_norm(current, params)
    if params.regime() is Regime.CRITICAL:
        report.xt_norm_solution_unregularized = xt_norm(current, params, "unregularized")
    if check_residual and report.converged:
        report.residual = xt_norm(apply_N(current, data, params, config, grid) - current, params)
    return report


def scale_data(data, amplitude: float):
    """Rescale (u0, u1) so that ||u0||_{H^1} + ||u1||_{L^2} equals ``amplitude``."""
    norm = data_norm(*data)
    if norm == 0:
        raise ValueError("cannot rescale zero data")
    factor = amplitude / norm
    return data[0] * factor, data[1] * factor


@dataclass
class EpsilonSearch:
    epsilon0: float
    tested: list[tuple[float, bool]]


def estimate_epsilon0(base_data, params: EvolutionParams, config: SemilinearConfig,
                      growth_factor: float = 4.0, start: float = 1e-4, max_amplitude: float = 1e4,
                      bisection_steps: int = 6) -> EpsilonSearch:
    """Largest tested data size ||(u0,u1)||_{H^1 x L^2} for which Picard converges.

    Grows the amplitude geometrically from ``start`` until Picard fails, then bisects
    (geometric midpoints) between the last success and the first failure.
    """
    if data_norm(*base_data) == 0:
        raise ValueError("base data is zero; no smallness threshold to locate")
    if growth_factor <= 1:
        raise ValueError("growth_factor must exceed 1")
    tested: list[tuple[float, bool]] = []

    def converges(eps: float) -> bool:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ExponentWarning)
            with np.errstate(over="ignore", invalid="ignore"):
                ok = picard_iterate(scale_data(base_data, eps), params, config).converged
        tested.append((eps, ok))
        return ok

    if not converges(start):
        raise RuntimeError(f"Picard iteration diverges already at amplitude {start}; check the configuration")
    good, bad = start, None
    eps = start
    while eps < max_amplitude:
        eps = eps * growth_factor
        if converges(eps):
            good = eps
        else:
            bad = eps
            break
    if bad is None:
        return EpsilonSearch(good, tested)
    for _ in range(bisection_steps):
        mid = math.sqrt(good * bad)
        if converges(mid):
            good = mid
        else:
            bad = mid
    return EpsilonSearch(good, tested)


def decay_constants(traj: Trajectory, params: EvolutionParams, amplitude: float) -> dict[str, float]:
    """Per-norm smallest C with norm(t) <= C d(t) amplitude (regularized weight)."""
    w = xt_weights(traj.times, params)
    return {
        name: float(np.max(v / (w * amplitude)))
        for name, v in zip(("l2_u", "h1dot_u", "l2_ut"), traj.norms())
    }


def fitted_decay_rate(traj: Trajectory, window=(5.0, 20.0), which: str = "l2_u") -> float:
    names = ("l2_u", "h1dot_u", "l2_ut")
    norms = dict(zip(names, traj.norms()))
    if which == "sum":
        values = sum(norms.values())
    else:
        values = norms[which]
    sel = (traj.times >= window[0]) & (traj.times <= window[1])
    return fit_log_rate(traj.times[sel], values[sel])[0]


def contraction_ratio(u: Trajectory, v: Trajectory, params: EvolutionParams, config: SemilinearConfig,
                      grid: QuadratureGrid | None = None) -> float:
    """||Nu - Nv||_X / (||u - v||_X (||u||_X^{p-1} + ||v||_X^{p-1})); data cancel."""
    zero = SpectralField.zeros(u.group, u.truncation)
    nu = apply_N(u, (zero, zero), params, config, grid)
    nv = apply_N(v, (zero, zero), params, config, grid)
    num = xt_norm(nu - nv, params)
    den = xt_norm(u - v, params) * (xt_norm(u, params) ** (config.p - 1) + xt_norm(v, params) ** (config.p - 1))
    return num / den if den > 0 else 0.0


# ---------------------------------------------------------------------------
# d(t)^{-1} int_0^t d(t - s) d(s)^p ds


def weighted_integral(t, params: EvolutionParams, p: float, nodes: int = 200) -> np.ndarray:
    """Gauss quadrature value of d(t)^{-1} int_0^t d(t-s) d(s)^p ds (0 at t = 0).

    In the critical regime the factor s^p is absorbed into a Gauss-Jacobi weight,
    so non-integer p costs no accuracy at the s = 0 endpoint.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    rate = params.decay_rate()
    critical = params.regime() is Regime.CRITICAL
    if critical:
        x, w = roots_jacobi(nodes, 0.0, p)
    else:
        x, w = np.polynomial.legendre.leggauss(nodes)
    out = np.zeros_like(t)
    for i, ti in enumerate(t):
        if ti <= 0:
            continue
        s = 0.5 * ti * (x + 1)
        # d(t-s)/d(t) * d(s)^p, exponentials combined before evaluation
        integrand = np.exp(rate * (p - 1) * s)
        if critical:
            integrand = integrand * ((ti - s) / ti) * (0.5 * ti) ** p
        out[i] = 0.5 * ti * np.dot(w, integrand)
    return out


def weighted_integral_limit(params: EvolutionParams, p: float) -> float:
    """Closed-form sup over t >= 0 (approached as t -> infinity)."""
    mu = -params.decay_rate()
    if params.regime() is Regime.CRITICAL:
        return float(gamma_fn(p + 1) / ((p - 1) * mu) ** (p + 1))
    return 1.0 / ((p - 1) * mu)
