"""Empirical probe of ||f||_q <~ ||f||_{H^1}^theta ||f||_2^(1-theta), theta = n (1/2 - 1/q)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .fourier import SpectralField, homogeneous_sobolev_norm, plancherel_l2_norm, synthesize_array
from .spectral_groups import QuadratureGrid


class InadmissibleExponent(ValueError):
    pass


def critical_exponent(n: int) -> float:
    """2n/(n-2), the largest admissible q."""
    if n < 3:
        raise InadmissibleExponent(f"the inequality is used for n >= 3, got n={n}")
    return 2 * n / (n - 2)


def theta(n: int, q: float) -> float:
    if n < 3:
        raise InadmissibleExponent(f"n must be >= 3, got {n}")
    if not (2 <= q <= critical_exponent(n)):
        raise InadmissibleExponent(f"q={q} outside [2, {critical_exponent(n):g}] for n={n}")
    return n * (0.5 - 1.0 / q)


def lq_norm(field: SpectralField, q: float, grid: QuadratureGrid) -> float:
    """(sum_i w_i |f(x_i)|^q)^(1/q) on the synthesized samples."""
    if q < 1:
        raise ValueError("q must be >= 1")
    samples = synthesize_array(field.coeffs, grid, field.truncation)
    a = np.abs(samples)
    peak = float(a.max(initial=0.0))
    if peak == 0:
        return 0.0
    # factor out the peak so a^q cannot underflow or overflow
    return peak * float(np.dot(grid.weights, (a / peak) ** q)) ** (1.0 / q)


def gn_ratio(field: SpectralField, n: int, q: float, grid: QuadratureGrid) -> tuple[float, float, float, float]:
    """(||f||_q, ||f||_{H^1}, ||f||_2, ratio) with ratio = ||f||_q / (||f||_{H^1}^th ||f||_2^(1-th))."""
    th = theta(n, q)
    l2 = plancherel_l2_norm(field)
    h1 = l2 + homogeneous_sobolev_norm(field, 1.0)
    lq = lq_norm(field, q, grid)
    if l2 == 0:
        return lq, h1, l2, float("nan")
    return lq, h1, l2, lq / (h1**th * l2 ** (1 - th))


@dataclass
class GNReport:
    n: int
    q: float
    theta: float
    samples: list = field(default_factory=list, repr=False)
    max_ratio: float = float("nan")
    skipped: int = 0

    def summary(self) -> dict:
        out = asdict(self)
        out.pop("samples")
        out["count"] = len(self.samples)
        return out

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lq_norm", "h1_norm", "l2_norm", "ratio"])
        for row in self.samples:
            w.writerow([f"{x:.17g}" for x in row])
        return buf.getvalue()


def check_gn(fields, n: int, q: float, grid: QuadratureGrid) -> GNReport:
    """GN ratios for every nonzero field; zero fields are skipped."""
    fields = list(fields)
    for f in fields:
        if f.group.topological_dimension != n:
            raise ValueError(f"field on {f.group} has dimension {f.group.topological_dimension}, not {n}")
    report = GNReport(n=n, q=q, theta=theta(n, q))
    for f in fields:
        row = gn_ratio(f, n, q, grid)
        if math.isnan(row[3]):
            report.skipped += 1
            continue
        report.samples.append(row)
    if report.samples:
        report.max_ratio = max(r[3] for r in report.samples)
    return report
