"""Analysis/synthesis between grid samples and Fourier coefficients, Plancherel norms.

One scalar coefficient ``c`` is stored per mode: the group Fourier coefficient is
``c * I_d``.  For tori this is the usual Fourier coefficient; for SU(2) central
functions ``f = sum_k d_k c_k chi_k``.  Plancherel then reads
``||f||^2 = sum d^2 |c|^2``.

Tori are transformed with FFTs on the uniform tensor grid, SU(2) with a dense
character matrix (levels are few).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from .spectral_groups import (
    GroupSpec,
    ModeTable,
    QuadratureGrid,
    basis_matrix,
    mode_table,
)

IMAG_RESIDUE_TOL = 1e-12


class TransformError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SpectralField:
    group: GroupSpec
    truncation: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        n = len(mode_table(self.group, self.truncation))
        if c.shape != (n,):
            raise TransformError(
                f"expected {n} coefficients for {self.group} K={self.truncation}, got shape {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def modes(self) -> ModeTable:
        return mode_table(self.group, self.truncation)

    @classmethod
    def zeros(cls, group: GroupSpec, truncation: int) -> "SpectralField":
        return cls(group, truncation, np.zeros(len(mode_table(group, truncation)), dtype=complex))

    @classmethod
    def from_dict(cls, group: GroupSpec, truncation: int, entries: dict) -> "SpectralField":
        table = mode_table(group, truncation)
        c = np.zeros(len(table), dtype=complex)
        for index, value in entries.items():
            c[table.position(index)] = value
        return cls(group, truncation, c)

    def coeff(self, index) -> complex:
        return complex(self.coeffs[self.modes.position(index)])

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return {m.index: complex(c) for m, c in zip(self.modes, self.coeffs)}

    def _check_compatible(self, other: "SpectralField"):
        if self.group != other.group or self.truncation != other.truncation:
            raise TransformError(
                f"incompatible fields: {self.group}/K={self.truncation} vs {other.group}/K={other.truncation}"
            )

    def __add__(self, other):
        self._check_compatible(other)
        return SpectralField(self.group, self.truncation, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check_compatible(other)
        return SpectralField(self.group, self.truncation, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SpectralField(self.group, self.truncation, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.group, self.truncation, -self.coeffs)

    def hermitian_defect(self) -> float:
        """max |c(-k) - conj(c(k))| for tori, max |Im c| for SU(2)."""
        c = self.coeffs
        if self.group.is_torus:
            return float(np.max(np.abs(c[self.modes.conjugate_position] - np.conj(c)), initial=0.0))
        return float(np.max(np.abs(c.imag), initial=0.0))

    def to_json_dict(self) -> dict:
        return {
            "group": self.group.kind.value,
            "K": self.truncation,
            "entries": [
                [list(m.index), float(c.real), float(c.imag)] for m, c in zip(self.modes, self.coeffs)
            ],
        }

    def to_json(self) -> str:
        # json emits repr(float): shortest string that round-trips exactly
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, data: dict) -> "SpectralField":
        group = GroupSpec.from_name(data["group"])
        K = int(data["K"])
        table = mode_table(group, K)
        c = np.zeros(len(table), dtype=complex)
        for index, re, im in data["entries"]:
            c[table.position(tuple(index))] = complex(re, im)
        return cls(group, K, c)

    @classmethod
    def from_json(cls, text: str) -> "SpectralField":
        return cls.from_json_dict(json.loads(text))


# ---------------------------------------------------------------------------
# transforms on raw coefficient arrays (leading batch axes allowed)


@lru_cache(maxsize=64)
def _fft_positions(group: GroupSpec, truncation: int, n: int) -> tuple[np.ndarray, ...]:
    table = mode_table(group, truncation)
    if n < 2 * truncation + 1:
        raise TransformError(f"grid with {n} points per axis cannot resolve K={truncation}")
    return tuple(np.mod(table.indices[:, a], n) for a in range(group.torus_rank))


@lru_cache(maxsize=16)
def _su2_mats(truncation: int, grid: QuadratureGrid):
    table = mode_table(grid.group, truncation)
    B = basis_matrix(grid.group, truncation, grid)  # (N, M) real characters
    d = table.rep_dimension.astype(float)
    analysis = (B * grid.weights[:, None]).T / d[:, None]  # (M, N)
    synthesis = B * d[None, :]  # (N, M)
    return analysis, synthesis


def _check_grid(group: GroupSpec, grid: QuadratureGrid):
    if grid.group != group:
        raise TransformError(f"grid is for {grid.group}, field is on {group}")


def analyze_array(samples: np.ndarray, grid: QuadratureGrid, truncation: int) -> np.ndarray:
    """Coefficients of real samples; ``samples`` has shape (..., grid.size) or (..., *grid.shape)."""
    group = grid.group
    samples = np.asarray(samples, dtype=float)
    lead = _lead_shape(samples, grid)
    if group.is_torus:
        pos = _fft_positions(group, truncation, grid.n_per_axis)
        arr = samples.reshape(lead + grid.shape)
        axes = tuple(range(len(lead), arr.ndim))
        spec = scipy.fft.fftn(arr, axes=axes, norm="forward")
        c = spec[(Ellipsis,) + pos]
        table = mode_table(group, truncation)
        return 0.5 * (c + np.conj(c[..., table.conjugate_position]))
    analysis, _ = _su2_mats(truncation, grid)
    flat = samples.reshape(lead + (grid.size,))
    return (flat @ analysis.T).astype(complex)


def synthesize_array(coeffs: np.ndarray, grid: QuadratureGrid, truncation: int,
                     check: bool = True) -> np.ndarray:
    """Real samples of shape (..., grid.size) from coefficients of shape (..., M)."""
    group = grid.group
    coeffs = np.asarray(coeffs, dtype=complex)
    lead = coeffs.shape[:-1]
    if group.is_torus:
        pos = _fft_positions(group, truncation, grid.n_per_axis)
        spec = np.zeros(lead + grid.shape, dtype=complex)
        spec[(Ellipsis,) + pos] = coeffs
        axes = tuple(range(len(lead), spec.ndim))
        vals = scipy.fft.ifftn(spec, axes=axes, norm="forward").reshape(lead + (grid.size,))
    else:
        _, synthesis = _su2_mats(truncation, grid)
        vals = coeffs @ synthesis.T
    if check:
        scale = max(1.0, float(np.max(np.sum(np.abs(coeffs), axis=-1), initial=0.0)))
        residue = float(np.max(np.abs(vals.imag), initial=0.0))
        if residue > IMAG_RESIDUE_TOL * scale:
            raise TransformError(
                f"imaginary residue {residue:.3e} after synthesis: coefficients are not Hermitian-symmetric"
            )
    return np.ascontiguousarray(vals.real)


def _lead_shape(samples: np.ndarray, grid: QuadratureGrid) -> tuple[int, ...]:
    if samples.shape[-1:] == (grid.size,):
        return samples.shape[:-1]
    if samples.shape[-len(grid.shape):] == grid.shape:
        return samples.shape[: samples.ndim - len(grid.shape)]
    raise TransformError(f"samples of shape {samples.shape} do not match grid of {grid.size} points {grid.shape}")


# ---------------------------------------------------------------------------
# public operations


def analyze(samples, grid: QuadratureGrid, truncation: int) -> SpectralField:
    """Quadrature approximation of the Fourier coefficients up to ``truncation``.

    Exact (to rounding) for fields band-limited to the grid's resolution.
    """
    samples = np.asarray(samples)
    if samples.size != grid.size:
        raise TransformError(f"got {samples.size} samples for a grid of {grid.size} points")
    return SpectralField(grid.group, truncation, analyze_array(samples.reshape(grid.size), grid, truncation))


def synthesize(field: SpectralField, grid: QuadratureGrid) -> np.ndarray:
    _check_grid(field.group, grid)
    return synthesize_array(field.coeffs, grid, field.truncation)


def plancherel_sq(coeffs: np.ndarray, table: ModeTable, lam_power: float = 0.0) -> np.ndarray:
    """sum_xi d^2 lambda^{2 s} |c|^2 along the last axis."""
    w = table.plancherel_weight
    if lam_power:
        w = w * np.where(table.eigenvalue_sq > 0, table.eigenvalue_sq, 0.0) ** lam_power
    return np.sum(w * (coeffs.real**2 + coeffs.imag**2), axis=-1)


def plancherel_l2_norm(field: SpectralField) -> float:
    return math.sqrt(float(plancherel_sq(field.coeffs, field.modes)))


def homogeneous_sobolev_norm(field: SpectralField, s: float) -> float:
    """||(-L)^{s/2} f||_{L^2}; s = 0 gives the L^2 norm."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0:
        return plancherel_l2_norm(field)
    return math.sqrt(float(plancherel_sq(field.coeffs, field.modes, lam_power=s)))


def sobolev_norm(field: SpectralField, s: float) -> float:
    """||f||_{H^s} = ||f||_{L^2} + ||(-L)^{s/2} f||_{L^2}."""
    return plancherel_l2_norm(field) + homogeneous_sobolev_norm(field, s)


def quadrature_l2_norm(samples, grid: QuadratureGrid) -> float:
    samples = np.asarray(samples).reshape(grid.size)
    return math.sqrt(float(np.dot(grid.weights, np.abs(samples) ** 2)))


def random_field(group: GroupSpec, truncation: int, rng: np.random.Generator,
                 decay_exponent: float = 1.0) -> SpectralField:
    """Real band-limited Gaussian field; coefficient variance (1 + lambda^2)^(-r)."""
    table = mode_table(group, truncation)
    std = (1.0 + table.eigenvalue_sq) ** (-decay_exponent / 2)
    if group.is_torus:
        raw = rng.standard_normal(len(table)) + 1j * rng.standard_normal(len(table))
        c = 0.5 * (raw + np.conj(raw[table.conjugate_position])) * std
    else:
        c = rng.standard_normal(len(table)) * std + 0j
    return SpectralField(group, truncation, c)
