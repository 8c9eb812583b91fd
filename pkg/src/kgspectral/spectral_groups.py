"""Modes, Laplace-Beltrami eigenvalues and quadrature grids for the supported groups.

Supported groups are the flat tori T^1, T^2, T^3 (frequency vectors k, eigenvalue |k|^2)
and SU(2) restricted to central functions (levels k = 0, 1, ..., eigenvalue k(k+2),
representation dimension k + 1).  SU(2) uses the round unit 3-sphere metric; any other
bi-invariant metric rescales every eigenvalue by the same factor.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class GroupKind(str, enum.Enum):
    TORUS_D1 = "TorusD1"
    TORUS_D2 = "TorusD2"
    TORUS_D3 = "TorusD3"
    SU2_CENTRAL = "SU2Central"


_DIMENSION = {
    GroupKind.TORUS_D1: 1,
    GroupKind.TORUS_D2: 2,
    GroupKind.TORUS_D3: 3,
    GroupKind.SU2_CENTRAL: 3,
}


@dataclass(frozen=True)
class GroupSpec:
    """A concrete compact group.

    ``central_only`` is True for SU(2): fields on it are class functions and are
    expanded in characters only.
    """

    kind: GroupKind

    def __post_init__(self):
        object.__setattr__(self, "kind", GroupKind(self.kind))

    @property
    def topological_dimension(self) -> int:
        return _DIMENSION[self.kind]

    @property
    def is_torus(self) -> bool:
        return self.kind is not GroupKind.SU2_CENTRAL

    @property
    def central_only(self) -> bool:
        return self.kind is GroupKind.SU2_CENTRAL

    @property
    def torus_rank(self) -> int:
        """Number of circle factors (0 for SU(2))."""
        return _DIMENSION[self.kind] if self.is_torus else 0

    @classmethod
    def from_name(cls, name: str) -> "GroupSpec":
        return cls(GroupKind(name))

    def __str__(self):
        return self.kind.value


TORUS_D1 = GroupSpec(GroupKind.TORUS_D1)
TORUS_D2 = GroupSpec(GroupKind.TORUS_D2)
TORUS_D3 = GroupSpec(GroupKind.TORUS_D3)
SU2_CENTRAL = GroupSpec(GroupKind.SU2_CENTRAL)


@dataclass(frozen=True)
class Mode:
    index: tuple[int, ...]
    eigenvalue_sq: float
    rep_dimension: int


class ModeTable:
    """Ordered mode list with vectorised views (eigenvalues, dimensions, indices).

    Ordering: eigenvalue, then lexicographic index.  Immutable after construction.
    """

    def __init__(self, group: GroupSpec, truncation: int):
        if truncation < 0:
            raise ValueError(f"truncation must be >= 0, got {truncation}")
        self.group = group
        self.truncation = int(truncation)
        K = self.truncation
        if group.is_torus:
            idx = list(itertools.product(range(-K, K + 1), repeat=group.torus_rank))
            idx.sort(key=lambda k: (sum(c * c for c in k), k))
            self._indices = np.array(idx, dtype=np.int64).reshape(len(idx), group.torus_rank)
            self.eigenvalue_sq = np.sum(self._indices**2, axis=1).astype(float)
            self.rep_dimension = np.ones(len(idx), dtype=np.int64)
        else:
            levels = np.arange(K + 1, dtype=np.int64)
            self._indices = levels.reshape(-1, 1)
            self.eigenvalue_sq = (levels * (levels + 2)).astype(float)
            self.rep_dimension = levels + 1
        self._indices.setflags(write=False)
        self.eigenvalue_sq.setflags(write=False)
        self.rep_dimension.setflags(write=False)
        self._position = {tuple(int(c) for c in row): i for i, row in enumerate(self._indices)}

    def __len__(self):
        return len(self.eigenvalue_sq)

    def __iter__(self):
        return iter(self.modes)

    def __eq__(self, other):
        return (
            isinstance(other, ModeTable)
            and self.group == other.group
            and self.truncation == other.truncation
        )

    def __hash__(self):
        return hash((self.group, self.truncation))

    @property
    def indices(self) -> np.ndarray:
        """Integer array of shape (M, r); r = torus rank, or 1 (the level) for SU(2)."""
        return self._indices

    @cached_property
    def modes(self) -> list[Mode]:
        return [
            Mode(self.index_of(i), float(lam), int(d))
            for i, (lam, d) in enumerate(zip(self.eigenvalue_sq, self.rep_dimension))
        ]

    @cached_property
    def plancherel_weight(self) -> np.ndarray:
        """d_xi * ||c I_{d_xi}||_HS^2 / |c|^2 = d_xi^2 for the scalar storage convention."""
        w = self.rep_dimension.astype(float) ** 2
        w.setflags(write=False)
        return w

    def index_of(self, position: int) -> tuple[int, ...]:
        row = self._indices[position]
        return tuple(int(c) for c in row)

    def position(self, index) -> int:
        if isinstance(index, (int, np.integer)):
            index = (int(index),)
        try:
            return self._position[tuple(int(c) for c in index)]
        except KeyError:
            raise KeyError(f"mode {index} not in {self.group} truncation {self.truncation}") from None

    @cached_property
    def conjugate_position(self) -> np.ndarray:
        """Position of the mode -k for each k (identity for SU(2) characters)."""
        if not self.group.is_torus:
            return np.arange(len(self))
        return np.array([self._position[tuple(-int(c) for c in row)] for row in self._indices])

    def to_csv_rows(self):
        for mode in self.modes:
            yield (" ".join(str(c) for c in mode.index), repr(mode.eigenvalue_sq), mode.rep_dimension)


_TABLE_CACHE: dict[tuple[GroupSpec, int], ModeTable] = {}


def mode_table(group: GroupSpec, truncation: int) -> ModeTable:
    key = (group, int(truncation))
    table = _TABLE_CACHE.get(key)
    if table is None:
        table = _TABLE_CACHE[key] = ModeTable(group, truncation)
    return table


def enumerate_modes(group: GroupSpec, truncation: int) -> list[Mode]:
    """All modes with max-norm frequency (tori) or level (SU(2)) at most ``truncation``."""
    return list(mode_table(group, truncation).modes)


def default_oversample(p: float | None = None) -> int:
    """Linear oversampling factor for a semilinear run with exponent ``p``.

    ceil((p + 1) / 2) makes the grid alias-free for integer p; p in (2, 3] is bumped
    to 3 since fractional powers are not band-limited.
    """
    if p is None:
        return 2
    s = max(2, math.ceil((p + 1) / 2))
    if 2 < p <= 3:
        s = max(s, 3)
    return s


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Spatial sample points with normalized Haar weights.

    For tori ``points`` has shape (N**r, r) in C order over an ``(N,)*r`` tensor grid;
    for SU(2) ``points`` are class angles in (0, pi).
    """

    group: GroupSpec
    points: np.ndarray
    weights: np.ndarray
    n_per_axis: int

    @property
    def shape(self) -> tuple[int, ...]:
        if self.group.is_torus:
            return (self.n_per_axis,) * self.group.torus_rank
        return (self.n_per_axis,)

    @property
    def size(self) -> int:
        return len(self.weights)

    def integrate(self, samples) -> float | complex:
        return np.dot(self.weights, np.asarray(samples).reshape(self.size))


def grid_points_per_axis(group: GroupSpec, truncation: int, oversample: int = 2) -> int:
    if oversample < 1:
        raise ValueError("oversample must be >= 1")
    K = int(truncation)
    if group.is_torus:
        # N >= 2K + 1 integrates products of two modes exactly; the factor gives headroom
        # for pointwise nonlinearities of order ~ 2 * oversample - 1.
        return max(2 * oversample * (K + 1), 2 * K + 1)
    # midpoint rule in theta is exact for cos(j theta), j < 2N
    return oversample * (K + 1) + 1


def quadrature_grid(group: GroupSpec, truncation: int, oversample: int = 2) -> QuadratureGrid:
    N = grid_points_per_axis(group, truncation, oversample)
    if group.is_torus:
        r = group.torus_rank
        axis = 2 * np.pi * np.arange(N) / N
        mesh = np.meshgrid(*([axis] * r), indexing="ij")
        points = np.stack([m.reshape(-1) for m in mesh], axis=1)
        weights = np.full(N**r, 1.0 / N**r)
    else:
        theta = np.pi * (np.arange(N) + 0.5) / N
        points = theta
        weights = (2.0 / N) * np.sin(theta) ** 2
        # the exact sum is 1 for N >= 2; renormalize the last ulp away
        weights = weights / math.fsum(weights)
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureGrid(group, points, weights, N)


def su2_character(level, theta):
    """sin((k+1) theta) / sin(theta) with the limit k + 1 at theta = 0 (and (-1)^k (k+1) at pi)."""
    level = np.asarray(level)
    theta = np.asarray(theta, dtype=float)
    s = np.sin(theta)
    near0 = np.abs(s) < 1e-8
    with np.errstate(invalid="ignore", divide="ignore"):
        val = np.sin((level + 1) * theta) / s
    if np.any(near0):
        # second-order expansion around theta = 0 or pi
        c = np.cos(theta)
        sign = np.where(c > 0, 1.0, (-1.0) ** level)
        h = np.where(c > 0, theta, np.pi - theta)
        limit = sign * (level + 1) * (1 - (level * (level + 2)) * h**2 / 6)
        val = np.where(near0, limit, val)
    return val


def evaluate_basis(group: GroupSpec, mode: Mode, point):
    """Basis function of ``mode`` at ``point``.

    Tori: e^{i k.x} (complex).  SU(2): the level-k character at class angle theta (real).
    """
    if group.is_torus:
        x = np.asarray(point, dtype=float)
        k = np.asarray(mode.index, dtype=float)
        return np.exp(1j * (x @ k if x.ndim > 1 else np.dot(k, x)))
    return su2_character(mode.index[0], point)


def basis_matrix(group: GroupSpec, truncation: int, grid: QuadratureGrid) -> np.ndarray:
    """Basis values, shape (grid.size, M)."""
    table = mode_table(group, truncation)
    if group.is_torus:
        return np.exp(1j * (grid.points @ table.indices.T.astype(float)))
    return su2_character(table.indices[:, 0][None, :], grid.points[:, None])
