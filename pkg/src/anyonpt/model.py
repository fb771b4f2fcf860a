"""Grids, parameters, complex potentials and the discretized drift Hamiltonian.

Everything downstream works with the moving-frame operator

    H_eff = -exp(-i phi) d^2/dx^2 + exp(-i phi) V(x) + i v d/dx

in nondimensional units (hbar = 1, 2m = 1).  The anyonic phase ``phi``
rotates a PT-symmetric operator in the complex plane; the drift velocity
``v`` enters through the first-derivative term picked up by the Galilean
boost into the frame co-moving with the potential.

All types here are immutable value objects and every operation is pure,
so instances can be shared freely across threads and sweep workers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ContractError, DomainError

__all__ = [
    "Grid",
    "AnyonicParams",
    "GaugeFactors",
    "PoschlTeller",
    "Tabulated",
    "PotentialSpec",
    "WaveFunction",
    "HamiltonianMatrix",
    "default_grid",
    "eval_potential",
    "check_pt_condition",
    "build_h_eff",
    "check_anyonic_symmetry",
    "inner",
    "trapz",
]

# |x| beyond which sech-type profiles underflow double precision anyway.
_SECH_CUTOFF = 350.0


@dataclass(frozen=True)
class Grid:
    """Uniform spatial grid on [x_min, x_max] with cell-centered samples.

    Samples sit at ``x_min + (j + 1/2) dx`` with ``dx = (x_max - x_min) / n_points``,
    so a grid symmetric about the origin maps exactly onto itself under index
    reversal ``j -> n - 1 - j``.  That alignment is what makes the parity checks
    below exact for both Dirichlet and periodic operators.
    """

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (self.x_min < self.x_max):
            raise ContractError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if self.n_points < 16:
            raise ContractError(f"n_points must be >= 16, got {self.n_points}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @cached_property
    def x(self) -> np.ndarray:
        # Centered construction keeps reflection bitwise-exact on symmetric
        # grids: x[n-1-j] == -x[j] when x_min == -x_max.
        center = 0.5 * (self.x_min + self.x_max)
        x = center + (np.arange(self.n_points) - 0.5 * (self.n_points - 1)) * self.dx
        x.flags.writeable = False
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """FFT wavenumbers matching ``np.fft.fft`` ordering."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)
        k.flags.writeable = False
        return k

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return abs(self.x_min + self.x_max) < tol

    def scaled(self, extent_factor: float = 2.0, point_factor: float = 2.0) -> "Grid":
        """Wider copy of this grid (used when localization lengths blow up)."""
        return Grid(
            self.x_min * extent_factor,
            self.x_max * extent_factor,
            int(round(self.n_points * point_factor)),
        )


def default_grid() -> Grid:
    """Grid that resolves unit-width sech^2 features and their bound-state tails."""
    return Grid(-40.0, 40.0, 2048)


@dataclass(frozen=True)
class AnyonicParams:
    """Anyonic phase phi in [0, pi/2] and drift velocity v."""

    phi: float
    v: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.phi <= math.pi / 2 + 1e-15):
            raise DomainError(f"phi must lie in [0, pi/2], got {self.phi}")
        if not (math.isfinite(self.phi) and math.isfinite(self.v)):
            raise DomainError("phi and v must be finite")


@dataclass(frozen=True)
class GaugeFactors:
    """Gauge constants alpha = (v/2) e^{i phi}, beta = -(v^2/4) e^{i phi}.

    The substitution psi = phi_stat * exp(i alpha x - i beta t) removes the
    drift term from H_eff; for phi != 0 the factor exp(i alpha x) is unbounded,
    which is the mechanism behind every delocalization effect in this package.
    """

    alpha: complex
    beta: complex

    @classmethod
    def from_params(cls, params: AnyonicParams) -> "GaugeFactors":
        rot = complex(math.cos(params.phi), math.sin(params.phi))
        return cls(alpha=0.5 * params.v * rot, beta=-0.25 * params.v**2 * rot)


def _sech_complex(x: np.ndarray, delta: float) -> np.ndarray:
    """sech(x - i delta) evaluated without cancellation or overflow.

    Uses cosh(x - i d) = cosh x cos d - i sinh x sin d and flushes the
    underflowed far tails to zero instead of letting cosh overflow.
    """
    x = np.asarray(x, dtype=float)
    xc = np.clip(x, -_SECH_CUTOFF, _SECH_CUTOFF)
    ch = np.cosh(xc) * math.cos(delta) - 1j * np.sinh(xc) * math.sin(delta)
    bad = np.abs(ch) < 1e-12
    if np.any(bad):
        raise DomainError("potential pole within 1e-12 of the sampling point")
    out = 1.0 / ch
    out = np.where(np.abs(x) > _SECH_CUTOFF, 0.0 + 0.0j, out)
    return out


@dataclass(frozen=True)
class PoschlTeller:
    """sech^2 well or barrier with a constant imaginary coordinate shift.

    ``V(x) = amplitude / cosh^2(x - i delta)`` where ``amplitude`` is
    ``-nu (nu + 1)`` for the well, or the explicit ``v0`` when given
    (positive v0 = barrier).  PT symmetry V(-x) = V*(x) holds for any real
    delta; the operator stays in the unbroken phase for |delta| < pi/2.
    """

    nu: float = 1.0
    delta: float = 0.0
    v0: float | None = None

    def __post_init__(self):
        if self.v0 is None and not self.nu > 0:
            raise DomainError(f"well strength nu must be positive, got {self.nu}")
        if not abs(self.delta) < math.pi / 2:
            raise DomainError(f"|delta| must be < pi/2 to stay pole-free, got {self.delta}")

    @property
    def amplitude(self) -> float:
        return self.v0 if self.v0 is not None else -self.nu * (self.nu + 1.0)

    def __call__(self, x) -> np.ndarray:
        scalar = np.isscalar(x)
        s = _sech_complex(np.atleast_1d(np.asarray(x, dtype=float)), self.delta)
        v = self.amplitude * s * s
        return complex(v[0]) if scalar else v


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Complex potential given by grid-aligned samples.

    Off-grid evaluation interpolates linearly in the real and imaginary
    parts and returns 0 outside the tabulated range (short-range tails
    are assumed, as everywhere in this package).
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.grid.n_points,):
            raise ContractError(
                f"need {self.grid.n_points} samples, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("tabulated potential contains non-finite samples")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "Tabulated":
        """Load from a 3-column CSV (x, Re V, Im V) with a header row."""
        path = Path(path)
        with path.open() as fh:
            header = fh.readline()
            if any(ch.isdigit() for ch in header.split(",")[0].strip()):
                raise ContractError(f"{path}: first row must be a header")
            data = np.loadtxt(fh, delimiter=",", dtype=float, ndmin=2)
        if data.shape[1] != 3:
            raise ContractError(f"{path}: expected 3 columns (x, re, im), got {data.shape[1]}")
        x = data[:, 0]
        dxs = np.diff(x)
        if len(x) < 16 or not np.allclose(dxs, dxs[0], rtol=1e-8, atol=1e-12):
            raise ContractError(f"{path}: x column must be a uniform grid with >= 16 points")
        dx = float(dxs[0])
        grid = Grid(float(x[0]) - dx / 2, float(x[-1]) + dx / 2, len(x))
        return cls(grid=grid, values=data[:, 1] + 1j * data[:, 2])

    def __call__(self, x) -> np.ndarray:
        scalar = np.isscalar(x)
        xq = np.atleast_1d(np.asarray(x, dtype=float))
        xs = self.grid.x
        re = np.interp(xq, xs, self.values.real, left=0.0, right=0.0)
        im = np.interp(xq, xs, self.values.imag, left=0.0, right=0.0)
        v = re + 1j * im
        return complex(v[0]) if scalar else v


PotentialSpec = Union[PoschlTeller, Tabulated]


def eval_potential(spec: PotentialSpec, x):
    """Evaluate a potential at a point or array of points."""
    return spec(x)


def trapz(values: np.ndarray, dx: float) -> float:
    """Trapezoidal quadrature, the integration rule used throughout."""
    return float(np.trapezoid(values, dx=dx))


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex field sampled on a grid, with trapezoidal L2 geometry."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.grid.n_points,):
            raise ContractError(
                f"values length {vals.shape} does not match grid ({self.grid.n_points})"
            )
        if not np.all(np.isfinite(vals)):
            raise ContractError("wave function contains non-finite samples")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def norm_squared(self) -> float:
        return trapz(np.abs(self.values) ** 2, self.grid.dx)

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def normalized(self) -> "WaveFunction":
        n = self.norm()
        if n == 0.0:
            raise DomainError("cannot normalize the zero function")
        return WaveFunction(self.grid, self.values / n)

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def centroid(self) -> float:
        rho = self.density()
        n2 = trapz(rho, self.grid.dx)
        return trapz(self.grid.x * rho, self.grid.dx) / n2


def inner(bra: WaveFunction, ket: WaveFunction) -> complex:
    """L2 inner product <bra|ket> = integral conj(bra) ket dx."""
    if bra.grid != ket.grid:
        raise ContractError("inner product requires a common grid")
    return complex(np.trapezoid(np.conj(bra.values) * ket.values, dx=bra.grid.dx))


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Dense discretization of H_eff with second-order central differences.

    Off-diagonal stencil weights are -exp(-i phi)/dx^2 from the kinetic term
    plus the antisymmetric +/- i v/(2 dx) drift pair.  ``boundary`` is either
    "dirichlet" (field clamped beyond the ends) or "periodic" (wrap-around
    couplings).  The drift velocity is kept on the object because the anyonic
    symmetry check needs to treat the drift block separately.
    """

    grid: Grid
    entries: np.ndarray
    boundary: str
    phi: float
    v: float

    def __post_init__(self):
        ent = np.asarray(self.entries, dtype=complex)
        n = self.grid.n_points
        if ent.shape != (n, n):
            raise ContractError(f"matrix shape {ent.shape} does not match grid ({n})")
        if self.boundary not in ("dirichlet", "periodic"):
            raise ContractError(f"unknown boundary {self.boundary!r}")
        ent = ent.copy()
        ent.flags.writeable = False
        object.__setattr__(self, "entries", ent)

    @property
    def dim(self) -> int:
        return self.grid.n_points

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.abs(self.entries).max()))
        return bool(np.abs(self.entries - self.entries.conj().T).max() < tol * scale)

    def adjoint_entries(self) -> np.ndarray:
        return self.entries.conj().T


def _drift_matrix(grid: Grid, v: float, boundary: str) -> np.ndarray:
    """i v D1 with central differences (antisymmetric stencil)."""
    n = grid.n_points
    c = 1j * v / (2.0 * grid.dx)
    d = np.zeros((n, n), dtype=complex)
    idx = np.arange(n - 1)
    d[idx, idx + 1] = c
    d[idx + 1, idx] = -c
    if boundary == "periodic":
        d[-1, 0] = c
        d[0, -1] = -c
    return d


def build_h_eff(
    spec: PotentialSpec,
    params: AnyonicParams,
    grid: Grid,
    boundary: str = "dirichlet",
) -> HamiltonianMatrix:
    """Assemble the dense moving-frame Hamiltonian on the given grid.

    -exp(-i phi) d^2/dx^2 and exp(-i phi) V(x) use the three-point Laplacian;
    the drift i v d/dx uses central first differences, which keeps the
    transpose structure that the symmetry checks rely on.
    """
    if grid.dx > 0.1:
        warnings.warn(
            f"dx = {grid.dx:.3g} exceeds the recommended 0.1 for sech^2-scale potentials",
            stacklevel=2,
        )
    n = grid.n_points
    rot = complex(math.cos(params.phi), -math.sin(params.phi))  # exp(-i phi)
    vvals = np.asarray(spec(grid.x), dtype=complex)

    h = np.zeros((n, n), dtype=complex)
    idx = np.arange(n)
    h[idx, idx] = 2.0 * rot / grid.dx**2 + rot * vvals
    off = -rot / grid.dx**2
    h[idx[:-1], idx[:-1] + 1] = off
    h[idx[:-1] + 1, idx[:-1]] = off
    if boundary == "periodic":
        h[0, -1] = off
        h[-1, 0] = off
    h += _drift_matrix(grid, params.v, boundary)
    return HamiltonianMatrix(grid=grid, entries=h, boundary=boundary, phi=params.phi, v=params.v)


def check_pt_condition(spec: PotentialSpec, grid: Grid, tol: float = 1e-12) -> bool:
    """True iff max_x |V(-x) - V*(x)| < tol on the grid.

    Requires a grid symmetric about the origin so that reflection is exact.
    """
    if not grid.is_symmetric():
        raise ContractError("PT check needs a grid symmetric about x = 0")
    v = np.asarray(spec(grid.x), dtype=complex)
    return bool(np.abs(v[::-1] - np.conj(v)).max() < tol)


def check_anyonic_symmetry(h: HamiltonianMatrix, phi: float, tol: float = 1e-10) -> bool:
    """Verify (PK) H (PK) = e^{2 i phi} H entrywise, P = index reversal, K = conjugation.

    The drift block i v D1 is invariant (not phase-rotated) under PK, so the
    identity is checked on the rotated part H - i v D1 while the drift block is
    verified to be PT-even.  Together these are the matrix form of the anyonic
    commutation relation for the full drifting operator.
    """
    if not h.grid.is_symmetric():
        raise ContractError("symmetry check needs a grid symmetric about x = 0")
    drift = _drift_matrix(h.grid, h.v, h.boundary)
    rotated = h.entries - drift

    def pk(m: np.ndarray) -> np.ndarray:
        return np.conj(m[::-1, ::-1])

    factor = complex(math.cos(2 * phi), math.sin(2 * phi))
    scale = max(1.0, float(np.abs(rotated).max()))
    ok_rot = np.abs(pk(rotated) - factor * rotated).max() < tol * scale
    ok_drift = np.abs(pk(drift) - drift).max() < tol * max(1.0, float(np.abs(drift).max()))
    return bool(ok_rot and ok_drift)
