"""Shared domain types: equation parameters, parabolic cylinders, grid functions.

A parabolic cylinder Q_r(x, t) is the set B_r(x) x [t - r^beta, t].  Spatial
membership is the *open* Euclidean ball; the time slab is closed on both ends
(with a tiny relative tolerance so that nodes sitting exactly on a slab
endpoint are kept regardless of rounding).  Oscillations are evaluated over
grid nodes only, with no interpolation.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, EmptyIntersection

_TIME_TOL = 1e-12


@dataclass(frozen=True)
class EquationParams:
    """Exponents and coefficients (p, A, eps, d, m) of the model inequalities.

    p is the gradient-growth exponent (> 1), A the coercivity constant (> 0),
    eps the diffusion/forcing scale (>= 0), d the spatial dimension and m the
    optional Lebesgue exponent of the forcing (> 1 when present).  The
    conjugate exponent p' = p/(p-1) is always derived from p, never stored.
    """

    p: float
    A: float
    eps: float = 0.0
    d: int = 1
    m: float | None = None

    def __post_init__(self):
        if not self.p > 1.0:
            raise DomainError(f"p must be > 1, got {self.p}")
        if not self.A > 0.0:
            raise DomainError(f"A must be > 0, got {self.A}")
        if self.eps < 0.0:
            raise DomainError(f"eps must be >= 0, got {self.eps}")
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"d must be a positive integer, got {self.d}")
        if self.m is not None and not self.m > 1.0:
            raise DomainError(f"m must be > 1 when given, got {self.m}")

    @property
    def p_prime(self) -> float:
        return self.p / (self.p - 1.0)

    def require_superquadratic(self, what: str = "this operation") -> None:
        if not self.p > 2.0:
            raise DomainError(f"{what} requires p > 2, got p = {self.p}")


@dataclass(frozen=True)
class ParabolicCylinder:
    """Q_r(x, t) = B_r(x) x [t - r^beta, t]."""

    center_x: tuple
    top_t: float
    radius: float
    beta: float

    def __post_init__(self):
        center = tuple(float(c) for c in np.atleast_1d(self.center_x))
        object.__setattr__(self, "center_x", center)
        if not self.radius > 0.0:
            raise DomainError(f"radius must be > 0, got {self.radius}")
        if not self.beta > 0.0:
            raise DomainError(f"beta must be > 0, got {self.beta}")

    @property
    def dim(self) -> int:
        return len(self.center_x)

    @property
    def t_bottom(self) -> float:
        return self.top_t - self.radius**self.beta

    def scaled(self, lam: float) -> "ParabolicCylinder":
        """Q_{lam * r} with the same center, top time and beta."""
        if not 0.0 < lam:
            raise DomainError(f"scale factor must be positive, got {lam}")
        return replace(self, radius=lam * self.radius)

    def contains(self, points: np.ndarray, times: np.ndarray) -> np.ndarray:
        """Boolean membership mask for points (..., d) and matching times."""
        pts = np.asarray(points, dtype=float)
        ts = np.asarray(times, dtype=float)
        center = np.asarray(self.center_x)
        dist2 = np.sum((pts - center) ** 2, axis=-1)
        tol = _TIME_TOL * (1.0 + abs(self.top_t) + abs(self.t_bottom))
        in_ball = dist2 < self.radius**2
        in_slab = (ts >= self.t_bottom - tol) & (ts <= self.top_t + tol)
        return in_ball & in_slab


@dataclass(frozen=True)
class GridFunction:
    """Scalar values on a uniform space-time grid over a box x interval.

    values has shape (*n_space, n_time); node coordinates are the exact
    affine images  x_i[j] = origin[i] + j*spacing_x[i],  t[n] = t0 + n*spacing_t.
    """

    origin: tuple
    spacing_x: tuple
    t0: float
    spacing_t: float
    values: np.ndarray

    def __post_init__(self):
        origin = tuple(float(c) for c in np.atleast_1d(self.origin))
        spacing = tuple(float(c) for c in np.atleast_1d(self.spacing_x))
        if len(spacing) == 1 and len(origin) > 1:
            spacing = spacing * len(origin)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing_x", spacing)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        d = len(origin)
        if vals.ndim != d + 1:
            raise DomainError(
                f"values must have {d + 1} axes (space... , time), got {vals.ndim}"
            )
        if len(spacing) != d or any(h <= 0 for h in spacing):
            raise DomainError("spacing_x must be positive, one entry per axis")
        if not self.spacing_t > 0:
            raise DomainError("spacing_t must be > 0")
        if not np.all(np.isfinite(vals)):
            raise DomainError("grid values must all be finite")

    @property
    def dim(self) -> int:
        return len(self.origin)

    @property
    def n_space(self) -> tuple:
        return self.values.shape[:-1]

    @property
    def n_time(self) -> int:
        return self.values.shape[-1]

    @property
    def t1(self) -> float:
        return self.t0 + (self.n_time - 1) * self.spacing_t

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing_x[axis] * np.arange(
            self.values.shape[axis]
        )

    def times(self) -> np.ndarray:
        return self.t0 + self.spacing_t * np.arange(self.n_time)

    def space_points(self) -> np.ndarray:
        """All spatial node coordinates, shape (*n_space, d)."""
        axes = [self.axis_coords(i) for i in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def node_mask(self, q: ParabolicCylinder) -> np.ndarray:
        """Boolean mask over values marking nodes inside the cylinder."""
        if q.dim != self.dim:
            raise DomainError(f"cylinder dim {q.dim} != grid dim {self.dim}")
        center = np.asarray(q.center_x)
        dist2 = np.zeros(self.n_space)
        for i in range(self.dim):
            coord = self.axis_coords(i) - center[i]
            shape = [1] * self.dim
            shape[i] = -1
            dist2 = dist2 + (coord**2).reshape(shape)
        sp_mask = dist2 < q.radius**2
        ts = self.times()
        tol = _TIME_TOL * (1.0 + abs(q.top_t) + abs(q.t_bottom))
        t_mask = (ts >= q.t_bottom - tol) & (ts <= q.top_t + tol)
        return sp_mask[..., None] & t_mask

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return replace(self, values=np.asarray(values, dtype=float))


@dataclass(frozen=True)
class HolderEstimate:
    """Result of a log-log oscillation fit: osc(r) ~ c_hat * r^alpha_hat."""

    samples: tuple
    alpha_hat: float
    c_hat: float
    max_fit_residual: float


def osc_over_cylinder(u: GridFunction, q: ParabolicCylinder) -> float:
    """max - min of u over the grid nodes lying in q (>= 0).

    Raises EmptyIntersection when no node lies in the cylinder.
    """
    mask = u.node_mask(q)
    if not mask.any():
        raise EmptyIntersection(f"no grid node inside cylinder {q}")
    vals = u.values[mask]
    return float(vals.max() - vals.min())


def shift_normalize(u: GridFunction, q: ParabolicCylinder) -> GridFunction:
    """u minus its minimum over q; the minimum of the result over q is 0."""
    mask = u.node_mask(q)
    if not mask.any():
        raise EmptyIntersection(f"no grid node inside cylinder {q}")
    return u.with_values(u.values - u.values[mask].min())


# ---------------------------------------------------------------------------
# Serialization.  Two equivalent containers (documented in the README):
#   * binary: magic "HJGRID1\n", then little-endian int64 d, float64 origin[d],
#     float64 spacing_x[d], float64 t0, float64 spacing_t, int64 extent[d+1],
#     float64 values flattened in C order;
#   * CSV: "# key,value..." header rows for the same metadata, then one value
#     per line ("%.17g", exact float64 round trip) in C order.
# ---------------------------------------------------------------------------

_MAGIC = b"HJGRID1\n"


def save_grid(u: GridFunction, path: str) -> None:
    if str(path).endswith(".csv"):
        _save_csv(u, path)
    else:
        _save_binary(u, path)


def load_grid(path: str) -> GridFunction:
    with open(path, "rb") as fh:
        head = fh.read(len(_MAGIC))
    if head == _MAGIC:
        return _load_binary(path)
    return _load_csv(path)


def _save_binary(u: GridFunction, path: str) -> None:
    d = u.dim
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<q", d))
        fh.write(np.asarray(u.origin, dtype="<f8").tobytes())
        fh.write(np.asarray(u.spacing_x, dtype="<f8").tobytes())
        fh.write(struct.pack("<dd", u.t0, u.spacing_t))
        fh.write(np.asarray(u.values.shape, dtype="<i8").tobytes())
        fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())


def _load_binary(path: str) -> GridFunction:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise DomainError(f"{path} is not a grid file")
        (d,) = struct.unpack("<q", fh.read(8))
        origin = np.frombuffer(fh.read(8 * d), dtype="<f8")
        spacing = np.frombuffer(fh.read(8 * d), dtype="<f8")
        t0, dt = struct.unpack("<dd", fh.read(16))
        extent = np.frombuffer(fh.read(8 * (d + 1)), dtype="<i8")
        count = int(np.prod(extent))
        vals = np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(extent)
    return GridFunction(tuple(origin), tuple(spacing), t0, dt, vals.copy())


def _save_csv(u: GridFunction, path: str) -> None:
    def fmt(x):
        return "%.17g" % x

    lines = ["# hjgrid,1"]
    lines.append("# d," + str(u.dim))
    lines.append("# origin," + ",".join(fmt(c) for c in u.origin))
    lines.append("# spacing_x," + ",".join(fmt(c) for c in u.spacing_x))
    lines.append("# t0," + fmt(u.t0))
    lines.append("# spacing_t," + fmt(u.spacing_t))
    lines.append("# extent," + ",".join(str(n) for n in u.values.shape))
    lines.extend(fmt(v) for v in u.values.ravel(order="C"))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _load_csv(path: str) -> GridFunction:
    header = {}
    body = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split(",")
                header[parts[0].strip()] = [s.strip() for s in parts[1:]]
            else:
                body.append(float(line))
    try:
        origin = tuple(float(s) for s in header["origin"])
        spacing = tuple(float(s) for s in header["spacing_x"])
        t0 = float(header["t0"][0])
        dt = float(header["spacing_t"][0])
        extent = tuple(int(s) for s in header["extent"])
    except KeyError as exc:
        raise DomainError(f"{path}: missing grid header row {exc}") from exc
    vals = np.asarray(body, dtype=float).reshape(extent)
    return GridFunction(origin, spacing, t0, dt, vals)
