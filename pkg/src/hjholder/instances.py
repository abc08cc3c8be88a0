"""Reusable problem-instance builders: rough coefficient fields, singular
forcings and named initial/boundary profiles.

The coefficient family a(x,t) = base + amplitude*sin(kx)*sin(omega t) stays
inside [base - amplitude, base + amplitude]; the forcing family
f(x) = M |x - x0|^{-gamma} (truncated at the grid scale) is in L^m but not
L^inf whenever gamma*m < d.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def rough_coefficient(k: float, omega: float, base: float = 1.0, amplitude: float = 0.5):
    """a(x, t) = base + amplitude * sin(k x) * sin(omega t) (first axis only)."""

    def a(*args):
        x, t = args[0], args[-1]
        return base + amplitude * np.sin(k * x) * np.sin(omega * t)

    return a


def inverse_power_forcing(strength: float, gamma: float, center, cap_radius: float):
    """f(x) = strength * max(|x - x0|, cap_radius)^{-gamma}, time independent."""
    if not gamma > 0 or not cap_radius > 0:
        raise DomainError("need gamma > 0 and cap_radius > 0")
    c = np.atleast_1d(np.asarray(center, dtype=float))

    def f(*args):
        coords, _t = args[:-1], args[-1]
        dist2 = sum((coords[i] - c[i]) ** 2 for i in range(len(coords)))
        dist = np.maximum(np.sqrt(dist2), cap_radius)
        return strength * dist ** (-gamma)

    return f


def initial_profile(kind: str, **kw):
    """Named initial data u(x, 0); all profiles map the first axis only."""
    if kind == "constant":
        value = float(kw.get("value", 0.5))
        return lambda *coords: np.full(np.shape(coords[0]), value)
    if kind == "sinusoid":
        level = float(kw.get("level", 0.5))
        amp = float(kw.get("amplitude", 0.4))
        k = float(kw.get("k", 2.0))
        phase = float(kw.get("phase", 0.0))
        return lambda *coords: level + amp * np.sin(k * coords[0] + phase)
    if kind == "quadratic":
        scale = float(kw.get("scale", 1.0))
        return lambda *coords: scale * sum(c**2 for c in coords)
    if kind == "abs":
        scale = float(kw.get("scale", 1.0))
        return lambda *coords: scale * np.sqrt(sum(c**2 for c in coords))
    if kind == "dip":
        level = float(kw.get("level", 1.0))
        depth = float(kw.get("depth", 0.9))
        center = float(kw.get("center", 0.0))
        width = float(kw.get("width", 0.2))

        def dip(*coords):
            dist2 = (coords[0] - center) ** 2
            for c in coords[1:]:
                dist2 = dist2 + c**2
            return level - depth * np.exp(-dist2 / (2.0 * width**2))

        return dip
    if kind == "windowed":
        # sinusoid damped by (1 - (x/half_width)^2)^2: flat at the box faces,
        # so frozen Dirichlet data raises no boundary layer
        level = float(kw.get("level", 0.5))
        amp = float(kw.get("amplitude", 0.4))
        k = float(kw.get("k", 2.0))
        phase = float(kw.get("phase", 0.0))
        half = float(kw.get("half_width", 2.0))

        def windowed(*coords):
            x = coords[0]
            win = np.clip(1.0 - (x / half) ** 2, 0.0, None) ** 2
            return level + amp * np.sin(k * x + phase) * win

        return windowed
    raise DomainError(f"unknown initial profile {kind!r}")


def boundary_profile(kind: str, init=None, **kw):
    """Named Dirichlet data g(x, t) on the box faces."""
    if kind == "frozen_initial":
        if init is None:
            raise DomainError("frozen_initial boundary needs the initial profile")
        return lambda *args: init(*args[:-1])
    if kind == "constant":
        value = float(kw.get("value", 0.0))
        return lambda *args: np.full(np.shape(args[0]), value)
    raise DomainError(f"unknown boundary profile {kind!r}")
