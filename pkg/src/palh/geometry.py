"""
Star-shaped boundaries r = R(theta) and truncation layers R1 <= r < rho R1.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "KINDS",
    "StarBoundary",
    "StarLayer",
    "circle",
    "perturbed",
    "rectangle",
    "ellipse",
    "hexstar",
    "peanut",
    "radius",
    "corner_angles",
    "is_corner",
    "contains",
    "INTERIOR",
    "LAYER",
    "OUTSIDE",
]

KINDS = ("circle", "perturbed", "rectangle", "ellipse", "hexstar", "peanut")

INTERIOR = "interior"
LAYER = "layer"
OUTSIDE = "outside"

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class StarBoundary:
    """A boundary r = R(theta) with shape parameters ``params``.

    ``scale`` multiplies R; it lets a layer be a dilate of a scatterer.
    """

    kind: str
    params: tuple
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown boundary kind {self.kind!r}")
        need = {"circle": 1, "perturbed": 2, "rectangle": 2, "ellipse": 2, "hexstar": 4, "peanut": 4}
        if len(self.params) != need[self.kind]:
            raise ConfigError(f"{self.kind} takes {need[self.kind]} parameters")
        if not all(math.isfinite(float(p)) for p in self.params) or not self.scale > 0:
            raise ConfigError("shape parameters must be finite and the scale positive")
        p = self.params
        if self.kind in ("circle", "rectangle", "ellipse") and min(p) <= 0:
            raise ConfigError(f"{self.kind} parameters must be positive")
        if self.kind == "perturbed" and not (p[0] > abs(p[1])):
            raise ConfigError("perturbed circle needs a > |b| so that R > 0")
        if self.kind in ("hexstar", "peanut"):
            if not (p[0] > abs(p[1])):
                raise ConfigError(f"{self.kind} needs c0 > |c1| so that R > 0")
            if int(p[2]) != p[2] or p[2] < 1:
                raise ConfigError(f"{self.kind} frequency must be a positive integer")

    def scaled(self, factor):
        return StarBoundary(self.kind, self.params, self.scale * float(factor))

    @property
    def is_circle(self):
        return self.kind == "circle"

    @property
    def max_radius(self):
        th = np.linspace(0.0, TWO_PI, 4097)
        return float(np.max(radius(self, th)[0]))


def circle(R):
    return StarBoundary("circle", (float(R),))


def perturbed(a, b):
    return StarBoundary("perturbed", (float(a), float(b)))


def rectangle(a, b):
    return StarBoundary("rectangle", (float(a), float(b)))


def ellipse(a, b):
    return StarBoundary("ellipse", (float(a), float(b)))


def hexstar(c0=0.5, c1=0.15, freq=6, phase=math.pi / 4):
    return StarBoundary("hexstar", (float(c0), float(c1), int(freq), float(phase)))


def peanut(c0=0.5, c1=0.25, freq=2, phase=math.pi / 4):
    return StarBoundary("peanut", (float(c0), float(c1), int(freq), float(phase)))


def corner_angles(boundary):
    """Angles in [0, 2 pi) where R' jumps (rectangles only)."""
    if boundary.kind != "rectangle":
        return ()
    a, b = boundary.params
    t0 = math.atan2(b, a)
    return (t0, math.pi - t0, math.pi + t0, TWO_PI - t0)


def is_corner(boundary, theta, tol=1e-13):
    th = float(theta) % TWO_PI
    return any(min(abs(th - c), TWO_PI - abs(th - c)) <= tol for c in corner_angles(boundary))


def _rectangle(a, b, th):
    t0 = math.atan2(b, a)
    th = np.mod(th, TWO_PI)
    c, s = np.cos(th), np.sin(th)
    # right limits at the corners: sides are half-open [start, end)
    right = (th < t0) | (th >= TWO_PI - t0)
    left = (th >= math.pi - t0) & (th < math.pi + t0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        R = np.where(right | left, a / np.abs(c), b / np.abs(s))
        # d/dθ (a / |cos θ|) = a tan θ / |cos θ|;  d/dθ (b / |sin θ|) = -b cot θ / |sin θ|
        dR = np.where(right | left, a * np.tan(th) / np.abs(c), -b / np.tan(th) / np.abs(s))
    return R, dR


def radius(boundary, theta):
    """Return (R(theta), R'(theta)); at rectangle corners R' is the right limit."""
    th = np.asarray(theta, dtype=float)
    kind, p = boundary.kind, boundary.params
    if kind == "circle":
        R = np.full(th.shape, p[0])
        dR = np.zeros(th.shape)
    elif kind == "perturbed":
        R = p[0] + p[1] * np.sin(th)
        dR = p[1] * np.cos(th)
    elif kind == "rectangle":
        R, dR = _rectangle(p[0], p[1], th)
    elif kind == "ellipse":
        a, b = p
        s2 = np.sin(th) ** 2
        q = b * b + (a * a - b * b) * s2
        R = a * b / np.sqrt(q)
        dR = -0.5 * a * b * (a * a - b * b) * np.sin(2.0 * th) / q**1.5
    else:
        c0, c1, f, ph = p
        R = c0 + c1 * np.sin(f * (th + ph))
        dR = c1 * f * np.cos(f * (th + ph))
    R = boundary.scale * R
    dR = boundary.scale * dR
    if R.ndim == 0:
        return float(R), float(dR)
    return R, dR


@dataclass(frozen=True)
class StarLayer:
    """Layer between r = R1(theta) and r = rho R1(theta)."""

    inner: StarBoundary
    rho: float
    sigma0: float = 1.0
    sigma1: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 1.0):
            raise ConfigError("layer ratio rho must exceed 1")
        if not (self.sigma0 > 0 and self.sigma1 > 0):
            raise ConfigError("sigma0 and sigma1 must be positive")

    @property
    def alpha(self):
        return complex(self.sigma1, self.sigma0)

    def radii(self, theta):
        """Return (R1, R1', R2) at ``theta``."""
        R1, dR1 = radius(self.inner, theta)
        return R1, dR1, self.rho * R1

    @property
    def is_circle(self):
        return self.inner.is_circle

    @property
    def R1(self):
        if not self.is_circle:
            raise ConfigError("R1 is only a constant for circular layers")
        return self.inner.params[0] * self.inner.scale

    @property
    def R2(self):
        return self.rho * self.R1

    @property
    def thickness(self):
        return self.R2 - self.R1


def circular_layer(R1, R2, sigma0=1.0, sigma1=1.0):
    return StarLayer(circle(R1), R2 / R1, sigma0, sigma1)


__all__.append("circular_layer")


def contains(layer, r, theta):
    """Classify polar points against the layer, with the half-open convention [R1, R2)."""
    r = np.asarray(r, dtype=float)
    R1, _, R2 = layer.radii(theta)
    out = np.where(r < R1, INTERIOR, np.where(r < R2, LAYER, OUTSIDE))
    if out.ndim == 0:
        return str(out)
    return out
