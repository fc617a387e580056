"""Desired frequency responses h*(lambda) and their translation to the mu axis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class DesiredResponse:
    """User-prescribed response over a universal lambda interval.

    kinds: 'step' (1 below cutoff), 'window' (1 inside band), 'custom'
    (linear interpolation of sampled (lambda, value) pairs).
    """

    kind: str
    interval: tuple[float, float]
    cutoff: float | None = None
    band: tuple[float, float] | None = None
    samples: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        lmin, lmax = self.interval
        if not lmax > lmin:
            raise InputError("response interval must satisfy lmax > lmin")
        if self.kind not in ("step", "window", "custom"):
            raise InputError(f"unknown response kind {self.kind!r}")
        if self.kind == "custom":
            if not self.samples or len(self.samples) < 2:
                raise InputError("custom response needs at least two samples")
            vals = [v for _, v in self.samples]
            if not np.all(np.isfinite(vals)):
                raise InputError("custom response samples must be finite")

    def __call__(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        if self.kind == "step":
            return (lam < self.cutoff).astype(float)
        if self.kind == "window":
            lo, hi = self.band
            return ((lam >= lo) & (lam <= hi)).astype(float)
        pts = np.asarray(self.samples, dtype=float)
        order = np.argsort(pts[:, 0])
        return np.interp(lam, pts[order, 0], pts[order, 1])

    @property
    def radius(self) -> float:
        lmin, lmax = self.interval
        return (lmax - lmin) / 2.0


def step_response(interval=(0.0, 2.0), cutoff: float | None = None) -> DesiredResponse:
    """Low-pass step: 1 on [lmin, cutoff), 0 after. Default cutoff (lmin+lmax)/4."""
    lmin, lmax = interval
    if cutoff is None:
        cutoff = (lmin + lmax) / 4.0
    return DesiredResponse(kind="step", interval=tuple(interval), cutoff=float(cutoff))


def window_response(interval=(0.0, 2.0), band=None) -> DesiredResponse:
    """Band-pass window: 1 on [lmax/3, 2 lmax/3] by default, 0 elsewhere."""
    lmin, lmax = interval
    if band is None:
        band = (lmax / 3.0, 2.0 * lmax / 3.0)
    return DesiredResponse(
        kind="window", interval=tuple(interval), band=(float(band[0]), float(band[1]))
    )


def sampled_response(samples, interval=None) -> DesiredResponse:
    """Piecewise-linear response through the given (lambda, value) pairs."""
    pts = sorted((float(l), float(v)) for l, v in samples)
    if interval is None:
        interval = (pts[0][0], pts[-1][0])
    return DesiredResponse(kind="custom", interval=tuple(interval), samples=tuple(pts))


@dataclass(frozen=True)
class MuResponse:
    """The desired response pulled back to the mu axis of the shifted operator.

    g*(mu) = h*((lmax-lmin)/2 - mu) on [r - lmax, r - lmin], r = (lmax-lmin)/2.
    For Laplacian intervals (lmin = 0) this is the symmetric interval [-r, r].
    """

    h_star: DesiredResponse

    def __call__(self, mu) -> np.ndarray:
        return self.h_star(self.h_star.radius - np.asarray(mu, dtype=float))

    @property
    def radius(self) -> float:
        return self.h_star.radius

    @property
    def interval(self) -> tuple[float, float]:
        lmin, lmax = self.h_star.interval
        r = self.radius
        return (r - lmax, r - lmin)


def map_to_mu(resp: DesiredResponse) -> MuResponse:
    return MuResponse(h_star=resp)
