"""Shift operators, spectral decomposition, GFT, and exact (dense) filtering.

Everything here is the centralized oracle side of the toolkit: the distributed
engine never touches these matrices, but is tested against them.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import InputError, SpectralIntervalWarning
from .graphs import Graph

VARIANTS = ("discrete", "normalized", "custom")

DEFAULT_DENSE_CAP = 5000


def default_interval(graph: Graph, variant: str) -> tuple[float, float]:
    """Universal spectral bounds used when the caller supplies none."""
    if variant == "normalized":
        return (0.0, 2.0)
    if variant == "discrete":
        return (0.0, 2.0 * float(np.max(graph.degree_vector())))
    raise InputError("custom variant requires an explicit spectral interval")


def laplacian_entries(graph: Graph, variant: str, custom_matrix=None):
    """Per-node Laplacian row entries: (diag values, list of (i, j, L_ij)).

    Shared by the dense assembly below and the distributed engine's neighbor
    tables so both sides compute with identical floating-point values.
    """
    if variant == "discrete":
        diag = graph.degree_vector()
        off = [(i, j, -w) for i, j, w in graph.edges]
    elif variant == "normalized":
        deg = graph.degree_vector()
        if np.any(deg <= 0):
            bad = int(np.argmin(deg))
            raise InputError(f"normalized laplacian undefined: node {bad} is isolated")
        inv_sqrt = 1.0 / np.sqrt(deg)
        diag = np.ones(graph.n)
        off = [(i, j, -w * inv_sqrt[i] * inv_sqrt[j]) for i, j, w in graph.edges]
    elif variant == "custom":
        if custom_matrix is None:
            raise InputError("custom variant requires a matrix")
        mat = np.asarray(custom_matrix, dtype=float)
        if mat.shape != (graph.n, graph.n):
            raise InputError("custom matrix shape does not match graph")
        if not np.allclose(mat, mat.T, atol=1e-12 * max(1.0, np.abs(mat).max())):
            raise InputError("custom matrix must be symmetric")
        nb = graph.neighbor_sets()
        off = []
        for i in range(graph.n):
            for j in range(i + 1, graph.n):
                if mat[i, j] != 0.0:
                    if j not in nb[i]:
                        raise InputError(
                            f"custom matrix is not 1-local: entry ({i},{j}) off-edge"
                        )
                    off.append((i, j, float(mat[i, j])))
        diag = np.diag(mat).copy()
    else:
        raise InputError(f"unknown shift variant {variant!r}")
    return diag, off


@dataclass(frozen=True, eq=False)
class ShiftOperator:
    """Symmetric 1-local basis operator L with its translated companion M.

    M = ((lmax - lmin)/2) I - L shares eigenvectors with L; its spectrum is the
    translation mu = (lmax - lmin)/2 - lambda with minimal spectral radius.
    """

    graph: Graph
    variant: str
    L: np.ndarray
    interval: tuple[float, float]

    @property
    def radius(self) -> float:
        """Half-width of the spectral interval: the stability disk radius."""
        lmin, lmax = self.interval
        return (lmax - lmin) / 2.0

    @property
    def M(self) -> np.ndarray:
        return self.radius * np.eye(self.graph.n) - self.L


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigendecomposition of a shift operator with a deterministic convention.

    Eigenvalues ascend; each eigenvector's first nonzero entry is positive.
    """

    lambdas: np.ndarray
    mus: np.ndarray
    basis: np.ndarray
    interval: tuple[float, float]

    @property
    def n(self) -> int:
        return len(self.lambdas)

    @property
    def radius(self) -> float:
        lmin, lmax = self.interval
        return (lmax - lmin) / 2.0


def build_shift_operator(
    graph: Graph,
    variant: str = "discrete",
    interval: tuple[float, float] | None = None,
    custom_matrix=None,
) -> ShiftOperator:
    """Assemble L for the chosen variant and attach universal spectral bounds."""
    if variant not in VARIANTS:
        raise InputError(f"unknown shift variant {variant!r}; use one of {VARIANTS}")
    diag, off = laplacian_entries(graph, variant, custom_matrix)
    L = np.zeros((graph.n, graph.n))
    np.fill_diagonal(L, diag)
    for i, j, v in off:
        L[i, j] = v
        L[j, i] = v
    if interval is None:
        interval = default_interval(graph, variant)
    lmin, lmax = float(interval[0]), float(interval[1])
    if not lmax > lmin:
        raise InputError("spectral interval must satisfy lmax > lmin")
    return ShiftOperator(graph=graph, variant=variant, L=L, interval=(lmin, lmax))


def eigendecompose(op: ShiftOperator, dense_cap: int = DEFAULT_DENSE_CAP) -> Spectrum:
    """Full dense eigendecomposition of L, with sign-fixed eigenvectors.

    Warns (SpectralIntervalWarning) if the actual spectrum escapes the
    operator's declared universal interval.
    """
    n = op.graph.n
    if n > dense_cap:
        raise InputError(f"graph size {n} exceeds dense decomposition cap {dense_cap}")
    try:
        lam, vec = np.linalg.eigh(op.L)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh rarely fails
        raise InputError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    vec = vec[:, order]
    # sign convention: first entry above noise level made positive
    scale = np.abs(vec).max(axis=0)
    for k in range(n):
        col = vec[:, k]
        nz = np.nonzero(np.abs(col) > 1e-10 * scale[k])[0]
        if len(nz) and col[nz[0]] < 0:
            vec[:, k] = -col
    lmin, lmax = op.interval
    tol = 1e-8 * max(1.0, np.abs(lam).max())
    if lam[0] < lmin - tol or lam[-1] > lmax + tol:
        warnings.warn(
            f"spectrum [{lam[0]:.6g}, {lam[-1]:.6g}] escapes declared interval "
            f"[{lmin:.6g}, {lmax:.6g}]",
            SpectralIntervalWarning,
            stacklevel=2,
        )
    mus = op.radius - lam
    return Spectrum(lambdas=lam, mus=mus, basis=vec, interval=op.interval)


def _as_vector(x, n: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.shape != (n,):
        raise InputError(f"signal length {arr.shape[0]} does not match n={n}")
    return arr


def gft_forward(x, spectrum: Spectrum) -> np.ndarray:
    """Graph Fourier coefficients <x, phi_n>."""
    return spectrum.basis.T @ _as_vector(x, spectrum.n)


def gft_inverse(coeffs, spectrum: Spectrum) -> np.ndarray:
    """Signal with the given Fourier coefficients: sum_n c_n phi_n."""
    c = np.asarray(coeffs, dtype=float).reshape(-1)
    if c.shape != (spectrum.n,):
        raise InputError(f"coefficient length {c.shape[0]} does not match n={spectrum.n}")
    return spectrum.basis @ c


def apply_filter_exact(
    x,
    spectrum: Spectrum,
    response: Callable[[np.ndarray], np.ndarray],
    domain: str = "mu",
) -> np.ndarray:
    """Exact spectral filtering: sum_n g(mu_n) <x, phi_n> phi_n.

    This is the oracle every distributed recursion is tested against.
    ``response`` is a vectorized scalar function of mu (default) or lambda.
    """
    if domain not in ("mu", "lambda"):
        raise InputError("domain must be 'mu' or 'lambda'")
    arg = spectrum.mus if domain == "mu" else spectrum.lambdas
    gains = np.asarray(response(arg), dtype=complex)
    if not np.all(np.isfinite(gains)):
        bad = arg[~np.isfinite(gains)]
        raise InputError(f"response non-finite at eigenvalue(s) {bad[:3]}")
    xhat = gft_forward(x, spectrum)
    out = spectrum.basis @ (gains * xhat)
    return out.real if np.all(np.isreal(gains)) else out


class MeasuredResponse(NamedTuple):
    gains: np.ndarray  # per-eigenvalue gain, NaN where undefined
    defined: np.ndarray  # bool mask: input coefficient above tolerance


def measure_response(
    filter_output,
    x,
    spectrum: Spectrum,
    rtol: float = 1e-10,
) -> MeasuredResponse:
    """Empirical per-frequency gain <Fx, phi_n> / <x, phi_n>.

    Frequencies where the input coefficient is (numerically) zero are flagged
    undefined rather than fabricated.
    """
    xhat = gft_forward(x, spectrum)
    yhat = gft_forward(filter_output, spectrum)
    defined = np.abs(xhat) > rtol * max(np.abs(xhat).max(), 1e-300)
    gains = np.full(spectrum.n, np.nan)
    gains[defined] = yhat[defined] / xhat[defined]
    return MeasuredResponse(gains=gains, defined=defined)
