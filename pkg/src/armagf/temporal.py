"""Joint graph-and-time transfer functions H(z, mu) and their empirical check.

For a time-varying input, each graph-frequency component mu behaves like a
classical discrete-time system: first-order recursions give H(z, mu) =
phi/(z - psi mu), parallel forms sum one such term per branch, and the
periodic schedule gives H_K(z, mu) on the per-period time axis (one z step =
K rounds, input held fixed within each period). At z = 1 every formula
collapses back to the static graph response.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import Arma1, ParallelForm, PeriodicForm
from .engine import FilterEngine, GraphTables, contraction_ratio
from .errors import ConvergenceError, InputError
from .graphs import Graph
from .spectral import Spectrum, build_shift_operator, eigendecompose

_UNIT_TOL = 1e-9


def _check_z(z, allow_interior: bool):
    z = np.asarray(z, dtype=complex)
    if not allow_interior and np.any(np.abs(z) < 1.0 - _UNIT_TOL):
        raise InputError(
            "z inside the unit circle: the transfer function presumes a "
            "convergent recursion (pass allow_interior=True to evaluate anyway)"
        )
    return z


def arma1_transfer(psi, phi, z, mu, allow_interior: bool = False) -> np.ndarray:
    """H(z, mu) = phi / (z - psi mu); poles come back non-finite."""
    z = _check_z(z, allow_interior)
    mu = np.asarray(mu, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        return phi / (z - psi * mu)


def parallel_transfer(form: ParallelForm, z, mu, allow_interior: bool = False) -> np.ndarray:
    """Branch sum of first-order transfer functions."""
    z = _check_z(z, allow_interior)
    mu = np.asarray(mu, dtype=complex)
    out = np.zeros(np.broadcast(z, mu).shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for psi, phi in zip(form.psi, form.phi):
            out = out + phi / (z - psi * mu)
    return out


def periodic_transfer(form: PeriodicForm, z, mu, allow_interior: bool = False) -> np.ndarray:
    """H_K(z, mu) on the period-sampled time axis (one z step = K rounds)."""
    z = _check_z(z, allow_interior)
    mu = np.asarray(mu, dtype=complex)
    K = form.period
    num = np.zeros_like(mu)
    for tau in range(K):
        prod = np.ones_like(mu)
        for sigma in range(K - tau, K):
            prod = prod * (form.theta[sigma] + form.psi[sigma] * mu)
        num = num + prod * form.phi[K - tau - 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / (z - form.round_product(mu))


@dataclass(frozen=True, eq=False)
class JointResponse:
    """Uniform evaluator over (z, mu) for any filter family."""

    form: object

    @property
    def family(self) -> str:
        return {Arma1: "arma1", ParallelForm: "parallel", PeriodicForm: "periodic"}[
            type(self.form)
        ]

    def __call__(self, z, mu, allow_interior: bool = False) -> np.ndarray:
        if isinstance(self.form, Arma1):
            return arma1_transfer(self.form.psi, self.form.phi, z, mu, allow_interior)
        if isinstance(self.form, ParallelForm):
            return parallel_transfer(self.form, z, mu, allow_interior)
        if isinstance(self.form, PeriodicForm):
            return periodic_transfer(self.form, z, mu, allow_interior)
        raise InputError(f"no transfer function for {type(self.form).__name__}")


def response_surface(form, omegas, mus) -> np.ndarray:
    """|H| over a (omega, mu) grid; rows omega, columns mu."""
    joint = JointResponse(form)
    z = np.exp(1j * np.asarray(omegas, dtype=float))
    return joint(z[:, None], np.asarray(mus)[None, :])


@dataclass(frozen=True)
class GainMeasurement:
    gain: float
    phase: float          # principal value in (-pi, pi]
    fit_residual: float   # relative RMS residual of the sinusoid fit
    discarded: int        # transient samples dropped before fitting
    samples: int          # samples used in the fit


def _fit_sinusoid(series: np.ndarray, omega: float, idx0: int):
    """LS fit of series[m] ~ gain*cos(omega (idx0+m) + phase)."""
    idx = np.arange(idx0, idx0 + len(series), dtype=float)
    basis = np.column_stack([np.cos(omega * idx), np.sin(omega * idx)])
    coef, *_ = np.linalg.lstsq(basis, series, rcond=None)
    alpha, beta = coef
    fit = basis @ coef
    resid = float(np.linalg.norm(series - fit) / max(np.linalg.norm(fit), 1e-300))
    gain = float(np.hypot(alpha, beta))
    phase = float(np.arctan2(-beta, alpha))
    if phase <= -np.pi:
        phase += 2 * np.pi
    return gain, phase, resid


def measure_temporal_gain(
    form,
    graph: Graph,
    n: int,
    omega: float,
    variant: str = "normalized",
    interval: tuple[float, float] | None = None,
    spectrum: Spectrum | None = None,
    transient_factor: float = 5.0,
    fit_samples: int | None = None,
    y0="zero",
    seed=None,
) -> GainMeasurement:
    """Empirical temporal gain and phase at one graph frequency.

    Drives the engine with x_t = cos(omega t) phi_n (t counted in rounds for
    first-order/parallel filters, in periods for periodic ones), discards the
    first transient_factor/(1-gamma) samples, and least-squares fits a
    sinusoid to the output's phi_n coefficient sequence.
    """
    if spectrum is None:
        spectrum = eigendecompose(build_shift_operator(graph, variant, interval))
    if not 0 <= n < spectrum.n:
        raise InputError(f"eigenvector index {n} out of range")
    tables = GraphTables.build(graph, variant, interval)
    eigvec = spectrum.basis[:, n]
    gamma = contraction_ratio(form, spectrum.mus)
    if gamma >= 1.0:
        raise InputError(f"filter does not converge on this graph (gamma={gamma:.4g})")
    discard = int(np.ceil(transient_factor / (1.0 - gamma)))
    if fit_samples is None:
        cycles = 4 if omega == 0 else int(np.ceil(4 * 2 * np.pi / abs(omega)))
        fit_samples = max(256, cycles)

    periodic = isinstance(form, PeriodicForm)
    period = form.period if periodic else 1
    total_samples = discard + fit_samples
    engine = FilterEngine(form, tables, y0=y0, seed=seed)
    series = np.zeros(total_samples + 1)
    series[0] = eigvec @ engine.output
    for i in range(total_samples):
        x = np.cos(omega * i) * eigvec
        for _ in range(period):
            engine.step(x=x)
        series[i + 1] = eigvec @ engine.output

    # series[k] is y_k, driven by x_j = cos(omega j) for j < k; the one-step
    # lag is exactly the 1/z the transfer function carries, so y_k pairs with
    # drive index k in the fit.
    window = series[discard + 1 :]
    gain, phase, resid = _fit_sinusoid(window, omega, discard + 1)
    if resid > 0.05:
        raise ConvergenceError(
            f"transient not decayed (fit residual {resid:.3f}); run longer "
            "(raise transient_factor or fit_samples)"
        )
    return GainMeasurement(
        gain=gain, phase=phase, fit_residual=resid,
        discarded=discard, samples=len(window),
    )
