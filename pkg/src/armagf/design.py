"""Universal filter coefficient design.

FIR least squares, the two-step Shank-style rational fit, stability analysis
against the inverted stability region (poles must lie OUTSIDE the disk of
radius (lmax-lmin)/2), and conversion of a rational response into the two
implementable forms: parallel first-order branches and a periodic coefficient
schedule.

All least-squares systems and root-finding run in the radius-normalized
variable nu = mu / r so conditioning does not depend on the width of the
spectral interval; coefficients are rescaled to mu units on the way out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from numpy.polynomial import polynomial as npoly

from .errors import DesignError, InputError
from .responses import DesiredResponse, MuResponse, map_to_mu

DEFAULT_GRID = 1000
EPS_STABILITY = 1e-6
EPS_SEPARATION = 1e-8
# pipeline gate on max |1 - p_a| over the interval: the per-period contraction
# of the Shah-schedule realization. 0.6 keeps periodic runs fast (~23 periods
# to 1e-5) and costs < 2% fit quality next to an ungated denominator.
PERIODIC_CONTRACTION = 0.6


# ---------------------------------------------------------------------------
# design data types


@dataclass(frozen=True, eq=False)
class FirDesign:
    """Polynomial-in-L filter: response h(lambda) = sum_k h_k lambda^k."""

    h: np.ndarray
    interval: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "h", np.atleast_1d(np.asarray(self.h, dtype=float)))

    @property
    def order(self) -> int:
        return len(self.h) - 1

    @property
    def radius(self) -> float:
        lmin, lmax = self.interval
        return (lmax - lmin) / 2.0


@dataclass(frozen=True, eq=False)
class RationalDesign:
    """Rational response g(mu) = p_b(mu)/p_a(mu), a_0 fixed to 1.

    b holds b_0..b_{K-1}, a holds a_1..a_K (both length K).
    """

    b: np.ndarray
    a: np.ndarray
    radius: float

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.b))
        a = np.atleast_1d(np.asarray(self.a))
        if len(a) != len(b) or len(a) < 1:
            raise InputError("b and a must have equal length K >= 1")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)

    @property
    def order(self) -> int:
        return len(self.a)

    @property
    def interval_mu(self) -> tuple[float, float]:
        return (-self.radius, self.radius)

    def denominator(self) -> np.ndarray:
        """Ascending coefficients of p_a, including the fixed a_0 = 1."""
        return np.concatenate(([1.0], self.a))

    def numerator(self) -> np.ndarray:
        return self.b.copy()


@dataclass(frozen=True, eq=False)
class Arma1:
    """First-order recursion coefficients y <- psi M y + phi x."""

    psi: complex
    phi: complex
    radius: float

    @property
    def pole(self) -> complex:
        return 1.0 / self.psi

    @property
    def residue(self) -> complex:
        return -self.phi / self.psi

    @property
    def stable(self) -> bool:
        return abs(self.psi) * self.radius < 1.0

    @property
    def contraction(self) -> float:
        """Universal per-round error ratio bound |psi| r."""
        return abs(self.psi) * self.radius


@dataclass(frozen=True, eq=False)
class ParallelForm:
    """K first-order branches run side by side; the output is their sum.

    Branch k realizes r_k/(mu - p_k) with psi_k = 1/p_k, phi_k = -r_k psi_k.
    """

    psi: np.ndarray
    phi: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "psi", np.atleast_1d(np.asarray(self.psi, dtype=complex)))
        object.__setattr__(self, "phi", np.atleast_1d(np.asarray(self.phi, dtype=complex)))
        if len(self.psi) != len(self.phi):
            raise InputError("psi and phi must have equal length")

    @property
    def order(self) -> int:
        return len(self.psi)

    @property
    def poles(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(self.psi != 0, 1.0 / self.psi, np.inf)

    @property
    def residues(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.psi != 0, -self.phi / self.psi, -np.inf)

    @property
    def stable(self) -> bool:
        return bool(np.all(np.abs(self.psi) * self.radius < 1.0))

    @property
    def contraction(self) -> float:
        """Universal per-round error ratio bound max_k |psi_k| r."""
        return float(np.max(np.abs(self.psi)) * self.radius)

    def branches(self) -> list[Arma1]:
        return [Arma1(psi=p, phi=f, radius=self.radius) for p, f in zip(self.psi, self.phi)]


@dataclass(frozen=True, eq=False)
class PeriodicForm:
    """Single recursion with coefficients cycling over a period of K rounds.

    theta is the negated-Shah schedule (0, 1, ..., 1); outputs are valid at
    period boundaries t = iK only.
    """

    theta: np.ndarray
    psi: np.ndarray
    phi: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "theta", np.atleast_1d(np.asarray(self.theta, dtype=float)))
        object.__setattr__(self, "psi", np.atleast_1d(np.asarray(self.psi, dtype=complex)))
        object.__setattr__(self, "phi", np.atleast_1d(np.asarray(self.phi, dtype=complex)))
        if not (len(self.theta) == len(self.psi) == len(self.phi)):
            raise InputError("theta, psi, phi must have equal length")

    @property
    def period(self) -> int:
        return len(self.psi)

    def round_product(self, mu) -> np.ndarray:
        """prod_tau (theta_tau + psi_tau mu): the per-period contraction factor."""
        mu = np.asarray(mu, dtype=complex)
        out = np.ones_like(mu)
        for th, ps in zip(self.theta, self.psi):
            out = out * (th + ps * mu)
        return out

    @property
    def edge_product(self) -> float:
        """|prod (theta_tau + psi_tau r)|: the stability product at mu = r."""
        return float(np.abs(self.round_product(np.array(self.radius + 0j))))

    def contraction_bound(self, grid_size: int = 1001) -> float:
        """max |round product| over the real interval [-r, r].

        The single-point product at mu = r does not bound the spectral radius
        of the period map for every admissible graph; this grid bound does.
        """
        mu = np.linspace(-self.radius, self.radius, grid_size)
        return float(np.max(np.abs(self.round_product(mu))))

    @property
    def stable(self) -> bool:
        return self.contraction_bound() < 1.0


@dataclass(frozen=True, eq=False)
class StabilityReport:
    """Denominator roots with their distance to the forbidden disk."""

    roots: np.ndarray
    margins: np.ndarray
    radius: float
    epsilon: float

    @property
    def passed(self) -> bool:
        return bool(np.all(self.margins > self.epsilon))


@dataclass(frozen=True, eq=False)
class DesignResult:
    """Everything the design pipeline produces for one response."""

    response: DesiredResponse
    rational: RationalDesign
    parallel: ParallelForm
    periodic: PeriodicForm
    stability: StabilityReport
    l2_error: float
    prefit_order: int
    denominator_scale: float
    reflected: bool


# ---------------------------------------------------------------------------
# grids and polynomial helpers


def _grid_weights(lo: float, hi: float, size: int):
    """Uniform grid with trapezoid quadrature weights."""
    g = np.linspace(lo, hi, size)
    w = np.full(size, g[1] - g[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return g, w


def _polish_roots(roots: np.ndarray, coeffs: np.ndarray, steps: int = 2) -> np.ndarray:
    """Newton-refine companion-matrix roots of an ascending-coefficient poly."""
    der = npoly.polyder(coeffs)
    roots = roots.astype(complex)
    for _ in range(steps):
        val = npoly.polyval(roots, coeffs.astype(complex))
        slope = npoly.polyval(roots, der.astype(complex))
        ok = np.abs(slope) > 0
        roots = np.where(ok, roots - val / np.where(ok, slope, 1.0), roots)
    return roots


def _denominator_roots_scaled(design: RationalDesign) -> np.ndarray:
    """Roots of p_a in nu = mu/r units, Newton-polished."""
    a_nu = design.a * design.radius ** np.arange(1, design.order + 1)
    coeffs = np.concatenate(([1.0], a_nu))
    trimmed = np.trim_zeros(coeffs, "b")
    if len(trimmed) <= 1:
        return np.empty(0, dtype=complex)
    roots = npoly.polyroots(trimmed)
    return _polish_roots(roots, trimmed)


def _real_if_close(arr: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    arr = np.asarray(arr)
    if np.iscomplexobj(arr):
        scale = max(np.abs(arr).max(), 1e-300)
        if np.abs(arr.imag).max() <= tol * scale:
            return arr.real.copy()
    return arr


def _resolve_mu(g_star, interval):
    """Accept a MuResponse or a plain callable plus explicit mu interval."""
    if isinstance(g_star, MuResponse):
        return g_star, g_star.interval
    if interval is None:
        raise InputError("a plain callable response needs an explicit mu interval")
    return g_star, (float(interval[0]), float(interval[1]))


# ---------------------------------------------------------------------------
# FIR and prefit


def design_fir(resp: DesiredResponse, order: int, grid_size: int = DEFAULT_GRID) -> FirDesign:
    """Trapezoid-weighted least-squares polynomial fit of h* on its interval."""
    if order < 0:
        raise InputError("FIR order must be >= 0")
    if grid_size < order + 1:
        raise InputError(f"grid size {grid_size} too small for order {order}")
    lam, w = _grid_weights(*resp.interval, grid_size)
    target = resp(lam)
    fit, info = Polynomial.fit(lam, target, order, w=np.sqrt(w), full=True)
    rank = info[1]
    if rank < order + 1:
        raise DesignError("fir", f"rank-deficient fit (rank {rank} < {order + 1})")
    h = fit.convert(domain=fit.domain, window=fit.domain).coef
    h = np.concatenate((h, np.zeros(order + 1 - len(h))))
    return FirDesign(h=h, interval=tuple(resp.interval))


def chebyshev_prefit(
    g_star,
    order: int,
    grid_size: int = DEFAULT_GRID,
    interval: tuple[float, float] | None = None,
) -> np.ndarray:
    """Degree-``order`` least-squares fit of g* in the rescaled Chebyshev basis.

    Returns ascending monomial coefficients over mu.
    """
    g_star, (lo, hi) = _resolve_mu(g_star, interval)
    if grid_size < order + 1:
        raise InputError(f"grid size {grid_size} too small for prefit order {order}")
    mu, w = _grid_weights(lo, hi, grid_size)
    target = np.asarray(g_star(mu))
    fit, info = Chebyshev.fit(mu, target, order, domain=[lo, hi], w=np.sqrt(w), full=True)
    if info[1] < order + 1:
        raise DesignError("prefit", f"numerically singular Chebyshev fit (rank {info[1]})")
    coef = fit.convert(domain=fit.domain, kind=Polynomial, window=fit.domain).coef
    return np.concatenate((coef, np.zeros(order + 1 - len(coef))))


# ---------------------------------------------------------------------------
# two-step Shank-style rational fit


def shank_step1_denominator(g_hat: np.ndarray, order: int, radius: float = 1.0) -> np.ndarray:
    """Denominator coefficients from the polynomial prefit.

    Equates coefficients of p_a(mu) ghat(mu) = p_b(mu): with deg p_b <= K-1,
    every product coefficient of degree K through Khat+K must vanish. The
    resulting overdetermined linear system in a_1..a_K is solved in least
    squares (in radius-normalized units).
    """
    g_hat = np.asarray(g_hat)
    k_hat = len(g_hat) - 1
    if order < 1:
        raise InputError("denominator order must be >= 1")
    if k_hat < order:
        raise InputError(f"prefit degree {k_hat} must be >= order {order}")
    gh = g_hat * radius ** np.arange(k_hat + 1)

    def coeff(i: int):
        return gh[i] if 0 <= i <= k_hat else 0.0

    rows = [[coeff(m - j) for j in range(1, order + 1)] for m in range(order, k_hat + order + 1)]
    rhs = [-coeff(m) for m in range(order, k_hat + order + 1)]
    system = np.array(rows)
    # rcond truncates noise-level directions (a constant-ish target yields an
    # all-noise system whose minimum-norm answer is a zero denominator)
    rhs = np.array(rhs)
    a_nu, _, rank, _ = np.linalg.lstsq(system, rhs, rcond=1e-10)
    scale = max(np.abs(gh).max(), 1e-300)
    if rank < order and np.linalg.norm(rhs) > 1e-9 * scale:
        raise DesignError(
            "shank-step1",
            f"singular coefficient system (rank {rank} < {order}); "
            "increase the prefit order or the grid",
        )
    return a_nu / radius ** np.arange(1, order + 1)


def shank_step2_numerator(
    g_star,
    a: np.ndarray,
    order: int,
    grid_size: int = DEFAULT_GRID,
    interval: tuple[float, float] | None = None,
) -> np.ndarray:
    """Numerator minimizing the grid-discretized response error with a fixed.

    With p_a fixed this is linear least squares in b, each grid point weighted
    by the trapezoid weight times 1/|p_a(mu)|^2.
    """
    g_star, (lo, hi) = _resolve_mu(g_star, interval)
    a = np.asarray(a)
    radius = max(abs(lo), abs(hi))
    mu, w = _grid_weights(lo, hi, grid_size)
    nu = mu / radius
    a_nu = a * radius ** np.arange(1, len(a) + 1)
    pa = npoly.polyval(nu, np.concatenate(([1.0], a_nu)))
    target = np.asarray(g_star(mu))
    basis = np.vander(nu, order, increasing=True) / pa[:, None]
    sw = np.sqrt(w)
    b_nu, _, rank, _ = np.linalg.lstsq(basis * sw[:, None], target * sw, rcond=None)
    if rank < order:
        raise DesignError("shank-step2", f"rank-deficient numerator fit (rank {rank})")
    return b_nu / radius ** np.arange(order)


def check_stability_rational(
    design: RationalDesign, epsilon: float = EPS_STABILITY
) -> StabilityReport:
    """All denominator roots with their margin |root| - r.

    Passes iff every margin exceeds epsilon: poles must lie strictly outside
    the closed disk |mu| <= r (the region classical designs put them inside).
    """
    roots_nu = _denominator_roots_scaled(design)
    roots = roots_nu * design.radius
    margins = np.abs(roots) - design.radius
    return StabilityReport(
        roots=roots, margins=margins, radius=design.radius, epsilon=epsilon
    )


# ---------------------------------------------------------------------------
# implementable forms


def to_arma1(design: RationalDesign) -> Arma1:
    """First-order coefficients of a K=1 design: psi = -a_1, phi = b_0."""
    if design.order != 1:
        raise InputError("to_arma1 requires a first-order design")
    return Arma1(psi=-design.a[0], phi=design.b[0], radius=design.radius)


def to_parallel(design: RationalDesign, eps_sep: float = EPS_SEPARATION) -> ParallelForm:
    """Partial-fraction decomposition into K first-order branches.

    Requires simple poles; the reconstruction sum_k r_k/(mu - p_k) is verified
    against p_b/p_a on a 1000-point grid before the form is returned.
    """
    K = design.order
    r = design.radius
    a_nu = design.a * r ** np.arange(1, K + 1)
    b_nu = design.b * r ** np.arange(K)
    pa_nu = np.concatenate(([1.0], a_nu))
    if np.abs(a_nu).max() == 0.0:
        # pure-numerator design: only the constant term is realizable, which
        # a single memoryless branch (psi = 0) carries
        form = ParallelForm(
            psi=np.zeros(K, dtype=complex),
            phi=np.concatenate(([design.b[0]], np.zeros(K - 1))),
            radius=r,
        )
        _verify_reconstruction(design, form, "parallel")
        return form
    if abs(a_nu[-1]) == 0.0:
        raise DesignError("parallel", "a_K = 0: denominator order below K; lower K")
    poles = _denominator_roots_scaled(design)
    for i in range(K):
        for j in range(i + 1, K):
            pair_scale = max(abs(poles[i]), abs(poles[j]))
            if abs(poles[i] - poles[j]) <= eps_sep * pair_scale:
                raise DesignError(
                    "parallel",
                    f"repeated poles {poles[i] * r:.6g} and {poles[j] * r:.6g} "
                    "(generalized residues are out of scope)",
                )
    der = npoly.polyder(pa_nu)
    residues = npoly.polyval(poles, b_nu.astype(complex)) / npoly.polyval(
        poles, der.astype(complex)
    )
    psi = 1.0 / (poles * r)
    phi = -residues / poles
    form = ParallelForm(psi=psi, phi=phi, radius=r)
    _verify_reconstruction(design, form, "parallel")
    return form


def _verify_reconstruction(design: RationalDesign, form, stage: str):
    grid = np.linspace(-design.radius, design.radius, DEFAULT_GRID)
    direct = evaluate_response(design, grid)
    recon = evaluate_response(form, grid)
    ref = max(np.abs(direct).max(), 1e-300)
    err = np.abs(recon - direct).max() / ref
    if err > 1e-6:
        raise DesignError(stage, f"form reconstruction error {err:.2e}")


def to_periodic(design: RationalDesign) -> PeriodicForm:
    """Periodic coefficient schedule realizing the same steady-state response.

    With theta fixed to the negated Shah schedule (0, 1, ..., 1), the period
    product must satisfy prod(theta_tau + psi_tau mu) = -sum_k a_k mu^k, so the
    psi are read off the roots of that polynomial divided by mu. phi then
    solves a K x K coefficient-matching system against p_b. Factors are
    ordered by descending |psi| (the dominant factor joins every numerator
    product), which keeps the phi system well conditioned.
    """
    K = design.order
    r = design.radius
    a_nu = design.a * r ** np.arange(1, K + 1)
    b_nu = np.asarray(design.b) * r ** np.arange(K)
    theta = np.ones(K)
    theta[0] = 0.0
    if np.abs(a_nu).max() == 0.0:
        # no feedback at all: the schedule only accumulates phi_0 x over the
        # period (constant responses)
        form = PeriodicForm(
            theta=theta,
            psi=np.zeros(K, dtype=complex),
            phi=np.concatenate(([design.b[0]], np.zeros(K - 1))),
            radius=r,
        )
        _verify_reconstruction(design, form, "periodic")
        return form
    if abs(a_nu[-1]) < 1e-300:
        raise DesignError("periodic", "a_K = 0: degenerate factorization; lower K")
    psi_nu = np.empty(K, dtype=complex)
    if K == 1:
        psi_nu[0] = -a_nu[0]
    else:
        reduced = -a_nu  # ascending coefficients of q(nu)/nu
        roots = _polish_roots(npoly.polyroots(reduced), reduced)
        if np.min(np.abs(roots)) < 1e-13:
            raise DesignError(
                "periodic", "a_1 = 0: the Shah schedule cannot factor a double zero"
            )
        roots = roots[np.argsort(-np.abs(roots), kind="stable")]
        psi_nu[1:] = -1.0 / roots
        psi_nu[0] = -a_nu[-1] * np.prod(-roots)
    # coefficient-matching system for phi: column tau holds the ascending
    # coefficients of prod_{sigma=K-tau}^{K-1} (theta_sigma + psi_sigma nu)
    system = np.zeros((K, K), dtype=complex)
    for tau in range(K):
        poly = np.array([1.0 + 0j])
        for sigma in range(K - tau, K):
            poly = npoly.polymul(poly, np.array([theta[sigma], psi_nu[sigma]]))
        system[: len(poly), K - tau - 1] = poly
    try:
        phi = np.linalg.solve(system, b_nu.astype(complex))
    except np.linalg.LinAlgError as exc:
        raise DesignError("periodic", f"singular numerator system: {exc}") from exc
    form = PeriodicForm(theta=theta, psi=psi_nu / r, phi=phi, radius=r)
    _verify_reconstruction(design, form, "periodic")
    return form


def evaluate_response(design, mu) -> np.ndarray:
    """Closed-form frequency response of any design object on a mu grid.

    FIR designs are evaluated in lambda = r - mu. Evaluations that land on a
    pole come back non-finite rather than raising.
    """
    mu = np.asarray(mu, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        if isinstance(design, FirDesign):
            lam = design.radius - mu
            return npoly.polyval(lam, design.h.astype(complex))
        if isinstance(design, RationalDesign):
            num = npoly.polyval(mu, design.b.astype(complex))
            den = npoly.polyval(mu, design.denominator().astype(complex))
            return num / den
        if isinstance(design, Arma1):
            return design.phi / (1.0 - design.psi * mu)
        if isinstance(design, ParallelForm):
            # phi/(1 - psi mu) = r/(mu - p); valid also for psi = 0 branches
            out = np.zeros_like(mu)
            for psi, phi in zip(design.psi, design.phi):
                out = out + phi / (1.0 - psi * mu)
            return out
        if isinstance(design, PeriodicForm):
            K = design.period
            num = np.zeros_like(mu)
            for tau in range(K):
                prod = np.ones_like(mu)
                for sigma in range(K - tau, K):
                    prod = prod * (design.theta[sigma] + design.psi[sigma] * mu)
                num = num + prod * design.phi[K - tau - 1]
            return num / (1.0 - design.round_product(mu))
    raise InputError(f"cannot evaluate response of {type(design).__name__}")


# ---------------------------------------------------------------------------
# the full pipeline


def _rational_from_poles(poles_nu: np.ndarray, radius: float) -> np.ndarray:
    """a-coefficients (mu units) of the monic-in-a_0 polynomial with the given
    nu-unit roots: p_a(nu) = prod(1 - nu/p)."""
    coeffs = npoly.polyfromroots(poles_nu)
    coeffs = coeffs / coeffs[0]
    a_nu = _real_if_close(coeffs[1:])
    return a_nu / radius ** np.arange(1, len(a_nu) + 1)


def _grid_l2_error(design, g_star: MuResponse, grid_size: int = DEFAULT_GRID) -> float:
    mu, w = _grid_weights(*g_star.interval, grid_size)
    diff = evaluate_response(design, mu) - g_star(mu)
    return float(np.sqrt(np.sum(w * np.abs(diff) ** 2)))


def design_arma(
    resp: DesiredResponse,
    order: int,
    prefit_order: int | None = None,
    grid_size: int = DEFAULT_GRID,
    eps_stability: float = EPS_STABILITY,
    eps_separation: float = EPS_SEPARATION,
    periodic_contraction: float = PERIODIC_CONTRACTION,
) -> DesignResult:
    """Design a stable order-K universal ARMA filter for the given response.

    Stages: Chebyshev prefit (order K+1 by default) -> denominator via
    coefficient matching -> stability check with a prefit-order retry ladder
    and pole reflection as a last resort -> denominator shrink until the
    periodic schedule is contractive -> numerator least squares -> parallel
    and periodic forms.
    """
    if order < 1:
        raise InputError("order must be >= 1 for ARMA; use design_fir for pure FIR")
    g_star = map_to_mu(resp)
    r = g_star.radius
    base = prefit_order if prefit_order is not None else order + 1
    if base <= order:
        raise InputError(f"prefit order {base} must exceed the design order {order}")
    ladder = [base] + [k for k in range(order + 2, order + 6) if k != base]

    chosen_a = None
    chosen_khat = ladder[-1]
    reflected = False
    first_attempt = None
    for khat in ladder:
        g_hat = chebyshev_prefit(g_star, khat, grid_size)
        a = shank_step1_denominator(g_hat, order, radius=r)
        a = _real_if_close(a)
        # a denominator at noise level means the target needs no feedback;
        # snap it so downstream forms use psi = 0 instead of noise poles
        a_scale = np.abs(a * r ** np.arange(1, order + 1)).max()
        if a_scale < 1e-9 * max(1.0, np.abs(g_hat * r ** np.arange(khat + 1)).max()):
            a = np.zeros(order)
        report = check_stability_rational(RationalDesign(np.zeros(order), a, r), eps_stability)
        if first_attempt is None:
            first_attempt = (a, khat)
        if report.passed:
            chosen_a, chosen_khat = a, khat
            break
    if chosen_a is None:
        # reflect the offending poles of the first attempt outward
        a, chosen_khat = first_attempt
        design0 = RationalDesign(np.zeros(order), a, r)
        poles_nu = _denominator_roots_scaled(design0)
        target = 1.0 + 0.05
        mags = np.abs(poles_nu)
        bad = mags <= 1.0 + eps_stability / max(r, 1e-300)
        fixed = poles_nu.copy()
        fixed[bad & (mags > 0)] = target * poles_nu[bad & (mags > 0)] / mags[bad & (mags > 0)]
        fixed[bad & (mags == 0)] = target
        chosen_a = _real_if_close(_rational_from_poles(fixed, r))
        reflected = True

    # shrink the AR part until the Shah-schedule period product is contractive
    mu, _ = _grid_weights(*g_star.interval, grid_size)
    pa = npoly.polyval(mu / r, np.concatenate(([1.0], chosen_a * r ** np.arange(1, order + 1))))
    max_q = float(np.max(np.abs(1.0 - pa)))
    beta = 1.0
    if max_q > periodic_contraction:
        beta = periodic_contraction / max_q
        chosen_a = beta * chosen_a

    b = shank_step2_numerator(g_star, chosen_a, order, grid_size)
    b = _real_if_close(b)
    rational = RationalDesign(b=b, a=chosen_a, radius=r)
    stability = check_stability_rational(rational, eps_stability)
    if not stability.passed:
        raise DesignError(
            "stability",
            f"pipeline produced an unstable denominator (margins {stability.margins})",
        )
    parallel = to_parallel(rational, eps_separation)
    periodic = to_periodic(rational)
    return DesignResult(
        response=resp,
        rational=rational,
        parallel=parallel,
        periodic=periodic,
        stability=stability,
        l2_error=_grid_l2_error(rational, g_star, grid_size),
        prefit_order=chosen_khat,
        denominator_scale=beta,
        reflected=reflected,
    )


def fir_l2_error(fir: FirDesign, resp: DesiredResponse, grid_size: int = DEFAULT_GRID) -> float:
    """Grid L2 response error of a FIR design in the same measure as design_arma."""
    lam, w = _grid_weights(*resp.interval, grid_size)
    diff = npoly.polyval(lam, fir.h) - resp(lam)
    return float(np.sqrt(np.sum(w * np.abs(diff) ** 2)))


# ---------------------------------------------------------------------------
# random stable designs (test and demo tooling)


def random_stable_design(
    order: int,
    radius: float = 1.0,
    seed=0,
    pole_radius=(1.3, 3.0),
    periodic_bound: float = 0.9,
    max_tries: int = 200,
) -> RationalDesign:
    """Random design that is stable for every implementable form.

    Poles are sampled outside the disk (conjugate-paired), residues scaled so
    the response is O(1); candidates are rejected until the periodic grid
    contraction bound also passes ``periodic_bound``.
    """
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        n_pairs = int(rng.integers(0, order // 2 + 1))
        n_real = order - 2 * n_pairs
        poles = []
        mags = rng.uniform(*pole_radius, size=n_pairs + n_real)
        for i in range(n_pairs):
            ang = rng.uniform(0.15, np.pi - 0.15)
            p = mags[i] * np.exp(1j * ang)
            poles.extend([p, np.conj(p)])
        for i in range(n_real):
            poles.append(mags[n_pairs + i] * rng.choice([-1.0, 1.0]))
        poles = np.array(poles, dtype=complex)
        if order > 1:
            sep = min(
                abs(poles[i] - poles[j])
                for i in range(order)
                for j in range(i + 1, order)
            )
            if sep < 0.05:
                continue
        residues = np.empty(order, dtype=complex)
        idx = 0
        for _ in range(n_pairs):
            val = rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
            residues[idx], residues[idx + 1] = val, np.conj(val)
            idx += 2
        residues[idx:] = rng.uniform(0.2, 1.0, size=n_real) * rng.choice(
            [-1.0, 1.0], size=n_real
        )
        # p_a(nu) = prod(1 - nu/p) = prod(nu - p) * prod(-1/p)
        lead = np.prod(-1.0 / poles)
        pa = npoly.polyfromroots(poles) * lead
        pb = np.zeros(order, dtype=complex)
        for k in range(order):
            others = (
                npoly.polyfromroots(np.delete(poles, k))
                if order > 1
                else np.array([1.0 + 0j])
            )
            pb[: len(others)] += residues[k] * others
        pb = pb * lead
        a_nu = _real_if_close(pa[1:], tol=1e-8)
        b_nu = _real_if_close(pb, tol=1e-8)
        if np.iscomplexobj(a_nu) or np.iscomplexobj(b_nu):
            continue
        grid = np.linspace(-1.0, 1.0, 201)
        max_q = np.max(np.abs(1.0 - npoly.polyval(grid, np.concatenate(([1.0], a_nu)))))
        if max_q > periodic_bound:
            continue
        powers = radius ** np.arange(1, order + 1)
        return RationalDesign(
            b=b_nu / radius ** np.arange(order), a=a_nu / powers, radius=radius
        )
    raise DesignError("random", "could not sample a stable design")
