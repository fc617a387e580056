"""Round-synchronous distributed execution of graph filter recursions.

Every node holds only its own row of the shifted operator M (neighbor weights
plus the diagonal entry); one round = every node sends its current state to
its neighbors and updates from what it received. The engine therefore never
multiplies by a global matrix on a node's behalf -- the vectorized fast path
is an exact re-expression of the per-node update (same per-row summation
order), and an explicit message-object mode exists so tests can audit
locality and accounting message by message.

Families: restarted FIR(K), first-order recursion (one branch), parallel
branches (K independent first-order recursions, outputs summed), and the
periodic coefficient schedule (outputs valid at period boundaries).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .design import Arma1, FirDesign, ParallelForm, PeriodicForm
from .errors import InputError, StabilityError
from .graphs import Graph, GraphSignal
from .spectral import default_interval, laplacian_entries


@dataclass(frozen=True)
class RoundMessage:
    """One neighbor-to-neighbor transmission: one payload scalar per branch."""

    sender: int
    receiver: int
    payload: tuple


class GraphTables:
    """Per-node neighbor tables (CSR rows of L and M) for one graph snapshot."""

    def __init__(self, graph: Graph, variant: str, interval: tuple[float, float],
                 custom_matrix=None):
        self.graph = graph
        self.variant = variant
        lmin, lmax = float(interval[0]), float(interval[1])
        self.interval = (lmin, lmax)
        self.radius = (lmax - lmin) / 2.0
        diag, off = laplacian_entries(graph, variant, custom_matrix)
        n = graph.n
        rows: list[list[tuple[int, float]]] = [[(i, diag[i])] for i in range(n)]
        for i, j, v in off:
            rows[i].append((j, v))
            rows[j].append((i, v))
        indptr = np.zeros(n + 1, dtype=np.int64)
        indices = []
        l_data = []
        for i in range(n):
            rows[i].sort()
            indptr[i + 1] = indptr[i] + len(rows[i])
            for j, v in rows[i]:
                indices.append(j)
                l_data.append(v)
        self.indptr = indptr
        self.indices = np.array(indices, dtype=np.int64)
        l_vals = np.array(l_data)
        m_vals = -l_vals  # off-diagonal: M_ij = -L_ij
        diag_mask = self.indices == np.repeat(np.arange(n), np.diff(indptr))
        m_vals[diag_mask] = self.radius - l_vals[diag_mask]  # M_ii = r - L_ii
        self.l_csr = sp.csr_matrix((l_vals, self.indices, indptr), shape=(n, n))
        self.m_csr = sp.csr_matrix((m_vals, self.indices, indptr), shape=(n, n))
        self.degrees = np.diff(indptr) - 1  # neighbor count, diagonal excluded
        self.neighbor_sets = graph.neighbor_sets()

    @classmethod
    def build(cls, graph: Graph, variant: str = "discrete",
              interval: tuple[float, float] | None = None, custom_matrix=None):
        if interval is None:
            interval = default_interval(graph, variant)
        return cls(graph, variant, interval, custom_matrix)

    @property
    def n(self) -> int:
        return self.graph.n

    def dense_m(self) -> np.ndarray:
        return self.m_csr.toarray()

    def dense_l(self) -> np.ndarray:
        return self.l_csr.toarray()


@dataclass
class Trace:
    """Recorded run of one filter: outputs, validity, health, accounting."""

    family: str
    outputs: np.ndarray            # (T+1, n), real parts
    valid: np.ndarray              # (T+1,) output semantically valid this round
    max_imag: np.ndarray           # (T+1,) imaginary residue health metric
    sent_scalars: np.ndarray       # (T,) total payload scalars sent per round
    message_count: np.ndarray      # (T,) total messages per round
    gamma: float | None = None     # universal contraction bound of the form
    errors: np.ndarray | None = None   # (T+1,) relative error vs oracle
    per_node_sent: np.ndarray | None = None    # (T, n)
    per_node_stored: np.ndarray | None = None  # (T, n)
    message_log: list | None = None
    meta: dict = field(default_factory=dict)

    @property
    def rounds(self) -> int:
        return len(self.outputs) - 1

    def final_output(self) -> np.ndarray:
        """Output at the last valid round."""
        idx = np.nonzero(self.valid)[0]
        if len(idx) == 0:
            raise InputError("trace contains no valid output round")
        return self.outputs[idx[-1]]


@dataclass(frozen=True)
class AccountingReport:
    """Exact exchanged/stored scalar counts extracted from a trace."""

    family: str
    per_node_sent_max: np.ndarray
    per_node_stored_max: np.ndarray
    total_sent: int
    total_messages: int


def accounting_report(trace: Trace) -> AccountingReport:
    if trace.per_node_sent is None or trace.per_node_stored is None:
        raise InputError("trace was recorded without per-node accounting")
    return AccountingReport(
        family=trace.family,
        per_node_sent_max=trace.per_node_sent.max(axis=0),
        per_node_stored_max=trace.per_node_stored.max(axis=0),
        total_sent=int(trace.sent_scalars.sum()),
        total_messages=int(trace.message_count.sum()),
    )


def _check_form_stability(form, radius: float, force: bool):
    """Refuse to run divergent recursions unless explicitly forced."""
    if isinstance(form, FirDesign):
        return
    if isinstance(form, (Arma1, ParallelForm)):
        if form.contraction >= 1.0 and not force:
            raise StabilityError(
                f"unstable coefficients: |psi| r = {form.contraction:.6g} >= 1 "
                "(pass force=True to run a divergence demo)"
            )
        return
    if isinstance(form, PeriodicForm):
        bound = form.contraction_bound()
        if bound >= 1.0 and not force:
            raise StabilityError(
                f"unstable periodic schedule: grid contraction bound {bound:.6g} >= 1"
            )
        return
    raise InputError(f"unknown filter form {type(form).__name__}")


class FilterEngine:
    """Stateful round-synchronous executor for one filter on one graph.

    ``step`` advances a single round; the input signal and even the graph may
    change between rounds (node count must stay fixed). Periodic filters hold
    the input fixed within each period, restarted FIR captures it at each
    restart; first-order and parallel recursions use the instantaneous input.
    """

    def __init__(self, form, graph, variant: str = "discrete",
                 interval: tuple[float, float] | None = None,
                 custom_matrix=None, y0="zero", seed=None, force: bool = False):
        self.form = form
        if isinstance(graph, GraphTables):
            self.tables = graph
        else:
            self.tables = GraphTables.build(graph, variant, interval, custom_matrix)
        radius = getattr(form, "radius", None)
        if radius is not None and abs(radius - self.tables.radius) > 1e-9 * max(
            1.0, abs(radius)
        ):
            raise InputError(
                f"form designed for disk radius {radius} but the engine interval "
                f"gives {self.tables.radius}"
            )
        _check_form_stability(form, self.tables.radius, force)
        self.family = {
            FirDesign: "fir", Arma1: "arma1",
            ParallelForm: "parallel", PeriodicForm: "periodic",
        }[type(form)]
        self.t = 0
        n = self.tables.n
        self._x = np.zeros(n)
        self._x_held = np.zeros(n)
        if self.family == "fir":
            self._z = np.zeros(n)
            self._acc = np.zeros(n)
            self._branches = 1
        else:
            self._branches = form.order if self.family == "parallel" else 1
            self._state = self._initial_state(y0, seed, n)

    def _initial_state(self, y0, seed, n) -> np.ndarray:
        shape = (n, self._branches)
        if isinstance(y0, str):
            if y0 == "zero":
                return np.zeros(shape, dtype=complex)
            if y0 == "random":
                rng = np.random.default_rng(seed)
                return rng.standard_normal(shape) + 0j
            raise InputError(f"unknown initial condition {y0!r}")
        arr = np.asarray(y0, dtype=complex)
        if arr.shape == (n,) and self._branches == 1:
            arr = arr[:, None]
        if arr.shape != shape:
            raise InputError(f"initial condition shape {arr.shape} != {shape}")
        return arr.copy()

    # ------------------------------------------------------------------
    @property
    def graph(self) -> Graph:
        return self.tables.graph

    @property
    def output(self) -> np.ndarray:
        return self._output_complex().real

    @property
    def output_imag_max(self) -> float:
        out = self._output_complex()
        return float(np.abs(out.imag).max()) if np.iscomplexobj(out) else 0.0

    def _output_complex(self):
        if self.family == "fir":
            return self._acc
        if self.family == "parallel":
            return self._state.sum(axis=1)
        return self._state[:, 0]

    @property
    def output_valid(self) -> bool:
        if self.family in ("arma1", "parallel"):
            return True
        period = self.form.order if self.family == "fir" else self.form.period
        if self.family == "fir":
            return period == 0 or (self.t > 0 and self.t % period == 0)
        return self.t % period == 0

    # ------------------------------------------------------------------
    def step(self, x=None, graph=None, record_messages: bool = False):
        """Advance one round against the current graph and signal.

        Returns (output, messages): messages is None unless recording.
        """
        if graph is not None:
            tables = graph if isinstance(graph, GraphTables) else GraphTables.build(
                graph, self.tables.variant, self.tables.interval
            )
            if tables.n != self.tables.n:
                raise InputError("node count may not change during a run")
            if abs(tables.radius - self.tables.radius) > 1e-12 * max(1.0, tables.radius):
                raise InputError("spectral interval may not change during a run")
            self.tables = tables
        if x is not None:
            x = np.asarray(
                x.to_array() if isinstance(x, GraphSignal) else x, dtype=float
            ).reshape(-1)
            if x.shape != (self.tables.n,):
                raise InputError(
                    f"signal length {x.shape[0]} != node count {self.tables.n}"
                )
            self._x = x

        messages = None
        if self.family == "fir":
            messages = self._step_fir(record_messages)
        elif self.family == "periodic":
            messages = self._step_periodic(record_messages)
        else:
            messages = self._step_branches(record_messages)
        self.t += 1
        return self.output, messages

    def _exchange(self, values: np.ndarray, matrix, record: bool):
        """One message round: weighted neighbor sums of per-branch values.

        values: (n, B). Returns (n, B) of matrix @ values computed either by
        sparse matvec or, in recording mode, per node from explicit messages
        (identical row summation order).
        """
        if not record:
            return matrix @ values, None
        tab = self.tables
        n = tab.n
        log = []
        out = np.zeros_like(values)
        data = matrix.data
        for i in range(n):
            lo, hi = tab.indptr[i], tab.indptr[i + 1]
            acc = np.zeros(values.shape[1], dtype=values.dtype)
            for k in range(lo, hi):
                j = int(tab.indices[k])
                if j != i:
                    if j not in tab.neighbor_sets[i]:
                        raise AssertionError(
                            f"locality violation: message {j}->{i} off-edge"
                        )
                    log.append(RoundMessage(sender=j, receiver=i,
                                            payload=tuple(values[j])))
                acc += data[k] * values[j]
            out[i] = acc
        return out, log

    def _step_branches(self, record: bool):
        form = self.form
        psi = np.atleast_1d(np.asarray(form.psi, dtype=complex))
        phi = np.atleast_1d(np.asarray(form.phi, dtype=complex))
        mixed, log = self._exchange(self._state, self.tables.m_csr, record)
        self._state = mixed * psi[None, :] + self._x[:, None] * phi[None, :]
        return log

    def _step_periodic(self, record: bool):
        form = self.form
        phase = self.t % form.period
        if phase == 0:
            self._x_held = self._x
        mixed, log = self._exchange(self._state, self.tables.m_csr, record)
        self._state = (
            form.theta[phase] * self._state
            + form.psi[phase] * mixed
            + form.phi[phase] * self._x_held[:, None]
        )
        return log

    def _step_fir(self, record: bool):
        order = self.form.order
        if order == 0:
            self._acc = self.form.h[0] * self._x
            return [] if record else None
        phase = self.t % order
        if phase == 0:
            self._x_held = self._x
            self._z = self._x.copy()
            self._acc = self.form.h[0] * self._x
        mixed, log = self._exchange(self._z[:, None], self.tables.l_csr, record)
        self._z = mixed[:, 0]
        self._acc = self._acc + self.form.h[phase + 1] * self._z
        return log

    # ------------------------------------------------------------------
    def scalars_sent_per_node(self) -> np.ndarray:
        """Payload scalars each node transmits in one round of this family."""
        deg = self.tables.degrees
        if self.family == "parallel":
            return self.form.order * deg
        if self.family == "fir" and self.form.order == 0:
            return np.zeros_like(deg)
        return deg.copy()

    def messages_per_node(self) -> np.ndarray:
        """Messages each node sends per round: one per neighbor."""
        if self.family == "fir" and self.form.order == 0:
            return np.zeros_like(self.tables.degrees)
        return self.tables.degrees.copy()

    def scalars_stored_per_node(self) -> np.ndarray:
        """Graph-dependent scalars held per node: received payloads + state
        + captured input (filter constants excluded)."""
        deg = self.tables.degrees
        if self.family == "parallel":
            k = self.form.order
            return k * deg + k + 1
        if self.family == "fir":
            if self.form.order == 0:
                return np.full_like(deg, 2)
            return deg + 3
        return deg + 2


def run_filter(
    form,
    graph,
    signal,
    rounds: int,
    variant: str = "discrete",
    interval: tuple[float, float] | None = None,
    custom_matrix=None,
    y0="zero",
    seed=None,
    force: bool = False,
    graph_provider=None,
    oracle=None,
    record_accounting: bool = True,
    record_messages: bool = False,
) -> Trace:
    """Run any filter family for a fixed number of rounds and record a trace.

    ``signal`` is a static vector or a provider callable(t, graph) -> vector.
    ``graph_provider`` (callable(t) -> Graph) overrides the static graph from
    round t onward; changes take effect atomically at round boundaries.
    ``oracle`` is a reference output; per-round relative errors are recorded.
    """
    if rounds < 0:
        raise InputError("rounds must be >= 0")
    engine = FilterEngine(
        form, graph, variant=variant, interval=interval,
        custom_matrix=custom_matrix, y0=y0, seed=seed, force=force,
    )
    n = engine.tables.n
    static_x = None if callable(signal) else np.asarray(
        signal.to_array() if isinstance(signal, GraphSignal) else signal, dtype=float
    )
    outputs = np.zeros((rounds + 1, n))
    valid = np.zeros(rounds + 1, dtype=bool)
    imag = np.zeros(rounds + 1)
    sent = np.zeros(rounds, dtype=np.int64)
    msgs = np.zeros(rounds, dtype=np.int64)
    node_sent = np.zeros((rounds, n), dtype=np.int64) if record_accounting else None
    node_stored = np.zeros((rounds, n), dtype=np.int64) if record_accounting else None
    log = [] if record_messages else None

    outputs[0] = engine.output
    valid[0] = engine.output_valid and engine.family != "fir"
    imag[0] = engine.output_imag_max
    y_star = None
    if oracle is not None:
        y_star = np.asarray(oracle, dtype=float)
    errors = np.full(rounds + 1, np.nan) if y_star is not None else None
    if errors is not None:
        errors[0] = np.linalg.norm(outputs[0] - y_star) / np.linalg.norm(y_star)

    for t in range(rounds):
        g_t = graph_provider(t) if graph_provider is not None else None
        if g_t is not None and not isinstance(g_t, GraphTables):
            g_t = GraphTables.build(g_t, engine.tables.variant, engine.tables.interval)
        current_graph = (g_t or engine.tables).graph
        x_t = signal(t, current_graph) if callable(signal) else static_x
        out, round_log = engine.step(x=x_t, graph=g_t, record_messages=record_messages)
        per_node = engine.scalars_sent_per_node()
        sent[t] = per_node.sum()
        msgs[t] = engine.messages_per_node().sum()
        if record_accounting:
            node_sent[t] = per_node
            node_stored[t] = engine.scalars_stored_per_node()
        if record_messages:
            log.append(round_log)
        outputs[t + 1] = out
        valid[t + 1] = engine.output_valid
        imag[t + 1] = engine.output_imag_max
        if errors is not None:
            errors[t + 1] = np.linalg.norm(out - y_star) / np.linalg.norm(y_star)

    gamma = None
    if isinstance(form, (Arma1, ParallelForm)):
        gamma = form.contraction
    elif isinstance(form, PeriodicForm):
        gamma = form.contraction_bound()
    return Trace(
        family=engine.family,
        outputs=outputs,
        valid=valid,
        max_imag=imag,
        sent_scalars=sent,
        message_count=msgs,
        gamma=gamma,
        errors=errors,
        per_node_sent=node_sent,
        per_node_stored=node_stored,
        message_log=log,
        meta={
            "rounds": rounds,
            "variant": engine.tables.variant,
            "interval": engine.tables.interval,
        },
    )


def run_fir(form: FirDesign, graph, signal, rounds: int, **kw) -> Trace:
    return run_filter(form, graph, signal, rounds, **kw)


def run_arma1(form, graph, signal, rounds: int, **kw) -> Trace:
    """form: an Arma1 or a (psi, phi) pair (radius taken from the engine)."""
    if not isinstance(form, Arma1):
        psi, phi = form
        tables = graph if isinstance(graph, GraphTables) else GraphTables.build(
            graph, kw.get("variant", "discrete"), kw.get("interval")
        )
        form = Arma1(psi=psi, phi=phi, radius=tables.radius)
    return run_filter(form, graph, signal, rounds, **kw)


def run_parallel(form: ParallelForm, graph, signal, rounds: int, **kw) -> Trace:
    return run_filter(form, graph, signal, rounds, **kw)


def run_periodic(form: PeriodicForm, graph, signal, rounds: int, **kw) -> Trace:
    return run_filter(form, graph, signal, rounds, **kw)


def step_time_varying(engine: FilterEngine, new_signal=None, new_graph=None):
    """Advance one round, optionally swapping the signal and/or the graph."""
    out, _ = engine.step(x=new_signal, graph=new_graph)
    return out


# ---------------------------------------------------------------------------
# dense steady states and contraction rates


def steady_state(form, tables: GraphTables, x) -> np.ndarray:
    """Dense-solve steady state of a stable filter on a static graph/signal."""
    x = np.asarray(x, dtype=float)
    n = tables.n
    eye = np.eye(n)
    if isinstance(form, FirDesign):
        l_dense = tables.dense_l()
        out = form.h[-1] * x
        for coeff in form.h[-2::-1]:
            out = l_dense @ out + coeff * x
        return out
    m_dense = tables.dense_m()
    if isinstance(form, Arma1):
        return np.linalg.solve(eye - form.psi * m_dense, form.phi * x).real
    if isinstance(form, ParallelForm):
        out = np.zeros(n, dtype=complex)
        for psi, phi in zip(form.psi, form.phi):
            out += np.linalg.solve(eye - psi * m_dense, phi * x)
        return out.real
    if isinstance(form, PeriodicForm):
        a_mat = np.eye(n, dtype=complex)
        b_mat = np.zeros((n, n), dtype=complex)
        for tau in range(form.period):
            gamma_t = form.theta[tau] * eye + form.psi[tau] * m_dense
            a_mat = gamma_t @ a_mat
            b_mat = gamma_t @ b_mat + form.phi[tau] * eye
        return np.linalg.solve(np.eye(n) - a_mat, b_mat @ x).real
    raise InputError(f"no steady state for {type(form).__name__}")


def contraction_ratio(form, mus) -> float:
    """Exact error contraction on a graph with the given M eigenvalues.

    Per round for first-order/parallel recursions; per period for periodic.
    """
    mus = np.asarray(mus, dtype=float)
    if isinstance(form, Arma1):
        return float(np.max(np.abs(form.psi * mus)))
    if isinstance(form, ParallelForm):
        return float(np.max(np.abs(form.psi[:, None] * mus[None, :])))
    if isinstance(form, PeriodicForm):
        return float(np.max(np.abs(form.round_product(mus))))
    raise InputError(f"no contraction ratio for {type(form).__name__}")


def rounds_for_tolerance(gamma: float, tol: float = 1e-6) -> int:
    """Rounds needed for gamma^T <= tol (a safe default horizon)."""
    if not 0.0 < gamma < 1.0:
        raise InputError("gamma must be in (0, 1)")
    return int(np.ceil(np.log(tol) / np.log(gamma)))


# ---------------------------------------------------------------------------
# signal providers


def constant_signal(x):
    x = np.asarray(x, dtype=float)
    return lambda t, graph: x


def switch_signal(t_switch: int, before, after):
    """Input that jumps from one vector to another at round t_switch."""
    before = np.asarray(before, dtype=float)
    after = np.asarray(after, dtype=float)
    return lambda t, graph: before if t < t_switch else after


def sinusoid_signal(omega: float, base, amplitude: float = 1.0):
    """x_t = amplitude * cos(omega t) * base."""
    base = np.asarray(base, dtype=float)
    return lambda t, graph: amplitude * np.cos(omega * t) * base


def degree_signal(t, graph: Graph):
    """The instantaneous (weighted) node degree of the current graph."""
    return graph.degree_vector()


@dataclass
class SimulationConfig:
    """Bundle describing one reproducible engine run."""

    form: object                     # FirDesign | Arma1 | ParallelForm | PeriodicForm
    rounds: int
    initial: object = "zero"         # "zero" | "random" | explicit state
    seed: int | None = None
    variant: str = "discrete"
    interval: tuple[float, float] | None = None
    force: bool = False
    record_accounting: bool = True
    record_messages: bool = False

    def __post_init__(self):
        if self.rounds < 0:
            raise InputError("rounds must be >= 0")


def simulate(config: SimulationConfig, graph, signal, graph_provider=None,
             oracle=None) -> Trace:
    """Run a SimulationConfig: static or provider-driven signal and graph."""
    return run_filter(
        config.form, graph, signal, config.rounds,
        variant=config.variant, interval=config.interval,
        y0=config.initial, seed=config.seed, force=config.force,
        graph_provider=graph_provider, oracle=oracle,
        record_accounting=config.record_accounting,
        record_messages=config.record_messages,
    )
