"""File formats: graphs, signals, spectra, traces, design documents, configs.

Node indices are 1-based in every text format (internal arrays are 0-based).
Design documents are JSON and round-trip floats exactly (shortest-repr).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import yaml

from .design import (
    Arma1,
    DesignResult,
    FirDesign,
    ParallelForm,
    PeriodicForm,
    RationalDesign,
    StabilityReport,
)
from .engine import (
    Trace,
    constant_signal,
    degree_signal,
    sinusoid_signal,
    switch_signal,
)
from .errors import InputError
from .graphs import Graph, normalize_edges
from .responses import DesiredResponse
from .spectral import Spectrum

DESIGN_FORMAT = "armagf-design-v1"


# ---------------------------------------------------------------------------
# graphs


def read_graph(path) -> Graph:
    """Whitespace edge list: "i j [w]" plus optional "# pos i x y" lines."""
    edges = []
    positions: dict[int, tuple[float, float]] = {}
    max_node = 0
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts[:1] == ["pos"]:
                if len(parts) != 4:
                    raise InputError(f"{path}:{lineno}: malformed pos line")
                idx = int(parts[1]) - 1
                positions[idx] = (float(parts[2]), float(parts[3]))
                max_node = max(max_node, idx + 1)
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise InputError(f"{path}:{lineno}: expected 'i j [w]'")
        i, j = int(parts[0]) - 1, int(parts[1]) - 1
        w = float(parts[2]) if len(parts) == 3 else 1.0
        if i < 0 or j < 0:
            raise InputError(f"{path}:{lineno}: node indices are 1-based")
        edges.append((i, j, w))
        max_node = max(max_node, i + 1, j + 1)
    if max_node == 0:
        raise InputError(f"{path}: empty graph file")
    pos = None
    if positions:
        if set(positions) != set(range(max_node)):
            raise InputError(f"{path}: pos lines must cover all nodes or none")
        pos = tuple(positions[i] for i in range(max_node))
    return Graph(max_node, normalize_edges(edges), positions=pos)


def write_graph(path, graph: Graph):
    lines = [f"{i + 1} {j + 1} {float(w)!r}" for i, j, w in graph.edges]
    if graph.positions is not None:
        lines += [
            f"# pos {i + 1} {float(x)!r} {float(y)!r}"
            for i, (x, y) in enumerate(graph.positions)
        ]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# signals


def read_signal(path) -> np.ndarray:
    """Static signal CSV with header "node,value"."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["node", "value"]:
            raise InputError(f"{path}: expected header 'node,value'")
        rows = [(int(r[0]) - 1, float(r[1])) for r in reader if r]
    n = max(i for i, _ in rows) + 1
    x = np.zeros(n)
    seen = np.zeros(n, dtype=bool)
    for i, v in rows:
        x[i] = v
        seen[i] = True
    if not seen.all():
        raise InputError(f"{path}: missing values for some nodes")
    return x


def write_signal(path, x):
    x = np.asarray(x, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "value"])
        for i, v in enumerate(x):
            writer.writerow([i + 1, repr(float(v))])


def read_time_varying_signal(path) -> dict[int, np.ndarray]:
    """Rows "t,node,value" -> {t: vector}; later rounds reuse the last given."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "node", "value"]:
            raise InputError(f"{path}: expected header 't,node,value'")
        rows = [(int(r[0]), int(r[1]) - 1, float(r[2])) for r in reader if r]
    n = max(i for _, i, _ in rows) + 1
    out: dict[int, np.ndarray] = {}
    for t, i, v in rows:
        out.setdefault(t, np.zeros(n))[i] = v
    return out


def tv_signal_provider(frames: dict[int, np.ndarray]):
    """Provider that holds the most recent frame at or before round t."""
    times = sorted(frames)
    if not times:
        raise InputError("time-varying signal contains no frames")

    def provider(t, graph):
        idx = np.searchsorted(times, t, side="right") - 1
        return frames[times[max(idx, 0)]]

    return provider


def parse_signal_source(source: str, n: int):
    """CLI signal syntax: a CSV path or a named built-in.

    constant:<v> | switch:<t0>:<v0>:<v1> | sinusoid:<omega>[:<amp>] | degree
    CSV files may be static ("node,value") or time-varying ("t,node,value").
    """
    if source == "degree":
        return degree_signal, "degree"
    if source.startswith("constant:"):
        v = float(source.split(":", 1)[1])
        return constant_signal(np.full(n, v)), source
    if source.startswith("switch:"):
        _, t0, v0, v1 = source.split(":")
        return (
            switch_signal(int(t0), np.full(n, float(v0)), np.full(n, float(v1))),
            source,
        )
    if source.startswith("sinusoid:"):
        parts = source.split(":")
        omega = float(parts[1])
        amp = float(parts[2]) if len(parts) > 2 else 1.0
        return sinusoid_signal(omega, np.ones(n), amp), source
    path = Path(source)
    if not path.exists():
        raise InputError(f"signal source {source!r}: no such file or built-in")
    with open(path, newline="") as fh:
        header = fh.readline().strip()
    if header == "node,value":
        return read_signal(path), str(path)
    if header == "t,node,value":
        return tv_signal_provider(read_time_varying_signal(path)), str(path)
    raise InputError(f"{path}: unrecognized signal header {header!r}")


# ---------------------------------------------------------------------------
# spectra and traces


def write_spectrum(path, spectrum: Spectrum):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "lambda", "mu"])
        for k in range(spectrum.n):
            writer.writerow(
                [k + 1, repr(float(spectrum.lambdas[k])), repr(float(spectrum.mus[k]))]
            )


def write_trace(path, trace: Trace):
    """Rows "t,node,value" for every recorded round."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "node", "value"])
        for t in range(trace.outputs.shape[0]):
            for i in range(trace.outputs.shape[1]):
                writer.writerow([t, i + 1, repr(float(trace.outputs[t, i]))])


def _plain(obj):
    """Recursively convert numpy scalars/arrays for YAML serialization."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_summary(path, summary: dict):
    Path(path).write_text(yaml.safe_dump(_plain(summary), sort_keys=False))


# ---------------------------------------------------------------------------
# design documents


def _encode_array(arr) -> dict:
    arr = np.asarray(arr)
    return {
        "re": [float(v) for v in arr.real],
        "im": [float(v) for v in np.asarray(arr, dtype=complex).imag],
    }


def _decode_array(obj) -> np.ndarray:
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    if np.all(im == 0.0):
        return re
    return re + 1j * im


def _encode_response(resp: DesiredResponse) -> dict:
    return {
        "kind": resp.kind,
        "interval": [resp.interval[0], resp.interval[1]],
        "cutoff": resp.cutoff,
        "band": list(resp.band) if resp.band else None,
        "samples": [list(p) for p in resp.samples] if resp.samples else None,
    }


def _decode_response(obj) -> DesiredResponse:
    return DesiredResponse(
        kind=obj["kind"],
        interval=tuple(obj["interval"]),
        cutoff=obj["cutoff"],
        band=tuple(obj["band"]) if obj["band"] else None,
        samples=tuple(tuple(p) for p in obj["samples"]) if obj["samples"] else None,
    )


def design_to_dict(result: DesignResult) -> dict:
    stab = result.stability
    return {
        "format": DESIGN_FORMAT,
        "family": "arma",
        "order": result.rational.order,
        "radius": result.rational.radius,
        "response": _encode_response(result.response),
        "rational": {
            "b": _encode_array(result.rational.b),
            "a": _encode_array(result.rational.a),
        },
        "parallel": {
            "psi": _encode_array(result.parallel.psi),
            "phi": _encode_array(result.parallel.phi),
        },
        "periodic": {
            "theta": [float(v) for v in result.periodic.theta],
            "psi": _encode_array(result.periodic.psi),
            "phi": _encode_array(result.periodic.phi),
        },
        "stability": {
            "roots": _encode_array(stab.roots),
            "margins": [float(v) for v in stab.margins],
            "radius": stab.radius,
            "epsilon": stab.epsilon,
            "passed": stab.passed,
        },
        "metrics": {
            "l2_error": result.l2_error,
            "prefit_order": result.prefit_order,
            "denominator_scale": result.denominator_scale,
            "reflected": result.reflected,
        },
    }


def design_from_dict(doc: dict) -> DesignResult:
    if doc.get("format") != DESIGN_FORMAT:
        raise InputError(f"not a design document (format={doc.get('format')!r})")
    if doc.get("family") != "arma":
        raise InputError("design document does not hold an ARMA design")
    radius = float(doc["radius"])
    rational = RationalDesign(
        b=_decode_array(doc["rational"]["b"]),
        a=_decode_array(doc["rational"]["a"]),
        radius=radius,
    )
    parallel = ParallelForm(
        psi=_decode_array(doc["parallel"]["psi"]),
        phi=_decode_array(doc["parallel"]["phi"]),
        radius=radius,
    )
    periodic = PeriodicForm(
        theta=np.asarray(doc["periodic"]["theta"], dtype=float),
        psi=_decode_array(doc["periodic"]["psi"]),
        phi=_decode_array(doc["periodic"]["phi"]),
        radius=radius,
    )
    stab = doc["stability"]
    stability = StabilityReport(
        roots=np.asarray(_decode_array(stab["roots"]), dtype=complex),
        margins=np.asarray(stab["margins"], dtype=float),
        radius=float(stab["radius"]),
        epsilon=float(stab["epsilon"]),
    )
    metrics = doc["metrics"]
    return DesignResult(
        response=_decode_response(doc["response"]),
        rational=rational,
        parallel=parallel,
        periodic=periodic,
        stability=stability,
        l2_error=float(metrics["l2_error"]),
        prefit_order=int(metrics["prefit_order"]),
        denominator_scale=float(metrics["denominator_scale"]),
        reflected=bool(metrics["reflected"]),
    )


def fir_to_dict(fir: FirDesign, resp: DesiredResponse | None = None,
                l2_error: float | None = None) -> dict:
    doc = {
        "format": DESIGN_FORMAT,
        "family": "fir",
        "order": fir.order,
        "interval": [fir.interval[0], fir.interval[1]],
        "h": [float(v) for v in fir.h],
    }
    if resp is not None:
        doc["response"] = _encode_response(resp)
    if l2_error is not None:
        doc["metrics"] = {"l2_error": l2_error}
    return doc


def fir_from_dict(doc: dict) -> FirDesign:
    if doc.get("format") != DESIGN_FORMAT or doc.get("family") != "fir":
        raise InputError("not a FIR design document")
    return FirDesign(h=np.asarray(doc["h"], dtype=float), interval=tuple(doc["interval"]))


def write_design(path, doc: dict):
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_design(path):
    """Load a design document; returns DesignResult or FirDesign."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read design {path}: {exc}") from exc
    if doc.get("family") == "fir":
        return fir_from_dict(doc)
    return design_from_dict(doc)


def pick_form(design, family: str):
    """Select a runnable filter form from a loaded design document."""
    if isinstance(design, FirDesign):
        if family not in ("fir", "auto"):
            raise InputError(f"FIR design cannot run as family {family!r}")
        return design
    if family in ("parallel", "auto"):
        return design.parallel
    if family == "periodic":
        return design.periodic
    if family == "arma1":
        if design.rational.order != 1:
            raise InputError("family arma1 requires an order-1 design")
        return Arma1(
            psi=-design.rational.a[0],
            phi=design.rational.b[0],
            radius=design.rational.radius,
        )
    if family == "fir":
        raise InputError("ARMA design cannot run as family 'fir'")
    raise InputError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# experiment CSVs and response surfaces


def write_columns_csv(path, columns: dict[str, list]):
    names = list(columns)
    rows = len(columns[names[0]]) if names else 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for r in range(rows):
            writer.writerow(
                [
                    repr(v) if isinstance(v, float) else v
                    for v in (columns[name][r] for name in names)
                ]
            )


def write_surface(path, omegas, mus, values):
    """CSV "omega,mu,magnitude,phase" for |H(e^{j omega}, mu)| heatmaps."""
    values = np.asarray(values)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["omega", "mu", "magnitude", "phase"])
        for i, om in enumerate(omegas):
            for j, mu in enumerate(mus):
                h = values[i, j]
                writer.writerow(
                    [
                        repr(float(om)),
                        repr(float(mu)),
                        repr(float(np.abs(h))),
                        repr(float(np.angle(h))),
                    ]
                )


# ---------------------------------------------------------------------------
# YAML configs


def load_config(path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise InputError(f"malformed config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"config {path} must be a mapping")
    return data
