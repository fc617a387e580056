"""Command-line front end: design, simulate, analyze, experiment, spectrum.

Exit codes: 0 success, 2 input/config error, 3 stability refusal, 1 internal.
Every subcommand is deterministic given its config file and --seed.
"""

from __future__ import annotations

import argparse
import csv
import sys
import traceback
from pathlib import Path

import numpy as np

from . import io as aio
from .design import FirDesign, design_arma, design_fir, fir_l2_error
from .engine import GraphTables, run_filter, steady_state
from .errors import DesignError, GraphFilterError, InputError, StabilityError
from .experiments import (
    experiment_convergence,
    experiment_mobility,
    experiment_response_fit,
)
from .responses import sampled_response, step_response, window_response
from .spectral import build_shift_operator, eigendecompose
from .temporal import response_surface

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_STABILITY = 3


def _out_path(out_dir: Path, name: str, force: bool) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    if path.exists() and not force:
        raise InputError(f"{path} exists; pass --force to overwrite")
    return path


def _response_from_config(cfg: dict):
    kind = cfg.get("response", "step")
    interval = tuple(cfg.get("interval", (0.0, 2.0)))
    if kind == "step":
        return step_response(interval, cfg.get("cutoff"))
    if kind == "window":
        band = cfg.get("band")
        return window_response(interval, tuple(band) if band else None)
    if kind == "custom":
        samples = cfg.get("samples")
        if samples is None:
            samples_file = cfg.get("samples_file")
            if samples_file is None:
                raise InputError("custom response needs 'samples' or 'samples_file'")
            try:
                fh = open(samples_file, newline="")
            except OSError as exc:
                raise InputError(f"cannot read samples file: {exc}") from exc
            with fh:
                reader = csv.reader(fh)
                header = next(reader, None)
                if header is None or [h.strip() for h in header] != ["lambda", "value"]:
                    raise InputError(f"{samples_file}: expected header 'lambda,value'")
                samples = [(float(r[0]), float(r[1])) for r in reader if r]
        return sampled_response(samples, interval)
    raise InputError(f"unknown response kind {kind!r}")


def cmd_design(args) -> int:
    cfg = aio.load_config(args.config)
    resp = _response_from_config(cfg)
    family = cfg.get("family", "arma")
    order = int(cfg.get("order", 1))
    grid_size = int(cfg.get("grid_size", 1000))
    out = _out_path(Path(args.out), "design.json", args.force)
    if family == "fir":
        fir = design_fir(resp, order, grid_size)
        err = fir_l2_error(fir, resp, grid_size)
        aio.write_design(out, aio.fir_to_dict(fir, resp, err))
        print(f"wrote {out}")
        print(f"family: fir  order: {order}  grid L2 error: {err:.6g}")
        return EXIT_OK
    if family != "arma":
        raise InputError(f"unknown design family {family!r}")
    if order < 1:
        raise InputError("order must be >= 1 for ARMA; use the fir family")
    result = design_arma(
        resp,
        order,
        prefit_order=cfg.get("prefit_order"),
        grid_size=grid_size,
        eps_stability=float(cfg.get("eps_stability", 1e-6)),
        eps_separation=float(cfg.get("eps_separation", 1e-8)),
        periodic_contraction=float(cfg.get("periodic_contraction", 0.6)),
    )
    aio.write_design(out, aio.design_to_dict(result))
    print(f"wrote {out}")
    print(
        f"family: arma  order: {order}  grid L2 error: {result.l2_error:.6g}\n"
        f"stable: {str(result.stability.passed).lower()}  "
        f"min pole margin: {result.stability.margins.min():.6g}  "
        f"prefit order: {result.prefit_order}  "
        f"denominator scale: {result.denominator_scale:.6g}"
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    design = aio.read_design(args.design)
    form = aio.pick_form(design, args.family)
    graph = aio.read_graph(args.graph)
    if isinstance(design, FirDesign):
        interval = design.interval
    else:
        interval = tuple(design.response.interval)
    signal, signal_desc = aio.parse_signal_source(args.signal, graph.n)
    tables = GraphTables.build(graph, args.variant, interval)
    trace = run_filter(
        form,
        tables,
        signal,
        args.rounds,
        force=args.force_unstable,
        record_accounting=True,
    )
    out_dir = Path(args.out)
    trace_path = _out_path(out_dir, "trace.csv", args.force)
    summary_path = _out_path(out_dir, "summary.yaml", args.force)
    aio.write_trace(trace_path, trace)

    final = trace.final_output() if trace.valid.any() else trace.outputs[-1]
    summary = {
        "design": str(args.design),
        "graph": str(args.graph),
        "signal": signal_desc,
        "family": trace.family,
        "variant": args.variant,
        "interval": list(interval),
        "rounds": args.rounds,
        "gamma_bound": trace.gamma,
        "max_imag_residue": float(trace.max_imag.max()),
        "accounting": {
            "total_scalars_sent": int(trace.sent_scalars.sum()),
            "total_messages": int(trace.message_count.sum()),
            "per_node_sent_per_round_max": (
                trace.per_node_sent.max(axis=0).tolist()
                if len(trace.per_node_sent)
                else [0] * graph.n
            ),
            "per_node_stored_max": (
                trace.per_node_stored.max(axis=0).tolist()
                if len(trace.per_node_stored)
                else [0] * graph.n
            ),
        },
    }
    if not callable(signal):
        y_star = steady_state(form, tables, signal)
        denom = float(np.linalg.norm(y_star))
        if denom > 0:
            summary["final_error_vs_dense_oracle"] = float(
                np.linalg.norm(final - y_star) / denom
            )
    else:
        summary["final_error_vs_dense_oracle"] = None
    aio.write_summary(summary_path, summary)
    print(f"wrote {trace_path} and {summary_path}")
    if summary.get("final_error_vs_dense_oracle") is not None:
        print(f"final error vs dense oracle: {summary['final_error_vs_dense_oracle']:.3e}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    graph = aio.read_graph(args.graph)
    interval = tuple(args.interval) if args.interval else None
    op = build_shift_operator(graph, args.variant, interval)
    spectrum = eigendecompose(op)
    path = _out_path(Path(args.out), "spectrum.csv", args.force)
    aio.write_spectrum(path, spectrum)
    print(f"wrote {path} (n={spectrum.n}, lambda in "
          f"[{spectrum.lambdas[0]:.6g}, {spectrum.lambdas[-1]:.6g}])")
    return EXIT_OK


def cmd_analyze(args) -> int:
    design = aio.read_design(args.design)
    form = aio.pick_form(design, args.family)
    if isinstance(form, FirDesign):
        raise InputError("transfer-function analysis applies to ARMA families only")
    omegas = np.linspace(0.0, np.pi, args.omega_count)
    radius = form.radius
    mus = np.linspace(-radius, radius, args.mu_count)
    surface = response_surface(form, omegas, mus)
    path = _out_path(Path(args.out), "surface.csv", args.force)
    aio.write_surface(path, omegas, mus, surface)
    print(f"wrote {path} ({args.omega_count} x {args.mu_count} grid)")
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = aio.load_config(args.config)
    scenario = cfg.get("scenario")
    out_dir = Path(args.out)
    seed = args.seed
    if scenario in ("fig1", "response_fit"):
        result = experiment_response_fit(
            orders=tuple(cfg.get("orders", (5, 10, 20))),
            kind=cfg.get("kind", "step"),
            interval=tuple(cfg.get("interval", (0.0, 2.0))),
            grid_size=int(cfg.get("grid_size", 1000)),
        )
        name = f"fig1_{cfg.get('kind', 'step')}.csv"
    elif scenario in ("fig2", "convergence"):
        result = experiment_convergence(
            n_nodes=int(cfg.get("n_nodes", 100)),
            order=int(cfg.get("order", 5)),
            kind=cfg.get("kind", "step"),
            rounds=int(cfg.get("rounds", 100)),
            seed=seed,
            interval=tuple(cfg.get("interval", (0.0, 2.0))),
        )
        name = "fig2.csv"
    elif scenario in ("fig3", "mobility"):
        result = experiment_mobility(
            speeds=tuple(cfg.get("speeds", (0.0, 1.0, 5.0, 10.0, 20.0))),
            duration=int(cfg.get("duration", 600)),
            eval_every=int(cfg.get("eval_every", 100)),
            repetitions=int(cfg.get("repetitions", 10)),
            n_nodes=int(cfg.get("n_nodes", 100)),
            comm_range=float(cfg.get("comm_range", 180.0)),
            box=tuple(cfg.get("box", (1000.0, 1000.0))),
            order=int(cfg.get("order", 5)),
            kind=cfg.get("kind", "step"),
            seed=seed,
            pause=int(cfg.get("pause", 0)),
        )
        name = "fig3.csv"
    else:
        raise InputError(f"unknown scenario {scenario!r} (fig1|fig2|fig3)")
    csv_path = _out_path(out_dir, name, args.force)
    meta_path = _out_path(out_dir, name.replace(".csv", "_meta.yaml"), args.force)
    aio.write_columns_csv(csv_path, result.columns)
    aio.write_summary(meta_path, {"scenario": result.scenario, "seed": seed,
                                  "config": cfg, **result.meta})
    print(f"wrote {csv_path} and {meta_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="armagf",
        description="Universal ARMA graph filters: design, simulation, analysis.",
    )
    parser.add_argument("--verbose", action="store_true", help="print tracebacks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="design a filter from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="run a designed filter on a graph")
    p.add_argument("--design", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--signal", required=True,
                   help="CSV path or constant:v | switch:t:v0:v1 | "
                        "sinusoid:omega[:amp] | degree")
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--family", default="auto",
                   choices=["auto", "arma1", "parallel", "periodic", "fir"])
    p.add_argument("--variant", default="discrete",
                   choices=["discrete", "normalized"])
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.add_argument("--force-unstable", action="store_true",
                   help="run even if the filter is unstable (divergence demo)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="export eigenvalues of a graph operator")
    p.add_argument("--graph", required=True)
    p.add_argument("--variant", default="discrete",
                   choices=["discrete", "normalized"])
    p.add_argument("--interval", type=float, nargs=2, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("analyze", help="export |H(e^{j omega}, mu)| surface")
    p.add_argument("--design", required=True)
    p.add_argument("--family", default="parallel",
                   choices=["arma1", "parallel", "periodic"])
    p.add_argument("--omega-count", type=int, default=64)
    p.add_argument("--mu-count", type=int, default=128)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("experiment", help="run a scenario config (fig1/fig2/fig3)")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StabilityError as exc:
        print(f"stability refusal: {exc}", file=sys.stderr)
        return EXIT_STABILITY
    except (InputError, DesignError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if args.verbose:
            traceback.print_exc()
        return EXIT_INPUT
    except GraphFilterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if args.verbose:
            traceback.print_exc()
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        if args.verbose:
            traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
