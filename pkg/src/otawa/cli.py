"""Command-line entry point: detect, evaluate, bench, synth, scores.

Exit codes: 0 success, 1 user/config/IO error, 2 internal invariant
violation. All outputs are deterministic given the config and seed; JSON
keys are sorted and CSV rows follow a documented order so runs can be
diffed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace

import numpy as np

from . import baselines, data, metrics, models, selection, solver
from .core import Constraints, Segmentation, TimeSeries
from .costs import PairwiseCostCache, SegmentCostCache
from .errors import ChangePointError, InvalidConfig


class CliError(Exception):
    """User-facing error; printed as one line and mapped to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="otawa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser("detect", help="run a detector on a CSV series")
    _add_io_flags(detect)
    _add_model_flags(detect)
    _add_detector_flags(detect)
    detect.set_defaults(func=cmd_detect)

    evaluate = sub.add_parser("evaluate", help="score a prediction against labels")
    evaluate.add_argument("--pred", required=True, help="prediction segmentation JSON")
    evaluate.add_argument("--truth", required=True, help="ground-truth segmentation JSON")
    evaluate.add_argument("--radius", type=int, required=True, help="detection radius")
    evaluate.add_argument("--output", help="output JSON path (default: stdout)")
    evaluate.set_defaults(func=cmd_evaluate)

    bench = sub.add_parser("bench", help="benchmark all four detectors on a manifest")
    bench.add_argument("--manifest", required=True, help="JSON manifest of labeled series")
    bench.add_argument("--output", required=True, help="output CSV path")
    bench.add_argument("--radius", type=int, required=True, help="detection radius")
    _add_model_flags(bench)
    _add_detector_flags(bench, for_bench=True)
    bench.set_defaults(func=cmd_bench)

    synth = sub.add_parser("synth", help="generate a labeled synthetic series")
    synth.add_argument("--kind", choices=["gaussian", "var"], required=True)
    synth.add_argument("--T", dest="n_steps", type=int, required=True)
    synth.add_argument("--changes", required=True, help="comma list of change points")
    synth.add_argument("--seed", type=int, required=True)
    synth.add_argument("--dims", type=int, default=1)
    synth.add_argument("--means", help="comma list of per-segment means (gaussian)")
    synth.add_argument("--variances", help="comma list of per-segment variances (gaussian)")
    synth.add_argument("--var-coeffs", help="comma list of per-segment lag-1 scalars (var)")
    synth.add_argument("--noise-scale", type=float, default=1.0)
    synth.add_argument("--output", required=True, help="series CSV path")
    synth.add_argument("--labels-output", help="labels JSON path (default: <output>.labels.json)")
    synth.set_defaults(func=cmd_synth)

    scores = sub.add_parser("scores", help="export window scores or a BIC curve as CSV")
    _add_io_flags(scores)
    _add_model_flags(scores)
    scores.add_argument("--kind", choices=["ws", "bic"], required=True)
    scores.add_argument("--algo", choices=["otawa", "op"], default="otawa",
                        help="detector for the BIC curve")
    scores.add_argument("--window", type=int, help="window length for ws scores")
    scores.add_argument("--beta-grid", help="grid for the BIC curve")
    scores.add_argument("--min-seg", type=int, default=1)
    scores.add_argument("--resolution", type=int, default=1)
    scores.set_defaults(func=cmd_scores)

    return parser


def _add_io_flags(p) -> None:
    p.add_argument("--input", required=True, help="input CSV series")
    p.add_argument("--has-header", action="store_true")
    p.add_argument("--timestamp-col", type=int, help="0-based timestamp column index")
    p.add_argument("--preprocess", help="comma list: minmax, subsample:k, daily, "
                                        "stft:window:overlap:fs:low:high")
    p.add_argument("--output", help="output path (default: stdout)")


def _add_model_flags(p) -> None:
    p.add_argument("--model", choices=["gaussian", "var"], default="gaussian")
    p.add_argument("--variance-floor", type=float, default=1e-8)
    p.add_argument("--order", type=int, default=1, help="autoregressive order")
    p.add_argument("--l1-alpha", type=float, default=0.0)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-8)


def _add_detector_flags(p, for_bench: bool = False) -> None:
    if not for_bench:
        p.add_argument("--algo", choices=["otawa", "op", "bs", "ws"], required=True)
    p.add_argument("--beta", type=float, help="fixed penalty per change point")
    p.add_argument("--beta-grid", help='"default", comma list, or log:<lo>:<hi>:<n>')
    p.add_argument("--min-seg", type=int, default=1, help="minimum segment length S")
    p.add_argument("--resolution", type=int, default=1, help="change point grid R")
    p.add_argument("--window", type=int, help="window length L (ws)")
    p.add_argument("--peaks", type=int, help="number of ws peaks to emit")
    p.add_argument("--peak-threshold", type=float, help="ws peak score threshold")
    p.add_argument("--max-peaks", type=int, default=10,
                   help="largest peak count tried by ws BIC selection")
    p.add_argument("--allow-empty", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--seed", type=int, help="unused by deterministic detectors; recorded")


def _parse_model(args) -> models.ModelSpec:
    if args.model == "gaussian":
        return models.GaussianSpec(variance_floor=args.variance_floor)
    return models.VarSpec(
        order=args.order,
        l1_alpha=args.l1_alpha,
        max_iter=args.max_iter,
        tol=args.tol,
        variance_floor=args.variance_floor,
    )


def _parse_grid(text: str) -> selection.BetaGrid:
    if text == "default":
        return selection.default_beta_grid()
    if text.startswith("log:"):
        parts = text.split(":")
        if len(parts) != 4:
            raise CliError(f"--beta-grid log form is log:<lo>:<hi>:<n>, got {text!r}")
        lo, hi, n = float(parts[1]), float(parts[2]), int(parts[3])
        return selection.BetaGrid(tuple(np.geomspace(lo, hi, n)))
    return selection.BetaGrid(tuple(float(v) for v in text.split(",")))


def _load_series(args) -> TimeSeries:
    x = data.read_csv(args.input, has_header=args.has_header, timestamp_col=args.timestamp_col)
    return _apply_preprocess(x, args.preprocess)


def _apply_preprocess(x: TimeSeries, steps: str | None) -> TimeSeries:
    if not steps:
        return x
    for step in steps.split(","):
        step = step.strip()
        if step == "minmax":
            x = data.minmax_scale(x)
        elif step.startswith("subsample:"):
            x = data.subsample(x, int(step.split(":")[1]))
        elif step == "daily":
            x = data.daily_average(x)
        elif step.startswith("stft:"):
            parts = step.split(":")
            if len(parts) != 6:
                raise CliError(f"stft step is stft:window:overlap:fs:low:high, got {step!r}")
            cfg = data.StftConfig(
                window_len=int(parts[1]),
                overlap_fraction=float(parts[2]),
                sample_rate_hz=float(parts[3]),
                band_low_hz=float(parts[4]),
                band_high_hz=float(parts[5]),
            )
            x = data.stft_features(x, cfg)
        else:
            raise CliError(f"unknown preprocess step {step!r}")
    return x


def _run_detector(algo: str, x: TimeSeries, spec, args) -> dict:
    constraints = Constraints(min_segment_len=args.min_seg, resolution=args.resolution)
    if algo == "ws":
        if args.window is None:
            raise CliError("--window is required when --algo ws")
        seg = _ws_detect(x, spec, args.window, constraints, args)
        return {"change_points": list(seg.change_points), "n_steps": x.n_steps,
                "objective": None, "beta": None, "n_cost_evals": None}

    cfg = solver.SolverConfig(beta=0.0, constraints=constraints, allow_empty=args.allow_empty)
    if (args.beta is None) == (args.beta_grid is None):
        raise CliError(f"--algo {algo} needs exactly one of --beta or --beta-grid")
    if args.beta_grid is not None:
        grid = _parse_grid(args.beta_grid)
        result = selection.select_beta(x, spec, grid, cfg, solver=algo)
        seg = result.best_segmentation
        beta = result.best_beta
    else:
        beta = args.beta
        cfg = replace(cfg, beta=beta)
        if algo == "otawa":
            seg = solver.solve(x, spec, cfg).segmentation
        elif algo == "op":
            seg = baselines.optimal_partitioning(x, spec, beta, constraints).segmentation
        else:
            seg = baselines.binary_segmentation(x, spec, beta, constraints)

    out = {"change_points": list(seg.change_points), "n_steps": x.n_steps, "beta": beta,
           "objective": None, "n_cost_evals": None}
    if algo == "otawa":
        res = solver.solve(x, spec, replace(cfg, beta=beta))
        out["objective"] = res.objective
        out["n_cost_evals"] = res.n_cost_evals
    elif algo == "op":
        res = baselines.optimal_partitioning(x, spec, beta, constraints)
        out["objective"] = res.objective
        out["n_cost_evals"] = res.n_cost_evals
    return out


def _ws_detect(x, spec, window: int, constraints: Constraints, args) -> Segmentation:
    scores = baselines.window_sliding_scores(x, spec, window)
    s_min = constraints.min_segment_len
    trimmed = _trim_scores(scores, s_min)
    if args.peaks is not None and args.peak_threshold is not None:
        raise CliError("give at most one of --peaks / --peak-threshold")
    if args.peaks is not None:
        return baselines.peak_detect(trimmed, s_min, k=args.peaks,
                                     resolution=constraints.resolution)
    if args.peak_threshold is not None:
        return baselines.peak_detect(trimmed, s_min, threshold=args.peak_threshold,
                                     resolution=constraints.resolution)
    # no stopping rule given: pick the peak count by BIC, like the beta grids
    best = None
    for k in range(0, args.max_peaks + 1):
        seg = baselines.peak_detect(trimmed, s_min, k=k, resolution=constraints.resolution)
        value = selection.bic(x, spec, seg)
        if best is None or value < best[0]:
            best = (value, seg)
    return best[1]


def _trim_scores(scores: baselines.WsScoreSeries, s_min: int) -> baselines.WsScoreSeries:
    """Mask scores whose index would violate the minimum first/last segment length."""
    t = scores.t_values
    masked = np.where((t >= s_min) & (t <= scores.n_steps - s_min), scores.scores, -np.inf)
    return baselines.WsScoreSeries(scores=masked, window_len=scores.window_len,
                                   n_steps=scores.n_steps)


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_detect(args) -> int:
    x = _load_series(args)
    spec = _parse_model(args)
    result = _run_detector(args.algo, x, spec, args)
    result["algorithm"] = args.algo
    _emit(json.dumps(result, sort_keys=True, indent=2) + "\n", args.output)
    return 0


def cmd_evaluate(args) -> int:
    with open(args.pred) as fh:
        pred = Segmentation.from_json(json.load(fh))
    with open(args.truth) as fh:
        truth = Segmentation.from_json(json.load(fh))
    report = metrics.evaluate_segmentations(truth, pred, args.radius)
    if report.hausdorff is None or report.mean_distance is None:
        print("warning: hausdorff/mean_distance undefined (empty change point set); "
              "reported as null", file=sys.stderr)
    _emit(json.dumps(report.to_json(), sort_keys=True, indent=2) + "\n", args.output)
    return 0


_BENCH_METRICS = ["annotation_error", "precision", "f1", "hausdorff", "mean_distance",
                  "rand_index"]


def cmd_bench(args) -> int:
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    entries = manifest if isinstance(manifest, list) else [manifest]
    if not entries:
        raise CliError("manifest lists no series")
    spec = _parse_model(args)
    per_method: dict[str, dict[str, list[float]]] = {
        m: {k: [] for k in _BENCH_METRICS} for m in ("otawa", "op", "bs", "ws")
    }
    failures: list[tuple[str, str]] = []
    n_ok = 0
    for entry in entries:
        try:
            series = data.read_csv(entry["series"], has_header=entry.get("has_header", False))
            series = _apply_preprocess(series, args.preprocess)
            truth = Segmentation(series.n_steps, entry["labels"])
            for method in ("otawa", "op", "bs", "ws"):
                out = _run_detector(method, series, spec, args)
                pred = Segmentation(series.n_steps, out["change_points"])
                report = metrics.evaluate_segmentations(truth, pred, args.radius)
                for name in _BENCH_METRICS:
                    value = getattr(report, name)
                    if value is not None:
                        per_method[method][name].append(float(value))
            n_ok += 1
        except (ChangePointError, OSError, KeyError, ValueError) as exc:
            failures.append((str(entry.get("series", "?")), f"{type(exc).__name__}: {exc}"))
    if n_ok == 0:
        raise CliError("every series in the manifest failed")
    rows = [["method", "metric", "mean", "std"]]
    for method in ("otawa", "op", "bs", "ws"):
        for name in _BENCH_METRICS:
            vals = per_method[method][name]
            if vals:
                rows.append([method, name, repr(float(np.mean(vals))),
                             repr(float(np.std(vals)))])
            else:
                rows.append([method, name, "", ""])
    for series_name, message in failures:
        rows.append(["error", series_name, message, ""])
    with open(args.output, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    return 0


def cmd_synth(args) -> int:
    cps = tuple(int(c) for c in args.changes.split(",")) if args.changes else ()
    n_segments = len(cps) + 1
    if args.kind == "gaussian":
        means = ([float(v) for v in args.means.split(",")] if args.means
                 else [3.0 * (i % 2) for i in range(n_segments)])
        variances = ([float(v) for v in args.variances.split(",")] if args.variances
                     else [1.0] * n_segments)
        if len(means) != n_segments or len(variances) != n_segments:
            raise CliError(f"need {n_segments} means/variances, got "
                           f"{len(means)}/{len(variances)}")
        regimes = tuple(
            (np.full(args.dims, m), np.full(args.dims, v)) for m, v in zip(means, variances)
        )
        spec = data.SyntheticSpec(seed=args.seed, n_steps=args.n_steps, change_points=cps,
                                  regimes=regimes, noise_scale=args.noise_scale)
        series, truth = data.synth_piecewise_gaussian(spec)
    else:
        if not args.var_coeffs:
            raise CliError("--var-coeffs is required when --kind var")
        rhos = [float(v) for v in args.var_coeffs.split(",")]
        if len(rhos) != n_segments:
            raise CliError(f"need {n_segments} var coefficients, got {len(rhos)}")
        regimes = tuple(rho * np.eye(args.dims) for rho in rhos)
        spec = data.SyntheticSpec(seed=args.seed, n_steps=args.n_steps, change_points=cps,
                                  regimes=regimes, noise_scale=args.noise_scale)
        series, truth = data.synth_piecewise_var(spec)
    data.write_csv(series, args.output)
    labels_path = args.labels_output or (str(args.output) + ".labels.json")
    with open(labels_path, "w") as fh:
        json.dump(truth.to_json(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    return 0


def cmd_scores(args) -> int:
    x = _load_series(args)
    spec = _parse_model(args)
    constraints = Constraints(min_segment_len=args.min_seg, resolution=args.resolution)
    rows: list[list[str]] = []
    if args.kind == "ws":
        if args.window is None:
            raise CliError("--window is required when --kind ws")
        scores = baselines.window_sliding_scores(x, spec, args.window)
        rows.append(["t", "score"])
        rows.extend([str(t), repr(d)] for t, d in scores.rows())
    else:
        if args.beta_grid is None:
            raise CliError("--beta-grid is required when --kind bic")
        grid = _parse_grid(args.beta_grid)
        cfg = solver.SolverConfig(beta=0.0, constraints=constraints)
        result = selection.select_beta(x, spec, grid, cfg, solver=args.algo)
        rows.append(["beta", "bic", "n_change_points"])
        rows.extend([repr(b), repr(v), str(m)] for b, v, m in result.bic_curve)
    text = "\n".join(",".join(row) for row in rows) + "\n"
    _emit(text, args.output)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ChangePointError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # internal invariant violation
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
