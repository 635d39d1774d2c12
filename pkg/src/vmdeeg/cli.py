"""Command line interface.

Exit status: 0 on success, 1 on usage errors, 2 on data errors. A JSON file
given with ``--config`` may supply any option (keys are option names with
dashes or underscores); options on the command line win.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from vmdeeg import pipeline
from vmdeeg.features import extract
from vmdeeg.mlp import TrainConfig
from vmdeeg.signal_io import DataError, SplitSpec, load_bonn, load_signal
from vmdeeg.vmd import VmdConfig, decompose

KIND_ALIASES = {
    "sodp": "sodp-area",
    "fodp": "fodp-area",
    "renyi": "renyi-entropy",
    "amp": "avg-amplitude",
}
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_vmd_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("decomposition")
    g.add_argument("--k", type=int, help="number of modes (default 5)")
    g.add_argument("--alpha", type=float, help="bandwidth penalty (default 2000)")
    g.add_argument("--tau", type=float, help="dual ascent step (default 0)")
    g.add_argument("--tol", type=float, help="convergence tolerance (default 1e-6)")
    g.add_argument("--max-iters", type=int, help="iteration cap (default 500)")
    g.add_argument("--init", choices=["uniform", "zero", "seeded-random"])
    g.add_argument("--vmd-seed", type=int, help="seed for seeded-random init")
    g.add_argument("--no-mirror", action="store_true", default=None)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with option defaults")
    p.add_argument("-v", "--verbose", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vmdeeg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decompose", help="decompose one recording into modes")
    p.add_argument("file", type=Path)
    p.add_argument("--out", type=Path, help="directory for modes and spectra CSV")
    _add_vmd_options(p)
    _add_common(p)

    p = sub.add_parser("features", help="per-mode features of one recording")
    p.add_argument("file", type=Path)
    p.add_argument("--kind", choices=sorted(KIND_ALIASES), required=False)
    p.add_argument("--ellipse-variant", choices=["standard", "paper"])
    _add_vmd_options(p)
    _add_common(p)

    p = sub.add_parser("run", help="run a classification experiment on a dataset")
    p.add_argument("--task", choices=[*pipeline.TASKS, "all"])
    p.add_argument("--data", type=Path, help="root holding Z/ O/ N/ F/ S/ directories")
    p.add_argument("--split", choices=["fixed", "random"])
    p.add_argument("--seed", type=int, help="base seed for random splits (default 0)")
    p.add_argument("--iterations", type=int, help="random-split trials (default 24)")
    p.add_argument("--train-count", type=int, help="training signals per set (default 80)")
    p.add_argument(
        "--feature",
        choices=["ranked", *sorted(KIND_ALIASES)],
        help="single feature or the 3-feature vote (default ranked)",
    )
    p.add_argument("--ellipse-variant", choices=["standard", "paper"])
    p.add_argument("--report", type=Path, help="CSV path; a .json sidecar is written next to it")
    p.add_argument("--lr", type=float, help="learning rate (default 0.1)")
    p.add_argument("--epochs", type=int, help="training epochs (default 1000)")
    p.add_argument("--train-seed", type=int, help="network seed for fixed splits (default 0)")
    p.add_argument("--cache", type=Path, help="directory for cached decompositions")
    p.add_argument("--workers", type=int, help="parallel decomposition processes (default 1)")
    _add_vmd_options(p)
    _add_common(p)

    for name, lag in (("dump-sodp", 1), ("dump-fodp", 2)):
        p = sub.add_parser(name, help=f"write lag-{lag} difference-plot points per mode")
        p.add_argument("file", type=Path)
        p.add_argument("--out", type=Path)
        p.add_argument("--ellipse-variant", choices=["standard", "paper"])
        p.set_defaults(lag=lag)
        _add_vmd_options(p)
        _add_common(p)

    p = sub.add_parser("dump-spectra", help="write the one-sided spectrum of each mode")
    p.add_argument("file", type=Path)
    p.add_argument("--out", type=Path)
    _add_vmd_options(p)
    _add_common(p)
    return parser


DEFAULTS = {
    "out": None,
    "kind": None,
    "ellipse_variant": "standard",
    "task": None,
    "data": None,
    "split": "fixed",
    "seed": 0,
    "iterations": 24,
    "train_count": 80,
    "feature": "ranked",
    "report": None,
    "cache": None,
    "workers": 1,
    "verbose": False,
    "no_mirror": False,
}


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    merged = dict(DEFAULTS)
    if args.config is not None:
        try:
            loaded = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in loaded.items():
            key = key.replace("-", "_")
            if key not in vars(args):
                raise UsageError(f"unknown config key {key!r}")
            merged[key] = value
    for key, value in vars(args).items():
        if value is not None:
            merged[key] = value
        else:
            merged.setdefault(key, None)
    for key in ("out", "data", "report", "cache", "file"):
        if merged.get(key) is not None:
            merged[key] = Path(merged[key])
    return argparse.Namespace(**merged)


def _vmd_config(args) -> VmdConfig:
    overrides = {
        "k": args.k,
        "alpha": args.alpha,
        "tau": args.tau,
        "tol": args.tol,
        "max_iters": args.max_iters,
        "init": args.init,
        "seed": args.vmd_seed,
    }
    kwargs = {k: v for k, v in overrides.items() if v is not None}
    kwargs["mirror"] = not args.no_mirror
    return VmdConfig(**kwargs)


def _variant(args) -> str:
    return "paper-literal" if args.ellipse_variant == "paper" else args.ellipse_variant


def cmd_decompose(args) -> None:
    signal = load_signal(args.file)
    modes = decompose(signal, _vmd_config(args))
    hz = modes.center_freqs * signal.sample_rate_hz
    for idx, (w, f) in enumerate(zip(modes.center_freqs, hz)):
        print(f"mode {idx}: {w:.6f} cycles/sample ({f:.3f} Hz)")
    print(f"iterations {modes.iterations_used}, relative residual {modes.final_residual:.3e}")
    if args.out is not None:
        modes = pipeline._with_meta(modes, signal)
        print(pipeline.dump_modes(signal, None, args.out, modes))
        print(pipeline.dump_spectra(signal, None, args.out, modes))


def cmd_features(args) -> None:
    if args.kind is None:
        raise UsageError("--kind is required")
    signal = load_signal(args.file)
    modes = decompose(signal, _vmd_config(args))
    vec = extract(modes, KIND_ALIASES[args.kind], _variant(args))
    for idx, value in enumerate(vec.values):
        print(f"{idx},{float(value)!r}")


def cmd_run(args) -> None:
    if args.task is None or args.data is None or args.report is None:
        raise UsageError("run needs --task, --data and --report")
    vmd_cfg = _vmd_config(args)
    train_kwargs = {"learning_rate": args.lr, "epochs": args.epochs, "seed": args.train_seed}
    train_cfg = TrainConfig(**{k: v for k, v in train_kwargs.items() if v is not None})
    tasks = list(pipeline.TASKS.values()) if args.task == "all" else [pipeline.TASKS[args.task]]
    needed = sorted({sid for t in tasks for sid in t.set_ids}, key="ZONFS".index)
    data = load_bonn(args.data, needed)
    cache = pipeline.ModeCache(vmd_cfg, args.cache, args.workers)
    kinds = pipeline.RANKED_KINDS if args.feature == "ranked" else (KIND_ALIASES[args.feature],)
    variant = _variant(args)
    reports = []
    for task in tasks:
        if args.split == "fixed":
            spec = SplitSpec("fixed-prefix", args.train_count)
            if len(kinds) == 3:
                rep = pipeline.run_ranked(task, spec, vmd_cfg, train_cfg, data, cache, variant)
            else:
                rep = pipeline.run_single_feature(
                    task, kinds[0], spec, vmd_cfg, train_cfg, data, cache, variant
                )
        else:
            rep = pipeline.run_randomized_trials(
                task, args.iterations, args.seed, vmd_cfg, train_cfg, data, cache,
                args.train_count, kinds, variant,
            )
        print(f"{task.name}: {rep.average:.2f}%")
        reports.append(rep)
    csv_path, json_path = pipeline.export_report(reports, args.report)
    print(f"wrote {csv_path} and {json_path}")


def cmd_dump_points(args) -> None:
    signal = load_signal(args.file)
    out = args.out or Path(".")
    print(pipeline.dump_sodp(signal, args.lag, _vmd_config(args), out, _variant(args)))


def cmd_dump_spectra(args) -> None:
    signal = load_signal(args.file)
    print(pipeline.dump_spectra(signal, _vmd_config(args), args.out or Path(".")))


COMMANDS = {
    "decompose": cmd_decompose,
    "features": cmd_features,
    "run": cmd_run,
    "dump-sodp": cmd_dump_points,
    "dump-fodp": cmd_dump_points,
    "dump-spectra": cmd_dump_spectra,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"vmdeeg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"vmdeeg: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"vmdeeg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
