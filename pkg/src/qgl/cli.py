"""Command-line driver: graph generation, solver runs, verification suites.

Exit codes: 0 success, 1 a check or solve failed, 2 unusable configuration
or parameters, 3 file I/O trouble (missing graph file, unwritable output).
``QGL_THREADS`` caps the thread pools of the numerical backends; it must be
read before they are imported, so the heavy modules load lazily.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3

_GEN_FLAGS = {
    "path": ("edges", "path graph: number of edges"),
    "star": ("arms", "star graph: number of arms"),
    "tree": ("depth", "binary tree: depth"),
    "ray": ("radius", "truncated ray: covered ball radius"),
}
_FAMILY_NAMES = {
    "path": "path",
    "star": "star",
    "tree": "binary_tree",
    "ray": "truncated_ray",
}


def _apply_thread_cap() -> None:
    threads = os.environ.get("QGL_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qgl",
        description="Graph PDE solvers and inequality verification suites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-graph", help="write a generated graph file")
    gen.add_argument("family", choices=sorted(_GEN_FLAGS))
    gen.add_argument("--edges", type=int, help=_GEN_FLAGS["path"][1])
    gen.add_argument("--arms", type=int, help=_GEN_FLAGS["star"][1])
    gen.add_argument("--depth", type=int, help=_GEN_FLAGS["tree"][1])
    gen.add_argument("--radius", type=float, help=_GEN_FLAGS["ray"][1])
    gen.add_argument("--len", type=float, required=True, dest="length",
                     help="edge length")
    gen.add_argument("--out", default=None, help="output path (default <family>.json)")

    solve = sub.add_parser("solve", help="run one solver experiment")
    solve.add_argument("--config", required=True)

    verify = sub.add_parser("verify", help="run the verification suite")
    verify.add_argument("--config", required=True)
    return parser


def _load_graph_source(cfg):
    """Graph from the config: file errors map to exit 3, others to exit 2."""
    from .errors import BadParamsError
    from .graphs import generate, load_graph

    if cfg.graph_file is not None:
        try:
            return load_graph(cfg.graph_file)
        except (OSError, json.JSONDecodeError) as exc:
            _fail(EXIT_IO, f"cannot read graph file {cfg.graph_file}: {exc}")
        except BadParamsError as exc:
            _fail(EXIT_IO, f"malformed graph file {cfg.graph_file}: {exc}")
    return generate(cfg.graph_family, cfg.graph_params)


def _fail(code: int, message: str):
    print(f"qgl: {message}", file=sys.stderr)
    raise SystemExit(code)


def _write_output(directory: str, name: str, text: str, emitted: list) -> None:
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    emitted.append(name)


def _write_manifest(directory: str, command: str, cfg, stages, emitted: list) -> None:
    from . import __version__

    manifest = {
        "tool": "qgl",
        "version": __version__,
        "command": command,
        "config": cfg.raw,
        "stages": {k: round(v, 6) for k, v in stages.items()},
        "files": emitted + ["manifest.json"],
    }
    with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_gen_graph(args) -> int:
    from .errors import BadParamsError
    from .graphs import generate, save_graph

    flag = _GEN_FLAGS[args.family][0]
    size = getattr(args, flag)
    if size is None:
        _fail(EXIT_CONFIG, f"family {args.family!r} needs --{flag}")
    for other, (other_flag, _) in _GEN_FLAGS.items():
        if other_flag != flag and getattr(args, other_flag) is not None:
            _fail(EXIT_CONFIG, f"--{other_flag} does not apply to {args.family!r}")
    try:
        graph = generate(
            _FAMILY_NAMES[args.family], {flag: size, "length": args.length}
        )
    except BadParamsError as exc:
        _fail(EXIT_CONFIG, str(exc))
    out = args.out or f"{args.family}.json"
    try:
        save_graph(graph, out)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write {out}: {exc}")
    print(f"wrote {out}: {len(graph.vertices)} vertices, {len(graph.edges)} edges")
    return EXIT_OK


def _run_with_config(args, runner) -> int:
    from .config import load_config
    from .errors import ConfigError, QglError

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    graph = _load_graph_source(cfg)
    try:
        os.makedirs(cfg.output_dir, exist_ok=True)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot create output directory {cfg.output_dir}: {exc}")
    try:
        return runner(cfg, graph)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    except QglError as exc:
        _fail(EXIT_CHECK_FAILED, str(exc))


def cmd_solve(args) -> int:
    def runner(cfg, graph) -> int:
        from .suite import run_solve

        result = run_solve(cfg, graph)
        emitted: list[str] = []
        _write_output(cfg.output_dir, "solution.csv", result.csv_text, emitted)
        _write_manifest(cfg.output_dir, "solve", cfg, result.stages, emitted)
        print(f"solution written to {cfg.output_dir}/solution.csv")
        return EXIT_OK

    return _run_with_config(args, runner)


def cmd_verify(args) -> int:
    def runner(cfg, graph) -> int:
        from .checks import profiles_to_csv, reports_to_csv, summary_text
        from .suite import run_verify

        result = run_verify(cfg, graph)
        emitted: list[str] = []
        _write_output(cfg.output_dir, "checks.csv",
                      reports_to_csv(result.reports), emitted)
        _write_output(cfg.output_dir, "growth.csv",
                      profiles_to_csv(result.profiles), emitted)
        summary = summary_text(result.reports, result.profiles,
                               header_lines=result.notes)
        _write_output(cfg.output_dir, "summary.txt", summary, emitted)
        _write_manifest(cfg.output_dir, "verify", cfg, result.stages, emitted)
        sys.stdout.write(summary)
        failures = result.failures()
        if failures:
            print(f"qgl: {len(failures)} admissible check(s) failed", file=sys.stderr)
            return EXIT_CHECK_FAILED
        return EXIT_OK

    return _run_with_config(args, runner)


def main(argv=None) -> int:
    _apply_thread_cap()
    args = _build_parser().parse_args(argv)
    handlers = {
        "gen-graph": cmd_gen_graph,
        "solve": cmd_solve,
        "verify": cmd_verify,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
