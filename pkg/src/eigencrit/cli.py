"""Command line: ``eigencrit run | verify | report``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .harness import ConfigError, ExperimentConfig, ResultBundle, emit_report, run_experiment


def _parser() -> argparse.ArgumentParser:
    from .verification import SUITES

    p = argparse.ArgumentParser(prog="eigencrit",
                                description="Eigenfunction critical points on long convex domains.")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: EIGENCRIT_THREADS or the CPU count)")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config and write its report")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=None,
                     help="output directory (default: the config's 'output' or ./eigencrit-out)")
    run.add_argument("--threads", type=int, default=argparse.SUPPRESS)

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("suite", choices=sorted(SUITES) + ["all"])
    ver.add_argument("--out", type=Path, default=None, help="also write the table here")
    ver.add_argument("--threads", type=int, default=argparse.SUPPRESS)

    rep = sub.add_parser("report", help="re-emit the tables of a results.json bundle")
    rep.add_argument("bundle", type=Path)
    rep.add_argument("--format", choices=["csv", "json"], default="csv")
    rep.add_argument("--out", type=Path, default=None,
                     help="output directory (default: next to the bundle)")
    rep.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("eigencrit: --threads must be positive", file=sys.stderr)
            return 2
        os.environ["EIGENCRIT_THREADS"] = str(args.threads)

    if args.command == "run":
        try:
            cfg = ExperimentConfig.load(args.config)
        except (ConfigError, OSError, ValueError) as exc:
            print(f"eigencrit: invalid config: {exc}", file=sys.stderr)
            return 2
        out = args.out or Path(cfg.output or "eigencrit-out")
        bundle = run_experiment(cfg, threads=args.threads)
        emit_report(bundle, out)
        nfail = len(bundle.failures)
        print(f"{len(bundle.records)} record(s), {nfail} failed; report in {out}")
        for r in bundle.failures:
            print(f"  failed {r['label']} h={r['h']}: {r['error']}")
        return 1 if nfail else 0

    if args.command == "verify":
        from .verification import SUITES, run_suite

        names = sorted(SUITES) if args.suite == "all" else [args.suite]
        results = [run_suite(n) for n in names]
        text = "\n".join(r.table() for r in results)
        print(text)
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / "verify.txt").write_text(text + "\n")
        return 0 if all(r.passed for r in results) else 1

    if args.command == "report":
        try:
            bundle = ResultBundle.load(args.bundle)
        except (OSError, ValueError, KeyError) as exc:
            print(f"eigencrit: cannot read bundle: {exc}", file=sys.stderr)
            return 2
        out = args.out or args.bundle.parent
        paths = emit_report(bundle, out, formats=(args.format,))
        print(f"wrote {len(paths)} file(s) to {out}")
        return 0
    return 2  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
