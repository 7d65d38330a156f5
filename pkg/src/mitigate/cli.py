"""Command line entry point: ``mitigate <experiment> --config path.json``."""

import argparse
import json
import sys

from .errors import ConfigError
from .harness import EXPERIMENTS, apply_overrides, load_config, run_experiment, summary_path

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def build_parser():
    p = argparse.ArgumentParser(prog="mitigate", description="Run a seeded mitigation experiment.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", required=True, help="JSON config document")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--out", help="CSV output path; the JSON summary is written next to it")
    p.add_argument("--set", dest="sets", action="append", default=[], metavar="KEY=VALUE",
                   help="dotted-path override, e.g. params.tau=0.25 (repeatable)")
    p.add_argument("--workers", type=int, help="worker threads (default: MITIGATE_THREADS or CPU count)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        doc = load_config(args.config)
        doc = apply_overrides(doc, args.sets)
        doc["experiment"] = args.experiment
        for key in ("seed", "trials", "out"):
            if getattr(args, key) is not None:
                doc[key] = getattr(args, key)
        report = run_experiment(doc, workers=args.workers)
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - any other failure is a runtime error for the exit code
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    out = doc.get("out")
    if out:
        print(f"wrote {out} and {summary_path(out)}")
    else:
        sys.stdout.write(report.csv_text())
    print(json.dumps({k: v for k, v in report.summary.items() if k != "arms"}, default=str), file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
