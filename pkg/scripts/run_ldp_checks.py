"""Run the bundled verification configs through the CLI and tabulate the verdicts.

    python3 scripts/run_ldp_checks.py --out-dir results/verify [--samples 200000] [--threads 2]

A smaller ``--samples`` gives a quick smoke run; the default uses each
config's own sample size.
"""
import argparse
import json
from pathlib import Path

from randflight.cli import main as cli_main

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results/verify")
    ap.add_argument("--samples", type=int)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("configs", nargs="*", help="config files (default: every configs/*.json)")
    args = ap.parse_args()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    configs = [Path(p) for p in args.configs] or sorted(CONFIG_DIR.glob("*.json"))

    status = 0
    table = []
    for cfg in configs:
        out = out_dir / f"{cfg.stem}.csv"
        argv = ["verify", "--config", str(cfg), "--out", str(out), "--threads", str(args.threads)]
        if args.samples:
            argv += ["--samples", str(args.samples)]
        code = cli_main(argv)
        status = max(status, code)
        if code == 2:
            table.append((cfg.stem, "ERROR", "", ""))
            continue
        s = json.loads(out.with_suffix(".json").read_text())
        table.append((cfg.stem, s["verdict"], f"{s['decay_rate']:.5f}", f"{s['analytic_rate']:.6f}"))

    print(f"\n{'config':<14}{'verdict':<9}{'fitted':>10}{'analytic':>11}")
    for row in table:
        print(f"{row[0]:<14}{row[1]:<9}{row[2]:>10}{row[3]:>11}")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
