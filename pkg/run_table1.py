import sys
import time

from src.cli import build_parser, build_spec, run_table1
from src.config import load_config
from src.errors import OuRuinError
from src.utils import setup_logging


def main():
    cfg = load_config()
    setup_logging(cfg.LOG_LEVEL)
    out = sys.argv[1] if len(sys.argv) >= 2 else "data/table1.csv"
    extra = sys.argv[2:]    # e.g. --mu-rule moments --reference rectangle

    spec = build_spec(build_parser().parse_args(["table1", "--out", out, *extra]), cfg)
    print(f"[TABLE1] N={spec.N} t={spec.t} h={spec.grid.h} M={spec.grid.M} "
          f"mu={spec.mu_rule} reference={spec.reference}")
    started = time.time()
    try:
        report = run_table1(spec)
    except OuRuinError as e:
        print(f"[ERROR] {e}", file=sys.stderr)
        sys.exit(e.exit_code)
    report.to_csv(out, comments=[spec.header()])
    print(report.to_text())
    print(f"\n[TABLE1] done in {time.time() - started:.1f}s -> {out}")


if __name__ == "__main__":
    main()
