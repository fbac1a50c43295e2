import sys

from src.cli import main as cli_main


def main():
    out = sys.argv[1] if len(sys.argv) >= 2 else "data/figure1.csv"
    code = cli_main(["figure1", "--t", "7", "--N", "0,1,3,6", "--out", out])
    if code == 0:
        print(f"[FIGURE1] partial sums for t=7 -> {out}")
    sys.exit(code)


if __name__ == "__main__":
    main()
