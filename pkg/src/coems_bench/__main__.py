import sys

from coems_bench.bench.cli import main

if __name__ == "__main__":
    sys.exit(main())
