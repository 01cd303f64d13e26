"""L2 error against the exact single-material plane wave for N = 2..8."""

from pathlib import Path

import numpy as np

from dgsem_interface.config import parse_config
from dgsem_interface.experiments import run_experiment_degree

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "convergence.cfg"


def main():
    cfg = parse_config(CONFIG)
    prev = {}
    print(f"{'N':>2} {'error':>12} {'e(N)/e(N-2)':>12}")
    for n in cfg.degrees:
        err = float(np.sqrt((run_experiment_degree(cfg, n).errors ** 2).sum()))
        ratio = f"{err / prev[n - 2]:12.4f}" if n - 2 in prev else " " * 12
        print(f"{n:>2} {err:12.4e} {ratio}")
        prev[n] = err


if __name__ == "__main__":
    main()
