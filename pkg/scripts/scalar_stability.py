"""Scalar pulse through a speed jump: L2 and discounted energy histories."""

from pathlib import Path

from dgsem_interface.config import parse_config
from dgsem_interface.experiments import build_problem, run_problem

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    for name in ("scalar_dissipative", "scalar_growth"):
        cfg = parse_config(CONFIGS / f"{name}.cfg")
        res = run_problem(build_problem(cfg, cfg.degrees[0]))
        recs = res.records
        e0, d0 = recs[0].E_L2, recs[0].E_discounted
        print(f"{name}: a_L = {cfg.c_left:g}, a_R = {cfg.c_right:g}")
        for r in recs[:: max(1, len(recs) // 10)] + [recs[-1]]:
            print(f"  t = {r.t:7.4f}  E_L2/E0 = {r.E_L2 / e0:.6f}  "
                  f"E_disc/E0 = {r.E_discounted / d0:.6f}")


if __name__ == "__main__":
    main()
