"""Reflected and transmitted amplitudes of a 1D acoustic pulse at x = 0."""

from dataclasses import replace
from pathlib import Path

from dgsem_interface.config import parse_config
from dgsem_interface.exact import PlaneWaveScatter
from dgsem_interface.experiments import build_problem, fit_scatter_amplitudes, run_problem

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "acoustic_1d_scatter.cfg"


def main():
    cfg = parse_config(CONFIG)
    prob = build_problem(cfg, cfg.degrees[0])
    res = run_problem(prob)
    ex = prob.exact
    a_r, a_t = fit_scatter_amplitudes(prob.disc, res.final.values, ex, res.final.t)
    print(f"reflected    computed {a_r:.12f}  exact {ex.reflection:.12f}")
    print(f"transmitted  computed {a_t:.12f}  exact {ex.transmission:.12f}")
    printed = PlaneWaveScatter(replace(ex.params, transmission="printed"), ex.m_left, ex.m_right,
                               ex.interface_x, dim=1)
    for label, sol in (("RH transmission", ex), ("printed transmission", printed)):
        worst = max(sol.flux_continuity_residual(0.1 * k) for k in range(21))
        print(f"flux continuity residual, {label}: {worst:.3e}")


if __name__ == "__main__":
    main()
