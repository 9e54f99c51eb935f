"""Statistics-induced chaos: three trapped particles, one perturbed.

Three particles on a symmetric triangle in an anisotropic trap would
follow regular drift orbits if they were distinguishable. Exchange
statistics couple the guiding centers through the symplectic form, and
for bosons at v/u = 0.4 the coupling is strong enough to produce a
positive largest Lyapunov exponent. The demo runs a shortened Benettin
estimate (t = 400 instead of the production 2000) so it finishes in
about half a minute.

Run:  python3 demos/statistics_chaos.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from statdyn.chaos import LyapunovRun, lyapunov_estimate, symmetric_three_particle_state
from statdyn.statcore import QuadraticPotential, Statistics

B, F, D = Statistics.BOSON, Statistics.FERMION, Statistics.DISTINGUISHABLE


def main() -> None:
    run = LyapunovRun(base_ics=symmetric_three_particle_state(), t_end=400.0)
    cases = (
        ("boson, v/u = 0.4", B, QuadraticPotential(1.0, 0.4)),
        ("fermion, v/u = 0.4", F, QuadraticPotential(1.0, 0.4)),
        ("distinguishable", D, QuadraticPotential(1.0, 0.4)),
        ("boson, symmetric trap", B, QuadraticPotential(1.0, 1.0)),
    )
    print("largest Lyapunov exponent, radius-1.5 triangle, 1.2% perturbation")
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    for label, s, pot in cases:
        lam, series = lyapunov_estimate(s, pot, run)
        print(f"  {label:24s} lambda = {lam:+.5f}")
        ax.plot(series[:, 0], series[:, 1], label=f"{label} ({lam:+.4f})")
    print()
    print("separation estimates shrink toward zero except for the boson")
    print("pair coupling in the anisotropic trap, which stays positive")

    ax.axhline(0.0, color="gray", lw=0.5)
    ax.set_xlabel("t")
    ax.set_ylabel("cumulative exponent estimate")
    ax.set_title("Benettin series (shortened horizon)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(__file__).with_suffix(".png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
