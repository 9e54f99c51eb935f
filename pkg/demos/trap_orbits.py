"""Trapped pairs: level sets, closed orbits, and the geometric phase.

In an anisotropic quadratic trap the relative coordinate of a pair moves
along level sets of its statistics-dependent Hamiltonian. Launched from
the same point, bosons enclose less area than fermions, orbit periods
split by species, and for closed orbits the anholonomy phase of the
Kahler connection separates from the dynamical phase (for
distinguishable particles the two are exactly opposite).

Run:  python3 demos/trap_orbits.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from statdyn.dynamics import (
    find_closed_orbit,
    geometric_phase,
    relative_energy,
    rtheta_levelset,
)
from statdyn.statcore import QuadraticPotential, Statistics

B, F, D = Statistics.BOSON, Statistics.FERMION, Statistics.DISTINGUISHABLE
ANISO = QuadraticPotential(u=1.0, v=0.4)
ISO = QuadraticPotential(u=0.5, v=0.5)


def levelset_areas(z0: complex = 1.2 + 0j) -> dict:
    print(f"level sets through z0 = {z0} (u=1, v=0.4), one per species")
    contours = {}
    for s in (B, F, D):
        energy = relative_energy(s, ANISO, z0)
        phis, rhos = rtheta_levelset(s, ANISO, energy, n_angles=720)
        area = 0.25 * float(np.sum(rhos) * (phis[1] - phis[0]))
        contours[s] = (phis, rhos, area)
        print(f"  {s.value:16s} E = {energy:.4f}  enclosed area = {area:.4f}")
    print("  from the same starting point the boson contour encloses the")
    print("  least area and the fermion contour the most\n")
    return contours


def orbit_phases() -> None:
    print("symmetric trap (u = v = 0.5): circular orbits, z0 = 1.2")
    for s in (B, F, D):
        orbit = find_closed_orbit(s, ISO, 1.2 + 0j, t_max=30.0)
        aa, dyn = geometric_phase(orbit, s)
        print(
            f"  {s.value:16s} period = {orbit.t_end:8.5f}  "
            f"anholonomy = {aa:+.5f}  dynamic = {dyn:+.5f}"
        )
    print("  (distinguishable: anholonomy + dynamic = 0 exactly)\n")

    print("anisotropic trap (u=1, v=0.4): the period now depends on species")
    for s in (B, F, D):
        orbit = find_closed_orbit(s, ANISO, 1.2 + 0j, t_max=60.0)
        aa, dyn = geometric_phase(orbit, s)
        print(f"  {s.value:16s} period = {orbit.t_end:8.5f}  anholonomy = {aa:+.5f}")
    print()


def figure(contours: dict, path: Path) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.0, 4.2))
    for s, (phis, rhos, area) in contours.items():
        # the contour lives in (rho, phi); draw it in the z plane
        radii = np.sqrt(rhos)
        ax1.plot(
            radii * np.cos(phis / 2.0),
            radii * np.sin(phis / 2.0),
            label=f"{s.value} (area {area:.3f})",
        )
    ax1.set_title("level sets at equal energy")
    ax1.set_xlabel("Re z")
    ax1.set_ylabel("Im z")
    ax1.set_aspect("equal")
    ax1.legend(fontsize=8)

    ts = np.linspace(0.0, 14.0, 600)
    for s in (B, F, D):
        orbit = find_closed_orbit(s, ANISO, 1.2 + 0j, t_max=60.0)
        zs = orbit.sample(np.clip(ts, 0.0, orbit.t_end))[:, 0]
        ax2.plot(zs.real, zs.imag, label=f"{s.value} T={orbit.t_end:.3f}")
    ax2.set_title("closed orbits, u=1 v=0.4, z0=1.2")
    ax2.set_xlabel("Re z")
    ax2.set_ylabel("Im z")
    ax2.set_aspect("equal")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    print(f"wrote {path}")


def main() -> None:
    contours = levelset_areas()
    orbit_phases()
    figure(contours, Path(__file__).with_suffix(".png"))


if __name__ == "__main__":
    main()
