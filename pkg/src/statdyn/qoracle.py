"""Truncated-Fock quantum reference for the single-mode LLL problem.

Exact quantum evolution of one mode under the quadratic Hamiltonian
H = U K0 + (V/2)(K+ + K-) with the su(1,1) generators K+ = adag^2/2,
K- = a^2/2, K0 = (a adag + adag a)/4, used to validate the classical
statistics-deformed dynamics. States are coefficient vectors in a truncated
number basis with automatic cutoff doubling, coherent and parity (cat)
state constructors, Ehrenfest closed-system solving for the K-triple, and a
Poisson-bracket versus commutator consistency check on the coherent and cat
manifolds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dynamics import run_relative
from .integrator import IntegratorConfig, Trajectory, integrate
from .statcore import QuadraticPotential, StatDynError, Statistics

__all__ = [
    "DEFAULT_CUTOFF",
    "MAX_CUTOFF",
    "CutoffError",
    "DegenerateStateError",
    "FockState",
    "Su11Triple",
    "make_coherent",
    "make_cat",
    "su11_matrices",
    "expect_n",
    "expect_a",
    "expect_a2",
    "expect_k_triple",
    "evolve",
    "evolve_with_diagnostics",
    "EhrenfestSeries",
    "ehrenfest_solve",
    "BracketMapReport",
    "bracket_map_check",
    "quantum_vs_classical_rho",
]

DEFAULT_CUTOFF = 64
MAX_CUTOFF = 512
TAIL_WINDOW = 8        # number of top coefficients inspected for leakage
TAIL_MASS_TOL = 1e-10  # maximum probability mass allowed in that window
NORM_TOL = 1e-10       # construction-time norm tolerance
DRIFT_TOL = 1e-9       # post-evolution unitarity budget


class CutoffError(StatDynError):
    """Truncation cutoff too small for the requested state or evolution."""


class DegenerateStateError(StatDynError):
    """Requested superposition vanishes identically."""


@dataclass(frozen=True)
class FockState:
    """Normalized coefficient vector in the truncated number basis."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("coefficients must be a 1-D vector of length >= 2")
        if not np.all(np.isfinite(c.view(np.float64))):
            raise ValueError("coefficients must be finite")
        norm = float(np.linalg.norm(c))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond {NORM_TOL:g}")
        tail = float(np.sum(np.abs(c[-TAIL_WINDOW:]) ** 2))
        if tail > TAIL_MASS_TOL:
            raise CutoffError(
                f"probability mass {tail:.3g} in the top {TAIL_WINDOW} levels exceeds "
                f"{TAIL_MASS_TOL:g}; increase the cutoff"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def cutoff(self) -> int:
        return self.coeffs.size


@dataclass(frozen=True)
class Su11Triple:
    """Matrix representations of K+, K-, K0 at a given cutoff."""

    kplus: np.ndarray
    kminus: np.ndarray
    k0: np.ndarray


def _coherent_coeffs(z: complex, cutoff: int) -> np.ndarray:
    c = np.empty(cutoff, dtype=np.complex128)
    c[0] = 1.0
    for k in range(1, cutoff):
        c[k] = c[k - 1] * z / math.sqrt(k)
    return c


def make_coherent(z: complex, cutoff: int = DEFAULT_CUTOFF) -> FockState:
    """Coherent state |z> in the truncated basis.

    Requires |z|^2 <= cutoff / 4 so the Poisson weight peak sits well below
    the truncation; raises CutoffError otherwise.
    """
    z = complex(z)
    rho = abs(z) ** 2
    if cutoff < 2 or cutoff > MAX_CUTOFF:
        raise ValueError(f"cutoff must be in [2, {MAX_CUTOFF}]")
    if rho > cutoff / 4.0:
        raise CutoffError(f"|z|^2 = {rho:.3g} exceeds cutoff/4 = {cutoff / 4:.3g}")
    c = _coherent_coeffs(z, cutoff)
    return FockState(c / np.linalg.norm(c))


def make_cat(
    z: complex, statistics: Statistics, cutoff: int = DEFAULT_CUTOFF
) -> FockState:
    """Even (boson) or odd (fermion) parity superposition of |z> and |-z>.

    The bosonic cat keeps even number components, the fermionic cat odd
    ones. The fermionic cat at z = 0 vanishes identically and raises
    DegenerateStateError. Distinguishable particles use make_coherent.
    """
    z = complex(z)
    if statistics is Statistics.DISTINGUISHABLE:
        raise ValueError("distinguishable particles take a plain coherent state")
    rho = abs(z) ** 2
    if cutoff < 2 or cutoff > MAX_CUTOFF:
        raise ValueError(f"cutoff must be in [2, {MAX_CUTOFF}]")
    if rho > cutoff / 4.0:
        raise CutoffError(f"|z|^2 = {rho:.3g} exceeds cutoff/4 = {cutoff / 4:.3g}")
    c = _coherent_coeffs(z, cutoff)
    if statistics is Statistics.BOSON:
        c[1::2] = 0.0
    else:
        c[0::2] = 0.0
    norm = float(np.linalg.norm(c))
    if norm == 0.0:
        raise DegenerateStateError("odd-parity superposition vanishes at z = 0")
    return FockState(c / norm)


@lru_cache(maxsize=None)
def _ladder_factors(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(cutoff, dtype=float)
    up2 = np.sqrt((k + 1.0) * (k + 2.0))  # <k|a^2|k+2> = up2[k]
    return k, up2


def su11_matrices(cutoff: int) -> Su11Triple:
    """Dense K+, K-, K0 matrices at the given cutoff.

    The commutators [K0, K+-] = +-K+- and [K+, K-] = -2 K0 hold exactly on
    the sub-block that excludes the top rows and columns touched by
    truncation.
    """
    k, up2 = _ladder_factors(cutoff)
    kminus = np.zeros((cutoff, cutoff), dtype=np.complex128)
    idx = np.arange(cutoff - 2)
    kminus[idx, idx + 2] = 0.5 * up2[idx]
    kplus = kminus.conj().T.copy()
    k0 = np.diag((2.0 * k + 1.0) / 4.0).astype(np.complex128)
    return Su11Triple(kplus=kplus, kminus=kminus, k0=k0)


def _apply_hamiltonian(pot: QuadraticPotential, c: np.ndarray) -> np.ndarray:
    """H c for H = U K0 + (V/2)(K+ + K-), using the band structure."""
    k, up2 = _ladder_factors(c.size)
    out = (0.25 * pot.U * (2.0 * k + 1.0)) * c
    half_v = 0.25 * pot.V_coef
    if half_v != 0.0:
        out[:-2] += half_v * up2[:-2] * c[2:]
        out[2:] += half_v * up2[:-2] * c[:-2]
    return out


def expect_n(state: FockState) -> float:
    """Occupation <adag a>."""
    k = np.arange(state.cutoff)
    return float(np.sum(k * np.abs(state.coeffs) ** 2))


def expect_a(state: FockState) -> complex:
    """Amplitude <a>."""
    c = state.coeffs
    k = np.arange(1, state.cutoff, dtype=float)
    return complex(np.sum(np.sqrt(k) * c[:-1].conj() * c[1:]))


def expect_a2(state: FockState) -> complex:
    """Second moment <a^2>."""
    c = state.coeffs
    _, up2 = _ladder_factors(state.cutoff)
    return complex(np.sum(up2[:-2] * c[:-2].conj() * c[2:]))


def expect_k_triple(state: FockState) -> tuple[float, float, float]:
    """(K_c, K_s, K_0) = (Re<a^2>, Im<a^2>, (2<n> + 1)/4)."""
    a2 = expect_a2(state)
    return a2.real, a2.imag, 0.25 * (2.0 * expect_n(state) + 1.0)


def _evolve_ode(
    coeffs: np.ndarray, pot: QuadraticPotential, t: float, rel_tol: float
) -> tuple[np.ndarray, Trajectory]:
    def flow(_t: float, c: np.ndarray) -> np.ndarray:
        return -1j * _apply_hamiltonian(pot, c)

    cfg = IntegratorConfig(t_end=t, rel_tol=rel_tol, abs_tol=1e-13)
    traj = integrate(flow, coeffs, cfg)
    return traj.states[-1].copy(), traj


def _evolve_eigh(coeffs: np.ndarray, pot: QuadraticPotential, t: float) -> np.ndarray:
    cutoff = coeffs.size
    k, up2 = _ladder_factors(cutoff)
    h = np.diag(0.25 * pot.U * (2.0 * k + 1.0)).astype(np.complex128)
    idx = np.arange(cutoff - 2)
    h[idx, idx + 2] = 0.25 * pot.V_coef * up2[idx]
    h[idx + 2, idx] = 0.25 * pot.V_coef * up2[idx]
    vals, vecs = np.linalg.eigh(h)
    return vecs @ (np.exp(-1j * vals * t) * (vecs.conj().T @ coeffs))


def evolve_with_diagnostics(
    state: FockState,
    pot: QuadraticPotential,
    t: float,
    rel_tol: float = 1e-10,
    method: str = "ode",
) -> tuple[FockState, dict]:
    """Evolve a state and report norm drift and the cutoff actually used.

    The coefficient Schroedinger equation cdot = -i H c is integrated with
    the adaptive stepper (method "ode", the default) or applied through an
    eigendecomposition of H (method "eigh", used as a cross-check). If
    probability mass leaks into the top TAIL_WINDOW levels beyond
    TAIL_MASS_TOL, the cutoff is doubled (up to MAX_CUTOFF) and the
    evolution restarts from the zero-padded initial state.

    Returns
    -------
    (state, info)
        info holds "norm_drift", "cutoff", and "doublings". The returned
        state is projected back to unit norm after the drift check passes.

    Raises
    ------
    CutoffError
        If MAX_CUTOFF still shows tail leakage.
    StatDynError
        If unitarity drift exceeds DRIFT_TOL even after one retry at a
        tenfold tighter tolerance.
    """
    if method not in ("ode", "eigh"):
        raise ValueError(f"unknown method {method!r}")
    t = float(t)
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return state, {"norm_drift": 0.0, "cutoff": state.cutoff, "doublings": 0}
    cutoff = state.cutoff
    doublings = 0
    while True:
        c0 = np.zeros(cutoff, dtype=np.complex128)
        c0[: state.cutoff] = state.coeffs
        if method == "eigh":
            c1 = _evolve_eigh(c0, pot, t)
        else:
            c1, _ = _evolve_ode(c0, pot, t, rel_tol)
            drift = abs(float(np.linalg.norm(c1)) - 1.0)
            if drift > DRIFT_TOL:
                c1, _ = _evolve_ode(c0, pot, t, rel_tol / 10.0)
                drift = abs(float(np.linalg.norm(c1)) - 1.0)
                if drift > DRIFT_TOL:
                    raise StatDynError(
                        f"unitarity drift {drift:.3g} exceeds {DRIFT_TOL:g}"
                    )
        tail = float(np.sum(np.abs(c1[-TAIL_WINDOW:]) ** 2))
        if tail <= TAIL_MASS_TOL:
            break
        if cutoff >= MAX_CUTOFF:
            raise CutoffError(
                f"tail mass {tail:.3g} persists at the maximum cutoff {MAX_CUTOFF}"
            )
        cutoff = min(2 * cutoff, MAX_CUTOFF)
        doublings += 1
    drift = abs(float(np.linalg.norm(c1)) - 1.0)
    info = {"norm_drift": drift, "cutoff": cutoff, "doublings": doublings}
    return FockState(c1 / np.linalg.norm(c1)), info


def evolve(
    state: FockState,
    pot: QuadraticPotential,
    t: float,
    rel_tol: float = 1e-10,
    method: str = "ode",
) -> FockState:
    """Evolve a state for time t under H = U K0 + (V/2)(K+ + K-)."""
    evolved, _ = evolve_with_diagnostics(state, pot, t, rel_tol=rel_tol, method=method)
    return evolved


# ---------------------------------------------------------------------------
# Ehrenfest closed system for the K-triple
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EhrenfestSeries:
    """Sampled solution of the closed (K_c, K_s, K_0) system."""

    times: np.ndarray
    k_c: np.ndarray
    k_s: np.ndarray
    k_0: np.ndarray


def ehrenfest_solve(
    pot: QuadraticPotential,
    rho0: float,
    theta0: float,
    quantum: bool,
    t_end: float,
    dt: float = 0.01,
) -> EhrenfestSeries:
    """Integrate the closed first-order system for (K_c, K_s, K_0).

    The quadratic Hamiltonian closes the Ehrenfest hierarchy:
        Kdot_c = U K_s,  Kdot_s = -U K_c - 2 V K_0,  Kdot_0 = -(V/2) K_s.
    Initial data: K_c = rho0 cos(theta0), K_s = rho0 sin(theta0), and
    K_0 = rho0 / 2 classically or (rho0 + 1/2) / 2 with the quantum
    zero-point offset (the only place the two branches differ).

    Returns values sampled on a uniform grid with spacing dt.
    """
    rho0 = float(rho0)
    theta0 = float(theta0)
    if rho0 < 0.0:
        raise ValueError("rho0 must be nonnegative")
    u_coef, v_coef = pot.U, pot.V_coef
    y0 = np.array(
        [
            rho0 * math.cos(theta0),
            rho0 * math.sin(theta0),
            0.5 * (rho0 + 0.5) if quantum else 0.5 * rho0,
        ]
    )

    def flow(_t: float, y: np.ndarray) -> np.ndarray:
        return np.array(
            [
                u_coef * y[1],
                -u_coef * y[0] - 2.0 * v_coef * y[2],
                -0.5 * v_coef * y[1],
            ]
        )

    cfg = IntegratorConfig(t_end=t_end, rel_tol=1e-11, abs_tol=1e-13)
    traj = integrate(flow, y0, cfg)
    ts = np.arange(0.0, t_end, dt)
    ts = np.append(ts, t_end)
    vals = traj.sample(ts).real
    return EhrenfestSeries(times=ts, k_c=vals[:, 0], k_s=vals[:, 1], k_0=vals[:, 2])


# ---------------------------------------------------------------------------
# Poisson bracket versus commutator on the coherent and cat manifolds
# ---------------------------------------------------------------------------


def _apply_a(c: np.ndarray) -> np.ndarray:
    out = np.zeros_like(c)
    k = np.arange(1, c.size, dtype=float)
    out[:-1] = np.sqrt(k) * c[1:]
    return out


def _apply_adag(c: np.ndarray) -> np.ndarray:
    out = np.zeros_like(c)
    k = np.arange(1, c.size, dtype=float)
    out[1:] = np.sqrt(k) * c[:-1]
    return out


@dataclass(frozen=True)
class BracketMapReport:
    """Both sides of the bracket-to-commutator correspondence for <x>, <p>.

    commutator_side is <[x, p]> / i on the state; bracket_side is the
    statistics-deformed Poisson bracket {<x>, <p>} evaluated on the state's
    manifold (coherent or parity cat). They agree (= 1) on the coherent
    manifold; on cat manifolds <x> and <p> vanish identically so the bracket
    side is 0 while the commutator side stays 1.
    """

    commutator_side: float
    bracket_side: float
    manifold: str


def bracket_map_check(state: FockState) -> BracketMapReport:
    """Compare {<x>, <p>} on the state's manifold with <[x, p]> / i.

    x = (a + adag)/sqrt(2), p = -i (a - adag)/sqrt(2). The commutator side
    is evaluated directly on the truncated vector. The bracket side uses
    exact manifold derivative identities for a coherent state
    (d<A>/dz = <A adag> - <A><adag>, d<A>/dzbar = <a A> - <a><A>, and
    f = <a adag> - <a><adag>); on a parity cat manifold <x> and <p> vanish
    identically, so their bracket is exactly zero.

    Raises
    ------
    ValueError
        If the state is neither (numerically) coherent nor parity-pure.
    """
    c = state.coeffs
    sqrt2 = math.sqrt(2.0)
    xc = (_apply_a(c) + _apply_adag(c)) / sqrt2
    pc = (_apply_a(c) - _apply_adag(c)) / (1j * sqrt2)
    # vdot(xc, pc) = <x psi | p psi> = <psi| x p |psi> since x is Hermitian
    commutator = float(((np.vdot(xc, pc) - np.vdot(pc, xc)) / 1j).real)

    even_mass = float(np.sum(np.abs(c[0::2]) ** 2))
    odd_mass = float(np.sum(np.abs(c[1::2]) ** 2))

    amp = complex(np.vdot(c, _apply_a(c)))  # <a>
    coherent_overlap = 0.0
    if abs(amp) ** 2 <= state.cutoff / 4.0:
        ref = _coherent_coeffs(amp, state.cutoff)
        ref /= np.linalg.norm(ref)
        coherent_overlap = abs(complex(np.vdot(ref, c)))

    if coherent_overlap >= 1.0 - 1e-10:
        ac = _apply_a(c)
        adc = _apply_adag(c)
        mean_a = amp
        mean_adag = complex(np.vdot(c, adc))
        mean_x = complex(np.vdot(c, xc))
        mean_p = complex(np.vdot(c, pc))
        # d<A>/dz = <A adag> - <A><adag>; d<A>/dzbar = <a A> - <a><A>
        dz_x = complex(np.vdot(xc, adc)) - mean_x * mean_adag
        dzbar_x = complex(np.vdot(adc, xc)) - mean_a * mean_x
        dz_p = complex(np.vdot(pc, adc)) - mean_p * mean_adag
        dzbar_p = complex(np.vdot(adc, pc)) - mean_a * mean_p
        f = float((np.vdot(ac, ac) + 1.0 - (mean_a * mean_adag)).real)
        bracket = complex((dz_x * dzbar_p - dzbar_x * dz_p) / (1j * f))
        return BracketMapReport(
            commutator_side=commutator, bracket_side=float(bracket.real), manifold="coherent"
        )
    if odd_mass == 0.0 or even_mass == 0.0:
        # <x> and <p> connect adjacent parities, so every evaluation of the
        # manifold functions is exactly zero and so are their derivatives
        manifold = "cat_even" if odd_mass == 0.0 else "cat_odd"
        return BracketMapReport(
            commutator_side=commutator, bracket_side=0.0, manifold=manifold
        )
    raise ValueError("state is neither coherent nor parity-pure; no tested manifold")


# ---------------------------------------------------------------------------
# Quantum versus classical radial dynamics
# ---------------------------------------------------------------------------


def quantum_vs_classical_rho(
    statistics: Statistics,
    pot: QuadraticPotential,
    z0: complex,
    t_end: float,
    dt: float = 0.01,
    cutoff: int = DEFAULT_CUTOFF,
    rel_tol: float = 1e-10,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Quantum and classical radial series on a common time grid.

    The quantum branch evolves the statistics-matched state (parity cat for
    bosons/fermions, coherent for distinguishable) and reports
    rho_qm = 2 <K0> - 1/2 = <adag a>; the classical branch integrates the
    relative flow and reports rho_cl = |z(t)|^2. Both are sampled on the
    uniform grid with spacing dt.

    Returns
    -------
    (times, rho_qm, rho_cl)
    """
    z0 = complex(z0)
    if statistics is Statistics.DISTINGUISHABLE:
        psi0 = make_coherent(z0, cutoff)
    else:
        psi0 = make_cat(z0, statistics, cutoff)

    def flow(_t: float, c: np.ndarray) -> np.ndarray:
        return -1j * _apply_hamiltonian(pot, c)

    cfg = IntegratorConfig(t_end=t_end, rel_tol=rel_tol, abs_tol=1e-13)
    qtraj = integrate(flow, psi0.coeffs, cfg)
    ts = np.arange(0.0, t_end, dt)
    ts = np.append(ts, t_end)
    cs = qtraj.sample(ts)
    weights = np.abs(cs) ** 2
    k = np.arange(cutoff)
    rho_qm = (weights @ k) / weights.sum(axis=1)

    ctraj = run_relative(statistics, pot, z0, t_end, rel_tol=1e-11, abs_tol=1e-13)
    zs = ctraj.sample(ts)[:, 0]
    rho_cl = zs.real**2 + zs.imag**2
    return ts, rho_qm, rho_cl
