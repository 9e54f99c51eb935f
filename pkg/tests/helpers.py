"""Shared test oracles.

Two independent references live here:

* a dense multi-mode Fock-space oracle for the N-particle potential
  expectation, built from per-mode ladder matrices and explicitly
  (anti)symmetrized coherent products, with no code shared with the
  permutation-sum implementation under test;
* the closed-form solutions of the linear (K_c, K_s, K_0) system for the
  initial data rho(0) = l**2, theta(0) = pi/2, in both the classical and
  the half-quantum-offset variants.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from statdyn.statcore import QuadraticPotential, Statistics


def _coherent_vector(z: complex, cutoff: int) -> np.ndarray:
    ks = np.arange(cutoff)
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, cutoff)))))
    if z == 0:
        vec = np.zeros(cutoff, dtype=complex)
        vec[0] = 1.0
        return vec
    # c_k = z^k / sqrt(k!) up to overall normalization exp(-|z|^2 / 2)
    vec = np.exp(ks * np.log(complex(z)) - 0.5 * log_fact)
    return vec * math.exp(-0.5 * abs(z) ** 2)


def _mode_matrices(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """(number operator, a^2 operator) as dense cutoff x cutoff matrices."""
    n_op = np.diag(np.arange(cutoff, dtype=float)).astype(complex)
    a = np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1).astype(complex)
    return n_op, a @ a


def _apply_mode_operator(psi: np.ndarray, op: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(psi, axis, 0)
    applied = np.tensordot(op, moved, axes=(1, 0))
    return np.moveaxis(applied, 0, axis)


def fock_nbody_potential(
    zs: tuple[complex, ...],
    statistics: Statistics,
    pot: QuadraticPotential,
    cutoff: int = 24,
    include_zero_point: bool = False,
) -> float:
    """Potential expectation over the (anti)symmetrized coherent product.

    Builds sum_P eta_P |z_P(1)> x ... x |z_P(N)> as a dense rank-N tensor
    and evaluates <H>/<psi|psi> with H = sum_i [(U/2) n_i + (V/4)(a_i^2 +
    a_i^+2)] (+ U/4 per mode when include_zero_point). Exact up to the
    Fock cutoff; keep |z|^2 well under cutoff/2.
    """
    n = len(zs)
    vectors = [_coherent_vector(z, cutoff) for z in zs]
    psi = np.zeros((cutoff,) * n, dtype=complex)
    if statistics is Statistics.DISTINGUISHABLE:
        perms = [tuple(range(n))]
        signs = [1.0]
    else:
        perms = list(itertools.permutations(range(n)))
        signs = []
        for perm in perms:
            inversions = sum(
                perm[i] > perm[j] for i in range(n) for j in range(i + 1, n)
            )
            signs.append(
                -1.0 if statistics is Statistics.FERMION and inversions % 2 else 1.0
            )
    for perm, sign in zip(perms, signs):
        term = vectors[perm[0]]
        for idx in perm[1:]:
            term = np.tensordot(term, vectors[idx], axes=0)
        psi = psi + sign * term

    norm_sq = float(np.vdot(psi, psi).real)
    n_op, a2_op = _mode_matrices(cutoff)
    total = 0.0
    for axis in range(n):
        n_psi = _apply_mode_operator(psi, n_op, axis)
        a2_psi = _apply_mode_operator(psi, a2_op, axis)
        total += 0.5 * pot.U * float(np.vdot(psi, n_psi).real)
        total += 0.5 * pot.V_coef * float(np.vdot(psi, a2_psi).real)
    if include_zero_point:
        total += 0.25 * pot.U * n * norm_sq
    return total / norm_sq


def k_system_closed_form(
    pot: QuadraticPotential, l_sq: float, quantum: bool, ts: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form (K_c, K_s, K_0)(t) for rho(0)=l_sq, theta(0)=pi/2.

    Derivation: K_0 = q - (V/2U) K_c with q = K_0(0) turns the linear
    system into K_c'' + w^2 K_c = -2 U V q, w = sqrt(U^2 - V^2); the
    quantum variant only shifts q from l_sq/2 to (l_sq + 1/2)/2.
    """
    U, V = pot.U, pot.V_coef
    w = math.sqrt(U * U - V * V)
    q = 0.5 * (l_sq + 0.5) if quantum else 0.5 * l_sq
    cos, sin = np.cos(w * ts), np.sin(w * ts)
    k_c = (U * l_sq / w) * sin + (2.0 * U * V * q / w**2) * (cos - 1.0)
    k_s = l_sq * cos - (2.0 * V * q / w) * sin
    k_0 = q - (V * l_sq / (2.0 * w)) * sin - (V * V * q / w**2) * (cos - 1.0)
    return k_c, k_s, k_0


def quantum_classical_rho_gap(pot: QuadraticPotential, l_sq: float, ts: np.ndarray) -> np.ndarray:
    """Analytic rho_qm - rho_cl for a distinguishable particle at theta0=pi/2.

    rho_qm = 2 K_0(quantum) - 1/2 and rho_cl = 2 K_0(classical); the
    difference collapses to (V^2 / 2 w^2)(1 - cos w t).
    """
    U, V = pot.U, pot.V_coef
    w = math.sqrt(U * U - V * V)
    return (V * V / (2.0 * w * w)) * (1.0 - np.cos(w * ts))
