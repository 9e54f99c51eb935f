"""Domain types and exchange-statistics geometry on coherent-state manifolds.

Lowest-Landau-level (and 1d analogue) coherent states labelled by complex
guiding-center coordinates acquire a statistics-dependent symplectic form
when the many-body state is symmetrized. This module provides the scalar
symplectic factors for the two-body relative coordinate, the general
N-particle permutation-sum machinery (normalization sum, Kahler potential,
symplectic Hessian), and expectation values of quadratic potentials, all in
units with hbar = 1 and unit magnetic length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import permutations as _iter_permutations

import numpy as np

__all__ = [
    "N_MAX",
    "F_MIN",
    "FERMION_SERIES_RHO",
    "EXP_BOUND",
    "COINCIDENCE_FLOOR",
    "StatDynError",
    "CoordinateOverflowError",
    "CoincidenceError",
    "SingularConfigurationError",
    "Statistics",
    "PhasePoint",
    "TwoBodyState",
    "NBodyState",
    "QuadraticPotential",
    "SymplecticMatrix",
    "symplectic_factor",
    "kahler_slope",
    "radial_occupation",
    "cm_relative_transform",
    "individual_from_cm_relative",
    "permutation_sum",
    "kahler_potential",
    "symplectic_matrix",
    "potential_expectation",
    "potential_gradient",
]

# Hard cap on particle number: permutation sums grow as N!.
N_MAX = 8

# Smallest admissible eigenvalue of the symplectic form before the flow is
# treated as singular (bosonic coincidences drive it to zero).
F_MIN = 1e-8

# Below this rho the fermionic coth - rho*csch^2 expression cancels badly;
# switch to its Taylor series.
FERMION_SERIES_RHO = 1e-3

# Largest allowed sum of |z_i|^2: beyond this exp() overflows even after
# log-sum-exp stabilization of the permutation sum.
EXP_BOUND = 700.0

# A fermionic normalization sum below this absolute value is treated as a
# coordinate coincidence (the state vanishes by exclusion).
COINCIDENCE_FLOOR = 1e-300


class StatDynError(Exception):
    """Base class for numerical domain errors raised by this package."""


class CoordinateOverflowError(StatDynError):
    """Coordinates too large for a stable normalization sum."""


class CoincidenceError(StatDynError):
    """Fermionic normalization sum vanished (coordinates coincide)."""


class SingularConfigurationError(StatDynError):
    """Symplectic form is singular at the requested configuration."""


class Statistics(Enum):
    """Exchange statistics of the particle pair or ensemble."""

    BOSON = "boson"
    FERMION = "fermion"
    DISTINGUISHABLE = "distinguishable"

    @classmethod
    def from_string(cls, name: str) -> "Statistics":
        """Parse a case-insensitive statistics name."""
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown statistics {name!r}; expected one of: {valid}") from None


def _require_finite_complex(value: complex, label: str) -> complex:
    value = complex(value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ValueError(f"{label} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class PhasePoint:
    """A single guiding-center coordinate z = x + i p."""

    z: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "z", _require_finite_complex(self.z, "z"))

    @property
    def x(self) -> float:
        return self.z.real

    @property
    def p(self) -> float:
        return self.z.imag

    @property
    def rho(self) -> float:
        """Radial coordinate rho = |z|^2."""
        return abs(self.z) ** 2


@dataclass(frozen=True)
class TwoBodyState:
    """Center-of-mass and relative coordinates of a pair, Z and z."""

    Z: complex
    z: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "Z", _require_finite_complex(self.Z, "Z"))
        object.__setattr__(self, "z", _require_finite_complex(self.z, "z"))

    def individual(self) -> tuple[complex, complex]:
        """Return the individual coordinates (z1, z2)."""
        return individual_from_cm_relative(self.Z, self.z)


@dataclass(frozen=True)
class NBodyState:
    """Individual guiding-center coordinates of N particles."""

    zs: tuple[complex, ...]

    def __post_init__(self) -> None:
        zs = tuple(_require_finite_complex(w, "coordinate") for w in self.zs)
        if not zs:
            raise ValueError("NBodyState needs at least one coordinate")
        if len(zs) > N_MAX:
            raise ValueError(f"N = {len(zs)} exceeds the supported maximum N_MAX = {N_MAX}")
        object.__setattr__(self, "zs", zs)

    @property
    def n(self) -> int:
        return len(self.zs)

    def asarray(self) -> np.ndarray:
        return np.array(self.zs, dtype=np.complex128)


@dataclass(frozen=True)
class QuadraticPotential:
    """Quadratic single-particle potential u x^2 + v y^2 on guiding centers.

    The dynamically relevant combinations are always recomputed from (u, v):
    U = u + v multiplies the radial part and V_coef = u - v the squeezing
    part. An isotropic trap has v = u (V_coef = 0); a saddle has u v < 0.
    """

    u: float
    v: float

    def __post_init__(self) -> None:
        for label in ("u", "v"):
            value = float(getattr(self, label))
            if not math.isfinite(value):
                raise ValueError(f"{label} must be finite")
            object.__setattr__(self, label, value)

    @property
    def U(self) -> float:
        return self.u + self.v

    @property
    def V_coef(self) -> float:
        return self.u - self.v

    @property
    def is_symmetric(self) -> bool:
        return self.u == self.v

    @property
    def is_trap(self) -> bool:
        return self.u > 0 and self.v > 0

    @property
    def is_saddle(self) -> bool:
        return self.u * self.v < 0


@dataclass(frozen=True)
class SymplecticMatrix:
    """Hermitian matrix f_ij = d^2 K / dzbar_i dz_j of an N-body state."""

    f: np.ndarray

    def __post_init__(self) -> None:
        f = np.array(self.f, dtype=np.complex128)
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise ValueError("symplectic matrix must be square")
        if not np.all(np.isfinite(f.view(np.float64))):
            raise ValueError("symplectic matrix must be finite")
        scale = max(1.0, float(np.max(np.abs(f))))
        if np.max(np.abs(f - f.conj().T)) > 1e-12 * scale:
            raise ValueError("symplectic matrix must be Hermitian to 1e-12")
        f.setflags(write=False)
        object.__setattr__(self, "f", f)

    @property
    def n(self) -> int:
        return self.f.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.f)[0])


# ---------------------------------------------------------------------------
# Scalar statistics factors for the two-body relative coordinate
# ---------------------------------------------------------------------------


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not math.isfinite(rho) or rho < 0.0:
        raise ValueError(f"rho must be finite and nonnegative, got {rho!r}")
    return rho


def symplectic_factor(statistics: Statistics, rho: float) -> float:
    """Scalar symplectic factor f(rho) of the relative coordinate.

    Parameters
    ----------
    statistics : Statistics
        Exchange statistics of the pair.
    rho : float
        Radial coordinate rho = |z|^2 of the relative mode, nonnegative.

    Returns
    -------
    float
        f(rho) = tanh(rho) + rho sech^2(rho) for bosons,
        coth(rho) - rho csch^2(rho) for fermions (Taylor series
        (2/3) rho - (4/45) rho^3 below rho = 1e-3), and 1 for
        distinguishable particles. Both statistics limits approach 1 as
        rho grows; the fermionic factor vanishes at coincidence.
    """
    rho = _check_rho(rho)
    if statistics is Statistics.DISTINGUISHABLE:
        return 1.0
    # exp(-2 rho) based forms stay finite for every rho >= 0
    e = math.exp(-2.0 * rho)
    if statistics is Statistics.BOSON:
        one_plus = 1.0 + e
        tanh = (1.0 - e) / one_plus
        sech2 = 4.0 * e / (one_plus * one_plus)
        return tanh + rho * sech2
    if rho < FERMION_SERIES_RHO:
        return (2.0 / 3.0) * rho - (4.0 / 45.0) * rho**3
    em1 = -math.expm1(-2.0 * rho)  # 1 - e, well conditioned near 0
    coth = (1.0 + e) / em1
    csch2 = 4.0 * e / (em1 * em1)
    return coth - rho * csch2


def kahler_slope(statistics: Statistics, rho: float) -> float:
    """Radial derivative g(rho) = dK/drho of the relative Kahler potential.

    g = tanh(rho) for bosons, coth(rho) for fermions, 1 for distinguishable
    particles. Satisfies d(rho g)/drho = symplectic_factor. The fermionic
    slope diverges at rho = 0 (coincidence), which raises.
    """
    rho = _check_rho(rho)
    if statistics is Statistics.DISTINGUISHABLE:
        return 1.0
    if statistics is Statistics.BOSON:
        return math.tanh(rho)
    if rho == 0.0:
        raise SingularConfigurationError("fermionic Kahler slope diverges at coincidence")
    e = math.exp(-2.0 * rho)
    return (1.0 + e) / -math.expm1(-2.0 * rho)


def radial_occupation(statistics: Statistics, rho: float) -> float:
    """Mode occupation rho * g(rho) of the relative coordinate.

    Equals rho tanh(rho) (boson), rho coth(rho) (fermion, limit 1 at
    coincidence), or rho (distinguishable). This is the radial part of the
    potential expectation and stays finite at rho = 0.
    """
    rho = _check_rho(rho)
    if statistics is Statistics.DISTINGUISHABLE:
        return rho
    if statistics is Statistics.BOSON:
        return rho * math.tanh(rho)
    if rho == 0.0:
        return 1.0
    e = math.exp(-2.0 * rho)
    return rho * (1.0 + e) / -math.expm1(-2.0 * rho)


# ---------------------------------------------------------------------------
# Coordinate transforms
# ---------------------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)


def cm_relative_transform(z1: complex, z2: complex) -> TwoBodyState:
    """Map individual coordinates to Z = (z1+z2)/sqrt2, z = (z1-z2)/sqrt2."""
    z1 = _require_finite_complex(z1, "z1")
    z2 = _require_finite_complex(z2, "z2")
    return TwoBodyState(Z=(z1 + z2) / _SQRT2, z=(z1 - z2) / _SQRT2)


def individual_from_cm_relative(Z: complex, z: complex) -> tuple[complex, complex]:
    """Inverse of cm_relative_transform."""
    Z = _require_finite_complex(Z, "Z")
    z = _require_finite_complex(z, "z")
    return ((Z + z) / _SQRT2, (Z - z) / _SQRT2)


# ---------------------------------------------------------------------------
# N-body permutation sums
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _perm_table(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All permutations of range(n), their inverses, and their parities."""
    perms = np.array(list(_iter_permutations(range(n))), dtype=np.intp)
    m = perms.shape[0]
    inv = np.empty_like(perms)
    rows = np.arange(m)[:, None]
    inv[rows, perms] = np.arange(n)[None, :]
    if n > 1:
        ii, jj = np.triu_indices(n, 1)
        inversions = (perms[:, ii] > perms[:, jj]).sum(axis=1)
        signs = 1.0 - 2.0 * (inversions & 1)
    else:
        signs = np.ones(m)
    perms.setflags(write=False)
    inv.setflags(write=False)
    signs.setflags(write=False)
    return perms, inv, signs


@dataclass(frozen=True)
class _PermData:
    """Stabilized permutation-sum ingredients for one configuration.

    All quantities share a removed factor exp(scale) with scale = sum |z|^2,
    which cancels in every normalized expression.
    """

    z: np.ndarray          # coordinates, shape (n,)
    perms: np.ndarray      # permutations in use, shape (m, n)
    w: np.ndarray          # signed stabilized weights, shape (m,)
    zp: np.ndarray         # z[perms], shape (m, n)
    zbar_inv: np.ndarray   # conj(z)[inverse perms], shape (m, n)
    s0: float              # stabilized normalization sum, positive
    d: np.ndarray          # stabilized dS/dzbar_i, shape (n,)
    scale: float           # sum of |z_i|^2


def _perm_data(state: NBodyState, statistics: Statistics) -> _PermData:
    z = state.asarray()
    n = state.n
    scale = float(np.sum(z.real**2 + z.imag**2))
    if scale > EXP_BOUND:
        raise CoordinateOverflowError(
            f"sum of |z|^2 = {scale:.3g} exceeds the stable bound {EXP_BOUND:g}"
        )
    if statistics is Statistics.DISTINGUISHABLE:
        perms = np.arange(n, dtype=np.intp)[None, :]
        inv = perms
        signs = np.ones(1)
    else:
        perms, inv, parities = _perm_table(n)
        signs = parities if statistics is Statistics.FERMION else np.ones(len(parities))
    zp = z[perms]
    exponents = zp @ z.conj() - scale  # identity permutation gives exactly 0
    w = signs * np.exp(exponents)
    s0_c = w.sum()
    s0 = float(s0_c.real)
    if s0 <= 0.0 or math.log(max(s0, 1e-320)) + scale < math.log(COINCIDENCE_FLOOR):
        raise CoincidenceError(
            "normalization sum vanished; coordinates coincide for these statistics"
        )
    d = w @ zp
    return _PermData(
        z=z, perms=perms, w=w, zp=zp, zbar_inv=z.conj()[inv], s0=s0, d=d, scale=scale
    )


def permutation_sum(state: NBodyState, statistics: Statistics) -> float:
    """Exchange-symmetrized normalization sum S of an N-body state.

    S = sum over permutations P of eta_P exp(sum_k zbar_k z_{P(k)}), with
    eta_P = 1 for bosons, the parity for fermions, and only the identity
    permutation retained for distinguishable particles. S equals the inverse
    square of the symmetrized state's normalization constant and is real and
    positive away from fermionic coincidences.

    Raises
    ------
    CoordinateOverflowError
        If sum |z_i|^2 exceeds EXP_BOUND (the result would overflow).
    CoincidenceError
        If the (fermionic) sum underflows below COINCIDENCE_FLOOR.
    """
    pd = _perm_data(state, statistics)
    if pd.scale + math.log(pd.s0) > 709.0:
        raise CoordinateOverflowError("normalization sum overflows float64")
    return pd.s0 * math.exp(pd.scale)


def kahler_potential(state: NBodyState, statistics: Statistics) -> float:
    """Kahler potential K = ln S of the symmetrized N-body state."""
    pd = _perm_data(state, statistics)
    return pd.scale + math.log(pd.s0)


def symplectic_matrix(state: NBodyState, statistics: Statistics) -> SymplecticMatrix:
    """Hermitian symplectic form f_ij = d^2 K / dzbar_i dz_j.

    For N = 2 in center-of-mass/relative coordinates this block-diagonalizes
    into an identity CM block and the scalar symplectic_factor; for
    well-separated or distinguishable particles it tends to the identity.

    Returns
    -------
    SymplecticMatrix
        Validated Hermitian matrix (positive semidefinite away from
        coincidences).
    """
    f = _symplectic_matrix_raw(_perm_data(state, statistics))
    return SymplecticMatrix(f)


def _symplectic_matrix_raw(pd: _PermData) -> np.ndarray:
    n = pd.z.shape[0]
    m = pd.perms.shape[0]
    h = np.zeros((n, n), dtype=np.complex128)
    rows = np.tile(np.arange(n), m)
    np.add.at(h, (rows, pd.perms.ravel()), np.repeat(pd.w, n))
    h += np.einsum("p,pi,pj->ij", pd.w, pd.zp, pd.zbar_inv)
    f = h / pd.s0 - np.outer(pd.d, pd.d.conj()) / (pd.s0 * pd.s0)
    return 0.5 * (f + f.conj().T)  # symmetrize away last-bit roundoff


def _occupation_sum(pd: _PermData) -> float:
    """Total mode occupation sum_i <adag_i a_i> = sum_i z_i dlnS/dz_i."""
    return float((pd.z @ pd.d.conj()).real) / pd.s0


def potential_expectation(
    state: NBodyState,
    statistics: Statistics,
    pot: QuadraticPotential,
    include_zero_point: bool = False,
) -> float:
    """Expectation of the quadratic guiding-center potential.

    Evaluates (U/2) sum_i <adag_i a_i> + (V_coef/4) sum_i <a_i^2 + adag_i^2>
    on the symmetrized state. The squeezing term reduces exactly to
    (V_coef/2) Re sum_i z_i^2 because the symmetrized state is an eigenstate
    of sum_i a_i^2. With include_zero_point the symmetric-ordering constant
    N U / 4 is added (used when comparing against quantum expectations).

    Parameters
    ----------
    state : NBodyState
    statistics : Statistics
    pot : QuadraticPotential
    include_zero_point : bool
        Add the N U / 4 constant of symmetric operator ordering.

    Returns
    -------
    float
    """
    pd = _perm_data(state, statistics)
    occupation = _occupation_sum(pd)
    quad = complex(np.sum(pd.z**2))
    value = 0.5 * pot.U * occupation + 0.5 * pot.V_coef * quad.real
    if include_zero_point:
        value += 0.25 * pot.U * state.n
    return value


def potential_gradient(
    state: NBodyState, statistics: Statistics, pot: QuadraticPotential
) -> np.ndarray:
    """Analytic gradient dV/dzbar_j of potential_expectation.

    Returns
    -------
    numpy.ndarray
        Complex array of length N. Together with the symplectic matrix this
        defines the equations of motion zdot = -i f^{-1} dV/dzbar.
    """
    pd = _perm_data(state, statistics)
    occupation = _occupation_sum(pd)
    b = np.einsum("p,pi,pj->ij", pd.w, pd.zp, pd.zp)
    d_over_s = pd.d / pd.s0
    # d(occupation)/dzbar_j; the occupation sum is real so its zbar gradient
    # is the conjugate-coordinate derivative of sum_m zbar_m dlnS/dzbar_m
    docc = d_over_s + (b @ pd.z.conj()) / pd.s0 - occupation * d_over_s
    return 0.5 * pot.U * docc + 0.5 * pot.V_coef * pd.z.conj()
