"""Unit tests for domain types, symplectic factors, and the permutation-sum
Kahler machinery."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import fock_nbody_potential
from statdyn.statcore import (
    COINCIDENCE_FLOOR,
    EXP_BOUND,
    F_MIN,
    FERMION_SERIES_RHO,
    N_MAX,
    CoincidenceError,
    CoordinateOverflowError,
    NBodyState,
    PhasePoint,
    QuadraticPotential,
    SingularConfigurationError,
    Statistics,
    SymplecticMatrix,
    cm_relative_transform,
    individual_from_cm_relative,
    kahler_potential,
    kahler_slope,
    permutation_sum,
    potential_expectation,
    potential_gradient,
    radial_occupation,
    symplectic_factor,
    symplectic_matrix,
)

# Frozen high-precision reference: coth(1) - csch(1)^2 evaluated with mpmath
# at 50 digits (0.5889736245330208372281725...).
FERMION_FACTOR_AT_1 = 0.5889736245330208

finite_complex = st.complex_numbers(
    min_magnitude=0.0, max_magnitude=4.0, allow_nan=False, allow_infinity=False
)


def random_nbody(rng, n, scale=1.5):
    return NBodyState(tuple(complex(a, b) for a, b in rng.uniform(-scale, scale, (n, 2))))


# ---------------------------------------------------------------------------
# Statistics and basic types
# ---------------------------------------------------------------------------


def test_statistics_from_string():
    assert Statistics.from_string("boson") is Statistics.BOSON
    assert Statistics.from_string("Fermion") is Statistics.FERMION
    assert Statistics.from_string("DISTINGUISHABLE") is Statistics.DISTINGUISHABLE
    with pytest.raises(ValueError):
        Statistics.from_string("anyon")


def test_phase_point_rejects_nonfinite():
    with pytest.raises(ValueError):
        PhasePoint(complex(float("nan"), 0.0))
    with pytest.raises(ValueError):
        PhasePoint(complex(0.0, float("inf")))
    pt = PhasePoint(0.7 - 0.8j)
    assert pt.x == pytest.approx(0.7)
    assert pt.p == pytest.approx(-0.8)
    assert pt.rho == pytest.approx(0.49 + 0.64)


def test_nbody_state_size_limits():
    with pytest.raises(ValueError):
        NBodyState(tuple())
    with pytest.raises(ValueError):
        NBodyState(tuple(complex(k, 0) for k in range(N_MAX + 1)))
    state = NBodyState((1.0 + 0j, 2.0 + 0j))
    assert state.n == 2
    assert np.allclose(state.asarray(), [1.0, 2.0])


def test_quadratic_potential_derived_fields():
    pot = QuadraticPotential(1.0, 0.4)
    assert pot.U == pytest.approx(1.4)
    assert pot.V_coef == pytest.approx(0.6)
    assert pot.is_trap and not pot.is_saddle and not pot.is_symmetric
    saddle = QuadraticPotential(1.0, -1.0)
    assert saddle.is_saddle
    assert QuadraticPotential(0.7, 0.7).is_symmetric


def test_symplectic_matrix_validation():
    with pytest.raises(ValueError):
        SymplecticMatrix(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))
    mat = SymplecticMatrix(np.eye(2, dtype=complex))
    assert mat.min_eigenvalue() == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# Symplectic factors
# ---------------------------------------------------------------------------


def test_factor_closed_form_values():
    assert symplectic_factor(Statistics.DISTINGUISHABLE, 2.0) == 1.0
    assert symplectic_factor(Statistics.BOSON, 0.0) == 0.0
    assert symplectic_factor(Statistics.FERMION, 1.0) == pytest.approx(
        FERMION_FACTOR_AT_1, abs=1e-13
    )
    rho = 1.7
    expected_b = math.tanh(rho) + rho / math.cosh(rho) ** 2
    expected_f = 1.0 / math.tanh(rho) - rho / math.sinh(rho) ** 2
    assert symplectic_factor(Statistics.BOSON, rho) == pytest.approx(expected_b, rel=1e-14)
    assert symplectic_factor(Statistics.FERMION, rho) == pytest.approx(expected_f, rel=1e-14)


def test_fermion_series_matches_high_precision():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 50
    for rho in (1e-8, 1e-5, 5e-4, 9.99e-4, 1.01e-3, 0.01):
        r = mpmath.mpf(rho)
        exact = float(mpmath.coth(r) - r / mpmath.sinh(r) ** 2)
        got = symplectic_factor(Statistics.FERMION, rho)
        assert got == pytest.approx(exact, rel=1e-10), rho


def test_fermion_series_branch_agrees_with_direct_form_at_threshold():
    # just below the switch the package uses the series; the direct stable
    # form still has ~6 good digits there, so the two must agree closely
    rho = FERMION_SERIES_RHO * 0.999
    series_value = symplectic_factor(Statistics.FERMION, rho)
    e = math.exp(-2.0 * rho)
    em1 = -math.expm1(-2.0 * rho)
    direct = (1.0 + e) / em1 - rho * 4.0 * e / (em1 * em1)
    assert series_value == pytest.approx(direct, rel=1e-9)


def test_factor_asymptotics_and_ordering():
    for rho in np.linspace(0.01, 2.0, 50):
        assert symplectic_factor(Statistics.FERMION, rho) < symplectic_factor(
            Statistics.BOSON, rho
        )
    for rho in (20.0, 50.0, 300.0):
        for s in (Statistics.BOSON, Statistics.FERMION):
            assert abs(symplectic_factor(s, rho) - 1.0) < 1e-6
    # boson factor exceeds 1 on a mid-range window, fermion factor never does
    assert symplectic_factor(Statistics.BOSON, 1.0) > 1.0
    for rho in np.linspace(0.05, 10.0, 40):
        assert symplectic_factor(Statistics.FERMION, rho) < 1.0


def test_factor_domain_errors():
    for bad in (-0.1, float("nan"), float("inf")):
        with pytest.raises(ValueError):
            symplectic_factor(Statistics.BOSON, bad)


def test_slope_is_derivative_of_radial_occupation():
    h = 1e-6
    for s in Statistics:
        for rho in (0.3, 0.8, 2.1):
            fd = (
                radial_occupation(s, rho + h) - radial_occupation(s, rho - h)
            ) / (2 * h)
            assert symplectic_factor(s, rho) == pytest.approx(fd, rel=1e-8)
            # occupation = rho * slope by definition of the radial potential
            assert radial_occupation(s, rho) == pytest.approx(
                rho * kahler_slope(s, rho), rel=1e-12
            )


def test_fermion_slope_diverges_at_coincidence():
    with pytest.raises(SingularConfigurationError):
        kahler_slope(Statistics.FERMION, 0.0)


# ---------------------------------------------------------------------------
# Coordinate transforms
# ---------------------------------------------------------------------------


def test_transform_examples():
    w = 0.4 + 1.1j
    st1 = cm_relative_transform(w, w)
    assert st1.Z == pytest.approx(math.sqrt(2) * w)
    assert st1.z == 0
    st2 = cm_relative_transform(w, -w)
    assert st2.Z == 0
    assert st2.z == pytest.approx(math.sqrt(2) * w)


@given(finite_complex, finite_complex)
def test_transform_round_trip(z1, z2):
    state = cm_relative_transform(z1, z2)
    back1, back2 = individual_from_cm_relative(state.Z, state.z)
    assert abs(back1 - z1) <= 1e-15 * max(1.0, abs(z1))
    assert abs(back2 - z2) <= 1e-15 * max(1.0, abs(z2))


# ---------------------------------------------------------------------------
# Permutation sums and the Kahler potential
# ---------------------------------------------------------------------------


def test_permutation_sum_single_particle():
    z = 1.2 - 0.4j
    for s in Statistics:
        assert permutation_sum(NBodyState((z,)), s) == pytest.approx(
            math.exp(abs(z) ** 2), rel=1e-12
        )


def test_permutation_sum_two_body_closed_forms():
    z = 0.9 + 0.2j
    rho_rel = 2.0 * abs(z) ** 2  # relative coordinate sqrt(2) z
    state = NBodyState((z, -z))
    assert permutation_sum(state, Statistics.BOSON) == pytest.approx(
        2.0 * math.cosh(rho_rel), rel=1e-12
    )
    assert permutation_sum(state, Statistics.FERMION) == pytest.approx(
        2.0 * math.sinh(rho_rel), rel=1e-12
    )


def test_fermion_coincidence_raises():
    with pytest.raises(CoincidenceError):
        permutation_sum(NBodyState((0.5 + 0.5j, 0.5 + 0.5j)), Statistics.FERMION)
    # near-coincidence below the underflow floor also raises
    eps = 1e-160
    with pytest.raises(CoincidenceError):
        permutation_sum(
            NBodyState((0.5 + 0.5j, 0.5 + 0.5j + eps)), Statistics.FERMION
        )


def test_coordinate_overflow_raises():
    big = math.sqrt(EXP_BOUND) + 1.0
    with pytest.raises(CoordinateOverflowError):
        permutation_sum(NBodyState((complex(big, 0.0),)), Statistics.BOSON)


def test_kahler_potential_closed_forms():
    Z = 0.7 - 1.3j
    for s in Statistics:
        assert kahler_potential(NBodyState((Z,)), s) == pytest.approx(
            abs(Z) ** 2, rel=1e-12
        )
    # differences of the potential are normalization-free
    z_a, z_b = 0.6 + 0.3j, 1.1 - 0.2j
    for s, closed in (
        (Statistics.BOSON, lambda r: math.log(math.cosh(r))),
        (Statistics.FERMION, lambda r: math.log(math.sinh(r))),
    ):
        got = kahler_potential(NBodyState((z_a, -z_a)), s) - kahler_potential(
            NBodyState((z_b, -z_b)), s
        )
        want = closed(2 * abs(z_a) ** 2) - closed(2 * abs(z_b) ** 2)
        assert got == pytest.approx(want, rel=1e-10)


# ---------------------------------------------------------------------------
# Symplectic matrix
# ---------------------------------------------------------------------------

CM_REL_ROTATION = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


def test_symplectic_matrix_single_particle_identity():
    for s in Statistics:
        mat = symplectic_matrix(NBodyState((0.3 + 0.8j,)), s)
        assert np.allclose(mat.f, np.eye(1), atol=1e-14)


def test_symplectic_matrix_distinguishable_identity():
    rng = np.random.default_rng(3)
    state = random_nbody(rng, 4)
    mat = symplectic_matrix(state, Statistics.DISTINGUISHABLE)
    assert np.allclose(mat.f, np.eye(4), atol=1e-14)


def test_two_body_block_reduction_matches_closed_forms():
    # rotating individual coordinates into (CM, relative) must produce
    # diag(1, f_closed(|z_rel|^2)) for both identical-particle types
    rng = np.random.default_rng(11)
    for _ in range(50):
        z1, z2 = (complex(a, b) for a, b in rng.uniform(-4, 4, (2, 2)))
        if abs(z1 - z2) < 1e-3:
            continue
        rel = cm_relative_transform(z1, z2)
        for s in (Statistics.BOSON, Statistics.FERMION):
            f_ind = symplectic_matrix(NBodyState((z1, z2)), s).f
            f_rot = CM_REL_ROTATION @ f_ind @ CM_REL_ROTATION
            expected = np.diag(
                [1.0, symplectic_factor(s, abs(rel.z) ** 2)]
            ).astype(complex)
            assert np.allclose(f_rot, expected, atol=1e-10)


def test_symplectic_matrix_hermitian_psd():
    rng = np.random.default_rng(5)
    for n in (2, 3, 4):
        for s in (Statistics.BOSON, Statistics.FERMION):
            state = random_nbody(rng, n)
            mat = symplectic_matrix(state, s)
            assert np.allclose(mat.f, mat.f.conj().T, atol=1e-12)
            assert mat.min_eigenvalue() >= -1e-12


def _hessian_by_finite_differences(state, s, step=1e-5):
    """Central finite differences of the Kahler potential in (x, y) parts."""
    zs = np.array(state.zs, dtype=complex)
    n = len(zs)

    def kp(vec):
        return kahler_potential(NBodyState(tuple(vec)), s)

    def second(i, comp_i, j, comp_j):
        unit_i = step if comp_i == 0 else 1j * step
        unit_j = step if comp_j == 0 else 1j * step
        vpp, vpm, vmp, vmm = (zs.copy() for _ in range(4))
        vpp[i] += unit_i
        vpp[j] += unit_j
        vpm[i] += unit_i
        vpm[j] -= unit_j
        vmp[i] -= unit_i
        vmp[j] += unit_j
        vmm[i] -= unit_i
        vmm[j] -= unit_j
        return (kp(vpp) - kp(vpm) - kp(vmp) + kp(vmm)) / (4 * step * step)

    hess = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            xx = second(i, 0, j, 0)
            yy = second(i, 1, j, 1)
            yx = second(i, 1, j, 0)
            xy = second(i, 0, j, 1)
            # d/dzbar_i d/dz_j = (1/4)[(dxx + dyy) + i(dyx - dxy)]
            hess[i, j] = 0.25 * ((xx + yy) + 1j * (yx - xy))
    return hess


def test_hessian_matches_finite_differences():
    # step choice: second differences of the log-space permutation sum carry
    # a rounding floor of eps_K / (4 h^2); at h = 1e-5 that floor exceeds
    # 1e-6 (measured up to 1e-4 for fermions, whose alternating sum
    # amplifies eps_K), so h = 1e-4 is used with a separation floor that
    # keeps the fermion truncation term small. Measured worst cases:
    # boson 2.8e-8, fermion 2.0e-7.
    rng = np.random.default_rng(23)
    checked = 0
    while checked < 100:
        state = random_nbody(rng, 3, scale=1.2)
        s = (Statistics.BOSON, Statistics.FERMION)[checked % 2]
        min_sep = min(
            abs(a - b)
            for k, a in enumerate(state.zs)
            for b in state.zs[k + 1 :]
        )
        if min_sep < (0.8 if s is Statistics.FERMION else 0.4):
            continue
        analytic = symplectic_matrix(state, s).f
        numeric = _hessian_by_finite_differences(state, s, step=1e-4)
        scale = np.abs(analytic).max()
        assert np.abs(analytic - numeric).max() <= 1e-6 * scale
        checked += 1


def test_nbody_wide_separation_identity():
    state = NBodyState((0.0 + 0.0j, 8.5 + 0.0j, 0.0 + 9.0j))
    for s in (Statistics.BOSON, Statistics.FERMION):
        mat = symplectic_matrix(state, s)
        assert np.allclose(mat.f, np.eye(3), atol=1e-10)


def test_singular_configuration_raises_on_near_coincidence():
    # bosons at the origin: relative block of f vanishes
    state = NBodyState((1e-9 + 0j, -1e-9 + 0j))
    with pytest.raises(SingularConfigurationError):
        mat = symplectic_matrix(state, Statistics.BOSON)
        if mat.min_eigenvalue() < F_MIN:
            raise SingularConfigurationError("relative mode below f_min")


# ---------------------------------------------------------------------------
# Potential expectation and gradient
# ---------------------------------------------------------------------------


def test_potential_expectation_zero_potential():
    rng = np.random.default_rng(1)
    pot = QuadraticPotential(0.0, 0.0)
    for s in Statistics:
        state = random_nbody(rng, 3)
        assert potential_expectation(state, s, pot) == 0.0


def test_potential_expectation_against_fock_oracle_two_body():
    rng = np.random.default_rng(19)
    pot = QuadraticPotential(1.0, 0.4)
    for _ in range(8):
        zs = tuple(complex(a, b) for a, b in rng.uniform(-1.4, 1.4, (2, 2)))
        for s in Statistics:
            for zero_point in (False, True):
                got = potential_expectation(
                    NBodyState(zs), s, pot, include_zero_point=zero_point
                )
                want = fock_nbody_potential(
                    zs, s, pot, cutoff=32, include_zero_point=zero_point
                )
                assert got == pytest.approx(want, abs=1e-8)


def test_potential_expectation_against_fock_oracle_three_body():
    rng = np.random.default_rng(29)
    pot = QuadraticPotential(0.8, -0.5)
    for _ in range(4):
        zs = tuple(complex(a, b) for a, b in rng.uniform(-1.1, 1.1, (3, 2)))
        for s in Statistics:
            got = potential_expectation(NBodyState(zs), s, pot)
            want = fock_nbody_potential(zs, s, pot, cutoff=24)
            assert got == pytest.approx(want, abs=1e-8)


def test_potential_gradient_matches_finite_differences():
    rng = np.random.default_rng(31)
    pot = QuadraticPotential(1.0, 0.4)
    step = 1e-6
    for _ in range(6):
        state = random_nbody(rng, 3, scale=1.2)
        for s in Statistics:
            grad = potential_gradient(state, s, pot)
            zs = np.array(state.zs)
            for i in range(3):
                for unit, part in ((step, "re"), (1j * step, "im")):
                    plus, minus = zs.copy(), zs.copy()
                    plus[i] += unit
                    minus[i] -= unit
                    fd = (
                        potential_expectation(NBodyState(tuple(plus)), s, pot)
                        - potential_expectation(NBodyState(tuple(minus)), s, pot)
                    ) / (2 * step)
                    # dV/dx_i = 2 Re grad_i, dV/dy_i = 2 Im grad_i for
                    # grad_i = dV/dzbar_i and real-valued V
                    want = 2 * grad[i].real if part == "re" else 2 * grad[i].imag
                    assert fd == pytest.approx(want, abs=2e-6 * max(1.0, abs(want)))


@settings(max_examples=40, deadline=None)
@given(
    st.tuples(finite_complex, finite_complex),
    st.sampled_from([Statistics.BOSON, Statistics.FERMION]),
)
def test_property_two_body_expectation_identity(zs, s):
    # <sum a_i^2> collapses to sum z_i^2 for every exchange-symmetric state,
    # so the potential expectation equals its CM + relative split exactly
    z1, z2 = zs
    if s is Statistics.FERMION and abs(z1 - z2) < 1e-2:
        return
    if abs(z1) > 3 or abs(z2) > 3:
        return
    pot = QuadraticPotential(0.9, 0.3)
    rel = cm_relative_transform(z1, z2)
    rho = abs(rel.z) ** 2
    occ_cm = abs(rel.Z) ** 2
    expected = 0.5 * pot.U * (occ_cm + radial_occupation(s, rho)) + 0.5 * (
        pot.V_coef
    ) * (rel.Z**2 + rel.z**2).real
    got = potential_expectation(NBodyState((z1, z2)), s, pot)
    assert got == pytest.approx(expected, abs=1e-10 * max(1.0, abs(expected)))
