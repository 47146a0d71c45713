import math

import pytest
from scipy.optimize import bisect
from scipy.special import jv, jvp, kv, kvp

from dispersion.interface import (
    FUSED_SILICA,
    BracketError,
    FiberModel,
    SellmeierModel,
    SellmeierTerm,
    WavelengthDomainError,
)
from dispersion.sellmeier import material_index
from dispersion.strand import (
    dispersion_curve,
    dispersion_parameter,
    effective_index,
    find_zero_dispersion,
    group_velocity_dispersion,
    propagation_constant,
)


# ── material index ─────────────────────────────────────────────────


def test_fused_silica_d_line():
    assert material_index(FUSED_SILICA, 587.56) == pytest.approx(1.4585, abs=2e-4)


def test_fused_silica_telecom():
    assert material_index(FUSED_SILICA, 1550.0) == pytest.approx(1.4440, abs=2e-4)


def test_material_index_decreases_with_wavelength():
    indices = [material_index(FUSED_SILICA, lam) for lam in (500.0, 700.0, 900.0, 1100.0)]
    assert indices == sorted(indices, reverse=True)


def test_material_index_outside_range_raises():
    with pytest.raises(WavelengthDomainError, match="outside Sellmeier range"):
        material_index(FUSED_SILICA, 100.0)


def test_sellmeier_rejects_resonance_inside_range():
    with pytest.raises(ValueError, match="inside the valid range"):
        SellmeierModel(terms=(SellmeierTerm(1.0, 0.5),), valid_range_um=(0.3, 1.0))


# ── strand mode ────────────────────────────────────────────────────


def test_effective_index_between_air_and_silica():
    fiber = FiberModel()
    for lam in (587.0, 708.4, 893.0):
        n_eff = effective_index(fiber, lam)
        assert 1.0 < n_eff < material_index(FUSED_SILICA, lam)


def test_thick_strand_approaches_bulk_index():
    fiber = FiberModel(core_diameter_um=50.0)
    assert effective_index(fiber, 800.0) == pytest.approx(material_index(FUSED_SILICA, 800.0), abs=1e-3)


def test_thin_strand_has_lower_index_than_thick():
    assert effective_index(FiberModel(core_diameter_um=1.0), 800.0) < effective_index(
        FiberModel(core_diameter_um=2.0), 800.0
    )


def test_propagation_constant_matches_effective_index():
    fiber = FiberModel()
    n_eff = effective_index(fiber, 708.4)
    assert propagation_constant(fiber, 708.4) == pytest.approx(2 * 3.141592653589793 * n_eff / 708.4e-9)


def _bisected_effective_index(diameter_um: float, wavelength_nm: float) -> float:
    """HE11 index from the product form of the vector eigenvalue equation, by plain bisection."""
    lam_um = wavelength_nm * 1e-3
    n1 = math.sqrt(
        1
        + 0.6961663 * lam_um**2 / (lam_um**2 - 0.0684043**2)
        + 0.4079426 * lam_um**2 / (lam_um**2 - 0.1162414**2)
        + 0.8974794 * lam_um**2 / (lam_um**2 - 9.896161**2)
    )
    ak = 0.5 * diameter_um * 2 * math.pi / lam_um
    v = ak * math.sqrt(n1**2 - 1)
    ratio = 1 / n1**2

    def residual(u: float) -> float:
        w = math.sqrt(v**2 - u**2)
        j = jvp(1, u) / (u * jv(1, u))
        k = kvp(1, w) / (w * kv(1, w))
        lhs = (j + k) * (j + ratio * k)
        rhs = (1 / u**2 + 1 / w**2) * (1 / u**2 + ratio / w**2)
        return lhs - rhs

    u = bisect(residual, 0.5, 2.4, xtol=1e-13)
    return math.sqrt(n1**2 - (u / ak) ** 2)


def test_effective_index_matches_bisected_eigenvalue_equation():
    expected = _bisected_effective_index(FiberModel().core_diameter_um, 715.0)
    assert effective_index(FiberModel(), 715.0) == pytest.approx(expected, rel=1e-9)


def test_invalid_fiber_diameter():
    with pytest.raises(ValueError, match="core_diameter_um"):
        FiberModel(core_diameter_um=0.0)


# ── group-velocity dispersion ──────────────────────────────────────


def test_thick_strand_gvd_matches_bulk_silica_at_800nm():
    # bulk fused silica: about 36 fs²/mm
    beta2 = group_velocity_dispersion(FiberModel(core_diameter_um=50.0), 800.0)
    assert beta2 == pytest.approx(3.6e-26, rel=0.1)


def test_default_strand_normal_below_and_anomalous_above_zero():
    fiber = FiberModel()
    assert group_velocity_dispersion(fiber, 680.0) > 0
    assert group_velocity_dispersion(fiber, 760.0) < 0


def test_richardson_steps_converge():
    fiber = FiberModel()
    coarse = group_velocity_dispersion(fiber, 708.4, step_nm=10.0, richardson=False)
    mid = group_velocity_dispersion(fiber, 708.4, step_nm=5.0, richardson=False)
    fine = group_velocity_dispersion(fiber, 708.4, step_nm=2.5, richardson=False)
    assert abs(fine - mid) < abs(mid - coarse)


def test_gvd_near_range_edge_raises():
    with pytest.raises(WavelengthDomainError, match="range edge"):
        group_velocity_dispersion(FiberModel(), 210.1)


def test_gvd_rejects_nonpositive_step():
    with pytest.raises(ValueError, match="step_nm"):
        group_velocity_dispersion(FiberModel(), 708.4, step_nm=0.0)


def test_dispersion_parameter_sign_and_scale():
    # β₂ = 1 ps²/km at 1550 nm is about −0.78 ps/(nm·km)
    assert dispersion_parameter(1e-27, 1550.0) == pytest.approx(-0.784, rel=1e-2)
    assert dispersion_parameter(-1e-27, 1550.0) > 0


# ── zero dispersion ────────────────────────────────────────────────


def test_zero_dispersion_of_default_strand():
    zero = find_zero_dispersion(FiberModel(), (650.0, 800.0))
    assert zero == pytest.approx(715.0, abs=5.0)


def test_zero_dispersion_moves_with_diameter():
    thin = find_zero_dispersion(FiberModel(core_diameter_um=1.9), (650.0, 800.0))
    thick = find_zero_dispersion(FiberModel(core_diameter_um=2.1), (650.0, 800.0))
    assert thin < thick


def test_zero_dispersion_without_sign_change():
    with pytest.raises(BracketError, match="No sign change"):
        find_zero_dispersion(FiberModel(), (600.0, 650.0))


def test_zero_dispersion_inverted_bracket():
    with pytest.raises(BracketError, match="increasing"):
        find_zero_dispersion(FiberModel(), (800.0, 650.0))


# ── dispersion_curve() ─────────────────────────────────────────────


def test_dispersion_curve_samples_and_zero():
    curve = dispersion_curve(FiberModel(), (650.0, 800.0), 7)
    assert [s.wavelength_nm for s in curve.samples] == pytest.approx([650, 675, 700, 725, 750, 775, 800])
    assert curve.zero_dispersion_wavelength_nm == pytest.approx(715.0, abs=5.0)


def test_dispersion_curve_without_crossing():
    curve = dispersion_curve(FiberModel(), (600.0, 650.0), 3)
    assert curve.zero_dispersion_wavelength_nm is None
    assert all(s.beta2 > 0 for s in curve.samples)


def test_dispersion_curve_inverted_range():
    with pytest.raises(BracketError):
        dispersion_curve(FiberModel(), (800.0, 650.0), 5)


def test_dispersion_curve_needs_two_points():
    with pytest.raises(ValueError, match="n_points"):
        dispersion_curve(FiberModel(), (650.0, 800.0), 1)


def test_dispersion_curve_is_deterministic():
    first = dispersion_curve(FiberModel(), (700.0, 720.0), 3)
    second = dispersion_curve(FiberModel(), (700.0, 720.0), 3)
    assert first == second
