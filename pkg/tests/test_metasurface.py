import numpy as np
import pytest

from mindlink.errors import FormatError, ParameterError
from mindlink.metasurface import (
    CodingPattern,
    broadside_null_depth_db,
    far_field,
    far_field_at,
    farfield_to_csv,
    gradient_pattern,
    load_pattern,
    main_lobe,
    oam_pattern,
    pattern_from_text,
    pattern_to_text,
    peak_reduction_db,
    phase_winding_turns,
    rcs_pattern,
    save_farfield_csv,
    save_pattern,
    uniform_pattern,
)


def _loop_array_factor(pattern, theta_deg, phi_deg):
    """Literal double sum over elements; the oracle for the fast path."""
    th = np.deg2rad(theta_deg)
    ph = np.deg2rad(phi_deg)
    u = np.sin(th) * np.cos(ph)
    v = np.sin(th) * np.sin(ph)
    n = pattern.n
    center = (n - 1) / 2.0
    k_d = 2.0 * np.pi * pattern.spacing_wavelengths
    total = 0.0 + 0.0j
    for m in range(n):
        for c in range(n):
            phase = pattern.states[m, c] * np.pi / 2.0
            total += np.exp(1j * (phase + k_d * ((m - center) * u + (c - center) * v)))
    return total


def test_array_factor_matches_direct_sum():
    rng = np.random.default_rng(1)
    pattern = CodingPattern(states=rng.integers(0, 4, (4, 4)))
    for theta, phi in [(0, 0), (17, 42), (30, 0), (55, 200), (90, 359)]:
        fast = far_field_at(pattern, theta, phi)
        slow = _loop_array_factor(pattern, theta, phi)
        assert fast == pytest.approx(slow, abs=1e-9)


def test_uniform_pattern_beams_broadside():
    pattern = uniform_pattern(10, 0)
    assert pattern.states.shape == (10, 10)
    assert np.all(pattern.states == 0)
    assert abs(far_field_at(pattern, 0.0, 0.0)) == pytest.approx(100.0)
    ff = far_field(pattern, theta_step_deg=1.0, phi_step_deg=5.0)
    theta, _, mag = main_lobe(ff)
    assert theta == 0.0
    assert mag == pytest.approx(100.0)


def test_uniform_state_only_shifts_global_phase():
    a = far_field_at(uniform_pattern(8, 0), 20.0, 45.0)
    b = far_field_at(uniform_pattern(8, 2), 20.0, 45.0)
    assert abs(a) == pytest.approx(abs(b), abs=1e-9)
    assert abs(np.angle(b / a)) == pytest.approx(np.pi, abs=1e-9)


def test_gradient_pattern_repeats_with_period_4_at_30_degrees():
    pattern = gradient_pattern(8, 30.0)
    column = pattern.states[:, 0]
    assert np.array_equal(column, np.tile(column[:4], 2))
    assert len(set(column[:4].tolist())) == 4  # all four states appear
    # rows are constant for an x-axis ramp
    assert np.all(pattern.states == column[:, None])


def test_gradient_beam_lands_on_target():
    for target, tol in [(14.5, 2.0), (30.0, 0.51), (45.0, 2.0)]:
        pattern = gradient_pattern(20, target if target != 14.5 else 15.0)
        ff = far_field(pattern, theta_step_deg=0.5, phi_step_deg=2.0)
        theta, phi, _ = main_lobe(ff)
        want = target if target != 14.5 else 15.0
        assert abs(theta - want) <= tol
        assert phi in (0.0, 180.0)


def test_gradient_y_axis_steers_in_phi_90():
    pattern = gradient_pattern(20, 30.0, axis="y")
    ff = far_field(pattern, theta_step_deg=0.5, phi_step_deg=2.0)
    theta, phi, _ = main_lobe(ff)
    assert theta == pytest.approx(30.0, abs=0.5)
    assert phi in (90.0, 270.0)


def test_gradient_validation():
    with pytest.raises(ParameterError):
        gradient_pattern(20, 0.0)
    with pytest.raises(ParameterError):
        gradient_pattern(20, 75.0)
    with pytest.raises(ParameterError):
        gradient_pattern(20, 30.0, axis="z")


def test_oam_pattern_carries_a_central_null():
    for mode in (1, 2):
        ff = far_field(oam_pattern(20, mode), theta_step_deg=0.5, phi_step_deg=2.0)
        assert broadside_null_depth_db(ff) >= 20.0


def test_oam_phase_winds_by_the_mode_number():
    for mode in (1, 2, -1):
        ff = far_field(oam_pattern(20, mode), theta_step_deg=0.5, phi_step_deg=2.0)
        assert phase_winding_turns(ff) == pytest.approx(mode, abs=0.05 * abs(mode))


def test_oam_validation():
    with pytest.raises(ParameterError):
        oam_pattern(20, 0)
    with pytest.raises(ParameterError):
        oam_pattern(20, 6)  # needs |mode| <= n/4


def test_rcs_levels_fill_the_right_fraction_of_supercells():
    expected_random_blocks = {1: 100, 2: 75, 3: 50, 4: 25}
    for level, count in expected_random_blocks.items():
        pattern = rcs_pattern(20, level, seed=0)
        blocks = pattern.states.reshape(10, 2, 10, 2).transpose(0, 2, 1, 3)
        # every 2x2 supercell is uniform
        assert np.all(blocks.min(axis=(2, 3)) == blocks.max(axis=(2, 3)))
        nonzero = int(np.count_nonzero(blocks[:, :, 0, 0]))
        assert nonzero <= count  # random states may draw 0 as well
        if level == 1:
            assert nonzero > 60  # ~3/4 of 100 blocks leave state 0


def test_rcs_reduction_orders_by_level():
    reference = uniform_pattern(20, 0)
    reductions = [
        peak_reduction_db(rcs_pattern(20, level, seed=0), reference,
                          theta_step_deg=1.0, phi_step_deg=4.0)
        for level in (1, 2, 3, 4)
    ]
    assert all(a > b for a, b in zip(reductions, reductions[1:]))
    assert reductions[0] >= 10.0


def test_rcs_validation():
    with pytest.raises(ParameterError):
        rcs_pattern(20, 5)
    with pytest.raises(ParameterError):
        rcs_pattern(9, 1)  # odd n has no 2x2 supercells


def test_pattern_validation():
    with pytest.raises(ParameterError):
        CodingPattern(states=np.zeros((2, 3), dtype=int))
    with pytest.raises(ParameterError):
        CodingPattern(states=np.full((2, 2), 4))
    with pytest.raises(ParameterError):
        CodingPattern(states=np.zeros((2, 2), dtype=int), spacing_wavelengths=0.0)


def test_far_field_grid_axes():
    ff = far_field(uniform_pattern(4, 0), theta_step_deg=5.0, phi_step_deg=5.0)
    assert ff.theta_deg[0] == 0.0
    assert ff.theta_deg[-1] == 90.0
    assert ff.phi_deg[0] == 0.0
    assert ff.phi_deg[-1] == 355.0  # phi end is exclusive
    assert ff.amplitudes.shape == (19, 72)
    assert ff.peak == pytest.approx(np.abs(ff.amplitudes).max())
    with pytest.raises(ParameterError):
        far_field(uniform_pattern(4, 0), theta_step_deg=0.0)
    with pytest.raises(ParameterError):
        far_field(uniform_pattern(4, 0), theta_step_deg=9.0)


def test_pattern_text_round_trip(tmp_path):
    pattern = rcs_pattern(6, 2, seed=3)
    text = pattern_to_text(pattern)
    assert len(text.splitlines()) == 6
    assert set(text.replace("\n", "")) <= set("0123")
    back = pattern_from_text(text)
    assert np.array_equal(back.states, pattern.states)

    path = tmp_path / "pattern.txt"
    save_pattern(pattern, path)
    loaded = load_pattern(path, spacing_wavelengths=pattern.spacing_wavelengths)
    assert np.array_equal(loaded.states, pattern.states)
    assert loaded.spacing_wavelengths == pattern.spacing_wavelengths


def test_pattern_text_rejects_bad_input():
    with pytest.raises(FormatError):
        pattern_from_text("012\n45\n")  # bad digit and ragged rows
    with pytest.raises(FormatError):
        pattern_from_text("01\n012\n")
    with pytest.raises(FormatError):
        pattern_from_text("")


def test_farfield_csv_export(tmp_path):
    ff = far_field(uniform_pattern(4, 0), theta_step_deg=5.0, phi_step_deg=5.0)
    text = farfield_to_csv(ff)
    lines = text.splitlines()
    assert lines[0] == "theta_deg,phi_deg,magnitude,phase_rad"
    assert len(lines) == 1 + 19 * 72
    first = lines[1].split(",")
    assert float(first[2]) == pytest.approx(16.0)  # broadside |AF| = n^2

    db_text = farfield_to_csv(ff, db=True)
    assert db_text.splitlines()[0] == "theta_deg,phi_deg,magnitude_db,phase_rad"
    assert float(db_text.splitlines()[1].split(",")[2]) == pytest.approx(0.0)

    path = tmp_path / "ff.csv"
    save_farfield_csv(ff, path)
    assert path.read_text() == text
