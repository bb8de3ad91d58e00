"""2-bit coding-pattern synthesis and far-field verification.

Patterns are N x N matrices of states {0,1,2,3}; state k reflects with
phase k*90 degrees.  The scattered field is the plain array factor

    AF(theta, phi) = sum_{m,n} exp(j*(phi_mn
        + 2*pi*(d/lambda)*(m*sin(theta)*cos(phi) + n*sin(theta)*sin(phi))))

with (m, n) centered on the array, so all geometry is wavelength-
normalized.  Axis convention: the first index m runs along x and pairs
with sin(theta)*cos(phi); the second index n runs along y and pairs with
sin(theta)*sin(phi).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ComputationError, FormatError, ParameterError

DEFAULT_N = 20
DEFAULT_SPACING = 0.5  # element spacing in wavelengths
STATE_PHASE_RAD = np.pi / 2.0  # 2-bit: 90 degrees per state
DEFAULT_THETA_STEP_DEG = 0.5
DEFAULT_PHI_STEP_DEG = 2.0

# Fraction of 2x2 supercells randomized for each scattering-control level;
# level 1 scrambles everything and gives the deepest reduction.
RCS_FRACTIONS = {1: 1.0, 2: 0.75, 3: 0.5, 4: 0.25}


@dataclass
class CodingPattern:
    """Immutable N x N arrangement of 2-bit phase states."""

    states: np.ndarray
    spacing_wavelengths: float = DEFAULT_SPACING
    name: str = ""

    def __post_init__(self):
        states = np.asarray(self.states)
        if states.ndim != 2 or states.shape[0] != states.shape[1]:
            raise ParameterError(f"states must be square, got shape {states.shape}")
        if not np.issubdtype(states.dtype, np.integer):
            if not np.allclose(states, np.round(states)):
                raise ParameterError("states must be integers")
            states = np.round(states).astype(int)
        if states.min() < 0 or states.max() > 3:
            raise ParameterError("states must lie in {0, 1, 2, 3}")
        if self.spacing_wavelengths <= 0:
            raise ParameterError(
                f"spacing_wavelengths must be positive, got {self.spacing_wavelengths}"
            )
        self.states = states.astype(int)

    @property
    def n(self) -> int:
        return self.states.shape[0]

    def phases(self) -> np.ndarray:
        return self.states * STATE_PHASE_RAD


@dataclass
class FarField:
    """Complex field samples on a (theta, phi) grid."""

    theta_deg: np.ndarray
    phi_deg: np.ndarray
    amplitudes: np.ndarray  # complex, shape (len(theta), len(phi))
    peak: float = field(init=False)

    def __post_init__(self):
        self.theta_deg = np.asarray(self.theta_deg, dtype=float)
        self.phi_deg = np.asarray(self.phi_deg, dtype=float)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.theta_deg.size, self.phi_deg.size):
            raise ParameterError("amplitude grid does not match the angle axes")
        if not np.all(np.isfinite(self.amplitudes)):
            raise ComputationError("far field contains non-finite values")
        self.peak = float(np.abs(self.amplitudes).max())


def uniform_pattern(n: int = DEFAULT_N, state: int = 0,
                    spacing_wavelengths: float = DEFAULT_SPACING) -> CodingPattern:
    """All elements in the same state; reflects a single broadside beam."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if state not in (0, 1, 2, 3):
        raise ParameterError(f"state must be in 0..3, got {state}")
    return CodingPattern(
        states=np.full((n, n), state, dtype=int),
        spacing_wavelengths=spacing_wavelengths,
        name=f"uniform-{state}",
    )


def gradient_pattern(n: int = DEFAULT_N, target_theta_deg: float = 30.0,
                     axis: str = "x",
                     spacing_wavelengths: float = DEFAULT_SPACING) -> CodingPattern:
    """Linear phase ramp steering the beam to target_theta_deg.

    The ideal per-element phase -2*pi*(d/lambda)*m*sin(theta) is quantized
    to the nearest 2-bit state.  The ramp runs over integer element indices
    m = 0..n-1; for 30 degrees at half-wavelength spacing the quantization
    is exact with supercell period 4.
    """
    if not 0 < target_theta_deg <= 60:
        raise ParameterError(
            f"target_theta_deg must lie in (0, 60], got {target_theta_deg}"
        )
    if axis not in ("x", "y"):
        raise ParameterError(f"axis must be 'x' or 'y', got {axis!r}")
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    sin_t = np.sin(np.deg2rad(target_theta_deg))
    period = 1.0 / (spacing_wavelengths * sin_t)  # ideal period in elements
    if period < 1.0:
        raise ParameterError(
            f"angle {target_theta_deg} deg unreachable at spacing "
            f"{spacing_wavelengths} (supercell period {period:.2f} < 1 element)"
        )
    m = np.arange(n)
    ideal = -2.0 * np.pi * spacing_wavelengths * m * sin_t
    ramp = np.round(ideal / STATE_PHASE_RAD).astype(int) % 4
    if axis == "x":
        states = np.repeat(ramp[:, None], n, axis=1)
    else:
        states = np.repeat(ramp[None, :], n, axis=0)
    return CodingPattern(
        states=states,
        spacing_wavelengths=spacing_wavelengths,
        name=f"gradient-{target_theta_deg:g}deg-{axis}",
    )


def oam_pattern(n: int = DEFAULT_N, mode: int = 1,
                spacing_wavelengths: float = DEFAULT_SPACING) -> CodingPattern:
    """Spiral phase plate for an orbital-angular-momentum beam of order l.

    Each element at centered position (x, y) gets the ideal phase
    l*atan2(y, x) quantized to 2 bits; the far field carries a broadside
    null and winds by 2*pi*l around it.
    """
    if mode == 0:
        raise ParameterError("mode 0 is degenerate; use uniform_pattern")
    if abs(mode) > n / 4:
        raise ParameterError(
            f"|mode| = {abs(mode)} too large for n = {n} (need |mode| <= n/4)"
        )
    center = (n - 1) / 2.0
    coord = np.arange(n) - center
    x = coord[:, None] * np.ones(n)[None, :]  # along the first (m) axis
    y = np.ones(n)[:, None] * coord[None, :]  # along the second (n) axis
    phase = mode * np.arctan2(y, x)
    states = np.round(phase / STATE_PHASE_RAD).astype(int) % 4
    return CodingPattern(
        states=states,
        spacing_wavelengths=spacing_wavelengths,
        name=f"oam-{mode:+d}",
    )


def rcs_pattern(n: int = DEFAULT_N, level_index: int = 1, seed: int = 0,
                spacing_wavelengths: float = DEFAULT_SPACING) -> CodingPattern:
    """Randomized-supercell pattern for stepped scattering reduction.

    A fraction of the 2x2 supercells (1.0 / 0.75 / 0.5 / 0.25 for levels
    1..4) is assigned independent random states; the rest stay at state 0.
    The realized peak reduction depends on the draw, so the seed is part of
    the pattern's identity.
    """
    if level_index not in RCS_FRACTIONS:
        raise ParameterError(f"level_index must be 1..4, got {level_index}")
    if n < 2 or n % 2 != 0:
        raise ParameterError(f"n must be even and >= 2 for 2x2 supercells, got {n}")
    fraction = RCS_FRACTIONS[level_index]
    rng = np.random.default_rng(seed)
    n_blocks = n // 2
    total = n_blocks * n_blocks
    k = int(round(fraction * total))
    chosen = rng.choice(total, size=k, replace=False)
    values = rng.integers(0, 4, size=k)
    states = np.zeros((n, n), dtype=int)
    for block, state in zip(chosen, values):
        r, c = divmod(int(block), n_blocks)
        states[2 * r : 2 * r + 2, 2 * c : 2 * c + 2] = int(state)
    return CodingPattern(
        states=states,
        spacing_wavelengths=spacing_wavelengths,
        name=f"rcs-level{level_index}-seed{seed}",
    )


def _array_factor(pattern: CodingPattern, theta_rad: np.ndarray,
                  phi_rad: np.ndarray) -> np.ndarray:
    """AF on the (theta, phi) meshgrid, centered element coordinates."""
    th, ph = np.meshgrid(theta_rad, phi_rad, indexing="ij")
    u = np.sin(th) * np.cos(ph)
    v = np.sin(th) * np.sin(ph)
    idx = np.arange(pattern.n) - (pattern.n - 1) / 2.0
    element = np.exp(1j * pattern.phases())
    k_d = 2.0 * np.pi * pattern.spacing_wavelengths
    # separable steering vectors keep the grid evaluation at O(grid * n)
    sm = np.exp(1j * k_d * u[..., None] * idx)
    sn = np.exp(1j * k_d * v[..., None] * idx)
    return np.einsum("tpm,mn,tpn->tp", sm, element, sn)


def far_field(pattern: CodingPattern,
              theta_step_deg: float = DEFAULT_THETA_STEP_DEG,
              phi_step_deg: float = DEFAULT_PHI_STEP_DEG) -> FarField:
    """Sample the array factor over theta in [0, 90], phi in [0, 360)."""
    for step in (theta_step_deg, phi_step_deg):
        if not 0 < step <= 5.0:
            raise ParameterError(f"grid steps must lie in (0, 5] deg, got {step}")
    theta = np.arange(0.0, 90.0 + 1e-9, theta_step_deg)
    phi = np.arange(0.0, 360.0, phi_step_deg)
    amplitudes = _array_factor(pattern, np.deg2rad(theta), np.deg2rad(phi))
    return FarField(theta_deg=theta, phi_deg=phi, amplitudes=amplitudes)


def far_field_at(pattern: CodingPattern, theta_deg: float, phi_deg: float) -> complex:
    """Array factor at a single direction."""
    af = _array_factor(
        pattern,
        np.atleast_1d(np.deg2rad(theta_deg)),
        np.atleast_1d(np.deg2rad(phi_deg)),
    )
    return complex(af[0, 0])


def main_lobe(farfield: FarField) -> tuple:
    """(theta_deg, phi_deg, magnitude) of the strongest grid sample.

    Ties break toward smaller theta, then smaller phi (argmax scans the
    ascending grid in that order).
    """
    if farfield.amplitudes.size == 0:
        raise ParameterError("empty far-field grid")
    mag = np.abs(farfield.amplitudes)
    it, ip = np.unravel_index(int(np.argmax(mag)), mag.shape)
    return float(farfield.theta_deg[it]), float(farfield.phi_deg[ip]), float(mag[it, ip])


def peak_reduction_db(pattern: CodingPattern, reference: CodingPattern,
                      theta_step_deg: float = DEFAULT_THETA_STEP_DEG,
                      phi_step_deg: float = DEFAULT_PHI_STEP_DEG) -> float:
    """20*log10(peak |AF_reference| / peak |AF_pattern|) on the same grid."""
    if pattern.n != reference.n or (
        pattern.spacing_wavelengths != reference.spacing_wavelengths
    ):
        raise ParameterError("pattern and reference must share the same geometry")
    peak_ref = far_field(reference, theta_step_deg, phi_step_deg).peak
    peak_pat = far_field(pattern, theta_step_deg, phi_step_deg).peak
    if peak_ref == 0:
        raise ComputationError("reference pattern has zero peak field")
    if peak_pat == 0:
        return float("inf")
    return float(20.0 * np.log10(peak_ref / peak_pat))


def broadside_null_depth_db(farfield: FarField) -> float:
    """Ring peak over broadside magnitude, in dB (inf for an exact null)."""
    mag = np.abs(farfield.amplitudes)
    broadside = float(mag[np.argmin(farfield.theta_deg), 0])
    ring_peak = float(mag.max())
    if broadside == 0:
        return float("inf")
    return float(20.0 * np.log10(ring_peak / broadside))


def phase_winding_turns(farfield: FarField, circle_theta_deg: float = 5.0) -> float:
    """Net far-field phase circulation around broadside, in turns.

    Accumulates the wrapped phase increments along the phi grid at the theta
    ring closest to circle_theta_deg, including the closing segment; an
    order-l vortex yields l turns.
    """
    row = int(np.argmin(np.abs(farfield.theta_deg - circle_theta_deg)))
    ring = farfield.amplitudes[row, :]
    if np.any(np.abs(ring) == 0):
        raise ComputationError("phase undefined: zero amplitude on the circle")
    steps = np.angle(np.roll(ring, -1) / ring)
    return float(steps.sum() / (2.0 * np.pi))


def save_pattern(pattern: CodingPattern, path) -> None:
    """Plain text, one row per line, characters '0'-'3'."""
    with open(path, "w") as fh:
        fh.write(pattern_to_text(pattern))


def pattern_from_text(text: str, spacing_wavelengths: float = DEFAULT_SPACING,
                      name: str = "") -> CodingPattern:
    """Parse the save_pattern text form (one row per line, chars '0'-'3')."""
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise FormatError("empty pattern text")
    rows = []
    for lineno, line in enumerate(lines, start=1):
        if any(c not in "0123" for c in line):
            raise FormatError(f"line {lineno}: characters must be 0-3")
        rows.append([int(c) for c in line])
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise FormatError(f"ragged rows (widths {sorted(widths)})")
    states = np.array(rows, dtype=int)
    if states.shape[0] != states.shape[1]:
        raise FormatError(
            f"pattern must be square, got {states.shape[0]}x{states.shape[1]}"
        )
    return CodingPattern(
        states=states, spacing_wavelengths=spacing_wavelengths, name=name
    )


def pattern_to_text(pattern: CodingPattern) -> str:
    return "\n".join(
        "".join(str(int(s)) for s in row) for row in pattern.states
    ) + "\n"


def load_pattern(path, spacing_wavelengths: float = DEFAULT_SPACING,
                 name: str = "") -> CodingPattern:
    """Read a pattern written by save_pattern."""
    with open(path) as fh:
        text = fh.read()
    try:
        return pattern_from_text(text, spacing_wavelengths, name or str(path))
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def farfield_to_csv(farfield: FarField, db: bool = False) -> str:
    """CSV export: theta_deg,phi_deg,magnitude,phase_rad.

    With db=True the magnitude column becomes magnitude_db, normalized to
    the grid peak.
    """
    mag = np.abs(farfield.amplitudes)
    phase = np.angle(farfield.amplitudes)
    lines = []
    if db:
        lines.append("theta_deg,phi_deg,magnitude_db,phase_rad")
        peak = farfield.peak if farfield.peak > 0 else 1.0
        with np.errstate(divide="ignore"):
            mag_db = 20.0 * np.log10(mag / peak)
    else:
        lines.append("theta_deg,phi_deg,magnitude,phase_rad")
    values = (mag_db if db else mag).tolist()
    phases = phase.tolist()
    phis = farfield.phi_deg.tolist()
    for t, vrow, prow in zip(farfield.theta_deg.tolist(), values, phases):
        for p, v, ph in zip(phis, vrow, prow):
            lines.append(f"{t:g},{p:g},{v!r},{ph!r}")
    return "\n".join(lines) + "\n"


def save_farfield_csv(farfield: FarField, path, db: bool = False) -> None:
    with open(path, "w") as fh:
        fh.write(farfield_to_csv(farfield, db=db))
