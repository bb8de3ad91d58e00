"""Randomized flash schedules for the 40-button speller interface.

A schedule is a sequence of rounds; each round flashes every button exactly
once in random order.  Flash onsets advance by a fixed stimulus-onset
asynchrony (SOA), so flash k starts at exactly k * soa_ms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, ParameterError

DEFAULT_N_BUTTONS = 40
DEFAULT_SOA_MS = 120.0
DEFAULT_FLASH_DURATION_MS = 100.0


@dataclass(frozen=True)
class StimulusSchedule:
    """Flash plan for one selection: ``rounds`` permutations of all buttons."""

    n_buttons: int
    rounds: int
    flashes: tuple  # of (onset_ms, button_id)
    flash_duration_ms: float = DEFAULT_FLASH_DURATION_MS
    soa_ms: float = DEFAULT_SOA_MS
    seed: int = 0

    def onsets_ms(self) -> np.ndarray:
        return np.array([f[0] for f in self.flashes], dtype=float)

    def button_ids(self) -> np.ndarray:
        return np.array([f[1] for f in self.flashes], dtype=int)

    def round_of_flash(self, flash_index: int) -> int:
        return flash_index // self.n_buttons


def build_schedule(
    n_buttons: int = DEFAULT_N_BUTTONS,
    rounds: int = 1,
    soa_ms: float = DEFAULT_SOA_MS,
    seed: int = 0,
    flash_duration_ms: float = DEFAULT_FLASH_DURATION_MS,
    forbid_boundary_repeat: bool = True,
) -> StimulusSchedule:
    """Build a randomized flash schedule.

    Args:
        n_buttons: number of buttons on the interface (>= 2).
        rounds: number of rounds; each round is a fresh permutation.
        soa_ms: stimulus-onset asynchrony between consecutive flashes.
        seed: RNG seed; identical seeds yield identical schedules.
        flash_duration_ms: highlight duration of a single flash.
        forbid_boundary_repeat: when True (default), the first flash of a
            round never repeats the last flash of the previous round, so no
            button is highlighted at two consecutive onsets.

    Returns:
        A StimulusSchedule with rounds * n_buttons flashes.
    """
    if n_buttons < 2:
        raise ParameterError(f"n_buttons must be >= 2, got {n_buttons}")
    if rounds < 1:
        raise ParameterError(f"rounds must be >= 1, got {rounds}")
    if soa_ms <= 0:
        raise ParameterError(f"soa_ms must be positive, got {soa_ms}")
    if not 0 < flash_duration_ms <= soa_ms:
        raise ParameterError(
            f"flash_duration_ms must lie in (0, soa_ms], got {flash_duration_ms}"
        )

    rng = np.random.default_rng(seed)
    order = []
    last = -1
    for _ in range(rounds):
        perm = rng.permutation(n_buttons)
        while forbid_boundary_repeat and perm[0] == last:
            perm = rng.permutation(n_buttons)
        order.extend(int(b) for b in perm)
        last = order[-1]

    flashes = tuple((k * soa_ms, b) for k, b in enumerate(order))
    return StimulusSchedule(
        n_buttons=n_buttons,
        rounds=rounds,
        flashes=flashes,
        flash_duration_ms=flash_duration_ms,
        soa_ms=soa_ms,
        seed=seed,
    )


def target_flags(schedule: StimulusSchedule, target: int) -> list:
    """Return one boolean per flash, True where the target button flashed."""
    if not 0 <= target < schedule.n_buttons:
        raise ParameterError(
            f"target {target} out of range for {schedule.n_buttons} buttons"
        )
    return [b == target for _, b in schedule.flashes]


def save_schedule(schedule: StimulusSchedule, path) -> None:
    """Write a schedule as JSON."""
    doc = {
        "n_buttons": schedule.n_buttons,
        "soa_ms": schedule.soa_ms,
        "flash_duration_ms": schedule.flash_duration_ms,
        "seed": schedule.seed,
        "flashes": [
            {"onset_ms": onset, "button": button} for onset, button in schedule.flashes
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_schedule(path) -> StimulusSchedule:
    """Read a schedule written by save_schedule."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    try:
        n_buttons = int(doc["n_buttons"])
        flashes = tuple(
            (float(f["onset_ms"]), int(f["button"])) for f in doc["flashes"]
        )
        schedule = StimulusSchedule(
            n_buttons=n_buttons,
            rounds=len(flashes) // n_buttons,
            flashes=flashes,
            flash_duration_ms=float(doc["flash_duration_ms"]),
            soa_ms=float(doc["soa_ms"]),
            seed=int(doc["seed"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: missing or malformed field ({exc})") from exc
    if len(flashes) % n_buttons != 0:
        raise FormatError(
            f"{path}: flash count {len(flashes)} is not a multiple of "
            f"n_buttons {n_buttons}"
        )
    return schedule
