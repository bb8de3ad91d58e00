"""Button-to-character map of the 40-button text interface.

The real GUI assignment is not public, so the layout is a plain string of
unique characters: button i types chars[i].  The default covers letters,
digits, space, and basic punctuation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import FormatError, ParameterError

DEFAULT_LAYOUT_CHARS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,?"


@dataclass(frozen=True)
class ButtonLayout:
    chars: str = DEFAULT_LAYOUT_CHARS

    def __post_init__(self):
        if len(self.chars) < 2:
            raise ParameterError("layout needs at least 2 characters")
        if len(set(self.chars)) != len(self.chars):
            raise ParameterError("layout characters must be unique")

    @property
    def n_buttons(self) -> int:
        return len(self.chars)

    def button_of(self, char: str) -> int:
        index = self.chars.find(char)
        if index < 0:
            raise ParameterError(f"character {char!r} is not on the layout")
        return index

    def char_of(self, button: int) -> str:
        if not 0 <= button < self.n_buttons:
            raise ParameterError(
                f"button {button} out of range for {self.n_buttons} buttons"
            )
        return self.chars[button]

    def supports(self, text: str) -> bool:
        return all(c in self.chars for c in text)


def save_layout(layout: ButtonLayout, path) -> None:
    with open(path, "w") as fh:
        json.dump({"chars": layout.chars}, fh)
        fh.write("\n")


def load_layout(path) -> ButtonLayout:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or "chars" not in doc:
        raise FormatError(f"{path}: expected an object with a 'chars' field")
    try:
        return ButtonLayout(chars=str(doc["chars"]))
    except ParameterError as exc:
        raise FormatError(f"{path}: {exc}") from exc
