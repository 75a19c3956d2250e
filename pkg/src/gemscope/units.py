"""Parsing of unit-suffixed quantity strings.

Every dimensioned entry in a configuration file must be written as a
string combining a number and an explicit unit, e.g. ``"9 mm"``,
``"5.64 us"`` or ``"2pi*1.35 MHz/cm"``.  Bare numbers are rejected for
dimensioned fields so that a value can never be mis-read by a factor of
2*pi or a metric prefix.

The optional ``2pi*`` prefix multiplies the numeric value by 2*pi and
marks the quantity as angular.  Fields that are angular frequencies (or
angular wavevectors) require either that prefix or an explicit ``rad``
in the unit; fields that are ordinary frequencies reject it.  This makes
the rad/s versus Hz convention visible at every use site.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import UnitParseError

# Atomic units: name -> (scale to SI, dimension tag).  Dimension tags:
# L length, T time, F frequency (= 1/T), A plane angle, PX pixel count.
_ATOMS = {
    "m": (1.0, "L"),
    "cm": (1e-2, "L"),
    "mm": (1e-3, "L"),
    "um": (1e-6, "L"),
    "nm": (1e-9, "L"),
    "s": (1.0, "T"),
    "ms": (1e-3, "T"),
    "us": (1e-6, "T"),
    "ns": (1e-9, "T"),
    "Hz": (1.0, "F"),
    "kHz": (1e3, "F"),
    "MHz": (1e6, "F"),
    "GHz": (1e9, "F"),
    "THz": (1e12, "F"),
    "rad": (1.0, "A"),
    "mrad": (1e-3, "A"),
    "px": (1.0, "PX"),
    "1": (1.0, None),
}

_QUANTITY_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(\S.*?)\s*$")


@dataclass(frozen=True)
class Quantity:
    """A parsed quantity in SI units.

    ``dimension`` is a canonical signature string such as ``"1/T"`` for a
    rate or ``"L"`` for a length.  ``angular`` records whether the source
    carried a ``2pi*`` prefix or an explicit ``rad``.
    """

    value: float
    dimension: str
    angular: bool
    source: str


def _dimension_signature(num: list[str], den: list[str]) -> str:
    # Frequencies count as inverse time so "MHz/cm" and "rad/s/m" compare equal.
    powers: dict[str, int] = {}

    def add(tag: str | None, sign: int) -> None:
        if tag is None or tag == "A":
            return
        if tag == "F":
            powers["T"] = powers.get("T", 0) - sign
        else:
            powers[tag] = powers.get(tag, 0) + sign

    for tag in num:
        add(tag, +1)
    for tag in den:
        add(tag, -1)
    pos = "*".join(sorted(k * abs(v) for k, v in powers.items() if v > 0)) or "1"
    neg = "*".join(sorted(k * abs(v) for k, v in powers.items() if v < 0))
    return f"{pos}/{neg}" if neg else pos


def parse_quantity(raw: object, field: str = "") -> Quantity:
    """Parse ``raw`` into a :class:`Quantity`.

    Accepts a string like ``"208 um"`` or a mapping ``{"value": 208,
    "unit": "um"}``.  Raises :class:`UnitParseError` for bare numbers,
    unknown units or malformed input.
    """
    where = f" for field '{field}'" if field else ""
    if isinstance(raw, dict):
        try:
            raw = f"{raw['value']} {raw['unit']}"
        except KeyError as exc:
            raise UnitParseError(f"quantity mapping{where} needs 'value' and 'unit'") from exc
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        raise UnitParseError(
            f"bare number {raw!r}{where}: dimensioned values need a unit suffix, e.g. '9 mm'"
        )
    if not isinstance(raw, str):
        raise UnitParseError(f"cannot parse quantity{where} from {type(raw).__name__}")

    text = raw.strip()
    angular = False
    if text.startswith("2pi*"):
        angular = True
        text = text[len("2pi*"):]

    match = _QUANTITY_RE.match(text)
    if match is None:
        raise UnitParseError(f"malformed quantity {raw!r}{where}; expected '<number> <unit>'")
    number = float(match.group(1))
    if angular:
        number *= 2.0 * math.pi
    unit = match.group(2)

    parts = unit.split("/")
    num_tags: list[str] = []
    den_tags: list[str] = []
    factor = 1.0
    for i, atom in enumerate(parts):
        if atom not in _ATOMS:
            raise UnitParseError(f"unknown unit {atom!r} in {raw!r}{where}")
        scale, tag = _ATOMS[atom]
        if tag == "A":
            angular = True
        if i == 0:
            factor *= scale
            num_tags.append(tag)
        else:
            factor /= scale
            den_tags.append(tag)

    return Quantity(
        value=number * factor,
        dimension=_dimension_signature(num_tags, den_tags),
        angular=angular,
        source=str(raw),
    )


def require(
    raw: object,
    field: str,
    dimension: str,
    angular: bool | None = None,
) -> float:
    """Parse and validate a config entry, returning its SI value.

    ``angular=True`` demands a ``2pi*`` prefix or a rad-based unit (use
    for angular frequencies and wavevectors), ``angular=False`` rejects
    them (use for ordinary-frequency fields), ``None`` accepts either.
    """
    qty = parse_quantity(raw, field)
    if qty.dimension != dimension:
        raise UnitParseError(
            f"field '{field}': expected a quantity of dimension {dimension}, "
            f"got {qty.source!r} ({qty.dimension})"
        )
    if angular is True and not qty.angular:
        raise UnitParseError(
            f"field '{field}': {qty.source!r} is ambiguous; this is an angular "
            f"quantity, write it with a '2pi*' prefix or a rad-based unit"
        )
    if angular is False and qty.angular:
        raise UnitParseError(
            f"field '{field}': {qty.source!r} must be an ordinary (non-angular) "
            f"quantity; drop the '2pi*' prefix"
        )
    return qty.value


def dimensionless(raw: object, field: str) -> float:
    """Accept a plain number (the only fields allowed to omit a unit)."""
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise UnitParseError(f"field '{field}': expected a plain number, got {raw!r}")
    return float(raw)
