"""Saturating two's-complement signed fixed-point arithmetic.

All potentials, weights, biases and thresholds share one width W (8 or
16 bit). Values are plain signed integers; every addition clamps to the
representable range instead of wrapping. Overflow is expected behavior
and is surfaced as a flag so callers can count it.
"""

from dataclasses import dataclass

from spikesim.errors import ConfigError

SUPPORTED_WIDTHS = (8, 16)


def rails(width: int) -> tuple[int, int]:
    """Return (min, max) representable values for a supported width."""
    if width not in SUPPORTED_WIDTHS:
        raise ConfigError(f"unsupported width {width}, expected one of {SUPPORTED_WIDTHS}")
    hi = (1 << (width - 1)) - 1
    return -hi - 1, hi


def clamp(value: int, lo: int, hi: int) -> int:
    """Clamp a wide integer to [lo, hi]."""
    if value > hi:
        return hi
    if value < lo:
        return lo
    return value


@dataclass(frozen=True)
class SatFixed:
    """A saturating signed fixed-point scalar of width 8 or 16 bit."""

    value: int
    width: int = 8

    def __post_init__(self) -> None:
        lo, hi = rails(self.width)
        if not lo <= self.value <= hi:
            raise ConfigError(f"value {self.value} out of range [{lo}, {hi}] for width {self.width}")

    @property
    def min(self) -> int:
        return rails(self.width)[0]

    @property
    def max(self) -> int:
        return rails(self.width)[1]


def sat_add_flagged(a: SatFixed, b: SatFixed) -> tuple[SatFixed, bool]:
    """Saturating addition; also reports whether the result was clamped."""
    if a.width != b.width:
        raise ConfigError(f"width mismatch: {a.width} vs {b.width}")
    lo, hi = rails(a.width)
    raw = a.value + b.value
    clamped = clamp(raw, lo, hi)
    return SatFixed(clamped, a.width), clamped != raw


def sat_add(a: SatFixed, b: SatFixed) -> SatFixed:
    """Saturating addition of two same-width values."""
    return sat_add_flagged(a, b)[0]


def compare_gt(a: SatFixed, b: SatFixed) -> bool:
    """Strict signed greater-than, as used by the threshold activation."""
    if a.width != b.width:
        raise ConfigError(f"width mismatch: {a.width} vs {b.width}")
    return a.value > b.value
