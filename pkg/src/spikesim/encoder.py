"""Input encoding: integer frame -> per-timestep binary spike maps.

A strictly increasing threshold set P of length T-1 turns a grayscale
frame into T spike grids shaped like m-TTFS traffic: bright pixels cross
a high threshold early and keep spiking at every later timestep.
Timestep 0 applies the largest threshold; the last timestep applies the
smallest. With T = 1 there is no threshold and any nonzero pixel spikes.
"""

from dataclasses import dataclass, field

from spikesim.errors import ConfigError, DimensionError


@dataclass(frozen=True)
class ThresholdSchedule:
    """Strictly increasing pixel thresholds; timesteps = len(P) + 1."""

    thresholds: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        p = self.thresholds
        if any(b <= a for a, b in zip(p, p[1:])):
            raise ConfigError(f"thresholds must be strictly increasing, got {p}")

    @property
    def timesteps(self) -> int:
        return len(self.thresholds) + 1

    def threshold_for(self, t: int) -> int:
        """Pixel threshold applied at timestep t (largest first)."""
        if not 0 <= t < self.timesteps:
            raise ConfigError(f"timestep {t} out of range 0..{self.timesteps - 1}")
        if not self.thresholds:
            return 0
        return self.thresholds[max(len(self.thresholds) - 1 - t, 0)]


def default_schedule(timesteps: int, pixel_max: int = 255) -> ThresholdSchedule:
    """Evenly spaced thresholds over the pixel range (quartiles for T=5)."""
    if timesteps < 1:
        raise ConfigError("timesteps must be >= 1")
    span = pixel_max + 1
    return ThresholdSchedule(tuple(span * k // timesteps for k in range(1, timesteps)))


def encode(frame: list[list[int]], schedule: ThresholdSchedule) -> list[list[list[int]]]:
    """Encode a frame into T binary grids, one per timestep.

    spike(q, t) = 1 iff frame(q) strictly exceeds the threshold of
    timestep t; since thresholds decrease with t, spike trains are
    monotone (a pixel that spikes keeps spiking).
    """
    height = len(frame)
    if height == 0 or any(len(row) != len(frame[0]) for row in frame):
        raise DimensionError("frame must be a non-empty rectangular grid")
    grids = []
    for t in range(schedule.timesteps):
        p = schedule.threshold_for(t)
        grids.append([[1 if px > p else 0 for px in row] for row in frame])
    return grids
