"""Cycle-level model of the 5-stage thresholding unit.

Scans the interlaced memory tile by tile (3x3 window, stride 3, row
counter inner / column counter outer), adds the bias with saturation,
fires neurons above threshold or with a set spike indicator, and writes
the resulting address events to the target queue bank. With max-pooling
enabled, a single pooled event per window is emitted at the address
produced by the counter circuit. No data hazards exist: every cell is
read and written exactly once per pass.
"""

from dataclasses import dataclass

from spikesim.aeq import AeqBank
from spikesim.conv_pipeline import InterlacedMemory
from spikesim.fixedpoint import clamp, rails
from spikesim.interlace import maxpool_addresses

WINDUP_CYCLES = 5


@dataclass
class ThreshStats:
    """Cycle and event accounting for one thresholding pass."""

    tiles: int = 0
    events_written: int = 0
    overflows: int = 0
    windup: int = WINDUP_CYCLES

    @property
    def total_cycles(self) -> int:
        return self.tiles + self.windup

    def merge(self, other: "ThreshStats") -> None:
        self.tiles += other.tiles
        self.events_written += other.events_written
        self.overflows += other.overflows
        self.windup += other.windup


def apply_bias_saturating(window: list[int], bias: int, width: int) -> list[int]:
    """Elementwise saturating bias add over one 3x3 window."""
    lo, hi = rails(width)
    return [clamp(v + bias, lo, hi) for v in window]


def spike_indicator_update(spiked: bool, fired: bool) -> bool:
    """Persistent m-TTFS indicator: once set it stays set."""
    return spiked or fired


def threshold_channel(mem: InterlacedMemory, bias: int, threshold: int,
                      maxpool: bool, bank: AeqBank, channel: int, t: int,
                      width: int) -> ThreshStats:
    """Bias, threshold and event emission for one channel and timestep.

    Cells beyond the real fmap dimensions (padding to multiples of 3)
    are skipped entirely: no bias, no events. Finalizes the target
    queues for (channel, t) once the scan completes.
    """
    lo, hi = rails(width)
    height, width_px = mem.height, mem.width
    tw = mem.tiles_w
    pots = mem.pots
    spiked = mem.spiked
    stats = ThreshStats()
    for i_mem, j_mem, i_out, j_out, s_out in maxpool_addresses(mem.tiles_h, tw):
        stats.tiles += 1
        addr = i_mem * tw + j_mem
        slots: list[tuple[int, int] | None] = [None] * 9
        any_fired = False
        for s in range(9):
            gi = 3 * i_mem + s % 3
            gj = 3 * j_mem + s // 3
            if gi >= height or gj >= width_px:
                continue
            v = pots[s][addr] + bias
            if v > hi:
                v = hi
                stats.overflows += 1
            elif v < lo:
                v = lo
                stats.overflows += 1
            pots[s][addr] = v
            fired = v > threshold or spiked[s][addr]
            spiked[s][addr] = fired
            if fired:
                any_fired = True
                if not maxpool:
                    slots[s] = (i_mem, j_mem)
        if any_fired:
            if maxpool:
                slots[s_out] = (i_out, j_out)
                stats.events_written += 1
            else:
                stats.events_written += sum(1 for e in slots if e is not None)
            bank.write_parallel(channel, t, slots)
    bank.finalize(channel, t)
    return stats
