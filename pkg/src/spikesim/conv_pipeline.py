"""Cycle-level model of the 4-stage event convolution unit.

Stages: S1 address calculation, S2 MemPot read + kernel permutation,
S3 saturating update, S4 write-back. RAW hazards between S2 and S4 are
forwarded; S2-S3 hazards stall S1/S2 and the queue for one cycle, after
which they become forwardable S2-S4 hazards. Events from one queue
column never overlap, so stalls can only happen on column switches.

Cycle accounting: every queue entry (valid event or empty-column
terminator) costs one cycle, stalls cost one cycle each, and each
channel-queue activation pays a fixed 4-cycle wind-up/drain constant.
The drain is modeled as non-overlapping with queue reads so the
identity total = valid + wasted + stalls + wind-up is exact.
"""

from dataclasses import dataclass

from spikesim.aeq import AeqBank
from spikesim.errors import DimensionError
from spikesim.fixedpoint import rails
from spikesim.interlace import NEIGHBOR_PLANS, padded_dims
from spikesim.model import rotate180

WINDUP_CYCLES = 4


@dataclass
class CycleStats:
    """Per channel-queue cycle accounting for the convolution unit."""

    valid_events: int = 0
    wasted_reads: int = 0
    stalls: int = 0
    forwards: int = 0
    windup: int = WINDUP_CYCLES
    overflows: int = 0

    @property
    def total_cycles(self) -> int:
        return self.valid_events + self.wasted_reads + self.stalls + self.windup

    def merge(self, other: "CycleStats") -> None:
        self.valid_events += other.valid_events
        self.wasted_reads += other.wasted_reads
        self.stalls += other.stalls
        self.forwards += other.forwards
        self.windup += other.windup
        self.overflows += other.overflows


class InterlacedMemory:
    """One output channel's potentials in 9 column memories.

    Covers the fmap padded to multiples of 3; cells beyond the real
    dimensions are never written by the pipeline and are masked out by
    the thresholding scan. Each cell also carries the persistent spike
    indicator bit.
    """

    def __init__(self, height: int, width: int):
        if height < 1 or width < 1:
            raise DimensionError("memory dimensions must be positive")
        self.height = height
        self.width = width
        hp, wp = padded_dims(height, width)
        self.tiles_h = hp // 3
        self.tiles_w = wp // 3
        n = self.tiles_h * self.tiles_w
        self.pots = [[0] * n for _ in range(9)]
        self.spiked = [[False] * n for _ in range(9)]

    def reset(self) -> None:
        n = self.tiles_h * self.tiles_w
        for s in range(9):
            self.pots[s] = [0] * n
            self.spiked[s] = [False] * n

    def potential_grid(self) -> list[list[int]]:
        """Potentials of the real (unpadded) fmap as a 2D grid."""
        tw = self.tiles_w
        return [[self.pots[3 * (gj % 3) + gi % 3][(gi // 3) * tw + gj // 3]
                 for gj in range(self.width)] for gi in range(self.height)]

    def spike_grid(self) -> list[list[int]]:
        tw = self.tiles_w
        return [[int(self.spiked[3 * (gj % 3) + gi % 3][(gi // 3) * tw + gj // 3])
                 for gj in range(self.width)] for gi in range(self.height)]

    def load_potentials(self, grid: list[list[int]]) -> None:
        """Seed real cells from a 2D grid (testing hook)."""
        if len(grid) != self.height or any(len(r) != self.width for r in grid):
            raise DimensionError("grid does not match memory dimensions")
        tw = self.tiles_w
        for gi, row in enumerate(grid):
            for gj, v in enumerate(row):
                self.pots[3 * (gj % 3) + gi % 3][(gi // 3) * tw + gj // 3] = v


class _Job:
    __slots__ = ("event", "addrs", "weights", "operands", "results")

    def __init__(self, event, addrs, weights):
        self.event = event  # (i, j, s) for traces
        self.addrs = addrs  # 9 linear tile addresses, -1 = suppressed
        self.weights = weights
        self.operands = None
        self.results = None


def permute_kernel(kernel: list[list[int]], s_in: int) -> list[int]:
    """Rotated-kernel weights aligned to memory columns 0..8 for s_in."""
    rot = rotate180(kernel)
    flat = [w for row in rot for w in row]
    return [flat[NEIGHBOR_PLANS[s_in][s_mem].kernel_slot] for s_mem in range(9)]


def detect_hazards(s2_addrs: list[int], s3_addrs: list[int] | None,
                   s4_addrs: list[int] | None) -> str:
    """Classify the hazard for the event currently reading in S2."""
    if s3_addrs is not None:
        for a, b in zip(s2_addrs, s3_addrs):
            if a >= 0 and a == b:
                return "stall"
    if s4_addrs is not None:
        for a, b in zip(s2_addrs, s4_addrs):
            if a >= 0 and a == b:
                return "forward"
    return "none"


def _conflicts(a_addrs: list[int], b_addrs: list[int]) -> bool:
    for a, b in zip(a_addrs, b_addrs):
        if a >= 0 and a == b:
            return True
    return False


def _fmt_event(job: _Job | None) -> str:
    if job is None:
        return "-"
    i, j, s = job.event
    return f"({i},{j})[{s}]"


def conv_channel(mem: InterlacedMemory, bank: AeqBank, channel: int, t: int,
                 kernel: list[list[int]], width: int, *, pipelined: bool = True,
                 trace: list[str] | None = None) -> CycleStats:
    """Drain one (channel, t) queue into the memory.

    With pipelined=True the four stages advance per simulated cycle with
    hazard detection; pipelined=False is the fast functional mode that
    produces identical memory contents and event/waste accounting.
    """
    lo, hi = rails(width)
    k = len(kernel)
    height, width_px = mem.height, mem.width
    tw = mem.tiles_w
    pots = mem.pots
    stats = CycleStats()

    if k == 3:
        plans = NEIGHBOR_PLANS
        weights_by_s = [permute_kernel(kernel, s_in) for s_in in range(9)]

        def make_job(i: int, j: int, s_in: int) -> _Job:
            addrs = [-1] * 9
            plan = plans[s_in]
            for s_mem in range(9):
                tgt = plan[s_mem]
                ti = i + tgt.di
                tj = j + tgt.dj
                if 0 <= 3 * ti + s_mem % 3 < height and 0 <= 3 * tj + s_mem // 3 < width_px:
                    addrs[s_mem] = ti * tw + tj
            return _Job((i, j, s_in), addrs, weights_by_s[s_in])
    elif k == 1:
        w00 = kernel[0][0]

        def make_job(i: int, j: int, s_in: int) -> _Job:
            addrs = [-1] * 9
            addrs[s_in] = i * tw + j
            weights = [0] * 9
            weights[s_in] = w00
            return _Job((i, j, s_in), addrs, weights)
    else:
        raise DimensionError(f"unsupported kernel size {k}")

    bank.reset_read(channel, t)

    if not pipelined:
        while True:
            item = bank.read_next(channel, t)
            if item is None:
                break
            entry, s_col = item
            if not entry.valid:
                stats.wasted_reads += 1
                continue
            stats.valid_events += 1
            job = make_job(entry.i, entry.j, s_col)
            for s in range(9):
                a = job.addrs[s]
                if a < 0:
                    continue
                v = pots[s][a] + job.weights[s]
                if v > hi:
                    v = hi
                    stats.overflows += 1
                elif v < lo:
                    v = lo
                    stats.overflows += 1
                pots[s][a] = v
        return stats

    s1 = s2 = s3 = s4 = None
    cycle = 0
    while s1 or s2 or s3 or s4 or not bank.read_exhausted(channel, t):
        cycle += 1
        stall = s2 is not None and s3 is not None and _conflicts(s2.addrs, s3.addrs)

        # S4 write-back (one write port per column, this cycle).
        old_s4 = s4
        if old_s4 is not None:
            addrs = old_s4.addrs
            results = old_s4.results
            for s in range(9):
                a = addrs[s]
                if a >= 0:
                    pots[s][a] = results[s]

        # S3 saturating update; operands were captured on S2 exit.
        if s3 is not None:
            results = []
            operands = s3.operands
            weights = s3.weights
            addrs = s3.addrs
            for s in range(9):
                if addrs[s] < 0:
                    results.append(0)
                    continue
                v = operands[s] + weights[s]
                if v > hi:
                    v = hi
                    stats.overflows += 1
                elif v < lo:
                    v = lo
                    stats.overflows += 1
                results.append(v)
            s3.results = results
        s4 = s3

        if stall:
            stats.stalls += 1
            s3 = None
            if trace is not None:
                trace.append(f"cyc={cycle} S1={_fmt_event(s1)} S2={_fmt_event(s2)} "
                             f"S3=- S4={_fmt_event(s4)} stall=1")
            continue

        # S2 operand capture, forwarding from the S4 write of this cycle.
        if s2 is not None:
            operands = [0] * 9
            addrs = s2.addrs
            for s in range(9):
                a = addrs[s]
                if a < 0:
                    continue
                if old_s4 is not None and old_s4.addrs[s] == a:
                    operands[s] = old_s4.results[s]
                    stats.forwards += 1
                else:
                    operands[s] = pots[s][a]
            s2.operands = operands
        s3 = s2
        s2 = s1

        # S1 fetch: one queue entry per non-stalled cycle.
        s1 = None
        item = bank.read_next(channel, t)
        if item is not None:
            entry, s_col = item
            if entry.valid:
                stats.valid_events += 1
                s1 = make_job(entry.i, entry.j, s_col)
            else:
                stats.wasted_reads += 1
        if trace is not None:
            trace.append(f"cyc={cycle} S1={_fmt_event(s1)} S2={_fmt_event(s2)} "
                         f"S3={_fmt_event(s3)} S4={_fmt_event(s4)} stall=0")

    # Simulated cycles can undercut the accounting total when the drain
    # overlaps trailing wasted reads; the fixed wind-up constant covers it.
    assert cycle <= stats.total_cycles
    return stats
