"""Event-convolution pipeline tests."""

import pytest

from conftest import bank_from_grid, dense_conv_oracle, random_grid, random_kernel
from spikesim.conv_pipeline import (
    WINDUP_CYCLES,
    CycleStats,
    InterlacedMemory,
    conv_channel,
    detect_hazards,
    permute_kernel,
)
from spikesim.errors import DimensionError
from spikesim.fixedpoint import rails
from spikesim.model import rotate180

KERNEL = [[1, 2, 3], [4, 5, 6], [7, 8, 9]]


def run_grid(grid, kernel, h, w, *, pipelined=True, width=16, trace=None):
    mem = InterlacedMemory(h, w)
    bank = bank_from_grid(grid, h, w)
    stats = conv_channel(mem, bank, 0, 0, kernel, width,
                         pipelined=pipelined, trace=trace)
    return mem, stats


def test_single_event_writes_rotated_kernel():
    grid = [[0] * 5 for _ in range(5)]
    grid[2][2] = 1
    mem, stats = run_grid(grid, KERNEL, 5, 5)
    pots = mem.potential_grid()
    assert [row[1:4] for row in pots[1:4]] == rotate180(KERNEL)
    assert stats.valid_events == 1
    assert stats.wasted_reads == 8
    assert stats.stalls == 0


def test_empty_queue_costs_nine_wasted_reads():
    grid = [[0] * 6 for _ in range(6)]
    mem, stats = run_grid(grid, KERNEL, 6, 6)
    assert stats.valid_events == 0
    assert stats.wasted_reads == 9
    assert stats.stalls == 0
    assert stats.total_cycles == 9 + WINDUP_CYCLES
    assert all(v == 0 for row in mem.potential_grid() for v in row)


def test_matches_dense_oracle_random(rng):
    for _ in range(60):
        h = rng.randint(1, 12)
        w = rng.randint(1, 12)
        grid = random_grid(rng, h, w, 0.35)
        kernel = random_kernel(rng, 3, 14)
        mem, _ = run_grid(grid, kernel, h, w)
        assert mem.potential_grid() == dense_conv_oracle(grid, kernel)


def test_pipelined_equals_functional(rng):
    for _ in range(40):
        h = rng.randint(2, 10)
        w = rng.randint(2, 10)
        grid = random_grid(rng, h, w, 0.5)
        kernel = random_kernel(rng, 3, 20)
        m1, s1 = run_grid(grid, kernel, h, w, pipelined=True, width=8)
        m2, s2 = run_grid(grid, kernel, h, w, pipelined=False, width=8)
        assert m1.potential_grid() == m2.potential_grid()
        assert (s1.valid_events, s1.wasted_reads) == (s2.valid_events, s2.wasted_reads)
        assert (s2.stalls, s2.forwards) == (0, 0)


def test_1x1_kernel_updates_own_cell_only():
    grid = [[0, 1, 0], [0, 0, 0], [1, 0, 0]]
    mem, stats = run_grid(grid, [[9]], 3, 3)
    assert mem.potential_grid() == [[0, 9, 0], [0, 0, 0], [9, 0, 0]]
    assert stats.valid_events == 2


def test_unsupported_kernel_size():
    mem = InterlacedMemory(3, 3)
    bank = bank_from_grid([[0] * 3] * 3, 3, 3)
    with pytest.raises(DimensionError):
        conv_channel(mem, bank, 0, 0, [[1, 2], [3, 4]], 8)


def test_permute_kernel_center_column():
    # For the event's own column, the plan's kernel slot is the center.
    for s in range(9):
        assert permute_kernel(KERNEL, s)[s] == 5
    # each permutation is a rearrangement of the full rotated kernel
    flat = sorted(w for row in rotate180(KERNEL) for w in row)
    for s in range(9):
        assert sorted(permute_kernel(KERNEL, s)) == flat


def test_detect_hazards_adjacent_same_row_events():
    """Back-to-back events one pixel apart share overlapping targets.

    Events at global (0,0) (column 0) and (0,1) (column 3) on a 6x6 map
    both touch the cells around them, so their address vectors collide
    in several memory columns: back to back that is a stall, one cycle
    apart a forward.
    """
    from spikesim.interlace import NEIGHBOR_PLANS, to_interlaced

    def job_addrs(gi, gj, tiles_w=2, h=6, w=6):
        i, j, s_in = to_interlaced(gi, gj)
        addrs = [-1] * 9
        for s_mem in range(9):
            t = NEIGHBOR_PLANS[s_in][s_mem]
            ti, tj = i + t.di, j + t.dj
            if 0 <= 3 * ti + s_mem % 3 < h and 0 <= 3 * tj + s_mem // 3 < w:
                addrs[s_mem] = ti * tiles_w + tj
        return addrs

    a = job_addrs(0, 0)
    b = job_addrs(0, 1)
    assert detect_hazards(b, a, None) == "stall"
    assert detect_hazards(b, None, a) == "forward"
    assert detect_hazards(b, None, None) == "none"


def test_same_column_events_never_hazard():
    """Events in the same queue column have disjoint neighborhoods."""
    from spikesim.interlace import NEIGHBOR_PLANS

    def addrs(i, j, s_in, tiles_w=4):
        out = [-1] * 9
        for s_mem in range(9):
            t = NEIGHBOR_PLANS[s_in][s_mem]
            out[s_mem] = (i + t.di) * tiles_w + (j + t.dj)
        return out

    for s in range(9):
        a = addrs(1, 1, s)
        for ti in range(3):
            for tj in range(3):
                if (ti, tj) == (1, 1):
                    continue
                assert detect_hazards(addrs(ti, tj, s), a, None) == "none"


def test_stall_detected_and_resolved():
    """Back-to-back adjacent events stall once and still compute exactly.

    On a single-tile 3x3 fmap every column holds one event and
    consecutive columns hold neighboring pixels, so each column switch
    is a read-after-write hazard on the event right behind it.
    """
    grid = [[1] * 3 for _ in range(3)]
    mem, stats = run_grid(grid, KERNEL, 3, 3, width=16)
    assert stats.stalls > 0
    assert mem.potential_grid() == dense_conv_oracle(grid, KERNEL)


def test_cycle_accounting_identity(rng):
    for _ in range(30):
        h = rng.randint(2, 12)
        w = rng.randint(2, 12)
        grid = random_grid(rng, h, w, rng.random())
        _, stats = run_grid(grid, KERNEL, h, w)
        assert stats.total_cycles == (stats.valid_events + stats.wasted_reads
                                      + stats.stalls + stats.windup)
        assert stats.windup == WINDUP_CYCLES


def test_overflow_counted():
    grid = [[1, 1, 1]]
    mem, stats = run_grid(grid, [[0] * 3, [100, 100, 100], [0] * 3], 1, 3, width=8)
    assert stats.overflows > 0
    assert max(v for row in mem.potential_grid() for v in row) == 127


def test_stats_merge():
    a = CycleStats(valid_events=2, wasted_reads=3, stalls=1, forwards=4)
    b = CycleStats(valid_events=1, wasted_reads=6)
    a.merge(b)
    assert a.valid_events == 3 and a.wasted_reads == 9
    assert a.windup == 2 * WINDUP_CYCLES
    assert a.total_cycles == 3 + 9 + 1 + 8


def test_trace_format():
    grid = [[0] * 3 for _ in range(3)]
    grid[0][0] = 1
    trace = []
    run_grid(grid, KERNEL, 3, 3, trace=trace)
    assert trace[0].startswith("cyc=1 S1=(0,0)[0] S2=- S3=- S4=- stall=0")
    assert all(line.startswith("cyc=") and "stall=" in line for line in trace)


def test_memory_hooks():
    mem = InterlacedMemory(4, 5)
    target = [[r * 5 + c for c in range(5)] for r in range(4)]
    mem.load_potentials(target)
    assert mem.potential_grid() == target
    mem.reset()
    assert all(v == 0 for row in mem.potential_grid() for v in row)
    with pytest.raises(DimensionError):
        mem.load_potentials([[0] * 5] * 3)
    with pytest.raises(DimensionError):
        InterlacedMemory(0, 5)
