"""Thresholding-unit tests."""

from spikesim.aeq import AeqBank
from spikesim.conv_pipeline import InterlacedMemory
from spikesim.interlace import from_interlaced
from spikesim.thresh_pipeline import (
    WINDUP_CYCLES,
    ThreshStats,
    apply_bias_saturating,
    spike_indicator_update,
    threshold_channel,
)


def run(grid, h, w, *, bias=0, threshold=0, maxpool=False, width=8, mem=None):
    if mem is None:
        mem = InterlacedMemory(h, w)
        mem.load_potentials(grid)
    bank = AeqBank(max(h * w, 9))
    stats = threshold_channel(mem, bias, threshold, maxpool, bank, 0, 0, width)
    return mem, bank, stats


def events_global(bank):
    return sorted(from_interlaced(i, j, s) for s, i, j in bank.events(0, 0))


def test_fires_strictly_above_threshold():
    grid = [[3, 4, 5]]
    mem, bank, stats = run(grid, 1, 3, threshold=4)
    assert events_global(bank) == [(0, 2)]
    assert stats.events_written == 1


def test_bias_applied_before_threshold():
    grid = [[3, 4, 5]]
    _, bank, _ = run(grid, 1, 3, bias=1, threshold=4)
    assert events_global(bank) == [(0, 1), (0, 2)]


def test_bias_saturates():
    grid = [[120]]
    mem, bank, stats = run(grid, 1, 1, bias=20, threshold=126)
    assert mem.potential_grid() == [[127]]
    assert stats.overflows == 1
    assert events_global(bank) == [(0, 0)]


def test_persistent_indicator_fires_without_potential():
    grid = [[10]]
    mem, bank1, _ = run(grid, 1, 1, threshold=5)
    assert events_global(bank1) == [(0, 0)]
    # second pass: potential drops below threshold, indicator keeps it firing
    mem.pots[0][0] = 0
    bank2 = AeqBank(9)
    threshold_channel(mem, 0, 5, False, bank2, 0, 0, 8)
    assert sorted(from_interlaced(i, j, s) for s, i, j in bank2.events(0, 0)) == [(0, 0)]


def test_padding_cells_skipped():
    # 4x4 fmap pads to 6x6; padded cells get no bias and emit nothing.
    grid = [[0] * 4 for _ in range(4)]
    mem, bank, stats = run(grid, 4, 4, bias=50, threshold=10)
    assert len(bank.events(0, 0)) == 16
    assert stats.tiles == 4
    assert stats.total_cycles == 4 + WINDUP_CYCLES


def test_events_written_in_scan_order():
    grid = [[1] * 6 for _ in range(6)]
    _, bank, stats = run(grid, 6, 6, threshold=0)
    assert stats.events_written == 36
    # per column, tiles appear j-outer / i-inner: (0,0), (1,0), (0,1), (1,1)
    col0 = [(e.i, e.j) for e in bank._queues[(0, 0)][0] if e.valid]
    assert col0 == [(0, 0), (1, 0), (0, 1), (1, 1)]


def test_maxpool_single_event_per_window():
    grid = [[0] * 6 for _ in range(6)]
    grid[0][0] = 9
    grid[1][2] = 9  # same tile (0,0)
    grid[4][4] = 9  # tile (1,1)
    _, bank, stats = run(grid, 6, 6, threshold=5, maxpool=True)
    assert stats.events_written == 2
    evs = bank.events(0, 0)
    # pooled fmap is 2x2: tile (0,0) -> (0,0)[0], tile (1,1) -> (0,0)[4]
    assert sorted(evs) == [(0, 0, 0), (4, 0, 0)]


def test_maxpool_known_address_mapping():
    # firing tile (0,1) of a 2x2 tile grid pools to (0,0) column 3
    grid = [[0] * 6 for _ in range(6)]
    grid[1][4] = 9
    _, bank, _ = run(grid, 6, 6, threshold=5, maxpool=True)
    assert bank.events(0, 0) == [(3, 0, 0)]


def test_no_events_when_nothing_fires():
    grid = [[0] * 5 for _ in range(4)]
    _, bank, stats = run(grid, 4, 5, threshold=3)
    assert bank.events(0, 0) == []
    assert stats.events_written == 0
    assert bank.empty_columns(0, 0) == 9


def test_cycle_accounting():
    grid = [[0] * 10 for _ in range(7)]
    _, _, stats = run(grid, 7, 10)
    # 7x10 pads to 9x12 = 3x4 tiles
    assert stats.tiles == 12
    assert stats.total_cycles == 12 + WINDUP_CYCLES


def test_stats_merge():
    a = ThreshStats(tiles=4, events_written=2)
    a.merge(ThreshStats(tiles=3, events_written=1, overflows=2))
    assert a.tiles == 7 and a.events_written == 3 and a.overflows == 2
    assert a.windup == 2 * WINDUP_CYCLES


def test_helpers():
    assert apply_bias_saturating([120, -120, 0], 20, 8) == [127, -100, 20]
    assert spike_indicator_update(False, False) is False
    assert spike_indicator_update(True, False) is True
    assert spike_indicator_update(False, True) is True
