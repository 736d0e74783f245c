"""Memory-interlacing address algebra.

A feature map is padded to multiples of 3 and distributed over 9 column
memories so that any 3x3 window touches each column exactly once. A cell
at global coordinates (gi, gj) lives in column s = 3*(gj % 3) + (gi % 3)
of tile (gi // 3, gj // 3), written (i, j)[s].

The neighbor plans tabulate, for an event arriving from column s_in,
which tile-address delta and which slot of the 180-degree-rotated kernel
feed each of the 9 column processing elements. The 8 column equations
the hardware derives by hand are generated here by brute force from the
coordinate mapping itself.
"""

from typing import Iterator, NamedTuple

from spikesim.errors import DimensionError


class NeighborTarget(NamedTuple):
    """Per (s_in, s_mem) entry: tile delta and rotated-kernel slot."""

    di: int
    dj: int
    kernel_slot: int


class InterlacedAddress(NamedTuple):
    i: int
    j: int
    s: int


def to_interlaced(global_i: int, global_j: int) -> InterlacedAddress:
    """Map global pixel coordinates to a tile address and column index."""
    if global_i < 0 or global_j < 0:
        raise DimensionError(f"negative coordinates ({global_i}, {global_j})")
    return InterlacedAddress(global_i // 3, global_j // 3, 3 * (global_j % 3) + global_i % 3)


def from_interlaced(i: int, j: int, s: int) -> tuple[int, int]:
    """Inverse of to_interlaced."""
    if not 0 <= s <= 8:
        raise DimensionError(f"column index {s} out of range 0..8")
    return 3 * i + s % 3, 3 * j + s // 3


def padded_dims(height: int, width: int) -> tuple[int, int]:
    """Feature-map dimensions rounded up to the next multiple of 3."""
    return -(-height // 3) * 3, -(-width // 3) * 3


def build_neighbor_plans() -> tuple[tuple[NeighborTarget, ...], ...]:
    """Build all 81 (s_in, s_mem) address-calculation entries.

    For an event centered at a cell of column s_in, the 3x3 window
    element lying in column s_mem sits at tile (i_in + di, j_in + dj)
    and receives rotated-kernel element kernel_slot (row-major index
    into the 180-degree-rotated kernel).
    """
    plans = []
    for s_in in range(9):
        # Representative center inside tile (1, 1); deltas are tile-relative.
        ci, cj = from_interlaced(1, 1, s_in)
        entries: list[NeighborTarget | None] = [None] * 9
        for dgi in (-1, 0, 1):
            for dgj in (-1, 0, 1):
                ti, tj, s_mem = to_interlaced(ci + dgi, cj + dgj)
                entries[s_mem] = NeighborTarget(ti - 1, tj - 1, 3 * (dgi + 1) + (dgj + 1))
        assert all(e is not None for e in entries)
        plans.append(tuple(entries))
    return tuple(plans)


NEIGHBOR_PLANS = build_neighbor_plans()


def check_bounds(i: int, j: int, s_mem: int, target: NeighborTarget,
                 height: int, width: int) -> bool:
    """True iff a plan target of an event at tile (i, j) hits the real fmap.

    Out-of-bounds targets (beyond the true, unpadded dimensions) are
    suppressed, which is exactly zero-padding behavior.
    """
    gi, gj = from_interlaced(i + target.di, j + target.dj, s_mem)
    return 0 <= gi < height and 0 <= gj < width


def maxpool_addresses(tiles_h: int, tiles_w: int) -> Iterator[tuple[int, int, int, int, int]]:
    """Counter-based pooled-address stream over the thresholding scan.

    Visits tiles with i_mem as the inner loop and j_mem as the outer
    loop and yields (i_mem, j_mem, i_out, j_out, s_out) per tile. Uses
    only increment/reset counters, no division: s_out_i cycles 0,1,2 and
    s_out_j cycles 0,3,6, carrying into i_out / j_out on wrap.
    """
    s_out_i = 0
    s_out_j = 0
    i_out = 0
    j_out = 0
    for j_mem in range(tiles_w):
        for i_mem in range(tiles_h):
            yield i_mem, j_mem, i_out, j_out, s_out_i + s_out_j
            if i_mem == tiles_h - 1:
                s_out_i = 0
                i_out = 0
                if s_out_j == 6:
                    s_out_j = 0
                    j_out += 1
                else:
                    s_out_j += 3
            else:
                if s_out_i == 2:
                    s_out_i = 0
                    i_out += 1
                else:
                    s_out_i += 1
