"""Shared test helpers: grid generators, banks, independent conv oracle."""

from random import Random

import pytest

from spikesim.aeq import AeqBank
from spikesim.interlace import padded_dims
from spikesim.scheduler import grids_to_banks


def random_grid(rng: Random, height: int, width: int, density: float) -> list[list[int]]:
    return [[1 if rng.random() < density else 0 for _ in range(width)]
            for _ in range(height)]


def random_kernel(rng: Random, k: int, limit: int) -> list[list[int]]:
    return [[rng.randint(-limit, limit) for _ in range(k)] for _ in range(k)]


def bank_from_grid(grid: list[list[int]], height: int, width: int) -> AeqBank:
    """Single-channel, single-timestep queue bank for a binary grid."""
    return grids_to_banks([grid], height, width)


def dense_conv_oracle(grid: list[list[int]], kernel: list[list[int]]) -> list[list[int]]:
    """Literal zero-padded sliding-window convolution in wide integers.

    Independent of the event-based path: no kernel rotation, no event
    scatter; just output(o) = sum_k K[kr][kc] * X[o + kr - off][...].
    """
    height, width = len(grid), len(grid[0])
    k = len(kernel)
    off = k // 2
    out = [[0] * width for _ in range(height)]
    for oi in range(height):
        for oj in range(width):
            acc = 0
            for kr in range(k):
                gi = oi + kr - off
                if not 0 <= gi < height:
                    continue
                for kc in range(k):
                    gj = oj + kc - off
                    if 0 <= gj < width:
                        acc += kernel[kr][kc] * grid[gi][gj]
            out[oi][oj] = acc
    return out


@pytest.fixture
def rng() -> Random:
    return Random(0xC0FFEE)
