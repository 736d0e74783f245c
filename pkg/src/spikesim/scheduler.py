"""Layer/channel/timestep orchestration of the event-driven engine.

Follows the hardware dataflow: for each output channel the potential
memory is zeroed and reused; for each timestep every input-channel
queue is convolved, then the thresholding unit produces the output
queues. Units can be replicated (parallelization factor); channels are
assigned round-robin and the layer makespan is the largest per-unit
cycle sum. Results are identical for every factor.
"""

from dataclasses import dataclass, field

from spikesim.aeq import AeqBank
from spikesim.conv_pipeline import CycleStats, InterlacedMemory, conv_channel
from spikesim.errors import ConfigError, DimensionError
from spikesim.encoder import encode
from spikesim.fixedpoint import clamp, rails
from spikesim.interlace import maxpool_addresses, padded_dims
from spikesim.metrics import LayerStats, NetworkStats
from spikesim.model import Grid, NetworkSpec
from spikesim.thresh_pipeline import threshold_channel

PARALLEL_FACTORS = (1, 2, 4, 8, 16)


@dataclass
class RunPlan:
    """Execution configuration for the event-driven engine."""

    parallel: int = 1
    clock_mhz: float | None = None
    pipelined: bool = True
    trace: list[str] | None = None

    def __post_init__(self) -> None:
        if self.parallel not in PARALLEL_FACTORS:
            raise ConfigError(
                f"parallelization factor {self.parallel} not in {PARALLEL_FACTORS}")


@dataclass
class RunResult:
    """Event-driven inference output plus everything equivalence tests need."""

    label: int
    stats: NetworkStats
    # spikes[layer][t][c_out]: set of (gi, gj) output (post-pool) coordinates
    spikes: list[list[list[set[tuple[int, int]]]]] = field(default_factory=list)
    class_potentials: list[int] = field(default_factory=list)
    mem_allocations: int = 0


def _bank_capacity(height: int, width: int) -> int:
    hp, wp = padded_dims(height, width)
    return max(hp * wp // 9, 1)


def grids_to_banks(grids: list[Grid], height: int, width: int,
                   channel: int = 0, bank: AeqBank | None = None) -> AeqBank:
    """Convert per-timestep spike grids into finalized event queues.

    Writes in the thresholding scan order so queue contents are
    byte-identical to what a hardware producer would emit.
    """
    if bank is None:
        bank = AeqBank(_bank_capacity(height, width))
    hp, wp = padded_dims(height, width)
    for t, grid in enumerate(grids):
        for i_mem, j_mem, _, _, _ in maxpool_addresses(hp // 3, wp // 3):
            slots: list[tuple[int, int] | None] = [None] * 9
            hit = False
            for s in range(9):
                gi = 3 * i_mem + s % 3
                gj = 3 * j_mem + s // 3
                if gi < height and gj < width and grid[gi][gj]:
                    slots[s] = (i_mem, j_mem)
                    hit = True
            if hit:
                bank.write_parallel(channel, t, slots)
        bank.finalize(channel, t)
    return bank


def bank_events_global(bank: AeqBank, channel: int, t: int) -> set[tuple[int, int]]:
    """Valid events of one queue as global (row, col) coordinates."""
    return {(3 * i + s % 3, 3 * j + s // 3) for s, i, j in bank.events(channel, t)}


def run_layer(net: NetworkSpec, layer_idx: int, in_banks: AeqBank,
              plan: RunPlan, mems: list[InterlacedMemory] | None = None
              ) -> tuple[AeqBank, LayerStats, int]:
    """Process one layer; returns (output banks, stats, allocations)."""
    layer = net.layers[layer_idx]
    T = net.timesteps
    for c_in in range(layer.in_channels):
        for t in range(T):
            if (c_in, t) not in in_banks.keys():
                raise DimensionError(
                    f"layer {layer_idx}: missing input queue (c={c_in}, t={t})")

    allocations = 0
    if mems is None:
        mems = [InterlacedMemory(layer.in_height, layer.in_width)
                for _ in range(plan.parallel)]
        allocations = plan.parallel
    out_banks = AeqBank(_bank_capacity(layer.in_height, layer.in_width))

    stats = LayerStats(
        layer=layer_idx,
        input_neurons=layer.in_channels * layer.in_height * layer.in_width,
        timesteps=T)
    stats.input_events = sum(in_banks.valid_count(c, t)
                             for c in range(layer.in_channels) for t in range(T))
    unit_cycles = [0] * plan.parallel
    conv_acc = CycleStats(windup=0)

    for c_out in range(layer.out_channels):
        unit = c_out % plan.parallel
        mem = mems[unit]
        mem.reset()
        for t in range(T):
            for c_in in range(layer.in_channels):
                cstats = conv_channel(
                    mem, in_banks, c_in, t, layer.kernels[c_out][c_in],
                    net.width, pipelined=plan.pipelined, trace=plan.trace)
                conv_acc.merge(cstats)
                unit_cycles[unit] += cstats.total_cycles
            tstats = threshold_channel(
                mem, layer.bias[c_out], layer.threshold, layer.maxpool,
                out_banks, c_out, t, net.width)
            unit_cycles[unit] += tstats.total_cycles
            stats.thresh_tiles += tstats.tiles
            stats.thresh_windup += tstats.windup
            stats.thresh_overflows += tstats.overflows
            stats.output_events += tstats.events_written

    stats.conv_valid_cycles = conv_acc.valid_events
    stats.conv_wasted_reads = conv_acc.wasted_reads
    stats.conv_stalls = conv_acc.stalls
    stats.conv_forwards = conv_acc.forwards
    stats.conv_windup = conv_acc.windup
    stats.conv_overflows = conv_acc.overflows
    stats.makespan_cycles = max(unit_cycles)
    return out_banks, stats, allocations


def classify_events(net: NetworkSpec, banks: AeqBank) -> tuple[int, list[int]]:
    """Fully connected readout from the final layer's event queues."""
    lo, hi = rails(net.width)
    last = net.layers[-1]
    channels = last.out_channels
    h, w = last.out_height, last.out_width
    clf = net.classifier
    acc = [0] * clf.num_classes
    for t in range(net.timesteps):
        active = []
        for c in range(channels):
            for s, i, j in banks.events(c, t):
                gi = 3 * i + s % 3
                gj = 3 * j + s // 3
                active.append(c * h * w + gi * w + gj)
        for cls in range(clf.num_classes):
            wrow = clf.weights[cls]
            total = clf.bias[cls] + sum(wrow[idx] for idx in active)
            acc[cls] = clamp(acc[cls] + total, lo, hi)
    label = max(range(len(acc)), key=lambda c: (acc[c], -c))
    return label, acc


def run_network(net: NetworkSpec, frame: Grid, plan: RunPlan | None = None) -> RunResult:
    """Event-driven inference of one frame."""
    if plan is None:
        plan = RunPlan()
    net.validate()
    if len(frame) != net.in_height or any(len(r) != net.in_width for r in frame):
        raise DimensionError(f"frame must be {net.in_height}x{net.in_width}")

    grids = encode(frame, net.schedule())
    banks = grids_to_banks(grids, net.in_height, net.in_width)
    stats = NetworkStats(clock_mhz=plan.clock_mhz)
    spikes = []
    allocations = 0
    for layer_idx, layer in enumerate(net.layers):
        banks, layer_stats, allocs = run_layer(net, layer_idx, banks, plan)
        allocations += allocs
        stats.layers.append(layer_stats)
        spikes.append([[bank_events_global(banks, c, t)
                        for c in range(layer.out_channels)]
                       for t in range(net.timesteps)])
    label, acc = classify_events(net, banks)
    return RunResult(label=label, stats=stats, spikes=spikes,
                     class_potentials=acc, mem_allocations=allocations)


def pe_utilization(stats: NetworkStats) -> list[float]:
    """Per-layer fraction of convolution cycles carrying valid events."""
    return [layer.pe_utilization for layer in stats.layers]
