"""Network description and the dense frame-based reference engine.

The dense engine defines ground-truth m-TTFS semantics for every
event-based unit. It works directly on 2D grids with plain global
coordinates (no interlacing, no queues, no pipeline) and is the oracle
the event-driven simulator is checked against.

Saturating arithmetic makes accumulation order observable, so the dense
engine applies event contributions in the same canonical order the
hardware queues impose: column index ascending, then tile column, then
tile row. The order is derived here from coordinates alone.
"""

from dataclasses import dataclass, field

from spikesim.encoder import ThresholdSchedule, encode
from spikesim.errors import ConfigError, DimensionError, ModelValidationError
from spikesim.fixedpoint import SUPPORTED_WIDTHS, clamp, rails

Grid = list[list[int]]


@dataclass
class LayerSpec:
    """One convolutional layer: kernels, bias, threshold, optional 3x3 pool."""

    kind: str  # "conv3x3" | "conv1x1"
    in_channels: int
    out_channels: int
    in_height: int
    in_width: int
    kernels: list[list[list[list[int]]]]  # [c_out][c_in][k][k], natural orientation
    bias: list[int]
    threshold: int
    maxpool: bool = False

    @property
    def kernel_size(self) -> int:
        return 3 if self.kind == "conv3x3" else 1

    @property
    def out_height(self) -> int:
        return -(-self.in_height // 3) if self.maxpool else self.in_height

    @property
    def out_width(self) -> int:
        return -(-self.in_width // 3) if self.maxpool else self.in_width

    def validate(self, width: int) -> None:
        if self.kind not in ("conv3x3", "conv1x1"):
            raise ModelValidationError(f"unknown layer kind {self.kind!r}")
        if self.in_height < 1 or self.in_width < 1:
            raise ModelValidationError("layer dimensions must be positive")
        k = self.kernel_size
        if len(self.kernels) != self.out_channels:
            raise ModelValidationError(
                f"expected {self.out_channels} kernel groups, got {len(self.kernels)}")
        lo, hi = rails(width)
        for c_out, group in enumerate(self.kernels):
            if len(group) != self.in_channels:
                raise ModelValidationError(
                    f"kernel group {c_out}: expected {self.in_channels} kernels")
            for kern in group:
                if len(kern) != k or any(len(row) != k for row in kern):
                    raise ModelValidationError(f"kernel group {c_out}: expected {k}x{k} kernel")
                for row in kern:
                    for w in row:
                        if not lo <= w <= hi:
                            raise ModelValidationError(
                                f"kernel weight {w} out of {width}-bit range")
        if len(self.bias) != self.out_channels:
            raise ModelValidationError("bias length must equal out_channels")
        for b in self.bias + [self.threshold]:
            if not lo <= b <= hi:
                raise ModelValidationError(f"value {b} out of {width}-bit range")


@dataclass
class Classifier:
    """Fully connected readout: num_classes x flattened final spike grid."""

    weights: list[list[int]]
    bias: list[int]

    @property
    def num_classes(self) -> int:
        return len(self.weights)

    @property
    def in_features(self) -> int:
        return len(self.weights[0]) if self.weights else 0


@dataclass
class NetworkSpec:
    """Ordered layers plus the final classifier and input encoding."""

    layers: list[LayerSpec]
    classifier: Classifier
    timesteps: int
    input_thresholds: tuple[int, ...]
    width: int = 8
    in_height: int = 0
    in_width: int = 0

    def schedule(self) -> ThresholdSchedule:
        return ThresholdSchedule(tuple(self.input_thresholds))

    def validate(self) -> None:
        if self.width not in SUPPORTED_WIDTHS:
            raise ModelValidationError(f"unsupported width {self.width}")
        if self.timesteps < 1:
            raise ModelValidationError("timesteps must be >= 1")
        if len(self.input_thresholds) != self.timesteps - 1:
            raise ModelValidationError(
                f"expected {self.timesteps - 1} input thresholds, "
                f"got {len(self.input_thresholds)}")
        try:
            self.schedule()
        except ConfigError as exc:
            raise ModelValidationError(str(exc)) from exc
        h, w, channels = self.in_height, self.in_width, 1
        for idx, layer in enumerate(self.layers):
            try:
                layer.validate(self.width)
            except ModelValidationError as exc:
                raise ModelValidationError(f"layer {idx}: {exc}") from exc
            if (layer.in_channels, layer.in_height, layer.in_width) != (channels, h, w):
                raise ModelValidationError(
                    f"layer {idx}: expects {layer.in_channels}x{layer.in_height}"
                    f"x{layer.in_width}, previous layer provides {channels}x{h}x{w}")
            channels, h, w = layer.out_channels, layer.out_height, layer.out_width
        expected = channels * h * w
        if self.classifier.in_features != expected:
            raise ModelValidationError(
                f"classifier expects {self.classifier.in_features} features, "
                f"network provides {expected}")
        if len(self.classifier.bias) != self.classifier.num_classes:
            raise ModelValidationError("classifier bias length mismatch")
        lo, hi = rails(self.width)
        for row in self.classifier.weights:
            if len(row) != self.classifier.in_features:
                raise ModelValidationError("ragged classifier weight matrix")
            for w_ in row:
                if not lo <= w_ <= hi:
                    raise ModelValidationError(f"classifier weight {w_} out of range")


def rotate180(kernel: list[list[int]]) -> list[list[int]]:
    return [list(reversed(row)) for row in reversed(kernel)]


def queue_order_events(grid: Grid) -> list[tuple[int, int]]:
    """Spiking coordinates of a grid in canonical queue order.

    The hardware drains events column 0..8, and within a column in the
    thresholding scan order (tile column outer, tile row inner). Derived
    here from plain mod/div arithmetic.
    """
    events = []
    for gi, row in enumerate(grid):
        for gj, spike in enumerate(row):
            if spike:
                events.append((3 * (gj % 3) + gi % 3, gj // 3, gi // 3, gi, gj))
    events.sort()
    return [(gi, gj) for (_, _, _, gi, gj) in events]


def scatter_events(potentials: Grid, input_grid: Grid, kernel: list[list[int]],
                   lo: int, hi: int) -> None:
    """Add a layer's contribution for one input channel, event by event.

    Every spike scatters the 180-degree-rotated kernel around itself
    with a saturating add per target cell; out-of-bounds targets are
    dropped (zero-padding semantics).
    """
    height = len(potentials)
    width = len(potentials[0])
    k = len(kernel)
    rot = rotate180(kernel)
    if k == 1:
        w = kernel[0][0]
        for gi, gj in queue_order_events(input_grid):
            potentials[gi][gj] = clamp(potentials[gi][gj] + w, lo, hi)
        return
    if k != 3:
        raise DimensionError(f"unsupported kernel size {k}")
    for gi, gj in queue_order_events(input_grid):
        for dgi in (-1, 0, 1):
            ti = gi + dgi
            if not 0 <= ti < height:
                continue
            rrow = rot[dgi + 1]
            prow = potentials[ti]
            for dgj in (-1, 0, 1):
                tj = gj + dgj
                if 0 <= tj < width:
                    prow[tj] = clamp(prow[tj] + rrow[dgj + 1], lo, hi)


def maxpool_or(grid: Grid) -> Grid:
    """OR-reduce non-overlapping 3x3 windows (ceil-divided output size)."""
    height = len(grid)
    width = len(grid[0])
    ph = -(-height // 3)
    pw = -(-width // 3)
    out = [[0] * pw for _ in range(ph)]
    for gi in range(height):
        row = grid[gi]
        orow = out[gi // 3]
        for gj in range(width):
            if row[gj]:
                orow[gj // 3] = 1
    return out


@dataclass
class DenseState:
    """Per-layer dense state: potentials and persistent spike indicators."""

    layer: LayerSpec
    width: int
    potentials: list[Grid] = field(default_factory=list)  # [c_out][h][w]
    spiked: list[Grid] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.potentials:
            self.reset()

    def reset(self) -> None:
        h, w = self.layer.in_height, self.layer.in_width
        self.potentials = [[[0] * w for _ in range(h)] for _ in range(self.layer.out_channels)]
        self.spiked = [[[0] * w for _ in range(h)] for _ in range(self.layer.out_channels)]


def dense_step(layer: LayerSpec, input_spikes: list[Grid], state: DenseState) -> list[Grid]:
    """Advance one timestep: convolve, add bias, threshold, optionally pool.

    Returns the (pooled) binary output grids, one per output channel.
    Spike indicators persist: a neuron that fired keeps firing (m-TTFS).
    """
    if len(input_spikes) != layer.in_channels:
        raise DimensionError(
            f"expected {layer.in_channels} input grids, got {len(input_spikes)}")
    for grid in input_spikes:
        if len(grid) != layer.in_height or len(grid[0]) != layer.in_width:
            raise DimensionError("input grid dimensions do not match layer")
    lo, hi = rails(state.width)
    outputs = []
    for c_out in range(layer.out_channels):
        pots = state.potentials[c_out]
        spiked = state.spiked[c_out]
        for c_in in range(layer.in_channels):
            scatter_events(pots, input_spikes[c_in], layer.kernels[c_out][c_in], lo, hi)
        bias = layer.bias[c_out]
        vt = layer.threshold
        fired = []
        for gi in range(layer.in_height):
            prow = pots[gi]
            srow = spiked[gi]
            frow = []
            for gj in range(layer.in_width):
                v = clamp(prow[gj] + bias, lo, hi)
                prow[gj] = v
                f = 1 if (v > vt or srow[gj]) else 0
                srow[gj] = f
                frow.append(f)
            fired.append(frow)
        outputs.append(maxpool_or(fired) if layer.maxpool else fired)
    return outputs


def classify_dense(net: NetworkSpec, spike_grids_per_t: list[list[Grid]]) -> tuple[int, list[int]]:
    """Accumulate FC potentials over all timesteps and take the argmax.

    Flattening order is channel-major, then row-major. Per timestep the
    weighted sum plus bias is computed in wide integers and accumulated
    with a single saturating add per class; ties resolve to the lowest
    class index.
    """
    lo, hi = rails(net.width)
    clf = net.classifier
    acc = [0] * clf.num_classes
    for grids in spike_grids_per_t:
        active = []
        offset = 0
        for grid in grids:
            for row in grid:
                for spike in row:
                    if spike:
                        active.append(offset)
                    offset += 1
        for cls in range(clf.num_classes):
            wrow = clf.weights[cls]
            total = clf.bias[cls] + sum(wrow[idx] for idx in active)
            acc[cls] = clamp(acc[cls] + total, lo, hi)
    label = max(range(len(acc)), key=lambda c: (acc[c], -c))
    return label, acc


def dense_run(net: NetworkSpec, frame: Grid) -> tuple[int, list[list[list[Grid]]]]:
    """Run the dense reference over all layers and timesteps.

    Returns (label, spikes) with spikes[layer][t][c_out] the binary
    output grid of that layer (after pooling, i.e. what feeds the next
    layer); these are the grids the event-driven engine must reproduce.
    """
    if len(frame) != net.in_height or any(len(r) != net.in_width for r in frame):
        raise DimensionError(
            f"frame must be {net.in_height}x{net.in_width}")
    inputs = [[g] for g in encode(frame, net.schedule())]
    all_spikes: list[list[list[Grid]]] = []
    for layer in net.layers:
        state = DenseState(layer, net.width)
        outputs: list[list[Grid]] = [[] for _ in range(net.timesteps)]
        # Channel-outer, timestep-inner matches the hardware schedule; the
        # per-channel states are disjoint so this equals timestep-outer order.
        for c_out in range(layer.out_channels):
            sub = LayerSpec(layer.kind, layer.in_channels, 1, layer.in_height,
                            layer.in_width, [layer.kernels[c_out]],
                            [layer.bias[c_out]], layer.threshold, layer.maxpool)
            sub_state = DenseState(sub, net.width)
            for t in range(net.timesteps):
                out = dense_step(sub, inputs[t], sub_state)
                outputs[t].append(out[0])
        inputs = outputs
        all_spikes.append(outputs)
    label, _ = classify_dense(net, all_spikes[-1] if net.layers else inputs)
    return label, all_spikes
