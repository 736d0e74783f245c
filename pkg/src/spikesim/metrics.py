"""Run statistics: sparsity, cycle breakdowns, PE utilization, reports.

PE utilization counts only convolution-unit cycles (the 9 adders);
thresholding-scan cycles are reported separately. All cycle totals obey
the accounting identity total = valid events + wasted reads + stalls +
wind-up constants.
"""

import json
from dataclasses import dataclass, field

from spikesim.errors import DimensionError


def sparsity(events: int, neurons: int, timesteps: int) -> float:
    """1 - events / (neurons * timesteps)."""
    if neurons <= 0 or timesteps <= 0:
        raise DimensionError("sparsity needs positive neuron and timestep counts")
    return 1.0 - events / (neurons * timesteps)


@dataclass
class LayerStats:
    """Aggregated statistics for one layer across all units."""

    layer: int
    input_events: int = 0
    input_neurons: int = 0
    timesteps: int = 1
    conv_valid_cycles: int = 0
    conv_wasted_reads: int = 0
    conv_stalls: int = 0
    conv_forwards: int = 0
    conv_windup: int = 0
    conv_overflows: int = 0
    thresh_tiles: int = 0
    thresh_windup: int = 0
    thresh_overflows: int = 0
    output_events: int = 0
    makespan_cycles: int = 0

    @property
    def conv_total_cycles(self) -> int:
        return (self.conv_valid_cycles + self.conv_wasted_reads
                + self.conv_stalls + self.conv_windup)

    @property
    def thresh_total_cycles(self) -> int:
        return self.thresh_tiles + self.thresh_windup

    @property
    def input_sparsity(self) -> float:
        return sparsity(self.input_events, self.input_neurons, self.timesteps)

    @property
    def pe_utilization(self) -> float:
        total = self.conv_total_cycles
        if total == 0:
            raise DimensionError("utilization undefined for a zero-cycle layer")
        return self.conv_valid_cycles / total

    def as_dict(self) -> dict:
        return {
            "layer": self.layer,
            "input_events": self.input_events,
            "input_neurons": self.input_neurons,
            "timesteps": self.timesteps,
            "input_sparsity": round(self.input_sparsity, 6),
            "conv_valid_cycles": self.conv_valid_cycles,
            "conv_wasted_reads": self.conv_wasted_reads,
            "conv_stalls": self.conv_stalls,
            "conv_forwards": self.conv_forwards,
            "conv_windup": self.conv_windup,
            "conv_total_cycles": self.conv_total_cycles,
            "conv_overflows": self.conv_overflows,
            "thresh_total_cycles": self.thresh_total_cycles,
            "thresh_overflows": self.thresh_overflows,
            "output_events": self.output_events,
            "pe_utilization": round(self.pe_utilization, 6),
            "makespan_cycles": self.makespan_cycles,
        }


@dataclass
class NetworkStats:
    """Whole-network statistics for one frame."""

    layers: list[LayerStats] = field(default_factory=list)
    classifier_cycles: int = 0
    clock_mhz: float | None = None

    @property
    def total_cycles(self) -> int:
        return sum(l.conv_total_cycles + l.thresh_total_cycles for l in self.layers) \
            + self.classifier_cycles

    @property
    def makespan_cycles(self) -> int:
        return sum(l.makespan_cycles for l in self.layers) + self.classifier_cycles

    @property
    def estimated_fps(self) -> float | None:
        if self.clock_mhz is None or self.makespan_cycles == 0:
            return None
        return self.clock_mhz * 1e6 / self.makespan_cycles

    def as_dict(self) -> dict:
        d = {
            "layers": [l.as_dict() for l in self.layers],
            "total_cycles": self.total_cycles,
            "makespan_cycles": self.makespan_cycles,
        }
        if self.clock_mhz is not None:
            d["clock_mhz"] = self.clock_mhz
            d["estimated_fps"] = round(self.estimated_fps, 3)
        return d


def report(stats: NetworkStats, fmt: str = "text") -> str:
    """Render a deterministic report; text and json carry the same numbers."""
    data = stats.as_dict()
    if fmt == "json":
        return json.dumps(data, indent=2, sort_keys=True)
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = []
    for layer in data["layers"]:
        lines.append(
            f"layer {layer['layer']}: "
            f"in_events={layer['input_events']} "
            f"sparsity={layer['input_sparsity']:.4f} "
            f"conv_cycles={layer['conv_total_cycles']} "
            f"(valid={layer['conv_valid_cycles']} wasted={layer['conv_wasted_reads']} "
            f"stalls={layer['conv_stalls']} windup={layer['conv_windup']}) "
            f"thresh_cycles={layer['thresh_total_cycles']} "
            f"out_events={layer['output_events']} "
            f"pe_util={layer['pe_utilization']:.4f} "
            f"makespan={layer['makespan_cycles']}")
    lines.append(f"total_cycles={data['total_cycles']} makespan={data['makespan_cycles']}")
    if "estimated_fps" in data:
        lines.append(f"clock_mhz={data['clock_mhz']} estimated_fps={data['estimated_fps']}")
    return "\n".join(lines)
