"""Cross-engine equivalence checking.

Runs a frame through both the event-driven simulator and the dense
reference engine and compares every (layer, channel, timestep) spike set
plus the predicted label. Any difference is a simulator bug.
"""

from dataclasses import dataclass, field

from spikesim.model import Grid, NetworkSpec, dense_run
from spikesim.scheduler import RunPlan, RunResult, run_network


def grid_to_set(grid: Grid) -> set[tuple[int, int]]:
    return {(gi, gj) for gi, row in enumerate(grid) for gj, v in enumerate(row) if v}


@dataclass
class VerifyResult:
    event_label: int
    dense_label: int
    mismatches: list[str] = field(default_factory=list)
    run: RunResult | None = None

    @property
    def ok(self) -> bool:
        return not self.mismatches and self.event_label == self.dense_label


def verify_against_dense(net: NetworkSpec, frame: Grid,
                         plan: RunPlan | None = None) -> VerifyResult:
    """Compare the event-driven run against the dense oracle, exactly."""
    run = run_network(net, frame, plan)
    dense_label, dense_spikes = dense_run(net, frame)
    result = VerifyResult(run.label, dense_label, run=run)
    for layer_idx, per_t in enumerate(dense_spikes):
        for t, grids in enumerate(per_t):
            for c, grid in enumerate(grids):
                expected = grid_to_set(grid)
                got = run.spikes[layer_idx][t][c]
                if got != expected:
                    extra = sorted(got - expected)[:4]
                    missing = sorted(expected - got)[:4]
                    result.mismatches.append(
                        f"layer={layer_idx} t={t} c={c}: "
                        f"+{extra} -{missing} "
                        f"({len(got)} vs {len(expected)} events)")
    if run.label != dense_label:
        result.mismatches.append(
            f"label mismatch: event={run.label} dense={dense_label}")
    return result
