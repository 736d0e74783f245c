"""Event-driven sparse convolutional SNN accelerator simulator.

Cycle-level model of a queue-based spiking CNN accelerator (interlaced
membrane-potential memories, address-event queues, pipelined convolution
and thresholding units) together with a dense frame-based reference
engine, model/input file handling, and run statistics.
"""

from spikesim.fixedpoint import SatFixed, sat_add, compare_gt
from spikesim.model import LayerSpec, NetworkSpec, dense_run
from spikesim.scheduler import RunPlan, run_network

__all__ = [
    "SatFixed",
    "sat_add",
    "compare_gt",
    "LayerSpec",
    "NetworkSpec",
    "dense_run",
    "RunPlan",
    "run_network",
]

__version__ = "0.1.0"
