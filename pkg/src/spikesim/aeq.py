"""Address Event Queue bank.

Per (channel, timestep) there are 9 interlaced queue columns that the
thresholding unit fills in parallel (one write port per column) and the
convolution unit drains sequentially, column 0 through 8. Each entry
carries a valid bit and an end-of-queue bit; an empty column costs one
wasted read cycle for its invalid terminator entry.
"""

from spikesim.errors import QueueCapacityError, QueueStateError


class QueueEntry:
    """One queue slot: tile address plus valid / end-of-queue flags."""

    __slots__ = ("i", "j", "valid", "end_of_queue")

    def __init__(self, i: int, j: int, valid: bool, end_of_queue: bool = False):
        self.i = i
        self.j = j
        self.valid = valid
        self.end_of_queue = end_of_queue

    def __repr__(self) -> str:
        return f"QueueEntry(i={self.i}, j={self.j}, valid={self.valid}, eoq={self.end_of_queue})"


class AeqBank:
    """Interlaced event queues keyed by (channel, timestep).

    A key has a single writer phase (write_parallel calls, then
    finalize) followed by any number of reader passes.
    """

    def __init__(self, column_capacity: int):
        if column_capacity < 1:
            raise QueueStateError("column capacity must be positive")
        self.column_capacity = column_capacity
        self._queues: dict[tuple[int, int], list[list[QueueEntry]]] = {}
        self._finalized: set[tuple[int, int]] = set()
        self._cursors: dict[tuple[int, int], list[int]] = {}

    def _columns(self, channel: int, t: int) -> list[list[QueueEntry]]:
        return self._queues.setdefault((channel, t), [[] for _ in range(9)])

    def write_parallel(self, channel: int, t: int, events: list[tuple[int, int] | None]) -> None:
        """Append at most one event per column, all in the same cycle."""
        if len(events) != 9:
            raise QueueStateError("write_parallel expects one slot per column")
        if (channel, t) in self._finalized:
            raise QueueStateError(f"queue (c={channel}, t={t}) already finalized")
        columns = self._columns(channel, t)
        for s, ev in enumerate(events):
            if ev is None:
                continue
            if len(columns[s]) >= self.column_capacity:
                raise QueueCapacityError(
                    f"column {s} of queue (c={channel}, t={t}) exceeds capacity "
                    f"{self.column_capacity}")
            columns[s].append(QueueEntry(ev[0], ev[1], True))

    def finalize(self, channel: int, t: int) -> None:
        """Mark end-of-queue on every column; empty columns get a terminator."""
        key = (channel, t)
        if key in self._finalized:
            raise QueueStateError(f"queue (c={channel}, t={t}) finalized twice")
        for column in self._columns(channel, t):
            if column:
                column[-1].end_of_queue = True
            else:
                column.append(QueueEntry(0, 0, False, True))
        self._finalized.add(key)

    def _require_finalized(self, channel: int, t: int) -> None:
        if (channel, t) not in self._finalized:
            raise QueueStateError(f"queue (c={channel}, t={t}) read before finalize")

    def reset_read(self, channel: int, t: int) -> None:
        self._require_finalized(channel, t)
        self._cursors[(channel, t)] = [0, 0]

    def read_exhausted(self, channel: int, t: int) -> bool:
        cursor = self._cursors.get((channel, t))
        if cursor is None:
            return False
        return cursor[0] > 8

    def read_next(self, channel: int, t: int) -> tuple[QueueEntry, int] | None:
        """Deliver the next entry (one cycle each); None once drained."""
        self._require_finalized(channel, t)
        cursor = self._cursors.setdefault((channel, t), [0, 0])
        col, idx = cursor
        if col > 8:
            return None
        entry = self._queues[(channel, t)][col][idx]
        if entry.end_of_queue:
            cursor[0] = col + 1
            cursor[1] = 0
        else:
            cursor[1] = idx + 1
        return entry, col

    def events(self, channel: int, t: int) -> list[tuple[int, int, int]]:
        """Valid events as (s, i, j) in read (column-major FIFO) order."""
        self._require_finalized(channel, t)
        out = []
        for s, column in enumerate(self._queues[(channel, t)]):
            for entry in column:
                if entry.valid:
                    out.append((s, entry.i, entry.j))
        return out

    def valid_count(self, channel: int, t: int) -> int:
        return len(self.events(channel, t))

    def empty_columns(self, channel: int, t: int) -> int:
        self._require_finalized(channel, t)
        return sum(1 for col in self._queues[(channel, t)]
                   if len(col) == 1 and not col[0].valid)

    def keys(self) -> list[tuple[int, int]]:
        return sorted(self._queues)

    def dump(self) -> str:
        """Text dump for golden-file tests, one line per entry."""
        lines = []
        for channel, t in self.keys():
            for s, column in enumerate(self._queues[(channel, t)]):
                for entry in column:
                    lines.append(
                        f"c={channel} t={t} s={s} i={entry.i} j={entry.j} "
                        f"valid={int(entry.valid)} eoq={int(entry.end_of_queue)}")
        return "\n".join(lines)
