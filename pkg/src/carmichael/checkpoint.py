"""Line-oriented checkpoint file for resumable enumeration runs.

Layout::

    # carmichael-checkpoint bound=10000 d_min=3 ...
    DONE 3 0 561/pair-d3
    DONE 3 11
    DONE-LP 100 1621 ...

``DONE <p1> <p2>`` marks a finished principal unit (``p2 = 0`` is the
depth-1 work for p1), ``DONE-LP <lo> <hi>`` a finished slice of the large-prime
scan.  Numbers the unit produced follow as ``<N>/<strategy>`` tokens.
"""

from __future__ import annotations

import os


class CheckpointMismatch(ValueError):
    """Checkpoint was written by a run with a different configuration."""


class Checkpoint:
    def __init__(self, path: str, config: dict):
        self.path = path
        self.header = "# carmichael-checkpoint " + " ".join(f"{k}={v}" for k, v in config.items())
        self.done: dict[str, list[tuple[int, str]]] = {}
        fresh = True
        if os.path.exists(path) and os.path.getsize(path):
            fresh = False
            self._load()
        self.fh = open(path, "a", encoding="utf-8", newline="\n")
        if fresh:
            self.fh.write(self.header + "\n")
            self.fh.flush()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            text = fh.read()
        keep = text if text.endswith("\n") else text[: text.rfind("\n") + 1]
        lines = keep.splitlines()
        if not lines or lines[0] != self.header:
            raise CheckpointMismatch(f"{self.path}: header does not match this configuration")
        for line in lines[1:]:
            head, *tokens = line.split(" : ", 1)
            recs = []
            for tok in (tokens[0].split() if tokens else []):
                n, s = tok.split("/", 1)
                recs.append((int(n), s))
            self.done[head] = recs
        if keep != text:
            # drop a record cut short by an interrupted write
            with open(self.path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(keep)

    @staticmethod
    def key(unit: tuple) -> str:
        kind, a, b = unit
        return f"DONE {a} {b}" if kind == "P" else f"DONE-LP {a} {b}"

    def record(self, unit: tuple, recs: list[tuple[int, str]]) -> None:
        line = self.key(unit)
        if recs:
            line += " : " + " ".join(f"{n}/{s}" for n, s in recs)
        self.fh.write(line + "\n")
        self.fh.flush()

    def close(self) -> None:
        self.fh.close()
