"""Cell-probe accounting: every instrumented read names the w-bit cells it touches."""


class ProbeCounter:
    """Tallies w-bit cell reads.

    Cells are identified by ``(region, index)`` so that different memory areas
    of one structure never alias.  ``total`` counts every read, ``distinct``
    counts different cells since the last :meth:`reset`.
    """

    def __init__(self, w=64):
        self.w = w
        self.total = 0
        self._cells = set()

    def reset(self):
        self.total = 0
        self._cells = set()

    @property
    def distinct(self):
        return len(self._cells)

    def touch(self, region, index):
        self.total += 1
        self._cells.add((region, index))

    def touch_bits(self, region, off, k):
        """Record a read of k bits starting at bit offset ``off``."""
        if k <= 0:
            return
        w = self.w
        for c in range(off // w, (off + k - 1) // w + 1):
            self.touch(region, c)

    def touch_many(self, cells):
        for cell in cells:
            self.total += 1
            self._cells.add(cell)

    def snapshot(self):
        return {"total": self.total, "distinct": self.distinct, "w": self.w}


class NullCounter:
    """Drop-in counter that records nothing."""

    w = 64
    total = 0
    distinct = 0

    def reset(self):
        pass

    def touch(self, region, index):
        pass

    def touch_bits(self, region, off, k):
        pass

    def touch_many(self, cells):
        pass


NULL = NullCounter()
