"""Counter-based splittable random streams.

Every stochastic routine takes an RngStream; a stream is identified by the
master seed plus a tuple of integer ids (experiment, trial, stage, ...), so
trial k's randomness never depends on how many trials ran before it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    path: tuple[int, ...] = ()

    def child(self, *ids: int) -> "RngStream":
        return RngStream(self.master_seed, self.path + tuple(int(i) for i in ids))

    def _seedseq(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=self.master_seed, spawn_key=self.path)

    def generator(self) -> np.random.Generator:
        """Philox generator; counter-based, reproducible for a fixed (seed, path)."""
        return np.random.Generator(np.random.Philox(self._seedseq()))

    def kernel_seed(self) -> int:
        """A 63-bit seed for jitted kernels, derived from the same stream
        identity (kept under 2^63 so scalar args never overflow int64)."""
        return int(self._seedseq().generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
