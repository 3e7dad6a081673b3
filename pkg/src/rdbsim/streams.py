"""Counter-based random substreams.

Every Monte Carlo trial owns a substream addressed by
``(master_seed, experiment, trial)``. The substream is a Philox generator
whose 128-bit key is a hash of ``(master_seed, experiment)`` and whose
256-bit counter has the trial index and a purpose tag in its two high
words. Draws advance only the low words, so a trial's samples never depend
on how many other trials were drawn, or in which process.

Within a trial, independent purposes (user channels, beam offsets, ...)
get disjoint counter ranges. Two schemes evaluated on the same
``RandomStream`` therefore see identical channels and identical beam
offsets. That coupling is what makes row-wise dominance checks meaningful.
"""

from __future__ import annotations

import functools
import hashlib
from dataclasses import dataclass

import numpy as np

__all__ = ["RandomStream", "CHANNEL", "BEAM", "trial_generators"]

CHANNEL = "channel"
BEAM = "beam"

_MASK64 = (1 << 64) - 1


@functools.lru_cache(maxsize=256)
def _digest64(text, n):
    h = hashlib.blake2b(text.encode("utf-8"), digest_size=8 * n).digest()
    return tuple(int.from_bytes(h[8 * i : 8 * i + 8], "little") for i in range(n))


@dataclass(frozen=True)
class RandomStream:
    """Immutable handle on one trial's substream.

    Parameters
    ----------
    master_seed : int
        Seed of the whole run.
    experiment : str
        Free-form label. Runs that should share channel draws (for example
        all schemes and grid points of one sweep) use the same label.
    trial : int
        Non-negative trial (or block) index.
    """

    master_seed: int
    experiment: str = ""
    trial: int = 0

    def __post_init__(self):
        if self.trial < 0:
            raise ValueError("trial index must be non-negative")

    @property
    def key(self):
        return np.array(_digest64(f"rdbsim:{int(self.master_seed)}:{self.experiment}", 2), dtype=np.uint64)

    def _counter(self, purpose):
        return np.array([0, 0, _digest64(purpose, 1)[0], int(self.trial) & _MASK64], dtype=np.uint64)

    def generator(self, purpose=CHANNEL, reuse=None):
        """Generator positioned at the start of ``purpose``'s range.

        Calling this twice with the same purpose replays the same draws.
        Passing a Philox-backed ``reuse`` generator repositions that
        generator in place instead of building a new one, which is several
        times cheaper in tight loops. The draws are identical either way.
        """
        if reuse is None:
            return np.random.Generator(np.random.Philox(counter=self._counter(purpose), key=self.key))
        _reposition(reuse, self.key, self._counter(purpose))
        return reuse

    def with_trial(self, trial):
        return RandomStream(self.master_seed, self.experiment, trial)


def _reposition(gen, key, counter):
    gen.bit_generator.state = {
        "bit_generator": "Philox",
        "state": {"counter": counter, "key": key},
        "buffer": np.zeros(4, dtype=np.uint64),
        "buffer_pos": 4,
        "has_uint32": 0,
        "uinteger": 0,
    }


def trial_generators(master_seed, experiment, trials, purpose=CHANNEL):
    """Yield one generator per trial index, each positioned as ``RandomStream(...).generator(purpose)``.

    The same generator object is repositioned and yielded every time, so
    each one must be consumed before advancing the iterator.
    """
    base = RandomStream(master_seed, experiment)
    key, counter = base.key, base._counter(purpose)
    gen = np.random.Generator(np.random.Philox(counter=counter, key=key))
    for t in trials:
        if t < 0:
            raise ValueError("trial index must be non-negative")
        counter = counter.copy()
        counter[3] = int(t) & _MASK64
        _reposition(gen, key, counter)
        yield gen
