"""Monte Carlo pulse-train simulator for the two-detector stage.

Every click probability in this package has a closed form; the
simulator exists to check them mechanically.  It samples the physical
story photon by photon: per pulse the source emits its photons, each
photon independently picks a beamsplitter output (probability 1/2) and
then fires that channel's detector with the channel efficiency; stray
background adds Poissonian clicks per channel (means gamma * eta_i / 2,
i.e. background photons thinned by routing and detection); each
detector reports at most one click per pulse.

Determinism
-----------
Pulses are processed in fixed-size blocks.  Block k draws from its own
counter-based stream, Philox(seed) jumped k times, and the four tallies
are summed over blocks — so results depend only on (config), never on
scheduling, worker count or kernel flavor.  The same pre-drawn arrays
feed either kernel backend (see _kernels), keeping the two bit-equal.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import (
    ClickCounts,
    Coherent,
    DetectionParams,
    EmitterWithBackground,
    IdealEmitters,
    RangeError,
    SourceModel,
)

_DEFAULT_BLOCK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    """One reproducible simulation run: what emits, how it is
    detected, and the stream identity (seed, block size)."""

    source: SourceModel
    params: DetectionParams
    seed: int
    block_size: int = _DEFAULT_BLOCK

    def __post_init__(self) -> None:
        if self.seed < 0 or self.seed != int(self.seed) or self.seed >= 1 << 64:
            raise RangeError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.block_size < 1 or self.block_size != int(self.block_size):
            raise RangeError(f"block_size must be a positive integer, got {self.block_size!r}")


def _source_plan(config: SimConfig) -> tuple[int, float, float]:
    """(photons per pulse, Poisson mean per pulse, background rate).

    Fixed sources set the first, coherent the second.  IdealEmitters is
    background-free by definition; the other sources see the
    calibration's gamma.
    """
    src = config.source
    if isinstance(src, IdealEmitters):
        return src.s, 0.0, 0.0
    if isinstance(src, EmitterWithBackground):
        return 1, 0.0, config.params.gamma
    if isinstance(src, Coherent):
        return 0, src.mu, config.params.gamma
    raise TypeError(f"unknown source model: {src!r}")


def _block_clicks(config: SimConfig, index: int, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Click indicators for one block of pulses.  Draw order is fixed
    (background A, background B, photon routes, photon detections) so
    that both kernel backends see identical arrays."""
    p = config.params
    s_fixed, mu, gamma = _source_plan(config)
    rng = np.random.Generator(np.random.Philox(key=config.seed).jumped(index))

    bg_a = rng.poisson(gamma * p.eta1 / 2.0, size)
    bg_b = rng.poisson(gamma * p.eta2 / 2.0, size)
    click_a = np.empty(size, dtype=np.bool_)
    click_b = np.empty(size, dtype=np.bool_)
    if s_fixed > 0:
        routes = rng.random((size, s_fixed))
        detects = rng.random((size, s_fixed))
        _kernels.fixed_clicks(routes, detects, bg_a, bg_b, p.eta1, p.eta2, click_a, click_b)
    else:
        counts = rng.poisson(mu, size)
        total = int(counts.sum())
        routes = rng.random(total)
        detects = rng.random(total)
        _kernels.poisson_clicks(
            counts, routes, detects, bg_a, bg_b, p.eta1, p.eta2, click_a, click_b
        )
    return click_a, click_b


def _blocks(config: SimConfig) -> list[tuple[int, int]]:
    cycles, block = config.params.cycles, config.block_size
    return [(i, min(block, cycles - i * block)) for i in range(math.ceil(cycles / block))]


def simulate_click_arrays(config: SimConfig, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Per-pulse click indicators (channel A, channel B) over all
    cycles, concatenated in block order."""
    blocks = _blocks(config)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _block_clicks(config, *b), blocks))
    else:
        parts = [_block_clicks(config, i, size) for i, size in blocks]
    return (
        np.concatenate([a for a, _ in parts]),
        np.concatenate([b for _, b in parts]),
    )


def counts_from_click_arrays(click_a: np.ndarray, click_b: np.ndarray) -> ClickCounts:
    """Tally the four per-pulse patterns from click indicators."""
    n_all = int(click_a.size)
    n_11 = int(np.count_nonzero(click_a & click_b))
    n_10 = int(np.count_nonzero(click_a)) - n_11
    n_01 = int(np.count_nonzero(click_b)) - n_11
    return ClickCounts(
        n_all=n_all,
        n_00=n_all - n_10 - n_01 - n_11,
        n_10=n_10,
        n_01=n_01,
        n_11=n_11,
    )


def simulate_pulses(config: SimConfig, workers: int = 1) -> ClickCounts:
    """Run the pulse train and tally click patterns.

    Deterministic in config alone: any workers value and either kernel
    backend give identical counts.
    """
    blocks = _blocks(config)

    def tally(block: tuple[int, int]) -> tuple[int, int, int]:
        a, b = _block_clicks(config, *block)
        n11 = int(np.count_nonzero(a & b))
        return int(np.count_nonzero(a)) - n11, int(np.count_nonzero(b)) - n11, n11

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_block = list(pool.map(tally, blocks))
    else:
        per_block = [tally(block) for block in blocks]
    n_10 = sum(t[0] for t in per_block)
    n_01 = sum(t[1] for t in per_block)
    n_11 = sum(t[2] for t in per_block)
    n_all = config.params.cycles
    return ClickCounts(
        n_all=n_all,
        n_00=n_all - n_10 - n_01 - n_11,
        n_10=n_10,
        n_01=n_01,
        n_11=n_11,
    )
