"""Ensemble experiments: GDE processes I and II, GOE power-spectrum runs.

Process I unfolds one long GDE spectrum once with the exact Gaussian
cumulative and cuts it into contiguous blocks.  Process II unfolds every
short spectrum on its own, which pins delta_N near zero and turns the linear
<delta_n^2> into a parabola.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ensembles import EnsembleConfig, ensemble_block, sample_gde
from .parallel import DEFAULT_CHUNK, chunk_ranges, map_ordered
from .stats import (
    DeltaSquaredAccumulator,
    DeltaSquaredEstimate,
    PowerAccumulator,
    PowerSpectrumEstimate,
    RatioStats,
    delta_array,
    power_spectrum,
    merge_ratio_stats,
    ratio_stats,
)
from .unfolding import gaussian_cumulative, reunfold_array, semicircle_cumulative, spacings_array


@dataclass
class EnsembleRun:
    power: PowerSpectrumEstimate
    delta2: DeltaSquaredEstimate
    samples: Optional[np.ndarray] = None  # per-realization P_k at collect_k
    collect_k: Optional[int] = None
    ratios: Optional[RatioStats] = None


def _accumulate(d, collect_k=None):
    P = power_spectrum(d)
    pacc = PowerAccumulator(d.shape[-1]).add(P)
    dacc = DeltaSquaredAccumulator(d.shape[-1]).add(d**2)
    samples = P[:, collect_k - 1].copy() if collect_k else None
    return pacc, dacc, samples


def _merge(parts):
    pacc, dacc, samples = None, None, []
    for p, d, s in parts:
        pacc = p if pacc is None else pacc.merge(p)
        dacc = d if dacc is None else dacc.merge(d)
        if s is not None:
            samples.append(s)
    return pacc, dacc, (np.concatenate(samples) if samples else None)


def _process_two_chunk(n, seed, start, stop, reunfold):
    E = ensemble_block(EnsembleConfig("GDE", n, stop, seed), start, stop)
    s = spacings_array(gaussian_cumulative(E, n))
    if reunfold:
        s = reunfold_array(s)
    d = delta_array(s)
    if reunfold:
        d[:, -1] = 0.0
    return _accumulate(d)


def gde_process_two(n: int, realizations: int, seed: int, reunfold: bool = False,
                    workers=None, chunk: int = DEFAULT_CHUNK) -> EnsembleRun:
    """Per-spectrum exact Gaussian unfolding of ``realizations`` GDE spectra."""
    tasks = [(n, seed, a, b, reunfold) for a, b in chunk_ranges(realizations, chunk)]
    pacc, dacc, _ = _merge(map_ordered(_process_two_chunk, tasks, workers))
    return EnsembleRun(pacc.estimate(), dacc.estimate())


def gde_process_one(block_size: int, blocks: int, seed: int, chunk: int = 1000) -> EnsembleRun:
    """One spectrum of block_size*blocks levels, unfolded once, then partitioned."""
    total = block_size * blocks
    E = sample_gde(total, (seed, "process1")).levels
    eps = gaussian_cumulative(E, total).reshape(blocks, block_size)
    del E
    parts = []
    for a, b in chunk_ranges(blocks, chunk):
        parts.append(_accumulate(delta_array(spacings_array(eps[a:b]))))
    pacc, dacc, _ = _merge(parts)
    return EnsembleRun(pacc.estimate(), dacc.estimate())


def _goe_chunk(n, seed, start, stop, trim, method, collect_k, ratios):
    E = ensemble_block(EnsembleConfig("GOE", n, stop, seed, goe_method=method), start, stop)
    ratio = ratio_stats(list(E)) if ratios else None
    eps = semicircle_cumulative(E, n)
    if trim:
        eps = eps[:, trim:-trim]
    d = delta_array(spacings_array(eps))
    return _accumulate(d, collect_k) + (ratio,)


def goe_power_run(n: int, realizations: int, seed: int, trim: int = 1, method: str = "dense",
                  collect_k: Optional[int] = None, workers=None, chunk: int = DEFAULT_CHUNK,
                  start: int = 0, ratios: bool = False) -> EnsembleRun:
    """GOE spectra, semicircle-unfolded, ``trim`` levels dropped per edge.

    Realizations ``start .. start+realizations-1`` of stream ``seed``.
    """
    tasks = [(n, seed, start + a, start + b, trim, method, collect_k, ratios)
             for a, b in chunk_ranges(realizations, chunk)]
    parts = map_ordered(_goe_chunk, tasks, workers)
    pacc, dacc, samples = _merge([p[:3] for p in parts])
    ratio = merge_ratio_stats([p[3] for p in parts]) if ratios else None
    return EnsembleRun(pacc.estimate(), dacc.estimate(), samples, collect_k, ratio)
