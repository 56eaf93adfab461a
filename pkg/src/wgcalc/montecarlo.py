"""
Haar sampling and Monte Carlo estimators.

Randomness is organised in fixed-size blocks. Block ``b`` of stream ``s``
draws from ``Philox(SeedSequence(seed, spawn_key=(s, b)))``, so every sample
is a function of ``(seed, stream, index)`` alone. Shards only decide which
worker computes which blocks; results are concatenated in block order and
reduced once, which makes aggregates identical for any shard count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channels.models import ChannelModel
from .channels.stinespring import (
    conjugate_factor, generalized_factor, gram_spectrum, hayden_overlap,
    output_from_factor, output_spectrum, power_traces, product_factor,
)
from .weingarten import MonomialSpec

__all__ = [
    "BLOCK", "RngConfig", "McEstimate", "block_rng", "sample_haar", "run_blocks",
    "estimate", "mc_monomial_integral", "mc_channel_moment", "mc_channel_moments",
    "channel_factors",
    "mc_spectrum", "SpectrumStats", "mc_hayden", "mc_variance_decay",
    "VarianceDecay", "within_sigma", "mc_diagram_expectation",
]

BLOCK = 256


@dataclass(frozen=True)
class RngConfig:
    seed: int = 0
    stream: int = 0
    shards: int = 1

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.shards < 1:
            raise ValueError("shards must be positive")

    def child(self, stream: int) -> RngConfig:
        return RngConfig(self.seed, stream, self.shards)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int

    def to_json(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "samples": self.samples}


def within_sigma(est: McEstimate, exact, sigmas: float = 4.0, floor: float = 1e-12) -> bool:
    """``|mean - exact| <= sigmas * stderr``, with an absolute floor for zero-variance estimates."""
    return abs(est.mean - float(exact)) <= sigmas * est.stderr + floor


def block_rng(cfg: RngConfig, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(cfg.seed, spawn_key=(cfg.stream, block))
    return np.random.Generator(np.random.Philox(ss))


def sample_haar(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """
    Haar unitaries of dimension ``d``: QR of a complex Ginibre matrix with the
    phases of ``diag(R)`` moved into ``Q``.
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    shape = (d, d) if size is None else (size, d, d)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phase = diag / np.abs(diag)
    return q * phase[..., None, :]


def run_blocks(fn: Callable[[np.random.Generator, int], np.ndarray], samples: int,
               cfg: RngConfig) -> np.ndarray:
    """
    Evaluate ``fn(rng, count)`` on every block and stack the per-sample rows.

    ``fn`` must return an array whose first axis has length ``count``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    nblocks = -(-samples // BLOCK)
    sizes = [min(BLOCK, samples - b * BLOCK) for b in range(nblocks)]

    def work(b: int) -> np.ndarray:
        return np.asarray(fn(block_rng(cfg, b), sizes[b]))

    if cfg.shards == 1 or nblocks == 1:
        parts = [work(b) for b in range(nblocks)]
    else:
        # contiguous block ranges per shard; order of the output is block order
        bounds = np.linspace(0, nblocks, min(cfg.shards, nblocks) + 1).astype(int)

        def shard(i: int) -> list[np.ndarray]:
            return [work(b) for b in range(bounds[i], bounds[i + 1])]

        with ThreadPoolExecutor(max_workers=len(bounds) - 1) as pool:
            parts = [x for chunk in pool.map(shard, range(len(bounds) - 1)) for x in chunk]
    return np.concatenate(parts, axis=0)


def estimate(values: np.ndarray) -> McEstimate:
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n < 2:
        raise ValueError("an estimate needs at least two samples")
    return McEstimate(float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(n)), n)


# ---------------------------------------------------------------------------
# monomials
# ---------------------------------------------------------------------------

def mc_monomial_integral(n: int, spec: MonomialSpec, samples: int,
                         cfg: RngConfig = RngConfig()) -> tuple[McEstimate, McEstimate]:
    """Estimates of the real and imaginary parts of the monomial integral."""
    spec.check(n)
    if samples < 100:
        raise ValueError("use at least 100 samples")
    i = np.array(spec.i, dtype=int) - 1
    j = np.array(spec.j, dtype=int) - 1
    ic = np.array(spec.i_conj, dtype=int) - 1
    jc = np.array(spec.j_conj, dtype=int) - 1

    def fn(rng, count):
        u = sample_haar(n, rng, count)
        val = np.prod(u[:, i, j], axis=1) * np.prod(u[:, ic, jc].conj(), axis=1)
        return val

    vals = run_blocks(fn, samples, cfg)
    return estimate(vals.real), estimate(vals.imag)


# ---------------------------------------------------------------------------
# channels
# ---------------------------------------------------------------------------

def channel_factors(model: ChannelModel, rng: np.random.Generator, count: int) -> np.ndarray:
    """Batch of factors ``F`` with ``Z = F F^*`` for product models."""
    n, k = model.n, model.k
    u = sample_haar(n * k, rng, count)
    if model.kind == "independent":
        v = sample_haar(n * k, rng, count)
        return product_factor(u, v, n, k)
    if model.kind == "conjugate":
        return conjugate_factor(u, n, k)
    if model.kind == "generalized":
        return generalized_factor(u, n, k, model.t)
    raise ValueError(f"model {model.kind!r} has no product output")


def _rotated_spectra(model: ChannelModel, rng, count) -> np.ndarray:
    n, k = model.n, model.k
    u = sample_haar(n * k, rng, count)
    x = model.input_matrix()
    big = (u @ x @ np.swapaxes(u.conj(), -1, -2)).reshape(count, n, k, n, k)
    y = np.einsum("macbc->mab", big)
    y = (y + np.swapaxes(y.conj(), -1, -2)) / 2
    return np.linalg.eigvalsh(y)[..., ::-1]


def _spectra(model: ChannelModel, rng, count) -> np.ndarray:
    if model.kind == "rotated":
        return _rotated_spectra(model, rng, count)
    return gram_spectrum(channel_factors(model, rng, count))


def mc_channel_moment(model: ChannelModel, p: int, samples: int,
                      cfg: RngConfig = RngConfig()) -> McEstimate:
    """Estimate of ``E[tr(Z^p)]``."""
    vals = run_blocks(lambda rng, c: power_traces(_spectra(model, rng, c), p), samples, cfg)
    return estimate(vals)


@dataclass(frozen=True)
class SpectrumStats:
    mean: np.ndarray
    std: np.ndarray
    samples: int
    max_nonzero: int
    min_eigenvalue: float

    def stderr(self) -> np.ndarray:
        return self.std / math.sqrt(self.samples)


def mc_spectrum(model: ChannelModel, samples: int, cfg: RngConfig = RngConfig(),
                full: bool = False, threshold: float = 1e-9) -> SpectrumStats:
    """
    Per-rank statistics of the ordered eigenvalues.

    With ``full=True`` the whole output matrix is diagonalized, so the count of
    nonzero eigenvalues is measured rather than implied by the factor shape.
    """
    def fn(rng, count):
        if full and model.kind != "rotated":
            f = channel_factors(model, rng, count)
            # the n^2 x n^2 outputs are large; diagonalize a few at a time
            step = max(1, 2 ** 22 // model.output_dim ** 2)
            return np.concatenate([output_spectrum(output_from_factor(f[i:i + step]))
                                   for i in range(0, count, step)])
        return _spectra(model, rng, count)

    eigs = run_blocks(fn, samples, cfg)
    nonzero = int((np.abs(eigs) > threshold).sum(axis=1).max())
    return SpectrumStats(eigs.mean(axis=0), eigs.std(axis=0, ddof=1), len(eigs), nonzero,
                         float(eigs.min()))


def mc_hayden(model: ChannelModel, samples: int, cfg: RngConfig = RngConfig()) -> np.ndarray:
    """Overlap ``tr(Z E_n)`` for every sample of a product model."""
    return run_blocks(lambda rng, c: hayden_overlap(channel_factors(model, rng, c)), samples, cfg)


@dataclass(frozen=True)
class VarianceDecay:
    ns: tuple[int, ...]
    variances: tuple[float, ...]
    slope: float

    def to_json(self) -> dict:
        return {"n": list(self.ns), "variance": list(self.variances), "slope": self.slope}


def mc_variance_decay(model: ChannelModel, p: int, ns: Sequence[int], samples: int,
                      cfg: RngConfig = RngConfig()) -> VarianceDecay:
    """Empirical ``Var tr(Z^p)`` along an increasing n-grid and its log-log slope."""
    ns = tuple(int(n) for n in ns)
    if list(ns) != sorted(set(ns)):
        raise ValueError("the n-grid must be strictly increasing")
    variances = []
    for i, n in enumerate(ns):
        sub = model.with_n(n)
        vals = run_blocks(lambda rng, c: power_traces(_spectra(sub, rng, c), p), samples,
                          cfg.child(cfg.stream + 1 + i))
        variances.append(float(np.var(vals, ddof=1)))
    if min(variances) > 0 and len(ns) > 1:
        slope = float(np.polyfit(np.log(ns), np.log(variances), 1)[0])
    else:
        slope = float("nan")
    return VarianceDecay(ns, tuple(variances), slope)


def mc_channel_moments(model: ChannelModel, ps: Sequence[int], samples: int,
                       cfg: RngConfig = RngConfig()) -> dict[int, McEstimate]:
    """Estimates of ``E[tr(Z^p)]`` for several ``p`` from one set of samples."""
    eigs = run_blocks(lambda rng, c: _spectra(model, rng, c), samples, cfg)
    return {p: estimate(power_traces(eigs, p)) for p in ps}


def mc_diagram_expectation(d, samples: int, cfg: RngConfig = RngConfig()) -> tuple[McEstimate, McEstimate]:
    """Real and imaginary estimates of the Haar average of a closed diagram."""
    from .diagram import contract_batch, group_dimension, normalize_haar_boxes, validate

    d = normalize_haar_boxes(validate(d))
    dims = {g: group_dimension(d, g) for g in d.groups()}
    if d.free_endpoints():
        raise ValueError("Monte Carlo expectation needs a diagram without free legs")

    def fn(rng, count):
        us = {g: sample_haar(dims[g], rng, count) for g in sorted(dims)}
        return contract_batch(d, us)

    vals = run_blocks(fn, samples, cfg)
    return estimate(vals.real), estimate(vals.imag)
