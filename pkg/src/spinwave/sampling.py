"""Shot-based energy estimation with readout noise and mitigation.

Every chain term is a same-axis Pauli pair, so three global measurement
settings (X, Y, Z on all qubits) are enough to estimate <H>.

Randomness comes from Philox (counter based) generators keyed by
``SeedSequence(seed, spawn_key=(purpose, basis, chunk))``. Shots are drawn in
fixed-size chunks, each with its own substream, so results do not depend on
how chunks are scheduled.

Readout twirling is simulated as the equivalent classical post-processing:
a random mask is XORed into the bit before the noisy readout and XORed out
again afterwards, which turns any per-qubit (p01, p10) channel into a
symmetric flip with rate q = (p01 + p10) / 2.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .ansatz import ProductState, build_product_state
from .core import ChainConfig, DomainError, ModeIndex, SpinwaveError
from .statevector import (
    HADAMARD,
    S_DAGGER,
    DenseState,
    apply_single_qubit,
    check_cap,
    index_to_bitstring,
)

CHUNK_SHOTS = 1 << 16
# refuse to divide by (1 - 2q) below this (noise amplification beyond 20x)
MIN_READOUT_CONTRAST = 0.05


class BasisMismatch(SpinwaveError, ValueError):
    pass


class SingularCalibration(SpinwaveError, ValueError):
    pass


class Basis(str, Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


class Mitigation(str, Enum):
    NONE = "none"
    TWIRLED = "twirled"
    MATRIX_INVERSION = "matrix_inversion"


_BASIS_INDEX = {Basis.X: 0, Basis.Y: 1, Basis.Z: 2}
_PURPOSE_MEASURE = 0
_PURPOSE_CALIBRATE = 1


def substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class NoiseModel:
    """Per-qubit readout flips: p01 = P(read 1 | 0), p10 = P(read 0 | 1)."""

    p01: np.ndarray
    p10: np.ndarray

    def __post_init__(self):
        p01 = np.atleast_1d(np.asarray(self.p01, dtype=float))
        p10 = np.atleast_1d(np.asarray(self.p10, dtype=float))
        if p01.shape != p10.shape or p01.ndim != 1:
            raise DomainError("p01 and p10 must be equal-length 1-D arrays")
        for p in (p01, p10):
            if np.any(p < 0) or np.any(p >= 1):
                raise DomainError("readout flip probabilities must lie in [0, 1)")
        object.__setattr__(self, "p01", p01)
        object.__setattr__(self, "p10", p10)

    @property
    def n_sites(self) -> int:
        return len(self.p01)

    @classmethod
    def identity(cls, n_sites: int) -> "NoiseModel":
        return cls(np.zeros(n_sites), np.zeros(n_sites))

    @classmethod
    def uniform(cls, n_sites: int, p01: float, p10: float | None = None) -> "NoiseModel":
        return cls(np.full(n_sites, p01), np.full(n_sites, p01 if p10 is None else p10))

    @classmethod
    def from_dict(cls, data: dict, n_sites: int) -> "NoiseModel":
        """Accepts ``{"p01": ..., "p10": ...}`` with scalars (broadcast) or per-qubit lists."""
        try:
            raw = [data["p01"], data["p10"]]
        except KeyError as exc:
            raise DomainError(f"noise config is missing {exc.args[0]!r}") from None
        arrays = []
        for value in raw:
            arr = np.asarray(value, dtype=float)
            if arr.ndim == 0:
                arr = np.full(n_sites, float(arr))
            elif arr.shape != (n_sites,):
                raise DomainError(f"noise array has {arr.size} entries, chain has {n_sites}")
            arrays.append(arr)
        return cls(*arrays)

    @classmethod
    def from_json(cls, path: str | Path, n_sites: int) -> "NoiseModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh), n_sites)

    def symmetric_rate(self) -> np.ndarray:
        return (self.p01 + self.p10) / 2

    def is_identity(self) -> bool:
        return not (np.any(self.p01) or np.any(self.p10))


@dataclass
class Counts:
    n_sites: int
    basis: Basis
    counts: dict[str, int]

    @property
    def total_shots(self) -> int:
        return sum(self.counts.values())

    def to_dict(self) -> dict:
        return {"basis": self.basis.value, "shots": self.total_shots, "counts": dict(self.counts)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "Counts":
        counts = {str(k): int(v) for k, v in data["counts"].items()}
        lengths = {len(k) for k in counts}
        if len(lengths) != 1:
            raise DomainError("all bitstrings in a Counts record must have one length")
        out = cls(lengths.pop(), Basis(data["basis"]), counts)
        if "shots" in data and int(data["shots"]) != out.total_shots:
            raise DomainError("'shots' does not match the sum of counts")
        return out

    def merge(self, other: "Counts") -> "Counts":
        if (self.n_sites, self.basis) != (other.n_sites, other.basis):
            raise BasisMismatch("can only merge counts of the same width and basis")
        merged = dict(self.counts)
        for k, v in other.counts.items():
            merged[k] = merged.get(k, 0) + v
        return Counts(self.n_sites, self.basis, merged)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(K, N) bit matrix with column n = site n, and the (K,) count vector."""
        keys = np.fromiter((int(k, 2) for k in self.counts), dtype=np.int64, count=len(self.counts))
        bits = (keys[:, None] >> np.arange(self.n_sites)) & 1
        weights = np.fromiter(self.counts.values(), dtype=np.int64, count=len(self.counts))
        return bits.astype(np.uint8), weights


def _counts_from_bits(bits: np.ndarray, basis: Basis) -> Counts:
    n = bits.shape[1]
    packed = bits.astype(np.int64) @ (np.int64(1) << np.arange(n, dtype=np.int64))
    keys, freq = np.unique(packed, return_counts=True)
    return Counts(n, basis, {index_to_bitstring(int(k), n): int(c) for k, c in zip(keys, freq)})


def _apply_readout(bits, noise: NoiseModel | None, rng, twirl: bool) -> np.ndarray:
    if noise is None or noise.is_identity():
        return bits
    if noise.n_sites != bits.shape[1]:
        raise DomainError(f"noise model covers {noise.n_sites} qubits, state has {bits.shape[1]}")
    mask = rng.integers(0, 2, size=bits.shape, dtype=np.uint8) if twirl else 0
    physical = bits ^ mask
    flip_prob = np.where(physical == 1, noise.p10, noise.p01)
    physical = physical ^ (rng.random(bits.shape) < flip_prob).astype(np.uint8)
    return physical ^ mask


def _chunks(shots: int):
    start = 0
    index = 0
    while start < shots:
        size = min(CHUNK_SHOTS, shots - start)
        yield index, size
        start += size
        index += 1


def outcome_one_probabilities(state: ProductState, basis: Basis) -> np.ndarray:
    """P(outcome 1) per site; X outcome 0 is |+>, Y outcome 0 is (|0> + i|1>)/sqrt 2."""
    x, y, z = state.bloch_vectors().T
    component = {Basis.X: x, Basis.Y: y, Basis.Z: z}[Basis(basis)]
    return np.clip((1.0 - component) / 2.0, 0.0, 1.0)


def _sample_product_bits(state, basis, shots, noise, seed, twirl, purpose=_PURPOSE_MEASURE):
    basis = Basis(basis)
    p1 = outcome_one_probabilities(state, basis)
    blocks = []
    for chunk, size in _chunks(shots):
        rng = substream(seed, purpose, _BASIS_INDEX[basis], chunk)
        bits = (rng.random((size, state.n_sites)) < p1).astype(np.uint8)
        blocks.append(_apply_readout(bits, noise, rng, twirl))
    return np.concatenate(blocks) if blocks else np.zeros((0, state.n_sites), np.uint8)


def sample_product_state(
    state: ProductState,
    basis: Basis | str,
    shots: int,
    noise: NoiseModel | None = None,
    seed: int = 0,
    twirl: bool = False,
) -> Counts:
    """Sample each site independently; O(N) work per shot and no dense vector."""
    if shots < 1:
        raise DomainError("shots must be >= 1")
    bits = _sample_product_bits(state, basis, shots, noise, seed, twirl)
    return _counts_from_bits(bits, Basis(basis))


def rotate_to_basis(state: DenseState, basis: Basis | str) -> DenseState:
    basis = Basis(basis)
    if basis is Basis.Z:
        return state
    for site in range(state.n_sites):
        if basis is Basis.Y:
            state = apply_single_qubit(state, site, S_DAGGER)
        state = apply_single_qubit(state, site, HADAMARD)
    return state


def sample_dense_state(
    state: DenseState,
    basis: Basis | str,
    shots: int,
    noise: NoiseModel | None = None,
    seed: int = 0,
    twirl: bool = False,
) -> Counts:
    if shots < 1:
        raise DomainError("shots must be >= 1")
    check_cap(state.n_sites)
    basis = Basis(basis)
    cdf = np.cumsum(rotate_to_basis(state, basis).probabilities())
    cdf /= cdf[-1]
    blocks = []
    for chunk, size in _chunks(shots):
        rng = substream(seed, _PURPOSE_MEASURE, _BASIS_INDEX[basis], chunk)
        idx = np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), len(cdf) - 1)
        bits = ((idx[:, None] >> np.arange(state.n_sites)) & 1).astype(np.uint8)
        blocks.append(_apply_readout(bits, noise, rng, twirl))
    return _counts_from_bits(np.concatenate(blocks), basis)


def pauli_pair_from_counts(counts: Counts, i: int, j: int, kind: str | None = None) -> float:
    """Mean of (-1)^(b_i xor b_j): the raw estimator of <P_i P_j>."""
    if kind is not None and kind != counts.basis.value * 2:
        raise BasisMismatch(f"{kind} cannot be estimated from {counts.basis.value}-basis counts")
    bits, weights = counts.as_arrays()
    parity = 1.0 - 2.0 * (bits[:, i] ^ bits[:, j])
    return float(np.dot(parity, weights) / weights.sum())


@dataclass(frozen=True)
class ReadoutCalibration:
    """Per-qubit readout estimates.

    ``twirled=True``: only the symmetric rate ``q`` is meaningful.
    ``twirled=False``: ``p01`` and ``p10`` are estimated separately and ``q``
    is their mean.
    """

    q: np.ndarray
    q_stderr: np.ndarray
    twirled: bool
    p01: np.ndarray | None = field(default=None)
    p10: np.ndarray | None = field(default=None)

    def contrast(self) -> np.ndarray:
        return 1.0 - 2.0 * self.q


def calibrate_readout(
    noise: NoiseModel, shots: int, seed: int = 0, twirl: bool = True
) -> ReadoutCalibration:
    """Prepare |0...0> and |1...1>, measure ``shots`` times each and count flips."""
    if shots < 1000:
        raise DomainError("calibration needs at least 1000 shots per preparation")
    n = noise.n_sites
    flips = []
    for prep in (0, 1):
        rng = substream(seed, _PURPOSE_CALIBRATE, prep)
        ideal = np.full((shots, n), prep, dtype=np.uint8)
        read = _apply_readout(ideal, noise, rng, twirl)
        flips.append((read != prep).mean(axis=0))
    p01_hat, p10_hat = flips
    q = (p01_hat + p10_hat) / 2
    # two independent binomial rates averaged
    stderr = 0.5 * np.sqrt(p01_hat * (1 - p01_hat) / shots + p10_hat * (1 - p10_hat) / shots)
    if twirl:
        return ReadoutCalibration(q, stderr, True)
    return ReadoutCalibration(q, stderr, False, p01_hat, p10_hat)


def chain_pairs(n_sites: int) -> list[tuple[int, int]]:
    return [(n, (n + 1) % n_sites) for n in range(n_sites)]


def twirled_scale_factors(
    calibration: ReadoutCalibration, pairs: list[tuple[int, int]]
) -> dict[tuple[int, int], float]:
    contrast = calibration.contrast()
    bad = np.flatnonzero(contrast < MIN_READOUT_CONTRAST)
    if bad.size:
        raise SingularCalibration(
            f"qubits {bad.tolist()} have readout contrast below {MIN_READOUT_CONTRAST}"
        )
    return {(i, j): float(1.0 / (contrast[i] * contrast[j])) for i, j in pairs}


def mitigate_twirled(
    counts_raw: Counts,
    calibration: ReadoutCalibration,
    pairs: list[tuple[int, int]] | None = None,
) -> tuple[dict[tuple[int, int], float], dict[tuple[int, int], float]]:
    """Rescale twirled parity estimates by 1 / ((1 - 2 q_i)(1 - 2 q_j)).

    Returns ``(scale_factors, mitigated_parities)`` keyed by site pair.
    """
    if pairs is None:
        pairs = chain_pairs(counts_raw.n_sites)
    scales = twirled_scale_factors(calibration, pairs)
    values = {p: scales[p] * pauli_pair_from_counts(counts_raw, *p) for p in pairs}
    return scales, values


def _site_weights(mitigation: Mitigation, calibration, n_sites: int) -> np.ndarray:
    """(N, 2) table u with <P_i P_j> estimated per shot as u[i, b_i] * u[j, b_j].

    Plain parity is u = (1, -1). Twirled mitigation divides it by (1 - 2q).
    Matrix inversion uses u = A^{-T} (1, -1), A being the per-qubit confusion
    matrix, which is the parity of the inverted two-qubit marginal.
    """
    plain = np.tile([1.0, -1.0], (n_sites, 1))
    if mitigation is Mitigation.NONE:
        return plain
    if mitigation is Mitigation.TWIRLED:
        contrast = calibration.contrast()
        if np.any(contrast < MIN_READOUT_CONTRAST):
            raise SingularCalibration("readout contrast too small to rescale")
        return plain / contrast[:, None]
    weights = np.empty((n_sites, 2))
    for n in range(n_sites):
        p01, p10 = calibration.p01[n], calibration.p10[n]
        confusion = np.array([[1 - p01, p10], [p01, 1 - p10]])
        if abs(np.linalg.det(confusion)) < MIN_READOUT_CONTRAST:
            raise SingularCalibration(f"confusion matrix of qubit {n} is near singular")
        weights[n] = np.linalg.solve(confusion.T, [1.0, -1.0])
    return weights


@dataclass(frozen=True)
class EnergyEstimate:
    value: float
    stderr: float
    shots_per_basis: int
    mitigation: Mitigation
    pair_estimates: dict = field(default_factory=dict, repr=False, compare=False)


def _basis_pair_sum(counts: Counts, weights: np.ndarray, pairs):
    """Mean and standard error of the per-shot sum of the pair estimators.

    The variance is taken over shots of the summed estimator, so covariances
    between pairs sharing a site are included. Settings are independent.
    """
    bits, freq = counts.as_arrays()
    rows = np.arange(counts.n_sites)
    per_site = weights[rows, bits]  # (K, N)
    i_idx = np.array([p[0] for p in pairs])
    j_idx = np.array([p[1] for p in pairs])
    per_pair = per_site[:, i_idx] * per_site[:, j_idx]  # (K, P)
    shots = freq.sum()
    pair_means = per_pair.T @ freq / shots
    per_shot = per_pair.sum(axis=1)
    mean = float(per_shot @ freq / shots)
    var = float(((per_shot - mean) ** 2) @ freq / max(shots - 1, 1))
    return mean, math.sqrt(var / shots), pair_means


def estimate_energy(
    config: ChainConfig,
    mode: ModeIndex,
    shots_per_basis: int,
    noise: NoiseModel | None = None,
    mitigation: Mitigation | str = Mitigation.NONE,
    seed: int = 0,
    calibration_shots: int | None = None,
    state: ProductState | None = None,
) -> EnergyEstimate:
    """Estimate E* = (2/J)<H> + N = N - sum over bonds of <XX + YY + ZZ>."""
    if shots_per_basis < 100:
        raise DomainError("shots_per_basis must be >= 100")
    mitigation = Mitigation(mitigation)
    n = config.n_sites
    if state is None:
        state = build_product_state(config, mode)
    if noise is None:
        noise = NoiseModel.identity(n)
    calibration = None
    if mitigation is not Mitigation.NONE:
        cal_shots = max(calibration_shots or shots_per_basis, 1000)
        calibration = calibrate_readout(
            noise, cal_shots, seed, twirl=mitigation is Mitigation.TWIRLED
        )
    weights = _site_weights(mitigation, calibration, n)
    twirl = mitigation is Mitigation.TWIRLED
    pairs = chain_pairs(n)

    total, variance = 0.0, 0.0
    pair_estimates = {}
    for basis in Basis:
        counts = sample_product_state(state, basis, shots_per_basis, noise, seed, twirl)
        mean, err, pair_means = _basis_pair_sum(counts, weights, pairs)
        total += mean
        variance += err**2
        pair_estimates[basis.value * 2] = dict(zip(pairs, pair_means.tolist()))
    return EnergyEstimate(n - total, math.sqrt(variance), shots_per_basis, mitigation, pair_estimates)
