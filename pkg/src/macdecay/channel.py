"""Monte-Carlo Rayleigh MIMO-MAC simulation with joint ML and bounded-distance decoding.

Each user i sends kappa_i * X_i with X_i drawn uniformly from L_i(N_i); the base
station receives Y = sum_i kappa_i H_i X_i + W.  Channel and noise entries are
standard complex Gaussian.  kappa_i^2 = SNR / mean ||X_i||^2 over the finite code.

Every trial draws from its own counter-based stream keyed by (seed, snr index,
trial index), so results do not depend on batching or the number of workers.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from math import sqrt
from typing import Sequence

import numpy as np

from .codes import MacCode

__all__ = [
    "SimError",
    "SimConfig",
    "SimResult",
    "DminSummary",
    "simulate",
    "empirical_dmin",
    "codebook",
    "trial_rng",
]

DEFAULT_CAP = 10**6


class SimError(ValueError):
    pass


@dataclass
class SimConfig:
    code: MacCode
    N: tuple[int, ...]
    nr: int
    snr_db: tuple[float, ...]
    trials: int
    seed: int = 0
    cap: int = DEFAULT_CAP
    bounded_distance: bool = True

    def __post_init__(self):
        self.N = tuple(int(n) for n in (self.N if isinstance(self.N, Sequence) else [self.N] * self.code.U))
        if len(self.N) == 1 and self.code.U > 1:
            self.N = self.N * self.code.U
        if len(self.N) != self.code.U or any(n < 1 for n in self.N):
            raise SimError("need a positive bound N per user")
        self.snr_db = tuple(float(s) for s in self.snr_db)
        if self.trials < 1:
            raise SimError("trials must be at least 1")
        if self.nr < 1:
            raise SimError("nr must be positive")
        D = self.code.lattice_dim
        size = int(np.prod([float(2 * n + 1) ** D for n in self.N]))
        if size > self.cap:
            raise SimError(f"joint codebook size {size:,} exceeds the cap {self.cap:,}")
        if self.bounded_distance:
            dsize = int(np.prod([float(4 * n + 1) ** D for n in self.N]))
            if dsize > self.cap:
                raise SimError(f"difference codebook size {dsize:,} exceeds the cap {self.cap:,}")

    def describe(self) -> dict:
        return {
            "code": repr(self.code),
            "N": list(self.N),
            "nr": self.nr,
            "snr_db": list(self.snr_db),
            "trials": self.trials,
            "seed": self.seed,
            "cap": self.cap,
            "bounded_distance": self.bounded_distance,
        }


@dataclass
class SimResult:
    config: dict
    snr_db: list[float]
    trials: list[int]
    ml_errors: list[int]
    bd_failures: list[int | None]
    dmin_median: list[float | None] = field(default_factory=list)

    @property
    def ml_cer(self) -> list[float]:
        return [e / t for e, t in zip(self.ml_errors, self.trials)]

    @property
    def bd_fail(self) -> list[float | None]:
        return [None if f is None else f / t for f, t in zip(self.bd_failures, self.trials)]

    @staticmethod
    def half_width(p: float, n: int) -> float:
        return 1.96 * sqrt(max(p * (1 - p), 0.0) / n)

    @property
    def ci_halfwidth(self) -> list[float]:
        return [self.half_width(p, n) for p, n in zip(self.ml_cer, self.trials)]

    def rows(self) -> list[dict]:
        out = []
        for i, s in enumerate(self.snr_db):
            bd = self.bd_fail[i]
            out.append(
                {
                    "snr_db": s,
                    "trials": self.trials[i],
                    "ml_cer": self.ml_cer[i],
                    "bd_fail": "" if bd is None else bd,
                    "ci_halfwidth": self.ci_halfwidth[i],
                    "bd_ci_halfwidth": "" if bd is None else self.half_width(bd, self.trials[i]),
                }
            )
        return out

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def codebook(code: MacCode, j: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    """All coordinate vectors of L_j(N) (lex order, zero included) and their numeric codewords."""
    D = code.lattice_dim
    ax = np.arange(-N, N + 1)
    coords = np.stack(np.meshgrid(*([ax] * D), indexing="ij"), -1).reshape(-1, D)
    return coords, code.word_numeric(j, coords)


def trial_rng(seed: int, snr_idx: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, snr_idx], counter=[0, 0, 0, trial]))


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / sqrt(2.0)


def _joint_metric(unary: list[np.ndarray], S: list[np.ndarray]) -> np.ndarray:
    """sum_i unary_i + 2 Re sum_{i<j} <S_i, S_j>, broadcast over the joint grid; shape (B, n_1, ..., n_U)."""
    U = len(S)
    B = S[0].shape[0]
    sizes = [s.shape[1] for s in S]
    # Re <a, b> as a real dot product of stacked real/imag parts, so the GEMM stays real
    R = [np.concatenate([s.real, s.imag], axis=2) for s in S]
    total = None
    for i in range(U):
        for j in range(i + 1, U):
            cross = R[i] @ np.swapaxes(R[j], 1, 2)  # (B, n_i, n_j)
            cross *= 2
            shape = [B] + [1] * U
            shape[i + 1], shape[j + 1] = sizes[i], sizes[j]
            cross = cross.reshape(shape)
            total = cross if total is None else total + cross
    if total is None:
        total = np.zeros((B, *sizes))
    for i in range(U):
        shape = [B] + [1] * U
        shape[i + 1] = sizes[i]
        total = total + unary[i].reshape(shape)
    return total


def _draw(rng, U, nt, k, nr, sizes):
    msgs = [int(rng.integers(n)) for n in sizes]
    H = [_cn(rng, (nr, nt)) for _ in range(U)]
    W = _cn(rng, (nr, k))
    return msgs, H, W


def _run(args) -> tuple[int, int, list[float]]:
    books, dbooks, kappas, nr, seed, snr_idx, start, stop, batch = args
    U = len(books)
    nt, k = books[0].shape[1], books[0].shape[2]
    sizes = [b.shape[0] for b in books]
    joint = int(np.prod(sizes))
    errors, fails, dmins = 0, 0, []
    for b0 in range(start, stop, batch):
        b1 = min(stop, b0 + batch)
        draws = [_draw(trial_rng(seed, snr_idx, t), U, nt, k, nr, sizes) for t in range(b0, b1)]
        Hs = [np.array([d[1][i] for d in draws]) * kappas[i] for i in range(U)]  # (B, nr, nt)
        W = np.array([d[2] for d in draws])
        msgs = np.array([d[0] for d in draws])
        B = b1 - b0
        S = [(Hs[i][:, None] @ books[i][None]).reshape(B, sizes[i], -1) for i in range(U)]
        Y = W.reshape(B, -1).copy()
        for i in range(U):
            Y += S[i][np.arange(B), msgs[:, i]]
        unary = [np.sum(np.abs(s) ** 2, axis=2) - 2 * np.real(np.einsum("bcx,bx->bc", s, np.conj(Y))) for s in S]
        metric = _joint_metric(unary, S).reshape(B, joint)
        est = np.argmin(metric, axis=1)
        truth = np.ravel_multi_index(tuple(msgs.T), sizes)
        wrong = est != truth
        errors += int(wrong.sum())
        if dbooks is not None:
            dm = _dmin_batch(Hs, dbooks)
            dmins.extend(dm.tolist())
            fails += int(np.sum(np.linalg.norm(W.reshape(B, -1), axis=1) >= dm / 2))
    return errors, fails, dmins


def _dmin_batch(Hs: list[np.ndarray], dbooks: list[np.ndarray]) -> np.ndarray:
    """min over nonzero joint differences of ||sum_i H_i dX_i|| for each trial (H_i already scaled)."""
    U = len(Hs)
    B = Hs[0].shape[0]
    S = [(Hs[i][:, None] @ dbooks[i][None]).reshape(B, dbooks[i].shape[0], -1) for i in range(U)]
    unary = [np.sum(np.abs(s) ** 2, axis=2) for s in S]
    dist = _joint_metric(unary, S).reshape(B, -1)
    # the first book holds only the half starting at zero (see _difference_books)
    zero = np.ravel_multi_index((0,) + tuple(d.shape[0] // 2 for d in dbooks[1:]), [d.shape[0] for d in dbooks])
    dist[:, zero] = np.inf
    return np.sqrt(np.maximum(dist.min(axis=1), 0.0))


def _difference_books(code: MacCode, N: Sequence[int]) -> list[np.ndarray]:
    """Numeric L_i(2 N_i); the first user keeps the lex half from zero on, since +-dX give equal norms."""
    books = [codebook(code, j + 1, 2 * n)[1] for j, n in enumerate(N)]
    books[0] = books[0][books[0].shape[0] // 2 :]
    return books


def _kappas(code: MacCode, books: list[np.ndarray], snr_db: float) -> list[float]:
    snr = 10 ** (snr_db / 10)
    return [sqrt(snr / float(np.mean(np.sum(np.abs(b) ** 2, axis=(1, 2))))) for b in books]


def _batch_size(sizes: Sequence[int], dsizes: Sequence[int] | None) -> int:
    joint = int(np.prod(sizes))
    if dsizes is not None:
        joint = max(joint, int(np.prod(dsizes)))
    return int(max(1, min(256, (1 << 22) // joint)))


def simulate(cfg: SimConfig, jobs: int = 1) -> SimResult:
    """Joint-ML codeword error rate and bounded-distance failure rate per SNR point."""
    code = cfg.code
    books = [codebook(code, j + 1, n)[1] for j, n in enumerate(cfg.N)]
    dbooks = _difference_books(code, cfg.N) if cfg.bounded_distance else None
    batch = _batch_size([b.shape[0] for b in books], [d.shape[0] for d in dbooks] if dbooks else None)
    trials, errs, fails, meds = [], [], [], []
    for si, snr in enumerate(cfg.snr_db):
        kap = _kappas(code, books, snr)
        jobs_n = max(1, int(jobs or 1))
        bounds = np.linspace(0, cfg.trials, jobs_n + 1).astype(int)
        tasks = [
            (books, dbooks, kap, cfg.nr, cfg.seed, si, int(a), int(b), batch)
            for a, b in zip(bounds, bounds[1:])
            if b > a
        ]
        if jobs_n > 1:
            with ProcessPoolExecutor(max_workers=jobs_n) as ex:
                parts = list(ex.map(_run, tasks))
        else:
            parts = [_run(t) for t in tasks]
        trials.append(cfg.trials)
        errs.append(sum(p[0] for p in parts))
        if cfg.bounded_distance:
            fails.append(sum(p[1] for p in parts))
            meds.append(float(np.median([d for p in parts for d in p[2]])))
        else:
            fails.append(None)
            meds.append(None)
    return SimResult(cfg.describe(), list(cfg.snr_db), trials, errs, fails, meds)


@dataclass
class DminSummary:
    quantiles: dict[float, float]
    values: np.ndarray
    kappas: list[float]


def empirical_dmin(
    cfg: SimConfig,
    draws: int | Sequence[Sequence[np.ndarray]] = 100,
    snr_db: float | None = None,
    quantiles: Sequence[float] = (0.01, 0.1, 0.5, 0.9),
) -> DminSummary:
    """Quantiles of d_min(H_1, ..., H_U) over channel draws, exact over the difference codebooks.

    ``draws`` is a count of random channels or an explicit list of channel tuples.
    """
    code = cfg.code
    books = [codebook(code, j + 1, n)[1] for j, n in enumerate(cfg.N)]
    dbooks = _difference_books(code, cfg.N)
    snr = cfg.snr_db[0] if snr_db is None else snr_db
    kap = _kappas(code, books, snr)
    U, nt = code.U, code.nt
    if isinstance(draws, int):
        chans = []
        for t in range(draws):
            rng = trial_rng(cfg.seed, 1 << 20, t)
            chans.append([_cn(rng, (cfg.nr, nt)) for _ in range(U)])
    else:
        chans = [[np.asarray(h, dtype=complex) for h in d] for d in draws]
    vals = []
    batch = _batch_size([d.shape[0] for d in dbooks], None)
    for b0 in range(0, len(chans), batch):
        part = chans[b0 : b0 + batch]
        Hs = [np.array([c[i] for c in part]) * kap[i] for i in range(U)]
        vals.extend(_dmin_batch(Hs, dbooks).tolist())
    vals = np.array(vals)
    return DminSummary({q: float(np.quantile(vals, q)) for q in quantiles}, vals, kap)
