"""Decay functions D_I(N_1, ..., N_u) of a MAC code and the exponents bounding them.

The exhaustive search uses the Schur-complement identity

    det(M M^H) = det(R R^H) * det((X Q2)(X Q2)^H)

where R stacks the rows of all but one user, X is the remaining user's block and
Q2 is an orthonormal basis of the orthogonal complement of the complex row space
of R.  For each tuple of the "outer" users Q2 is computed once and the inner
user's words are then scored in large vectorized batches.
"""

from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .codes import MacCode, UserWord

__all__ = [
    "DecayError",
    "DecayBudgetError",
    "DecayQuery",
    "DecayRecord",
    "BoundParams",
    "LowerBound",
    "SlopeFit",
    "DEFAULT_BUDGET",
    "word_count",
    "enumerate_words",
    "decay_exhaustive",
    "upper_bound_exponents",
    "lower_bound_exponents",
    "fit_decay_slope",
    "joint_sqrt_det",
]

DEFAULT_BUDGET = 2_000_000_000
_TIE_RTOL = 1e-9
_BLOCK_ELEMS = 1 << 21


class DecayError(ValueError):
    pass


class DecayBudgetError(DecayError):
    def __init__(self, needed: int, budget: int):
        self.needed, self.budget = needed, budget
        super().__init__(
            f"search space of {needed:,} word tuples exceeds the node budget {budget:,}; "
            "lower the bounds, vary a single user's bound (--vary) or raise MACDECAY_BUDGET"
        )


def _budget(budget: int | None) -> int:
    if budget is not None:
        return int(budget)
    env = os.environ.get("MACDECAY_BUDGET")
    return int(float(env)) if env else DEFAULT_BUDGET


@dataclass(frozen=True)
class DecayQuery:
    code: MacCode
    subset: tuple[int, ...]
    bounds: tuple[int, ...]

    def __post_init__(self):
        subset = tuple(int(j) for j in self.subset)
        bounds = tuple(int(n) for n in self.bounds)
        object.__setattr__(self, "subset", subset)
        object.__setattr__(self, "bounds", bounds)
        if not subset:
            raise DecayError("decay query needs a nonempty user subset")
        if len(set(subset)) != len(subset):
            raise DecayError("repeated user in subset")
        if any(not 1 <= j <= self.code.U for j in subset):
            raise DecayError(f"user indices must lie in 1..{self.code.U}")
        if len(bounds) != len(subset):
            raise DecayError("one bound per user in the subset is required")
        if any(n < 1 for n in bounds):
            raise DecayError("bounds must be positive")


@dataclass
class DecayRecord:
    query: DecayQuery
    value: float
    witness: tuple[tuple[int, ...], ...]
    nodes: int = 0
    pruned: int = 0
    seconds: float = 0.0

    def witness_words(self) -> list[UserWord]:
        nt = self.query.code.nt
        return [
            UserWord.from_flat(j, w, nt, n)
            for j, w, n in zip(self.query.subset, self.witness, self.query.bounds)
        ]


# word enumeration -----------------------------------------------------------


def word_count(D: int, N: int) -> int:
    """Nonzero words in [-N, N]^D up to sign."""
    return ((2 * N + 1) ** D - 1) // 2


def _grid(r: int, N: int) -> np.ndarray:
    if r == 0:
        return np.zeros((1, 0), dtype=np.int16)
    axes = np.meshgrid(*([np.arange(-N, N + 1, dtype=np.int16)] * r), indexing="ij")
    return np.stack(axes, axis=-1).reshape(-1, r)


def _raw_blocks(D: int, N: int, max_rows: int) -> Iterator[np.ndarray]:
    # lexicographic order; first nonzero coordinate positive
    for lead in range(D - 1, -1, -1):
        rest = D - lead - 1
        # split the free tail so that each block stays below max_rows
        split = 0
        while split < rest and (2 * N + 1) ** (rest - split) > max_rows:
            split += 1
        tail = _grid(rest - split, N)
        for a in range(1, N + 1):
            for head in itertools.product(range(-N, N + 1), repeat=split):
                pre = np.array([0] * lead + [a] + list(head), dtype=np.int16)
                block = np.empty((tail.shape[0], D), dtype=np.int16)
                block[:, : pre.size] = pre
                block[:, pre.size :] = tail
                yield block


def enumerate_words(D: int, N: int, max_rows: int = 1 << 18) -> Iterator[np.ndarray]:
    """Yield the nonzero words of [-N, N]^D with positive leading entry, in lex order, batched."""
    buf: list[np.ndarray] = []
    size = 0
    for block in _raw_blocks(D, N, max_rows):
        buf.append(block)
        size += block.shape[0]
        if size >= max_rows:
            yield np.concatenate(buf)
            buf, size = [], 0
    if buf:
        yield np.concatenate(buf)


def _all_words(D: int, N: int) -> np.ndarray:
    return np.concatenate(list(enumerate_words(D, N)))


# scoring ----------------------------------------------------------------------


def _complements(R: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For stacked rows R (B, r, k): orthonormal complement bases (B, k, k-r) and det(R R^H)."""
    B, r, k = R.shape
    if r == 0:
        return np.broadcast_to(np.eye(k, dtype=complex), (B, k, k)), np.ones(B)
    Q, Rr = np.linalg.qr(np.conj(np.swapaxes(R, 1, 2)), mode="complete")
    diag = np.abs(np.diagonal(Rr, axis1=1, axis2=2)[:, :r]) ** 2
    return Q[:, :, r:], np.prod(diag, axis=1)


def _gram_det(Y: np.ndarray) -> np.ndarray:
    """det(Y Y^H) over the last two axes, Y (..., nt, c)."""
    nt = Y.shape[-2]
    if nt == 1:
        return np.einsum("...ij,...ij->...", Y, np.conj(Y)).real
    G = Y @ np.conj(np.swapaxes(Y, -1, -2))
    if nt == 2:
        return (G[..., 0, 0].real * G[..., 1, 1].real - np.abs(G[..., 0, 1]) ** 2)
    return np.linalg.det(G).real


_STATE: dict = {}


def _init_state(state: dict) -> None:
    _STATE.clear()
    _STATE.update(state)


def _scan(inner_words: np.ndarray) -> tuple[float, tuple | None, int]:
    """Best (value, witness-order key, nodes) for one batch of inner-user words."""
    st = _STATE
    G = st["inner_gen"]  # (D, nt, k)
    nt, k = G.shape[1], G.shape[2]
    X = np.tensordot(inner_words.astype(float), G, axes=([1], [0]))  # (C, nt, k)
    Xf = X.reshape(-1, k)
    Q2, detR = st["Q2"], st["detR"]
    n_outer = Q2.shape[0]
    C = inner_words.shape[0]
    step = max(1, _BLOCK_ELEMS // max(1, C * nt * Q2.shape[2]))
    cur_min, best_key, best_val = np.inf, None, np.inf
    for start in range(0, n_outer, step):
        stop = min(n_outer, start + step)
        Y = (Xf @ Q2[start:stop]).reshape(stop - start, C, nt, -1)
        vals = detR[start:stop, None] * _gram_det(Y)
        vmin = float(vals.min())
        if vmin > cur_min * (1 + _TIE_RTOL):
            continue
        cur_min = min(cur_min, vmin)
        thresh = cur_min * (1 + _TIE_RTOL)
        cands = [] if best_key is None or best_val > thresh else [(best_key, best_val)]
        bo, bi = np.nonzero(vals <= thresh)
        for o, i in zip(bo.tolist(), bi.tolist()):
            cands.append((st["key"](o + start, inner_words[i]), float(vals[o, i])))
        best_key, best_val = min(cands)
    return cur_min, best_key, n_outer * C


class _KeyMaker:
    """Map (outer index, inner word) to the witness tuple in subset order."""

    def __init__(self, outer_words: list[np.ndarray], outer_pos: list[int], inner_pos: int, u: int):
        self.outer_words = outer_words
        self.outer_pos = outer_pos
        self.inner_pos = inner_pos
        self.u = u
        self.shape = tuple(w.shape[0] for w in outer_words)

    def __call__(self, o: int, inner: np.ndarray) -> tuple:
        idx = np.unravel_index(o, self.shape) if self.shape else ()
        out: list = [None] * self.u
        for pos, words, i in zip(self.outer_pos, self.outer_words, idx):
            out[pos] = tuple(int(v) for v in words[i])
        out[self.inner_pos] = tuple(int(v) for v in inner)
        return tuple(out)


def joint_sqrt_det(code: MacCode, subset: Sequence[int], witness: Sequence[Sequence[int]]) -> float:
    """Direct sqrt(det(M M^H)) of the stacked numeric codewords."""
    M = np.concatenate([code.word_numeric(j, w) for j, w in zip(subset, witness)], axis=0)
    d = np.linalg.det(M @ np.conj(M.T)).real
    return float(np.sqrt(max(d, 0.0)))


def decay_exhaustive(
    query: DecayQuery,
    budget: int | None = None,
    jobs: int = 1,
    inner_rows: int = 1 << 16,
) -> DecayRecord:
    """Exact minimum of sqrt(det(M M^H)) over all tuples of nonzero words within the bounds.

    Each user's word is taken up to sign (first nonzero coordinate positive),
    which leaves det(M M^H) unchanged.  Near-ties (relative 1e-9) are broken by
    the lexicographically smallest witness, so the result does not depend on
    the number of workers.
    """
    t0 = time.perf_counter()
    code = query.code
    D = code.lattice_dim
    counts = [word_count(D, n) for n in query.bounds]
    needed = int(np.prod([float(c) for c in counts]))
    if needed > _budget(budget):
        raise DecayBudgetError(needed, _budget(budget))
    u = len(query.subset)
    # the user with the most words is scanned in vectorized batches
    inner_pos = max(range(u), key=lambda i: (counts[i], i))
    outer_pos = [i for i in range(u) if i != inner_pos]
    outer_words = [_all_words(D, query.bounds[i]) for i in outer_pos]
    nt, k = code.nt, code.k
    if outer_pos:
        mats = [code.word_numeric(query.subset[i], w) for i, w in zip(outer_pos, outer_words)]
        grids = np.meshgrid(*[np.arange(m.shape[0]) for m in mats], indexing="ij")
        R = np.concatenate([m[g.ravel()] for m, g in zip(mats, grids)], axis=1)
    else:
        R = np.zeros((1, 0, k), dtype=complex)
    Q2, detR = _complements(R)
    state = {
        "inner_gen": code.generators[query.subset[inner_pos] - 1],
        "Q2": np.ascontiguousarray(Q2),
        "detR": detR,
        "key": _KeyMaker(outer_words, outer_pos, inner_pos, u),
    }
    chunks = enumerate_words(D, query.bounds[inner_pos], inner_rows)
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_state, initargs=(state,)) as ex:
            results = list(ex.map(_scan, chunks))
    else:
        _init_state(state)
        results = [_scan(c) for c in chunks]
    best = min(r[0] for r in results)
    cands = [r for r in results if r[1] is not None and r[0] <= best * (1 + _TIE_RTOL)]
    witness = min(r[1] for r in cands)
    nodes = sum(r[2] for r in results)
    value = joint_sqrt_det(code, query.subset, witness)
    return DecayRecord(query, value, witness, nodes, 0, time.perf_counter() - t0)


# bound exponents -------------------------------------------------------------


@dataclass(frozen=True)
class BoundParams:
    U: int
    nt: int
    k: int
    u: int
    exponents: tuple[Fraction, ...]  # per position l = 1..u
    alpha: Fraction

    def as_dict(self) -> dict:
        return {
            "U": self.U,
            "nt": self.nt,
            "k": self.k,
            "u": self.u,
            "exponents": [str(e) for e in self.exponents],
            "alpha": str(self.alpha),
        }


def upper_bound_exponents(U: int, nt: int, k: int, u: int) -> BoundParams:
    """Pigeon-hole exponents: D <= K * prod_l N_{i_l}^(-e_l), e_l = nt^2 (u-l) / (k - nt (u-l))."""
    if k < U * nt:
        raise DecayError(f"the upper bound needs k >= U*nt ({k} < {U * nt})")
    if not 1 <= u <= U:
        raise DecayError(f"subset size u={u} outside 1..{U}")
    exps = tuple(Fraction(nt * nt * (u - l), k - nt * (u - l)) for l in range(1, u + 1))
    return BoundParams(U, nt, k, u, exps, sum(exps, Fraction(0)))


@dataclass(frozen=True)
class LowerBound:
    per_user: int
    equal_n: int
    single_varying: int


def lower_bound_exponents(U: int, nt: int, u: int) -> LowerBound:
    """Exponents of D >= K / (N_{i1} ... N_{iu})^((U-1) nt); a constant when u = 1."""
    if not 1 <= u <= U:
        raise DecayError(f"subset size u={u} outside 1..{U}")
    if u == 1:
        return LowerBound(0, 0, 0)
    e = (U - 1) * nt
    return LowerBound(e, u * e, e)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual: float


def _varying_n(records: Sequence[DecayRecord]) -> list[int]:
    bounds = [r.query.bounds for r in records]
    if all(len(set(b)) == 1 for b in bounds):
        return [b[0] for b in bounds]
    varying = [i for i in range(len(bounds[0])) if len({b[i] for b in bounds}) > 1]
    if len(varying) != 1:
        raise DecayError("records must follow an equal-N or single-varying-N pattern")
    return [b[varying[0]] for b in bounds]


def fit_decay_slope(records: Sequence[DecayRecord] | Sequence[tuple[float, float]]) -> SlopeFit:
    """Least-squares slope of log D against log N."""
    if len(records) < 3:
        raise DecayError("a slope fit needs at least 3 points")
    if isinstance(records[0], DecayRecord):
        ns = _varying_n(records)  # type: ignore[arg-type]
        ds = [r.value for r in records]  # type: ignore[union-attr]
    else:
        ns = [float(a) for a, _ in records]
        ds = [float(b) for _, b in records]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise DecayError("N values must be strictly increasing")
    x, y = np.log(np.asarray(ns, float)), np.log(np.asarray(ds, float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return SlopeFit(float(slope), float(intercept), resid)
