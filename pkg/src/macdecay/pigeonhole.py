"""Constructive pigeon-hole search for lattice points with small projections.

Matrices in C^{n x k} are treated as vectors of R^{2nk} with the inner product
Re Tr(X Y^H).  The cube holding the projected points is cut into cells of side
4R / s^(1/h); the first pair of points sharing a cell gives the witness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import ceil, sqrt
from typing import Sequence

import numpy as np

from .codes import MacCode
from .decay import DecayError, joint_sqrt_det

__all__ = [
    "PigeonholeResult",
    "PipelineResult",
    "orthonormal_basis",
    "orthogonal_complement",
    "project",
    "pigeonhole_witness",
    "corollary_bound",
    "small_det_witness_pipeline",
]

_PIVOT_TOL = 1e-10


def _real(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X)
    flat = X.reshape(X.shape[0], -1) if X.ndim > 1 else X.reshape(1, -1)
    return np.concatenate([flat.real, flat.imag], axis=1).astype(float)


def orthonormal_basis(vectors: np.ndarray, strict: bool = True) -> np.ndarray:
    """Modified Gram-Schmidt (two passes) on the rows of a real matrix."""
    basis: list[np.ndarray] = []
    for v in np.asarray(vectors, float):
        w = v.copy()
        for _ in range(2):
            for b in basis:
                w -= (w @ b) * b
        nrm = np.linalg.norm(w)
        if nrm < _PIVOT_TOL * max(1.0, np.linalg.norm(v)):
            if strict:
                raise DecayError("degenerate Gram-Schmidt pivot: spanning set is dependent")
            continue
        basis.append(w / nrm)
    dim = np.asarray(vectors).shape[-1] if np.asarray(vectors).size else 0
    return np.array(basis).reshape(len(basis), dim)


def orthogonal_complement(basis: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis of the complement of span(basis) in R^dim, completed from unit vectors."""
    vecs = [b for b in basis]
    out: list[np.ndarray] = []
    need = dim - len(vecs)
    # take unit vectors in order of largest residual so every pivot stays well conditioned
    while len(out) < need:
        best, best_n = None, 0.0
        for i in range(dim):
            w = np.zeros(dim)
            w[i] = 1.0
            for _ in range(2):
                for b in vecs:
                    w -= (w @ b) * b
            n = np.linalg.norm(w)
            if n > best_n + 1e-12:
                best, best_n = w, n
        if best is None or best_n < 1e-6:
            raise DecayError("could not complete an orthonormal basis")
        best = best / best_n
        vecs.append(best)
        out.append(best)
    return np.array(out).reshape(len(out), dim)


def project(X: np.ndarray, comp: np.ndarray) -> np.ndarray:
    """Coordinates of the orthogonal projection onto span(comp rows) (matrix or batch of matrices)."""
    X = np.asarray(X)
    single = X.ndim == 2
    R = _real(X[None] if single else X)
    out = R @ comp.T
    return out[0] if single else out


def corollary_bound(l: int, h: int, K: float, M: float) -> float:
    """2^(l/h+2) * h * K * M^((h-l)/h)."""
    return 2.0 ** (l / h + 2) * h * K * M ** ((h - l) / h)


@dataclass
class PigeonholeResult:
    coords: tuple[int, ...]
    z: np.ndarray
    projection_norm: float
    guarantee: float  # sqrt(h) * cell side, holds by construction
    bound: float  # the corollary bound
    h: int
    l: int
    K: float
    M: int
    points_scanned: int

    @property
    def within_bound(self) -> bool:
        return self.projection_norm <= self.bound * (1 + 1e-9)


def _box_chunks(l: int, half: int, rows: int):
    r = 0
    while r < l and (2 * half + 1) ** (l - r) > rows:
        r += 1
    ax = np.arange(-half, half + 1, dtype=np.int32)
    tail_n = l - r
    if tail_n:
        tail = np.stack(np.meshgrid(*([ax] * tail_n), indexing="ij"), -1).reshape(-1, tail_n)
    else:
        tail = np.zeros((1, 0), dtype=np.int32)
    for head in itertools.product(range(-half, half + 1), repeat=r):
        block = np.empty((tail.shape[0], l), dtype=np.int32)
        block[:, :r] = head
        block[:, r:] = tail
        yield block


def pigeonhole_witness(
    generators: np.ndarray,
    A: Sequence[np.ndarray] | np.ndarray = (),
    M: int = 4,
    complex_span: bool = True,
    strict: bool = True,
    chunk: int = 1 << 16,
) -> PigeonholeResult:
    """Nonzero z in L(M) with ||pi_{A-perp}(z)|| <= 2^(l/h+2) h K M^((h-l)/h).

    ``generators`` has shape (l, n, k).  ``A`` lists matrices spanning the
    subspace (its complex span when ``complex_span``).  The search set is
    L(floor(M/2)) so all differences lie in L(M).
    """
    gens = np.asarray(generators, dtype=complex)
    if gens.ndim == 2:
        gens = gens[:, None, :]
    l, n, k = gens.shape
    dim = 2 * n * k
    if strict and M < 4:
        raise DecayError("the pigeon-hole corollary needs M >= 4")
    half = M // 2
    if half < 1:
        raise DecayError("M must be at least 2")
    A = [np.asarray(a, dtype=complex).reshape(n, k) for a in A]
    span = A + ([1j * a for a in A] if complex_span else [])
    basisA = orthonormal_basis(_real(np.array(span))) if span else np.zeros((0, dim))
    h = dim - basisA.shape[0]
    if h == 0:
        raise DecayError("the complement of A is zero dimensional")
    comp = orthogonal_complement(basisA, dim)
    P = _real(gens) @ comp.T  # (l, h)
    K = float(np.max(np.linalg.norm(_real(gens), axis=1)))
    s = (2 * half + 1) ** l
    R = float(half * np.abs(P).sum(axis=0).max())
    side = 4 * R / s ** (1 / h) if R > 0 else 1.0
    cells = max(1, ceil(2 * R / side - 1e-12)) if R > 0 else 1
    use_int = cells**h < 2**62
    radix = np.array([cells**i for i in range(h - 1, -1, -1)], dtype=np.int64) if use_int else None

    seen_keys = np.zeros(0, dtype=np.int64)
    seen_idx = np.zeros(0, dtype=np.int64)
    seen_map: dict = {}
    offset = 0
    hit = None
    for block in _box_chunks(l, half, chunk):
        proj = block @ P
        cell = np.clip(np.floor((proj + R) / side), 0, cells - 1).astype(np.int64)
        if use_int:
            keys = cell @ radix
            uniq, first, inv = np.unique(keys, return_index=True, return_inverse=True)
            pos = np.searchsorted(seen_keys, keys)
            pos_c = np.minimum(pos, max(len(seen_keys) - 1, 0))
            prev = (len(seen_keys) > 0) & (seen_keys[pos_c] == keys) if len(seen_keys) else np.zeros(len(keys), bool)
            dup = first[inv] != np.arange(len(keys))
            bad = np.nonzero(prev | dup)[0]
            if bad.size:
                j = int(bad[0])
                i = int(seen_idx[pos_c[j]]) if prev[j] else offset + int(first[inv[j]])
                hit = (i, offset + j)
                break
            merged = np.concatenate([seen_keys, uniq])
            order = np.argsort(merged, kind="stable")
            seen_keys = merged[order]
            seen_idx = np.concatenate([seen_idx, offset + first])[order]
        else:
            for j, row in enumerate(map(tuple, cell)):
                if row in seen_map:
                    hit = (seen_map[row], offset + j)
                    break
                seen_map[row] = offset + j
            if hit:
                break
        offset += block.shape[0]
    if hit is None:
        raise DecayError("no pigeon-hole collision found")
    pts = _point_at(l, half, hit[0]), _point_at(l, half, hit[1])
    coords = tuple(int(b - a) for a, b in zip(*pts))
    cvec = np.array(coords, dtype=float)
    z = np.tensordot(cvec, gens, axes=([0], [0]))
    pnorm = float(np.linalg.norm(cvec @ P))
    guarantee = sqrt(h) * side
    if pnorm > guarantee * (1 + 1e-9):
        raise DecayError("cell collision violates its own guarantee")
    return PigeonholeResult(coords, z, pnorm, guarantee, corollary_bound(l, h, K, M), h, l, K, M, hit[1] + 1)


def _point_at(l: int, half: int, index: int) -> list[int]:
    # lexicographic index into [-half, half]^l
    base = 2 * half + 1
    digits = []
    for _ in range(l):
        index, d = divmod(index, base)
        digits.append(d - half)
    return digits[::-1]


@dataclass
class PipelineResult:
    subset: tuple[int, ...]
    bounds: tuple[int, ...]
    witness: tuple[tuple[int, ...], ...]
    sqrt_det: float
    constant: float
    exponents: tuple[float, ...]
    steps: list[PigeonholeResult] = field(default_factory=list)

    @property
    def bound(self) -> float:
        out = self.constant
        for n, e in zip(self.bounds, self.exponents):
            out *= n ** (-e)
        return out


def small_det_witness_pipeline(code: MacCode, subset: Sequence[int], bounds: Sequence[int]) -> PipelineResult:
    """Sequential projections: fix the last user's word, then pigeon-hole each earlier user.

    The returned constant C does not depend on the bounds, and
    sqrt(det(A A^H)) <= C * prod N_l^(-e_l) whenever every step meets its corollary bound.
    """
    subset, bounds = tuple(subset), tuple(int(b) for b in bounds)
    if len(subset) != len(bounds) or not subset:
        raise DecayError("one bound per user in a nonempty subset is required")
    nt, k, U = code.nt, code.k, code.U
    if k < U * nt:
        raise DecayError("the pipeline needs k >= U*nt")
    u = len(subset)
    D = code.lattice_dim
    first = (1,) + (0,) * (D - 1)
    last = code.word_numeric(subset[-1], first)
    witness: list = [None] * u
    witness[-1] = first
    fixed = [row for row in last]
    had = nt ** (nt / 2)
    constant = np.linalg.norm(last) ** nt / had
    exps = [0.0] * u
    steps = []
    for pos in range(u - 2, -1, -1):
        A = []
        for r in range(nt):
            for c in fixed:
                E = np.zeros((nt, k), dtype=complex)
                E[r] = c
                A.append(E)
        res = pigeonhole_witness(code.generators[subset[pos] - 1], A, bounds[pos], strict=False)
        steps.append(res)
        witness[pos] = res.coords
        fixed.extend(res.z)
        constant *= (2.0 ** (res.l / res.h + 2) * res.h * res.K) ** nt / had
        exps[pos] = nt * (res.l - res.h) / res.h
    sd = joint_sqrt_det(code, subset, witness)
    return PipelineResult(subset, bounds, tuple(witness), sd, float(constant), tuple(exps), steps[::-1])
