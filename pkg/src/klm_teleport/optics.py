"""Mode-space unitaries acting on photon-number states via matrix permanents.

Convention: a mode unitary U maps the creation operator of mode k to
sum_l U[l, k] * (creation operator of mode l).  A single photon therefore
transforms by plain matrix-vector multiplication with U, and a general
transition amplitude is

    <T| U |S> = per(U[S, T]) / sqrt(prod(S_i!) * prod(T_l!))

where U[S, T] repeats column k S_k times and row l T_l times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .fock import Occupation, PRUNE_EPS, PureState, _compositions

#: Tolerance for the unitarity check on construction.
UNITARY_TOL = 1e-12

_FACTORIAL = [math.factorial(i) for i in range(40)]


@dataclass(frozen=True)
class ModeUnitary:
    """Unitary matrix over optical modes, verified unitary on construction."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"mode unitary must be square, got shape {mat.shape}")
        dim = mat.shape[0]
        if dim < 1:
            raise ValueError("mode unitary needs at least one mode")
        deviation = float(np.max(np.abs(mat.conj().T @ mat - np.eye(dim))))
        if deviation > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (deviation {deviation:.3e})")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def fourier_unitary(points: int) -> ModeUnitary:
    """Discrete-Fourier mode transform: entry (l, k) = exp(2*pi*i*k*l/points)/sqrt(points)."""
    if points < 1:
        raise ValueError(f"point count must be positive, got {points}")
    idx = np.arange(points)
    mat = np.exp(2j * np.pi * np.outer(idx, idx) / points) / math.sqrt(points)
    return ModeUnitary(mat)


def embed(u: ModeUnitary, target_modes: Sequence[int], total_modes: int) -> ModeUnitary:
    """Place ``u`` on the listed modes of a larger interferometer, identity elsewhere."""
    targets = [int(t) for t in target_modes]
    if len(targets) != u.dimension:
        raise ValueError(
            f"target mode list has {len(targets)} entries for a {u.dimension}-mode unitary"
        )
    if len(set(targets)) != len(targets):
        raise ValueError(f"target modes must be distinct, got {targets}")
    if any(t < 0 or t >= total_modes for t in targets):
        raise ValueError(f"target modes {targets} out of range for {total_modes} modes")
    mat = np.eye(total_modes, dtype=complex)
    mat[np.ix_(targets, targets)] = u.matrix
    return ModeUnitary(mat)


def _permanent_rows(rows: list[list[complex]]) -> complex:
    """Permanent of a small square matrix given as a list of rows.

    Inclusion-exclusion over column subsets with Gray-code updates, so each
    step costs O(k); total O(2^k * k).
    """
    k = len(rows)
    if k == 0:
        return 1 + 0j
    if k == 1:
        return rows[0][0]
    if k == 2:
        return rows[0][0] * rows[1][1] + rows[0][1] * rows[1][0]
    if k == 3:
        (a, b, c), (d, e, f), (g, h, i) = rows
        return a * (e * i + f * h) + b * (d * i + f * g) + c * (d * h + e * g)
    cols = list(zip(*rows))
    sums = [0j] * k
    total = 0j
    gray = 0
    for idx in range(1, 1 << k):
        new_gray = idx ^ (idx >> 1)
        bit = gray ^ new_gray
        j = bit.bit_length() - 1
        col = cols[j]
        if new_gray & bit:
            for i in range(k):
                sums[i] += col[i]
        else:
            for i in range(k):
                sums[i] -= col[i]
        gray = new_gray
        term = 1 + 0j
        for s in sums:
            term *= s
        if (k - gray.bit_count()) & 1:
            total -= term
        else:
            total += term
    return total


def permanent(matrix) -> complex:
    """Permanent of a square complex matrix; the empty matrix has permanent 1."""
    mat = np.asarray(matrix, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {mat.shape}")
    return complex(_permanent_rows([list(row) for row in mat]))


def _expand(occupation: Sequence[int]) -> list[int]:
    return [idx for idx, count in enumerate(occupation) for _ in range(count)]


def transition_amplitude(u: ModeUnitary, source: Occupation, target: Occupation) -> complex:
    """Amplitude <target| U |source>; zero when photon numbers differ."""
    if len(source) != u.dimension or len(target) != u.dimension:
        raise ValueError("occupations must match the unitary's mode count")
    if any(k < 0 for k in source) or any(k < 0 for k in target):
        raise ValueError("occupations must be nonnegative")
    if sum(source) != sum(target):
        return 0j
    cols = _expand(source)
    rows = _expand(target)
    mat = u.matrix
    sub = [[mat[r, c] for c in cols] for r in rows]
    for row in sub:
        if not any(row):
            return 0j
    fact = 1
    for k in source:
        fact *= _FACTORIAL[k]
    for k in target:
        fact *= _FACTORIAL[k]
    return complex(_permanent_rows(sub)) / math.sqrt(fact)


def _non_identity_modes(mat: np.ndarray) -> tuple[int, ...]:
    """Modes on which the matrix differs from the identity (exact comparison)."""
    dim = mat.shape[0]
    active = []
    for k in range(dim):
        if mat[k, k] != 1.0:
            active.append(k)
            continue
        row = mat[k].copy()
        col = mat[:, k].copy()
        row[k] = 0.0
        col[k] = 0.0
        if np.any(row) or np.any(col):
            active.append(k)
    return tuple(active)


def apply(u: ModeUnitary, state: PureState) -> PureState:
    """Evolve a photon-number state through a mode unitary.

    Photon number is conserved; amplitudes below the pruning threshold are
    dropped from the result.  Modes on which the unitary acts as the exact
    identity are passed through without enumeration, which makes embedded
    small unitaries cheap on wide states.
    """
    if u.dimension != state.mode_count:
        raise ValueError(
            f"unitary acts on {u.dimension} modes but the state has {state.mode_count}"
        )
    state.require_normalized()
    mat = u.matrix
    active = _non_identity_modes(mat)
    if not active:
        return state.pruned()

    out: dict[Occupation, complex] = {}
    for occ, amp in state.amplitudes.items():
        src = tuple(occ[k] for k in active)
        photons = sum(src)
        cols = [k for pos, k in enumerate(active) for _ in range(src[pos])]
        src_fact = 1
        for k in src:
            src_fact *= _FACTORIAL[k]
        base = list(occ)
        for tgt in _compositions(len(active), photons):
            rows = [l for pos, l in enumerate(active) for _ in range(tgt[pos])]
            sub = [[mat[r, c] for c in cols] for r in rows]
            skip = False
            for row in sub:
                if not any(row):
                    skip = True
                    break
            if skip:
                continue
            value = _permanent_rows(sub)
            if value == 0:
                continue
            tgt_fact = 1
            for k in tgt:
                tgt_fact *= _FACTORIAL[k]
            for pos, k in enumerate(active):
                base[k] = tgt[pos]
            key = tuple(base)
            out[key] = out.get(key, 0j) + amp * value / math.sqrt(src_fact * tgt_fact)

    result = PureState.from_terms(state.mode_count, out)
    drift = abs(result.norm() - 1.0)
    if drift > 1e-10:
        raise RuntimeError(f"unitary application lost normalization (drift {drift:.3e})")
    return result
