"""Linear-optical networks acting on Fock states.

Scattering matrices are plain complex ``numpy`` arrays. A matrix ``U`` maps
input creation operators as ``a_k^dagger -> sum_j U[j, k] a_j^dagger``, so
column ``k`` is the image of input mode ``k`` and the multiphoton amplitude is

    <out| U |in> = Per(U[out rows, in cols]) / sqrt(prod in_i! prod out_j!)

with rows and columns repeated according to the occupations. Every matrix
built here (beam splitter, Fourier splitter) is symmetric, so the row/column
convention only matters for user-supplied matrices. Composition follows the
matrices: applying ``V`` then ``U`` is the network ``U @ V``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numba
import numpy as np

from .fock import PRUNE_THRESHOLD, FockVector, MultimodeState

MAX_PERMANENT_DIM = 20
UNITARY_TOL = 1e-10


# ---------------------------------------------------------------------------
# scattering matrices


def check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    """Return ``u`` as a complex array, raising if it is not unitary."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"scattering matrix must be square, got shape {u.shape}")
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])), initial=0.0)
    if dev > tol:
        raise ValueError(f"matrix is not unitary (max deviation {dev:.3e})")
    return u


def beam_splitter_matrix(tau: float) -> np.ndarray:
    """Gain beam splitter with transmissivity ``tau`` in (0, 1).

    The first input maps as ``a_1^dagger -> -sqrt(tau) a_1^dagger +
    sqrt(1-tau) a_2^dagger``; the real second column follows from unitarity.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    t, r = math.sqrt(tau), math.sqrt(1.0 - tau)
    return np.array([[-t, r], [r, t]], dtype=complex)


def gain_beam_splitter(g: float) -> np.ndarray:
    """:func:`beam_splitter_matrix` at ``tau = g^2 / (1 + g^2)``.

    Built from ``g`` directly so that ``1 - tau`` keeps full precision at
    large gain.
    """
    if not g > 0:
        raise ValueError(f"gain must be positive, got {g}")
    scale = math.sqrt(1.0 + g * g)
    t, r = g / scale, 1.0 / scale
    return np.array([[-t, r], [r, t]], dtype=complex)


def loss_beam_splitter(eta: float) -> np.ndarray:
    """Beam splitter coupling a mode to an environment mode (mode, env)."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    t, r = math.sqrt(eta), math.sqrt(1.0 - eta)
    return np.array([[t, -r], [r, t]], dtype=complex)


def qft_matrix(m: int) -> np.ndarray:
    """Fourier splitter ``F_m[j, k] = omega^(j k) / sqrt(m)``, ``omega = exp(-2 pi i / m)``."""
    if m < 1:
        raise ValueError("QFT dimension must be >= 1")
    jk = np.outer(np.arange(m), np.arange(m)) % m
    return np.exp(-2j * np.pi * jk / m) / math.sqrt(m)


def phase_shifter(phases: Sequence[float]) -> np.ndarray:
    return np.diag(np.exp(1j * np.asarray(phases, dtype=float)))


def embed(u: np.ndarray, modes: Sequence[int], total: int) -> np.ndarray:
    """Embed a k-mode matrix into a ``total``-mode identity on ``modes``."""
    out = np.eye(total, dtype=complex)
    idx = np.asarray(modes)
    out[np.ix_(idx, idx)] = u
    return out


def direct_sum(*blocks: np.ndarray) -> np.ndarray:
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size), dtype=complex)
    pos = 0
    for b in blocks:
        k = b.shape[0]
        out[pos : pos + k, pos : pos + k] = b
        pos += k
    return out


# ---------------------------------------------------------------------------
# permanents


@numba.njit(cache=True)
def _ryser_gray(a):
    n = a.shape[0]
    rowsums = np.zeros(n, dtype=np.complex128)
    inset = np.zeros(n, dtype=np.bool_)
    total = 0j
    size = 0
    for k in range(1, 1 << n):
        # index of the bit flipped between gray(k-1) and gray(k)
        j = 0
        while not (k >> j) & 1:
            j += 1
        if inset[j]:
            for i in range(n):
                rowsums[i] -= a[i, j]
            inset[j] = False
            size -= 1
        else:
            for i in range(n):
                rowsums[i] += a[i, j]
            inset[j] = True
            size += 1
        prod = 1.0 + 0j
        for i in range(n):
            prod *= rowsums[i]
        if (n - size) % 2 == 0:
            total += prod
        else:
            total -= prod
    return total


def permanent(matrix: np.ndarray) -> complex:
    """Exact permanent by Ryser inclusion-exclusion with Gray-code updates.

    Cost is ``O(2^m m)``; dimensions above ``MAX_PERMANENT_DIM`` are refused.
    """
    a = np.ascontiguousarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("permanent needs a square matrix")
    n = a.shape[0]
    if n > MAX_PERMANENT_DIM:
        raise ValueError(f"permanent dimension {n} exceeds guard {MAX_PERMANENT_DIM}")
    if n == 0:
        return 1.0 + 0j
    if n == 1:
        return complex(a[0, 0])
    return complex(_ryser_gray(a))


def permanent_naive(matrix: np.ndarray) -> complex:
    """Factorial-time reference permanent (dimension <= 7)."""
    a = np.asarray(matrix, dtype=complex)
    n = a.shape[0]
    if n > 7:
        raise ValueError("naive permanent is limited to dimension 7")
    rows = np.arange(n)
    return complex(sum(np.prod(a[rows, list(p)]) for p in itertools.permutations(range(n))))


def omega_submatrix(n: int, j: int, m0: int = 0) -> np.ndarray:
    """The n x n matrix behind the heralded Fourier-splitter amplitude.

    Columns: ``n - j`` copies of the first and ``j`` copies of the second
    column of ``sqrt(n+1) F_{n+1}``. Rows: every row except row ``m0``.
    """
    if not 0 <= j <= n:
        raise ValueError(f"j must lie in [0, {n}]")
    if not 0 <= m0 <= n:
        raise ValueError(f"m0 must lie in [0, {n}]")
    f = qft_matrix(n + 1) * math.sqrt(n + 1)
    rows = [r for r in range(n + 1) if r != m0]
    cols = [0] * (n - j) + [1] * j
    return f[np.ix_(rows, cols)]


# ---------------------------------------------------------------------------
# multiphoton scattering


def _repeat_index(occupation: Sequence[int]) -> np.ndarray:
    return np.repeat(np.arange(len(occupation)), occupation)


def _factorial_norm(occupation: Sequence[int]) -> float:
    return math.prod(math.factorial(k) for k in occupation)


def scatter_amplitude(u: np.ndarray, inp: Sequence[int], out: Sequence[int]) -> complex:
    """Transition amplitude ``<out| U |in>`` between occupation tuples.

    Returns exactly zero when the photon numbers differ.
    """
    u = np.asarray(u, dtype=complex)
    if len(inp) != u.shape[0] or len(out) != u.shape[0]:
        raise ValueError("occupation tuples must match the matrix dimension")
    if sum(inp) != sum(out):
        return 0j
    sub = u[np.ix_(_repeat_index(out), _repeat_index(inp))]
    return permanent(sub) / math.sqrt(_factorial_norm(inp) * _factorial_norm(out))


def compositions(total: int, parts: int) -> Iterator[tuple]:
    """All ``parts``-tuples of non-negative integers summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class MeasurementPattern:
    """Photon counts demanded on a subset of modes.

    ``modes`` are the measured mode indices and ``counts`` the heralding
    photon numbers; every other mode is kept.
    """

    modes: tuple
    counts: tuple

    def __post_init__(self):
        modes = tuple(int(m) for m in self.modes)
        counts = tuple(int(c) for c in self.counts)
        if len(modes) != len(counts):
            raise ValueError("modes and counts must have the same length")
        if len(set(modes)) != len(modes):
            raise ValueError("measured modes must be distinct")
        if any(c < 0 for c in counts):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "counts", counts)

    def as_dict(self) -> dict:
        return dict(zip(self.modes, self.counts))

    def validate(self, n_modes: int) -> None:
        if any(not 0 <= m < n_modes for m in self.modes):
            raise ValueError(f"measured modes {self.modes} out of range for {n_modes} modes")

    def kept(self, n_modes: int) -> list:
        return [m for m in range(n_modes) if m not in self.modes]


def herald_pattern(measured: Sequence[int], counts: Sequence[int]) -> MeasurementPattern:
    return MeasurementPattern(tuple(measured), tuple(counts))


def _output_tuples(total: int, n_modes: int, fixed: dict) -> Iterator[tuple]:
    """Occupations of ``n_modes`` summing to ``total`` with some entries fixed."""
    free = [i for i in range(n_modes) if i not in fixed]
    rest = total - sum(fixed.values())
    if rest < 0:
        return
    for comp in compositions(rest, len(free)):
        out = [0] * n_modes
        for i, v in fixed.items():
            out[i] = v
        for i, v in zip(free, comp):
            out[i] = v
        yield tuple(out)


def apply_network(
    u: np.ndarray,
    state: MultimodeState,
    modes: Sequence[int] | None = None,
    pattern: MeasurementPattern | None = None,
    prune: float = PRUNE_THRESHOLD,
) -> MultimodeState:
    """Evolve a pure state exactly through a linear-optical network.

    Args:
        u: scattering matrix acting on ``modes`` of ``state``.
        state: input state.
        modes: state modes the network acts on (default: all, in order).
            Remaining modes pass through untouched.
        pattern: optional measurement; only output terms agreeing with its
            counts are generated. The result is then ready for
            :func:`postselect` without enumerating discarded outcomes.
        prune: amplitudes below this magnitude are dropped.
    """
    u = check_unitary(u)
    modes = list(range(state.modes)) if modes is None else [int(m) for m in modes]
    if len(modes) != u.shape[0]:
        raise ValueError(f"network has {u.shape[0]} modes but acts on {len(modes)}")
    if len(set(modes)) != len(modes) or any(not 0 <= m < state.modes for m in modes):
        raise ValueError(f"invalid target modes {modes}")
    local = {m: i for i, m in enumerate(modes)}
    fixed_local = {}
    fixed_spectator = {}
    if pattern is not None:
        pattern.validate(state.modes)
        for m, c in pattern.as_dict().items():
            if m in local:
                fixed_local[local[m]] = c
            else:
                fixed_spectator[m] = c

    cache: dict = {}
    out: dict = {}
    for key, amp in state.terms.items():
        if any(key[m] != c for m, c in fixed_spectator.items()):
            continue
        sub_in = tuple(key[m] for m in modes)
        if sub_in not in cache:
            total = sum(sub_in)
            cache[sub_in] = [
                (sub_out, scatter_amplitude(u, sub_in, sub_out))
                for sub_out in _output_tuples(total, len(modes), fixed_local)
            ]
        for sub_out, t in cache[sub_in]:
            if t == 0:
                continue
            new = list(key)
            for i, m in enumerate(modes):
                new[m] = sub_out[i]
            new = tuple(new)
            out[new] = out.get(new, 0j) + amp * t
    terms = {k: a for k, a in out.items() if abs(a) >= prune}
    return MultimodeState(state.modes, terms)


def postselect(state: MultimodeState, pattern: MeasurementPattern):
    """Project measured modes onto the pattern's counts.

    Returns ``(kept, probability)`` where ``kept`` is the unnormalized state of
    the unmeasured modes (a :class:`FockVector` when one mode remains) and
    ``probability`` its squared norm.
    """
    pattern.validate(state.modes)
    want = pattern.as_dict()
    kept_modes = pattern.kept(state.modes)
    terms: dict = {}
    for key, amp in state.terms.items():
        if all(key[m] == c for m, c in want.items()):
            sub = tuple(key[m] for m in kept_modes)
            terms[sub] = terms.get(sub, 0j) + amp
    if not kept_modes:
        amp = terms.get((), 0j)
        return FockVector([amp]), abs(amp) ** 2
    kept = MultimodeState(len(kept_modes), terms)
    prob = kept.norm2
    if len(kept_modes) == 1:
        return kept.to_fock(), prob
    return kept, prob


# ---------------------------------------------------------------------------
# legacy scissor scattering


LEGACY_F2 = np.array([[1, 1], [-1, 1]], dtype=complex) / math.sqrt(2)

_e = lambda x: np.exp(1j * np.pi * x)  # noqa: E731
LEGACY_F4 = 0.5 * np.array(
    [
        [math.sqrt(2), 1, 1, 0],
        [-1, _e(-1 / 4), _e(1 / 4), _e(1 / 2)],
        [1, _e(-3 / 4), _e(3 / 4), _e(1 / 2)],
        [0, 1, -1, math.sqrt(2)],
    ],
    dtype=complex,
)


def _match_columns_up_to_phases(a: np.ndarray, b: np.ndarray) -> float:
    """Smallest max-deviation between ``a`` and ``b`` allowing a row permutation
    and arbitrary per-row and per-column phases."""
    rows, cols = a.shape
    best = np.inf
    for perm in itertools.permutations(range(rows)):
        pa = a[list(perm)]
        if np.max(np.abs(np.abs(pa) - np.abs(b))) > 1e-9:
            continue
        # fix row phases from the first column, column phases from the first row
        row_ph = np.exp(1j * (np.angle(pa[:, 0]) - np.angle(b[:, 0])))
        adj = pa / row_ph[:, None]
        col_ph = np.exp(1j * (np.angle(adj[0]) - np.angle(b[0])))
        adj = adj / col_ph[None, :]
        best = min(best, float(np.max(np.abs(adj - b))))
    return best


def legacy_equivalence_check() -> dict:
    """Compare the 1- and 3-photon legacy scissor splitters with Fourier splitters.

    Returns the maximal deviations: ``f2`` between ``F_2`` and ``diag(1, -1)``
    times the legacy 50:50 splitter, and ``f4`` between the middle columns of
    the legacy 4-mode splitter and the first two columns of ``F_4`` up to row
    permutation and phases.
    """
    f2 = qft_matrix(2)
    dev2 = float(np.max(np.abs(f2 - np.diag([1, -1]) @ LEGACY_F2)))
    dev4 = _match_columns_up_to_phases(LEGACY_F4[:, 1:3], qft_matrix(4)[:, 0:2])
    unit4 = float(np.max(np.abs(LEGACY_F4.conj().T @ LEGACY_F4 - np.eye(4))))
    return {"f2": dev2, "f4": dev4, "f4_unitarity": unit4}
