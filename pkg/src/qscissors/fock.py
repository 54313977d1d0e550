"""Truncated bosonic states in the Fock basis.

Three containers are used throughout the package:

* :class:`FockVector` -- a single-mode pure state ``sum_j c_j |j>`` kept up to
  a photon-number cutoff. Vectors need not be normalized; an unnormalized
  vector carries its squared norm as a probability weight (this is how
  heralded protocol outputs report their success probability).
* :class:`MultimodeState` -- a sparse pure state over occupation tuples.
* :class:`DensityOperator` -- a dense mixed state over one or more modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

PRUNE_THRESHOLD = 1e-15


class TruncationError(ValueError):
    """Raised when a Fock cutoff discards more weight than allowed."""


@dataclass(frozen=True, eq=False)
class FockVector:
    """Single-mode pure state with amplitudes ``c_0 .. c_cutoff``.

    Args:
        amplitudes: complex amplitudes indexed by photon number.
        truncation_loss: probability weight of the discarded tail, as
            reported by the constructor that produced the vector.
    """

    amplitudes: np.ndarray
    truncation_loss: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.size == 0:
            raise ValueError("a FockVector needs at least the vacuum amplitude")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def cutoff(self) -> int:
        return self.amplitudes.size - 1

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def normalized(self) -> "FockVector":
        norm2 = self.norm2
        if norm2 <= 0.0:
            raise ValueError("cannot normalize a zero vector")
        return FockVector(self.amplitudes / math.sqrt(norm2))

    def resized(self, cutoff: int) -> "FockVector":
        """Zero-pad or hard-truncate to a new cutoff."""
        out = np.zeros(cutoff + 1, dtype=complex)
        keep = min(cutoff, self.cutoff) + 1
        out[:keep] = self.amplitudes[:keep]
        return FockVector(out)

    def __len__(self):
        return self.amplitudes.size

    def __repr__(self):
        return f"FockVector(cutoff={self.cutoff}, norm2={self.norm2:.6g})"


@dataclass(frozen=True, eq=False)
class MultimodeState:
    """Sparse pure state of an ``modes``-mode bosonic system.

    ``terms`` maps occupation tuples to complex amplitudes. ``cutoff`` is the
    largest total photon number present (computed when omitted).
    """

    modes: int
    terms: Mapping[tuple, complex] = field(default_factory=dict)
    cutoff: int | None = None

    def __post_init__(self):
        if self.modes < 1:
            raise ValueError("a MultimodeState needs at least one mode")
        terms = {}
        for key, amp in self.terms.items():
            key = tuple(int(k) for k in key)
            if len(key) != self.modes:
                raise ValueError(f"occupation {key} does not have {self.modes} entries")
            if min(key) < 0:
                raise ValueError(f"negative occupation in {key}")
            terms[key] = complex(amp)
        top = max((sum(k) for k in terms), default=0)
        if self.cutoff is None:
            object.__setattr__(self, "cutoff", top)
        elif top > self.cutoff:
            raise ValueError(f"term with {top} photons exceeds cutoff {self.cutoff}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_fock(cls, vec: FockVector) -> "MultimodeState":
        return cls(1, {(j,): c for j, c in enumerate(vec.amplitudes) if c != 0})

    @classmethod
    def product(cls, occupations: Sequence[int], amplitude: complex = 1.0) -> "MultimodeState":
        """A single occupation-number basis state."""
        return cls(len(occupations), {tuple(occupations): amplitude})

    @property
    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def pruned(self, threshold: float = PRUNE_THRESHOLD) -> "MultimodeState":
        kept = {k: a for k, a in self.terms.items() if abs(a) >= threshold}
        return MultimodeState(self.modes, kept)

    def scaled(self, factor: complex) -> "MultimodeState":
        return MultimodeState(self.modes, {k: a * factor for k, a in self.terms.items()})

    def tensor(self, other: "MultimodeState") -> "MultimodeState":
        terms = {}
        for k1, a1 in self.terms.items():
            for k2, a2 in other.terms.items():
                terms[k1 + k2] = a1 * a2
        return MultimodeState(self.modes + other.modes, terms)

    def insert_modes(self, position: int, occupations: Sequence[int]) -> "MultimodeState":
        """Insert modes holding fixed occupations before ``position``."""
        occ = tuple(occupations)
        terms = {k[:position] + occ + k[position:]: a for k, a in self.terms.items()}
        return MultimodeState(self.modes + len(occ), terms)

    def to_fock(self, cutoff: int | None = None) -> FockVector:
        if self.modes != 1:
            raise ValueError("only a single-mode state converts to a FockVector")
        top = max((k[0] for k in self.terms), default=0)
        cutoff = top if cutoff is None else cutoff
        amps = np.zeros(cutoff + 1, dtype=complex)
        for (j,), a in self.terms.items():
            if j <= cutoff:
                amps[j] += a
        return FockVector(amps)

    def to_dense(self, dims: Sequence[int] | None = None) -> np.ndarray:
        """Dense vector in the kron-ordered basis of per-mode dimensions."""
        if dims is None:
            dims = [max((k[i] for k in self.terms), default=0) + 1 for i in range(self.modes)]
        dims = tuple(int(d) for d in dims)
        vec = np.zeros(int(np.prod(dims)), dtype=complex)
        for key, amp in self.terms.items():
            if any(n >= d for n, d in zip(key, dims)):
                raise TruncationError(f"occupation {key} does not fit dims {dims}")
            vec[np.ravel_multi_index(key, dims)] += amp
        return vec

    def __repr__(self):
        return f"MultimodeState(modes={self.modes}, terms={len(self.terms)}, norm2={self.norm2:.6g})"


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Dense (possibly sub-normalized) mixed state.

    ``matrix`` acts on the kron-ordered product basis with per-mode dimensions
    ``dims``; mode 0 is the most significant index. The trace may be below one
    for heralded states, where it equals the heralding probability.
    """

    matrix: np.ndarray
    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in np.atleast_1d(self.dims))
        mat = np.array(self.matrix, dtype=complex)
        size = int(np.prod(dims))
        if mat.shape != (size, size):
            raise ValueError(f"matrix shape {mat.shape} does not match dims {dims}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_pure(cls, state: FockVector | MultimodeState, dims: Sequence[int] | None = None):
        if isinstance(state, FockVector):
            vec = state.amplitudes if dims is None else state.resized(dims[0] - 1).amplitudes
            return cls(np.outer(vec, vec.conj()), (vec.size,))
        if dims is None:
            dims = [max((k[i] for k in state.terms), default=0) + 1 for i in range(state.modes)]
        vec = state.to_dense(dims)
        return cls(np.outer(vec, vec.conj()), tuple(dims))

    @property
    def modes(self) -> int:
        return len(self.dims)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalized(self) -> "DensityOperator":
        tr = self.trace
        if tr <= 0.0:
            raise ValueError("cannot normalize a state with non-positive trace")
        return DensityOperator(self.matrix / tr, self.dims)

    @property
    def purity(self) -> float:
        """``Tr(rho^2) / Tr(rho)^2``."""
        tr = self.trace
        return float(np.vdot(self.matrix, self.matrix).real / tr**2)

    def tensor_view(self) -> np.ndarray:
        return self.matrix.reshape(self.dims + self.dims)

    def partial_trace(self, keep: Iterable[int]) -> "DensityOperator":
        keep = sorted(keep)
        m = self.modes
        letters = "abcdefghijklmnopqrstuvwxyz"
        rows = list(letters[:m])
        cols = list(letters[m : 2 * m])
        for i in range(m):
            if i not in keep:
                cols[i] = rows[i]
        out = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
        reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out, self.tensor_view())
        dims = tuple(self.dims[i] for i in keep)
        size = int(np.prod(dims))
        return DensityOperator(reduced.reshape(size, size), dims)

    def partial_transpose(self, mode: int) -> np.ndarray:
        t = self.tensor_view()
        m = self.modes
        axes = list(range(2 * m))
        axes[mode], axes[m + mode] = axes[m + mode], axes[mode]
        size = self.matrix.shape[0]
        return t.transpose(axes).reshape(size, size)

    def resized(self, dims: Sequence[int]) -> "DensityOperator":
        """Zero-pad or truncate every mode to new dimensions."""
        dims = tuple(int(d) for d in dims)
        src = self.tensor_view()
        out = np.zeros(dims + dims, dtype=complex)
        sl = tuple(slice(0, min(a, b)) for a, b in zip(self.dims, dims))
        out[sl + sl] = src[sl + sl]
        size = int(np.prod(dims))
        return DensityOperator(out.reshape(size, size), dims)

    def validate(self, herm_tol: float = 1e-10, eig_tol: float = 1e-9) -> None:
        mat = self.matrix
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > herm_tol:
            raise ValueError("density operator is not Hermitian")
        evals = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
        if evals.size and evals.min() < -eig_tol:
            raise ValueError(f"density operator has negative eigenvalue {evals.min():.3e}")
        if not -eig_tol <= self.trace <= 1 + eig_tol:
            raise ValueError(f"trace {self.trace} outside [0, 1]")

    def __repr__(self):
        return f"DensityOperator(dims={self.dims}, trace={self.trace:.6g})"


def _check_squeezing(value: float, name: str) -> None:
    if not 0.0 <= value < 1.0:
        raise ValueError(f"{name} must lie in [0, 1), got {value}")


def recommended_cutoff(mean_photons: float, floor: int = 10) -> int:
    """Cutoff heuristic ``ceil(lam + 6 sqrt(lam))`` with a lower bound.

    The floor matters for weak states: at ``lam = 0.09`` the bare heuristic
    gives 2, which leaves ~1e-4 of Poisson weight behind.
    """
    if mean_photons < 0:
        raise ValueError("mean photon number must be non-negative")
    return max(int(math.ceil(mean_photons + 6.0 * math.sqrt(mean_photons))), floor)


def coherent_state(alpha: complex, cutoff: int, strict: bool = False, max_loss: float = 1e-6) -> FockVector:
    """Coherent state ``|alpha>`` truncated at ``cutoff``.

    Amplitudes are ``exp(-|alpha|^2/2) alpha^j / sqrt(j!)``; the discarded tail
    ``1 - sum |c_j|^2`` is stored as ``truncation_loss``. With ``strict`` a
    loss above ``max_loss`` raises :class:`TruncationError`.
    """
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    alpha = complex(alpha)
    j = np.arange(cutoff + 1)
    if alpha == 0:
        amps = np.zeros(cutoff + 1, dtype=complex)
        amps[0] = 1.0
    else:
        log_mag = -abs(alpha) ** 2 / 2 + j * math.log(abs(alpha)) - 0.5 * gammaln(j + 1)
        amps = np.exp(log_mag) * np.exp(1j * np.angle(alpha) * j)
    loss = float(poisson.sf(cutoff, abs(alpha) ** 2)) if alpha != 0 else 0.0
    if strict and loss > max_loss:
        raise TruncationError(f"cutoff {cutoff} drops {loss:.3e} of coherent weight")
    return FockVector(amps, truncation_loss=loss)


def smsv_state(s: float, cutoff: int, strict: bool = False, max_loss: float = 1e-6) -> FockVector:
    """Single-mode squeezed vacuum with squeezing parameter ``s`` in [0, 1).

    Only even photon numbers are populated,
    ``c_2j = (1-s^2)^(1/4) sqrt((2j)!) s^j / (2^j j!)``; odd amplitudes are
    exactly zero.
    """
    _check_squeezing(s, "s")
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    amps = np.zeros(cutoff + 1, dtype=complex)
    c = (1.0 - s * s) ** 0.25
    amps[0] = c
    for j in range(1, cutoff // 2 + 1):
        c *= s * math.sqrt((2 * j - 1) / (2 * j))
        amps[2 * j] = c
    loss = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    if strict and loss > max_loss:
        raise TruncationError(f"cutoff {cutoff} drops {loss:.3e} of squeezed-vacuum weight")
    return FockVector(amps, truncation_loss=loss)


def tmsv_state(chi: float, cutoff: int) -> MultimodeState:
    """Two-mode squeezed vacuum ``sqrt(1-chi^2) sum_k chi^k |k,k>`` for k <= cutoff."""
    _check_squeezing(chi, "chi")
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    norm = math.sqrt(1.0 - chi * chi)
    terms = {(k, k): norm * chi**k for k in range(cutoff + 1)}
    if chi == 0:
        terms = {(0, 0): 1.0}
    return MultimodeState(2, terms)


def tmsv_truncation_loss(chi: float, cutoff: int) -> float:
    """Weight of the discarded ``k > cutoff`` tail of :func:`tmsv_state`."""
    _check_squeezing(chi, "chi")
    return chi ** (2 * (cutoff + 1))


def cat_state(alpha: float, cutoff: int) -> FockVector:
    """Normalized even cat state ``|alpha> + |-alpha>`` truncated at ``cutoff``."""
    coh = coherent_state(alpha, cutoff).amplitudes
    even = np.where(np.arange(cutoff + 1) % 2 == 0, 2.0 * coh, 0.0)
    norm2 = 2.0 * (1.0 + math.exp(-2.0 * abs(alpha) ** 2))
    loss = max(0.0, 1.0 - float(np.sum(np.abs(even) ** 2)) / norm2)
    return FockVector(even / math.sqrt(norm2), truncation_loss=loss)


def fock_state(n: int, cutoff: int | None = None) -> FockVector:
    cutoff = n if cutoff is None else cutoff
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[n] = 1.0
    return FockVector(amps)


def _common(a: FockVector, b: FockVector) -> tuple[np.ndarray, np.ndarray]:
    size = max(a.cutoff, b.cutoff)
    return a.resized(size).amplitudes, b.resized(size).amplitudes


def state_fidelity(a: FockVector, b: FockVector, normalize: bool = True) -> float:
    """Squared overlap ``|<a|b>|^2`` of two pure states (normalized first by default)."""
    if a.norm2 == 0.0 or b.norm2 == 0.0:
        raise ValueError("fidelity is undefined for a zero-norm state")
    if normalize:
        a, b = a.normalized(), b.normalized()
    va, vb = _common(a, b)
    return float(min(1.0, abs(np.vdot(va, vb)) ** 2))


def mean_photon_number(state: FockVector | DensityOperator) -> float:
    """``<a^dagger a>`` of a single-mode state, normalized by its weight."""
    if isinstance(state, FockVector):
        p = state.probabilities
        return float(np.dot(np.arange(p.size), p) / p.sum())
    if state.modes != 1:
        raise ValueError("mean_photon_number expects a single-mode density operator")
    diag = np.diag(state.matrix).real
    return float(np.dot(np.arange(diag.size), diag) / diag.sum())
