"""Pure-loss channels, lossy scissors and the distributed TMSV relay.

A relay splits the scissor across a lossy link: Alice sends her input
through a channel of transmissivity ``eta_A`` to the Fourier measurement
station while Bob's gain-splitter output travels through ``eta_B``. The
total transmissivity is ``eta = eta_A * eta_B``; "middle" placement uses
``eta_A = eta_B = sqrt(eta)`` and "end" placement ``eta_A = eta, eta_B = 1``.

Every closed form here has a brute-force counterpart (``dilated_*``) that
realizes each loss as a beam splitter onto a vacuum environment mode which
is traced out afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln, xlogy

from .fock import DensityOperator, FockVector, MultimodeState, tmsv_state
from .interferometer import (
    MeasurementPattern,
    apply_network,
    direct_sum,
    embed,
    gain_beam_splitter,
    loss_beam_splitter,
    qft_matrix,
)

COMPLETENESS_TOL = 1e-8
LOSS_SUM_TOL = 1e-14
LOSS_SUM_CAP = 60
FULL_LN_MAX_DIM = 4000
PLACEMENTS = ("middle", "end")


def distance_to_eta(distance_km: float) -> float:
    """Fibre transmissivity ``10^(-0.02 d)`` for a distance in km."""
    return 10.0 ** (-0.02 * distance_km)


def eta_to_distance(eta: float) -> float:
    return -50.0 * math.log10(eta)


@dataclass(frozen=True)
class LossChannel:
    """Pure-loss channel with Kraus operators ``A_l``, ``l`` lost photons.

    ``max_loss_terms`` truncates the Kraus sum; ``None`` keeps every term
    that can act on the truncated space, which makes it exactly complete.
    """

    eta: float
    max_loss_terms: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"transmissivity must lie in [0, 1], got {self.eta}")

    def kraus(self, cutoff: int) -> list[np.ndarray]:
        """Kraus matrices on the ``cutoff + 1`` dimensional space."""
        dim = cutoff + 1
        top = cutoff if self.max_loss_terms is None else min(cutoff, self.max_loss_terms)
        ops = []
        m = np.arange(dim)
        for l in range(top + 1):
            a = np.zeros((dim, dim))
            src = m[: dim - l] + l
            if self.eta == 0.0:
                amp = np.where(m[: dim - l] == 0, 1.0, 0.0)
            else:
                log_amp = 0.5 * (gammaln(src + 1) - gammaln(m[: dim - l] + 1) - gammaln(l + 1))
                amp = np.exp(log_amp) * self.eta ** (m[: dim - l] / 2) * (1 - self.eta) ** (l / 2)
            a[m[: dim - l], src] = amp
            ops.append(a)
        return ops

    def completeness_deviation(self, cutoff: int) -> float:
        """``max |sum_l A_l^dagger A_l - I|`` on the truncated space."""
        total = sum(a.T @ a for a in self.kraus(cutoff))
        return float(np.max(np.abs(total - np.eye(cutoff + 1))))


def _apply_single_mode(rho: DensityOperator, mode: int, ops: list[np.ndarray]) -> DensityOperator:
    t = rho.tensor_view()
    m = rho.modes
    out = np.zeros_like(t)
    for a in ops:
        x = np.moveaxis(np.tensordot(a, t, axes=(1, mode)), 0, mode)
        x = np.moveaxis(np.tensordot(x, a.T, axes=(m + mode, 0)), -1, m + mode)
        out += x
    size = rho.matrix.shape[0]
    return DensityOperator(out.reshape(size, size), rho.dims)


def apply_loss(channel: LossChannel, rho: DensityOperator, mode: int = 0) -> DensityOperator:
    """Apply the Kraus sum to one mode of ``rho``.

    Raises:
        ValueError: the truncated Kraus sum deviates from completeness by
            more than ``1e-8`` on this mode's space.
    """
    if not 0 <= mode < rho.modes:
        raise ValueError(f"mode {mode} out of range for {rho.modes} modes")
    cutoff = rho.dims[mode] - 1
    dev = channel.completeness_deviation(cutoff)
    if dev > COMPLETENESS_TOL:
        raise ValueError(f"Kraus sum incomplete by {dev:.2e} at cutoff {cutoff}")
    return _apply_single_mode(rho, mode, channel.kraus(cutoff))


@dataclass(frozen=True)
class RelayConfig:
    """Distributed scissor with per-side transmissivities and TMSV squeezing ``chi``."""

    n: int
    g: float
    eta_A: float
    eta_B: float
    chi: float = 0.25

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        if not self.g >= 0:
            raise ValueError("gain must be non-negative")
        for name in ("eta_A", "eta_B"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1]")
        if not 0.0 <= self.chi < 1.0:
            raise ValueError("chi must lie in [0, 1)")

    @classmethod
    def from_placement(cls, n: int, g: float, eta: float, placement: str = "middle", chi: float = 0.25):
        if placement == "middle":
            return cls(n, g, math.sqrt(eta), math.sqrt(eta), chi)
        if placement == "end":
            return cls(n, g, eta, 1.0, chi)
        raise ValueError(f"placement must be one of {PLACEMENTS}")

    @classmethod
    def from_distance(cls, n: int, g: float, distance_km: float, placement: str = "middle", chi: float = 0.25):
        return cls.from_placement(n, g, distance_to_eta(distance_km), placement, chi)

    @property
    def eta(self) -> float:
        return self.eta_A * self.eta_B

    @property
    def distance(self) -> float:
        return eta_to_distance(self.eta)

    @property
    def placement(self) -> str:
        if math.isclose(self.eta_A, self.eta_B):
            return "middle"
        if self.eta_B == 1.0:
            return "end"
        return "custom"

    @property
    def effective_gain(self) -> float:
        return self.g * math.sqrt(self.eta_A / self.eta_B)


def _branch_log_weights(config: RelayConfig, l_a: int, l_b: int, j: np.ndarray) -> np.ndarray:
    """Log magnitude of the kept-mode amplitude without the input coefficient."""
    n, g, ea, eb = config.n, config.g, config.eta_A, config.eta_B
    k = j + l_a + l_b
    out = (
        0.5 * gammaln(n + 1)
        - 0.5 * n * math.log(n + 1)
        - 0.5 * n * math.log1p(g * g)
        + 0.5 * (gammaln(k + 1) - gammaln(j + 1) - gammaln(l_b + 1) - gammaln(l_a + 1))
        + 0.5 * (n - l_b) * math.log(eb)
        + 0.5 * l_b * math.log(ea)
        + 0.5 * j * (math.log(ea) - math.log(eb))
    )
    out = out + (j * math.log(g) if g > 0 else np.where(j == 0, 0.0, -np.inf))
    if l_a:
        out = out + 0.5 * l_a * math.log1p(-ea) if ea < 1 else out - np.inf
    if l_b:
        out = out + 0.5 * l_b * math.log1p(-eb) if eb < 1 else out - np.inf
    return out


def _loss_branches(config: RelayConfig, coeff, k_max: int | None):
    """Yield ``(l_A, l_B, j, vector)`` for every loss branch with non-negligible weight.

    ``coeff(k)`` gives the input amplitude for ``k`` photons (vectorized).
    The ``l_A`` sum stops once a whole ``l_A`` slice adds less than
    ``LOSS_SUM_TOL`` of the accumulated trace, or after ``LOSS_SUM_CAP`` terms.
    """
    n = config.n
    total = 0.0
    for l_a in range(LOSS_SUM_CAP + 1):
        if k_max is not None and l_a > k_max:
            break
        added = 0.0
        for l_b in range(n + 1):
            j = np.arange(n - l_b + 1)
            k = j + l_a + l_b
            c = coeff(k)
            with np.errstate(divide="ignore", invalid="ignore"):
                vec = np.exp(_branch_log_weights(config, l_a, l_b, j)) * c
            vec = np.nan_to_num(vec)
            w = float(np.sum(np.abs(vec) ** 2))
            if w == 0.0:
                continue
            added += w
            yield l_a, l_b, j, vec
        total += added
        if l_a > 0 and (total == 0.0 or added < LOSS_SUM_TOL * total):
            break
        if config.eta_A == 1.0:
            break


def lossy_nqs_rho(config: RelayConfig, psi: FockVector) -> DensityOperator:
    """Kept-mode state of a scissor with loss on both arms (unnormalized).

    Its trace is the success probability. With ``eta_A = eta_B = 1`` it
    reduces to the pure lossless scissor output.
    """
    amps = psi.amplitudes

    def coeff(k):
        return np.where(k <= psi.cutoff, amps[np.minimum(k, psi.cutoff)], 0.0)

    rho = np.zeros((config.n + 1, config.n + 1), dtype=complex)
    for _, _, j, vec in _loss_branches(config, coeff, psi.cutoff):
        rho[np.ix_(j, j)] += np.outer(vec, vec.conj())
    return DensityOperator(rho, (config.n + 1,))


def relay_output_rho(config: RelayConfig) -> DensityOperator:
    """Two-mode state (Alice's reference A, Bob's mode B) after the relay.

    Alice keeps one arm of a TMSV and sends the other through the relay.
    The result is unnormalized; its trace is the success probability.
    """
    chi = config.chi
    norm = math.sqrt(1.0 - chi * chi)

    def coeff(k):
        return norm * np.power(chi, k) if chi > 0 else np.where(k == 0, 1.0, 0.0)

    branches = list(_loss_branches(config, coeff, None if chi > 0 else 0))
    d_a = max(int(j[-1]) + l_a + l_b for l_a, l_b, j, _ in branches) + 1
    d_b = config.n + 1
    rho = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    for l_a, l_b, j, vec in branches:
        idx = (j + l_a + l_b) * d_b + j
        rho[np.ix_(idx, idx)] += np.outer(vec, vec.conj())
    return DensityOperator(rho, (d_a, d_b))


def relay_success_probability(config: RelayConfig) -> float:
    """Closed-form trace of :func:`relay_output_rho` (``l_A`` summed analytically)."""
    n, g, chi, ea, eb = config.n, config.g, config.chi, config.eta_A, config.eta_B
    pref = math.exp(gammaln(n + 1) - n * math.log(n + 1) - n * math.log1p(g * g)) * (1 - chi * chi)
    denom = 1 - chi * chi + chi * chi * ea
    s = 0.0
    for l_b in range(n + 1):
        for j in range(n - l_b + 1):
            s += (
                (g * chi * math.sqrt(ea / eb)) ** (2 * j)
                * (chi * chi * (1 - eb) * ea) ** l_b
                * eb ** (n - l_b)
                / denom ** (1 + j + l_b)
                * math.comb(j + l_b, j)
            )
    return pref * s


# ---------------------------------------------------------------------------
# covariance matrices and entanglement metrics


def _entropy_h(x: float) -> float:
    """Von Neumann entropy of a thermal mode with symplectic eigenvalue ``x``."""
    if x <= 1.0:
        return 0.0
    p, m = (x + 1) / 2, (x - 1) / 2
    return float(xlogy(p, p) - xlogy(m, m)) / math.log(2)


@dataclass(frozen=True)
class CovarianceMatrix:
    """Two-mode covariance matrix in the standard form with entries ``a, b, c``.

    Vacuum has unit variance.
    """

    a: float
    b: float
    c: float

    @property
    def matrix(self) -> np.ndarray:
        a, b, c = self.a, self.b, self.c
        return np.array([[a, 0, c, 0], [0, a, 0, -c], [c, 0, b, 0], [0, -c, 0, b]], dtype=float)

    def _eigs(self, delta: float) -> tuple[float, float]:
        det = (self.a * self.b - self.c**2) ** 2
        disc = math.sqrt(max(delta * delta - 4 * det, 0.0))
        return math.sqrt(max((delta - disc) / 2, 0.0)), math.sqrt((delta + disc) / 2)

    def symplectic_eigenvalues(self) -> tuple[float, float]:
        """``(nu_minus, nu_plus)``."""
        return self._eigs(self.a**2 + self.b**2 - 2 * self.c**2)

    def transposed_symplectic_eigenvalues(self) -> tuple[float, float]:
        """Symplectic eigenvalues of the partial transpose."""
        return self._eigs(self.a**2 + self.b**2 + 2 * self.c**2)

    def validate(self, tol: float = 1e-9) -> None:
        if self.a < 1 - tol or self.b < 1 - tol:
            raise ValueError(f"unphysical covariance matrix: a={self.a}, b={self.b}")
        nu = self.symplectic_eigenvalues()[0]
        if nu < 1 - tol:
            raise ValueError(f"unphysical covariance matrix: symplectic eigenvalue {nu}")


def covariance_from_rho(rho: DensityOperator) -> CovarianceMatrix:
    """Standard-form covariance matrix of a two-mode state (normalized internally)."""
    if rho.modes != 2:
        raise ValueError("covariance_from_rho expects a two-mode state")
    tr = rho.trace
    if tr <= 0:
        raise ValueError("state has non-positive trace")
    t = rho.tensor_view() / tr
    d_a, d_b = rho.dims
    diag = np.einsum("ijij->ij", t).real
    n_a = float(np.sum(np.arange(d_a)[:, None] * diag))
    n_b = float(np.sum(np.arange(d_b)[None, :] * diag))
    # Tr(a_A a_B rho) = sum sqrt((i+1)(j+1)) rho[(i+1, j+1), (i, j)]
    sub = t[1:, 1:, :-1, :-1]
    w = np.sqrt(np.arange(1, d_a)[:, None] * np.arange(1, d_b)[None, :])
    ab = np.einsum("ij,ijij->", w, sub)
    return CovarianceMatrix(1 + 2 * n_a, 1 + 2 * n_b, 2 * float(ab.real))


def log_negativity_full(rho: DensityOperator, max_dim: int = FULL_LN_MAX_DIM) -> float:
    """``log2`` of the trace norm of the partial transpose (normalized internally)."""
    if rho.modes != 2:
        raise ValueError("log negativity expects a two-mode state")
    size = rho.matrix.shape[0]
    if size > max_dim:
        raise ValueError(f"state dimension {size} exceeds the guard {max_dim}")
    pt = rho.normalized().partial_transpose(1)
    evals = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return max(0.0, float(math.log2(np.sum(np.abs(evals)))))


def log_negativity_gaussian(cm: CovarianceMatrix) -> float:
    """Log negativity from second moments only."""
    cm.validate()
    nu = cm.transposed_symplectic_eigenvalues()[0]
    return max(0.0, -math.log2(nu)) if nu > 0 else math.inf


def gaussian_rci(cm: CovarianceMatrix, reduced: str = "A") -> float:
    """Gaussian reverse coherent information ``S(reduced) - S(AB)`` in bits.

    ``reduced`` picks the local block whose entropy is used. The default is
    the reference mode ``A`` that never crosses the channel; with it a pure
    loss channel fed by a strongly squeezed TMSV approaches ``-log2(1-eta)``.
    Passing ``"B"`` gives the forward coherent information instead.
    """
    cm.validate()
    if reduced not in ("A", "B"):
        raise ValueError("reduced must be 'A' or 'B'")
    local = cm.b if reduced == "B" else cm.a
    nu_m, nu_p = cm.symplectic_eigenvalues()
    return _entropy_h(local) - _entropy_h(nu_m) - _entropy_h(nu_p)


def plob_bound(eta: float) -> float:
    """Repeaterless capacity ``-log2(1 - eta)`` of a pure-loss channel."""
    if not 0.0 <= eta < 1.0:
        raise ValueError("eta must lie in [0, 1)")
    return -math.log2(1.0 - eta)


def tmsv_covariance(chi: float, eta: float = 1.0) -> CovarianceMatrix:
    """TMSV with one arm sent through pure loss ``eta`` (no scissor)."""
    v = (1 + chi * chi) / (1 - chi * chi)
    c = 2 * chi / (1 - chi * chi)
    return CovarianceMatrix(v, eta * v + 1 - eta, math.sqrt(eta) * c)


def relay_metrics(config: RelayConfig) -> dict:
    """Entanglement metrics and success probability of one relay point."""
    rho = relay_output_rho(config)
    cm = covariance_from_rho(rho)
    return {
        "ln_full": log_negativity_full(rho),
        "ln_gaussian": log_negativity_gaussian(cm),
        "rci": gaussian_rci(cm),
        "probability": rho.trace,
        "plob": plob_bound(config.eta) if config.eta < 1 else math.inf,
    }


def optimal_gain(n: int, eta: float, placement: str, chi: float, grid, metric: str = "ln_full") -> tuple[float, float]:
    """Grid point maximizing a relay metric; returns ``(g, value)``."""
    best = (math.nan, -math.inf)
    for g in grid:
        value = relay_metrics(RelayConfig.from_placement(n, float(g), eta, placement, chi))[metric]
        if value > best[1]:
            best = (float(g), value)
    return best


def maximize_over_gain(value, g0: float, lo: float = 0.05, hi: float = 5.0, points: int = 13) -> tuple[float, float]:
    """Maximize ``value(g)`` over ``g = x g0`` with ``x`` in ``[lo, hi]``.

    A geometric grid in ``x`` locates the peak, then a bounded scalar search
    refines it between the neighbouring grid points. Returns ``(g, value)``.
    """
    grid = np.linspace(math.log(lo), math.log(hi), points)
    vals = [value(g0 * math.exp(x)) for x in grid]
    i = int(np.argmax(vals))
    best = (g0 * math.exp(grid[i]), float(vals[i]))
    if vals[i] <= 0.0:
        return best
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    res = minimize_scalar(lambda x: -value(g0 * math.exp(x)), bounds=(a, b), method="bounded", options={"xatol": 1e-3})
    if -res.fun > best[1]:
        return g0 * math.exp(res.x), float(-res.fun)
    return best


def balanced_gain(config: RelayConfig) -> float:
    """Gain making the loss-free block flat: ``g chi sqrt(eta_A/eta_B) = 1``."""
    return math.sqrt(config.eta_B / config.eta_A) / config.chi


def scaling_gain(eta: float, placement: str) -> float:
    """Loss-tolerant gain policy: ``1`` in the middle, ``1/sqrt(eta)`` at the end."""
    return 1.0 if placement == "middle" else 1.0 / math.sqrt(eta)


def fit_probability_exponent(n: int, placement: str, chi: float = 0.25, etas=None) -> float:
    """Log-log slope of the relay success probability versus ``eta``.

    The gain follows :func:`scaling_gain`; ``etas`` defaults to 21 log-spaced
    points over ``[1e-3, 1e-1]``.
    """
    etas = np.logspace(-3, -1, 21) if etas is None else np.asarray(etas, dtype=float)
    probs = [
        relay_success_probability(RelayConfig.from_placement(n, scaling_gain(e, placement), e, placement, chi))
        for e in etas
    ]
    slope, _ = np.polyfit(np.log(etas), np.log(probs), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# loss-dilation oracle


def _dilated_network(n: int, g: float, eta_a: float, eta_b: float) -> np.ndarray:
    """Bunched-photon scissor with loss splitters, on modes
    (kept, q_1, input, q_3..q_{n+1}, env_A, env_B)."""
    total = n + 4
    b = embed(gain_beam_splitter(g), (0, 1), total)
    loss_b = embed(loss_beam_splitter(eta_b), (1, n + 3), total)
    loss_a = embed(loss_beam_splitter(eta_a), (2, n + 2), total)
    f = direct_sum(np.eye(1, dtype=complex), qft_matrix(n + 1), np.eye(2, dtype=complex))
    return f @ loss_a @ loss_b @ b


def _herald(n: int, offset: int = 0) -> MeasurementPattern:
    return MeasurementPattern(tuple(range(offset + 1, offset + n + 2)), (0,) + (1,) * n)


def _trace_environment(state: MultimodeState, keep: tuple, dims: tuple) -> DensityOperator:
    """Density operator of ``keep`` modes, tracing every other mode."""
    groups: dict = {}
    for key, amp in state.terms.items():
        env = tuple(v for i, v in enumerate(key) if i not in keep)
        idx = np.ravel_multi_index(tuple(key[i] for i in keep), dims)
        groups.setdefault(env, {})
        groups[env][idx] = groups[env].get(idx, 0j) + amp
    size = int(np.prod(dims))
    rho = np.zeros((size, size), dtype=complex)
    for vec in groups.values():
        v = np.zeros(size, dtype=complex)
        for i, a in vec.items():
            v[i] = a
        rho += np.outer(v, v.conj())
    return DensityOperator(rho, dims)


def dilated_lossy_nqs_rho(config: RelayConfig, psi: FockVector) -> DensityOperator:
    """Brute-force counterpart of :func:`lossy_nqs_rho`."""
    n = config.n
    u = _dilated_network(n, config.g, config.eta_A, config.eta_B)
    terms = {(n, 0, k) + (0,) * (n - 1) + (0, 0): c for k, c in enumerate(psi.amplitudes) if c != 0}
    out = apply_network(u, MultimodeState(n + 4, terms), pattern=_herald(n))
    return _trace_environment(out, (0,), (n + 1,))


def dilated_relay_rho(config: RelayConfig, tmsv_cutoff: int = 12) -> DensityOperator:
    """Brute-force counterpart of :func:`relay_output_rho`.

    The TMSV reference is a spectator mode in front of the dilated scissor.
    """
    n = config.n
    u = _dilated_network(n, config.g, config.eta_A, config.eta_B)
    tmsv = tmsv_state(config.chi, tmsv_cutoff)
    terms = {(k_ref, n, 0, k) + (0,) * (n - 1) + (0, 0): c for (k_ref, k), c in tmsv.terms.items()}
    state = MultimodeState(n + 5, terms)
    out = apply_network(u, state, modes=range(1, n + 5), pattern=_herald(n, offset=1))
    return _trace_environment(out, (0, 1), (tmsv_cutoff + 1, n + 1))
