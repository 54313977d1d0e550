"""Generalized n-photon quantum scissors.

The n-photon scissor (n-QS) maps ``sum_j c_j |j>`` to the heralded,
unnormalized state

    |g psi_n> = sqrt(n!) / (n+1)^(n/2) / (g^2+1)^(n/2) * sum_{j<=n} g^j c_j |j>

built from a gain beam splitter of transmissivity ``g^2/(1+g^2)`` and an
(n+1)-mode Fourier splitter. Two resource layouts exist: ``n`` bunched
photons ``|n>`` (BP) or ``n`` single photons (SP). Both herald the same state
with the same default probability; BP can accept all ``n+1`` vacuum positions
after a phase correction, SP can prepare its two-mode resource offline.

Besides the closed forms this module builds the explicit networks, which
:mod:`qscissors.interferometer` evolves by brute force to check them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .fock import FockVector, MultimodeState, TruncationError, cat_state, recommended_cutoff
from .interferometer import (
    MeasurementPattern,
    apply_network,
    direct_sum,
    embed,
    gain_beam_splitter,
    postselect,
    qft_matrix,
)

VARIANTS = ("BP", "SP", "SP-prepared")


@dataclass(frozen=True)
class ScissorConfig:
    """Size ``n``, gain ``g``, resource layout and (BP only) vacuum port ``m0``."""

    n: int
    g: float
    variant: str = "BP"
    m0: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"scissor size must be a positive integer, got {self.n}")
        if not self.g > 0:
            raise ValueError(f"gain must be positive, got {self.g}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if not 0 <= self.m0 <= self.n:
            raise ValueError(f"m0 must lie in [0, {self.n}]")

    @property
    def tau(self) -> float:
        return self.g**2 / (1.0 + self.g**2)


@dataclass(frozen=True, eq=False)
class ScissorOutput:
    """Heralded output and success probabilities.

    ``state`` is unnormalized with ``state.norm2 == probability`` (the default,
    single-pattern probability). ``probability_bp`` counts all ``n+1``
    heralding patterns of the bunched layout and ``probability_sp`` assumes
    the single-photon layout's resource is prepared offline.
    """

    state: FockVector
    probability: float
    probability_bp: float
    probability_sp: float
    variant: str = "BP"

    @property
    def success_probability(self) -> float:
        return self.probability

    @property
    def probability_xp(self) -> float:
        return max(self.probability_bp, self.probability_sp)

    @property
    def variant_probability(self) -> float:
        if self.variant == "BP":
            return self.probability_bp
        if self.variant == "SP-prepared":
            return self.probability_sp
        return self.probability


def _log_prefactor(n: int, g: float) -> float:
    return 0.5 * gammaln(n + 1) - 0.5 * n * math.log(n + 1) - 0.5 * n * math.log1p(g * g)


def nqs_prefactor(n: int, g: float) -> float:
    """``sqrt(n!) / ((n+1)^(n/2) (g^2+1)^(n/2))``."""
    return math.exp(_log_prefactor(n, g))


def _gain_powers(g: float, count: int) -> np.ndarray:
    return np.exp(np.arange(count) * math.log(g))


def nqs_output(config: ScissorConfig, psi: FockVector) -> ScissorOutput:
    """Closed-form n-QS output for an input state (amplitudes past ``n`` are cut)."""
    n, g = config.n, config.g
    c = psi.resized(n).amplitudes
    state = FockVector(nqs_prefactor(n, g) * _gain_powers(g, n + 1) * c)
    p = state.norm2
    return ScissorOutput(
        state=state,
        probability=p,
        probability_bp=(n + 1) * p,
        probability_sp=p / resource_prep_probability(n),
        variant=config.variant,
    )


def success_probability(n: int, g: float, psi: FockVector) -> float:
    """``n!/(n+1)^n / (g^2+1)^n * sum_{j<=n} g^(2j) |c_j|^2``."""
    c2 = np.abs(psi.resized(n).amplitudes) ** 2
    w = np.exp(2 * np.arange(n + 1) * math.log(g)) * c2
    return float(math.exp(2 * _log_prefactor(n, g)) * w.sum())


def ideal_nla(g: float, psi: FockVector) -> FockVector:
    """Perfect amplifier ``g^(a^dagger a) |psi>`` at the input's cutoff (unnormalized)."""
    return FockVector(_gain_powers(g, psi.cutoff + 1) * psi.amplitudes)


def resource_state(n: int) -> MultimodeState:
    """Unnormalized two-mode resource ``|R_n>`` of the single-photon layout.

    ``sqrt(n!)/(n+1)^(n/2) sum_j (-1)^j binom(n, j)^(-1/2) |n-j, j>``; its
    squared norm is the preparation probability ``P_n``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    terms = {}
    for j in range(n + 1):
        mag = math.exp(0.5 * (gammaln(n - j + 1) + gammaln(j + 1)) - 0.5 * n * math.log(n + 1))
        terms[(n - j, j)] = (-1) ** j * mag
    return MultimodeState(2, terms)


def resource_prep_probability(n: int) -> float:
    """``P_n = (n+1)^(-n) sum_j (n-j)! j!``, below ``(n+1)!/(n+1)^n`` for ``n >= 2``.

    At ``n = 1`` both sides equal 1 (the resource is then a plain splitter output).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    total = sum(math.factorial(n - j) * math.factorial(j) for j in range(n + 1))
    p = total / (n + 1) ** n
    bound = math.factorial(n + 1) / (n + 1) ** n
    assert p < bound if n >= 2 else p == bound
    return p


def phase_correction(n: int, m0: int, state: FockVector) -> FockVector:
    """Apply ``exp(2 pi i m0 a^dagger a / (n+1))`` to undo the port-``m0`` phase."""
    if not 0 <= m0 <= n:
        raise ValueError(f"m0 must lie in [0, {n}]")
    j = np.arange(state.cutoff + 1)
    return FockVector(state.amplitudes * np.exp(2j * np.pi * j * m0 / (n + 1)))


def x10_output(n: int, g: float, psi: FockVector) -> ScissorOutput:
    """Output of ``n`` single-photon scissors in parallel between ``n``-splitters.

    Coefficients ``n! g^j c_j / ((g^2+1)^(n/2) (n-j)! n^j)``: truncated like
    the n-QS but with the distortion ``n!/((n-j)! n^j)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not g > 0:
        raise ValueError("gain must be positive")
    j = np.arange(n + 1)
    log_mag = gammaln(n + 1) - gammaln(n - j + 1) - j * math.log(n) + j * math.log(g) - 0.5 * n * math.log1p(g * g)
    state = FockVector(np.exp(log_mag) * psi.resized(n).amplitudes)
    p = state.norm2
    return ScissorOutput(state=state, probability=p, probability_bp=p, probability_sp=p, variant="X10")


def _amplified_weights(g: float, psi: FockVector) -> np.ndarray:
    c2 = np.abs(psi.amplitudes) ** 2
    with np.errstate(divide="ignore"):
        log_w = 2 * np.arange(c2.size) * math.log(g) + np.log(c2)
    if not np.isfinite(log_w.max()):
        raise TruncationError("amplified input has no weight")
    if log_w.max() > 700:
        raise TruncationError(f"gain {g} overflows at cutoff {psi.cutoff}")
    return np.exp(log_w)


def _check_tail(g: float, psi: FockVector, weights: np.ndarray, tol: float) -> None:
    if psi.truncation_loss <= 0:
        return
    top = weights[-2:].sum() / weights.sum()
    if top > tol:
        raise TruncationError(
            f"cutoff {psi.cutoff} too small for gain {g}: last amplified terms carry {top:.2e} of the weight"
        )


def truncation_fidelity(n: int, g: float, psi: FockVector, tail_tol: float = 1e-10) -> float:
    """Fidelity of the n-QS output with the perfect amplifier output.

    Equals ``sum_{j<=n} g^(2j)|c_j|^2 / sum_j g^(2j)|c_j|^2``. The input's
    cutoff must hold the amplified state: when ``psi`` comes from a truncated
    expansion (``truncation_loss > 0``) and its last two amplified weights
    exceed ``tail_tol`` of the total, :class:`TruncationError` is raised.
    """
    w = _amplified_weights(g, psi)
    if n >= psi.cutoff:
        return 1.0
    _check_tail(g, psi, w, tail_tol)
    return float(w[: n + 1].sum() / w.sum())


def x10_fidelity(n: int, g: float, psi: FockVector, tail_tol: float = 1e-10) -> float:
    """Fidelity of the parallel-scissor output with the perfect amplifier output."""
    _check_tail(g, psi, _amplified_weights(g, psi), tail_tol)
    out = x10_output(n, g, psi).state.normalized()
    target = ideal_nla(g, psi).normalized()
    size = max(out.cutoff, target.cutoff)
    return float(abs(np.vdot(target.resized(size).amplitudes, out.resized(size).amplitudes)) ** 2)


def teleport_fidelity_cat(alpha: float, n: int, cutoff: int | None = None) -> tuple[float, float]:
    """Teleport the even cat ``|alpha> + |-alpha>`` with unit gain.

    Returns ``(fidelity, P_XP)``.
    """
    if cutoff is None:
        cutoff = max(2 * recommended_cutoff(alpha * alpha), n + 10)
    psi = cat_state(alpha, cutoff)
    fid = truncation_fidelity(n, 1.0, psi)
    out = nqs_output(ScissorConfig(n, 1.0), psi)
    return fid, out.probability_xp


# ---------------------------------------------------------------------------
# explicit networks (brute-force oracle)


def bp_network(n: int, g: float) -> np.ndarray:
    """Bunched-photon layout on modes (kept, q_1 .. q_{n+1}).

    The resource ``|n>`` enters mode 0, the gain splitter mixes modes 0 and 1,
    the input enters mode 2 and the Fourier splitter acts on modes 1..n+1.
    """
    b = direct_sum(gain_beam_splitter(g), np.eye(n, dtype=complex))
    f = direct_sum(np.eye(1, dtype=complex), qft_matrix(n + 1))
    return f @ b


def bp_pattern(n: int, m0: int = 0) -> MeasurementPattern:
    counts = [1] * (n + 1)
    counts[m0] = 0
    return MeasurementPattern(tuple(range(1, n + 2)), tuple(counts))


def bp_input(n: int, psi: FockVector) -> MultimodeState:
    return MultimodeState(
        n + 2, {(n, 0, k) + (0,) * (n - 1): c for k, c in enumerate(psi.amplitudes) if c != 0}
    )


def simulate_bp(n: int, g: float, psi: FockVector, m0: int = 0) -> FockVector:
    """Brute-force bunched-photon circuit, heralded on the port-``m0`` pattern.

    No phase correction is applied.
    """
    pattern = bp_pattern(n, m0)
    out = apply_network(bp_network(n, g), bp_input(n, psi), pattern=pattern)
    kept, _ = postselect(out, pattern)
    return kept.resized(n)


def sp_network(n: int, g: float) -> np.ndarray:
    """Single-photon layout on modes (input, q_1 .. q_{n+1}).

    The inverse Fourier splitter acts on modes 1..n+1 (photons in 2..n+1),
    then the inverse gain splitter mixes the input with mode 1. Mode 2 is kept.
    """
    f = direct_sum(np.eye(1, dtype=complex), qft_matrix(n + 1).conj().T)
    b = embed(gain_beam_splitter(g).conj().T, (0, 1), n + 2)
    return b @ f


def sp_pattern(n: int) -> MeasurementPattern:
    modes = (0, 1) + tuple(range(3, n + 2))
    return MeasurementPattern(modes, (n, 0) + (0,) * (n - 1))


def sp_input(n: int, psi: FockVector) -> MultimodeState:
    return MultimodeState(
        n + 2, {(k, 0) + (1,) * n: c for k, c in enumerate(psi.amplitudes) if c != 0}
    )


def simulate_sp(n: int, g: float, psi: FockVector) -> FockVector:
    """Brute-force single-photon circuit (resource prepared in-line)."""
    pattern = sp_pattern(n)
    out = apply_network(sp_network(n, g), sp_input(n, psi), pattern=pattern)
    kept, _ = postselect(out, pattern)
    return kept.resized(n)


def simulate_resource(n: int) -> MultimodeState:
    """Brute-force ``<0|^(n-1) F^dagger_{n+1} |0>|1>^n`` on the first two modes."""
    state = MultimodeState.product((0,) + (1,) * n)
    pattern = MeasurementPattern(tuple(range(2, n + 1)), (0,) * (n - 1))
    out = apply_network(qft_matrix(n + 1).conj().T, state, pattern=pattern)
    kept, _ = postselect(out, pattern)
    return kept
