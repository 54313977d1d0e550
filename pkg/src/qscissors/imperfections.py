"""Realistic devices: lossy resources and inefficient detectors with dark counts.

A detector of efficiency ``tau_d`` first loses each photon independently, then
registers an independent thermal background whose mean ``n_bar`` is
calibrated so that vacuum produces exactly one click with probability
``C_d``. Both steps are diagonal in the Fock basis, so every detector POVM is
diagonal and fully described by the click table ``p(c | m)``.

Bunched-photon (BP) scissors are simulated using the fact that equal loss on
all outputs of a passive network equals the same loss on all of its inputs.
The detector loss is moved in front of the Fourier splitter, after which a
click pattern can only arise from at most as many photons as clicks. The
single-photon (SP) layout is simulated literally. :func:`simulate_noisy_nqs_literal`
does the same for BP and exists to check the shortcut.
"""

from __future__ import annotations

import configparser
import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import sqrtm
from scipy.optimize import brentq
from scipy.stats import binom

from .channels import (
    RelayConfig,
    _dilated_network,
    balanced_gain,
    maximize_over_gain,
    _trace_environment,
    covariance_from_rho,
    distance_to_eta,
    log_negativity_gaussian,
)
from .fock import DensityOperator, FockVector, MultimodeState, tmsv_state
from .interferometer import (
    MeasurementPattern,
    apply_network,
    embed,
    gain_beam_splitter,
    loss_beam_splitter,
    qft_matrix,
)
from .scissors import ScissorConfig, ideal_nla, sp_network

MAX_BASIS_STATES = 20_000
MAX_PHOTONS = 20
TMSV_TAIL = 1e-12


class DimensionGuardError(RuntimeError):
    """The requested simulation exceeds the Hilbert-space guard."""


@dataclass(frozen=True)
class DeviceProfile:
    """Detector efficiency ``tau_d``, dark-count probability ``dark_count`` and
    resource transmissivity ``tau_r``."""

    tau_d: float = 1.0
    dark_count: float = 0.0
    tau_r: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.tau_d <= 1.0:
            raise ValueError("tau_d must lie in (0, 1]")
        if not 0.0 < self.tau_r <= 1.0:
            raise ValueError("tau_r must lie in (0, 1]")
        if not 0.0 <= self.dark_count < 0.25:
            raise ValueError("dark_count must lie in [0, 0.25)")

    @property
    def is_ideal(self) -> bool:
        return self.tau_d == 1.0 and self.dark_count == 0.0 and self.tau_r == 1.0

    @property
    def thermal_mean(self) -> float:
        return calibrate_dark_counts(self.dark_count)

    @classmethod
    def from_file(cls, path: str, section: str = "profile") -> "DeviceProfile":
        """Read ``tau_d``, ``dark_count`` and ``tau_r`` from an INI-style file."""
        parser = configparser.ConfigParser()
        if not parser.read(path):
            raise FileNotFoundError(path)
        sec = parser[section]
        return cls(
            tau_d=sec.getfloat("tau_d", 1.0),
            dark_count=sec.getfloat("dark_count", 0.0),
            tau_r=sec.getfloat("tau_r", 1.0),
        )


IDEAL = DeviceProfile()
REALISTIC = DeviceProfile(tau_d=0.7, dark_count=1e-8, tau_r=0.7)
PROFILES = {"ideal": IDEAL, "realistic": REALISTIC}


@dataclass(frozen=True, eq=False)
class NoisySimResult:
    """Unnormalized heralded output (trace = success probability)."""

    output: DensityOperator
    success_probability: float
    fidelity_vs_ideal: Optional[float]


def calibrate_dark_counts(dark_count: float) -> float:
    """Thermal mean ``n_bar`` with ``n_bar / (1 + n_bar)^2 = dark_count``.

    The left side is the probability that a thermal background alone gives
    exactly one count. It peaks at ``1/4`` for ``n_bar = 1``; the low branch
    is returned.
    """
    if dark_count == 0.0:
        return 0.0
    assert 0.0 < dark_count < 0.25, "no thermal mean reproduces this dark-count probability"
    return brentq(lambda x: x / (1 + x) ** 2 - dark_count, 0.0, 1.0, xtol=1e-300, rtol=1e-15)


def _thermal_counts(n_bar: float, size: int) -> np.ndarray:
    t = np.arange(size)
    if n_bar == 0.0:
        return (t == 0).astype(float)
    return np.exp(t * math.log(n_bar) - (t + 1) * math.log1p(n_bar))


def click_table(profile: DeviceProfile, max_photons: int, max_clicks: int) -> np.ndarray:
    """``table[c, m]`` = probability of ``c`` counts given ``m`` incident photons."""
    m = np.arange(max_photons + 1)
    k = np.arange(max_clicks + 1)
    detected = binom.pmf(k[:, None], m[None, :], profile.tau_d)  # detected[k, m]
    thermal = _thermal_counts(profile.thermal_mean, max_clicks + 1)
    table = np.zeros((max_clicks + 1, max_photons + 1))
    for c in range(max_clicks + 1):
        table[c] = thermal[c::-1] @ detected[: c + 1]
    return table


def noisy_detector_povm(profile: DeviceProfile, click_count: int, cutoff: int) -> np.ndarray:
    """POVM element for ``click_count`` counts on the ``cutoff + 1`` Fock space."""
    if click_count < 0:
        raise ValueError("click_count must be non-negative")
    return np.diag(click_table(profile, cutoff, click_count)[click_count])


def noisy_resource(profile: DeviceProfile, variant: str, n: int) -> DensityOperator:
    """Resource photons after loss ``tau_r``.

    BP gives a binomial mixture of ``|m>``, ``m <= n``, on one mode; SP gives
    ``n`` independent modes each in ``diag(1 - tau_r, tau_r)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    tau = profile.tau_r
    if variant == "BP":
        return DensityOperator(np.diag(binom.pmf(np.arange(n + 1), n, tau)), (n + 1,))
    if variant.startswith("SP"):
        single = np.diag([1 - tau, tau])
        mat = np.ones((1, 1))
        for _ in range(n):
            mat = np.kron(mat, single)
        return DensityOperator(mat, (2,) * n)
    raise ValueError(f"unknown variant {variant}")


def _pure_components(psi) -> list[tuple[float, FockVector]]:
    if isinstance(psi, FockVector):
        return [(1.0, psi)]
    if psi.modes != 1:
        raise ValueError("input must be single-mode")
    w, v = np.linalg.eigh(0.5 * (psi.matrix + psi.matrix.conj().T))
    return [(float(wi), FockVector(v[:, i])) for i, wi in enumerate(w) if wi > 1e-14]


def _guard(photons: int, modes: int) -> None:
    if photons > MAX_PHOTONS:
        raise DimensionGuardError(f"{photons} photons exceed the guard {MAX_PHOTONS}; lower the input cutoff")
    size = math.comb(photons + modes, modes)
    if size > MAX_BASIS_STATES:
        raise DimensionGuardError(
            f"{size} basis states ({photons} photons in {modes} modes) exceed the guard {MAX_BASIS_STATES}"
        )


def _phase(n: int, m0: int, dim: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(dim) * m0 / (n + 1))


# ---------------------------------------------------------------------------
# bunched-photon layout


def _bp_click_patterns(n: int, profile: DeviceProfile):
    """Yield ``(m0, photons, weight)``: photons actually arriving at each port
    for the heralding pattern with vacuum at ``m0``, and the dark-count weight."""
    thermal = _thermal_counts(profile.thermal_mean, 2)
    for m0 in range(n + 1):
        others = [p for p in range(n + 1) if p != m0]
        for real in itertools.product((1, 0), repeat=n):
            photons = [0] * (n + 1)
            weight = thermal[0]
            for port, r in zip(others, real):
                photons[port] = r
                weight *= thermal[1 - r]
            if weight > 0:
                yield m0, tuple(photons), weight


def _bp_rho(
    n: int,
    g: float,
    eta_a: float,
    eta_b: float,
    profile: DeviceProfile,
    state_for_resource,
    spectators: int,
    kept_dims: tuple,
) -> np.ndarray:
    """Heralded density matrix over spectator modes plus the kept mode.

    ``state_for_resource(m)`` builds the input state (spectators first) with
    ``m`` resource photons. Detector loss is folded into ``eta_a`` and
    ``eta_b`` by the caller; here detectors only add dark counts.
    """
    u = _dilated_network(n, g, eta_a, eta_b)
    net_modes = range(spectators, spectators + n + 4)
    keep = tuple(range(spectators + 1))
    size = int(np.prod(kept_dims))
    rho = np.zeros((size, size), dtype=complex)
    weights = binom.pmf(np.arange(n + 1), n, profile.tau_r)
    kept_phase_dim = kept_dims[-1]
    for m, pm in enumerate(weights):
        if pm < 1e-300:
            continue
        state = state_for_resource(m)
        for m0, photons, w in _bp_click_patterns(n, profile):
            pattern = MeasurementPattern(
                tuple(spectators + 1 + i for i in range(n + 1)), photons
            )
            out = apply_network(u, state, modes=net_modes, pattern=pattern)
            if not out.terms:
                continue
            part = _trace_environment(out, keep, kept_dims).matrix
            ph = np.tile(_phase(n, m0, kept_phase_dim), size // kept_phase_dim)
            rho += pm * w * (ph[:, None] * part * ph.conj()[None, :])
    return rho


def simulate_noisy_nqs(profile: DeviceProfile, config: ScissorConfig, psi) -> NoisySimResult:
    """Heralded output of a realistic scissor.

    BP accepts every vacuum port with its phase correction, so in the ideal
    limit the trace equals the improved probability ``(n+1) P``. SP heralds
    on the single pattern of the in-line resource preparation. Fidelity is
    measured against the normalized perfect amplifier output ``g^(a^dagger a)|psi>``.
    """
    comps = _pure_components(psi)
    n, g = config.n, config.g
    top = max(c.cutoff for _, c in comps)
    dim = top + n + 1
    rho = np.zeros((dim, dim), dtype=complex)
    for weight, vec in comps:
        if config.variant == "BP":
            _guard(top + n, 3)

            def build(m, vec=vec):
                terms = {(m, 0, k) + (0,) * (n - 1) + (0, 0): c for k, c in enumerate(vec.amplitudes) if c != 0}
                return MultimodeState(n + 4, terms)

            rho += weight * _bp_rho(n, g, profile.tau_d, profile.tau_d, profile, build, 0, (dim,))
        else:
            rho += weight * _sp_rho(n, g, profile, vec, dim)
    out = DensityOperator(rho, (dim,))
    return NoisySimResult(out, out.trace, _nla_fidelity(out, psi, g))


def _nla_fidelity(rho: DensityOperator, psi, g: float) -> float:
    if rho.trace <= 0:
        return 0.0
    comps = _pure_components(psi)
    size = max(rho.dims[0], max(c.cutoff + 1 for _, c in comps))
    target = np.zeros((size, size), dtype=complex)
    for w, vec in comps:
        t = ideal_nla(g, vec).normalized().resized(size - 1).amplitudes
        target += w * np.outer(t, t.conj())
    r = rho.resized((size,)).matrix
    if isinstance(psi, FockVector):
        return float(np.real(np.trace(target @ r)) / rho.trace)
    s = sqrtm(target)
    return float(np.real(np.trace(sqrtm(s @ (r / rho.trace) @ s))) ** 2)


def simulate_noisy_nqs_literal(profile: DeviceProfile, config: ScissorConfig, psi: FockVector) -> NoisySimResult:
    """BP scissor with loss placed exactly where it occurs physically.

    Resource loss and detector loss are explicit beam splitters onto vacuum
    environment modes; only the dark counts are applied as click weights.
    Exponentially more expensive than :func:`simulate_noisy_nqs`; meant as a
    cross-check for small ``n``.
    """
    if config.variant != "BP":
        raise ValueError("the literal pipeline is only needed for the BP layout")
    n, g = config.n, config.g
    # modes: resource-env, kept, q_1, input, q_3..q_{n+1}, det-env_0..det-env_n
    total = 1 + (n + 2) + (n + 1)
    res = embed(loss_beam_splitter(profile.tau_r), (1, 0), total)
    b = embed(gain_beam_splitter(g), (1, 2), total)
    f = embed(qft_matrix(n + 1), tuple(range(2, n + 3)), total)
    u = f @ b @ res
    for p in range(n + 1):
        u = embed(loss_beam_splitter(profile.tau_d), (2 + p, n + 3 + p), total) @ u
    terms = {(0, n, 0, k) + (0,) * (n - 1) + (0,) * (n + 1): c for k, c in enumerate(psi.amplitudes) if c != 0}
    state = MultimodeState(total, terms)
    dim = psi.cutoff + n + 1
    rho = np.zeros((dim, dim), dtype=complex)
    for m0, photons, w in _bp_click_patterns(n, profile):
        pattern = MeasurementPattern(tuple(range(2, n + 3)), photons)
        out = apply_network(u, state, pattern=pattern)
        if not out.terms:
            continue
        part = _trace_environment(out, (1,), (dim,)).matrix
        ph = _phase(n, m0, dim)
        rho += w * (ph[:, None] * part * ph.conj()[None, :])
    result = DensityOperator(rho, (dim,))
    return NoisySimResult(result, result.trace, _nla_fidelity(result, psi, g))


# ---------------------------------------------------------------------------
# single-photon layout


def _sp_rho(n: int, g: float, profile: DeviceProfile, psi: FockVector, dim: int) -> np.ndarray:
    """Literal SP circuit: lossy resource photons, full output enumeration,
    diagonal detector POVMs on modes 0, 1 and 3..n+1, kept mode 2."""
    u = sp_network(n, g)
    top = psi.cutoff + n
    _guard(top, n + 2)
    measured = (0, 1) + tuple(range(3, n + 2))
    clicks = (n, 0) + (0,) * (n - 1)
    table = click_table(profile, top, n)
    rho = np.zeros((dim, dim), dtype=complex)
    for present in itertools.product((1, 0), repeat=n):
        k_on = sum(present)
        p_res = profile.tau_r**k_on * (1 - profile.tau_r) ** (n - k_on)
        if p_res == 0.0:
            continue
        terms = {(k, 0) + present: c for k, c in enumerate(psi.amplitudes) if c != 0}
        out = apply_network(u, MultimodeState(n + 2, terms))
        groups: dict = {}
        for key, amp in out.terms.items():
            groups.setdefault(tuple(key[i] for i in measured), {})[key[2]] = amp
        for photons, vec in groups.items():
            w = 1.0
            for c, m in zip(clicks, photons):
                w *= table[c, m]
            if w == 0.0:
                continue
            v = np.zeros(dim, dtype=complex)
            for j, a in vec.items():
                v[j] = a
            rho += p_res * w * np.outer(v, v.conj())
    return rho


# ---------------------------------------------------------------------------
# relay


def _tmsv_cutoff(chi: float) -> int:
    if chi == 0:
        return 0
    return max(1, math.ceil(math.log(TMSV_TAIL) / (2 * math.log(chi))))


def simulate_noisy_relay(profile: DeviceProfile, relay: RelayConfig, tmsv_cutoff: int | None = None) -> NoisySimResult:
    """Realistic BP relay fed by one arm of a TMSV.

    Returns the two-mode state (Alice's reference, Bob's mode). Channel and
    detector losses combine into ``eta_A tau_d`` and ``eta_B tau_d`` in front
    of the Fourier splitter. There is no single target state, so
    ``fidelity_vs_ideal`` is ``None``.
    """
    n = relay.n
    k_top = _tmsv_cutoff(relay.chi) if tmsv_cutoff is None else tmsv_cutoff
    _guard(k_top + n, 4)
    tmsv = tmsv_state(relay.chi, k_top)
    dims = (k_top + 1, n + 1)

    def build(m):
        terms = {(kr, m, 0, k) + (0,) * (n - 1) + (0, 0): c for (kr, k), c in tmsv.terms.items()}
        return MultimodeState(n + 5, terms)

    mat = _bp_rho(
        n,
        relay.g,
        relay.eta_A * profile.tau_d,
        relay.eta_B * profile.tau_d,
        profile,
        build,
        1,
        dims,
    )
    out = DensityOperator(mat, dims)
    return NoisySimResult(out, out.trace, None)


def noisy_relay_ln(profile: DeviceProfile, relay: RelayConfig) -> float:
    """Gaussian log negativity of the realistic relay output."""
    res = simulate_noisy_relay(profile, relay)
    if res.success_probability <= 0:
        return 0.0
    return log_negativity_gaussian(covariance_from_rho(res.output))


def max_ln_over_gain(profile: DeviceProfile, n: int, eta: float, placement: str, chi: float = 0.25) -> tuple[float, float]:
    """Maximize the realistic Gaussian log negativity over the gain.

    The search runs over ``g = x g_b`` with ``x`` in ``[0.05, 5]``, where
    ``g_b`` is the balanced gain of the loss-free block. Returns ``(g, LN)``.
    """
    base = RelayConfig.from_placement(n, 1.0, eta, placement, chi)

    def value(g):
        return noisy_relay_ln(profile, RelayConfig(n, g, base.eta_A, base.eta_B, chi))

    return maximize_over_gain(value, balanced_gain(base))


def max_entanglement_distance(
    profile: DeviceProfile,
    n: int,
    placement: str,
    chi: float = 0.25,
    d_max: float = 2000.0,
    tol_km: float = 0.5,
) -> float:
    """Largest distance (km) at which some gain still yields Gaussian LN > 0.

    Bisection on the sign of the gain-optimized Gaussian log negativity.
    Returns ``inf`` when entanglement survives up to ``d_max``.
    """

    def alive(d):
        return max_ln_over_gain(profile, n, distance_to_eta(d), placement, chi)[1] > 0.0

    lo, hi = 0.0, 25.0
    while alive(hi):
        lo, hi = hi, 2 * hi
        if hi > d_max:
            return math.inf
    while hi - lo > tol_km:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if alive(mid) else (lo, mid)
    return 0.5 * (lo + hi)
