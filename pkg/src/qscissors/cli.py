"""Command-line frontend: parameter sweeps written as CSV tables.

Subcommands ``amplify``, ``teleport``, ``relay`` and ``noisy`` evaluate one
grid of points each; ``selftest`` runs the permanent-identity and
circuit-equivalence checks. Settings come from, in increasing priority,
built-in defaults, an INI-style ``--config`` file (one section per command)
and command-line flags.
"""

from __future__ import annotations

import argparse
import configparser
import io
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .channels import (
    PLACEMENTS,
    RelayConfig,
    balanced_gain,
    covariance_from_rho,
    distance_to_eta,
    gaussian_rci,
    log_negativity_full,
    log_negativity_gaussian,
    maximize_over_gain,
    plob_bound,
    relay_metrics,
    scaling_gain,
)
from .fock import TruncationError, cat_state, coherent_state, recommended_cutoff, smsv_state
from .imperfections import PROFILES, DeviceProfile, DimensionGuardError, simulate_noisy_nqs, simulate_noisy_relay
from .interferometer import omega_submatrix, permanent
from .scissors import (
    ScissorConfig,
    nqs_output,
    phase_correction,
    simulate_bp,
    simulate_sp,
    truncation_fidelity,
    x10_fidelity,
    x10_output,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3
NOISY_MAX_N = 2
MAX_AUTO_CUTOFF = 600
TAIL_TOL = 1e-10
NOISY_TAIL_TOL = 1e-8
PROTOCOLS = ("nqs-bp", "nqs-sp", "x10")
STATES = ("coherent", "smsv", "cat")
AXES = {
    "amplify": ("g", "alpha", "s"),
    "teleport": ("alpha",),
    "relay": ("g", "distance", "chi"),
    "noisy": ("g", "alpha", "s", "distance", "chi"),
}
DEFAULTS = {
    "n": "1-6",
    "g": None,
    "alpha": 0.3,
    "s": 0.29,
    "chi": 0.25,
    "eta": 0.05,
    "placement": "middle",
    "protocol": "nqs-bp",
    "profile": "ideal",
    "state": None,
    "sweep": None,
    "cutoff": None,
    "target": "amplify",
    "gain_policy": None,
    "out": None,
}


class UsageError(ValueError):
    """Invalid command-line or config input."""


def fmt(value) -> str:
    """Deterministic CSV formatting with 12 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def parse_n(text) -> list[int]:
    """``"3"``, ``"1-6"`` or ``"1,2,4"`` to a sorted list of sizes."""
    out: set[int] = set()
    try:
        for part in str(text).split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = (int(x) for x in part.split("-", 1))
                out.update(range(lo, hi + 1))
            elif part:
                out.add(int(part))
    except ValueError as exc:
        raise UsageError(f"cannot parse --n {text!r}") from exc
    if not out or min(out) < 1:
        raise UsageError(f"--n must list positive sizes, got {text!r}")
    return sorted(out)


@dataclass(frozen=True)
class Sweep:
    axis: str
    lo: float
    hi: float
    points: int
    scale: str = "lin"

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        parts = text.split(":")
        if len(parts) not in (4, 5):
            raise UsageError(f"--sweep expects axis:min:max:points[:lin|log], got {text!r}")
        try:
            lo, hi, points = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise UsageError(f"bad numbers in --sweep {text!r}") from exc
        scale = parts[4] if len(parts) == 5 else "lin"
        if scale not in ("lin", "log"):
            raise UsageError("sweep scale must be lin or log")
        if not lo < hi:
            raise UsageError(f"sweep needs min < max, got {lo} and {hi}")
        if points < 2:
            raise UsageError("sweep needs at least 2 points")
        if scale == "log" and lo <= 0:
            raise UsageError("log sweeps need a positive minimum")
        return cls(parts[0], lo, hi, points, scale)

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.points)
        return np.linspace(self.lo, self.hi, self.points)

    def __str__(self):
        return f"{self.axis}:{fmt(self.lo)}:{fmt(self.hi)}:{self.points}:{self.scale}"


@dataclass
class Run:
    """Fully resolved settings of one command."""

    command: str
    ns: list
    params: dict
    sweep: Sweep | None
    profile: DeviceProfile
    profile_name: str
    out: str | None = None

    def header(self) -> str:
        items = dict(self.params)
        items["n"] = ",".join(str(n) for n in self.ns)
        items["sweep"] = str(self.sweep) if self.sweep else "none"
        items["profile"] = self.profile_name
        items["tau_d"] = self.profile.tau_d
        items["dark_count"] = self.profile.dark_count
        items["tau_r"] = self.profile.tau_r
        body = " ".join(f"{k}={fmt(v)}" for k, v in sorted(items.items()))
        return f"# qscissors {__version__} {self.command} {body}"


# ---------------------------------------------------------------------------
# inputs


def _build_state(kind: str, param: float, cutoff: int):
    if kind == "coherent":
        return coherent_state(param, cutoff)
    if kind == "cat":
        return cat_state(param, cutoff)
    return smsv_state(param, cutoff)


def _mean_photons(kind: str, param: float) -> float:
    if kind == "smsv":
        return param * param / (1 - param * param)
    return param * param


def input_state(kind: str, param: float, g: float, n: int, cutoff: int | None, tail_tol: float = TAIL_TOL):
    """Input state whose cutoff holds the amplified tail.

    With an explicit ``cutoff`` the state is used as is, and an insufficient
    cutoff surfaces as :class:`TruncationError`. Otherwise the cutoff grows
    until the last amplified weights fall below ``tail_tol``.
    """
    if kind == "smsv" and not 0 <= param < 1:
        raise UsageError("squeezing s must lie in [0, 1)")
    if cutoff is not None:
        psi = _build_state(kind, param, cutoff)
        truncation_fidelity(0, g, psi, tail_tol)
        return psi
    k = max(recommended_cutoff(_mean_photons(kind, param) * max(g * g, 1.0)), n + 10)
    while True:
        psi = _build_state(kind, param, k)
        try:
            truncation_fidelity(0, g, psi, tail_tol)
            return psi
        except TruncationError:
            if k >= MAX_AUTO_CUTOFF:
                raise
            k = min(MAX_AUTO_CUTOFF, int(k * 1.5) + 1)


# ---------------------------------------------------------------------------
# row builders

SCISSOR_COLUMNS = ["n", "fidelity", "infidelity", "P", "P_BP", "P_SP", "P_XP"]
RELAY_COLUMNS = ["n", "placement", "LN_full", "LN_gaussian", "RCI", "P_loss", "PLOB"]


def scissor_row(protocol: str, n: int, g: float, psi) -> list:
    if protocol == "x10":
        fid = x10_fidelity(n, g, psi)
        p = x10_output(n, g, psi).probability
        return [n, fid, 1 - fid, p, p, p, p]
    fid = truncation_fidelity(n, g, psi)
    out = nqs_output(ScissorConfig(n, g), psi)
    return [n, fid, 1 - fid, out.probability, out.probability_bp, out.probability_sp, out.probability_xp]


def noisy_scissor_row(profile: DeviceProfile, protocol: str, n: int, g: float, psi) -> list:
    if profile.is_ideal:
        return scissor_row(protocol, n, g, psi)
    variant = "BP" if protocol == "nqs-bp" else "SP"
    res = simulate_noisy_nqs(profile, ScissorConfig(n, g, variant), psi)
    fid = res.fidelity_vs_ideal
    p = res.success_probability
    nan = math.nan
    if variant == "BP":
        return [n, fid, 1 - fid, nan, p, nan, nan]
    return [n, fid, 1 - fid, p, nan, nan, nan]


def relay_row(cfg: RelayConfig, placement: str) -> list:
    m = relay_metrics(cfg)
    return [cfg.n, placement, m["ln_full"], m["ln_gaussian"], m["rci"], m["probability"], m["plob"]]


def noisy_relay_row(profile: DeviceProfile, cfg: RelayConfig, placement: str) -> list:
    res = simulate_noisy_relay(profile, cfg)
    rho = res.output
    if res.success_probability <= 0:
        return [cfg.n, placement, 0.0, 0.0, 0.0, 0.0, plob_bound(cfg.eta) if cfg.eta < 1 else math.inf]
    cm = covariance_from_rho(rho)
    return [
        cfg.n,
        placement,
        log_negativity_full(rho),
        log_negativity_gaussian(cm),
        gaussian_rci(cm),
        res.success_probability,
        plob_bound(cfg.eta) if cfg.eta < 1 else math.inf,
    ]


# ---------------------------------------------------------------------------
# commands


def _threads() -> int:
    env = os.environ.get("QSCISSOR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError("QSCISSOR_THREADS must be an integer") from exc
    return os.cpu_count() or 1


def _evaluate(tasks):
    """Run zero-argument callables in a pool, returning results in order."""
    workers = _threads()
    if workers == 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: t(), tasks))


def _axis_values(run: Run, default_axis: str) -> tuple[str, np.ndarray]:
    if run.sweep is None:
        axis = default_axis
        return axis, np.array([run.params[axis]], dtype=float)
    return run.sweep.axis, run.sweep.values()


def _scissor_tasks(run: Run, noisy: bool):
    p = run.params
    axis, values = _axis_values(run, "g")
    kind = p["state"]
    tasks = []
    for x in values:
        for n in run.ns:
            g = x if axis == "g" else p["g"]
            param = x if axis in ("alpha", "s") else (p["s"] if kind == "smsv" else p["alpha"])

            def task(x=x, n=n, g=g, param=param):
                tol = NOISY_TAIL_TOL if noisy and not run.profile.is_ideal else TAIL_TOL
                psi = input_state(kind, param, g, n, p["cutoff"], tol)
                if noisy:
                    return [x] + noisy_scissor_row(run.profile, p["protocol"], n, g, psi)
                return [x] + scissor_row(p["protocol"], n, g, psi)

            tasks.append(task)
    return axis, tasks


def _relay_gain(run: Run, cfg: RelayConfig, noisy: bool) -> float:
    p = run.params
    policy = p["gain_policy"]
    if policy == "fixed":
        return p["g"]
    if policy == "scaling":
        return scaling_gain(cfg.eta, p["placement"])

    def value(g):
        trial = RelayConfig(cfg.n, g, cfg.eta_A, cfg.eta_B, cfg.chi)
        if noisy:
            res = simulate_noisy_relay(run.profile, trial)
            if res.success_probability <= 0:
                return 0.0
            return log_negativity_gaussian(covariance_from_rho(res.output))
        return relay_metrics(trial)["ln_gaussian"]

    return maximize_over_gain(value, balanced_gain(cfg))[0]


def _relay_tasks(run: Run, noisy: bool):
    p = run.params
    axis, values = _axis_values(run, "g")
    tasks = []
    for x in values:
        for n in run.ns:

            def task(x=x, n=n):
                eta = distance_to_eta(x) if axis == "distance" else p["eta"]
                chi = x if axis == "chi" else p["chi"]
                g = x if axis == "g" else 1.0
                cfg = RelayConfig.from_placement(n, g, eta, p["placement"], chi)
                if axis != "g":
                    g = _relay_gain(run, cfg, noisy)
                    cfg = RelayConfig(n, g, cfg.eta_A, cfg.eta_B, chi)
                row = noisy_relay_row(run.profile, cfg, p["placement"]) if noisy else relay_row(cfg, p["placement"])
                return [x] + row + ([g] if axis != "g" else [])

            tasks.append(task)
    return axis, tasks


def _fit_lines(run: Run, rows: list) -> list[str]:
    """Log-log fits of the success probability against transmissivity."""
    lines = []
    p_col = 1 + RELAY_COLUMNS.index("P_loss")
    for n in run.ns:
        pts = [(distance_to_eta(r[0]), r[p_col]) for r in rows if r[1] == n and r[p_col] > 0]
        if len(pts) < 2:
            continue
        eta, prob = np.log(np.array(pts)).T
        slope = float(np.polyfit(eta, prob, 1)[0])
        lines.append(f"# fit n={n} placement={run.params['placement']} exponent={fmt(slope)}")
    return lines


def execute(run: Run) -> str:
    """Evaluate a resolved run and return the CSV text."""
    cmd = run.command
    noisy = cmd == "noisy"
    relay = cmd == "relay" or (noisy and run.params["target"] == "relay")
    if relay:
        axis, tasks = _relay_tasks(run, noisy)
        columns = [axis] + RELAY_COLUMNS + (["g"] if axis != "g" else [])
    else:
        axis, tasks = _scissor_tasks(run, noisy)
        columns = [axis] + SCISSOR_COLUMNS
    rows = _evaluate(tasks)
    buf = io.StringIO()
    buf.write(run.header() + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    if relay and axis == "distance":
        for line in _fit_lines(run, rows):
            buf.write(line + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument handling


def _float(name):
    def conv(text):
        try:
            return float(text)
        except ValueError as exc:
            raise UsageError(f"--{name} expects a number, got {text!r}") from exc

    return conv


def resolve(command: str, args: argparse.Namespace) -> Run:
    """Merge defaults, config file and flags, then validate."""
    values = dict(DEFAULTS)
    if getattr(args, "config", None):
        parser = configparser.ConfigParser()
        if not parser.read(args.config):
            raise UsageError(f"cannot read config file {args.config}")
        if parser.has_section(command):
            for key, val in parser.items(command):
                key = key.replace("-", "_")
                if key not in values:
                    raise UsageError(f"unknown config key {key!r} in section [{command}]")
                values[key] = val
    for key in values:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag

    ns = parse_n(values["n"])
    params = {}
    for key in ("alpha", "s", "chi", "eta"):
        params[key] = _float(key)(values[key])
    params["g"] = None if values["g"] is None else _float("g")(values["g"])
    params["cutoff"] = None if values["cutoff"] in (None, "") else int(values["cutoff"])
    params["placement"] = values["placement"]
    params["protocol"] = values["protocol"]
    params["target"] = values["target"]
    if params["placement"] not in PLACEMENTS:
        raise UsageError(f"--placement must be one of {PLACEMENTS}")
    if params["protocol"] not in PROTOCOLS:
        raise UsageError(f"--protocol must be one of {PROTOCOLS}")
    if not 0 < params["eta"] <= 1:
        raise UsageError("--eta must lie in (0, 1]")
    if not 0 <= params["chi"] < 1:
        raise UsageError("--chi must lie in [0, 1)")

    sweep = Sweep.parse(values["sweep"]) if values["sweep"] else None
    relay = command == "relay" or (command == "noisy" and params["target"] == "relay")
    allowed = AXES["relay"] if relay else AXES["teleport" if command == "teleport" else "amplify"]
    if sweep is not None and sweep.axis not in allowed:
        raise UsageError(f"axis {sweep.axis!r} not available for {command}; choose from {allowed}")

    state = values["state"]
    if state is None:
        state = "smsv" if (sweep and sweep.axis == "s") else "coherent"
    if state not in STATES:
        raise UsageError(f"--state must be one of {STATES}")
    if sweep is not None and sweep.axis == "s" and state != "smsv":
        raise UsageError("an s sweep needs --state smsv")
    if sweep is not None and sweep.axis == "alpha" and state == "smsv":
        raise UsageError("an alpha sweep needs a coherent or cat state")
    params["state"] = state

    if command == "teleport":
        if params["g"] not in (None, 1.0):
            raise UsageError("teleport fixes g = 1")
        params["g"] = 1.0
    if params["g"] is None:
        params["g"] = 1.0
    if params["g"] <= 0:
        raise UsageError("--g must be positive")

    policy = values["gain_policy"]
    if relay:
        if policy is None:
            policy = "fixed" if values["g"] is not None else ("optimal" if command == "noisy" else "scaling")
        if policy not in ("fixed", "scaling", "optimal"):
            raise UsageError("--gain-policy must be fixed, scaling or optimal")
        params["gain_policy"] = policy
    elif policy is not None:
        raise UsageError("--gain-policy applies to relay runs only")

    name = str(values["profile"])
    if name in PROFILES:
        profile = PROFILES[name]
    elif os.path.exists(name):
        try:
            profile = DeviceProfile.from_file(name)
        except (KeyError, ValueError) as exc:
            raise UsageError(f"bad profile file {name}: {exc}") from exc
    else:
        raise UsageError(f"--profile must be one of {sorted(PROFILES)} or a file path")
    if command != "noisy" and not profile.is_ideal:
        raise UsageError("device profiles apply to the noisy command only")

    if command == "noisy":
        if max(ns) > NOISY_MAX_N:
            raise DimensionGuardError(
                f"noisy runs support n <= {NOISY_MAX_N}: the mixed-state simulation cost grows "
                "exponentially with the protocol size"
            )
        if not relay and params["protocol"] == "x10":
            raise UsageError("noisy runs simulate nqs-bp or nqs-sp")
        if relay and params["protocol"] != "nqs-bp":
            raise UsageError("the noisy relay uses the nqs-bp layout")
    return Run(command, ns, params, sweep, profile, name, values["out"])


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", help="protocol sizes: 3, 1-6 or 1,2,4")
    p.add_argument("--g", help="gain")
    p.add_argument("--alpha", help="coherent or cat amplitude")
    p.add_argument("--s", help="single-mode squeezing parameter")
    p.add_argument("--chi", help="TMSV squeezing parameter")
    p.add_argument("--eta", help="total channel transmissivity")
    p.add_argument("--placement", help="relay station position: middle or end")
    p.add_argument("--protocol", help="nqs-bp, nqs-sp or x10")
    p.add_argument("--profile", help="ideal, realistic or a profile file")
    p.add_argument("--state", help="input state: coherent, smsv or cat")
    p.add_argument("--sweep", help="axis:min:max:points[:lin|log]")
    p.add_argument("--gain-policy", dest="gain_policy", help="relay gain off the g axis: fixed, scaling or optimal")
    p.add_argument("--cutoff", help="Fock cutoff of the input state")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--config", help="INI file with one section per command")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qscissors", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qscissors {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "amplify": "fidelity and success probability of noiseless amplification",
        "teleport": "unit-gain teleportation",
        "relay": "entanglement distributed through a lossy relay",
        "noisy": "amplification or relay with realistic detectors and resources",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        _add_common(p)
        if name == "noisy":
            p.add_argument("--target", help="amplify (default) or relay")
    st = sub.add_parser("selftest", help="permanent identity and circuit equivalence checks")
    st.add_argument("--max-n", type=int, default=8, dest="max_n")
    return parser


def selftest(max_n: int = 8, out=None) -> bool:
    out = sys.stdout if out is None else out
    ok = True
    worst = 0.0
    for n in range(1, max_n + 1):
        for j in range(n + 1):
            for m0 in range(n + 1):
                want = np.exp(-2j * np.pi * j * m0 / (n + 1)) * (-1) ** j * math.factorial(j) * math.factorial(n - j)
                got = permanent(omega_submatrix(n, j, m0))
                worst = max(worst, abs(got - want) / abs(want))
    passed = worst < 1e-9
    ok &= passed
    print(f"{'PASS' if passed else 'FAIL'} permanent identity n<={max_n} max rel err {worst:.2e}", file=out)
    worst = 0.0
    for n in (1, 2, 3):
        for g in (0.5, 1.0, 2.0):
            psi = coherent_state(0.3, 12)
            ref = nqs_output(ScissorConfig(n, g), psi).state.amplitudes
            worst = max(worst, float(np.max(np.abs(simulate_sp(n, g, psi).amplitudes - ref))))
            for m0 in range(n + 1):
                bp = phase_correction(n, m0, simulate_bp(n, g, psi, m0)).amplitudes
                worst = max(worst, float(np.max(np.abs(bp - ref))))
    passed = worst < 1e-10
    ok &= passed
    print(f"{'PASS' if passed else 'FAIL'} circuit equivalence n<=3 max abs err {worst:.2e}", file=out)
    return ok


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "selftest":
        return EXIT_OK if selftest(args.max_n) else EXIT_FAIL
    try:
        run = resolve(args.command, args)
        text = execute(run)
    except UsageError as exc:
        print(f"qscissors: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DimensionGuardError, TruncationError) as exc:
        print(f"qscissors: guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as exc:
        print(f"qscissors: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if run.out:
        with open(run.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
