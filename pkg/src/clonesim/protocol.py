"""End-to-end protocol runs: prepare, evolve, interfere, post-select, score.

Two execution modes share one scoring path:

- analytic: the perfect-passage limit.  The source photon carries the qubit
  exactly (a|H> + b|V>), the remote node contributes the entangled pair
  (|gR>|H> - |gL>|V>)/sqrt(2), and both photons are perfectly
  indistinguishable.
- dynamic: both nodes are integrated with ``adiabatic.evolve``; polarization
  amplitudes are extracted from the recorded emission channels, and the
  temporal overlap of the two envelopes enters the coincidence bookkeeping as
  the complex visibility factor.

Detector imperfections (efficiency eta, dark counts) transform a finished
report: the success probability picks up the eta^2 factor plus a
false-coincidence term, and dark-count heralds dilute the heralded state
toward the maximally mixed one.  A seeded Monte Carlo over detector click
patterns cross-checks the closed-form detection probability.

Encoding used throughout: atomic gL <-> logical 0 <-> photonic H, and
gR <-> 1 <-> V.  The clones are scored against a|H> + b|V>; the remote atom
against the flipped target b*|gL> - a*|gR>.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .adiabatic import (
    DynamicsReport,
    PulseSchedule,
    Side,
    SystemParams,
    alice_initial,
    bob_initial,
    evolve,
    pulse_overlap_complex,
)
from .cloner import InputQubit
from .optics import (
    PATH_A,
    PATH_B,
    POLS,
    DetectionReport,
    detection_bookkeeping,
    hwp0,
    one_photon,
    qwp_relabel,
    symmetric_project,
)
from .qstate import (
    DensityMatrix,
    Space,
    StateVector,
    fidelity_pure,
    partial_trace,
    tensor,
)

__all__ = [
    "Mode",
    "DetectorParams",
    "NodeConfig",
    "ProtocolConfig",
    "CloneReport",
    "ATOM_B",
    "MATCHED_DRIVE_RATIO",
    "assemble_joint",
    "run_analytic",
    "run_dynamic",
    "run",
    "detector_model",
    "telenot_check",
    "report_to_dict",
    "report_json",
    "SUMMARY_COLUMNS",
    "summary_csv",
    "pulse_csv",
]

ATOM_B = "atomB"

# remote drive scaled by sqrt(2) matches the two mixing angles,
# cos(th_B)(Omega sqrt(2)) = cos(th_A)(Omega), so the emitted envelopes agree
MATCHED_DRIVE_RATIO = math.sqrt(2.0)

EMISSION_DIAG_THRESHOLD = 0.99


class Mode(str, Enum):
    ANALYTIC = "analytic"
    DYNAMIC = "dynamic"


@dataclass(frozen=True)
class DetectorParams:
    """Single-photon detector model shared by all four detectors."""

    eta: float = 1.0
    dark_rate: float = 0.0
    window: float = 10.0

    def __post_init__(self):
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError("eta must lie in [0, 1]")
        if self.dark_rate < 0:
            raise ValueError("dark_rate must be non-negative")
        if self.window <= 0:
            raise ValueError("window must be positive")
        if self.dark_rate * self.window > 0.2:
            warnings.warn(
                f"dark_rate*window = {self.dark_rate * self.window:.3g} is not small; "
                "the per-window dark-click model assumes << 1",
                RuntimeWarning, stacklevel=2)

    @property
    def dark_click_prob(self) -> float:
        return 1.0 - math.exp(-self.dark_rate * self.window)


@dataclass(frozen=True)
class NodeConfig:
    """One atom-cavity node: physical rates plus its drive schedule."""

    params: SystemParams
    omega: PulseSchedule


def _default_alice() -> NodeConfig:
    return NodeConfig(SystemParams(side=Side.ALICE), PulseSchedule())


def _default_bob() -> NodeConfig:
    return NodeConfig(
        SystemParams(side=Side.BOB),
        PulseSchedule(omega_max=20.0 * MATCHED_DRIVE_RATIO))


@dataclass(frozen=True)
class ProtocolConfig:
    input: InputQubit
    alice: NodeConfig = field(default_factory=_default_alice)
    bob: NodeConfig = field(default_factory=_default_bob)
    mode: Mode = Mode.ANALYTIC
    detector: DetectorParams = field(default_factory=DetectorParams)
    seed: int = 0
    dt: float = 0.05
    emission_floor: float = 0.5
    mc_trials: int = 0   # detection Monte Carlo samples; 0 = closed form only

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.alice.params.side is not Side.ALICE:
            raise ValueError("alice node configured with the wrong side")
        if self.bob.params.side is not Side.BOB:
            raise ValueError("bob node configured with the wrong side")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not (0.0 <= self.emission_floor <= 1.0):
            raise ValueError("emission_floor must lie in [0, 1]")
        if self.mc_trials < 0:
            raise ValueError("mc_trials must be non-negative")


@dataclass(frozen=True)
class CloneReport:
    """Scores and bookkeeping of one protocol run.

    ``post_state`` is the pure heralded state of the fully interfering
    branch (photons out3, out4 in dual-rail encoding plus the remote atom);
    ``rho_post`` is the actual heralded density matrix (polarization qubits
    ph3, ph4 plus the atom) including partial-visibility and, after
    ``detector_model`` with dark counts, false-herald dilution.
    """

    config: ProtocolConfig
    post_state: StateVector
    rho_post: DensityMatrix
    clone_fidelity_1: float
    clone_fidelity_2: float
    telenot_fidelity: float
    p_symmetric: float
    p_operational: float
    p_detected: float
    overlap_visibility: float
    emission_prob_alice: float
    emission_prob_bob: float
    count_distribution: dict
    false_herald_fraction: float = 0.0
    mc_p_detected: float | None = None
    mc_trials: int = 0
    mc_sigma: float = 0.0
    dynamics_diags: tuple[DynamicsReport, DynamicsReport] | None = None
    diagnostics: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# state assembly and scoring
# ---------------------------------------------------------------------------


def _atom_space() -> Space:
    return Space(((ATOM_B, ("gL", "gR")),))


def _atom_state(level: str) -> StateVector:
    space = _atom_space()
    return StateVector(space, {space.label({ATOM_B: level}): 1.0})


def assemble_joint(alpha: tuple[complex, complex],
                   beta: tuple[complex, complex]) -> StateVector:
    """Photon pair + remote atom state entering the interference stage.

    ``alpha`` are the source photon's circular amplitudes (L, R); ``beta``
    the remote node's channel amplitudes, where the L photon is tied to atom
    gR and the R photon to gL.  Both photons pass their quarter-wave plate
    (L -> H, R -> V); the remote path also crosses the 0-degree half-wave
    plate, whose V sign flip produces the pair's relative minus.
    """
    phot_a = one_photon(PATH_A, {"L": alpha[0], "R": alpha[1]}, pols=("L", "R"))
    phot_a = qwp_relabel(phot_a, PATH_A)

    pair = (tensor(_atom_state("gR"), one_photon(PATH_B, {"L": 1.0}, pols=("L", "R"))) * beta[0]
            + tensor(_atom_state("gL"), one_photon(PATH_B, {"R": 1.0}, pols=("L", "R"))) * beta[1])
    pair = hwp0(qwp_relabel(pair, PATH_B), PATH_B)
    return tensor(phot_a, pair)


def _clone_target(sid: str, q: InputQubit) -> StateVector:
    space = Space(((sid, POLS),))
    return StateVector(space, {
        space.label({sid: "H"}): q.a,
        space.label({sid: "V"}): q.b,
    })


def _telenot_target(q: InputQubit) -> StateVector:
    space = _atom_space()
    return StateVector(space, {
        space.label({ATOM_B: "gL"}): q.b.conjugate(),
        space.label({ATOM_B: "gR"}): -q.a.conjugate(),
    })


def _score(rho: DensityMatrix, q: InputQubit) -> tuple[float, float, float]:
    f1 = fidelity_pure(partial_trace(rho, keep={"ph3"}), _clone_target("ph3", q))
    f2 = fidelity_pure(partial_trace(rho, keep={"ph4"}), _clone_target("ph4", q))
    ft = fidelity_pure(partial_trace(rho, keep={ATOM_B}), _telenot_target(q))
    return f1, f2, ft


def _finish(cfg: ProtocolConfig, joint: StateVector, overlap_c: complex,
            emit_a: float, emit_b: float,
            diags: tuple[DynamicsReport, DynamicsReport] | None,
            notes: tuple[str, ...]) -> CloneReport:
    """Common tail: project, herald, score, apply the configured detectors."""
    sym = symmetric_project(joint)
    detection: DetectionReport = detection_bookkeeping(joint, overlap_c)
    if detection.rho_conditional is None:
        raise RuntimeError("no coincidence support in the assembled state")

    f1, f2, ft = _score(detection.rho_conditional, cfg.input)
    p_op = emit_a * emit_b * detection.p_coincidence

    report = CloneReport(
        config=cfg,
        post_state=sym.projected_state,
        rho_post=detection.rho_conditional,
        clone_fidelity_1=f1,
        clone_fidelity_2=f2,
        telenot_fidelity=ft,
        p_symmetric=detection.p_sym_weight,
        p_operational=p_op,
        p_detected=p_op,
        overlap_visibility=detection.visibility,
        emission_prob_alice=emit_a,
        emission_prob_bob=emit_b,
        count_distribution=dict(detection.count_distribution),
        dynamics_diags=diags,
        diagnostics=notes,
    )
    return detector_model(report, cfg.detector.eta, cfg.detector.dark_rate,
                          cfg.detector.window, cfg.seed, trials=cfg.mc_trials)


def run_analytic(cfg: ProtocolConfig) -> CloneReport:
    """Perfect-passage protocol run; all constants exact."""
    if Mode(cfg.mode) is not Mode.ANALYTIC:
        raise ValueError("run_analytic requires mode=analytic")
    q = cfg.input
    r = 1.0 / math.sqrt(2.0)
    joint = assemble_joint((q.a, q.b), (r, r))
    return _finish(cfg, joint, 1.0, 1.0, 1.0, None, ())


def _channel_vector(rep: DynamicsReport) -> tuple[np.ndarray, float]:
    """Polarization amplitudes of the emitted photon from the channel records.

    The emission factorizes as (channel vector) x (scalar envelope); the
    vector is the dominant eigenvector of the channel Gram matrix, gauged so
    the dominant channel's component is real positive, matching the phase
    convention of ``DynamicsReport.pulse_shape``.  Returns (vector, purity).
    """
    names = sorted(rep.channel_pulses)
    f = np.vstack([rep.channel_pulses[n] for n in names])
    gram = np.empty((len(names), len(names)), dtype=complex)
    for i in range(len(names)):
        for j in range(len(names)):
            gram[i, j] = np.trapezoid(f[i] * np.conj(f[j]), rep.t_grid)
    evals, evecs = np.linalg.eigh(gram)
    v = evecs[:, -1]
    purity = float(evals[-1] / evals.sum()) if evals.sum() > 0 else 0.0
    dom = max(range(len(names)), key=lambda i: rep.channel_weights[names[i]])
    if abs(v[dom]) > 0:
        v = v * (v[dom].conjugate() / abs(v[dom]))
    return v, purity


def run_dynamic(cfg: ProtocolConfig) -> CloneReport:
    """Integrated-passage protocol run.

    Both nodes evolve under their schedules; the heralded state is scored
    with the actual envelope overlap as visibility.  Emission probability
    below 0.99 is recorded as a diagnostic; below ``emission_floor`` the run
    is flagged protocol-degenerate (warning, not an error).
    """
    if Mode(cfg.mode) is not Mode.DYNAMIC:
        raise ValueError("run_dynamic requires mode=dynamic")
    q = cfg.input
    rep_a = evolve(alice_initial(q.a, q.b), cfg.alice.params, cfg.alice.omega, cfg.dt)
    rep_b = evolve(bob_initial(), cfg.bob.params, cfg.bob.omega, cfg.dt)

    notes = []
    for name, rep in (("alice", rep_a), ("bob", rep_b)):
        if rep.emission_prob < cfg.emission_floor:
            warnings.warn(
                f"protocol degenerate: {name} emission probability "
                f"{rep.emission_prob:.6g} below floor {cfg.emission_floor:g}",
                RuntimeWarning, stacklevel=2)
            notes.append(f"{name} emission {rep.emission_prob:.6g} below floor "
                         f"{cfg.emission_floor:g}: protocol degenerate")
        elif rep.emission_prob < EMISSION_DIAG_THRESHOLD:
            notes.append(f"{name} emission probability {rep.emission_prob:.6g} "
                         f"< {EMISSION_DIAG_THRESHOLD}")
        if rep.excited_pop_max > 1e-2:
            notes.append(f"{name} excited population peaked at "
                         f"{rep.excited_pop_max:.3e}")

    alpha, pur_a = _channel_vector(rep_a)
    beta, pur_b = _channel_vector(rep_b)
    for name, pur in (("alice", pur_a), ("bob", pur_b)):
        if 1.0 - pur > 1e-6:
            notes.append(f"{name} emission not rank-one: purity {pur:.9f}")
            warnings.warn(f"{name} channel Gram matrix far from rank one "
                          f"(purity {pur:.9f})", RuntimeWarning, stacklevel=2)

    c = pulse_overlap_complex(rep_a.t_grid, rep_a.pulse_shape,
                              rep_b.t_grid, rep_b.pulse_shape)
    joint = assemble_joint((alpha[0], alpha[1]), (beta[0], beta[1]))
    return _finish(cfg, joint, c, rep_a.emission_prob, rep_b.emission_prob,
                   (rep_a, rep_b), tuple(notes))


def run(cfg: ProtocolConfig) -> CloneReport:
    if Mode(cfg.mode) is Mode.ANALYTIC:
        return run_analytic(cfg)
    return run_dynamic(cfg)


def telenot_check(report: CloneReport, q: InputQubit) -> float:
    """Fidelity of the remote atom's heralded state against b*|gL> - a*|gR>."""
    return fidelity_pure(partial_trace(report.rho_post, keep={ATOM_B}),
                         _telenot_target(q))


# ---------------------------------------------------------------------------
# detector model
# ---------------------------------------------------------------------------

_SINGLE_PATTERNS = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))
_COINC_PATTERNS = ((1, 1, 0, 0), (0, 0, 1, 1))


def _branches(report: CloneReport) -> list[tuple[float, dict]]:
    """(weight, pattern distribution) per emission outcome."""
    pa, pb = report.emission_prob_alice, report.emission_prob_bob
    out = [(pa * pb, report.count_distribution)]
    w_one = pa * (1.0 - pb) + (1.0 - pa) * pb
    if w_one > 0:
        # one photon entering the network spreads evenly over the detectors
        out.append((w_one, {pat: 0.25 for pat in _SINGLE_PATTERNS}))
    w_none = (1.0 - pa) * (1.0 - pb)
    if w_none > 0:
        out.append((w_none, {(0, 0, 0, 0): 1.0}))
    return out


def _uniform_mixed(space: Space) -> DensityMatrix:
    w = 1.0 / space.dim
    return DensityMatrix(space, {(lab, lab): w for lab in space.labels()})


def detector_model(report: CloneReport, eta: float, dark_rate: float,
                   window: float, seed: int, trials: int = 0) -> CloneReport:
    """Fold detector efficiency and dark counts into a finished report.

    With dark_rate = 0 the fidelity fields pass through untouched and
    p_detected = p_operational * eta^2 exactly.  With dark counts, the herald
    probability gains false coincidences (computed in closed form over the
    click patterns), and the heralded state is diluted toward the maximally
    mixed polarization state by the false-herald fraction.  ``trials`` > 0
    additionally runs a seeded Monte Carlo over click patterns and records
    its estimate beside the closed form.

    The input must be an ideal-detector report (what run_analytic/run_dynamic
    produce under the default DetectorParams); applying dark-count dilution
    twice would compound it.
    """
    det = DetectorParams(eta=eta, dark_rate=dark_rate, window=window)
    p_dark = det.dark_click_prob
    branches = _branches(report)

    def click_prob(n: int) -> float:
        return 1.0 - (1.0 - eta) ** n * (1.0 - p_dark)

    p_detected = 0.0
    p_true = 0.0
    for weight, dist in branches:
        for pat, q in dist.items():
            p1, p2, p3, p4 = (click_prob(n) for n in pat)
            herald = p1 * p2 + p3 * p4 - p1 * p2 * p3 * p4
            p_detected += weight * q * herald
            if pat in _COINC_PATTERNS:
                p_true += weight * q * eta * eta

    if dark_rate == 0.0:
        # exact eta^2 law; fidelities and state bit-identical by construction
        new = replace(report, p_detected=report.p_operational * eta * eta,
                      false_herald_fraction=0.0)
    else:
        w_false = 1.0 - p_true / p_detected if p_detected > 0 else 0.0
        mixed = _uniform_mixed(report.rho_post.space)
        rho = report.rho_post * (1.0 - w_false) + mixed * w_false
        new = replace(
            report,
            p_detected=p_detected,
            false_herald_fraction=w_false,
            rho_post=rho,
            clone_fidelity_1=(1.0 - w_false) * report.clone_fidelity_1 + w_false * 0.5,
            clone_fidelity_2=(1.0 - w_false) * report.clone_fidelity_2 + w_false * 0.5,
            telenot_fidelity=(1.0 - w_false) * report.telenot_fidelity + w_false * 0.5,
        )

    if trials > 0:
        est = _detection_mc(branches, eta, p_dark, seed, trials)
        sigma = math.sqrt(max(new.p_detected * (1.0 - new.p_detected), 0.0) / trials)
        new = replace(new, mc_p_detected=est, mc_trials=trials, mc_sigma=sigma)
    return new


def _detection_mc(branches: list, eta: float, p_dark: float,
                  seed: int, trials: int) -> float:
    """Monte Carlo herald frequency over emission branches and click patterns."""
    pats = []
    probs = []
    for weight, dist in branches:
        for pat, q in dist.items():
            pats.append(pat)
            probs.append(weight * q)
    probs = np.asarray(probs)
    total = probs.sum()
    if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-9):
        raise RuntimeError(f"branch probabilities sum to {total:.12g}, not 1")
    probs = probs / total

    rng = np.random.Generator(np.random.PCG64(seed))
    idx = rng.choice(len(pats), size=trials, p=probs)
    counts = np.asarray(pats)[idx]                       # (trials, 4)
    photon_click = rng.random((trials, 4)) < (1.0 - (1.0 - eta) ** counts)
    dark_click = rng.random((trials, 4)) < p_dark
    click = photon_click | dark_click
    herald = (click[:, 0] & click[:, 1]) | (click[:, 2] & click[:, 3])
    return float(herald.mean())


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

SUMMARY_COLUMNS = (
    "mode", "a_re", "a_im", "b_re", "b_im",
    "clone_fidelity_1", "clone_fidelity_2", "telenot_fidelity",
    "p_symmetric", "p_operational", "p_detected",
    "overlap_visibility", "emission_prob_alice", "emission_prob_bob",
    "false_herald_fraction", "eta", "dark_rate", "window", "seed",
)


def _fmt(x) -> str:
    return format(float(x), ".12g")


def _complex_pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _node_dict(node: NodeConfig) -> dict:
    p, om = node.params, node.omega
    return {
        "side": p.side.value,
        "g": p.g, "kappa": p.kappa, "gamma": p.gamma, "delta": p.delta,
        "epsilon": p.epsilon, "nu": p.nu,
        "omega_max": om.omega_max, "t_total": om.t_total,
        "hold_fraction": om.hold_fraction, "shape": om.shape,
    }


def report_to_dict(report: CloneReport) -> dict:
    """Plain nested dict of one report; deterministic, no timestamps."""
    cfg = report.config
    doc = {
        "config": {
            "mode": cfg.mode.value,
            "seed": cfg.seed,
            "input": {"a": _complex_pair(cfg.input.a), "b": _complex_pair(cfg.input.b)},
            "alice": _node_dict(cfg.alice),
            "bob": _node_dict(cfg.bob),
            "detector": {"eta": cfg.detector.eta, "dark_rate": cfg.detector.dark_rate,
                         "window": cfg.detector.window},
            "dt": cfg.dt,
            "emission_floor": cfg.emission_floor,
        },
        "results": {
            "clone_fidelity_1": report.clone_fidelity_1,
            "clone_fidelity_2": report.clone_fidelity_2,
            "telenot_fidelity": report.telenot_fidelity,
            "p_symmetric": report.p_symmetric,
            "p_operational": report.p_operational,
            "p_detected": report.p_detected,
            "overlap_visibility": report.overlap_visibility,
            "emission_prob_alice": report.emission_prob_alice,
            "emission_prob_bob": report.emission_prob_bob,
            "false_herald_fraction": report.false_herald_fraction,
        },
        "count_distribution": {
            ",".join(map(str, pat)): p
            for pat, p in sorted(report.count_distribution.items())
        },
        "post_state": {
            str(lab): _complex_pair(amp)
            for lab, amp in sorted(report.post_state.amps.items(),
                                   key=lambda kv: kv[0].factors)
        },
        "rho_post": {
            f"{r} {c}": _complex_pair(v)
            for (r, c), v in sorted(report.rho_post.entries.items(),
                                    key=lambda kv: (kv[0][0].factors, kv[0][1].factors))
        },
        "diagnostics": list(report.diagnostics),
    }
    if report.mc_trials > 0:
        doc["monte_carlo"] = {
            "p_detected": report.mc_p_detected,
            "trials": report.mc_trials,
            "sigma": report.mc_sigma,
        }
    if report.dynamics_diags is not None:
        doc["dynamics"] = {
            name: {
                "emission_prob": rep.emission_prob,
                "spont_loss": rep.spont_loss,
                "excited_pop_max": rep.excited_pop_max,
                "closure_error": rep.closure_error,
                "channel_weights": dict(sorted(rep.channel_weights.items())),
                "steps": int(len(rep.t_grid) - 1),
            }
            for name, rep in zip(("alice", "bob"), report.dynamics_diags)
        }
    return doc


def report_json(report: CloneReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"


def summary_csv(report: CloneReport) -> str:
    """Flat one-row scalar summary with a pinned header."""
    cfg = report.config
    values = {
        "mode": cfg.mode.value,
        "a_re": _fmt(cfg.input.a.real), "a_im": _fmt(cfg.input.a.imag),
        "b_re": _fmt(cfg.input.b.real), "b_im": _fmt(cfg.input.b.imag),
        "clone_fidelity_1": _fmt(report.clone_fidelity_1),
        "clone_fidelity_2": _fmt(report.clone_fidelity_2),
        "telenot_fidelity": _fmt(report.telenot_fidelity),
        "p_symmetric": _fmt(report.p_symmetric),
        "p_operational": _fmt(report.p_operational),
        "p_detected": _fmt(report.p_detected),
        "overlap_visibility": _fmt(report.overlap_visibility),
        "emission_prob_alice": _fmt(report.emission_prob_alice),
        "emission_prob_bob": _fmt(report.emission_prob_bob),
        "false_herald_fraction": _fmt(report.false_herald_fraction),
        "eta": _fmt(cfg.detector.eta),
        "dark_rate": _fmt(cfg.detector.dark_rate),
        "window": _fmt(cfg.detector.window),
        "seed": str(cfg.seed),
    }
    header = ",".join(SUMMARY_COLUMNS)
    row = ",".join(values[c] for c in SUMMARY_COLUMNS)
    return header + "\n" + row + "\n"


def pulse_csv(rep: DynamicsReport) -> str:
    """Emission envelope on the integration grid: t, Re f, Im f."""
    lines = ["t,re_f,im_f"]
    for t, f in zip(rep.t_grid, rep.pulse_shape):
        lines.append(f"{_fmt(t)},{_fmt(f.real)},{_fmt(f.imag)}")
    return "\n".join(lines) + "\n"
