"""Experiment runners, one per measured protocol.

Each runner is a pure function of (device, params, seed) producing
scalar metrics, named series, and named matrices for the result
bundle.  Where the hardware has a published value, it is recorded in
the metrics under a ``reference_`` key next to the model output.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import multimode, sawphys, tomo
from .cascade import CascadeConfig, process_tomography_run, run_cascade, two_qubit_space
from .device import DeviceParams
from .dynamics import LindbladModel, NoiseSpec, evolve, evolve_generator
from .errors import ValidationError
from .ioshape import (
    ChannelParams,
    ControlSchedule,
    Segment,
    interference_experiment,
    simulate_io,
    time_reverse,
    transfer_schedule,
)
from .qcore import (
    NUMBER,
    SIGMA_MINUS,
    QuantumState,
    SuperOperator,
    dissipator,
    embed,
    partial_trace,
)

# The cross-damping transfer imprints a pi phase on the moved amplitude;
# the hardware absorbs it by redefining the receiving qubit's frame, and
# the runners do the same with a fixed Z on each receiving qubit.
Z_FRAME = np.diag([1.0, -1.0]).astype(complex)
SWAP_GATE = np.eye(4, dtype=complex)[[0, 2, 1, 3]]
PAULI_BASIS_1Q = ("I", "X", "Y", "Z")
QUBIT_BASIS_2Q = ("gg", "ge", "eg", "ee")


@dataclass(frozen=True)
class ExperimentOutput:
    metrics: dict[str, float]
    series: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)
    matrices: dict[str, tuple[np.ndarray, tuple[str, ...]]] = field(default_factory=dict)


def _eta(device: DeviceParams, params: dict) -> float:
    return device.eta if params.get("eta") is None else float(params["eta"])


def run_ping_pong(device: DeviceParams, params: dict, seed: int) -> ExperimentOutput:
    """Release a full phonon and recapture it with the same qubit."""
    kc, w = params["kappa_c"], params["window_ns"]
    ch = device.channel(eta=_eta(device, params))
    sched = transfer_schedule(kc, w, ch.tau, emitter=1, receiver=1)
    trace = simulate_io(sched, ch, s0=(1.0, 0.0))
    p1 = np.abs(trace.s1) ** 2
    efficiency = float(p1[-1] / p1[0])
    return ExperimentOutput(
        metrics={
            "capture_efficiency": efficiency,
            "eta_used": ch.eta,
            "reference_efficiency": 0.67,
        },
        series={
            "populations": {
                "t_ns": trace.times,
                "p_e": p1,
                "emitted_power": np.abs(trace.a_out) ** 2,
            }
        },
    )


def run_multi_transit(device: DeviceParams, params: dict, seed: int) -> ExperimentOutput:
    """Capture after n full transits; efficiency decays geometrically."""
    kc, w = params["kappa_c"], params["window_ns"]
    n_max = int(params["max_transits"])
    if n_max < 1:
        raise ValidationError("max_transits must be >= 1")
    ch = device.channel(eta=_eta(device, params))
    release = Segment("full_release", 1, 0.0, w, kc)
    effs = []
    for n in range(1, n_max + 1):
        capture = time_reverse(replace(release, t_start=n * ch.tau))
        sched = ControlSchedule([release, capture], window=(0.0, n * ch.tau + w))
        trace = simulate_io(sched, ch, s0=(1.0, 0.0))
        effs.append(float(np.abs(trace.s1[-1]) ** 2))
    effs_arr = np.array(effs)
    ns = np.arange(1, n_max + 1, dtype=float)
    # one-parameter geometric fit in log space
    eta_fit = float(np.exp(np.sum(ns * np.log(effs_arr)) / np.sum(ns**2)))
    fitted = eta_fit**ns
    ss_res = float(np.sum((effs_arr - fitted) ** 2))
    ss_tot = float(np.sum((effs_arr - effs_arr.mean()) ** 2))
    powers = ch.eta**ns
    return ExperimentOutput(
        metrics={
            "eta_used": ch.eta,
            "eta_fit": eta_fit,
            "r_squared": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0,
            "max_dev_from_eta_power": float(np.max(np.abs(effs_arr - powers))),
        },
        series={
            "transits": {
                "n": ns,
                "efficiency": effs_arr,
                "eta_power": powers,
            }
        },
    )


def run_interference(device: DeviceParams, params: dict, seed: int) -> ExperimentOutput:
    """Half release, dialed phase, half recapture, averaged over dephasing."""
    kc, w = params["kappa_c"], params["window_ns"]
    ch = device.channel(eta=_eta(device, params))
    n_phases = int(params["n_phases"])
    if n_phases < 4:
        raise ValidationError("need at least 4 phase points")
    sigma = params["sigma_phi"]
    if sigma is None:
        # Gaussian phase spread accumulated over one emit-wait-capture cycle
        sigma = float(np.sqrt(2 * ch.tau / (device.q1.T2R_us * 1e3)))
    noise = NoiseSpec(
        sigma_phi=float(sigma),
        n_realizations=int(params["realizations"]),
        master_seed=seed,
    )
    phases = np.linspace(0.0, 2 * np.pi, n_phases)
    chunk = int(params["chunk"])
    pe = np.array(
        [interference_experiment(phi, ch, noise, kc, w, chunk=chunk) for phi in phases]
    )
    # periodicity content from the closed loop (drop the duplicated endpoint)
    spec = np.abs(np.fft.rfft(pe[:-1]))
    fundamental_ratio = float(spec[1] / max(spec[2:].max(), 1e-30))
    i_pi = int(np.argmin(np.abs(phases - np.pi)))
    return ExperimentOutput(
        metrics={
            "p_at_zero": float(pe[0]),
            "p_at_pi": float(pe[i_pi]),
            "visibility": float((pe.max() - pe.min()) / (pe.max() + pe.min())),
            "fundamental_ratio": fundamental_ratio,
            "sigma_phi": float(sigma),
            "reference_p_at_zero": 0.77,
            "reference_p_at_pi": 0.08,
        },
        series={"fringe": {"delta_phi_rad": phases, "p_e": pe}},
    )


def _chi_output(chi, ideal, prefix: str) -> ExperimentOutput:
    labels = tomo.pauli_basis(chi.n_qubits)
    basis = tuple(labels.keys())
    return ExperimentOutput(
        metrics={
            f"{prefix}_fidelity": tomo.fidelity(chi, ideal),
            f"{prefix}_hs_distance": tomo.hs_distance(chi, ideal),
        },
        matrices={
            "chi": (chi.chi, basis),
            "chi_ideal": (ideal.chi, basis),
        },
    )


def run_swap(device: DeviceParams, params: dict, seed: int) -> ExperimentOutput:
    """Single shaped transfer characterized by process tomography."""
    kc, w = params["kappa_c"], params["window_ns"]
    emitter, receiver = int(params["emitter"]), int(params["receiver"])
    ch = device.channel(eta=_eta(device, params))
    sched = transfer_schedule(kc, w, ch.tau, emitter=emitter, receiver=receiver)
    cfg = CascadeConfig(sched, ch, noise=device.noise_pair())
    chi = process_tomography_run(
        cfg, emitter, receiver, ch.tau + w, tol=params["tol"], frame=Z_FRAME
    )
    out = _chi_output(chi, tomo.chi_ideal(np.eye(2)), "process")
    out.metrics["reference_fidelity"] = 0.83
    return out


def double_swap_schedule(kc: float, w: float, tau: float) -> ControlSchedule:
    """Both qubits emit back to back, then capture each other's phonon.

    Emissions at [0, w] (qubit 2) and [w, 2w] (qubit 1); the packets
    return after one transit and are absorbed in arrival order.  The
    whole exchange fits one [0, tau + 2w] window, so it stays inside
    the model's two-interaction validity span for w <= tau / 2.
    """
    rel2 = Segment("full_release", 2, 0.0, w, kc)
    rel1 = Segment("full_release", 1, w, w, kc)
    cap1 = time_reverse(replace(rel2, qubit=1, t_start=tau))
    cap2 = time_reverse(replace(rel1, qubit=2, t_start=tau + w))
    return ControlSchedule([rel2, rel1, cap1, cap2], window=(0.0, tau + 2 * w))


def run_double_swap(device: DeviceParams, params: dict, seed: int) -> ExperimentOutput:
    """Two counter-directed transfers exchanging the qubit states."""
    kc, w = params["kappa_c"], params["window_ns"]
    ch = device.channel(eta=_eta(device, params))
    if 2 * w > ch.tau:
        raise ValidationError("double swap needs window_ns <= tau / 2")
    cfg = CascadeConfig(double_swap_schedule(kc, w, ch.tau), ch, noise=device.noise_pair())
    chi = process_tomography_run(
        cfg, (1, 2), (2, 1), ch.tau + 2 * w, tol=params["tol"],
        frame=np.kron(Z_FRAME, Z_FRAME),
    )
    out = _chi_output(chi, tomo.chi_ideal(SWAP_GATE), "process")
    out.metrics["reference_fidelity"] = 0.63
    return out


def run_bell(device: DeviceParams, params: dict, seed: int) -> ExperimentOutput:
    """Half release on qubit 1, full capture on qubit 2, joint readout.

    The doubled-space construction carries the emitting qubit's copy
    delayed by tau, while the physical joint readout happens at one
    lab instant; the emitter marginal is therefore aged under its idle
    imperfections over tau before scoring.
    """
    kc, w = params["kappa_c"], params["window_ns"]
    alpha = float(params["alpha"])
    ch = device.channel(eta=_eta(device, params))
    sched = transfer_schedule(kc, w, ch.tau, emitter=1, receiver=2, alpha=alpha)
    cfg = CascadeConfig(sched, ch, noise=device.noise_pair())
    space = two_qubit_space()
    t_ro = ch.tau + w
    _, doubled = run_cascade(
        cfg,
        QuantumState.basis_state(space, (1, 0)),
        np.array([0.0, t_ro]),
        tol=params["tol"],
        return_doubled=True,
    )
    pair = partial_trace(doubled.states[-1], ["q1e", "q2"])
    sp = pair.space
    nz = device.q1.noise()
    idle = SuperOperator(
        sp,
        [
            (nz.relax_rate, dissipator(embed(SIGMA_MINUS, "q1e", sp)).terms[0][1]),
            (nz.dephase_rate, dissipator(embed(NUMBER, "q1e", sp)).terms[0][1]),
        ],
    )
    aged = evolve_generator(
        sp, idle, pair, np.array([0.0, ch.tau]), tol=params["tol"]
    ).final_state()
    frame = np.kron(np.eye(2), Z_FRAME)
    rho = frame @ aged.rho @ frame.conj().T
    psi = np.array([0.0, 1.0, 1.0, 0.0]) / np.sqrt(2)
    target = np.outer(psi, psi)
    metrics = {
        "bell_fidelity": tomo.fidelity(rho, target),
        "concurrence": tomo.concurrence(rho),
        "reference_bell_fidelity": 0.84,
        "reference_concurrence": 0.61,
    }
    for label, value in tomo.pauli_expectations(rho).items():
        metrics[f"pauli_{label}"] = value
    return ExperimentOutput(
        metrics=metrics,
        matrices={"rho_pair": (rho, QUBIT_BASIS_2Q)},
    )


def run_spectroscopy(device: DeviceParams, params: dict, seed: int) -> ExperimentOutput:
    """Single-excitation spectrum while the qubit sweeps the mode ladder."""
    q = device.qubits[int(params["qubit"]) - 1]
    p = multimode.MultimodeParams(
        g=q.g_mhz, n_a=int(params["n_modes"]), fsr=1e3 / device.tau_ns
    )
    span = float(params["span_mhz"])
    offsets = np.linspace(-span / 2, span / 2, int(params["points"]))
    eig = multimode.spectrum(p, offsets)
    series = {"offset_mhz": offsets}
    for j in range(eig.shape[1]):
        series[f"eig_{j:02d}_mhz"] = eig[:, j]
    # hybridization gap: the pair of dressed levels straddling the bare
    # qubit line when it sits on the central mode
    center = eig[int(np.argmin(np.abs(offsets)))]
    above = center[center > 0].min()
    below = center[center < 0].max()
    return ExperimentOutput(
        metrics={
            "central_gap_mhz": float(above - below),
            "coupling_mhz": q.g_mhz,
            "fsr_mhz": p.fsr,
        },
        series={"spectrum": series},
    )


def run_vacuum_rabi(device: DeviceParams, params: dict, seed: int) -> ExperimentOutput:
    """Qubit decay into the ladder with echo revivals, two independent routes.

    The route comparison runs at a reduced coupling by default: the
    analytical series assumes an unbounded flat mode ladder, and at
    the device's full coupling the emission bandwidth exceeds any
    tractable truncated ladder.  The golden-rule figure is always
    quoted at the device coupling.
    """
    q = device.qubits[int(params["qubit"]) - 1]
    g = float(params["g_mhz"])
    p = multimode.MultimodeParams(
        g=g,
        n_a=int(params["n_modes"]),
        fsr=1e3 / device.tau_ns,
        kappa_a=1.0 / device.t1_saw_us,
    )
    space = multimode.build_space(p)
    ka = p.kappa_a * 1e-3
    model = LindbladModel(
        space,
        [(1.0, multimode.jc_hamiltonian(p, space))],
        [(np.sqrt(ka), embed(SIGMA_MINUS, lbl, space)) for lbl in p.mode_labels],
    )
    grid = np.linspace(0.0, float(params["horizon_tau"]) * p.tau_ns, int(params["points"]))
    rho0 = QuantumState.basis_state(space, [1] + [0] * p.n_a)
    traj = evolve(
        model, rho0, grid, tol=params["tol"],
        observables={"pe": embed(NUMBER, "q", space)},
    )
    pe_lindblad = traj.observables["pe"]
    pe_series = np.abs(multimode.laguerre_amplitude(grid, p)) ** 2
    golden = multimode.golden_rule_kappa(q.g_mhz, p.fsr)
    return ExperimentOutput(
        metrics={
            "sup_deviation": float(np.max(np.abs(pe_lindblad - pe_series))),
            "revival_onset_ns": multimode.revival_onset(grid, pe_lindblad),
            "expected_onset_ns": p.tau_ns,
            "golden_rule_inverse_ns": golden.inverse_ns,
        },
        series={
            "decay": {
                "t_ns": grid,
                "p_e_lindblad": pe_lindblad,
                "p_e_series": pe_series,
            }
        },
    )


def run_saw_response(device: DeviceParams, params: dict, seed: int) -> ExperimentOutput:
    """Transducer emission spectrum and mirror reflectance curves."""
    g = device.geometry
    f = np.linspace(float(params["f_lo_ghz"]), float(params["f_hi_ghz"]),
                    int(params["points"]))
    kappa_max = 1.0 / device.q1.kappa_inv_ns
    budget = sawphys.loss_budget(g, g.band_center_ghz)
    return ExperimentOutput(
        metrics={
            "idt_center_ghz": g.idt_center_ghz,
            "idt_first_null_ghz": g.idt_center_ghz * (1 + 1 / g.idt.cells),
            "stopband_width_mhz": sawphys.stopband_width_mhz(g),
            "tau_ns": sawphys.transit_time(g),
            "fsr_mhz": sawphys.fsr_mhz(g),
            "t1_saw_us": budget.t1_saw_us,
            "q_factor": budget.q_factor,
            "eta_bound": multimode.efficiency_bound(device.tau_ns, device.t1_saw_us),
        },
        series={
            "response": {
                "f_ghz": f,
                "kappa_ns": sawphys.idt_rate_spectrum(f, g, kappa_max),
                "mirror_reflectance": sawphys.mirror_stopband(f, g),
            }
        },
    )


def run_tomo_roundtrip(device: DeviceParams, params: dict, seed: int) -> ExperimentOutput:
    """Reconstruction fidelity audit on random states, exact and corrected."""
    n_states = int(params["n_states"])
    if n_states < 1:
        raise ValidationError("n_states must be >= 1")
    rng = np.random.default_rng(seed)
    readout = device.readout()
    worst_exact = 0.0
    worst_corrected = 0.0
    for _ in range(n_states):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = a @ a.conj().T
        rho /= np.trace(rho).real
        rec = tomo.state_tomo(tomo.tomography_data(rho))
        worst_exact = max(worst_exact, tomo.hs_distance(rho, rec))
        rec_c = tomo.state_tomo(
            tomo.tomography_data(rho, readout=readout), readout=readout
        )
        worst_corrected = max(worst_corrected, tomo.hs_distance(rec, rec_c))
    worst_process = 0.0
    inputs = tomo.prep_states(1)
    for _ in range(max(1, n_states // 4)):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        q, r = np.linalg.qr(a)
        u = q * (np.diag(r) / np.abs(np.diag(r)))  # Haar phase fix
        outputs = {k: u @ rho_in @ u.conj().T for k, rho_in in inputs.items()}
        chi = tomo.process_from_states(inputs, outputs)
        worst_process = max(
            worst_process, tomo.hs_distance(chi, tomo.chi_ideal(u))
        )
    psi = np.array([0.0, 1.0, 1.0, 0.0]) / np.sqrt(2)
    bell = np.outer(psi, psi)
    p_werner = float(params["werner_p"])
    werner = p_werner * bell + (1 - p_werner) * np.eye(4) / 4
    c_closed = max(0.0, (3 * p_werner - 1) / 2)
    return ExperimentOutput(
        metrics={
            "max_exact_error": worst_exact,
            "max_corrected_error": worst_corrected,
            "max_process_error": worst_process,
            "werner_concurrence_error": abs(tomo.concurrence(werner) - c_closed),
        }
    )


@dataclass(frozen=True)
class ExperimentSpec:
    runner: Callable[[DeviceParams, dict, int], ExperimentOutput]
    defaults: dict


EXPERIMENTS: dict[str, ExperimentSpec] = {
    "ping_pong": ExperimentSpec(
        run_ping_pong, {"kappa_c": 0.15, "window_ns": 150.0, "eta": None}
    ),
    "multi_transit": ExperimentSpec(
        run_multi_transit,
        {"kappa_c": 0.15, "window_ns": 150.0, "eta": None, "max_transits": 4},
    ),
    "interference": ExperimentSpec(
        run_interference,
        {
            "kappa_c": 0.1,
            "window_ns": 180.0,
            "eta": None,
            "n_phases": 33,
            "realizations": 1024,
            "sigma_phi": None,
            # batch width for the vectorized realizations; output is
            # chunk-order dependent only at the float rounding level,
            # so it is part of the config, not a CLI knob
            "chunk": 1024,
        },
    ),
    "swap": ExperimentSpec(
        run_swap,
        {
            "kappa_c": 0.15,
            "window_ns": 120.0,
            "eta": None,
            "emitter": 1,
            "receiver": 1,
            "tol": 1e-8,
        },
    ),
    "double_swap": ExperimentSpec(
        run_double_swap,
        {"kappa_c": 0.15, "window_ns": 120.0, "eta": None, "tol": 1e-8},
    ),
    "bell": ExperimentSpec(
        run_bell,
        {
            "kappa_c": 0.15,
            "window_ns": 180.0,
            "eta": None,
            "alpha": 0.5,
            "tol": 1e-8,
        },
    ),
    "spectroscopy": ExperimentSpec(
        run_spectroscopy,
        {"qubit": 1, "n_modes": 8, "span_mhz": 12.0, "points": 241},
    ),
    "vacuum_rabi": ExperimentSpec(
        run_vacuum_rabi,
        {
            "qubit": 1,
            "n_modes": 11,
            "g_mhz": 0.18,
            "horizon_tau": 2.0,
            "points": 800,
            # long ladder integrations need the tighter step control to
            # stay inside the positivity guard
            "tol": 1e-9,
        },
    ),
    "saw_response": ExperimentSpec(
        run_saw_response, {"f_lo_ghz": 3.8, "f_hi_ghz": 4.2, "points": 401}
    ),
    "tomo_roundtrip": ExperimentSpec(
        run_tomo_roundtrip, {"n_states": 20, "werner_p": 0.8}
    ),
}


def run_experiment(
    name: str, device: DeviceParams, params: dict, seed: int
) -> ExperimentOutput:
    if name not in EXPERIMENTS:
        raise ValidationError(f"unknown experiment '{name}'")
    return EXPERIMENTS[name].runner(device, params, int(seed))
