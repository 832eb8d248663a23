"""Command-line front end.

Subcommands::

    decompose   factor a unitary (from file or a named scheme) -> JSON report
    compile     build an optical netlist for a scheme or unitary + verify it
    simulate    run a netlist on an input state
    converge    iterate a scheme channel, write the fidelity trace
    filter      iterate with the filtering reset, track losses and gain
    timebin     delay-loop ancilla run -> pulse-train table
    oam         mode-ladder ancilla run -> mode table
    gain        parametric amplifier gain from its parameters
    verify      compare a netlist against a unitary file

Shared flags: ``--config FILE``, ``--out DIR``, ``--seed N``,
``--format csv|json``, ``--no-plot``.  Exit codes: 0 success, 1 input error,
2 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .channels import PureState, fidelity, iterate_channel
from .config import (
    ConfigError,
    ScenarioConfig,
    format_vector,
    parse_config,
    read_efficiency_table,
    read_unitary,
)
from .csdecomp import CSFactors, cs_decompose, reconstruct
from .iteration import (
    FilteredState,
    GainParams,
    filter_step,
    filtered_fidelity_analytic,
    oam_run,
    parametric_gain,
    required_gain,
    timebin_run,
)
from .netlist import NetlistError, format_netlist, parse_netlist
from .optics import (
    NotImplementableError,
    basic_circuit,
    compile_path_pol,
    compile_pol_oam,
    simulate as simulate_circuit,
    target_dep_circuit,
    verify as verify_circuit,
    weak_swap_circuit,
)
from .schemes import Scheme, SchemeKind, SchemeSpec, build_scheme, decay_report


class CommandError(Exception):
    """Input-level failure; maps to exit code 1."""


def _load_config(path: str | None) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise CommandError(f"cannot read config {path!r}: {exc}") from None
    except ConfigError as exc:
        raise CommandError(f"{path}: {exc}") from None


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None) is not None:
        cfg.out = args.out
    if getattr(args, "format", None) is not None:
        cfg.fmt = args.format
    return cfg


def _out_dir(cfg: ScenarioConfig) -> str:
    out = cfg.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _scheme_from_config(cfg: ScenarioConfig) -> Scheme:
    kind = cfg.scheme_kind()
    if kind is SchemeKind.TARGET_DEP:
        target = PureState(np.array([1.0, 1.0]) / math.sqrt(2))
    elif cfg.target is not None:
        target = cfg.target_state()
    elif kind is SchemeKind.WEAK_SWAP:
        target = PureState(np.array([1.0, 0.0]))
    else:
        raise CommandError("scheme 'basic' needs a 'target' key")
    if kind is not SchemeKind.BASIC and cfg.coupling is None:
        raise CommandError(f"scheme {kind.value!r} needs a 'lambda' key")
    spec = SchemeSpec(
        kind=kind,
        target=target,
        coupling=cfg.coupling or 0.0,
        ell=cfg.ell,
        alpha=cfg.alpha,
    )
    return build_scheme(spec)


def _write_text(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def _write_json(path: str, payload) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _matrix_payload(M: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _write_rows(path_base: str, header: list[str], rows: list[tuple], fmt: str) -> str:
    if fmt == "json":
        path = path_base + ".json"
        payload = [dict(zip(header, r)) for r in rows]
        _write_json(path, payload)
    else:
        path = path_base + ".csv"
        lines = [",".join(header)]
        for r in rows:
            lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in r))
        _write_text(path, "\n".join(lines) + "\n")
    return path


def _factors_payload(factors: CSFactors) -> dict:
    U = reconstruct(factors)
    payload = {
        "thetas_rad": [float(t) for t in factors.thetas],
        "left": _matrix_payload(factors.left),
        "lower_left": _matrix_payload(factors.lower_left),
        "right": _matrix_payload(factors.right),
        "unitary": _matrix_payload(U),
    }
    if factors.lower_right is not None:
        payload["lower_right"] = _matrix_payload(factors.lower_right)
    return payload


def _scheme_decay(scheme: Scheme) -> float:
    """Per-iteration decay of 1 - fidelity under the trace-preserving channel."""
    if scheme.kind is SchemeKind.BASIC:
        return 0.0
    return math.cos(scheme.coupling) ** 2


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_decompose(args) -> int:
    cfg = _apply_overrides(_load_config(args.config), args)
    out = _out_dir(cfg)
    if cfg.unitary is not None:
        try:
            U = read_unitary(cfg.unitary)
        except (OSError, ConfigError) as exc:
            raise CommandError(str(exc)) from None
        if U.shape[0] % 2:
            raise CommandError("unitary dimension must be even")
        factors = cs_decompose(U, U.shape[0] // 2)
        source = {"unitary_file": cfg.unitary}
    else:
        scheme = _scheme_from_config(cfg)
        U = scheme.unitary
        factors = scheme.factors
        source = {"scheme": scheme.kind.value, "lambda": scheme.coupling}
    err = float(np.linalg.norm(reconstruct(factors) - U))
    payload = {"source": source, "reconstruction_error": err, **_factors_payload(factors)}
    path = os.path.join(out, "decompose.json")
    _write_json(path, payload)
    print(f"wrote {path} (reconstruction error {err:.3e})")
    return 0


def _compile_circuit(cfg: ScenarioConfig):
    if cfg.unitary is not None:
        try:
            U = read_unitary(cfg.unitary)
        except (OSError, ConfigError) as exc:
            raise CommandError(str(exc)) from None
        if U.shape != (4, 4):
            raise CommandError("netlist compilation expects a 4x4 unitary")
        factors = cs_decompose(U, 2)
        if cfg.platform == "path_pol":
            return compile_path_pol(factors), U
        return compile_pol_oam(factors, cfg.ell), U
    scheme = _scheme_from_config(cfg)
    if cfg.platform == "path_pol":
        return compile_path_pol(scheme.factors), scheme.unitary
    if scheme.kind is SchemeKind.BASIC:
        default = abs(scheme.target.amplitudes[0] - 1.0) < 1e-12
        circuit = basic_circuit(cfg.ell, target=None if default else scheme.target)
    elif scheme.kind is SchemeKind.WEAK_SWAP:
        circuit = weak_swap_circuit(scheme.coupling, cfg.ell)
    else:
        circuit = target_dep_circuit(scheme.coupling, cfg.ell)
    return circuit, scheme.unitary


def cmd_compile(args) -> int:
    cfg = _apply_overrides(_load_config(args.config), args)
    out = _out_dir(cfg)
    try:
        circuit, U = _compile_circuit(cfg)
    except NotImplementableError as exc:
        raise CommandError(str(exc)) from None
    report = verify_circuit(circuit, U, tol=cfg.tol)
    nl_path = os.path.join(out, "circuit.nl")
    _write_text(nl_path, format_netlist(circuit))
    rep_path = os.path.join(out, "compile_report.json")
    _write_json(
        rep_path,
        {
            "netlist": nl_path,
            "elements": len(circuit.elements),
            "distance": report.distance,
            "recovered_phase": report.recovered_phase,
            "tol": report.tol,
            "pass": report.passed,
        },
    )
    print(f"wrote {nl_path} and {rep_path} (distance {report.distance:.3e})")
    return 0 if report.passed else 2


def cmd_simulate(args) -> int:
    cfg = _apply_overrides(_load_config(args.config), args)
    out = _out_dir(cfg)
    if cfg.netlist is None:
        raise CommandError("simulate needs a 'netlist' key")
    if cfg.input is None:
        raise CommandError("simulate needs an 'input' state vector")
    try:
        with open(cfg.netlist) as fh:
            circuit = parse_netlist(fh.read())
    except OSError as exc:
        raise CommandError(f"cannot read netlist: {exc}") from None
    except NetlistError as exc:
        raise CommandError(f"{cfg.netlist}: {exc}") from None
    state = PureState(cfg.input / np.linalg.norm(cfg.input))
    result = simulate_circuit(circuit, state)
    path = os.path.join(out, "simulate.json")
    _write_json(
        path,
        {
            "input": format_vector(state.amplitudes),
            "output": format_vector(result.amplitudes),
            "output_re_im": [[float(z.real), float(z.imag)] for z in result.amplitudes],
        },
    )
    print(f"wrote {path}")
    return 0


def cmd_converge(args) -> int:
    cfg = _apply_overrides(_load_config(args.config), args)
    out = _out_dir(cfg)
    scheme = _scheme_from_config(cfg)
    rho0 = cfg.initial_density()
    trace = iterate_channel(scheme.kraus, rho0, scheme.target, cfg.iterations)
    decay = _scheme_decay(scheme)
    f0 = trace.records[0].fidelity
    rows = []
    for rec in trace.records:
        f_ana = 1.0 - (1.0 - f0) * decay**rec.iteration
        rows.append((rec.iteration, rec.fidelity, f_ana, rec.fidelity - f_ana))
    path = _write_rows(os.path.join(out, "converge"), ["n", "F_sim", "F_analytic", "gap"], rows, cfg.fmt)
    resid = [(r.iteration, 1.0 - r.fidelity) for r in trace.records if 1.0 - r.fidelity > 1e-14]
    measured = float(np.exp(np.polyfit([r[0] for r in resid], [math.log(r[1]) for r in resid], 1)[0])) if len(resid) >= 2 else 0.0
    rep = decay_report(scheme.coupling, cfg.ell, measured)
    summary = {
        "scheme": scheme.kind.value,
        "lambda": scheme.coupling,
        "ell": cfg.ell,
        "alpha": rep.alpha,
        "F0": f0,
        "measured_decay": rep.measured_decay,
        "cos2_lambda_decay": rep.cos2_coupling,
        "printed_law_decay_sin2_alpha_ell": rep.printed_decay_sin2,
        "decay_parameterization_note": (
            "simulated residual decays by cos^2(lambda) = cos^2(2*alpha*ell) per "
            "iteration; the quoted law uses 1 - sin^2(alpha*ell); both listed"
        ),
        "fixpoint_ok": trace.fixpoint.ok,
        "fixpoint_eigenvalues": [format_vector([z]) for z in trace.fixpoint.eigenvalues],
        "span_ok": trace.span_ok,
    }
    sp = os.path.join(out, "converge_summary.json")
    _write_json(sp, summary)
    if not args.no_plot:
        from .plots import convergence_figure

        convergence_figure(rows, os.path.join(out, "converge.png"), decay=decay)
    print(f"wrote {path} and {sp}")
    return 0


def cmd_filter(args) -> int:
    cfg = _apply_overrides(_load_config(args.config), args)
    out = _out_dir(cfg)
    scheme = _scheme_from_config(cfg)
    psi0 = cfg.initial_pure()
    rows = []
    state = FilteredState.from_pure(psi0)
    for k in range(cfg.iterations + 1):
        if k > 0:
            state = filter_step(scheme.kraus, state)
        norm2 = state.norm2
        if norm2 < 1e-28:
            raise CommandError(f"state filtered to zero at iteration {k}")
        f_num = float(abs(np.vdot(scheme.target.amplitudes, state.amplitudes)) ** 2 / norm2)
        f_ana = filtered_fidelity_analytic(
            scheme.kind, scheme.coupling, psi0, scheme.target, k,
            target_perp=scheme.target_perp,
        )
        rows.append((k, f_num, f_ana, norm2, required_gain(max(0.0, 1.0 - norm2))))
    path = _write_rows(
        os.path.join(out, "filter"),
        ["n", "F_numeric", "F_analytic", "norm2", "required_gain"],
        rows,
        cfg.fmt,
    )
    if not args.no_plot:
        from .plots import filter_figure

        filter_figure(rows, os.path.join(out, "filter.png"))
    print(f"wrote {path}")
    return 0


def _ancilla_rows(bins: dict, tau: float, target: PureState) -> list[tuple]:
    rows = []
    for m in sorted(bins):
        v = bins[m]
        n2 = float(np.vdot(v, v).real)
        fid = float(abs(np.vdot(target.amplitudes, v)) ** 2 / n2) if n2 > 1e-28 else 0.0
        rows.append(
            (m, m * tau, float(v[0].real), float(v[0].imag), float(v[1].real),
             float(v[1].imag), n2, fid)
        )
    return rows


_ANCILLA_HEADER = ["bin", "delay", "re0", "im0", "re1", "im1", "norm2", "fidelity"]


def cmd_timebin(args) -> int:
    cfg = _apply_overrides(_load_config(args.config), args)
    out = _out_dir(cfg)
    scheme = _scheme_from_config(cfg)
    psi0 = cfg.initial_pure()
    train = timebin_run(scheme.kraus, psi0, scheme.target, cfg.iterations, cfg.tau)
    rows = _ancilla_rows(train.bins, train.tau, scheme.target)
    path = _write_rows(os.path.join(out, "timebin"), _ANCILLA_HEADER, rows, cfg.fmt)
    rho = train.reduced_density()
    ref = iterate_channel(scheme.kraus, psi0.density(), scheme.target, cfg.iterations)
    summary = {
        "iterations": train.iterations,
        "tau": train.tau,
        "bins": len(train.bins),
        "total_norm2": train.total_norm2(),
        "reduced_state_fidelity": fidelity(rho, scheme.target),
        "channel_equivalence_gap": float(
            np.linalg.norm(rho.matrix - _final_density(scheme, psi0, cfg.iterations))
        ),
    }
    sp = os.path.join(out, "timebin_summary.json")
    _write_json(sp, summary)
    if not args.no_plot:
        from .plots import pulse_train_figure

        pulse_train_figure(rows, os.path.join(out, "timebin.png"), "arrival delay")
    print(f"wrote {path} and {sp}")
    return 0


def _final_density(scheme: Scheme, psi0: PureState, n: int) -> np.ndarray:
    trace_rho = psi0.density()
    from .channels import apply_channel

    for _ in range(n):
        trace_rho = apply_channel(scheme.kraus, trace_rho)
    return trace_rho.matrix


def cmd_oam(args) -> int:
    cfg = _apply_overrides(_load_config(args.config), args)
    out = _out_dir(cfg)
    scheme = _scheme_from_config(cfg)
    psi0 = cfg.initial_pure()
    if cfg.efficiency_table is not None:
        try:
            table = read_efficiency_table(cfg.efficiency_table)
        except (OSError, ConfigError) as exc:
            raise CommandError(str(exc)) from None
    else:
        table = None
    try:
        ladder = oam_run(
            scheme.kraus, psi0, scheme.target, cfg.iterations,
            efficiency_table=table, extend_table=cfg.extend_efficiencies,
        )
    except ValueError as exc:
        raise CommandError(str(exc)) from None
    rows = _ancilla_rows(ladder.modes, 1.0, scheme.target)
    path = _write_rows(os.path.join(out, "oam"), _ANCILLA_HEADER, rows, cfg.fmt)
    rho = ladder.reduced_density()
    summary = {
        "iterations": ladder.iterations,
        "modes": len(ladder.modes),
        "surviving_norm2": ladder.surviving_norm2,
        "reduced_state_fidelity": fidelity(rho, scheme.target),
    }
    if table is None:
        summary["channel_equivalence_gap"] = float(
            np.linalg.norm(rho.matrix - _final_density(scheme, psi0, cfg.iterations))
        )
    sp = os.path.join(out, "oam_summary.json")
    _write_json(sp, summary)
    if not args.no_plot:
        from .plots import pulse_train_figure

        pulse_train_figure(rows, os.path.join(out, "oam.png"), "ancilla mode index")
    print(f"wrote {path} and {sp}")
    return 0


def cmd_gain(args) -> int:
    cfg = _apply_overrides(_load_config(args.config), args)
    out = _out_dir(cfg)
    if cfg.length is None:
        raise CommandError("gain needs a 'length' key (crystal length, m)")
    params = GainParams(
        length=cfg.length,
        delta_k=cfg.delta_k,
        gamma=cfg.gamma,
        d_eff=cfg.d_eff,
        omega1=cfg.omega1,
        omega2=cfg.omega2,
        k1=cfg.k1,
        k2=cfg.k2,
        pump_amplitude=cfg.pump_amplitude,
    )
    try:
        res = parametric_gain(params)
    except ValueError as exc:
        raise CommandError(str(exc)) from None
    payload = {
        "Gamma2": res.gamma2,
        "g_squared": res.g_squared,
        "g": math.sqrt(res.g_squared) if res.g_squared >= 0 else None,
        "G": res.gain,
        "I1_ratio": res.signal_ratio,
        "I2_ratio": res.idler_ratio,
    }
    path = os.path.join(out, "gain.json")
    _write_json(path, payload)
    print(f"wrote {path} (G = {res.gain!r})")
    return 0


def cmd_verify(args) -> int:
    try:
        with open(args.netlist) as fh:
            circuit = parse_netlist(fh.read())
    except OSError as exc:
        raise CommandError(f"cannot read netlist: {exc}") from None
    except NetlistError as exc:
        raise CommandError(f"{args.netlist}: {exc}") from None
    try:
        U = read_unitary(args.unitary)
    except (OSError, ConfigError) as exc:
        raise CommandError(str(exc)) from None
    report = verify_circuit(circuit, U, tol=args.tol)
    print(
        f"{'PASS' if report.passed else 'FAIL'} distance={report.distance!r} "
        f"phase={report.recovered_phase!r} tol={report.tol!r}"
    )
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        _write_json(
            os.path.join(args.out, "verify.json"),
            {
                "distance": report.distance,
                "recovered_phase": report.recovered_phase,
                "tol": report.tol,
                "pass": report.passed,
            },
        )
    return 0 if report.passed else 2


# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value scenario file")
    p.add_argument("--out", help="output directory (default '.')")
    p.add_argument("--seed", type=int, help="seed recorded for reproducibility")
    p.add_argument("--format", choices=["csv", "json"], help="trace file format")
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optfeedback",
        description="Coherent feedback control of optical qubits: "
        "factor, compile, simulate, verify.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "decompose": cmd_decompose,
        "compile": cmd_compile,
        "simulate": cmd_simulate,
        "converge": cmd_converge,
        "filter": cmd_filter,
        "timebin": cmd_timebin,
        "oam": cmd_oam,
        "gain": cmd_gain,
    }
    for name, fn in handlers.items():
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(handler=fn)
    pv = sub.add_parser("verify")
    pv.add_argument("--netlist", required=True)
    pv.add_argument("--unitary", required=True)
    pv.add_argument("--tol", type=float, default=1e-9)
    pv.add_argument("--out")
    pv.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (CommandError, ValueError) as exc:
        # ConfigError/NetlistError are ValueErrors; domain violations from the
        # library (bad couplings, proviso failures, exhausted tables) are too
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
