"""Command-line surface.

Subcommands: simulate-neuron, simulate-synapse, network run, reservoir
train, reservoir eval, calibrate. Exit codes: 0 success, 1 validation
error, 2 runtime or calibration failure. All randomness is seeded through
flags or config files, so repeated runs are bit-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import SimulationConfig, parse_config, serialize_config
from .errors import CalibrationError, ConfigurationError
from .measure import (ANCHOR_TOLERANCES, PAPER_ANCHORS, calibrate,
                      run_synapse, weighted_drive)
from .network import NetworkConfig, TraceSet, build_network, simulate
from .reservoir import RlsState, evaluate, train_force
from .traceio import RunSummary, Stopwatch, write_summary, write_traces


class _Parser(argparse.ArgumentParser):
    """argparse with exit code 1 on usage errors (validation failures)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_config(path) -> SimulationConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise ConfigurationError(
            f"range must look like '15:200', got {text!r}") from None


def cmd_simulate_neuron(args) -> int:
    with Stopwatch() as sw:
        cfg = NetworkConfig(n_neurons=1, seed=args.seed, dt=args.dt)
        net = build_network(cfg)
        ext = None
        if args.input_freq > 0:
            drive = weighted_drive(args.input_freq, args.weight_code,
                                   args.duration, cfg.weight)
            ext = {0: (drive, None)} if args.polarity == "exc" else {0: (None, drive)}
        traces = simulate(net, ext, args.duration)
    n_spikes = len(traces.spikes[0])
    rate = n_spikes / args.duration
    print(f"neuron: {n_spikes} spikes in {args.duration:g} s ({rate:.2f} Hz)")
    if args.trace:
        write_traces(traces, args.trace)
        summary = RunSummary(command="simulate-neuron", seed=args.seed,
                             metrics={"spikes": n_spikes, "rate_hz": rate},
                             wall_clock_s=sw.elapsed)
        write_summary(summary, args.trace)
    return 0


def cmd_simulate_synapse(args) -> int:
    from .synapse import SynapseParams

    with Stopwatch() as sw:
        params = SynapseParams()
        n = int(np.ceil(args.duration * args.spike_rate)) if args.spike_rate > 0 else 0
        spike_times = np.arange(n) / args.spike_rate if n else np.empty(0)
        spike_times = spike_times[spike_times < args.duration]
        edges, trace = run_synapse(params, spike_times, args.duration, args.dt,
                                   record=True)
        rate = len(edges) / args.duration
    print(f"synapse: {len(edges)} rising edges in {args.duration:g} s "
          f"({rate:.2f} Hz)")
    if args.trace:
        times, v_syn, freq = trace
        every = max(1, int(round(1e-4 / args.dt)))
        sel = slice(None, None, every)
        traces = TraceSet(dt=args.dt, duration=args.duration, n_neurons=1,
                          spikes=[edges], sample_times=times[sel],
                          v_mem=np.zeros((len(times[sel]), 1)),
                          v_syn=v_syn[sel, None], freq_hz=freq[sel, None])
        write_traces(traces, args.trace)
        summary = RunSummary(command="simulate-synapse", seed=0,
                             metrics={"edges": len(edges), "rate_hz": rate},
                             wall_clock_s=sw.elapsed)
        write_summary(summary, args.trace)
    return 0


def cmd_network_run(args) -> int:
    cfg = _load_config(args.config)
    net_cfg = cfg.network
    if args.seed is not None:
        net_cfg = replace(net_cfg, seed=args.seed)
    with Stopwatch() as sw:
        net = build_network(net_cfg)
        traces = simulate(net, None, args.duration)
    counts = traces.spike_counts()
    print(f"network: {net_cfg.n_neurons} neurons, {net.n_connections} connections, "
          f"{int(counts.sum())} spikes in {args.duration:g} s")
    if args.out:
        write_traces(traces, args.out)
        summary = RunSummary(command="network run", seed=net_cfg.seed,
                             metrics={"total_spikes": int(counts.sum()),
                                      "mean_rate_hz": counts.mean() / args.duration},
                             config_echo=serialize_config(
                                 replace(cfg, network=net_cfg)),
                             wall_clock_s=sw.elapsed)
        write_summary(summary, args.out)
    return 0


def _autonomous_metrics(traces) -> dict:
    sel = traces.z_times > traces.train_end_time
    if not sel.any():
        return {}
    return evaluate(traces.z[sel], traces.target[sel])


def cmd_reservoir_train(args) -> int:
    cfg = _load_config(args.config)
    train_cfg = cfg.train
    if args.range:
        train_cfg = replace(train_cfg, frequency_range=_parse_range(args.range))
    net_cfg = cfg.network
    if args.seed is not None:
        net_cfg = replace(net_cfg, seed=args.seed)
    with Stopwatch() as sw:
        net = build_network(net_cfg)
        rls, traces = train_force(net, train_cfg, cfg.feedback)
        metrics = _autonomous_metrics(traces)
    lo, hi = train_cfg.frequency_range
    print(f"reservoir train: range {lo:g}-{hi:g} Hz, "
          f"autonomous NRMSE = {metrics.get('nrmse', float('nan')):.4f}")
    out = Path(args.out)
    write_traces(traces, out)
    cfg_echo = serialize_config(
        SimulationConfig(network=net_cfg, train=train_cfg, feedback=cfg.feedback))
    weights = {
        "w": [float(x) for x in rls.w],
        "config": cfg_echo,
        "seed": net_cfg.seed,
    }
    try:
        with open(out / "weights.json", "w") as fh:
            json.dump(weights, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write weights file: {exc}") from exc
    summary = RunSummary(command="reservoir train", seed=net_cfg.seed,
                         metrics=metrics, config_echo=cfg_echo,
                         wall_clock_s=sw.elapsed)
    write_summary(summary, out)
    return 0


def cmd_reservoir_eval(args) -> int:
    try:
        payload = json.loads(Path(args.weights).read_text())
        w = np.asarray(payload["w"], dtype=float)
        cfg = parse_config(payload["config"])
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot load weights {args.weights}: {exc}") from exc
    if len(w) != cfg.network.n_neurons:
        raise ConfigurationError(
            f"weights length {len(w)} does not match n_neurons "
            f"{cfg.network.n_neurons}")
    train_cfg = replace(cfg.train, train_periods=0,
                        eval_periods=args.periods)
    with Stopwatch() as sw:
        net = build_network(cfg.network)
        init = RlsState.initial(cfg.network.n_neurons, cfg.train.rls_init_alpha)
        init.w = w
        rls, traces = train_force(net, train_cfg, cfg.feedback, init_rls=init)
        metrics = evaluate(traces.z, traces.target)
    print(f"reservoir eval: NRMSE = {metrics['nrmse']:.4f} over "
          f"{args.periods} periods")
    if args.out:
        write_traces(traces, args.out)
        summary = RunSummary(command="reservoir eval", seed=cfg.network.seed,
                             metrics=metrics, config_echo=payload["config"],
                             wall_clock_s=sw.elapsed)
        write_summary(summary, args.out)
    return 0


def _load_anchors(spec: str) -> dict:
    if spec == "paper":
        return dict(PAPER_ANCHORS)
    from .config import parse_sections

    try:
        text = Path(spec).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read anchors file {spec}: {exc}") from exc
    sections = parse_sections(text)
    if set(sections) != {"anchors"}:
        raise ConfigurationError("anchors file must contain one [anchors] section")
    anchors = sections["anchors"]
    unknown = set(anchors) - set(PAPER_ANCHORS)
    if unknown:
        raise ConfigurationError(f"unknown anchor(s): {', '.join(sorted(unknown))}")
    return {k: float(v) for k, v in anchors.items()}


def cmd_calibrate(args) -> int:
    anchors = _load_anchors(args.targets)
    with Stopwatch() as sw:
        result = calibrate(anchors)
    for key in sorted(result.achieved):
        print(f"{key}: achieved {result.achieved[key]:.2f} Hz "
              f"(target {anchors[key]:g}, residual {100 * result.residuals[key]:+.1f}%, "
              f"tolerance +-{100 * ANCHOR_TOLERANCES[key]:.0f}%)")
    print(f"calibration done in {sw.elapsed:.1f} s")
    if args.out:
        lines = ["# fitted parameters", "[neuron]"]
        from dataclasses import fields

        for f in fields(result.neuron):
            lines.append(f"{f.name} = {getattr(result.neuron, f.name)!r}")
        lines.append("")
        lines.append("[synapse]")
        for f in fields(result.synapse):
            lines.append(f"{f.name} = {getattr(result.synapse, f.name)!r}")
        lines.append("")
        for key in sorted(result.residuals):
            lines.append(f"# residual {key}: {100 * result.residuals[key]:+.2f}%")
        Path(args.out).write_text("\n".join(lines) + "\n")
        print(f"wrote {args.out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="tdsnn",
                     description="Time-domain spiking network simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-neuron", help="single neuron under pulse drive")
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--input-freq", type=float, default=0.0,
                   help="source square-wave frequency in Hz (0 = free run)")
    p.add_argument("--weight-code", type=int, default=12)
    p.add_argument("--polarity", choices=("exc", "inh"), default="exc")
    p.add_argument("--dt", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", metavar="DIR", default=None)
    p.set_defaults(func=cmd_simulate_neuron)

    p = sub.add_parser("simulate-synapse",
                       help="single synapse under a constant spike rate")
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--spike-rate", type=float, default=200.0)
    p.add_argument("--dt", type=float, default=1e-5)
    p.add_argument("--trace", metavar="DIR", default=None)
    p.set_defaults(func=cmd_simulate_synapse)

    p_net = sub.add_parser("network", help="network-level commands")
    net_sub = p_net.add_subparsers(dest="subcommand", required=True)
    p = net_sub.add_parser("run", help="simulate a configured network")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--out", metavar="DIR", default=None)
    p.set_defaults(func=cmd_network_run)

    p_res = sub.add_parser("reservoir", help="reservoir-computing commands")
    res_sub = p_res.add_subparsers(dest="subcommand", required=True)
    p = res_sub.add_parser("train", help="train the readout online")
    p.add_argument("--config", required=True)
    p.add_argument("--range", default=None, help="synapse range, e.g. 15:200")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", metavar="DIR", required=True)
    p.set_defaults(func=cmd_reservoir_train)
    p = res_sub.add_parser("eval", help="run autonomously with fixed weights")
    p.add_argument("--weights", required=True, metavar="FILE")
    p.add_argument("--periods", type=int, default=2)
    p.add_argument("--out", metavar="DIR", default=None)
    p.set_defaults(func=cmd_reservoir_eval)

    p = sub.add_parser("calibrate", help="fit parameters to anchor frequencies")
    p.add_argument("--targets", default="paper",
                   help="'paper' or a file with an [anchors] section")
    p.add_argument("--out", metavar="FILE", default=None)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return 2
    except (ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, OSError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
