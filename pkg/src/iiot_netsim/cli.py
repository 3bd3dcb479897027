"""Command-line interface: JSON run configs in, CSV artifacts out.

Subcommands map one-to-one onto the package's reproduction recipes:
simulate, compare-fading, validate-channel, qos-reliability, rtt, queue.
Every file-writing command drops a manifest.json next to its outputs;
the manifest's config snapshot plus seed reproduces the CSVs byte for
byte.  Exit codes: 0 success, 2 config or usage error, 3 runtime
instability, 4 statistical check failure.  All failures print a single
"error: ..." line to stderr.

Units at this boundary are human-facing (milliseconds, dB); everything
internal is SI.  Seed precedence: --seed, then IIOT_NETSIM_SEED, then
the config file.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__
from .channel_models import (
    AwgnParams,
    RayleighParams,
    RicianParams,
    rayleigh_cdf,
    rayleigh_pdf,
    rician_pdf,
    sample_awgn_batch,
    sample_rayleigh_gain_batch,
    sample_rician_gain_batch,
)
from .errors import (
    ConvergenceError,
    DomainError,
    InstabilityError,
    InvalidConfigError,
    InvalidParameterError,
    ShapeMismatchError,
    StatisticalCheckError,
    UnreachableTargetError,
)
from .qos_state_machine import QoSChainParams, reliability, reliability_monte_carlo
from .queueing_model import QueueParams, erlang_c_probability, mean_wait_in_queue
from .reporting import (
    fading_comparison_table,
    intervals_to_csv,
    rtt_summary_to_csv,
    summarize_rtt,
    windowed_series,
)
from .rng import RngStream
from .rtt_model import HopConfig, compute_rtt
from .sim_engine import FadingSpec, SimulationConfig, compare_fading, run_simulation

SEED_ENV_VAR = "IIOT_NETSIM_SEED"
DEFAULT_SEED = 42
KS_SIGNIFICANCE = 0.01
MOMENT_SE_LIMIT = 5.0
PDF_BINS = 64

HOPS_CSV_HEADER = (
    "distance_m,propagation_speed_mps,packet_length_bits,link_rate_bps,hop_weight,"
    "processing_delay_ms,arrival_rate_pps,service_rate_pps,loss_prob,retx_base_ms"
)
RTT_BREAKDOWN_HEADER = (
    "hop,propagation_ms,transmission_ms,processing_ms,queueing_ms,retransmission_ms,rtt_ms"
)
QUEUE_HEADER = "lambda,mu,c,erlang_c,Wq"
QOS_HEADER = "alpha,beta,gamma,delta,R_closed_form,R_monte_carlo,mc_standard_error,n_runs"
CHANNEL_PDF_HEADER = "r,pdf_analytic,pdf_empirical"

_HOP_KEYS = (
    "distance_m",
    "propagation_speed_mps",
    "packet_length_bits",
    "link_rate_bps",
    "hop_weight",
    "processing_delay_ms",
    "arrival_rate_pps",
    "service_rate_pps",
    "loss_prob",
    "retx_base_ms",
)
_TOP_KEYS_REQUIRED = frozenset({"node_count", "duration_s", "seed", "base_hop"})
_TOP_KEYS_OPTIONAL = frozenset(
    {
        "tick_s",
        "fading",
        "fading_params",
        "noise_n0",
        "qos_level",
        "packets_per_node_per_tick",
        "snr_threshold_db",
        "max_retries_per_leg",
        "rate_jitter",
        "rate_growth_per_tick",
        "report_window_s",
        "comparison",
    }
)
_FADING_PARAM_KEYS = {
    "awgn": (frozenset({"n0"}), frozenset()),
    "rayleigh": (frozenset({"sigma"}), frozenset({"doppler"})),
    "rician": (frozenset({"amplitude", "sigma"}), frozenset({"phase", "doppler"})),
}


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _require_keys(obj: dict, required: frozenset, optional: frozenset, where: str) -> None:
    if not isinstance(obj, dict):
        raise InvalidConfigError(f"{where} must be a JSON object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - required - optional)
    if unknown:
        raise InvalidConfigError(f"unknown key {unknown[0]!r} in {where}")
    missing = sorted(required - set(obj))
    if missing:
        raise InvalidConfigError(f"missing key {missing[0]!r} in {where}")


def _number(obj: dict, key: str, where: str) -> float:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidConfigError(f"{where}.{key} must be a number, got {v!r}")
    return float(v)


def parse_hop(obj: dict) -> HopConfig:
    """Hop description with boundary units (meters, ms, pps) to HopConfig."""
    _require_keys(obj, frozenset(_HOP_KEYS), frozenset(), "base_hop")
    n = {k: _number(obj, k, "base_hop") for k in _HOP_KEYS}
    return HopConfig(
        distance=n["distance_m"],
        propagation_speed=n["propagation_speed_mps"],
        packet_length=n["packet_length_bits"],
        link_rate=n["link_rate_bps"],
        hop_weight=n["hop_weight"],
        processing_delay=n["processing_delay_ms"] * 1e-3,
        arrival_rate=n["arrival_rate_pps"],
        service_rate=n["service_rate_pps"],
        loss_prob=n["loss_prob"],
        retx_base=n["retx_base_ms"] * 1e-3,
    )


def parse_fading_params(kind: str, obj, where: str):
    if kind == "none":
        if obj is not None:
            raise InvalidConfigError(f"{where} must be null when fading is 'none'")
        return None
    if kind not in _FADING_PARAM_KEYS:
        raise InvalidConfigError(f"unknown fading kind {kind!r} in {where}")
    required, optional = _FADING_PARAM_KEYS[kind]
    _require_keys(obj, required, optional, where)
    n = {k: _number(obj, k, where) for k in obj}
    if kind == "awgn":
        return AwgnParams(n0=n["n0"])
    if kind == "rayleigh":
        return RayleighParams(sigma=n["sigma"], doppler=n.get("doppler", 1.0))
    return RicianParams(
        amplitude=n["amplitude"],
        sigma=n["sigma"],
        phase=n.get("phase", 0.0),
        doppler=n.get("doppler", 1.0),
    )


@dataclass(frozen=True)
class ComparePlan:
    kinds: list[FadingSpec]
    sample_times_s: list[float]


def parse_comparison(obj: dict) -> ComparePlan:
    _require_keys(obj, frozenset({"sample_times_s", "kinds"}), frozenset(), "comparison")
    times = obj["sample_times_s"]
    if not isinstance(times, list) or not all(
        isinstance(t, (int, float)) and not isinstance(t, bool) for t in times
    ):
        raise InvalidConfigError("comparison.sample_times_s must be a list of numbers")
    kinds_raw = obj["kinds"]
    if not isinstance(kinds_raw, list) or len(kinds_raw) < 2:
        raise InvalidConfigError("comparison requires at least 2 fading kinds")
    kinds = []
    for i, item in enumerate(kinds_raw):
        where = f"comparison.kinds[{i}]"
        _require_keys(
            item, frozenset({"label", "fading"}), frozenset({"params", "noise_n0"}), where
        )
        label, fading = item["label"], item["fading"]
        if not isinstance(label, str) or not isinstance(fading, str):
            raise InvalidConfigError(f"{where} label and fading must be strings")
        params = parse_fading_params(fading, item.get("params"), f"{where}.params")
        noise = _number(item, "noise_n0", where) if "noise_n0" in item else None
        kinds.append(FadingSpec(label=label, fading=fading, fading_params=params, noise_n0=noise))
    return ComparePlan(kinds=kinds, sample_times_s=[float(t) for t in times])


def load_config_doc(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InvalidConfigError(f"cannot read config {path}: {e.strerror or e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise InvalidConfigError(f"config {path} must hold a JSON object")
    return doc


def build_config(doc: dict, seed_override: int | None = None) -> tuple[
    SimulationConfig, ComparePlan | None, dict
]:
    """Validate a config document; returns (config, compare plan, snapshot).

    The snapshot is the input document with the effective seed substituted,
    so writing it back to disk reproduces this exact run.
    """
    _require_keys(doc, _TOP_KEYS_REQUIRED, _TOP_KEYS_OPTIONAL, "config")
    snapshot = dict(doc)
    if seed_override is not None:
        snapshot["seed"] = seed_override

    kind = snapshot.get("fading", "none")
    if not isinstance(kind, str):
        raise InvalidConfigError(f"config.fading must be a string, got {kind!r}")
    kwargs = {
        "node_count": snapshot["node_count"],
        "duration_s": _number(snapshot, "duration_s", "config"),
        "base_hop": parse_hop(snapshot["base_hop"]),
        "seed": snapshot["seed"],
        "fading": kind,
        "fading_params": parse_fading_params(kind, snapshot.get("fading_params"), "config.fading_params"),
    }
    if not isinstance(kwargs["node_count"], int) or isinstance(kwargs["node_count"], bool):
        raise InvalidConfigError(f"config.node_count must be an integer")
    if not isinstance(kwargs["seed"], int) or isinstance(kwargs["seed"], bool):
        raise InvalidConfigError(f"config.seed must be an integer")
    for key, cast in (
        ("tick_s", float),
        ("noise_n0", float),
        ("qos_level", int),
        ("packets_per_node_per_tick", int),
        ("max_retries_per_leg", int),
        ("rate_growth_per_tick", float),
        ("report_window_s", float),
    ):
        if key in snapshot:
            v = snapshot[key]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidConfigError(f"config.{key} must be a number, got {v!r}")
            if cast is int and v != int(v):
                raise InvalidConfigError(f"config.{key} must be an integer, got {v!r}")
            kwargs[key] = cast(v)
    if "snr_threshold_db" in snapshot:
        v = snapshot["snr_threshold_db"]
        if v is not None:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidConfigError(f"config.snr_threshold_db must be a number or null")
            kwargs["snr_threshold_db"] = float(v)
    if "rate_jitter" in snapshot:
        if not isinstance(snapshot["rate_jitter"], bool):
            raise InvalidConfigError("config.rate_jitter must be a boolean")
        kwargs["rate_jitter"] = snapshot["rate_jitter"]

    plan = parse_comparison(snapshot["comparison"]) if "comparison" in snapshot else None
    return SimulationConfig(**kwargs), plan, snapshot


def resolve_seed(cli_seed: int | None) -> int | None:
    """--seed beats the environment; returns None when neither is set."""
    if cli_seed is not None:
        return cli_seed
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise InvalidConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_manifest(
    out_dir: Path, command: str, seed: int, snapshot: dict, outputs: list[str], wall_s: float
) -> Path:
    manifest = {
        "tool": "iiot-netsim",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config": snapshot,
        "outputs": outputs,
        "wall_clock_s": round(wall_s, 6),
    }
    path = out_dir / "manifest.json"
    _write_atomic(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    doc = load_config_doc(args.config)
    cfg, _plan, snapshot = build_config(doc, seed_override=resolve_seed(args.seed))
    if args.window is not None:
        from dataclasses import replace

        cfg = replace(cfg, report_window_s=args.window)
        snapshot["report_window_s"] = args.window
    out = _out_dir(args)
    result = run_simulation(cfg)
    intervals = windowed_series(
        result.records, cfg.report_window_s, cfg.base_hop.packet_length, span_s=cfg.duration_s
    )
    _write_atomic(out / "intervals.csv", intervals_to_csv(intervals))
    _write_atomic(out / "rtt_summary.csv", rtt_summary_to_csv(summarize_rtt(result.records)))
    write_manifest(
        out,
        "simulate",
        cfg.seed,
        snapshot,
        ["intervals.csv", "rtt_summary.csv"],
        time.perf_counter() - t0,
    )
    s = result.summary
    avg = "" if s.avg_latency_s is None else _fmt(s.avg_latency_s * 1e3)
    print(f"sent={s.sent} delivered={s.delivered} lost={s.lost} avg_latency_ms={avg}")
    return 0


def cmd_compare_fading(args) -> int:
    t0 = time.perf_counter()
    doc = load_config_doc(args.config)
    cfg, plan, snapshot = build_config(doc, seed_override=resolve_seed(args.seed))
    if plan is None:
        raise InvalidConfigError("compare-fading requires a 'comparison' section (>= 2 kinds)")
    out = _out_dir(args)
    comp = compare_fading(cfg, plan.kinds, plan.sample_times_s)
    matrix_ms = (comp.latency_s * 1e3).tolist()
    text, csv = fading_comparison_table(list(comp.sample_times_s), list(comp.kinds), matrix_ms)
    _write_atomic(out / "fading_table.csv", csv)
    write_manifest(
        out, "compare-fading", cfg.seed, snapshot, ["fading_table.csv"], time.perf_counter() - t0
    )
    print(text, end="")
    return 0


def _channel_samples(args, seed: int) -> tuple[np.ndarray, float, str]:
    """Draw envelope samples; returns (magnitudes, analytic sigma, law name)."""
    rng = RngStream(seed).child("validate-channel", args.kind)
    if args.kind == "awgn":
        z = sample_awgn_batch(AwgnParams(n0=args.n0), args.samples, rng)
        # per-quadrature variance must match n0/2; 5 SE band, SE ~ var*sqrt(2/n)
        half = args.n0 / 2.0
        tol = MOMENT_SE_LIMIT * half * math.sqrt(2.0 / args.samples)
        for name, quad in (("real", z.real), ("imag", z.imag)):
            v = float(np.var(quad))
            print(f"check quadrature-variance[{name}]: {v:.6g} expected {half:.6g} +- {tol:.3g}")
            if abs(v - half) > tol:
                raise StatisticalCheckError(
                    f"statistical check failed: {name} quadrature variance {v:.6g} "
                    f"outside {half:.6g} +- {tol:.3g}"
                )
        return np.abs(z), math.sqrt(half), "rayleigh"
    if args.kind == "rayleigh":
        z = sample_rayleigh_gain_batch(RayleighParams(sigma=args.sigma), args.samples, rng)
        return np.abs(z), args.sigma, "rayleigh"
    params = RicianParams(amplitude=args.amplitude, sigma=args.sigma, phase=args.phase)
    z = sample_rician_gain_batch(params, args.samples, rng)
    return np.abs(z), args.sigma, "rician"


def cmd_validate_channel(args) -> int:
    t0 = time.perf_counter()
    if args.samples < 100:
        raise InvalidParameterError(f"--samples must be >= 100, got {args.samples}")
    seed = resolve_seed(args.seed)
    seed = DEFAULT_SEED if seed is None else seed
    mags, sigma, law = _channel_samples(args, seed)
    if args.reference_sigma is not None:
        sigma = args.reference_sigma  # negative control: test against a wrong scale

    if law == "rayleigh":
        cdf = lambda r: rayleigh_cdf(r, sigma)
        pdf = lambda r: rayleigh_pdf(r, sigma)
        mean_analytic = sigma * math.sqrt(math.pi / 2.0)
    else:
        ref = RicianParams(amplitude=args.amplitude, sigma=sigma, phase=args.phase)
        dist = stats.rice(args.amplitude / sigma, scale=sigma)
        cdf = dist.cdf
        pdf = lambda r: rician_pdf(r, ref)
        mean_analytic = float(dist.mean())

    # the CSV is written before the verdict so a failing run leaves evidence
    edges = np.linspace(0.0, float(mags.max()), PDF_BINS + 1)
    hist, _ = np.histogram(mags, bins=edges, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    rows = [CHANNEL_PDF_HEADER]
    rows += [
        f"{_fmt(r)},{_fmt(float(pdf(r)))},{_fmt(h)}" for r, h in zip(centers, hist)
    ]
    out = _out_dir(args)
    _write_atomic(out / "channel_pdf.csv", "\n".join(rows) + "\n")
    params_used = {
        "kind": args.kind,
        "sigma": args.sigma,
        "amplitude": args.amplitude,
        "phase": args.phase,
        "n0": args.n0,
        "samples": args.samples,
        "reference_sigma": args.reference_sigma,
    }
    write_manifest(
        out, "validate-channel", seed, params_used, ["channel_pdf.csv"], time.perf_counter() - t0
    )

    ks = stats.kstest(mags, cdf)
    print(f"check ks[{law}]: statistic={ks.statistic:.6g} p={ks.pvalue:.6g}")
    se = float(np.std(mags, ddof=1)) / math.sqrt(len(mags))
    mean_hat = float(np.mean(mags))
    print(
        f"check mean: {mean_hat:.6g} expected {mean_analytic:.6g} "
        f"+- {MOMENT_SE_LIMIT * se:.3g}"
    )
    extra_ok = True
    if args.kind == "rician" and args.amplitude == 0.0 and args.reference_sigma is None:
        # A=0 degenerates to Rayleigh; check sampler agreement, not just the law
        ray = np.abs(
            sample_rayleigh_gain_batch(
                RayleighParams(sigma=args.sigma),
                args.samples,
                RngStream(seed).child("validate-channel", "degenerate"),
            )
        )
        two = stats.ks_2samp(mags, ray)
        print(f"check ks-two-sample[vs rayleigh]: statistic={two.statistic:.6g} p={two.pvalue:.6g}")
        extra_ok = two.pvalue >= KS_SIGNIFICANCE

    ok = (
        ks.pvalue >= KS_SIGNIFICANCE
        and abs(mean_hat - mean_analytic) <= MOMENT_SE_LIMIT * se
        and extra_ok
    )
    if not ok:
        raise StatisticalCheckError(
            f"statistical check failed: ks p={ks.pvalue:.3g}, "
            f"mean {mean_hat:.6g} vs {mean_analytic:.6g}"
        )
    print("pass")
    return 0


def cmd_qos_reliability(args) -> int:
    params = QoSChainParams(args.alpha, args.beta, args.gamma, args.delta)
    if args.samples < 1:
        raise InvalidParameterError(f"--samples must be >= 1, got {args.samples}")
    seed = resolve_seed(args.seed)
    seed = DEFAULT_SEED if seed is None else seed
    closed = reliability(params)
    mc = reliability_monte_carlo(params, args.samples, RngStream(seed).child("qos-reliability"))
    se = math.sqrt(max(mc * (1.0 - mc), 0.0) / args.samples)
    print(QOS_HEADER)
    print(
        f"{_fmt(args.alpha)},{_fmt(args.beta)},{_fmt(args.gamma)},{_fmt(args.delta)},"
        f"{_fmt(closed)},{_fmt(mc)},{_fmt(se)},{args.samples}"
    )
    return 0


def _parse_hops_csv(path: str) -> list[HopConfig]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise InvalidConfigError(f"cannot read hops file {path}: {e.strerror or e}") from e
    if not lines or lines[0] != HOPS_CSV_HEADER:
        raise InvalidConfigError(f"hops file must start with header {HOPS_CSV_HEADER!r}")
    hops = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(_HOP_KEYS):
            raise InvalidConfigError(f"hops file line {i}: expected {len(_HOP_KEYS)} fields")
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise InvalidConfigError(f"hops file line {i}: non-numeric field") from None
        hops.append(parse_hop(dict(zip(_HOP_KEYS, values))))
    return hops


def cmd_rtt(args) -> int:
    hops = _parse_hops_csv(args.hops)
    breakdown = compute_rtt(hops)
    print(RTT_BREAKDOWN_HEADER)
    sums = [0.0] * 5
    for i, h in enumerate(breakdown.hops, start=1):
        terms = (h.propagation, h.transmission, h.processing, h.queueing, h.retransmission)
        sums = [a + b for a, b in zip(sums, terms)]
        contrib = 2.0 * sum(terms[:4]) + h.retransmission
        cells = ",".join(_fmt(t * 1e3) for t in terms)
        print(f"{i},{cells},{_fmt(contrib * 1e3)}")
    cells = ",".join(_fmt(t * 1e3) for t in sums)
    print(f"total,{cells},{_fmt(breakdown.total * 1e3)}")
    return 0


def cmd_queue(args) -> int:
    params = QueueParams(lam=args.lam, mu=args.mu, servers=args.servers)
    erlang_c = erlang_c_probability(params)
    wq = mean_wait_in_queue(params)
    print(QUEUE_HEADER)
    print(f"{_fmt(args.lam)},{_fmt(args.mu)},{args.servers},{_fmt(erlang_c)},{_fmt(wq)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iiot-netsim",
        description="Deterministic sensor-network simulator and its validation recipes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_seed(p):
        p.add_argument(
            "--seed",
            type=int,
            default=None,
            help=f"seed override (beats ${SEED_ENV_VAR} and the config file)",
        )

    p = sub.add_parser("simulate", help="run the network simulation, write interval/RTT CSVs")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--window", type=float, default=None, help="report window override, seconds")
    add_seed(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare-fading", help="average-latency-so-far table across fading kinds")
    p.add_argument("--config", required=True, help="JSON run configuration with 'comparison'")
    p.add_argument("--out", required=True, help="output directory")
    add_seed(p)
    p.set_defaults(func=cmd_compare_fading)

    p = sub.add_parser("validate-channel", help="statistical checks of one channel sampler")
    p.add_argument("--kind", required=True, choices=("awgn", "rayleigh", "rician"))
    p.add_argument("--sigma", type=float, default=1.0, help="per-quadrature std (fading kinds)")
    p.add_argument("--amplitude", type=float, default=1.0, help="line-of-sight amplitude (rician)")
    p.add_argument("--phase", type=float, default=0.0, help="line-of-sight phase, radians")
    p.add_argument("--n0", type=float, default=1.0, help="noise spectral density (awgn)")
    p.add_argument("--samples", type=int, default=100_000, help="number of draws")
    p.add_argument(
        "--reference-sigma",
        type=float,
        default=None,
        help="test against this (deliberately wrong) scale instead; negative control",
    )
    p.add_argument("--out", required=True, help="output directory")
    add_seed(p)
    p.set_defaults(func=cmd_validate_channel)

    p = sub.add_parser("qos-reliability", help="closed-form vs Monte-Carlo handshake reliability")
    p.add_argument("alpha", type=float)
    p.add_argument("beta", type=float)
    p.add_argument("gamma", type=float)
    p.add_argument("delta", type=float)
    p.add_argument("--samples", type=int, default=200_000, help="Monte-Carlo runs")
    add_seed(p)
    p.set_defaults(func=cmd_qos_reliability)

    p = sub.add_parser("rtt", help="round-trip-time breakdown over a hop list")
    p.add_argument("--hops", required=True, help=f"CSV with header {HOPS_CSV_HEADER}")
    p.set_defaults(func=cmd_rtt)

    p = sub.add_parser("queue", help="Erlang C waiting probability and mean queue wait")
    p.add_argument("--lam", type=float, required=True, help="arrival rate, 1/s")
    p.add_argument("--mu", type=float, required=True, help="per-server service rate, 1/s")
    p.add_argument("--servers", type=int, default=1, help="parallel servers")
    p.set_defaults(func=cmd_queue)

    return parser


_EXIT_BY_ERROR = (
    (StatisticalCheckError, 4),
    ((InstabilityError, ConvergenceError), 3),
    (
        (
            InvalidConfigError,
            InvalidParameterError,
            DomainError,
            ShapeMismatchError,
            UnreachableTargetError,
            OSError,
        ),
        2,
    ),
)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BaseException as e:
        for types, code in _EXIT_BY_ERROR:
            if isinstance(e, types):
                print(f"error: {e}", file=sys.stderr)
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
