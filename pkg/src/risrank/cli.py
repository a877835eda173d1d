"""Command-line front end.

::

    risrank single     --config c.json [--seed S] [--out trace.json]
    risrank sweep-snr  --config c.json [--realizations R] [--out r.csv]
    risrank sweep-n    --config c.json [--format json] [--out r.json]
    risrank sweep-m    --config c.json
    risrank gradcheck  --config c.json

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import numpy as np

from .channel import SystemDims, composite_channel
from .evaluation import (
    SimulationConfig,
    draw_realization,
    records_to_csv,
    records_to_json,
    run_monte_carlo,
)
from .effective_rank import (
    effrank_phase_gradient,
    finite_difference_gradient,
    spectrum,
    weighted_covariance,
)
from .optimizer import OptimizerConfig, alternate
from .precoding import SCHEMES

log = logging.getLogger("risrank")

SCHEMA_VERSION = 1
SUBCOMMANDS = ("single", "sweep-snr", "sweep-n", "sweep-m", "gradcheck")
GRADCHECK_TOL = 1e-4
EIGENGAP_RTOL = 1e-6

DEFAULT_CONFIG = {
    "schema_version": SCHEMA_VERSION,
    "M": 4,
    "K": 3,
    "N": 8,
    "Pt": 10.0,
    "sigma2": 1.0,
    "direct_link": False,
    "schemes": list(SCHEMES),
    "realizations": 1000,
    "seed": 0,
    "ris_mode": "optimized",
    "snr_db_values": [0, 5, 10, 15, 20],
    "n_values": [4, 8, 16, 32],
    "m_values": [2, 4, 6, 8],
    "gradcheck_instances": 50,
    "optimizer": asdict(OptimizerConfig()),
}
_OPT_KEYS = {f.name for f in fields(OptimizerConfig)}


class ConfigError(Exception):
    """Bad configuration file; maps to exit code 2."""


@dataclass
class CliInvocation:
    subcommand: str
    config_path: str
    seed: Optional[int] = None
    realizations: Optional[int] = None
    out: Optional[str] = None
    fmt: Optional[str] = None
    verbosity: int = 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risrank",
        description="Effective-rank RIS phase optimization for multi-user MISO.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="COMMAND")
    helps = {
        "single": "optimize one channel realization and print the trace summary",
        "sweep-snr": "Monte-Carlo sweep over SNR = Pt/sigma2 (dB)",
        "sweep-n": "Monte-Carlo sweep over the number of RIS elements",
        "sweep-m": "Monte-Carlo sweep over the number of BS antennas",
        "gradcheck": "compare the analytic phase gradient with finite differences",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name], description=helps[name])
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--realizations", type=int, help="override the realization count")
        p.add_argument("--out", help="output file (stdout if omitted)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"),
                       help="output format (default: from --out suffix, else csv)")
        p.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def parse_invocation(argv: Optional[Sequence[str]] = None) -> CliInvocation:
    """Parse ``argv``; argparse exits with status 2 on usage errors."""
    ns = build_parser().parse_args(argv)
    if ns.realizations is not None and ns.realizations < 1:
        build_parser().error("--realizations must be >= 1")
    return CliInvocation(
        subcommand=ns.subcommand,
        config_path=ns.config,
        seed=ns.seed,
        realizations=ns.realizations,
        out=ns.out,
        fmt=ns.fmt,
        verbosity=ns.verbose,
    )


# -- configuration --------------------------------------------------------------

def load_config(path: str) -> dict:
    """Read a config file and merge it over :data:`DEFAULT_CONFIG`."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    if "schema_version" not in raw:
        raise ConfigError("missing key 'schema_version'")
    if raw["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"key 'schema_version': unsupported version {raw['schema_version']!r}")
    for key in raw:
        if key not in DEFAULT_CONFIG:
            raise ConfigError(f"unknown key {key!r}")
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    for key, value in raw.items():
        if key == "optimizer":
            if not isinstance(value, dict):
                raise ConfigError("key 'optimizer': expected an object")
            for k in value:
                if k not in _OPT_KEYS:
                    raise ConfigError(f"unknown key 'optimizer.{k}'")
            cfg["optimizer"].update(value)
        else:
            cfg[key] = value
    return cfg


def _typed(cfg: dict, key: str, kind, positive=False):
    v = cfg[key]
    ok = isinstance(v, kind) and not (kind is not bool and isinstance(v, bool))
    if kind is float:
        ok = isinstance(v, (int, float)) and not isinstance(v, bool)
    if not ok:
        raise ConfigError(f"key {key!r}: expected {kind.__name__}, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"key {key!r}: must be positive, got {v!r}")
    return kind(v) if kind is float else v


def simulation_config(cfg: dict, sweep_var: str, inv: CliInvocation) -> SimulationConfig:
    """Validate a merged config dict into a :class:`SimulationConfig`."""
    values_key = {"SNR": "snr_db_values", "N": "n_values", "M": "m_values"}[sweep_var]
    try:
        dims = SystemDims(
            M=_typed(cfg, "M", int, True), K=_typed(cfg, "K", int, True), N=_typed(cfg, "N", int, True)
        )
        values = cfg[values_key]
        if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
        ):
            raise ConfigError(f"key {values_key!r}: expected a list of numbers")
        schemes = cfg["schemes"]
        if not isinstance(schemes, list) or not schemes:
            raise ConfigError("key 'schemes': expected a non-empty list")
        for s in schemes:
            if s not in SCHEMES:
                raise ConfigError(f"key 'schemes': unknown scheme {s!r}")
        try:
            opt = OptimizerConfig(**cfg["optimizer"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"key 'optimizer': {exc}") from None
        realizations = inv.realizations or _typed(cfg, "realizations", int, True)
        seed = inv.seed if inv.seed is not None else _typed(cfg, "seed", int)
        ris_mode = cfg["ris_mode"]
        if ris_mode not in ("optimized", "random", "identity"):
            raise ConfigError(f"key 'ris_mode': unknown mode {ris_mode!r}")
        return SimulationConfig(
            dims=dims,
            Pt=_typed(cfg, "Pt", float, True),
            sigma2=_typed(cfg, "sigma2", float, True),
            schemes=tuple(schemes),
            realizations=realizations,
            master_seed=seed,
            sweep_var=sweep_var,
            sweep_values=tuple(values),
            optimizer=opt,
            ris_mode=ris_mode,
            direct_link=_typed(cfg, "direct_link", bool),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        if values_key in str(exc) or "sweep" in str(exc):
            raise ConfigError(f"key {values_key!r}: {exc}") from None
        raise ConfigError(str(exc)) from None


# -- output ---------------------------------------------------------------------

def write_atomic(path: str, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".risrank-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(inv: CliInvocation, text: str) -> None:
    if inv.out:
        write_atomic(inv.out, text)
        log.info("wrote %s", inv.out)
    else:
        sys.stdout.write(text)


def _format(inv: CliInvocation) -> str:
    if inv.fmt:
        return inv.fmt
    if inv.out and inv.out.lower().endswith(".json"):
        return "json"
    return "csv"


# -- subcommands ----------------------------------------------------------------

def _cmd_sweep(inv: CliInvocation, cfg: dict, sweep_var: str) -> int:
    sim = simulation_config(cfg, sweep_var, inv)
    records = run_monte_carlo(sim)
    text = records_to_json(records) if _format(inv) == "json" else records_to_csv(records)
    _emit(inv, text)
    return 0


def _cmd_single(inv: CliInvocation, cfg: dict) -> int:
    if inv.fmt == "csv":
        raise ConfigError("single writes JSON traces only")
    sim = simulation_config(cfg, "SNR", inv)
    ch, theta0 = draw_realization(sim.dims, sim.master_seed, 0, sim.direct_link)
    traces = []
    for scheme in sim.schemes:
        tr = alternate(ch, scheme, sim.Pt, sim.sigma2, theta0, sim.optimizer)
        traces.append(tr)
        status = "capped" if tr.capped else "converged"
        print(
            f"{scheme:8s} E {tr.initial_effrank:.6f} -> {tr.final_effrank:.6f}  "
            f"C {tr.initial_capacity:.6f} -> {tr.final_capacity:.6f} bits/s/Hz  "
            f"outer {len(tr.records)}  inner {tr.total_inner_steps}  {status}",
        )
    if inv.out:
        doc = {
            "seed": sim.master_seed,
            "dims": asdict(sim.dims),
            "Pt": sim.Pt,
            "sigma2": sim.sigma2,
            "traces": [t.to_dict() for t in traces],
        }
        _emit(inv, json.dumps(doc, indent=2) + "\n")
    return 0


def gradient_check(dims: SystemDims, master_seed: int, instances: int, eps: float = 1e-6) -> dict:
    """Analytic vs central-difference phase gradient on seeded instances.

    Each instance uses realization ``r``'s channel and initial phases and a
    random full-rank input covariance with trace ``M``. Instances whose
    eigengap is below ``1e-6 * lambda_max`` are skipped (eigenvalue
    derivatives need a simple spectrum).
    """
    errors = []
    skipped = 0
    for r in range(instances):
        ch, theta = draw_realization(dims, master_seed, r)
        rng = np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(r, 7)))
        A = rng.standard_normal((dims.M, dims.M)) + 1j * rng.standard_normal((dims.M, dims.M))
        Rx = A @ A.conj().T
        Rx *= dims.M / np.real(np.trace(Rx))
        lam = spectrum(weighted_covariance(composite_channel(ch, theta), Rx)).lam
        if lam.size > 1 and np.min(-np.diff(lam)) <= EIGENGAP_RTOL * lam[0]:
            skipped += 1
            continue
        a = effrank_phase_gradient(ch, theta, Rx)
        f = finite_difference_gradient(ch, theta, Rx, eps)
        scale = np.max(np.abs(f))
        errors.append(float(np.max(np.abs(a - f)) / scale) if scale > 0 else float(np.max(np.abs(a))))
    return {
        "instances": instances,
        "checked": len(errors),
        "skipped": skipped,
        "max_relative_error": max(errors) if errors else 0.0,
        "relative_errors": errors,
    }


def _cmd_gradcheck(inv: CliInvocation, cfg: dict) -> int:
    sim = simulation_config(cfg, "SNR", inv)
    instances = inv.realizations or _typed(cfg, "gradcheck_instances", int, True)
    result = gradient_check(sim.dims, sim.master_seed, instances)
    worst = result["max_relative_error"]
    print(
        f"gradcheck: {result['checked']} instances ({result['skipped']} skipped), "
        f"max relative error {worst:.3e}"
    )
    if inv.out:
        _emit(inv, json.dumps(result, indent=2) + "\n")
    return 0 if worst < GRADCHECK_TOL else 1


def run(inv: CliInvocation) -> int:
    """Execute an invocation and return the process exit code."""
    logging.basicConfig(
        level=logging.WARNING - 10 * min(inv.verbosity, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(inv.config_path)
        if inv.subcommand == "single":
            return _cmd_single(inv, cfg)
        if inv.subcommand == "gradcheck":
            return _cmd_gradcheck(inv, cfg)
        sweep_var = {"sweep-snr": "SNR", "sweep-n": "N", "sweep-m": "M"}[inv.subcommand]
        return _cmd_sweep(inv, cfg, sweep_var)
    except ConfigError as exc:
        print(f"risrank: config error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("risrank: interrupted", file=sys.stderr)
        return 1
    except Exception as exc:  # one-line cause, no traceback
        log.debug("failure", exc_info=True)
        print(f"risrank: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(parse_invocation(argv))


if __name__ == "__main__":
    sys.exit(main())
