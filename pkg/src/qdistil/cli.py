"""Experiment harness: deterministic CSV sweeps over noise parameters.

Subcommands::

    qdistil one-round  --noise photon-loss --eps 0.4 --sweep g:0.001:1:50:log \
                       --protocols dejmps,horodecki,lomm,zinf --out fig.csv
    qdistil yield      --noise photon-loss --g 0.01 --sweep eps:0.1:0.9:9:lin \
                       --target 0.99 --out yields.csv
    qdistil pump       --noise photon-loss --eps 0.4 --g 0 --pump-rounds 8 --out pump.csv

Options may also come from a config file of ``key = value`` lines
(``--config``); explicit flags override file values.  Output is CSV with
a header, 12-significant-digit decimals, and a final ``error`` column;
rows appear in grid-by-protocol order, so reruns are byte-identical.

Exit codes: 0 success, 2 configuration error, 3 internal numerical failure.
"""
import argparse
import csv
import io
import sys

import numpy as np

from . import filtering, noise, protocols, pumping, scheduling
from .errors import QDistilError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_FAMILY_PARAMS = {
    "photon-loss": ("eps", "g"),
    "amp-damp": ("gamma", "theta"),
    "bell-diagonal": ("fid",),
}
_PARAM_DOMAIN = {
    "eps": (0.0, 1.0),
    "g": (0.0, 1.0),
    "gamma": (0.0, 1.0),
    "theta": (0.0, float(np.pi / 4)),
    "fid": (0.25, 1.0),
}


class ConfigError(Exception):
    pass


def _parse_sweep(text):
    parts = text.split(":")
    if len(parts) != 5:
        raise ConfigError(f"sweep must be param:min:max:steps:lin|log, got {text!r}")
    name, lo, hi, steps, kind = parts
    try:
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError as exc:
        raise ConfigError(f"bad sweep bounds in {text!r}: {exc}") from None
    if steps < 1:
        raise ConfigError("sweep steps must be >= 1")
    if kind not in ("lin", "log"):
        raise ConfigError(f"sweep kind must be lin or log, got {kind!r}")
    if kind == "log":
        if lo <= 0 or hi <= 0:
            raise ConfigError("log sweep requires positive bounds")
        values = np.geomspace(lo, hi, steps)
    else:
        values = np.linspace(lo, hi, steps)
    return name, values


def _read_config(path):
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, _, val = line.partition("=")
                values[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    return values


def _build_parser():
    parser = argparse.ArgumentParser(prog="qdistil", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("one-round", "yield", "pump"):
        p = sub.add_parser(mode)
        p.add_argument("--noise", choices=sorted(_FAMILY_PARAMS))
        p.add_argument("--eps", type=float)
        p.add_argument("--g", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--theta", type=float)
        p.add_argument("--fid", type=float)
        p.add_argument("--sweep", help="param:min:max:steps:lin|log")
        p.add_argument("--protocols", help="comma list from dejmps,horodecki,lomm,zinf")
        p.add_argument("--target", type=float, help="yield mode target fidelity")
        p.add_argument("--max-rounds", type=int, dest="max_rounds")
        p.add_argument("--pump-rounds", type=int, dest="pump_rounds")
        p.add_argument("--objective", choices=[filtering.MAX_PALL, filtering.MAX_FIDELITY])
        p.add_argument("--out", help="output CSV path ('-' for stdout)")
        p.add_argument("--config", help="key = value config file; flags override")
        p.add_argument("--mc", type=int, help="one-round only: sampled sanity check size")
        p.add_argument("--seed", type=int, help="seed for --mc")
    return parser


_DEFAULTS = {
    "protocols": "dejmps,horodecki,lomm,zinf",
    "target": 0.99,
    "max_rounds": scheduling.DEFAULT_MAX_ROUNDS,
    "pump_rounds": 8,
    "objective": filtering.MAX_PALL,
    "out": "-",
}
_FLOAT_KEYS = ("eps", "g", "gamma", "theta", "fid", "target")
_INT_KEYS = ("max_rounds", "pump_rounds", "mc", "seed")


def _merge_config(args):
    cfg = dict(_DEFAULTS)
    if args.config:
        for key, raw in _read_config(args.config).items():
            if key in _FLOAT_KEYS:
                try:
                    cfg[key] = float(raw)
                except ValueError:
                    raise ConfigError(f"config key {key} expects a number, got {raw!r}") from None
            elif key in _INT_KEYS:
                try:
                    cfg[key] = int(raw)
                except ValueError:
                    raise ConfigError(f"config key {key} expects an integer, got {raw!r}") from None
            else:
                cfg[key] = raw
    for key, val in vars(args).items():
        if key in ("mode", "config"):
            continue
        if val is not None:
            cfg[key] = val
    return cfg


def _resolve_grid(cfg):
    family = cfg.get("noise")
    if family not in _FAMILY_PARAMS:
        raise ConfigError(f"--noise must be one of {sorted(_FAMILY_PARAMS)}, got {family!r}")
    needed = _FAMILY_PARAMS[family]
    sweep = cfg.get("sweep")
    if sweep:
        name, values = _parse_sweep(sweep) if isinstance(sweep, str) else sweep
        if name not in needed:
            raise ConfigError(f"sweep parameter {name!r} not in family {family!r} ({needed})")
        lo, hi = _PARAM_DOMAIN[name]
        if values.min() < lo - 1e-12 or values.max() > hi + 1e-12:
            raise ConfigError(f"sweep range for {name} must lie in [{lo:g}, {hi:g}]")
    else:
        name, values = None, [None]
    fixed = {}
    for p in needed:
        if p == name:
            continue
        if cfg.get(p) is None:
            raise ConfigError(f"family {family!r} needs --{p}")
        lo, hi = _PARAM_DOMAIN[p]
        if not lo - 1e-12 <= cfg[p] <= hi + 1e-12:
            raise ConfigError(f"--{p} must lie in [{lo:g}, {hi:g}]")
        fixed[p] = cfg[p]
    return family, fixed, name, values


def _parse_protocols(cfg):
    names = [p.strip() for p in str(cfg["protocols"]).split(",") if p.strip()]
    for p in names:
        if p not in protocols.PROTOCOL_NAMES:
            raise ConfigError(f"unknown protocol {p!r}")
    if not names:
        raise ConfigError("empty protocol list")
    return names


def _fmt(x):
    if x is None or x == "":
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def _one_round_rows(cfg):
    family, fixed, pname, values = _resolve_grid(cfg)
    names = _parse_protocols(cfg)
    rows = []
    for value in values:
        params = dict(fixed)
        if pname is not None:
            params[pname] = float(value)
        for proto in names:
            row = {"param": value, "protocol": proto, "F_prime": None,
                   "P_filter": None, "P_distil": None, "P_all": None, "error": ""}
            try:
                state = noise.make_state(family, **params)
                out = protocols.protocol_round(proto, state, cfg["objective"])
                row.update(
                    F_prime=out.output_fidelity,
                    P_filter=out.filter_prob,
                    P_distil=out.distil_prob,
                    P_all=out.overall_prob,
                )
            except (QDistilError, ValueError) as exc:
                row["error"] = f"{type(exc).__name__}: {exc}"
            rows.append(row)
    header = ["param", "protocol", "F_prime", "P_filter", "P_distil", "P_all", "error"]
    return header, rows


def _yield_rows(cfg):
    family, fixed, pname, values = _resolve_grid(cfg)
    names = _parse_protocols(cfg)
    if pname is None:
        pname, values = "point", [0.0]
        sweep_rows = scheduling.yield_sweep(
            family, fixed, next(iter(_FAMILY_PARAMS[family])), [fixed[next(iter(_FAMILY_PARAMS[family]))]],
            names, cfg["target"], cfg["max_rounds"])
        for row, value in zip(sweep_rows, [v for v in values for _ in names]):
            row["param"] = value
    else:
        sweep_rows = scheduling.yield_sweep(
            family, fixed, pname, [float(v) for v in values],
            names, cfg["target"], cfg["max_rounds"])
    header = ["param", "protocol", "rounds", "yield", "final_fidelity", "error"]
    return header, sweep_rows


def _pump_rows(cfg):
    family, fixed, pname, values = _resolve_grid(cfg)
    if pname is not None:
        raise ConfigError("pump mode takes fixed noise parameters, not a sweep")
    rows = []
    header = ["n", "fidelity_closed_form", "fidelity_oracle", "success_prob", "error"]
    try:
        state = noise.make_state(family, **fixed)
        params = filtering.optimize_zinf_filter(state, cfg["objective"])
        filt, _, _ = filtering.zinf_filter(state, params)
        ch = pumping.pump_channel_from_state(state, cfg["objective"])
    except (QDistilError, ValueError) as exc:
        return header, [{"n": 1, "fidelity_closed_form": None, "fidelity_oracle": None,
                         "success_prob": None, "error": f"{type(exc).__name__}: {exc}"}]
    for n in range(1, int(cfg["pump_rounds"]) + 1):
        row = {"n": n, "fidelity_closed_form": None, "fidelity_oracle": None,
               "success_prob": None, "error": ""}
        try:
            row["fidelity_closed_form"] = pumping.jamiolkowski_fidelity(ch, n)
            _, row["success_prob"] = pumping.apply_pump(pumping.PLUS_PLUS, ch, n)
            if n <= 4:
                row["fidelity_oracle"] = _oracle_choi_fidelity(state, filt, n)
        except (QDistilError, ValueError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return header, rows


def _oracle_choi_fidelity(base_state, filt, n):
    """Jamiolkowski fidelity of the explicit 2n-round gate pipeline."""
    basis = []
    for i in range(4):
        for j in range(4):
            e = np.zeros((4, 4), dtype=complex)
            e[i, j] = 1.0
            basis.append((i, j, e))
    choi = np.zeros((16, 16), dtype=complex)
    for i, j, e in basis:
        out = e
        for _ in range(2 * n):
            out = pumping.m_operation(out, base_state, filt)
        choi += np.kron(out, np.outer(np.eye(4)[i], np.eye(4)[j])) / 4
    choi /= choi.trace().real
    omega = np.zeros(16, dtype=complex)
    for i in range(4):
        omega[i * 4 + i] = 0.5
    ref = np.kron(pumping.P_PLUS, np.eye(4)) @ omega
    ref /= np.linalg.norm(ref)
    return float((ref.conj() @ choi @ ref).real)


def _mc_check(cfg, rows, stream):
    """Seeded sampling sanity check of the first row's distillation
    probability (demo only; never touches the CSV)."""
    if cfg.get("mc") is None:
        return
    if cfg.get("seed") is None:
        raise ConfigError("--mc requires --seed")
    first = next((r for r in rows if not r["error"] and r.get("P_distil") is not None), None)
    if first is None:
        return
    rng = np.random.default_rng(int(cfg["seed"]))
    hits = int(rng.random(int(cfg["mc"])).__le__(first["P_distil"]).sum())
    print(
        f"mc-check: {hits}/{cfg['mc']} successes ~ {hits / int(cfg['mc']):.4f} "
        f"vs analytic P_distil {first['P_distil']:.4f}",
        file=stream,
    )


def _write_csv(header, rows, out_path):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row.get(col)) for col in header])
    data = buf.getvalue()
    if out_path == "-":
        sys.stdout.write(data)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        if args.mode == "one-round":
            header, rows = _one_round_rows(cfg)
            _mc_check(cfg, rows, sys.stderr)
        elif args.mode == "yield":
            header, rows = _yield_rows(cfg)
        else:
            header, rows = _pump_rows(cfg)
        _write_csv(header, rows, cfg["out"])
    except ConfigError as exc:
        print(f"qdistil: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QDistilError, np.linalg.LinAlgError) as exc:
        print(f"qdistil: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
