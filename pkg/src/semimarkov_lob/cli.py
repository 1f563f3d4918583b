"""Command-line front end.

Exit codes: 0 success, 1 data or validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .chain import StateModel, build_state_model
from .contlarrad import empirical_up_frequency, up_prob_grid
from .diffusion import estimate_diffusion
from .errors import DataError
from .events import (
    classify_balance,
    estimate_intensities,
    extract_price_changes,
    interarrival_fit,
    queue_event_chain,
    spread_statistics,
    write_spread_csv,
)
from .ingest import SessionConfig, Side, midprice_series, read_lobster, trim_session
from .simulate import SojournSpec, clt_check, simulate_path, write_synthetic_lobster
from .stats import linear_fit_adjr2, realized_std

REPORT_COLUMNS = [
    "symbol", "n_states", "p_cont", "p_cont_prime", "a", "sigma2", "tau_star", "m_tau",
    "coeff_balanced", "coeff_unbalanced", "balance", "realized_std", "n_changes",
]


@dataclass
class RunConfig:
    message: list[str] = field(default_factory=list)
    orderbook: list[str] = field(default_factory=list)
    symbol: list[str] = field(default_factory=list)
    tick_size: float = 0.01
    trim_minutes: float = 15.0
    session_open: float = 34_200.0
    session_close: float = 57_600.0
    n_states: int = 2
    binning: str = "quantile"
    one_tick_filter: bool = True
    include_hidden: bool = True
    balance_eps: float = 0.05
    out: str = "out"
    seed: int = 0
    workers: int = 1

    def validate(self):
        if self.n_states < 2:
            raise DataError("n_states must be at least 2")
        if len(self.message) != len(self.orderbook):
            raise DataError("need one --orderbook per --message")
        for p in [*self.message, *self.orderbook]:
            if not os.path.exists(p):
                raise FileNotFoundError(2, "No such file", p)

    def session(self) -> SessionConfig:
        return SessionConfig.from_minutes(self.trim_minutes, session_open=self.session_open,
                                          session_close=self.session_close, tick_size=self.tick_size)


def _load_config(path) -> dict:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"config line {line!r} is not key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            data[k] = v
    if not isinstance(data, dict):
        raise DataError("config must be a mapping")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _coerce(value, like):
    if isinstance(like, bool):
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    if isinstance(like, list):
        return list(value) if isinstance(value, (list, tuple)) else [v.strip() for v in str(value).split(",")]
    if isinstance(like, (int, float)) and not isinstance(value, (int, float)):
        return type(like)(value)
    return value


def apply_config(args: argparse.Namespace) -> argparse.Namespace:
    """Values from ``--config`` override the command-line flags."""
    if getattr(args, "config", None):
        for k, v in _load_config(args.config).items():
            if not hasattr(args, k):
                raise DataError(f"unknown config key {k!r}")
            setattr(args, k, _coerce(v, getattr(args, k)))
    return args


def _resolved(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config")}


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return x


def _symbol_from_path(path: str) -> str:
    stem = Path(path).name
    parts = stem.split("_")
    return "_".join(parts[:2]) if len(parts) >= 2 else Path(path).stem


def _load_day(cfg: RunConfig, msg: str, ob: str):
    session = cfg.session()
    events, quotes = read_lobster(msg, ob, tick_size=cfg.tick_size, include_hidden=cfg.include_hidden)
    lo, hi = session.window
    keep = [i for i, e in enumerate(events) if lo <= e.time <= hi]
    events = [events[i] for i in keep]
    quotes = [quotes[i] for i in keep]
    return session, events, quotes


def estimate_one(cfg: RunConfig, msg: str, ob: str, symbol: str) -> dict:
    session, events, quotes = _load_day(cfg, msg, ob)
    mids = midprice_series(quotes)
    pcs = extract_price_changes(mids, cfg.tick_size)
    model, states, _ = build_state_model(pcs.jumps, pcs.sojourns, cfg.n_states, cfg.binning)
    est = estimate_diffusion(model, pcs.sojourns)
    try:
        balance = classify_balance(queue_event_chain(events, Side.ASK, quotes),
                                   queue_event_chain(events, Side.BID, quotes),
                                   cfg.balance_eps).value
    except DataError:
        balance = "unknown"
    try:
        rstd = realized_std(mids.times, mids.in_price_units(cfg.tick_size), 600.0,
                            start=max(session.window[0], float(mids.times[0])))
    except DataError:
        rstd = None
    out = Path(cfg.out) / symbol
    out.mkdir(parents=True, exist_ok=True)
    model.to_json(out / "model.json")
    pcs.to_csv(out / "price_changes.csv")
    write_spread_csv(out / "spread.csv", spread_statistics(quotes))
    two = model.n == 2
    row = {
        "symbol": symbol,
        "n_states": model.n,
        "p_cont": float(model.P[0, 0]) if two else None,
        "p_cont_prime": float(model.P[1, 1]) if two else None,
        "a": json.dumps(model.a.tolist()),
        "sigma2": est.sigma2,
        "tau_star": est.tau_star,
        "m_tau": est.m_tau,
        "coeff_balanced": est.coeff_balanced,
        "coeff_unbalanced": est.coeff_unbalanced,
        "balance": balance,
        "realized_std": rstd,
        "n_changes": len(pcs),
    }
    with open(out / "report.json", "w") as fh:
        json.dump({"config": asdict(cfg), "row": row, "model": model.to_dict(),
                   "diffusion": est.to_dict()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return row


def _estimate_job(job):
    cfg, msg, ob, sym = job
    return estimate_one(cfg, msg, ob, sym)


def _config_from_args(args) -> RunConfig:
    names = RunConfig.__dataclass_fields__
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in names})
    cfg.validate()
    return cfg


def cmd_estimate(args) -> int:
    cfg = _config_from_args(args)
    symbols = list(cfg.symbol) or [_symbol_from_path(m) for m in cfg.message]
    if len(symbols) != len(cfg.message):
        raise DataError("need one --symbol per --message")
    jobs = [(cfg, m, o, s) for m, o, s in zip(cfg.message, cfg.orderbook, symbols)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(_estimate_job, jobs))
    else:
        rows = [_estimate_job(j) for j in jobs]
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    with open(Path(cfg.out) / "report.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in REPORT_COLUMNS])
    for row in rows:
        print(json.dumps({k: row[k] for k in ("symbol", "sigma2", "coeff_balanced",
                                              "coeff_unbalanced", "balance")}))
    return 0


def cmd_events(args) -> int:
    cfg = _config_from_args(args)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for msg, ob in zip(cfg.message, cfg.orderbook):
        _, events, quotes = _load_day(cfg, msg, ob)
        pcs = extract_price_changes(midprice_series(quotes), cfg.tick_size)
        stats = spread_statistics(quotes)
        summary = {"n_events": len(events), "n_changes": len(pcs),
                   "avg_spread_ticks": stats.avg_spread,
                   "spread_fractions": {str(k): v for k, v in stats.fraction_at_k_ticks.items()}}
        for side in (Side.ASK, Side.BID):
            name = side.name.lower()
            try:
                ch = queue_event_chain(events, side, quotes)
                summary[f"{name}_p11"] = ch.p11
                summary[f"{name}_pm1m1"] = ch.p_minus1_minus1
            except DataError as exc:
                summary[f"{name}_chain_error"] = str(exc)
            try:
                fit = interarrival_fit(events, side)
                summary[f"{name}_exp_rate"] = fit.rate
                summary[f"{name}_ks"] = fit.ks
            except DataError as exc:
                summary[f"{name}_interarrival_error"] = str(exc)
        try:
            inten = estimate_intensities(events, quotes, cfg.one_tick_filter)
            summary["lambda_hat"] = inten.lambda_hat
            summary["mu_plus_theta_hat"] = inten.mu_plus_theta_hat
        except DataError as exc:
            summary["intensity_error"] = str(exc)
        if args.export:
            sym = _symbol_from_path(msg)
            pcs.to_csv(out / f"{sym}_price_changes.csv")
            write_spread_csv(out / f"{sym}_spread.csv", stats)
            with open(out / f"{sym}_events.json", "w") as fh:
                json.dump({"config": asdict(cfg), "summary": summary}, fh, indent=2, sort_keys=True)
                fh.write("\n")
        print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_simulate(args) -> int:
    if not os.path.exists(args.model):
        raise FileNotFoundError(2, "No such file", args.model)
    model = StateModel.from_json(args.model)
    soj = SojournSpec.parse(args.sojourn)
    report = clt_check(model, soj, args.paths, args.jumps, args.t, args.seed, args.scaling)
    payload = {"config": _resolved(args), "report": report.to_dict()}
    if args.lobster_out:
        path = simulate_path(model, soj, args.lobster_jumps, args.seed)
        cfg = SessionConfig(tick_size=args.tick_size)
        n = write_synthetic_lobster(f"{args.lobster_out}_message_1.csv",
                                    f"{args.lobster_out}_orderbook_1.csv", path, cfg, seed=args.seed)
        payload["lobster_jumps_written"] = n
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(json.dumps(payload["report"], sort_keys=True))
    return 0


def _read_rows(paths):
    rows = []
    for p in paths:
        with open(p, newline="") as fh:
            rows.extend(csv.DictReader(fh))
    return rows


def regression_summary(rows) -> dict:
    usable = [r for r in rows if r.get("realized_std") not in (None, "")]
    if len(usable) < 3:
        raise DataError(f"need at least 3 rows with realized_std, got {len(usable)}")
    y = np.array([float(r["realized_std"]) for r in usable])
    out = {"n_rows": len(usable)}
    for key in ("coeff_balanced", "coeff_unbalanced"):
        x = np.array([float(r[key]) for r in usable])
        out[key] = {
            "with_intercept": linear_fit_adjr2(x, y, True).to_dict(),
            "through_origin": linear_fit_adjr2(x, y, False).to_dict(),
        }
    return out


def cmd_report(args) -> int:
    rows = _read_rows(args.inputs)
    summary = regression_summary(rows)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "regression.json", "w") as fh:
        json.dump({"config": _resolved(args), "summary": summary}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "scatter.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["symbol", "coeff_balanced", "coeff_unbalanced", "realized_std"])
        for r in rows:
            w.writerow([r.get("symbol", ""), r["coeff_balanced"], r["coeff_unbalanced"], r.get("realized_std", "")])
    print(json.dumps({k: v["with_intercept"]["adj_r2"] for k, v in summary.items() if k != "n_rows"},
                     sort_keys=True))
    return 0


def cmd_probup(args) -> int:
    grid = up_prob_grid(args.max_n, args.max_p)
    if args.message:
        cfg = _config_from_args(args)
        _, _, quotes = _load_day(cfg, cfg.message[0], cfg.orderbook[0])
        pcs = extract_price_changes(midprice_series(quotes), cfg.tick_size)
        emp = empirical_up_frequency(quotes, pcs, lot=args.lot, cap=max(args.max_n, args.max_p) + 1)
        grid.empirical_up, grid.empirical_total = emp.up, emp.total
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    grid.to_csv(args.out)
    print(args.out)
    return 0


def _add_data_flags(p, required=True):
    p.add_argument("--message", action="append", default=[], required=required, help="LOBSTER message file (repeatable)")
    p.add_argument("--orderbook", action="append", default=[], required=required, help="LOBSTER orderbook file (repeatable)")
    p.add_argument("--symbol", action="append", default=[])
    p.add_argument("--tick-size", type=float, default=0.01)
    p.add_argument("--trim-minutes", type=float, default=15.0)
    p.add_argument("--session-open", type=float, default=34_200.0)
    p.add_argument("--session-close", type=float, default=57_600.0)
    p.add_argument("--no-hidden", dest="include_hidden", action="store_false",
                   help="drop hidden executions")
    p.add_argument("--out", default="out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semimarkov-lob", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate the semi-Markov model and diffusion coefficients")
    _add_data_flags(p)
    p.add_argument("--states", dest="n_states", type=int, default=2)
    p.add_argument("--binning", choices=["quantile", "distinct"], default="quantile")
    p.add_argument("--balance-eps", type=float, default=0.05)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("events", help="derive price changes, queue chains and spread statistics")
    _add_data_flags(p)
    p.add_argument("--export", action="store_true", help="write CSV/JSON exports to --out")
    p.add_argument("--no-one-tick-filter", dest="one_tick_filter", action="store_false",
                   help="estimate intensities over all book states, not only one-tick spreads")
    p.add_argument("--config")
    p.set_defaults(func=cmd_events)

    p = sub.add_parser("simulate", help="Monte Carlo check of the diffusion limit")
    p.add_argument("--model", required=True)
    p.add_argument("--sojourn", default="exp:1.0")
    p.add_argument("--paths", type=int, default=200)
    p.add_argument("--jumps", type=int, default=100_000)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--scaling", choices=["balanced", "unbalanced"])
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out")
    p.add_argument("--lobster-out", help="also write a synthetic LOBSTER pair with this prefix")
    p.add_argument("--lobster-jumps", type=int, default=20_000)
    p.add_argument("--tick-size", type=float, default=0.01)
    p.add_argument("--config")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="regress diffusion coefficients against realized volatility")
    p.add_argument("inputs", nargs="+", help="report.csv files from estimate")
    p.add_argument("--out", default="out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("probup", help="export the price-increase probability grid")
    _add_data_flags(p, required=False)
    p.set_defaults(out="probup.csv")
    p.add_argument("--max-n", type=int, default=20)
    p.add_argument("--max-p", type=int, default=20)
    p.add_argument("--lot", type=int, default=100)
    p.add_argument("--config")
    p.set_defaults(func=cmd_probup)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        apply_config(args)
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
