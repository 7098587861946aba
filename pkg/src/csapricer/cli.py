"""Batch front end: ``csa-pricer <command> [options]``.

Every command prints a table to stdout and writes ``<command>.json`` and
``<command>.txt`` to ``--output-dir``. Exit status is 0 on success, 2 for bad
input and 3 when a numerical calibration fails.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import readers
from .analysis import (
    generic_rate,
    price_pairs,
    regress_pairs,
    synth_market_rates,
    synth_pair_dataset,
)
from .config import DEFAULT_SEED, THREADS_ENV
from .credit import Counterparty, find_counterparty
from .csa import CsaTerms
from .curve import ZeroCurve, market_par_rate, repricing_errors
from .dates import add_months
from .errors import CalibrationError
from .lattice import LatticeConfig, build_lattice
from .pricing import (
    NettingSet,
    ValuationMode,
    build_netting_sets,
    build_set_lattice,
    price_collateralized,
    solve_collateralized_par_rate,
)
from .risk import (
    historical_var,
    pnl_scenarios,
    scenario_table,
    synth_history,
    synth_netting_set,
    threshold_sweep,
    var_sweep,
)

logger = logging.getLogger("csapricer")

DEFAULT_THRESHOLDS = [0.0, 2.1e6, 4.1e6, 6.1e6, 8.1e6, math.inf]


@dataclass
class RunConfig:
    command: str
    curve: Optional[Path] = None
    counterparties: Optional[Path] = None
    csa: Optional[Path] = None
    trades: Optional[Path] = None
    lattice: Optional[Path] = None
    history: Optional[Path] = None
    pairs: Optional[Path] = None
    output_dir: Path = Path("reports")
    anchor: date = readers.DEFAULT_ANCHOR
    seed: int = DEFAULT_SEED
    threads: Optional[int] = None
    options: Dict[str, object] = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        known = {"command", "curve", "counterparties", "csa", "trades", "lattice", "history", "pairs",
                 "output_dir", "anchor", "seed", "threads", "verbose"}
        opts = {k: v for k, v in vars(args).items() if k not in known}
        return cls(
            command=args.command,
            curve=args.curve,
            counterparties=args.counterparties,
            csa=args.csa,
            trades=args.trades,
            lattice=args.lattice,
            history=getattr(args, "history", None),
            pairs=getattr(args, "pairs", None),
            output_dir=args.output_dir,
            anchor=args.anchor,
            seed=args.seed,
            threads=args.threads,
            options=opts,
        )


# --- formatting ------------------------------------------------------------

def fmt_rate(r: float) -> str:
    return f"{r:.6f}"


def fmt_bp(x: float) -> str:
    return f"{x:.2f}"


def fmt_ccy(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:,.0f}"


def _jsonable(obj):
    if isinstance(obj, float):
        return None if math.isinf(obj) or math.isnan(obj) else obj
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (date, Path)):
        return str(obj)
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows)
    return "\n".join(lines)


def _emit(cfg: RunConfig, payload: dict, text: str) -> None:
    print(text)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    name = cfg.command
    (cfg.output_dir / f"{name}.json").write_text(json.dumps(_jsonable(payload), indent=2) + "\n")
    (cfg.output_dir / f"{name}.txt").write_text(text + "\n")
    logger.info("wrote %s/%s.json and .txt", cfg.output_dir, name)


def _import_pyplot():
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise ImportError("plotting requires matplotlib. Install with: pip install matplotlib") from None
    return plt


def _plot_sweep(path: Path, labels: Sequence[str], series: Dict[str, Sequence[float]], ylabel: str, title: str) -> None:
    plt = _import_pyplot()
    fig, ax = plt.subplots(figsize=(8, 4))
    for name, values in series.items():
        ax.plot(range(len(labels)), values, marker="o", label=name)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels)
    ax.set_xlabel("Effective threshold")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    print(f"Wrote plot PNG: {path}")


# --- shared loading ----------------------------------------------------------

def _curve(cfg: RunConfig):
    return readers.load_market(cfg.curve, cfg.anchor)


def _parties(cfg: RunConfig, curve: ZeroCurve) -> List[Counterparty]:
    cds = cfg.options.get("cds")
    if cds:
        quotes = readers.load_cds_quotes(cds)
        name = str(cfg.options.get("name") or Path(cds).stem)
        recovery = cfg.options.get("recovery")
        recovery = 0.4 if recovery is None else float(recovery)
        return [Counterparty.calibrate(name, recovery, quotes, curve)]
    path = cfg.counterparties or readers.bundled(readers.COUNTERPARTIES_FILE)
    return readers.load_counterparties(path, curve)


def _csas(cfg: RunConfig) -> Dict[str, CsaTerms]:
    return readers.load_csa_terms(cfg.csa or readers.bundled(readers.CSA_FILE))


def _trades(cfg: RunConfig):
    return readers.load_trades(cfg.trades or readers.bundled(readers.TRADES_FILE))


def _lattice_cfg(cfg: RunConfig) -> LatticeConfig:
    return readers.load_lattice_config(cfg.lattice)


def _netting_sets(cfg: RunConfig, curve: ZeroCurve) -> List[NettingSet]:
    parties = _parties(cfg, curve)
    csas = _csas(cfg)
    synthetic = cfg.options.get("synthetic")
    if synthetic:
        party = find_counterparty(parties, str(cfg.options.get("counterparty") or "Company X"))
        return [synth_netting_set(curve, party, int(synthetic), cfg.seed, csa=csas.get(party.name))]
    return build_netting_sets(_trades(cfg), {p.name: p for p in parties}, csas)


def _thresholds(text: Optional[str]) -> List[float]:
    if not text:
        return list(DEFAULT_THRESHOLDS)
    out = []
    for tok in text.replace(",", " ").split():
        out.append(math.inf if tok.lower() in ("inf", "infinity") else float(tok))
    return out


def _horizon_days(text: str) -> int:
    t = str(text).strip().lower()
    if t.endswith("d"):
        t = t[:-1]
    try:
        n = int(t)
    except ValueError:
        raise ValueError(f"horizon must look like '10d', got {text!r}") from None
    if n < 1:
        raise ValueError(f"horizon must be at least one day, got {text!r}")
    return n


# --- commands -----------------------------------------------------------------

def cmd_bootstrap(cfg: RunConfig) -> int:
    curve, instruments = _curve(cfg)
    errors = repricing_errors(curve, instruments)
    pillars = curve.pillar_table()
    par = []
    for years in (2, 3, 4, 5, 7, 10, 12, 15, 20, 25):
        par.append({"tenor": f"{years}Y",
                    "par_rate": market_par_rate(curve, curve.anchor, add_months(curve.anchor, 12 * years))})
    rows = [[r["label"], r["kind"], f"{r['quote']:.6f}", f"{r['model']:.6f}", f"{r['error']:.2e}"] for r in errors]
    text = "\n".join([
        f"Curve anchored {curve.anchor}",
        _table(["instrument", "kind", "quote", "model", "error"], rows),
        "",
        _table(["date", "df", "zero"], [[str(p["date"]), f"{p['discount_factor']:.10f}", fmt_rate(p["zero_rate"])] for p in pillars]),
        "",
        _table(["tenor", "par rate"], [[p["tenor"], fmt_rate(p["par_rate"])] for p in par]),
    ])
    _emit(cfg, {"anchor": curve.anchor, "repricing": errors, "pillars": pillars, "par_rates": par}, text)
    return 0


def cmd_calibrate(cfg: RunConfig) -> int:
    curve, _ = _curve(cfg)
    parties = _parties(cfg, curve)
    payload = []
    blocks = []
    for p in parties:
        segs = p.hazard_curve.segment_table()
        errs = p.quote_errors(curve)
        payload.append({"name": p.name, "recovery": p.recovery, "hazards": segs, "quotes": errs})
        rows = [[f"{e['tenor']:g}", fmt_bp(e["spread"] * 1e4), fmt_bp(e["model"] * 1e4), f"{e['error']:.2e}",
                 f"{s['hazard']:.6f}"] for e, s in zip(errs, segs)]
        blocks.append(f"{p.name} (recovery {p.recovery:.5f})\n"
                      + _table(["tenor", "spread bp", "model bp", "error", "hazard"], rows))
    _emit(cfg, {"anchor": curve.anchor, "counterparties": payload}, "\n\n".join(blocks))
    return 0


def cmd_price(cfg: RunConfig) -> int:
    curve, _ = _curve(cfg)
    lcfg = _lattice_cfg(cfg)
    reports = []
    for nset in _netting_sets(cfg, curve):
        lattice = build_set_lattice(nset, curve, lcfg)
        reports.append(price_collateralized(nset, lattice, curve))
    rows = [[r.counterparty, fmt_ccy(r.threshold), fmt_ccy(r.notional), fmt_ccy(r.v_free), fmt_ccy(r.v_risky),
             fmt_ccy(r.v_csa), fmt_ccy(r.cva_uncollateralized), fmt_ccy(r.cva_collateralized)] for r in reports]
    total = {k: sum(getattr(r, k) for r in reports) for k in ("v_free", "v_risky", "v_csa")}
    text = _table(["counterparty", "threshold", "notional", "V free", "V risky", "V csa", "CVA no CSA", "CVA CSA"], rows)
    text += f"\n\nTotal: V free {fmt_ccy(total['v_free'])}  V risky {fmt_ccy(total['v_risky'])}  V csa {fmt_ccy(total['v_csa'])}"
    _emit(cfg, {"netting_sets": [r.to_dict() for r in reports], "total": total}, text)
    return 0


def cmd_parrate(cfg: RunConfig) -> int:
    curve, _ = _curve(cfg)
    lcfg = _lattice_cfg(cfg)
    parties = {p.name: p for p in _parties(cfg, curve)}
    csas = _csas(cfg)
    results = []
    lattices = {}
    for t in _trades(cfg):
        if not t.kind.is_swap:
            continue
        if t.counterparty not in parties:
            raise ValueError(f"{t.label}: unknown counterparty {t.counterparty!r}")
        generic = market_par_rate(curve, t.effective, t.maturity, t.convention)
        key = t.with_rate(0.0)
        if key not in lattices:
            dates = [d for d in key.lattice_dates() if d >= curve.anchor]
            lattices[key] = build_lattice(curve, lcfg, max(dates), dates)
        model = solve_collateralized_par_rate(t, parties[t.counterparty], csas.get(t.counterparty), lattices[key], curve)
        results.append({
            "label": t.label,
            "counterparty": t.counterparty,
            "generic_rate": generic,
            "market_rate": t.rate,
            "model_rate": model,
            "market_premium_bp": (t.rate - generic) * 1e4,
            "model_premium_bp": (model - generic) * 1e4,
        })
    results.sort(key=lambda r: r["model_rate"])
    rows = [[r["label"], r["counterparty"], fmt_rate(r["generic_rate"]), fmt_rate(r["market_rate"]),
             fmt_rate(r["model_rate"]), fmt_bp(r["market_premium_bp"]), fmt_bp(r["model_premium_bp"])] for r in results]
    text = _table(["trade", "counterparty", "generic", "market", "model", "mkt prem bp", "model prem bp"], rows)
    spreads = {}
    if len(results) >= 2:
        lo, hi = results[0], results[-1]
        spreads = {
            "market_spread_bp": hi["market_premium_bp"] - lo["market_premium_bp"],
            "model_spread_bp": hi["model_premium_bp"] - lo["model_premium_bp"],
        }
        text += (f"\n\nPremium spread ({hi['counterparty']} - {lo['counterparty']}): "
                 f"market {fmt_bp(spreads['market_spread_bp'])} bp, model {fmt_bp(spreads['model_spread_bp'])} bp")
    _emit(cfg, {"swaps": results, **spreads}, text)
    return 0


def cmd_cva_sweep(cfg: RunConfig) -> int:
    curve, _ = _curve(cfg)
    lcfg = _lattice_cfg(cfg)
    hs = _thresholds(cfg.options.get("thresholds"))
    labels = [fmt_ccy(h) for h in hs]
    payload = []
    rows = []
    series = {}
    for nset in _netting_sets(cfg, curve):
        lattice = build_set_lattice(nset, curve, lcfg)
        rep = threshold_sweep(nset, lattice, hs, cfg.threads)
        payload.append({
            "counterparty": rep.counterparty,
            "v_free": rep.v_free,
            "v_risky": rep.v_risky,
            "cva_uncollateralized": rep.cva_uncollateralized,
            "sweep": [{"threshold": p.threshold, "v_csa": p.v_csa, "cva": p.cva} for p in rep.sweep],
        })
        rows.append([rep.counterparty, *(fmt_ccy(p.cva) for p in rep.sweep)])
        series[rep.counterparty] = [p.cva for p in rep.sweep]
    text = "CVA by effective threshold\n" + _table(["counterparty", *labels], rows)
    _emit(cfg, {"thresholds": hs, "netting_sets": payload}, text)
    if cfg.options.get("plot"):
        _plot_sweep(Path(cfg.options["plot"]), labels, series, "CVA", "CVA vs collateral threshold")
    return 0


def _history(cfg: RunConfig):
    if cfg.history is not None:
        return readers.load_history(cfg.history)
    days = int(cfg.options.get("days") or 260)
    return synth_history(days, seed=cfg.seed)


def cmd_var(cfg: RunConfig) -> int:
    curve, _ = _curve(cfg)
    lcfg = _lattice_cfg(cfg)
    confidence = float(cfg.options.get("confidence") or 0.99)
    horizon = _horizon_days(cfg.options.get("horizon") or "10d")
    history = _history(cfg)
    sets = _netting_sets(cfg, curve)
    if cfg.options.get("thresholds"):
        hs = _thresholds(cfg.options["thresholds"])
        payload = []
        rows = []
        series = {}
        for nset in sets:
            sweep = var_sweep(nset, curve, lcfg, history, hs, confidence, horizon, cfg.threads)
            payload.append({"counterparty": nset.counterparty.name,
                            "rows": [{"mode": r.label, "threshold": r.threshold, "var": r.var} for r in sweep]})
            rows.extend([[nset.counterparty.name, r.label, "" if r.threshold is None else fmt_ccy(r.threshold),
                          fmt_ccy(r.var)] for r in sweep])
            series[nset.counterparty.name] = [r.var for r in sweep[2:]]
        text = f"{horizon}-day {confidence:.0%} VaR\n" + _table(["counterparty", "mode", "threshold", "VaR"], rows)
        _emit(cfg, {"confidence": confidence, "horizon_days": horizon, "scenarios": len(history) - horizon + 1,
                    "netting_sets": payload}, text)
        if cfg.options.get("plot"):
            _plot_sweep(Path(cfg.options["plot"]), [fmt_ccy(h) for h in hs], series, "VaR", "VaR vs collateral threshold")
        return 0

    mode = ValuationMode.parse(str(cfg.options.get("mode") or "csa"))
    payload = []
    rows = []
    for nset in sets:
        scenarios = pnl_scenarios(nset, curve, lcfg, history, mode, horizon, cfg.threads)
        res = historical_var([s.pnl for s in scenarios], confidence)
        payload.append({"counterparty": nset.counterparty.name, "var": res.var, "magnitude": res.magnitude,
                        "k": res.k, "scenarios": res.scenarios, "pnl": scenario_table(scenarios)})
        rows.append([nset.counterparty.name, mode.value, str(res.scenarios), str(res.k),
                     fmt_ccy(res.var), fmt_ccy(res.magnitude)])
    text = f"{horizon}-day {confidence:.0%} VaR\n" + _table(["counterparty", "mode", "N", "k", "VaR", "loss"], rows)
    _emit(cfg, {"confidence": confidence, "horizon_days": horizon, "mode": mode.value, "netting_sets": payload}, text)
    return 0


def cmd_regress(cfg: RunConfig) -> int:
    curve, _ = _curve(cfg)
    lcfg = _lattice_cfg(cfg)
    if cfg.pairs is not None:
        pairs = readers.load_pairs(cfg.pairs, curve)
        pairs = price_pairs(pairs, curve, lcfg)
    else:
        n = int(cfg.options.get("synthetic") or 100)
        pairs = price_pairs(synth_pair_dataset(n, curve, seed=cfg.seed), curve, lcfg)
        pairs = synth_market_rates(pairs, seed=cfg.seed)
    study = regress_pairs(pairs, curve)
    blocks = []
    summaries = study.summaries()
    srows = [[name, *(fmt_bp(s[k]) for k in ("max", "min", "mean", "median", "std"))] for name, s in summaries.items()]
    blocks.append("Premium spreads (bp)\n" + _table(["series", "max", "min", "mean", "median", "std"], srows))
    for title, res in (("Market spread on CDS difference", study.market_on_cds),
                       ("Market spread on model spread", study.market_on_model)):
        d = res.to_dict()
        blocks.append(title + "\n" + _table(list(d), [[f"{v:.4f}" if isinstance(v, float) else str(v) for v in d.values()]]))
    payload = {
        "pairs": len(pairs),
        "generic_rates": [generic_rate(p, curve) for p in pairs[:1]],
        "summaries": summaries,
        "market_on_cds": study.market_on_cds.to_dict(),
        "market_on_model": study.market_on_model.to_dict(),
    }
    _emit(cfg, payload, "\n\n".join(blocks))
    return 0


COMMANDS = {
    "bootstrap": cmd_bootstrap,
    "calibrate-credit": cmd_calibrate,
    "price": cmd_price,
    "parrate": cmd_parrate,
    "cva": cmd_cva_sweep,
    "var": cmd_var,
    "regress": cmd_regress,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--curve", type=Path, default=None, help="Curve instruments CSV (bundled by default)")
    common.add_argument("--counterparties", type=Path, default=None, help="Counterparty CDS JSON")
    common.add_argument("--csa", type=Path, default=None, help="CSA terms JSON")
    common.add_argument("--trades", type=Path, default=None, help="Trades JSON")
    common.add_argument("--lattice", type=Path, default=None, help="Lattice config JSON")
    common.add_argument("--anchor", type=date.fromisoformat, default=readers.DEFAULT_ANCHOR, help="Valuation date")
    common.add_argument("--output-dir", type=Path, default=Path("reports"))
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=None, help=f"Worker threads (capped by {THREADS_ENV})")
    common.add_argument("-v", "--verbose", action="count", default=0)

    ap = argparse.ArgumentParser(prog="csa-pricer", description="Collateral-adjusted swap pricing and CVA/VaR reports")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("bootstrap", parents=[common], help="Bootstrap the discount curve")
    p = sub.add_parser("calibrate-credit", parents=[common], help="Calibrate hazard curves to CDS quotes")
    p.add_argument("--cds", type=Path, default=None, help="CDS CSV (tenor_years,spread) for a single name")
    p.add_argument("--name", default=None, help="Name for --cds (file stem by default)")
    p.add_argument("--recovery", type=float, default=None, help="Recovery for --cds (default 0.4)")
    p = sub.add_parser("price", parents=[common], help="Value netting sets")
    p.add_argument("--synthetic", type=int, default=None, help="Price a random N-trade netting set instead")
    p.add_argument("--counterparty", default=None)
    sub.add_parser("parrate", parents=[common], help="Collateralized par rates of the swaps in the trades file")
    p = sub.add_parser("cva", parents=[common], help="CVA by collateral threshold")
    p.add_argument("--thresholds", default=None, help="Comma separated, 'inf' allowed")
    p.add_argument("--synthetic", type=int, default=None)
    p.add_argument("--counterparty", default=None)
    p.add_argument("--plot", default=None, help="Write a PNG of the sweep (requires matplotlib)")
    p = sub.add_parser("var", parents=[common], help="Historical VaR")
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--horizon", default="10d")
    p.add_argument("--mode", default="csa", choices=["riskfree", "risky", "csa"])
    p.add_argument("--history", type=Path, default=None, help="History CSV (synthetic when omitted)")
    p.add_argument("--days", type=int, default=260, help="Days of synthetic history")
    p.add_argument("--thresholds", default=None, help="Sweep thresholds instead of a single mode")
    p.add_argument("--synthetic", type=int, default=None)
    p.add_argument("--counterparty", default=None)
    p.add_argument("--plot", default=None)
    p = sub.add_parser("regress", parents=[common], help="Premium-spread regressions on swap pairs")
    p.add_argument("--pairs", type=Path, default=None, help="Swap pairs CSV (synthetic when omitted)")
    p.add_argument("--synthetic", type=int, default=100)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    cfg = RunConfig.from_args(args)
    try:
        return COMMANDS[cfg.command](cfg)
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, KeyError, ImportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
