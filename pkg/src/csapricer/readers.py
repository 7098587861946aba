"""File formats: market data, trades, CSA terms, scenario history and swap pairs.

Every loader raises ``InputError`` naming the file and row of a malformed
entry. ``bundled(name)`` returns the path of a fixture shipped in ``data/``.
"""
from __future__ import annotations

import csv
import json
import math
from datetime import date
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from .analysis import SwapPair
from .credit import CdsQuote, Counterparty
from .csa import CsaTerms
from .curve import CurveInstrument, InstrumentKind, ZeroCurve, bootstrap_curve
from .dates import DayCount, Frequency, Roll
from .errors import CalibrationError, InputError
from .lattice import LatticeConfig
from .risk import MarketShift
from .trades import Trade, TradeKind

PathLike = Union[str, Path]

DATA_DIR = Path(__file__).parent / "data"
DEFAULT_ANCHOR = date(2005, 9, 15)

CURVE_FILE = "usd_curve_20050915.csv"
COUNTERPARTIES_FILE = "counterparties_20050915.json"
CSA_FILE = "csa_terms.json"
TRADES_FILE = "swaps_20y.json"
LATTICE_FILE = "lattice.json"


def bundled(name: str) -> Path:
    path = DATA_DIR / name
    if not path.exists():
        raise InputError(f"no bundled data file {name!r}")
    return path


def parse_date(text: str, where: str = "") -> date:
    try:
        return date.fromisoformat(str(text).strip())
    except ValueError:
        raise InputError(f"{where}invalid date {text!r}, expected YYYY-MM-DD") from None


def _number(value, where: str) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "+inf"):
        return math.inf
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise InputError(f"{where}invalid number {value!r}") from None
    if math.isnan(out):
        raise InputError(f"{where}invalid number {value!r}")
    return out


def _read_json(path: PathLike):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None


def _read_csv(path: PathLike) -> List[Dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def load_curve_instruments(path: PathLike) -> List[CurveInstrument]:
    """Curve CSV with columns ``kind,label,maturity,quote``."""
    out = []
    for i, row in enumerate(_read_csv(path), start=2):
        where = f"{path}:{i}: "
        try:
            kind = InstrumentKind.parse(row["kind"])
            out.append(CurveInstrument(kind, row.get("label") or f"row {i}",
                                       parse_date(row["maturity"], where), _number(row["quote"], where)))
        except KeyError as exc:
            raise InputError(f"{where}missing column {exc.args[0]!r}") from None
        except InputError as exc:
            msg = str(exc)
            raise InputError(msg if msg.startswith(str(path)) else where + msg) from None
    return out


def load_cds_quotes(path: PathLike) -> List[CdsQuote]:
    """CDS CSV with columns ``tenor_years,spread`` (spread as a decimal)."""
    out = []
    for i, row in enumerate(_read_csv(path), start=2):
        where = f"{path}:{i}: "
        try:
            out.append(CdsQuote(_number(row["tenor_years"], where), _number(row["spread"], where)))
        except KeyError as exc:
            raise InputError(f"{where}missing column {exc.args[0]!r}") from None
        except InputError as exc:
            msg = str(exc)
            raise InputError(msg if msg.startswith(str(path)) else where + msg) from None
    if not out:
        raise InputError(f"{path}: no CDS quotes")
    return out


def _entry_quotes(entry: dict, tenors: Sequence[float], where: str) -> List[CdsQuote]:
    if "cds_quotes" in entry and "cds_spreads" in entry:
        raise InputError(f"{where}give either 'cds_quotes' or 'cds_spreads', not both")
    if "cds_quotes" in entry:
        quotes = entry["cds_quotes"]
        if not isinstance(quotes, list):
            raise InputError(f"{where}'cds_quotes' must be a list of {{tenor_years, spread}}")
        try:
            return [CdsQuote(_number(q["tenor_years"], where), _number(q["spread"], where)) for q in quotes]
        except (KeyError, TypeError) as exc:
            raise InputError(f"{where}CDS quote needs 'tenor_years' and 'spread' ({exc})") from None
    spreads = [_number(s, where) for s in entry.get("cds_spreads", [])]
    if spreads and len(spreads) != len(tenors):
        raise InputError(f"{where}{len(spreads)} spreads for {len(tenors)} tenors")
    return [CdsQuote(t, s) for t, s in zip(tenors, spreads)]


def load_counterparties(path: PathLike, curve: ZeroCurve) -> List[Counterparty]:
    """Counterparty JSON, calibrated against ``curve``.

    Entries are ``{name, recovery, cds_quotes: [{tenor_years, spread}, ...]}``.
    The file may be one entry, a list of entries or an object with a
    ``counterparties`` list. That object may also carry shared ``tenors`` with
    per-name ``cds_spreads`` in their place, plus an ``anchor`` date. Names
    with no quotes are risk-free.
    """
    doc = _read_json(path)
    if isinstance(doc, list):
        doc = {"counterparties": doc}
    elif isinstance(doc, dict) and "name" in doc:
        doc = {"counterparties": [doc]}
    try:
        tenors = [float(t) for t in doc.get("tenors", [])]
        entries = list(doc["counterparties"])
    except (KeyError, TypeError, ValueError, AttributeError):
        raise InputError(f"{path}: expected counterparty entries or an object with 'counterparties'") from None
    if doc.get("anchor") and parse_date(doc["anchor"], f"{path}: ") != curve.anchor:
        raise InputError(f"{path}: quotes are dated {doc['anchor']} but the curve anchor is {curve.anchor}")
    out = []
    for k, entry in enumerate(entries):
        where = f"{path}: counterparty {k}: "
        if not isinstance(entry, dict):
            raise InputError(f"{where}expected an object, got {entry!r}")
        try:
            name = str(entry["name"])
            recovery = _number(entry["recovery"], where)
        except KeyError as exc:
            raise InputError(f"{where}missing field {exc.args[0]!r}") from None
        if not 0.0 <= recovery < 1.0:
            raise InputError(f"{where}recovery must be in [0, 1), got {recovery}")
        quotes = _entry_quotes(entry, tenors, where)
        if not quotes:
            out.append(Counterparty.risk_free(name, curve.anchor, recovery))
            continue
        out.append(Counterparty.calibrate(name, recovery, quotes, curve))
    return out


def load_csa_terms(path: PathLike) -> Dict[str, CsaTerms]:
    """CSA JSON: a list of ``{counterparty, threshold, mta, independent_amount}``.

    A threshold of ``null`` or ``"inf"`` means no collateral is ever called.
    """
    doc = _read_json(path)
    if not isinstance(doc, list):
        raise InputError(f"{path}: expected a list of CSA entries")
    out: Dict[str, CsaTerms] = {}
    for k, entry in enumerate(doc):
        where = f"{path}: entry {k}: "
        try:
            name = str(entry["counterparty"])
            raw = entry.get("threshold")
            threshold = math.inf if raw is None else _number(raw, where)
            terms = CsaTerms(threshold, _number(entry.get("mta", 0), where),
                             _number(entry.get("independent_amount", 0), where), name)
        except KeyError as exc:
            raise InputError(f"{where}missing field {exc.args[0]!r}") from None
        except InputError as exc:
            raise InputError(f"{where}{exc}" if not str(exc).startswith(str(path)) else str(exc)) from None
        if name in out:
            raise InputError(f"{where}duplicate CSA for {name!r}")
        out[name] = terms
    return out


def _trade(entry: dict, where: str) -> Trade:
    kind = TradeKind.parse(entry["kind"])
    kwargs = {}
    for key, parser in (("fixed_frequency", Frequency.parse), ("float_frequency", Frequency.parse),
                        ("fixed_day_count", DayCount.parse), ("float_day_count", DayCount.parse),
                        ("roll", Roll.parse)):
        if key in entry:
            try:
                kwargs[key] = parser(str(entry[key]))
            except ValueError as exc:
                raise InputError(f"{where}{exc}") from None
    if "expiry" in entry:
        kwargs["expiry"] = parse_date(entry["expiry"], where)
    if "underlying" in entry:
        kwargs["underlying"] = TradeKind.parse(entry["underlying"])
    if "side" in entry:
        side = str(entry["side"]).strip().lower()
        if side not in ("long", "short"):
            raise InputError(f"{where}side must be 'long' or 'short', got {entry['side']!r}")
        kwargs["long"] = side == "long"
    return Trade(
        kind=kind,
        notional=_number(entry["notional"], where),
        effective=parse_date(entry["effective"], where),
        maturity=parse_date(entry["maturity"], where),
        rate=_number(entry.get("rate", 0.0), where),
        label=str(entry.get("label", "")),
        counterparty=entry.get("counterparty"),
        **kwargs,
    )


def load_trades(path: PathLike) -> List[Trade]:
    doc = _read_json(path)
    if not isinstance(doc, list):
        raise InputError(f"{path}: expected a list of trades")
    out = []
    for k, entry in enumerate(doc):
        where = f"{path}: trade {entry.get('label', k) if isinstance(entry, dict) else k}: "
        try:
            out.append(_trade(entry, where))
        except KeyError as exc:
            raise InputError(f"{where}missing field {exc.args[0]!r}") from None
        except InputError as exc:
            msg = str(exc)
            raise InputError(msg if msg.startswith(str(path)) else where + msg) from None
    return out


def load_lattice_config(path: Optional[PathLike] = None) -> LatticeConfig:
    doc = _read_json(path if path is not None else bundled(LATTICE_FILE))
    try:
        return LatticeConfig(
            mean_reversion=float(doc.get("mean_reversion", 0.03)),
            sigma=float(doc.get("sigma", 0.01)),
            max_dt=float(doc.get("max_dt_years", 0.25)),
        )
    except (TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def load_history(path: PathLike) -> List[MarketShift]:
    """History CSV: ``date`` then ``curve*`` and ``cds*`` columns of daily shifts in bp.

    A single column of either kind is a parallel shift; several are per pillar.
    """
    rows = _read_csv(path)
    if not rows:
        raise InputError(f"{path}: history is empty")
    cols = list(rows[0].keys())
    if "date" not in cols:
        raise InputError(f"{path}: missing column 'date'")
    curve_cols = [c for c in cols if c.lower().startswith("curve")]
    cds_cols = [c for c in cols if c.lower().startswith("cds")]
    if not curve_cols and not cds_cols:
        raise InputError(f"{path}: no curve or cds shift columns")
    out = []
    prev = None
    for i, row in enumerate(rows, start=2):
        where = f"{path}:{i}: "
        d = parse_date(row["date"], where)
        if prev is not None and d <= prev:
            raise InputError(f"{where}dates must be increasing, {d} follows {prev}")
        prev = d
        curve = tuple(_number(row[c], where) for c in curve_cols)
        cds = tuple(_number(row[c], where) for c in cds_cols)
        out.append(MarketShift(
            d,
            (curve[0] if len(curve) == 1 else curve) if curve else 0.0,
            (cds[0] if len(cds) == 1 else cds) if cds else 0.0,
        ))
    return out


def write_history(path: PathLike, history: Sequence[MarketShift]) -> None:
    if not history:
        raise ValueError("nothing to write")
    n_curve = len(history[0].curve_bp) if isinstance(history[0].curve_bp, tuple) else 0
    header = ["date"] + ([f"curve_{k + 1}" for k in range(n_curve)] if n_curve else ["curve"]) + ["cds"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for s in history:
            curve = list(s.curve_bp) if n_curve else [s.curve_bp]
            writer.writerow([s.date.isoformat(), *curve, s.cds_bp])


PAIR_COLUMNS = [
    "label", "effective", "maturity", "notional",
    "name_a", "recovery_a", "cds_a", "threshold_a", "market_rate_a",
    "name_b", "recovery_b", "cds_b", "threshold_b", "market_rate_b",
]


def load_pairs(path: PathLike, curve: ZeroCurve) -> List[SwapPair]:
    """Swap pairs CSV; each side is calibrated to one flat CDS quote at the swap tenor.

    ``threshold_*`` may be blank (no CSA) or ``inf``.
    """
    rows = _read_csv(path)
    if rows:
        missing = [c for c in PAIR_COLUMNS if c not in rows[0]]
        if missing:
            raise InputError(f"{path}: missing columns {missing}")
    out = []
    for i, row in enumerate(rows, start=2):
        where = f"{path}:{i}: "
        terms = Trade(TradeKind.RECEIVER_SWAP, _number(row["notional"], where),
                      parse_date(row["effective"], where), parse_date(row["maturity"], where), 0.0,
                      label=row["label"])
        tenor = curve.time(terms.maturity)
        sides = []
        for s in ("a", "b"):
            name = row[f"name_{s}"]
            try:
                party = Counterparty.calibrate(name, _number(row[f"recovery_{s}"], where),
                                               [CdsQuote(tenor, _number(row[f"cds_{s}"], where))], curve)
            except CalibrationError as exc:
                raise CalibrationError(f"{where}{exc}") from exc
            raw = row[f"threshold_{s}"].strip()
            csa = CsaTerms(_number(raw, where), counterparty=name) if raw else None
            rate = row[f"market_rate_{s}"].strip()
            sides.append((party, csa, _number(rate, where) if rate else None))
        (pa, ca, ra), (pb, cb, rb) = sides
        out.append(SwapPair(terms, pa, pb, ca, cb, market_rate_a=ra, market_rate_b=rb, label=row["label"]))
    return out


def load_market(
    curve_path: Optional[PathLike] = None,
    anchor: date = DEFAULT_ANCHOR,
):
    """Bootstrap a curve from ``curve_path`` (bundled curve by default)."""
    instruments = load_curve_instruments(curve_path if curve_path is not None else bundled(CURVE_FILE))
    return bootstrap_curve(anchor, instruments), instruments
