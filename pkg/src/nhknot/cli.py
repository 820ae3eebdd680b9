"""``nhknot`` command line: figure data as CSV/JSON plus static SVG plots.

Exit codes: 0 success, 2 bad arguments or configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import effective as eff
from .errors import DomainError, GaplessError, InvalidInputError, NumericalError
from .gauge import GaugeChoice, a_map
from .io import (
    STDOUT,
    atomic_write,
    csv_text,
    json_text,
    load_config,
    read_csv,
    svg_bytes,
)
from .models import MODEL_NAMES, BlochModel, band_energies, midpoint_grid, preset
from .topology import extract_braid, hermitian_winding, nh_winding
from .transitions import annotate, classify_transition, find_ep, scan_omega

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

COMMANDS = ("spectrum", "braid", "winding", "scan", "ep-find", "classify", "effective", "render")
FORMATS = ("csv", "json", "svg")
JSON_ONLY = ("winding", "ep-find", "classify")
CUSTOM_KEYS = ("t1", "t2", "t3", "t4", "mu")

DEFAULTS = {
    "model": "model-i",
    "gauge": "sigma-x",
    "post_gauge": None,
    "omega": None,
    "omega_range": None,
    "n_omega": 20,
    "k_range": None,
    "nk": 1024,
    "out": STDOUT,
    "format": None,
    "seed": 42,
    "side": "plus",
    "length": 64,
    "boundary": "periodic",
    "m_source": "published",
    "input": None,
}


@dataclass
class RunConfig:
    command: str
    model: str = "model-i"
    gauge: GaugeChoice = field(default_factory=lambda: GaugeChoice("sigma-x"))
    post_gauge: GaugeChoice | None = None
    omega: float | None = None
    omega_range: tuple[float, float] | None = None
    n_omega: int = 20
    k_range: tuple[float, float] = (0.0, 2 * math.pi)
    nk: int = 1024
    out: str = STDOUT
    format: str = "csv"
    seed: int = 42
    side: str = "plus"
    length: int = 64
    boundary: str = "periodic"
    m_source: str = "published"
    input: str | None = None
    custom: dict | None = None

    def model_at(self, omega: float | None) -> BlochModel:
        if self.model == "custom":
            c = self.custom
            return BlochModel(c["t1"], c["t2"], c["t3"], c["t4"], c["mu"], label="custom")
        return preset(self.model, omega)

    def need_omega(self) -> float:
        if self.model == "custom":
            return math.nan
        if self.omega is None:
            raise InvalidInputError(f"{self.command} needs --omega")
        return self.omega

    def need_range(self) -> tuple[float, float]:
        if self.omega_range is None:
            raise InvalidInputError(f"{self.command} needs --omega-range lo:hi")
        return self.omega_range


def _positive(value, name: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name} must be a number, got {value!r}") from exc
    if not math.isfinite(v) or v <= 0:
        raise InvalidInputError(f"{name} must be finite and > 0, got {value!r}")
    return v


def _count(value, name: str, minimum: int) -> int:
    try:
        v = float(value)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name} must be an integer, got {value!r}") from exc
    if not math.isfinite(v) or v != int(v):
        raise InvalidInputError(f"{name} must be an integer, got {value!r}")
    if v < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {int(v)}")
    return int(v)


def _interval(text, name: str, positive: bool) -> tuple[float, float]:
    lo, sep, hi = str(text).partition(":")
    if not sep:
        raise InvalidInputError(f"{name} must look like lo:hi, got {text!r}")
    try:
        a, b = float(lo), float(hi)
    except ValueError as exc:
        raise InvalidInputError(f"{name} bounds must be numbers, got {text!r}") from exc
    if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
        raise InvalidInputError(f"{name} needs finite lo < hi, got {text!r}")
    if positive and a <= 0:
        raise InvalidInputError(f"{name} must be positive, got {text!r}")
    return a, b


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    merged = dict(DEFAULTS)
    file_values: dict = {}
    if args.config:
        try:
            file_values = load_config(args.config)
        except OSError as exc:
            raise InvalidInputError(f"cannot read config {args.config}: {exc.strerror}") from exc
        unknown = set(file_values) - set(DEFAULTS) - set(CUSTOM_KEYS)
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        merged.update({k: v for k, v in file_values.items() if k in DEFAULTS})
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val

    model = str(merged["model"]).strip().lower()
    custom = None
    if model == "custom":
        missing = [k for k in CUSTOM_KEYS if k not in file_values]
        if missing:
            raise InvalidInputError(f"custom model needs config keys {missing}")
        custom = {}
        for k in CUSTOM_KEYS:
            try:
                custom[k] = float(file_values[k])
            except ValueError as exc:
                raise InvalidInputError(f"{k} must be a number") from exc
            if not math.isfinite(custom[k]):
                raise InvalidInputError(f"{k} must be finite")
    elif model in MODEL_NAMES:
        model = MODEL_NAMES[model]
    else:
        raise InvalidInputError(f"unknown model {merged['model']!r}")

    command = args.command
    fmt_default = "json" if command in JSON_ONLY else "csv"
    out_format = (merged["format"] or fmt_default).strip().lower()
    if out_format not in FORMATS:
        raise InvalidInputError(f"format must be one of {FORMATS}")
    if command in JSON_ONLY and out_format != "json":
        raise InvalidInputError(f"{command} only writes json")
    if command == "render" and out_format != "svg":
        out_format = "svg"

    cfg = RunConfig(
        command=command,
        model=model,
        gauge=GaugeChoice.parse(str(merged["gauge"])),
        post_gauge=GaugeChoice.parse(str(merged["post_gauge"])) if merged["post_gauge"] else None,
        omega=_positive(merged["omega"], "omega") if merged["omega"] is not None else None,
        omega_range=(
            _interval(merged["omega_range"], "omega-range", True) if merged["omega_range"] else None
        ),
        n_omega=_count(merged["n_omega"], "n-omega", 2),
        k_range=(_interval(merged["k_range"], "k-range", False) if merged["k_range"] else (0.0, 2 * math.pi)),
        nk=_count(merged["nk"], "nk", 1),
        out=str(merged["out"]),
        format=out_format,
        seed=_count(merged["seed"], "seed", 0),
        side=str(merged["side"]),
        length=_count(merged["length"], "length", 0),
        boundary=str(merged["boundary"]).strip().lower(),
        m_source=str(merged["m_source"]).strip().lower(),
        input=merged["input"],
        custom=custom,
    )
    if cfg.m_source not in ("published", "derived"):
        raise InvalidInputError("m-source must be 'published' or 'derived'")
    return cfg


def _emit(cfg: RunConfig, data: str | bytes) -> None:
    try:
        atomic_write(cfg.out, data)
    except OSError as exc:
        raise InvalidInputError(f"cannot write {cfg.out}: {exc.strerror}") from exc


def _table(cfg: RunConfig, header, rows, trailer=None, svg=None) -> None:
    if cfg.format == "svg":
        if svg is None:
            raise InvalidInputError(f"{cfg.command} has no svg rendering")
        _emit(cfg, svg())
    elif cfg.format == "json":
        doc = {"columns": list(header), "rows": [list(r) for r in rows]}
        if trailer:
            doc["meta"] = trailer
        _emit(cfg, json_text(doc))
    else:
        _emit(cfg, csv_text(header, rows, trailer))


def _spectrum_svg(k, s_minus, s_plus):
    return svg_bytes(
        [
            ("singular values", "k", "s", [(k, s_minus, "s-", "line"), (k, s_plus, "s+", "line")]),
            ("gap", "k", "s+ - s-", [(k, s_plus - s_minus, "", "line")]),
        ]
    )


def _braid_svg(k, tracks):
    t1, t2 = tracks
    return svg_bytes(
        [
            (
                "eigenvalue loci",
                "Re",
                "Im",
                [(t1.real, t1.imag, "1", "dots"), (t2.real, t2.imag, "2", "dots")],
            ),
            (
                "strands vs k",
                "k",
                "value",
                [
                    (k, t1.real, "Re 1", "line"),
                    (k, t1.imag, "Im 1", "line"),
                    (k, t2.real, "Re 2", "line"),
                    (k, t2.imag, "Im 2", "line"),
                ],
            ),
        ]
    )


def _scan_svg(omega, nu):
    return svg_bytes(
        [
            ("winding", "omega", "nu", [(omega, nu, "", "dots")]),
            ("|winding|", "omega", "|nu|", [(omega, np.abs(nu), "", "dots")]),
        ]
    )


def cmd_spectrum(cfg: RunConfig) -> None:
    k = midpoint_grid(cfg.nk)
    e_minus, e_plus = band_energies(cfg.model_at(cfg.need_omega()), k)
    s_minus = np.sqrt(np.clip(e_minus, 0.0, None))
    s_plus = np.sqrt(np.clip(e_plus, 0.0, None))
    _table(
        cfg,
        ("k", "s_minus", "s_plus"),
        zip(k, s_minus, s_plus),
        svg=lambda: _spectrum_svg(k, s_minus, s_plus),
    )


def cmd_braid(cfg: RunConfig) -> None:
    omega = cfg.need_omega()
    amap = a_map(cfg.model_at(omega), cfg.gauge, cfg.post_gauge, omega=omega)
    try:
        braid = extract_braid(amap, max(256, cfg.nk))
        nu = nh_winding(amap, max(128, cfg.nk)).nu
    except NumericalError as exc:
        raise annotate(exc, omega) from None
    t1, t2 = braid.tracks
    _table(
        cfg,
        ("k", "re_1", "im_1", "re_2", "im_2"),
        zip(braid.k, t1.real, t1.imag, t2.real, t2.imag),
        trailer=f"permutation={braid.permutation} nu={nu}",
        svg=lambda: _braid_svg(braid.k, braid.tracks),
    )


def cmd_winding(cfg: RunConfig) -> None:
    omega = cfg.need_omega()
    m = cfg.model_at(omega)
    doc: dict = {}
    try:
        phase = nh_winding(a_map(m, cfg.gauge, cfg.post_gauge, omega=omega), max(128, cfg.nk))
        doc.update(nu=phase.nu, nu_residual=phase.residual, knot=phase.knot)
    except NumericalError as exc:
        doc.update(nu=None, nu_residual=None, knot=None, nu_reason=str(exc))
    try:
        doc["nu_h"] = hermitian_winding(m, max(4096, cfg.nk)).nu_h
    except GaplessError as exc:
        doc["nu_h"] = None
        doc["nu_h_reason"] = str(exc)
    doc = {
        key: doc[key]
        for key in ("nu", "nu_residual", "nu_h", "knot", "nu_reason", "nu_h_reason")
        if key in doc
    }
    _emit(cfg, json_text(doc))


def cmd_scan(cfg: RunConfig) -> None:
    lo, hi = cfg.need_range()
    # cell centres keep the grid off the endpoints and off round values like 1
    grid = lo + (np.arange(cfg.n_omega) + 0.5) * (hi - lo) / cfg.n_omega
    rows = scan_omega(cfg.model, cfg.gauge, grid, max(128, cfg.nk), cfg.post_gauge)
    omega = np.array([w for w, _ in rows])
    nu = np.array([p.nu for _, p in rows])
    _table(
        cfg,
        ("omega", "nu", "knot"),
        [(w, p.nu, p.knot) for w, p in rows],
        svg=lambda: _scan_svg(omega, nu),
    )


def cmd_ep_find(cfg: RunConfig) -> None:
    diag: list = []
    eps = find_ep(cfg.model, cfg.gauge, cfg.need_range(), cfg.k_range, post=cfg.post_gauge, diagnostics=diag)
    _emit(cfg, json_text([e.to_dict() for e in eps]))


def cmd_classify(cfg: RunConfig) -> None:
    report = classify_transition(cfg.model, cfg.gauge, cfg.need_range(), max(128, cfg.nk), cfg.post_gauge)
    _emit(cfg, json_text(report.to_dict()))


LADDER = (0.01, 0.005, 0.0025)


def linearization_table(source: str) -> list[tuple]:
    rows = []
    for sign in (1.0, -1.0):
        prev = None
        for dk in LADDER:
            err = eff.linearization_error(math.pi + sign * dk, source)
            rows.append((sign * dk, err, prev / err if prev else math.nan))
            prev = err
    return rows


def cmd_effective(cfg: RunConfig) -> None:
    e = (eff.EffectiveModel.derived if cfg.m_source == "derived" else eff.EffectiveModel.published)(cfg.side)
    chain = eff.realspace_chain(e, cfg.length, cfg.boundary)
    vals = chain.spectrum()
    spec_rows = [(i, z.real, z.imag, chain.boundary, chain.length) for i, z in enumerate(vals)]
    lin_rows = linearization_table(cfg.m_source)
    if cfg.format == "svg":
        _emit(
            cfg,
            svg_bytes(
                [
                    ("chain spectrum", "Re", "Im", [(vals.real, vals.imag, "", "dots")]),
                    (
                        "linearisation error",
                        "|k - pi|",
                        "error",
                        [(np.abs([r[0] for r in lin_rows]), [r[1] for r in lin_rows], "", "dots")],
                    ),
                ]
            ),
        )
        return
    lin_header = ("k_minus_pi", "error", "ratio")
    if cfg.format == "json":
        _emit(
            cfg,
            json_text(
                {
                    "spectrum": {"columns": ["index", "re", "im", "boundary", "length"], "rows": spec_rows},
                    "linearization": {"columns": list(lin_header), "rows": [list(r) for r in lin_rows]},
                }
            ),
        )
        return
    spec_csv = csv_text(("index", "re", "im", "boundary", "length"), spec_rows)
    lin_csv = csv_text(lin_header, lin_rows)
    if cfg.out == STDOUT:
        _emit(cfg, spec_csv + "\n" + lin_csv)
        return
    _emit(cfg, spec_csv)
    target = Path(cfg.out)
    side_path = target.with_name(target.stem + ".linearization.csv")
    try:
        atomic_write(side_path, lin_csv)
    except OSError as exc:
        raise InvalidInputError(f"cannot write {side_path}: {exc.strerror}") from exc


def cmd_render(cfg: RunConfig) -> None:
    if not cfg.input:
        raise InvalidInputError("render needs --input <csv>")
    try:
        header, rows, _ = read_csv(cfg.input)
    except OSError as exc:
        raise InvalidInputError(f"cannot read {cfg.input}: {exc.strerror}") from exc
    cols = {name: i for i, name in enumerate(header)}

    def col(name, cast=float):
        return np.array([cast(r[cols[name]]) for r in rows])

    if header[:3] == ["k", "s_minus", "s_plus"]:
        data = _spectrum_svg(col("k"), col("s_minus"), col("s_plus"))
    elif header[:5] == ["k", "re_1", "im_1", "re_2", "im_2"]:
        t1 = col("re_1") + 1j * col("im_1")
        t2 = col("re_2") + 1j * col("im_2")
        data = _braid_svg(col("k"), (t1, t2))
    elif header[:2] == ["omega", "nu"]:
        data = _scan_svg(col("omega"), col("nu", int))
    else:
        raise InvalidInputError(f"{cfg.input}: unrecognised columns {header}")
    _emit(cfg, data)


HANDLERS = {
    "spectrum": cmd_spectrum,
    "braid": cmd_braid,
    "winding": cmd_winding,
    "scan": cmd_scan,
    "ep-find": cmd_ep_find,
    "classify": cmd_classify,
    "effective": cmd_effective,
    "render": cmd_render,
}


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--model", help="model-i, model-ii or custom (t1..mu from --config)")
    shared.add_argument(
        "--gauge", help="sigma-x | sigma-y | i-sigma-z | k-dependent | general:phi,alpha,beta,theta0,theta1"
    )
    shared.add_argument(
        "--post-gauge", dest="post_gauge", help="extra right unitary applied after the factorisation"
    )
    shared.add_argument("--omega", help="coupling omega > 0")
    shared.add_argument("--omega-range", dest="omega_range", help="lo:hi")
    shared.add_argument("--n-omega", dest="n_omega", help="scan points (cell centres of the range)")
    shared.add_argument("--k-range", dest="k_range", help="lo:hi for ep-find (default 0:2pi)")
    shared.add_argument("--nk", help="k samples")
    shared.add_argument("--out", help="output path, '-' for stdout")
    shared.add_argument("--format", help="csv | json | svg")
    shared.add_argument("--config", help="key=value file; flags override it")
    shared.add_argument("--seed", help="integer seed (outputs here are deterministic)")
    shared.add_argument("--side", help="plus | minus (effective)")
    shared.add_argument("--length", help="chain length in unit cells (effective)")
    shared.add_argument("--boundary", help="open | periodic (effective)")
    shared.add_argument("--m-source", dest="m_source", help="published | derived hopping block (effective)")
    shared.add_argument("--input", help="CSV to render (render)")

    parser = argparse.ArgumentParser(
        prog="nhknot", description="Knots of non-Hermitian SVD factors of SSH models."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[shared])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = build_config(args)
        HANDLERS[cfg.command](cfg)
    except (InvalidInputError, DomainError) as exc:
        print(f"nhknot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"nhknot: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
