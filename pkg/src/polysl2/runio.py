"""Run configuration, command drivers and result serialization.

Two text syntaxes feed one :class:`RunConfig`: an INI-style
key = value form with sections, and a JSON object with the same block
structure.  Commands return a :class:`ResultTable` whose rows serialize to
CSV or JSON deterministically (17 significant digits, LF endings), so
byte-identical configs produce byte-identical outputs.
"""
from __future__ import annotations

import configparser
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import phi_from_psi
from .catalog import (ModelSpec, SectorLabels, build_psi, enumerate_sectors,
                      labels_from_momenta)
from .coherent import (closed_form_resonance, displacement_for,
                       variational_spectrum, approx_hamiltonian,
                       approx_error_report)
from .dynamics import (BlochState, QuantumState, basis_state, bloch_flow,
                       displaced_state, exact_propagator, integrate,
                       model_observable, observable_series, qa_propagator)
from .errors import (IoError, ParseError, PolySL2Error, UnsupportedClosedForm,
                     ValidationError)
from .exact import assemble_block, diagonalize, truncated_spectrum

METHODS = ("exact", "cq", "cmf", "linear", "closed_form")
ROOT_POLICIES = ("min-delta2", "min-ground")

_MODEL_KEYS = {"family", "m", "n", "atoms", "omegas", "epsilon", "g"}
_SECTOR_KEYS = {"kappa", "s", "j", "kappas"}
_METHOD_KEYS = {"methods", "root_policy", "tol", "truncation_ceiling", "levels"}
_DYNAMICS_KEYS = {"kind", "variant", "initial", "t_max", "samples", "tol",
                  "observable", "propagator"}
_OUTPUT_KEYS = {"format", "path", "precision"}
_BLOCKS = {"model": _MODEL_KEYS, "sector": _SECTOR_KEYS, "method": _METHOD_KEYS,
           "dynamics": _DYNAMICS_KEYS, "output": _OUTPUT_KEYS}


@dataclass
class RunConfig:
    """Validated configuration with every default resolved."""

    family: str
    m: int
    n: int
    atoms: int
    omegas: tuple[Fraction, ...]
    epsilon: Fraction
    g: complex
    sector_ranges: dict
    methods: tuple[str, ...]
    root_policy: str
    tol: float
    truncation_ceiling: int
    levels: int
    dynamics: dict
    out_format: str
    out_path: str | None
    precision: int
    seed: int | None = None

    def model(self) -> ModelSpec:
        try:
            return ModelSpec(self.family, m=self.m, n=self.n,
                             n_atoms=self.atoms, omegas=self.omegas,
                             epsilon=self.epsilon, g=self.g)
        except PolySL2Error as exc:
            raise ValidationError(str(exc)) from exc

    def echo(self) -> dict:
        """Deterministic dict of the resolved configuration."""
        return {
            "model": {"family": self.family, "m": self.m, "n": self.n,
                      "atoms": self.atoms,
                      "omegas": [str(w) for w in self.omegas],
                      "epsilon": str(self.epsilon),
                      "g": [self.g.real, self.g.imag]},
            "sector": {k: [str(x) for x in v] if isinstance(v, tuple)
                       else str(v)
                       for k, v in sorted(self.sector_ranges.items())},
            "method": {"methods": list(self.methods),
                       "root_policy": self.root_policy, "tol": self.tol,
                       "truncation_ceiling": self.truncation_ceiling,
                       "levels": self.levels},
            "dynamics": {k: self.dynamics[k] for k in sorted(self.dynamics)},
            "output": {"format": self.out_format, "path": self.out_path,
                       "precision": self.precision},
            "seed": self.seed,
        }


@dataclass
class ResultTable:
    """Fixed-schema rows plus the configuration echo."""

    columns: tuple[str, ...]
    rows: list[tuple]
    config_echo: dict = field(default_factory=dict)
    failures: int = 0
    jobs: int = 0


def _parse_range(text: str) -> tuple[Fraction, Fraction]:
    text = str(text).strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return Fraction(lo.strip()), Fraction(hi.strip())
    val = Fraction(text)
    return val, val


def _parse_number_list(text) -> list[Fraction]:
    if isinstance(text, (list, tuple)):
        return [Fraction(str(x)) for x in text]
    parts = str(text).replace(",", " ").split()
    return [Fraction(p) for p in parts]


def _parse_complex(text) -> complex:
    if isinstance(text, (list, tuple)):
        vals = [float(x) for x in text]
    else:
        vals = [float(p) for p in str(text).replace(",", " ").split()]
    if len(vals) == 1:
        return complex(vals[0], 0.0)
    if len(vals) == 2:
        return complex(vals[0], vals[1])
    raise ValidationError("coupling g takes one or two numbers (re [im])")


def _blocks_from_text(text: str) -> dict[str, dict]:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON config: {exc}") from exc
        if not isinstance(data, dict):
            raise ParseError("JSON config must be one object")
        return {str(k): dict(v) for k, v in data.items()}
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParseError(f"invalid config: {exc}") from exc
    return {name: dict(parser.items(name)) for name in parser.sections()}


def parse_config(text: str) -> RunConfig:
    """Parse and validate one configuration document (INI-like or JSON)."""
    blocks = _blocks_from_text(text)
    for name, keys in blocks.items():
        if name not in _BLOCKS:
            raise ValidationError(f"unknown config block [{name}]")
        unknown = set(keys) - _BLOCKS[name]
        if unknown:
            raise ValidationError(
                f"unknown key(s) {sorted(unknown)} in block [{name}]")
    if "model" not in blocks:
        raise ValidationError("config needs a [model] block")
    mb = blocks["model"]
    if "family" not in mb:
        raise ValidationError("[model] needs a family")
    family = str(mb["family"]).strip()
    m = int(mb.get("m", 1))
    n = int(mb.get("n", 1))
    atoms = int(mb.get("atoms", 1))
    omegas = tuple(_parse_number_list(mb.get("omegas", "1")))
    epsilon = Fraction(str(mb.get("epsilon", 0)))
    g = _parse_complex(mb.get("g", "0"))

    sector_ranges: dict = {}
    sb = blocks.get("sector", {})
    for key in ("kappa", "s", "j"):
        if key in sb:
            sector_ranges[key] = _parse_range(sb[key])
    if "kappas" in sb:
        sector_ranges["kappas"] = tuple(
            int(x) for x in _parse_number_list(sb["kappas"]))

    meb = blocks.get("method", {})
    raw = meb.get("methods", "exact")
    methods = tuple(str(raw).replace(",", " ").split()
                    if not isinstance(raw, (list, tuple)) else [str(x) for x in raw])
    for meth in methods:
        if meth not in METHODS:
            raise ValidationError(f"unknown method {meth!r}")
    root_policy = str(meb.get("root_policy", "min-delta2"))
    if root_policy not in ROOT_POLICIES:
        raise ValidationError(f"unknown root policy {root_policy!r}")
    tol = float(meb.get("tol", 1e-10))
    ceiling = int(meb.get("truncation_ceiling", 2 ** 16))
    levels = int(meb.get("levels", 8))

    db = dict(blocks.get("dynamics", {}))
    dynamics = {
        "kind": str(db.get("kind", "bloch")),
        "variant": str(db.get("variant", "cmf")),
        "initial": str(db.get("initial", "pole")),
        "t_max": float(db.get("t_max", 10.0)),
        "samples": int(db.get("samples", 201)),
        "tol": float(db.get("tol", 1e-10)),
        "observable": str(db.get("observable", "v0")),
        "propagator": str(db.get("propagator", "exact")),
    }
    if dynamics["kind"] not in ("bloch", "quantum"):
        raise ValidationError("dynamics kind must be bloch or quantum")
    if dynamics["variant"] not in ("cq", "cmf", "linear"):
        raise ValidationError("dynamics variant must be cq, cmf or linear")
    if dynamics["propagator"] not in ("exact", "qa", "both"):
        raise ValidationError("propagator must be exact, qa or both")

    ob = blocks.get("output", {})
    out_format = str(ob.get("format", "csv"))
    if out_format not in ("csv", "json"):
        raise ValidationError("output format must be csv or json")
    out_path = ob.get("path")
    precision = int(ob.get("precision", 17))

    cfg = RunConfig(family, m, n, atoms, omegas, epsilon, g, sector_ranges,
                    methods, root_policy, tol, ceiling, levels, dynamics,
                    out_format, str(out_path) if out_path is not None else None,
                    precision)
    cfg.model()  # surface family invariants (e.g. n <= m) as ValidationError
    return cfg


def _bounds(cfg: RunConfig) -> dict:
    out = {}
    for key in ("kappa", "s", "j"):
        if key in cfg.sector_ranges:
            lo, hi = cfg.sector_ranges[key]
            out[key] = (lo, hi) if key == "j" else (int(lo), int(hi))
    return out


def _config_sectors(cfg: RunConfig):
    """(sector, labels, psi) jobs for the configured ranges."""
    from .catalog import _make_sector

    model = cfg.model()
    if cfg.family == "multimode" and "kappas" in cfg.sector_ranges:
        slo, shi = cfg.sector_ranges.get("s", (Fraction(0), Fraction(0)))
        jobs = []
        for s in range(int(slo), int(shi) + 1):
            labels = SectorLabels(kappas=cfg.sector_ranges["kappas"], s=s)
            psi = build_psi(model, labels)
            for sector in _make_sector(model, labels):
                jobs.append((sector, labels, psi))
        return model, jobs
    bounds = _bounds(cfg)
    if not bounds:
        raise ValidationError("the [sector] block selects no sectors")
    jobs = []
    for sector in enumerate_sectors(model, bounds):
        labels = labels_from_momenta(model, sector.labels)
        psi = build_psi(model, labels)
        jobs.append((sector, labels, psi))
    return model, jobs


SPECTRUM_COLUMNS = ("sector", "v", "method", "energy", "r_used",
                    "abs_err", "delta1", "delta2", "flag")


def cmd_spectrum(cfg: RunConfig, require_comparison: bool = False) -> ResultTable:
    """Exact and/or approximate ladders for every selected sector.

    Whenever an approximation is requested the exact spectrum is computed
    too and each approximate level gets its absolute error plus the two
    trace-error measures.  A failing sector contributes exactly one
    flagged row and leaves the others untouched.
    """
    methods = list(cfg.methods)
    approx = [meth for meth in methods if meth != "exact"]
    if require_comparison and not approx:
        raise ValidationError("compare needs at least one non-exact method")
    if approx and "exact" not in methods:
        methods.insert(0, "exact")
    model, jobs = _config_sectors(cfg)
    rows: list[tuple] = []
    failures = 0
    for sector, labels, psi in jobs:
        try:
            rows.extend(_sector_rows(cfg, model, sector, labels, psi, methods))
        except PolySL2Error as exc:
            failures += 1
            rows.append((sector.ref, None, "", None, None, None, None, None,
                         f"{type(exc).__name__}: {exc}"))
    return ResultTable(SPECTRUM_COLUMNS, rows, cfg.echo(), failures, len(jobs))


def _sector_rows(cfg, model, sector, labels, psi, methods):
    rows = []
    exact_sol = None
    if "exact" in methods or any(m != "exact" for m in methods):
        if sector.compact:
            exact_sol = diagonalize(assemble_block(sector, psi))
        else:
            exact_sol = truncated_spectrum(sector, psi, cfg.levels,
                                           tol=cfg.tol,
                                           ceiling=cfg.truncation_ceiling)
    if "exact" in methods:
        for v, energy in enumerate(exact_sol.energies):
            rows.append((sector.ref, v, "exact", float(energy), None, None,
                         None, None, None))
    phi = None
    if any(m in ("cq", "cmf", "linear") for m in methods):
        phi = phi_from_psi(psi, sector) if psi.degree >= 2 else None
    block = assemble_block(sector, psi) if sector.compact else None
    for meth in methods:
        if meth == "exact":
            continue
        try:
            if meth == "closed_form":
                cos2r, energies = closed_form_resonance(model, labels,
                                                        g_mod=sector.g_mod)
                r_used = math.acos(cos2r) / 2.0
                d1 = d2 = None
            else:
                if meth in ("cq", "cmf") and phi is None:
                    raise ValidationError(
                        f"{meth} needs a structure polynomial of degree >= 2")
                spec = variational_spectrum(sector, psi, phi, meth,
                                            cfg.root_policy)
                energies, r_used = spec.energies, spec.r_used
                if not sector.compact:
                    energies = energies[:cfg.levels]
                d1 = d2 = None
                if block is not None:
                    S = displacement_for(sector, r_used)
                    report = approx_error_report(
                        block, approx_hamiltonian(sector, spec, S), meth)
                    d1, d2 = report.delta1, report.delta2
            for v, energy in enumerate(np.asarray(energies)):
                err = None
                if exact_sol is not None and v < len(exact_sol.energies):
                    err = abs(float(energy) - float(exact_sol.energies[v]))
                rows.append((sector.ref, v, meth, float(energy), r_used, err,
                             d1, d2, None))
        except UnsupportedClosedForm as exc:
            rows.append((sector.ref, None, meth, None, None, None, None, None,
                         f"UnsupportedClosedForm: {exc}"))
    return rows


DYNAMICS_COLUMNS = ("sector", "kind", "t", "v1", "v2", "v3", "flag")


def cmd_dynamics(cfg: RunConfig) -> ResultTable:
    """Quasiclassical trajectories or quantum observable series.

    Bloch runs emit (t, y1, y2, y0) rows plus one drift summary row;
    quantum runs emit (t, <F>) rows per propagator source plus a maximum
    propagator-deviation row when both sources are requested.
    """
    model, jobs = _config_sectors(cfg)
    dyn = cfg.dynamics
    rows: list[tuple] = []
    failures = 0
    rng = np.random.default_rng(cfg.seed)
    for sector, labels, psi in jobs:
        try:
            if dyn["kind"] == "bloch":
                rows.extend(_bloch_rows(cfg, sector, psi, dyn, rng))
            else:
                rows.extend(_quantum_rows(cfg, model, sector, labels, psi, dyn))
        except PolySL2Error as exc:
            failures += 1
            rows.append((sector.ref, "error", None, None, None, None,
                         f"{type(exc).__name__}: {exc}"))
    return ResultTable(DYNAMICS_COLUMNS, rows, cfg.echo(), failures, len(jobs))


def _initial_bloch(spec: str, sector, rng) -> BlochState:
    J = float(sector.J)
    compact = sector.compact
    if spec == "pole":
        y = (0.0, 0.0, -J) if compact else (0.0, 0.0, J)
    elif spec == "random":
        if compact:
            z = rng.uniform(-J, J)
            q = rng.uniform(0, 2 * math.pi)
            rad = math.sqrt(max(J * J - z * z, 0.0))
            y = (rad * math.cos(q), rad * math.sin(q), z)
        else:
            z = J * (1.0 + rng.uniform(0.05, 1.0))
            q = rng.uniform(0, 2 * math.pi)
            rad = math.sqrt(z * z - J * J)
            y = (rad * math.cos(q), rad * math.sin(q), z)
    else:
        parts = [float(x) for x in spec.replace(",", " ").split()]
        if len(parts) != 3:
            raise ValidationError(
                "bloch initial must be 'pole', 'random' or 'y1 y2 y0'")
        y = tuple(parts)
    return BlochState(y, J, compact)


def _bloch_rows(cfg, sector, psi, dyn, rng):
    phi = phi_from_psi(psi, sector) if psi.degree >= 2 else None
    if phi is None and dyn["variant"] != "linear":
        raise ValidationError("nonlinear flow needs structure degree >= 2")
    rhs, energy = bloch_flow(sector, phi, dyn["variant"])
    state = _initial_bloch(dyn["initial"], sector, rng)
    traj = integrate(rhs, state, (0.0, dyn["t_max"]), tol=dyn["tol"],
                     n_samples=dyn["samples"], energy=energy)
    rows = []
    for t, s in zip(traj.times, traj.states):
        rows.append((sector.ref, "bloch", float(t), s.y[0], s.y[1], s.y[2],
                     traj.flag))
    rows.append((sector.ref, "drift", None, traj.casimir_drift,
                 traj.energy_drift, None, traj.flag))
    return rows


def _quantum_rows(cfg, model, sector, labels, psi, dyn):
    if not sector.compact:
        raise ValidationError("quantum dynamics drives compact sectors only")
    sol = diagonalize(assemble_block(sector, psi))
    times = np.linspace(0.0, dyn["t_max"], dyn["samples"])
    init = dyn["initial"]
    if init.startswith("basis:"):
        state = basis_state(sector.dim, int(init.split(":")[1]), sector.ref)
    elif init.startswith("displaced:"):
        _, v, r = init.split(":")
        state = displaced_state(displacement_for(sector, float(r)), int(v),
                                sector.ref)
    elif init.startswith("amps:"):
        pairs = [pair for pair in init[5:].split(";") if pair]
        amps = np.array([complex(*map(float, pair.split(","))) for pair in pairs])
        if amps.shape[0] != sector.dim:
            raise ValidationError(
                f"amps length {amps.shape[0]} vs sector dimension {sector.dim}")
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValidationError("amps must not be the zero vector")
        state = QuantumState(amps / norm, sector.ref)
    elif init == "pole":
        state = basis_state(sector.dim, 0, sector.ref)
    else:
        raise ValidationError(
            "quantum initial must be basis:<f>, displaced:<v>:<r>, "
            "amps:<re,im;...> or pole")
    try:
        fmat = model_observable(model, sector, dyn["observable"])
    except PolySL2Error as exc:
        raise ValidationError(str(exc)) from exc

    sources = {}
    if dyn["propagator"] in ("exact", "both"):
        sources["exact"] = lambda t: exact_propagator(sol, t)
    if dyn["propagator"] in ("qa", "both"):
        phi = phi_from_psi(psi, sector) if psi.degree >= 2 else None
        variant = dyn["variant"] if dyn["variant"] in ("cq", "cmf") else "cq"
        if phi is None:
            raise ValidationError("qa propagator needs structure degree >= 2")
        spec = variational_spectrum(sector, psi, phi, variant, cfg.root_policy)
        S = displacement_for(sector, spec.r_used)
        sources["qa"] = lambda t: qa_propagator(sector, spec, S, t)
    rows = []
    series = {}
    for name, prop in sources.items():
        out = observable_series(state, fmat, times, prop,
                                tag=f"{dyn['observable']}:{name}")
        series[name] = out
        for t, val in zip(out.times, out.values):
            rows.append((sector.ref, f"obs:{dyn['observable']}:{name}",
                         float(t), float(val), None, None, None))
    if len(sources) == 2:
        dev = max(float(np.max(np.abs(exact_propagator(sol, float(t))
                                      - sources["qa"](float(t)))))
                  for t in times)
        rows.append((sector.ref, "propagator-deviation", None, dev, None,
                     None, None))
    return rows


def cmd_compare(cfg: RunConfig) -> ResultTable:
    """Spectrum command with a mandatory exact-vs-approximate comparison."""
    return cmd_spectrum(cfg, require_comparison=True)


def cmd_sweep(cfg: RunConfig) -> ResultTable:
    """Spectrum command over label ranges (alias kept for scriptability)."""
    return cmd_spectrum(cfg)


# ---------------------------------------------------------------------------
# serialization


def _format_cell(value, precision: int) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.{precision}g}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def serialize(table: ResultTable, fmt: str, precision: int = 17) -> str:
    """Render a table as CSV (header + rows) or one JSON object."""
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(table.columns) + "\n")
        for row in table.rows:
            buf.write(",".join(_format_cell(c, precision).replace(",", ";")
                               for c in row) + "\n")
        return buf.getvalue()
    if fmt == "json":
        def clean(value):
            if isinstance(value, float) and math.isnan(value):
                return None
            if isinstance(value, (np.integer,)):
                return int(value)
            if isinstance(value, (np.floating,)):
                return float(value)
            return value

        payload = {
            "schema": list(table.columns),
            "config_echo": table.config_echo,
            "rows": [[clean(c) for c in row] for row in table.rows],
        }
        return json.dumps(payload, sort_keys=True, indent=1) + "\n"
    raise ValidationError(f"unknown output format {fmt!r}")


def write_output(table: ResultTable, fmt: str, path: str,
                 precision: int = 17) -> None:
    """Serialize a table to disk (UTF-8, LF line endings)."""
    text = serialize(table, fmt, precision)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path!r}: {exc}") from exc


def read_output(path: str):
    """Round-trip reader for both serialization formats."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path!r}: {exc}") from exc
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        return tuple(data["schema"]), [tuple(r) for r in data["rows"]]
    lines = text.splitlines()
    header = tuple(lines[0].split(","))
    rows = []
    for line in lines[1:]:
        cells = []
        for cell in line.split(","):
            if cell == "":
                cells.append(None)
                continue
            try:
                cells.append(float(cell))
            except ValueError:
                cells.append(cell)
        rows.append(tuple(cells))
    return header, rows
