"""Command-line interface.

Subcommands: ``greens``, ``modes``, ``branches``, ``asym``, ``dispersion``,
``bracket``, ``oracle`` and ``reproduce``. JSON output is wrapped as
``{"schema": "latdefect/<name>/v1", "data": ...}``; CSV output has a header
row and 12 significant digits. Exit status is 0 on success, 1 on usage or
parameter errors and 2 on numerical failure.

Options may also come from a flat ``key = value`` file given with
``--config``; command-line flags take precedence over the file, which takes
precedence over the built-in defaults.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, NumericalError

SCHEMA_PREFIX = "latdefect"
SCHEMA_DIR = Path(__file__).with_name("schemas")
FIGURES = ("fig3a", "fig3b", "fig3c", "fig4", "fig5", "fig6", "fig7", "fig8", "appA")

DEFAULTS = {
    "rep": "auto",
    "window": "5,5",
    "mode_index": 1,
    "steps": 200,
    "samples": 512,
    "L": 20,
    "column": 0,
    "format": "json",
    "outdir": "reproduce_out",
}


class UsageError(Exception):
    """Invalid command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# Formatting helpers


def fmt(x) -> str:
    """Format a number with 12 significant digits."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    return buf.getvalue()


def json_text(name: str, data) -> str:
    return json.dumps({"schema": f"{SCHEMA_PREFIX}/{name}/v1", "data": data}, indent=2, sort_keys=True) + "\n"


def load_schema(name: str) -> dict:
    """Shipped JSON schema for output kind ``name``."""
    return json.loads((SCHEMA_DIR / f"{name}.v1.json").read_text())


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


# ---------------------------------------------------------------------------
# Report type


@dataclass
class ModeReport:
    """Modes of one defect configuration with band bracket and provenance."""

    n_defects: int
    mass_ratio: float
    modes: list
    band: tuple
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": {"n": self.n_defects, "r": self.mass_ratio},
            "modes": [m.to_dict() for m in self.modes],
            "band": [float(self.band[0]), float(self.band[1])],
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModeReport":
        from .modes import ModeSolution

        return cls(
            n_defects=int(data["config"]["n"]),
            mass_ratio=float(data["config"]["r"]),
            modes=[ModeSolution.from_dict(m) for m in data["modes"]],
            band=tuple(data["band"]),
            provenance=dict(data["provenance"]),
        )

    def __eq__(self, other):
        return isinstance(other, ModeReport) and self.to_dict() == other.to_dict()


def _provenance():
    return {
        "tool": "latdefect",
        "version": __version__,
        "tolerances": {
            "root_width_omega": 1e-10,
            "greens_abs": 1e-10,
            "series_rel_tol": 1e-13,
            "residual_max": 1e-8,
        },
    }


def mode_report(n: int, r: float) -> ModeReport:
    from .modes import DefectConfig, find_modes
    from .waveguide import standing_wave_frequencies

    cfg = DefectConfig(n, r)
    return ModeReport(n, r, find_modes(cfg), standing_wave_frequencies(r), _provenance())


# ---------------------------------------------------------------------------
# Subcommands


def _pair(text, kind=int):
    parts = str(text).split(",")
    if len(parts) != 2:
        raise UsageError(f"expected two comma-separated values, got {text!r}")
    return kind(parts[0]), kind(parts[1])


def _config(args):
    from .modes import DefectConfig

    return DefectConfig(int(args.n), float(args.r))


def _pick_mode(args, cfg):
    from .modes import find_modes

    modes = find_modes(cfg)
    i = int(args.mode_index)
    if not (1 <= i <= len(modes)):
        raise DomainError(f"mode index {i} out of range 1..{len(modes)}")
    return modes[i - 1]


def cmd_greens(args):
    from . import greens as gr

    f = gr.FrequencyPoint.from_omega2(float(args.omega2))
    reps = {
        "auto": lambda ix: gr.greens_auto(ix, f),
        "double": lambda ix: gr.greens_double_integral(ix, f),
        "single": lambda ix: gr.greens_single_integral(ix, f),
        "bessel": lambda ix: gr.greens_bessel_integral(ix, f),
        "hyper": lambda ix: gr.greens_hypergeometric(ix, f),
    }
    if args.rep not in reps:
        raise UsageError(f"--rep must be one of {', '.join(reps)}")
    fn = reps[args.rep]
    if args.max_index is not None:
        k = int(args.max_index)
        rows = [(str(m), str(n), fn((m, n))) for m in range(k + 1) for n in range(k + 1)]
        return csv_text(["m", "n2", "value"], rows)
    if args.m is None or args.n2 is None:
        raise UsageError("greens needs --m and --n2, or --max-index for a batch table")
    return f"{fn((int(args.m), int(args.n2))):.17g}\n"


def cmd_modes(args):
    from .modes import reconstruct_field

    cfg = _config(args)
    if args.field:
        mode = _pick_mode(args, cfg)
        grid = reconstruct_field(cfg, mode, _pair(args.window))
        rows = [
            (str(int(a)), str(int(b)), grid.values[i, j])
            for i, a in enumerate(grid.n1)
            for j, b in enumerate(grid.n2)
        ]
        return csv_text(["n1", "n2", "u"], rows)
    report = mode_report(cfg.n_defects, cfg.mass_ratio)
    if args.format == "csv":
        rows = [(m.omega, m.symmetry, str(m.branch_index), m.residual) for m in report.modes]
        return csv_text(["omega", "symmetry", "branch", "residual"], rows)
    return json_text("modes", report.to_dict())


def _omega2_grid(lo, hi, steps):
    return np.linspace(float(lo), float(hi), int(steps))


def cmd_branches(args):
    from .greens import FrequencyPoint
    from .modes import r_of_omega_branches

    if args.omega2_min is None or args.omega2_max is None:
        raise UsageError("branches needs --omega2-min and --omega2-max")
    grid = [FrequencyPoint.from_omega2(w2) for w2 in _omega2_grid(args.omega2_min, args.omega2_max, args.steps)]
    table = r_of_omega_branches(int(args.n), grid)
    rows = []
    for k, w in enumerate(table.omega):
        for i in range(table.r.shape[1]):
            if not math.isnan(table.r[k, i]):
                rows.append((w, str(i + 1), table.r[k, i]))
    return csv_text(["omega", "branch", "r"], rows)


def asym_rows(cfg, mode, kind, lo, hi, column=0, corrected=False):
    """Rows ``(index, exact, asymptotic, rel_err)`` for the ``asym`` command."""
    from .asymptotics import field_band_edge, field_far_parallel, field_far_perpendicular
    from .modes import field_values

    n = cfg.n_defects
    rows = []
    for idx in range(int(lo), int(hi) + 1):
        if kind == "parallel":
            exact = field_values(cfg, mode, [(idx, 0)])[0]
            approx = field_far_parallel(cfg, mode, idx, corrected=corrected)
        elif kind == "perp":
            exact = field_values(cfg, mode, [(column, idx)])[0]
            approx = field_far_perpendicular(cfg, mode, column, idx, corrected=corrected)
        elif kind == "edge-bond":
            exact = field_values(cfg, mode, [(n - 1 + idx, 0)])[0]
            approx = field_band_edge(cfg, mode, "bond", idx)
        elif kind == "edge-diag":
            exact = field_values(cfg, mode, [(n - 1 + idx, idx)])[0]
            approx = field_band_edge(cfg, mode, "diag", idx)
        else:
            raise UsageError("--kind must be parallel, perp, edge-bond or edge-diag")
        rel = abs(approx - exact) / abs(exact) if exact != 0 else float("nan")
        rows.append((str(idx), exact, approx, rel))
    return rows


def cmd_asym(args):
    cfg = _config(args)
    mode = _pick_mode(args, cfg)
    if args.range is None:
        raise UsageError("asym needs --range a,b")
    lo, hi = _pair(args.range)
    rows = asym_rows(cfg, mode, args.kind, lo, hi, int(args.column), bool(args.corrected))
    return csv_text(["index", "exact", "asymptotic", "rel_err"], rows)


def dispersion_rows(r, samples):
    from .waveguide import dispersion_sweep

    return [(s.kappa, s.omega_minus, s.lam) for s in dispersion_sweep(float(r), int(samples))]


def cmd_dispersion(args):
    from .waveguide import skew_symmetric_waveguide_solution

    skew = skew_symmetric_waveguide_solution()
    text = csv_text(["kappa", "omega", "lambda"], dispersion_rows(args.r, args.samples))
    print(f"# skew-symmetric family: {skew['solution']} solution", file=sys.stderr)
    return text


def cmd_bracket(args):
    from .waveguide import finite_vs_infinite_bracket

    report = finite_vs_infinite_bracket(int(args.n), float(args.r))
    return json_text("bracket", report.to_dict())


def cmd_oracle(args):
    from .oracle import TruncatedLattice, truncated_spectrum

    r = float(args.r)
    if not (0.0 < r <= 1.0):
        raise DomainError("r must lie in (0, 1]")
    lat = TruncatedLattice(int(args.L), int(args.n), r)
    modes = truncated_spectrum(lat)
    return json_text("oracle", [{"omega": m.omega, "score": m.score} for m in modes])


def cmd_reproduce(args):
    from .reproduce import reproduce

    figures = FIGURES if args.figure == "all" else (args.figure,)
    for name in figures:
        if name not in FIGURES:
            raise UsageError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)} or all")
    written = []
    for name in figures:
        written.extend(reproduce(name, Path(args.outdir)))
    return "".join(f"{p}\n" for p in written)


COMMANDS = {
    "greens": cmd_greens,
    "modes": cmd_modes,
    "branches": cmd_branches,
    "asym": cmd_asym,
    "dispersion": cmd_dispersion,
    "bracket": cmd_bracket,
    "oracle": cmd_oracle,
    "reproduce": cmd_reproduce,
}

REQUIRED = {
    "greens": ("omega2",),
    "modes": ("n", "r"),
    "branches": ("n",),
    "asym": ("kind", "n", "r"),
    "dispersion": ("r",),
    "bracket": ("n", "r"),
    "oracle": ("n", "r"),
    "reproduce": ("figure",),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="latdefect", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"latdefect {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    parser.subcommand_parsers = {}

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        parser.subcommand_parsers[name] = p
        p.add_argument("--config", default=None, help="flat key = value option file")
        p.add_argument("--output", "-o", default=None, help="write to this file instead of stdout")
        return p

    p = add("greens", "Green's function values")
    p.add_argument("--omega2", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--rep", choices=["auto", "double", "single", "bessel", "hyper"])
    p.add_argument("--max-index", type=int, help="emit a CSV table for 0 <= m, n2 <= K")

    p = add("modes", "localized modes of a finite defect")
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=float)
    p.add_argument("--field", action="store_true", default=None)
    p.add_argument("--mode-index", type=int)
    p.add_argument("--window")
    p.add_argument("--format", choices=["json", "csv"])

    p = add("branches", "branch curves r_{N,i}(omega)")
    p.add_argument("--n", type=int)
    p.add_argument("--omega2-min", type=float)
    p.add_argument("--omega2-max", type=float)
    p.add_argument("--steps", type=int)

    p = add("asym", "asymptotic fields against exact fields")
    p.add_argument("--kind", choices=["parallel", "perp", "edge-bond", "edge-diag"])
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=float)
    p.add_argument("--range")
    p.add_argument("--mode-index", type=int)
    p.add_argument("--column", type=int, help="column p' for --kind perp")
    p.add_argument("--corrected", action="store_true", default=None, help="add the next-order far-field factor")

    p = add("dispersion", "infinite-defect dispersion curve")
    p.add_argument("--r", type=float)
    p.add_argument("--samples", type=int)

    p = add("bracket", "finite frequencies against the infinite-defect band")
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=float)

    p = add("oracle", "truncated-lattice eigenfrequencies")
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=float)
    p.add_argument("--L", type=int)

    p = add("reproduce", "regenerate figure data")
    p.add_argument("--figure", help=f"one of {', '.join(FIGURES)} or all")
    p.add_argument("--outdir")
    return parser


_CASTS = {"n": int, "r": float, "m": int, "n2": int, "omega2": float, "mode_index": int, "steps": int,
          "samples": int, "L": int, "column": int, "omega2_min": float, "omega2_max": float,
          "max_index": int}


def _resolve(args):
    """Fill unset options from the config file, then from the defaults."""
    file_values = read_config(args.config) if args.config else {}
    for key in vars(args):
        if key in ("command", "config", "output"):
            continue
        if getattr(args, key) is None:
            if key in file_values:
                raw = file_values[key]
                if key in ("field", "corrected"):
                    value = raw.lower() in ("1", "true", "yes")
                else:
                    value = _CASTS.get(key, str)(raw)
                setattr(args, key, value)
            elif key in DEFAULTS:
                setattr(args, key, DEFAULTS[key])
    for flag in ("field", "corrected"):
        if getattr(args, flag, "absent") is None:
            setattr(args, flag, False)
    missing = [k for k in REQUIRED[args.command] if getattr(args, k, None) is None]
    if missing:
        raise UsageError(f"{args.command}: missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def main(argv=None) -> int:
    """Run the command line; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage() + "latdefect: error: a subcommand is required")
        _resolve(args)
        text = COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        # list the valid flags of the subcommand that was attempted
        chosen = next((a for a in (argv if argv is not None else sys.argv[1:]) if a in parser.subcommand_parsers), None)
        if chosen is not None:
            print(parser.subcommand_parsers[chosen].format_help(), file=sys.stderr, end="")
        return 1
    except (DomainError, ValueError) as exc:
        print(f"latdefect: invalid parameter: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"latdefect: numerical failure: {exc}", file=sys.stderr)
        return 2
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def entry_point():  # pragma: no cover - console script shim
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    entry_point()
