"""Plot-ready data behind each figure.

Each figure writes CSV and JSON files into ``<outdir>/<figure>/`` and
records them in ``<outdir>/manifest.json``. Data files are deterministic;
the manifest carries the only timestamp.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError

__all__ = ["reproduce", "FIGURE_BUILDERS"]


def _csv(path: Path, header, rows) -> Path:
    from .cli import csv_text

    path.write_text(csv_text(header, rows), newline="\n")
    return path


def _json(path: Path, name: str, data) -> Path:
    from .cli import json_text

    path.write_text(json_text(name, data), newline="\n")
    return path


def _opt(fn, *args):
    """Value of ``fn(*args)`` or ``None`` outside its domain of validity."""
    try:
        return fn(*args)
    except DomainError:
        return None


def _branch_figure(n: int, out: Path):
    from .greens import FrequencyPoint
    from .modes import isolated_chain_r, r_of_omega_branches

    # geometric clustering near the band edge, where the branches rise fastest
    w2 = np.concatenate([8.0 + np.geomspace(1e-6, 1.0, 60)[:-1], np.linspace(9.0, 64.0, 111)])
    table = r_of_omega_branches(n, [FrequencyPoint.from_omega2(v) for v in w2])
    rows = [
        (w, str(i + 1), table.r[k, i])
        for k, w in enumerate(table.omega)
        for i in range(n)
        if not math.isnan(table.r[k, i])
    ]
    iso = [
        (w, str(j + 1), rs)
        for w in table.omega
        for j, rs in enumerate(isolated_chain_r(n, float(w)))
        if 0.0 < rs < 1.0
    ]
    return [
        _csv(out / "branches.csv", ["omega", "branch", "r"], rows),
        _csv(out / "isolated_chain.csv", ["omega", "branch", "r_star"], iso),
    ]


def _field_grid_csv(cfg, mode, window, path):
    from .modes import reconstruct_field

    grid = reconstruct_field(cfg, mode, window)
    rows = [
        (str(int(a)), str(int(b)), grid.values[i, j])
        for i, a in enumerate(grid.n1)
        for j, b in enumerate(grid.n2)
    ]
    return _csv(path, ["n1", "n2", "u"], rows)


def _row_line(cfg, mode, lo, hi, path, band_edge=False):
    from .asymptotics import field_band_edge, field_far_parallel
    from .modes import field_values

    idx = list(range(lo, hi + 1))
    exact = field_values(cfg, mode, [(i, 0) for i in idx])
    n = cfg.n_defects
    rows = []
    for i, u in zip(idx, exact):
        far = _opt(field_far_parallel, cfg, mode, i) if i >= n else None
        row = [str(i), u, far]
        if band_edge:
            k = i - (n - 1)
            row.append(_opt(field_band_edge, cfg, mode, "bond", k) if k >= 0 else None)
        rows.append(row)
    header = ["n1", "exact", "far_field"] + (["band_edge"] if band_edge else [])
    return _csv(path, header, rows)


def _column_line(cfg, mode, column, hi, path):
    from .asymptotics import field_far_perpendicular
    from .modes import field_values

    idx = list(range(-hi, hi + 1))
    exact = field_values(cfg, mode, [(column, j) for j in idx])
    rows = [(str(j), u, _opt(field_far_perpendicular, cfg, mode, column, j)) for j, u in zip(idx, exact)]
    return _csv(path, ["n2", "exact", "far_field"], rows)


def _modes_json(cfg, modes, path):
    from .cli import ModeReport, _provenance
    from .waveguide import standing_wave_frequencies

    report = ModeReport(cfg.n_defects, cfg.mass_ratio, modes, standing_wave_frequencies(cfg.mass_ratio), _provenance())
    return _json(path, "modes", report.to_dict())


def fig3a(out):
    return _branch_figure(1, out)


def fig3b(out):
    return _branch_figure(2, out)


def fig3c(out):
    return _branch_figure(3, out)


def fig4(out):
    from .asymptotics import field_band_edge
    from .modes import DefectConfig, field_values, find_modes

    cfg = DefectConfig(1, 0.8)
    modes = find_modes(cfg)
    mode = modes[0]
    files = [
        _modes_json(cfg, modes, out / "modes.json"),
        _field_grid_csv(cfg, mode, (10, 10), out / "field.csv"),
        _row_line(cfg, mode, 0, 30, out / "line_n2_0.csv"),
    ]
    for ray in ("diag", "bond"):
        ks = list(range(0, 13))
        pts = [(k, k) if ray == "diag" else (k, 0) for k in ks]
        exact = field_values(cfg, mode, pts)
        rows = [(str(k), u, field_band_edge(cfg, mode, ray, k)) for k, u in zip(ks, exact)]
        files.append(_csv(out / f"band_edge_{ray}.csv", ["k", "exact", "band_edge"], rows))
    return files


def fig5(out):
    from .modes import DefectConfig, find_modes

    cfg = DefectConfig(2, 0.49)
    modes = find_modes(cfg)
    files = [_modes_json(cfg, modes, out / "modes.json")]
    for i, mode in enumerate(modes, 1):
        files.append(_field_grid_csv(cfg, mode, (10, 10), out / f"mode{i}_field.csv"))
        files.append(_row_line(cfg, mode, -30, 31, out / f"mode{i}_line_n2_0.csv", band_edge=(i == 1)))
        files.append(_column_line(cfg, mode, 0, 30, out / f"mode{i}_line_n1_0.csv"))
    return files


def fig6(out):
    from .waveguide import dispersion_sweep

    files = []
    for r in (0.05, 0.25, 0.5, 0.75):
        rows = [
            (s.kappa / math.pi, s.omega_minus, s.lam, s.omega1, s.omega2)
            for s in dispersion_sweep(r, 256)
        ]
        files.append(
            _csv(out / f"dispersion_r{r:g}.csv", ["kappa_over_pi", "omega", "lambda", "omega1", "omega2"], rows)
        )
    return files


def fig7(out):
    from .waveguide import finite_vs_infinite_bracket

    report = finite_vs_infinite_bracket(20, 0.25)
    rows = [(str(i + 1), w) for i, w in enumerate(report.omegas)]
    return [
        _json(out / "bracket.json", "bracket", report.to_dict()),
        _csv(out / "eigenfrequencies.csv", ["index", "omega"], rows),
    ]


def fig8(out):
    from .modes import DefectConfig, find_modes
    from .waveguide import envelope

    cfg = DefectConfig(20, 0.25)
    modes = sorted(find_modes(cfg), key=lambda m: m.omega)
    lo, hi = modes[0], modes[-1]
    env = envelope(20, 0.25, lo.omega, q=1)
    u_lo = np.asarray(lo.eigenvector)
    u_hi = np.asarray(hi.eigenvector)
    # sign convention: in-phase mode positive at the centre
    u_lo = u_lo * np.sign(u_lo[len(u_lo) // 2])
    u_hi = u_hi * np.sign(u_hi[0]) if u_hi[0] != 0 else u_hi
    rows = [(str(p), u_lo[p], u_hi[p], env.profile[p]) for p in range(20)]
    meta = {
        "omega_min": lo.omega,
        "omega_max": hi.omega,
        "lambda_est": env.lambda_est,
        "q": env.mode_number_q,
        "wavenumber": env.wavenumber,
    }
    return [
        _csv(out / "extreme_modes.csv", ["p", "u_min", "u_max", "envelope"], rows),
        _json(out / "envelope.json", "envelope", meta),
    ]


def appA(out):
    from .modes import DefectConfig, find_modes

    cfg = DefectConfig(3, 0.4)
    modes = find_modes(cfg)
    files = [_modes_json(cfg, modes, out / "modes.json")]
    for i, mode in enumerate(modes, 1):
        files.append(_field_grid_csv(cfg, mode, (10, 10), out / f"mode{i}_field.csv"))
        files.append(_row_line(cfg, mode, -30, 32, out / f"mode{i}_line_n2_0.csv"))
        files.append(_column_line(cfg, mode, 1, 30, out / f"mode{i}_line_n1_1.csv"))
    return files


FIGURE_BUILDERS = {
    "fig3a": fig3a,
    "fig3b": fig3b,
    "fig3c": fig3c,
    "fig4": fig4,
    "fig5": fig5,
    "fig6": fig6,
    "fig7": fig7,
    "fig8": fig8,
    "appA": appA,
}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def reproduce(figure: str, outdir) -> list:
    """Write the data files of ``figure`` and update the manifest.

    Returns
    -------
    list of Path
        Files written, manifest last.
    """
    if figure not in FIGURE_BUILDERS:
        raise DomainError(f"unknown figure {figure!r}")
    outdir = Path(outdir)
    target = outdir / figure
    target.mkdir(parents=True, exist_ok=True)
    files = FIGURE_BUILDERS[figure](target)
    manifest_path = outdir / "manifest.json"
    manifest = {"schema": "latdefect/manifest/v1", "data": {"figures": {}}}
    if manifest_path.exists():
        try:
            old = json.loads(manifest_path.read_text())
            if old.get("schema") == manifest["schema"]:
                manifest = old
        except json.JSONDecodeError:
            pass
    data = manifest["data"]
    data["tool"] = "latdefect"
    data["version"] = __version__
    data["generated"] = dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")
    data["figures"][figure] = [
        {"path": str(p.relative_to(outdir)), "sha256": _sha256(p)} for p in files
    ]
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", newline="\n")
    return files + [manifest_path]
