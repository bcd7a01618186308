"""Result persistence: CSV tables, JSON manifests and SVG plots.

All writers are byte-deterministic: floats use ``repr``, JSON keys are sorted,
and SVG output has a fixed hash salt and no date stamp.
"""

from __future__ import annotations

import csv
import io
import json
import math
import platform
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import scipy  # noqa: E402

from .. import __version__  # noqa: E402
from ..forward import FarFieldPattern, ScatteringSolution, dumps_snapshot  # noqa: E402
from ..identity import corner_terms_csv  # noqa: E402

STABILITY_COLUMNS = ["d_H", "epsilon", "double_log_x"]
CORNER_COLUMNS = ["shape", "min_angle", "contrast", "norm", "flag"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def table_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def manifest(cfg, command: str) -> dict:
    return {
        "command": command,
        "config": cfg.echo(),
        "seed": cfg.seed,
        "versions": {
            "elastoscat": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "matplotlib": matplotlib.__version__,
            "python": platform.python_version(),
        },
    }


def _save_svg(fig, path: Path) -> None:
    with plt.rc_context({"svg.hashsalt": "elastoscat", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def far_field_svg(U: FarFieldPattern, path: Path) -> None:
    """Polar plot of ``|U_p|`` and ``|U_s|`` over the observation angle."""
    th = np.append(U.angles, U.angles[0] + 2 * math.pi)
    close = lambda a: np.append(a, a[0])  # noqa: E731
    fig = plt.figure(figsize=(5, 5))
    ax = fig.add_subplot(projection="polar")
    order = np.argsort(U.angles)
    th = close(U.angles[order])
    ax.plot(th, close(np.linalg.norm(U.U_p, axis=1)[order]), label="|U_p|")
    ax.plot(th, close(np.linalg.norm(U.U_s, axis=1)[order]), label="|U_s|")
    ax.legend(loc="upper right")
    _save_svg(fig, path)


def stability_svg(records, fit: dict, path: Path) -> None:
    """``log d_H`` against ``log ln ln(N/eps)`` with the fitted line."""
    pts = [(r.double_log_x, r.d_H) for r in records if math.isfinite(r.double_log_x) and r.d_H > 0]
    fig, ax = plt.subplots(figsize=(5, 4))
    if pts:
        x, y = np.array(pts).T
        ax.loglog(x, y, "o", label="family")
        if "gamma" in fit:
            xs = np.geomspace(x.min(), x.max(), 50)
            ax.loglog(xs, fit["C"] * xs ** -fit["gamma"], "-", label=f"fit gamma={fit['gamma']:.3g}")
    ax.set_xlabel("ln ln(N / eps)")
    ax.set_ylabel("d_H")
    ax.legend()
    _save_svg(fig, path)


def emit_outputs(results: dict, out_dir: str | Path) -> list[Path]:
    """Write every entry of ``results`` (``name -> str | bytes | (kind, payload)``) under ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out}: {e}") from e
    written = []
    for name in sorted(results):
        item = results[name]
        path = out / name
        if isinstance(item, tuple) and item[0] == "far_field_svg":
            far_field_svg(item[1], path)
        elif isinstance(item, tuple) and item[0] == "stability_svg":
            stability_svg(item[1], item[2], path)
        elif isinstance(item, bytes):
            path.write_bytes(item)
        else:
            path.write_text(item if isinstance(item, str) else dumps(item))
        written.append(path)
    return written


# result -> file maps -------------------------------------------------------


def stability_files(res, cfg) -> dict:
    rows = [{"d_H": r.d_H, "epsilon": r.epsilon, "double_log_x": r.double_log_x} for r in res.records]
    return {
        "stability.csv": table_csv(STABILITY_COLUMNS, rows),
        "fit.json": {"fit": res.fit, "rejected": res.rejected, "records": [{**r.meta, "d_H": r.d_H, "epsilon": r.epsilon} for r in res.records]},
        "stability.svg": ("stability_svg", res.records, res.fit),
        "manifest.json": manifest(cfg, "stability-exp"),
    }


def corner_files(res, cfg) -> dict:
    files = {
        "corner.csv": table_csv(CORNER_COLUMNS, res.rows),
        "corner.json": {"floor": res.floor, "control_norm": res.control_norm, "passed": res.passed, "rounded": res.rounded, "baseline": res.baseline},
        "farfield_square.csv": res.far_field.to_csv(),
        "farfield_square.svg": ("far_field_svg", res.far_field),
        "manifest.json": manifest(cfg, "corner-exp"),
    }
    if res.corner_terms:
        files["corner_terms.csv"] = corner_terms_csv(res.corner_terms)
    return files


def solve_files(sol: ScatteringSolution, cfg) -> dict:
    return {"solution.json": dumps_snapshot(sol) + "\n", "manifest.json": manifest(cfg, "solve"), "summary.json": {"residual_norm": sol.residual_norm, "n_unknowns": sol.meta.get("n_unknowns")}}


def farfield_files(U: FarFieldPattern, norm: float, cfg) -> dict:
    return {"farfield.csv": U.to_csv(), "farfield.svg": ("far_field_svg", U), "farfield.json": {"norm": norm, "M": U.M}, "manifest.json": manifest(cfg, "farfield")}


def betti_files(res, cfg) -> dict:
    rep = {k: [{"lhs": r.lhs, "rhs": r.rhs, "abs_residual": r.abs_residual, "rel_residual": r.rel_residual, **r.quadrature_meta} for r in v] for k, v in res.reports.items()}
    return {"betti.json": {"levels": res.levels, "reports": rep}, "manifest.json": manifest(cfg, "betti-check")}


def verify_files(summary: dict, cfg) -> dict:
    return {"verify.json": summary, "manifest.json": manifest(cfg, "verify")}
