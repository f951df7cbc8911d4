"""Render paper-style figures from wavesplit experiment CSV tables.

Strictly downstream of the CSV interface: the only coupling to the solver
package is the column schema.  Solid lines show errors against the exact
solution, dashed lines errors against the Crank-Nicolson reference;
unstable rows are dropped from the curves and flagged in the legend.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

KINDS = ("cfl", "convergence", "topology", "decay")

# columns each figure kind actually consumes
REQUIRED_COLUMNS = {
    "cfl": ("ell", "tau", "h_min"),
    "convergence": ("scheme", "tau", "err_exact", "err_vs_cn", "stable"),
    "topology": ("nx_sub", "ny_sub", "tau", "err_vs_cn", "stable"),
    "decay": ("lam", "delta", "ratio"),
}


class FigureError(ValueError):
    """Unusable figure specification or CSV content."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    csv_path: str
    out_path: str
    with_guides: bool = True

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise FigureError(f"unknown figure kind {self.kind!r}")


def load_rows(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise FigureError(f"{path}: empty file, not even a header")
        return list(reader)


def _check_columns(rows: list[dict], spec: FigureSpec) -> None:
    if not rows:
        return
    missing = [c for c in REQUIRED_COLUMNS[spec.kind] if c not in rows[0]]
    if missing:
        raise FigureError(
            f"{spec.csv_path}: kind '{spec.kind}' needs columns {missing} "
            f"but the CSV has {sorted(rows[0])}")


def _num(row: dict, key: str) -> float:
    val = row.get(key, "")
    return float(val) if val not in ("", None) else math.nan


def _is_stable(row: dict) -> bool:
    return row.get("stable", "true") == "true"


def extract_series(rows: list[dict], spec: FigureSpec) -> dict:
    """Plottable data grouped per curve; pure function of the CSV rows."""
    kind = spec.kind
    if kind == "cfl":
        pts = sorted((_num(r, "ell") * _num(r, "h_min"), _num(r, "tau"), _num(r, "h_min"))
                     for r in rows if _is_stable(r))
        return {"x": [p[0] for p in pts], "tau_max": [p[1] for p in pts],
                "h_min": pts[0][2] if pts else math.nan}

    if kind == "decay":
        series: dict = {}
        for r in rows:
            series.setdefault(_num(r, "lam"), []).append(
                (_num(r, "delta"), _num(r, "ratio")))
        return {lam: sorted(v) for lam, v in sorted(series.items())}

    if kind == "topology":
        series = {}
        dropped = 0
        for r in rows:
            if not _is_stable(r):
                dropped += 1
                continue
            key = f"{int(_num(r, 'nx_sub'))}x{int(_num(r, 'ny_sub'))}"
            series.setdefault(key, []).append((_num(r, "tau"), _num(r, "err_vs_cn")))
        return {"series": {k: sorted(v) for k, v in sorted(series.items())},
                "dropped": dropped}

    solid: dict = {}
    dashed: dict = {}
    dropped = 0
    for r in rows:
        scheme = r["scheme"]
        if not _is_stable(r):
            dropped += 1
            continue
        solid.setdefault(scheme, []).append((_num(r, "tau"), _num(r, "err_exact")))
        if scheme != "cn" and not math.isnan(_num(r, "err_vs_cn")):
            dashed.setdefault(scheme, []).append((_num(r, "tau"), _num(r, "err_vs_cn")))
    return {"solid": {k: sorted(v) for k, v in sorted(solid.items())},
            "dashed": {k: sorted(v) for k, v in sorted(dashed.items())},
            "dropped": dropped}


def render(spec: FigureSpec) -> dict:
    """Write the figure for ``spec``; returns the plotted series data."""
    spec.validate()
    rows = load_rows(spec.csv_path)
    _check_columns(rows, spec)
    data = extract_series(rows, spec)

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    try:
        if not rows:
            warnings.warn(f"{spec.csv_path}: no data rows, writing empty axes")
            ax.set_title("no data")
        elif spec.kind == "cfl":
            _draw_cfl(ax, data, spec)
        elif spec.kind == "decay":
            _draw_decay(ax, data)
        elif spec.kind == "topology":
            _draw_topology(ax, data)
        else:
            _draw_convergence(ax, data, spec)
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(spec.out_path)
    finally:
        plt.close(fig)
    return data


def _note_dropped(ax, n: int) -> None:
    if n:
        ax.plot([], [], " ", label=f"{n} unstable point(s) omitted")


def _draw_cfl(ax, data, spec) -> None:
    ax.plot(data["x"], data["tau_max"], "o", label=r"measured $\tau_{\max}$")
    if spec.with_guides and data["x"]:
        ax.plot(data["x"], [0.577 * v for v in data["x"]], ":", color="gray",
                label=r"$0.577\,h_{\min}\,\ell$")
    ax.set_xlabel(r"$h_{\min}\,\ell$")
    ax.set_ylabel(r"$\tau_{\max}$")
    ax.legend()


def _draw_convergence(ax, data, spec) -> None:
    for scheme, pts in data["solid"].items():
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], "o-",
                  label=f"{scheme} vs exact")
    for scheme, pts in data["dashed"].items():
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], "s--", alpha=0.6,
                  label=f"{scheme} vs cn")
    if spec.with_guides:
        taus = [p[0] for pts in data["solid"].values() for p in pts]
        errs = [p[1] for pts in data["solid"].values() for p in pts]
        if taus:
            t0, t1 = min(taus), max(taus)
            anchor = max(errs)
            ax.loglog([t0, t1], [anchor * (t0 / t1) ** 2, anchor], ":",
                      color="gray", label=r"$O(\tau^2)$")
    _note_dropped(ax, data["dropped"])
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel(r"$H_0^1 \times L^2$ error")
    ax.legend()


def _draw_topology(ax, data) -> None:
    for key, pts in data["series"].items():
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], "s--",
                  label=f"ds {key} vs cn")
    _note_dropped(ax, data["dropped"])
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel("distance to cn")
    ax.legend()


def _draw_decay(ax, data) -> None:
    for lam, pts in data.items():
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], "o-",
                    label=rf"$\lambda = {lam:.4g}$")
    ax.set_xlabel(r"overlap width $\delta$")
    ax.set_ylabel("b-norm ratio")
    ax.legend()
