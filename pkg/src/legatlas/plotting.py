"""Mountain-range pictures: classes as dots on the (r, tb) plane."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_SIGN_COLOR = {"+": "tab:red", "-": "tab:blue"}


def _positions(records) -> dict:
    """Spread classes sharing a (r, tb) cell sideways."""
    cells: dict = {}
    for rec in records:
        cells.setdefault((rec.r, rec.tb), []).append(rec)
    pos = {}
    for (r, tb), recs in cells.items():
        k = len(recs)
        for i, rec in enumerate(sorted(recs, key=lambda rc: rc.id)):
            pos[rec.id] = (r + (i - (k - 1) / 2) * 0.18, tb)
    return pos


def plot_mountain_range(records, title: str, path) -> None:
    records = list(records)
    pos = _positions(records)
    by_id = {rec.id: rec for rec in records}
    fig, ax = plt.subplots(figsize=(5, 4))
    for rec in records:
        for pid in rec.parents:
            if pid not in by_id:
                continue
            (x0, y0), (x1, y1) = pos[pid], pos[rec.id]
            sign = "+" if rec.r > by_id[pid].r else "-"
            ax.annotate(
                "",
                xy=(x1, y1),
                xytext=(x0, y0),
                arrowprops={"arrowstyle": "->", "color": _SIGN_COLOR[sign], "lw": 0.8, "shrinkA": 4, "shrinkB": 4},
            )
    if records:
        xs, ys = zip(*(pos[rec.id] for rec in records))
        ax.scatter(xs, ys, s=30, color="black", zorder=3)
        for rec in records:
            x, y = pos[rec.id]
            ax.annotate(rec.id, (x, y), textcoords="offset points", xytext=(4, 4), fontsize=6)
        rs = [rec.r for rec in records]
        tbs = [rec.tb for rec in records]
        ax.set_xlim(min(rs) - 1, max(rs) + 1)
        ax.set_ylim(min(tbs) - 0.7, max(tbs) + 0.7)
        ax.set_yticks(range(min(tbs), max(tbs) + 1))
        ax.set_xticks(range(min(rs) - 1, max(rs) + 2))
    ax.set_xlabel("r")
    ax.set_ylabel("tb")
    ax.set_title(title)
    ax.grid(True, lw=0.3, alpha=0.5)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
