"""Figure rendering for experiment tables.

Each renderer takes the CsvTable produced by a runner and writes one PNG
next to the delimited output.  Rendering is headless (Agg backend) and never
affects the CSV bytes.
"""

from __future__ import annotations

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .experiments import CsvTable

_COLORS = {"ryu": "tab:blue", "mt": "tab:orange", "campoy": "tab:green", "pocs": "tab:red"}


def _series(table: CsvTable, key_cols: tuple[str, ...], x_col: str, y_col: str):
    """Group rows into {key: (xs, {stat: ys})} keyed by the named columns."""
    idx = {name: i for i, name in enumerate(table.header)}
    grouped: dict[tuple, dict[float, dict[str, float]]] = defaultdict(lambda: defaultdict(dict))
    for row in table.rows:
        key = tuple(row[idx[c]] for c in key_cols)
        x = float(row[idx[x_col]])
        grouped[key][x][row[idx["stat"]]] = float(row[idx[y_col]])
    out = {}
    for key, by_x in grouped.items():
        xs = sorted(by_x)
        out[key] = (xs, {stat: [by_x[x][stat] for x in xs] for stat in ("median", "min", "max")})
    return out


def _band_plot(ax, series, x_label: str, y_label: str, log_y: bool = False) -> None:
    for key in sorted(series):
        xs, stats = series[key]
        label = key[0]
        color = _COLORS.get(label, None)
        ax.plot(xs, stats["median"], label=label, color=color)
        ax.fill_between(xs, stats["min"], stats["max"], alpha=0.2, color=color)
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.legend(fontsize="small")


def render_exp1(table: CsvTable, path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.2))
    _band_plot(axes[0], _series(table, ("algorithm",), "lambda", "spectral_radius"),
               "relaxation", "spectral radius")
    _band_plot(axes[1], _series(table, ("algorithm",), "lambda", "operator_norm"),
               "relaxation", "operator norm")
    for ax in axes:
        ax.axhline(1.0, color="gray", lw=0.6, ls=":")
    fig.suptitle("Rate bounds of the relaxed operators (median and range)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _split_by_sequence(table: CsvTable, x_col: str, y_col: str):
    idx = {name: i for i, name in enumerate(table.header)}
    out = {}
    for sequence in ("governing", "shadow"):
        sub_rows = tuple(r for r in table.rows if r[idx["sequence"]] == sequence)
        sub = CsvTable(header=table.header, rows=sub_rows)
        out[sequence] = _series(sub, ("algorithm",), x_col, y_col)
    return out


def render_exp2(table: CsvTable, path) -> None:
    by_seq = _split_by_sequence(table, "lambda", "iterations")
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.2), sharey=True)
    for ax, sequence in zip(axes, ("governing", "shadow")):
        _band_plot(ax, by_seq[sequence], "relaxation", "iterations to accuracy", log_y=True)
        ax.set_title(f"{sequence} sequence")
    fig.suptitle("Iterations to reach accuracy (median and range)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_exp3(table: CsvTable, path) -> None:
    by_seq = _split_by_sequence(table, "k", "distance")
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.2), sharey=True)
    for ax, sequence in zip(axes, ("governing", "shadow")):
        _band_plot(ax, by_seq[sequence], "iteration", "distance to limit", log_y=True)
        ax.set_title(f"{sequence} sequence")
    fig.suptitle("Error decay at tuned relaxation values (median and range)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_three_lines(table: CsvTable, path) -> None:
    idx = {name: i for i, name in enumerate(table.header)}
    by_alg: dict[str, dict[float, list[tuple[float, float, float]]]] = defaultdict(
        lambda: defaultdict(list)
    )
    for row in table.rows:
        by_alg[row[idx["algorithm"]]][float(row[idx["theta"]])].append(
            (float(row[idx["lambda"]]), float(row[idx["spectral_radius"]]),
             float(row[idx["operator_norm"]]))
        )
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.2))
    for alg in sorted(by_alg):
        color = _COLORS.get(alg, None)
        thetas = sorted(by_alg[alg])
        for i, theta in enumerate(thetas):
            pts = sorted(by_alg[alg][theta])
            xs = [p[0] for p in pts]
            alpha = 0.35 + 0.65 * (i + 1) / len(thetas)
            axes[0].plot(xs, [p[1] for p in pts], color=color, alpha=alpha,
                         label=alg if i == len(thetas) - 1 else None)
            axes[1].plot(xs, [p[2] for p in pts], color=color, alpha=alpha,
                         label=alg if i == len(thetas) - 1 else None)
    axes[0].set_ylabel("spectral radius")
    axes[1].set_ylabel("operator norm")
    for ax in axes:
        ax.set_xlabel("relaxation")
        ax.axhline(1.0, color="gray", lw=0.6, ls=":")
        ax.legend(fontsize="small")
    fig.suptitle("Three concurrent lines: rate bounds (one curve per angle)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


RENDERERS = {
    "exp1": render_exp1,
    "exp2": render_exp2,
    "exp3": render_exp3,
    "three-lines": render_three_lines,
}
