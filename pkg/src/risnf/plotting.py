"""SVG line charts drawn from result CSV files (never from in-memory results)."""

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import read_csv  # noqa: E402

# experiment -> (panel column, x column, y columns, series columns)
_LAYOUT = {
    "EigenSpectrum": ("spacing_wl", "index", ("eigenvalue_db",),
                      ("statistics_kind", "coupling")),
    "RankVsSpacing": ("statistics_kind", "spacing_wl", ("rank",), ("K", "coupling", "eps")),
    "NmseVsSnr": (None, "snr_db", ("nmse_analytic_db", "nmse_mc_db"),
                  ("estimator", "statistics_kind", "mc_aware")),
    "NmseVsSpacing": (None, "spacing_wl", ("nmse_analytic_db", "nmse_mc_db"),
                      ("estimator", "statistics_kind", "mc_aware")),
}
_YLABEL = {"eigenvalue_db": "eigenvalue [dB]", "rank": "effective rank",
           "nmse_analytic_db": "NMSE [dB]"}


def plot_csv(csv_path, svg_path):
    """Render the CSV at ``csv_path`` as an SVG line chart at ``svg_path``."""
    table = read_csv(csv_path)
    exp = table.metadata.get("experiment")
    if exp not in _LAYOUT:
        raise ValueError(f"no plot layout for experiment {exp!r}")
    panel, x, ys, series = _LAYOUT[exp]
    cols = table.columns
    groups = defaultdict(lambda: defaultdict(list))
    for row in table.rows:
        r = dict(zip(cols, row))
        groups[r[panel] if panel else ""][tuple(r[s] for s in series)].append(r)

    fig, axes = plt.subplots(1, len(groups), figsize=(6 * len(groups), 4.5),
                             squeeze=False)
    for ax, (pname, curves) in zip(axes[0], groups.items()):
        for label, rows in curves.items():
            xs = [float(r[x]) for r in rows]
            name = ", ".join(label)
            line = None
            for k, y in enumerate(ys):
                vals = [float(r[y]) if r[y] != "" else float("nan") for r in rows]
                if k == 0:
                    (line,) = ax.plot(xs, vals, marker="." if len(xs) > 1 else "o",
                                      label=name)
                elif any(v == v for v in vals):
                    ax.plot(xs, vals, linestyle="none", marker="x",
                            color=line.get_color())
        ax.set_xlabel(x)
        ax.set_ylabel(_YLABEL[ys[0]])
        if panel:
            ax.set_title(f"{panel} = {pname}")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return svg_path
