"""Figure rendering for sweep outputs.

Renders the metric columns of a sweep against the swept parameter to a
PNG/PDF file next to the delimited output.  matplotlib is imported
lazily with the Agg backend so headless runs never block.
"""

from __future__ import annotations


def _get_pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_rows(
    rows: list[dict[str, str]],
    x: str,
    ys: list[str],
    out_path: str,
    title: str | None = None,
) -> str:
    """Plot columns of tabular sweep data (string-valued dict rows).

    Rows with empty x or y cells (failed sweep points) are skipped per
    curve.  Returns the output path.
    """
    if not rows:
        raise ValueError("no rows to plot")
    if x not in rows[0]:
        raise ValueError(f"column {x!r} not present; have {sorted(rows[0])}")
    plt = _get_pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    plotted = 0
    for y in ys:
        if y not in rows[0]:
            raise ValueError(f"column {y!r} not present; have {sorted(rows[0])}")
        xs, vals = [], []
        for row in rows:
            if row.get(x, "") == "" or row.get(y, "") == "":
                continue
            xs.append(float(row[x]))
            vals.append(float(row[y]))
        if xs:
            ax.plot(xs, vals, marker="o", label=y)
            plotted += 1
    if plotted == 0:
        plt.close(fig)
        raise ValueError("no plottable data in the selected columns")
    ax.set_xlabel(x)
    ax.set_ylabel(", ".join(ys))
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.4)
    if plotted > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
