"""PNG figures for verify and estimate reports."""
from __future__ import annotations

import os


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "sepcoset-lab"
    return plt


def growth_figure(rows, path: str, title: str = "") -> str:
    """|S(x_0, x_n; D)| and d_Y(x_0, x_n) against the depth n.

    ``rows`` are (depth, |S|, d_Y, ...) tuples as produced by convergence_check.
    """
    plt = _pyplot()
    depths = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(depths, [r[1] for r in rows], "o-", label="|S(x0, xn; D)|")
    ax.plot(depths, [r[2] for r in rows], "s--", label="d_Y(x0, xn)")
    ax.set_xlabel("depth n")
    ax.set_ylabel("count")
    if title:
        ax.set_title(title, fontsize=9)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path


def running_max_figure(values, path: str, title: str = "") -> str:
    """Running maximum of the isolated-component ratio over the sampled polygons."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.step(range(1, len(values) + 1), [float(v) for v in values], where="post")
    ax.set_xlabel("polygons sampled")
    ax.set_ylabel("running max of d^/n")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path


def write_figures(out_dir: str, growth_rows=None, running=None, title: str = "") -> list:
    os.makedirs(out_dir, exist_ok=True)
    out = []
    if growth_rows:
        out.append(growth_figure(growth_rows, os.path.join(out_dir, "growth.png"), title))
    if running:
        out.append(running_max_figure(running, os.path.join(out_dir, "chat.png"), title))
    return out
