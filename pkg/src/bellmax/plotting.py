"""Figure rendering for sweep reports."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def render_sweep_figure(points, crossings, path, family, threshold=1.0):
    """Plot the swept maximal mean value with the classical threshold."""
    xs = [p[0] for p in points]
    fs = [p[1] for p in points]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, fs, lw=1.5, label="max mean value")
    ax.axhline(threshold, color="gray", ls="--", lw=1, label=f"classical bound {threshold:g}")
    for xc in crossings:
        ax.axvline(xc, color="tab:red", ls=":", lw=1)
        ax.annotate(f"{xc:.3f}", (xc, threshold), textcoords="offset points",
                    xytext=(4, 6), fontsize=8, color="tab:red")
    ax.set_xlabel("x")
    ax.set_ylabel("f(x)")
    ax.set_title(family)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
