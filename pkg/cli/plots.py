import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from ccot.jumps import MIN_LEVEL_LENGTH, detect  # noqa: E402

logger = logging.getLogger(__name__)

TITLES = {"row": "rows (sorted scaling)", "col": "columns (sorted scaling)"}


def plot_traces(traces_csv: str, out_png: str) -> None:
    """
    Render a traces.csv file as two step plots, one per axis, with the
    detected jump positions drawn as dashed lines.
    """
    traces = pd.read_csv(traces_csv)
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    for ax, axis in zip(axes, ("row", "col")):
        part = traces[traces["axis"] == axis].sort_values("rank")
        ax.plot(part["rank"], part["value"], drawstyle="steps-post", color="k", linewidth=1)
        if len(part) >= MIN_LEVEL_LENGTH:
            for p in detect(part["value"].to_numpy()).positions:
                ax.axvline(p, color="tab:red", linestyle="--", linewidth=0.8)
        ax.set_title(TITLES[axis])
        ax.set_xlabel("rank")
        ax.spines["right"].set_visible(False)
        ax.spines["top"].set_visible(False)
    axes[0].set_ylabel("value")
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    logger.info("saved trace plot to %s", out_png)
