"""Figure rendering for the report paths of the command line tools.

Every figure is written straight to file next to the CSV it visualises;
nothing is shown interactively.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_training_history(history, path, title="Training history"):
    """Per-epoch MSE on a log axis."""
    fig, ax = plt.subplots(figsize=(6, 4))
    epochs = [row["epoch"] for row in history]
    ax.semilogy(epochs, [row["mse"] for row in history], lw=1.2)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mse (scaled)")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_mse_comparison(epochs, curves, path, title="Training comparison"):
    """Several labelled MSE trajectories on one log axis."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, values in curves.items():
        ax.semilogy(epochs, values, lw=1.2, label=label)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mse (scaled)")
    ax.set_title(title)
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_curves(series, path, xlabel, ylabel, title=""):
    """Generic overlay of (x, y, label, style) series."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for x, y, label, style in series:
        ax.plot(x, y, style, label=label, lw=1.2, ms=4)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
