"""Figure and tabular report rendering.

Every report writer pairs a delimited file with a rendered PNG so results
can be grepped and eyeballed from the same directory.
"""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def write_train_report(report, out_dir) -> list[str]:
    """train_report.json + train_report.tsv + loss_curves.png."""
    os.makedirs(out_dir, exist_ok=True)
    json_path = os.path.join(out_dir, "train_report.json")
    tsv_path = os.path.join(out_dir, "train_report.tsv")
    png_path = os.path.join(out_dir, "loss_curves.png")

    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report.as_dict(), fh, indent=2)
        fh.write("\n")
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write("epoch\textraction\ttruth\tembedding\n")
        for row in report.epochs:
            fh.write(
                f"{row['epoch']}\t{row['extraction']:.6f}"
                f"\t{row['truth']:.6f}\t{row['embedding']:.6f}\n"
            )

    epochs = [row["epoch"] for row in report.epochs]
    fig, ax = plt.subplots(figsize=(6, 4))
    for key, label in (
        ("extraction", "extraction (cross-entropy)"),
        ("truth", "truth discovery (neg. log lik.)"),
        ("embedding", "feature embedding (neg. objective)"),
    ):
        ax.plot(epochs, [row[key] for row in report.epochs], marker="o", label=label)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean loss")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [json_path, tsv_path, png_path]


def write_prediction_report(predictions, eta, out_dir) -> list[str]:
    """entropy_hist.png plus an eta sweep (eta_sweep.tsv + eta_sweep.png)."""
    from .inference import sweep_eta

    os.makedirs(out_dir, exist_ok=True)
    hist_path = os.path.join(out_dir, "entropy_hist.png")
    sweep_tsv = os.path.join(out_dir, "eta_sweep.tsv")
    sweep_png = os.path.join(out_dir, "eta_sweep.png")

    entropies = np.array([p.entropy for p in predictions])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(entropies, bins=40, color="steelblue", alpha=0.8)
    ax.axvline(eta, color="firebrick", linestyle="--", label=f"eta = {eta:.3f}")
    ax.set_xlabel("entropy over relation types")
    ax.set_ylabel("mentions")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(hist_path, dpi=120)
    plt.close(fig)

    top = max(float(entropies.max()), eta, 1e-6) if len(entropies) else 1.0
    etas = np.linspace(0.0, top * 1.05, 10)
    rows = sweep_eta(predictions, etas)
    with open(sweep_tsv, "w", encoding="utf-8") as fh:
        fh.write("eta\tnon_none_predictions\n")
        for value, count in rows:
            fh.write(f"{value:.6f}\t{count}\n")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([r[0] for r in rows], [r[1] for r in rows], marker="o")
    ax.set_xlabel("eta")
    ax.set_ylabel("non-None predictions")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(sweep_png, dpi=120)
    plt.close(fig)
    return [hist_path, sweep_tsv, sweep_png]


def write_metrics_report(metrics, out_dir) -> list[str]:
    """metrics.tsv + metrics.png (bar chart of the headline scores)."""
    os.makedirs(out_dir, exist_ok=True)
    tsv_path = os.path.join(out_dir, "metrics.tsv")
    png_path = os.path.join(out_dir, "metrics.png")

    if metrics.mode == "extraction":
        scores = [
            ("precision", metrics.precision),
            ("recall", metrics.recall),
            ("f1", metrics.f1),
        ]
    else:
        scores = [("accuracy", metrics.accuracy)]
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write("metric\tvalue\n")
        for name, value in scores:
            fh.write(f"{name}\t{value:.6f}\n")
        for name, value in (metrics.counts or {}).items():
            fh.write(f"{name}\t{value}\n")

    fig, ax = plt.subplots(figsize=(4.5, 4))
    names = [name for name, _ in scores]
    values = [value for _, value in scores]
    ax.bar(names, values, color="steelblue", width=0.5)
    ax.set_ylim(0, 1)
    for i, value in enumerate(values):
        ax.text(i, value + 0.02, f"{value:.3f}", ha="center", fontsize=9)
    ax.set_title(f"{metrics.mode} metrics")
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [tsv_path, png_path]
