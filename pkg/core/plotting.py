import numpy as np
import pandas as pd
import plotly.graph_objects as go

from core.types import LABEL_GRID


def history_frame(history):
    """Flatten history.jsonl records (nested phase / valid dicts) into columns like phase1.loss."""
    if not history:
        return pd.DataFrame(columns=["epoch"])
    return pd.json_normalize(history)


def plot_loss_curves(history_df, title="Training losses"):
    fig = go.Figure()
    for phase in ("phase1", "phase2"):
        for key, name in (("loss", "total"), ("loss_r", "L_r"), ("loss_mix", "L_mix")):
            col = f"{phase}.{key}"
            if col not in history_df.columns or history_df[col].isna().all():
                continue
            fig.add_trace(go.Scatter(x=history_df["epoch"], y=history_df[col],
                                     mode="lines+markers", name=f"{phase} {name}"))
    fig.update_layout(title=title, xaxis_title="epoch", yaxis_title="loss")
    return fig


def plot_metric_curves(history_df, metrics=("mae",), title="Validation metrics"):
    fig = go.Figure()
    for metric in metrics:
        col = f"valid.{metric}"
        if col in history_df.columns:
            fig.add_trace(go.Scatter(x=history_df["epoch"], y=history_df[col], mode="lines+markers", name=metric))

    # best epoch marker
    if "valid.mae" in history_df.columns and len(history_df) and "mae" in metrics:
        best = history_df.loc[history_df["valid.mae"].idxmin()]
        fig.add_trace(go.Scatter(x=[best["epoch"]], y=[best["valid.mae"]], mode="markers",
                                 marker=dict(size=12, symbol="star"), name="best"))
    fig.update_layout(title=title, xaxis_title="epoch", yaxis_title="value")
    return fig


def plot_label_histogram(labels_df, column="m", by="split", title="Label distribution"):
    fig = go.Figure()
    for group, part in labels_df.groupby(by, sort=False):
        values = part[column].dropna().round(1)
        counts = values.value_counts().reindex(LABEL_GRID, fill_value=0)
        fig.add_trace(go.Bar(x=list(LABEL_GRID), y=counts.to_numpy(), name=str(group)))
    fig.update_layout(title=title, barmode="group", xaxis_title="label", yaxis_title="count")
    return fig


def plot_prediction_scatter(pred_df, title="Prediction vs label"):
    fig = go.Figure()
    fig.add_trace(go.Scatter(x=pred_df["label"], y=pred_df["prediction"], mode="markers",
                             marker=dict(size=5, opacity=0.6), name="instances"))
    # y = x reference
    lim = [-1.0, 1.0]
    if len(pred_df):
        lo = float(np.nanmin(pred_df[["label", "prediction"]].to_numpy()))
        hi = float(np.nanmax(pred_df[["label", "prediction"]].to_numpy()))
        lim = [min(lo, -1.0), max(hi, 1.0)]
    fig.add_trace(go.Scatter(x=lim, y=lim, mode="lines", line=dict(dash="dash"), name="y = x"))
    fig.update_layout(title=title, xaxis_title="label", yaxis_title="prediction")
    return fig
