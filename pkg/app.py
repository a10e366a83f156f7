import json
import os

import pandas as pd
import streamlit as st

from core.errors import FormatError, ValidationError
from core.plotting import (
    history_frame,
    plot_loss_curves, plot_metric_curves,
    plot_label_histogram, plot_prediction_scatter,
)
from data.archive import load_feature_archive
from data.dataset import dataset_statistics
from evaluation.evaluate import evaluate, predict, prediction_file
from training.checkpoint import load_checkpoint, read_meta
from training.loop import BEST_CHECKPOINT, HISTORY_FILE


st.set_page_config(page_title="AV-MC Run Dashboard", layout="wide", initial_sidebar_state="expanded")
st.markdown("""
<style>
.block-container{
  max-width: 1400px;
  padding-top: 3.0rem;
  padding-bottom: 1.5rem;
}
div[data-testid="stMarkdownContainer"] { overflow: visible !important; }

section[data-testid="stSidebar"]{
  background: #0b1220;
}
section[data-testid="stSidebar"] *{
  color: #E6E6E6;
}

.hero{
  width: 100%;
  text-align: center;
  margin: 0 auto 18px auto;
  padding: 6px 0 10px 0;
}
.hero-title{
  font-weight: 900;
  letter-spacing: 0.6px;
  line-height: 1.06;
  margin: 0;
  font-size: clamp(30px, 3.6vw, 48px);
}
.hero-subtitle{
  margin-top: 6px;
  font-size: 16px;
  opacity: 0.75;
}

div[data-testid="stMetric"]{
  background: rgba(255,255,255,0.06);
  border: 1px solid rgba(255,255,255,0.14);
  padding: 16px 18px;
  border-radius: 14px;
  margin-bottom: 14px;
}
div[data-testid="stMetricValue"]{
  font-size: 36px !important;
}
div[data-testid="stDataFrame"]{
  border: 1px solid rgba(255,255,255,0.12);
  border-radius: 14px;
  overflow: hidden;
}
</style>

<div class="hero">
  <div class="hero-title">Multimodal Sentiment Runs</div>
  <div class="hero-subtitle">Training curves → Validation → Predictions</div>
</div>
""", unsafe_allow_html=True)


@st.cache_data
def load_history(path):
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


@st.cache_resource
def load_archive(path):
    return load_feature_archive(path)


def fmt(value, spec=".2f"):
    return "n/a" if value is None else format(value, spec)


view = st.sidebar.selectbox("View", ["Run inspector", "Archive inspector"])

# -----------------------------
# Run inspector
# -----------------------------
if view == "Run inspector":
    st.sidebar.subheader("Run")
    run_dir = st.sidebar.text_input("Run directory", "runs/avmc")
    archive_path = st.sidebar.text_input("Feature archive (for predictions)", "")
    split = st.sidebar.selectbox("Split", ["test", "valid", "train"])
    task = st.sidebar.selectbox("Task", ["m", "t", "a", "v"])

    history_path = os.path.join(run_dir, HISTORY_FILE)
    if not os.path.exists(history_path):
        st.info(f"No {HISTORY_FILE} under {run_dir}")
        st.stop()

    history = history_frame(load_history(history_path))
    last = history.iloc[-1]

    tab1, tab2, tab3 = st.tabs(["📈 Curves", "📋 History", "🎯 Predictions"])

    with tab1:
        col1, col2, col3 = st.columns(3)
        col1.metric("Epochs", int(last["epoch"]))
        col2.metric("Best valid MAE", f"{last['best_valid_mae']:.4f}")
        col3.metric("Optimizer steps", int(last["global_step"]))

        colA, colB = st.columns(2)
        with colA:
            st.plotly_chart(plot_loss_curves(history), use_container_width=True)
        with colB:
            st.plotly_chart(plot_metric_curves(history, metrics=("mae",)), use_container_width=True)
        st.plotly_chart(plot_metric_curves(history, metrics=("acc2", "f1", "acc2_weak", "corr"),
                                           title="Validation classification / correlation"),
                        use_container_width=True)

    with tab2:
        st.dataframe(history, use_container_width=True)
        checkpoint = os.path.join(run_dir, BEST_CHECKPOINT)
        if os.path.exists(checkpoint):
            meta = read_meta(checkpoint)
            st.subheader("Checkpoint")
            st.json({k: meta[k] for k in ("version", "epoch", "best_epoch", "best_valid_mae",
                                          "model_config", "loss_weights") if k in meta})

    with tab3:
        checkpoint = os.path.join(run_dir, BEST_CHECKPOINT)
        if not archive_path or not os.path.exists(checkpoint):
            st.info("Set a feature archive and train to completion to see predictions.")
        else:
            try:
                dataset = load_archive(archive_path)
                model = load_checkpoint(checkpoint, specs=dataset.specs).model
                frame = predict(model, dataset, split)
                report = evaluate(None, dataset, split, tasks=(task,), frame=frame)[0]
            except (ValidationError, FormatError) as exc:
                st.error(str(exc))
                st.stop()

            c1, c2, c3, c4 = st.columns(4)
            c1.metric("MAE", fmt(report.mae, ".4f"))
            c2.metric("Acc2", f"{fmt(report.acc2)}%")
            c3.metric("Acc2_weak", f"{fmt(report.acc2_weak)}%")
            c4.metric("Corr", fmt(report.corr))
            preds = prediction_file(frame, task)
            st.plotly_chart(plot_prediction_scatter(preds, title=f"{split} ({task})"), use_container_width=True)
            st.dataframe(preds, use_container_width=True)


# -----------------------------
# Archive inspector
# -----------------------------
else:
    st.sidebar.subheader("Archive")
    archive_path = st.sidebar.text_input("Feature archive", "data/synthetic.zip")
    if not os.path.exists(archive_path):
        st.info(f"{archive_path} does not exist")
        st.stop()
    try:
        dataset = load_archive(archive_path)
    except (ValidationError, FormatError) as exc:
        st.error(str(exc))
        st.stop()

    col1, col2, col3 = st.columns(3)
    col1.metric("Supervised", dataset.stats.n_supervised)
    col2.metric("Unlabeled", dataset.stats.n_unsupervised)
    col3.metric("Unimodal labels", "yes" if dataset.has_unimodal_labels else "no")

    st.subheader("Feature shapes")
    st.dataframe(pd.DataFrame([{"modality": kind.value, **spec.to_dict()} for kind, spec in dataset.specs.items()]),
                 use_container_width=True)

    tasks = ["m", "t", "a", "v"] if dataset.has_unimodal_labels else ["m"]
    task = st.selectbox("Labels of", tasks)
    st.subheader("Sentiment classes")
    st.dataframe(dataset_statistics(dataset, task=task), use_container_width=True)
    st.plotly_chart(plot_label_histogram(dataset.labels_frame(), column=task), use_container_width=True)
