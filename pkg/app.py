#!/usr/bin/env python3
"""
Sigmoid Tree Lab - Streamlit Dashboard
Synthetic data generation, DNN training, Gibbs/HMC fine-tuning, finite-L
convergence checks and report aggregation.
"""

import streamlit as st

from data.generator import DataGenerator
from experiments.config import RunConfig
from experiments.report import ReportIndex, aggregate_timings
from experiments.runner import METHOD_DNN, METHOD_GIBBS, evaluate, finetune, hmc_method, stochastic_predictions, train_mlp
from experiments.store import get_store
from metrics.monitor import RunMonitor
from models.chain import SamplerKind
from models.dataset import GenKind, GenSpec, rows_summary
from models.errors import DivergenceError, StructureError, ToleranceBreach
from network.propagation import predict
from unroll.verify import VerifyConfig, verify_all

# Page config
st.set_page_config(
    page_title="Sigmoid Tree Lab",
    page_icon="🌳",
    layout="wide"
)

# Initialize session state
if 'store' not in st.session_state:
    st.session_state.store = get_store()
    st.session_state.monitor = RunMonitor()
    st.session_state.generated = None
    st.session_state.split = None
    st.session_state.dnn = None
    st.session_state.history = []

st.title("🌳 Sigmoid Tree Lab")
st.markdown("**Neural networks as the infinite-copy limit of tree-structured graphical models**")
st.divider()

tab1, tab2, tab3, tab4 = st.tabs([
    "🗄️ Data Generation",
    "🧠 Training & Fine-tuning",
    "📐 Convergence Checks",
    "📊 Report",
])

# ============================================================================
# TAB 1: Data Generation
# ============================================================================
with tab1:
    st.header("🗄️ Synthetic Data")
    col1, col2, col3, col4 = st.columns(4)
    with col1:
        kind = st.selectbox("Generator", [k.value for k in GenKind])
    with col2:
        weight = st.selectbox("Weight scale w", DataGenerator.WEIGHT_SCALES)
    with col3:
        n_points = st.number_input("Rows", min_value=10, max_value=100000, value=1000, step=100)
    with col4:
        data_seed = st.number_input("Seed", min_value=0, value=0, step=1)

    if st.button("Generate", type="primary"):
        spec = GenSpec(GenKind(kind), (4, 4, 4, 1), float(weight), int(n_points), int(data_seed))
        with st.spinner(f"Sampling {spec.label}..."):
            with st.session_state.monitor.phase("gen-data"):
                gen, dataset = DataGenerator.generate(spec)
        st.session_state.generated = (gen, dataset)
        st.session_state.split = dataset.split(0.8, int(data_seed))
        st.session_state.dnn = None
        st.success(f"Generated {len(dataset)} rows of {spec.label}")

    if st.session_state.generated is not None:
        gen, dataset = st.session_state.generated
        for line in rows_summary(dataset):
            st.markdown(f"- {line}")
        preview = [{**{f"x{i}": int(v) for i, v in enumerate(row.x)}, "y": row.y, "p_true": round(row.p_true, 4)}
                   for _, row in zip(range(20), dataset)]
        st.dataframe(preview, use_container_width=True)

# ============================================================================
# TAB 2: Training & Fine-tuning
# ============================================================================
with tab2:
    st.header("🧠 Train, then fine-tune")
    if st.session_state.split is None:
        st.info("Generate a dataset first")
    else:
        train, test = st.session_state.split
        col1, col2, col3 = st.columns(3)
        with col1:
            train_epochs = st.number_input("SGD epochs", min_value=0, value=100, step=10)
            lr = st.select_slider("Learning rate", options=[1e-4, 1e-3, 1e-2, 1e-1], value=1e-2)
        with col2:
            sampler = st.selectbox("Sampler", [s.value for s in SamplerKind])
            L = st.select_slider("L", options=[1.0, 10.0, 100.0, 1000.0], value=10.0)
        with col3:
            tune_epochs = st.number_input("Fine-tune epochs", min_value=1, value=20, step=5)
            n_samples = st.number_input("Prediction samples", min_value=10, value=1000, step=100)
        cfg = RunConfig(sampler=SamplerKind(sampler), L=float(L), lr=float(lr), epochs=int(tune_epochs),
                        train_epochs=int(train_epochs), n_samples=int(n_samples))

        if st.button("Train DNN"):
            with st.spinner("Training..."):
                result = train_mlp(train, test, (train.num_features, 4, 4, 1), cfg)
            st.session_state.dnn = result.mlp
            st.session_state.history = result.history
        if st.session_state.history:
            last = st.session_state.history[-1]
            st.metric("Train loss", f"{last['train_loss']:.4f}")
            st.dataframe(st.session_state.history, use_container_width=True, height=240)

        if st.session_state.dnn is not None and st.button("Fine-tune", type="primary"):
            gen, dataset = st.session_state.generated
            method = METHOD_GIBBS if cfg.sampler is SamplerKind.GIBBS else hmc_method(cfg.L)
            monitor = RunMonitor(method, dataset.name, cfg.seed)
            try:
                with st.spinner(f"Fine-tuning with {method}..."):
                    with monitor.phase("finetune", cfg.epochs):
                        tuned = finetune(st.session_state.dnn, train, cfg)
                    pred = stochastic_predictions(tuned.mlp, test.X, cfg)
            except DivergenceError as e:
                st.error(f"Fine-tuning diverged: {e}")
            else:
                ours = evaluate(pred, test, cfg.bins)
                base = evaluate(predict(st.session_state.dnn, test.X), test, cfg.bins)
                col_a, col_b = st.columns(2)
                with col_a:
                    st.metric(f"MAE ({method})", f"{ours['mae']:.4f}",
                              delta=f"{ours['mae'] - base['mae']:+.4f}", delta_color="inverse")
                with col_b:
                    st.metric(f"ECE ({method})", f"{ours['ece']:.4f}",
                              delta=f"{ours['ece'] - base['ece']:+.4f}", delta_color="inverse")
                recorded = {(r["method"], r["dataset"], r["seed"]) for r in st.session_state.store.rows}
                for name, metrics in ((METHOD_DNN, base), (method, ours)):
                    if (name, dataset.name, cfg.seed) in recorded:
                        continue
                    for metric, value in metrics.items():
                        st.session_state.store.add_row(name, dataset.name, gen.spec.weight_scale,
                                                       cfg.train_epochs, metric, value, cfg.seed)
                st.session_state.store.add_timings(monitor.snapshots)
                if tuned.acceptance is not None:
                    st.caption(f"Mean HMC acceptance {tuned.acceptance:.3f}")

# ============================================================================
# TAB 3: Convergence Checks
# ============================================================================
with tab3:
    st.header("📐 Finite-L tree model against the forward pass")
    n_seeds = st.slider("Random networks", min_value=1, max_value=20, value=3)
    suites = st.multiselect("Suites", ["oracle", "theorem1", "theorem2"], default=["oracle", "theorem1"])
    if st.button("Run checks"):
        with st.spinner("Running..."):
            try:
                rows = verify_all(VerifyConfig(seeds=tuple(range(n_seeds))), suites)
                st.success(f"All {len(rows)} rows within tolerance")
            except ToleranceBreach as breach:
                rows = breach.rows
                st.error(f"{len(breach.breaches)} breaches")
                for message in breach.breaches:
                    st.markdown(f"- {message}")
        st.dataframe(rows, use_container_width=True)

# ============================================================================
# TAB 4: Report
# ============================================================================
with tab4:
    st.header("📊 Aggregated metrics")
    store = st.session_state.store
    stats = store.get_stats()
    col1, col2, col3 = st.columns(3)
    with col1:
        st.metric("Report rows", stats["rows"])
    with col2:
        st.metric("Seeds", stats["seeds"])
    with col3:
        st.metric("💾 Process Memory", f"{st.session_state.monitor.get_process_memory_mb():.1f} MB")

    if store.rows:
        index = ReportIndex()
        try:
            index.index_all(store.rows)
            st.dataframe(index.aggregate(), use_container_width=True)
        except (StructureError, ValueError) as e:
            st.error(str(e))
    if store.timings:
        st.subheader("Seconds per epoch")
        st.dataframe(aggregate_timings(store.timings), use_container_width=True)
    if st.button("Clear report"):
        store.clear()
        st.rerun()
