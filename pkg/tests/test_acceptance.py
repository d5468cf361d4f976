"""Acceptance suite: one test per shipped correctness criterion.

Each test prints a single ``ACCEPTANCE n <name>: PASS/FAIL (t s)`` line
and enforces both the numerical tolerance and the runtime budget.  The
expensive contrastive-training criteria share one session fixture of
training runs; the strictest reading is used for budgets: the full
fixture cost is charged against each criterion that consumes it.

Criterion 10 (real-data stretch run) needs a Cora copy converted to the
package's file formats; it is skipped, not failed, when the data is
absent (set FDGCL_CORA_DIR or place the files under data/cora).
"""

import math
import os
import time

import numpy as np
import pytest

from conftest import ml_quadrature_oracle, ml_series_oracle, \
    scalar_mode_reference
from fdgcl import datagen, model, presets, spectral
from fdgcl.datagen import SbmSpec
from fdgcl.evaluation import accuracy, pca_participation, train_probe
from fdgcl.graph import Graph, load_dataset
from fdgcl.losses import dominant_direction, euclidean
from fdgcl.model import EncoderParams, ModelConfig, backward, forward, \
    init_params
from fdgcl.solver import DiffusionConfig, diffuse, segment
from fdgcl.special import MLParams, gamma, ml, ml_asymptotic, order_index


def report(num, name, ok, elapsed, budget):
    verdict = "PASS" if ok and elapsed < budget else "FAIL"
    print(f"\nACCEPTANCE {num} {name}: {verdict} "
          f"({elapsed:.1f} s, budget {budget:.0f} s)")
    assert ok, f"criterion {num} ({name}) failed its tolerance"
    assert elapsed < budget, (f"criterion {num} ({name}) exceeded its "
                              f"runtime budget: {elapsed:.1f} s")


def scalar_graph(lam):
    return Graph.from_normalized([[1.0 - lam]])


# ---------------------------------------------------------------------------
# shared training runs for criteria 7-9

HETERO_SEEDS = list(range(10))


def _hetero_dataset(seed):
    return datagen.generate_sbm(presets.sbm_preset("hetero", seed=seed))


def _train_cell(ds, alpha1, alpha2, eta, seed):
    cfg = presets.load_preset("sbm-hetero", seed=seed)
    cfg = ModelConfig.from_dict({**cfg.to_dict(), "alpha1": alpha1,
                                 "alpha2": alpha2, "eta": eta,
                                 "allow_equal_alpha": alpha1 == alpha2})
    return model.train(ds, cfg)


@pytest.fixture(scope="session")
def hetero_runs():
    """30 training runs on the heterophilic preset: per seed, the
    distinct-order pair at eta=0.15, the equal-order pair at eta=0.15,
    and the distinct-order pair at eta=0."""
    t0 = time.monotonic()
    runs = {"distinct": {}, "equal": {}, "unregularized": {}, "data": {}}
    for seed in HETERO_SEEDS:
        ds = _hetero_dataset(seed)
        runs["data"][seed] = ds
        runs["distinct"][seed] = _train_cell(ds, 0.01, 1.0, 0.15, seed)
        runs["equal"][seed] = _train_cell(ds, 1.0, 1.0, 0.15, seed)
        runs["unregularized"][seed] = _train_cell(ds, 0.01, 1.0, 0.0, seed)
    runs["elapsed"] = time.monotonic() - t0
    return runs


def _probe_accuracy(ds, embeddings, seed):
    probe = train_probe(embeddings, ds.labels, ds.split["train"], seed=seed)
    return accuracy(probe, embeddings, ds.labels, ds.split["test"])


def _alignment(run):
    c1 = dominant_direction(run.z1).direction
    c2 = dominant_direction(run.z2).direction
    return abs(float(c1 @ c2))


# ---------------------------------------------------------------------------

def test_c01_solver_matches_decay_law_oracle():
    t0 = time.monotonic()
    ok = True
    for alpha in (0.3, 0.5, 0.9):
        ref = ml_series_oracle(alpha, 1.0, 1.0)
        errs = []
        for h in (1e-3, 5e-4):
            got = segment("grand", scalar_graph(1.0), np.array([[1.0]]),
                          alpha, 1.0, h)[0, 0]
            errs.append(abs(got - ref) / abs(ref))
        ok &= errs[0] < 1e-2
        ok &= errs[1] < errs[0]
    report(1, "solver vs decay-law oracle", ok, time.monotonic() - t0, 1.0)


def test_c02_alpha_one_reduces_to_forward_euler():
    t0 = time.monotonic()
    ds = datagen.generate_sbm(SbmSpec(n=20, classes=2, p_in=0.4, p_out=0.15,
                                      d_in=4, seed=0))
    g = ds.graph
    rng = np.random.default_rng(0)
    z0 = rng.normal(size=(20, 4))
    h, steps = 0.05, 100
    got = segment("grand", g, z0, 1.0, h * steps, h)
    ref = z0.copy()
    a = g.norm_adjacency
    for _ in range(steps):
        ref = ref + h * (a @ ref - ref)
    ok = np.abs(got - ref).max() < 1e-12
    report(2, "order-one limit is exact Euler", ok, time.monotonic() - t0,
           1.0)


def test_c03_profile_equals_geometric_sum_of_segment_gain(
        dense_sbm_graphs):
    t0 = time.monotonic()
    g = dense_sbm_graphs[0]
    basis = spectral.graph_basis(g)
    ok = True
    for m in (1, 3):
        cfg = DiffusionConfig(alpha=0.5, T=2.0 * m, h=0.1, m=m)
        prof = spectral.amplification_profile(g, cfg, basis)
        for i in range(g.num_nodes):
            e_hat = scalar_mode_reference(0.5, basis.eigenvalues[i],
                                          cfg.tau, cfg.h)
            expect = sum(e_hat ** k for k in range(m + 1))
            ok &= abs(prof[i] - expect) < 1e-8
    report(3, "per-mode gain is the skip geometric sum", ok,
           time.monotonic() - t0, 5.0)


def test_c04_retention_ordering_across_orders(dense_sbm_graphs):
    t0 = time.monotonic()
    ok = True
    for g in dense_sbm_graphs:
        rep = spectral.theorem_check(g, 0.1, 0.9, tau=20.0, h=0.1, m=3,
                                     sweep_deltas=(0.2, 0.5, 0.8))
        ok &= rep.monotone1 and rep.monotone2       # assertion (i)
        ok &= rep.retention_ok                      # assertion (ii)
        ok &= bool(rep.sweep_monotone)              # assertion (iii)
    report(4, "high-frequency retention orders by alpha", ok,
           time.monotonic() - t0, 30.0)


def test_c05_analytic_backward_matches_finite_differences():
    # at width d = 2 the two-unit ReLU layer dies on whole rows for most
    # seeds, which the cosine-family losses reject by contract; the
    # euclidean loss exercises the same backward path without that
    # precondition (the cosine path is finite-difference-checked at wider
    # d in the model test suite)
    t0 = time.monotonic()
    ok = True
    for alpha1 in (0.3, 0.7, 1.0):
        cfg = ModelConfig(alpha1=alpha1, alpha2=1.0, T=1.0, h=0.25, m=2,
                          d=2, beta=0.5, eta=0.15, lr=0.01, weight_decay=0.0,
                          epochs=1, seed=0, loss="euclidean",
                          allow_equal_alpha=alpha1 == 1.0)
        for seed in range(3):
            ds = datagen.generate_sbm(SbmSpec(n=10, classes=2, p_in=0.6,
                                              p_out=0.3, d_in=3, seed=seed))
            params = init_params(3, cfg.d, seed=seed)
            z1, z2, pre1, pre2 = forward(ds, params, cfg)
            out = euclidean(z1, z2)
            dw1, dw2 = backward(ds, params, cfg, (out.grad1, out.grad2),
                                pre1, pre2)

            def objective(w1, w2):
                p = EncoderParams(w1=w1, w2=w2)
                a, b, _, _ = forward(ds, p, cfg)
                return euclidean(a, b).value

            step = 1e-5
            for which, w, got in (("w1", params.w1, dw1),
                                  ("w2", params.w2, dw2)):
                num = np.zeros_like(w)
                for i in range(w.shape[0]):
                    for j in range(w.shape[1]):
                        wp = w.copy()
                        wp[i, j] += step
                        wm = w.copy()
                        wm[i, j] -= step
                        if which == "w1":
                            num[i, j] = (objective(wp, params.w2)
                                         - objective(wm, params.w2)) \
                                / (2 * step)
                        else:
                            num[i, j] = (objective(params.w1, wp)
                                         - objective(params.w1, wm)) \
                                / (2 * step)
                scale = max(np.abs(num).max(), 1e-12)
                ok &= np.abs(got - num).max() / scale < 1e-4
    report(5, "backward vs finite differences", ok, time.monotonic() - t0,
           10.0)


def test_c06_adjoint_identity_at_all_preset_orders():
    t0 = time.monotonic()
    alphas = set()
    for name in presets.available_presets():
        cfg = presets.load_preset(name)
        alphas.update((cfg.alpha1, cfg.alpha2))
    ok = True
    for seed, alpha in enumerate(sorted(alphas)):
        ds = datagen.generate_sbm(SbmSpec(n=20, classes=2, p_in=0.4,
                                          p_out=0.15, d_in=4, seed=seed))
        g = ds.graph
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(20, 3))
        grad = rng.normal(size=(20, 3))
        cfg = DiffusionConfig(alpha=alpha, T=2.0, h=0.5, m=2)
        lhs = float((diffuse("grand", g, x, cfg) * grad).sum())
        rhs = float((x * diffuse("grand", g, grad, cfg)).sum())
        ok &= abs(lhs - rhs) / max(abs(lhs), 1.0) < 1e-8
    report(6, "self-adjoint propagator identity", ok,
           time.monotonic() - t0, 2.0)


def test_c07_distinct_orders_beat_equal_orders(hetero_runs):
    t0 = time.monotonic()
    acc_distinct, acc_equal = [], []
    for seed in HETERO_SEEDS:
        ds = hetero_runs["data"][seed]
        acc_distinct.append(_probe_accuracy(
            ds, hetero_runs["distinct"][seed].embeddings, seed))
        acc_equal.append(_probe_accuracy(
            ds, hetero_runs["equal"][seed].embeddings, seed))
    gap = float(np.mean(acc_distinct) - np.mean(acc_equal))
    ok = gap > 0.02
    elapsed = time.monotonic() - t0 + hetero_runs["elapsed"]
    print(f"\n  mean accuracy distinct={np.mean(acc_distinct):.3f} "
          f"equal={np.mean(acc_equal):.3f} gap={gap:.3f}")
    report(7, "distinct orders beat equal orders", ok, elapsed, 180.0)


def test_c08_direction_regularizer_separates_views(hetero_runs):
    t0 = time.monotonic()
    smaller = 0
    acc_reg, acc_plain = [], []
    for seed in HETERO_SEEDS:
        ds = hetero_runs["data"][seed]
        reg_run = hetero_runs["distinct"][seed]
        plain_run = hetero_runs["unregularized"][seed]
        if _alignment(reg_run) < _alignment(plain_run):
            smaller += 1
        acc_reg.append(_probe_accuracy(ds, reg_run.embeddings, seed))
        acc_plain.append(_probe_accuracy(ds, plain_run.embeddings, seed))
    ok = smaller >= 8
    ok &= float(np.mean(acc_reg)) >= float(np.mean(acc_plain))
    elapsed = time.monotonic() - t0 + hetero_runs["elapsed"]
    print(f"\n  alignment smaller with regularizer in {smaller}/10 seeds; "
          f"epoch-200 accuracy reg={np.mean(acc_reg):.3f} "
          f"plain={np.mean(acc_plain):.3f}")
    report(8, "regularizer drives views apart", ok, elapsed, 300.0)


def test_c09_small_order_view_resists_dimension_collapse():
    t0 = time.monotonic()
    wins = 0
    for seed in range(10):
        ds = datagen.generate_sbm(presets.sbm_preset("homo", seed=seed))
        cfg = presets.load_preset("sbm-homo", seed=seed)
        run = model.train(ds, cfg)
        # diagnostics read the diffusion states: the collapse signature
        # lives in the pre-activation spectra
        if pca_participation(run.pre1) > pca_participation(run.pre2):
            wins += 1
    ok = wins >= 8
    print(f"\n  small-order view wider in {wins}/10 seeds")
    report(9, "small order resists dimension collapse", ok,
           time.monotonic() - t0, 180.0)


def _cora_dir():
    cand = os.environ.get("FDGCL_CORA_DIR", os.path.join("data", "cora"))
    needed = ("graph.tsv", "features.csv", "labels.txt", "split.json")
    if all(os.path.exists(os.path.join(cand, f)) for f in needed):
        return cand
    return None


def test_c10_stretch_real_citation_graph():
    where = _cora_dir()
    if where is None:
        pytest.skip("real-data stretch run: no converted Cora copy found "
                    "(set FDGCL_CORA_DIR)")
    t0 = time.monotonic()
    ds = load_dataset(os.path.join(where, "graph.tsv"),
                      os.path.join(where, "features.csv"),
                      os.path.join(where, "labels.txt"),
                      os.path.join(where, "split.json"))
    cfg = presets.load_preset("cora", seed=0)
    run = model.train(ds, cfg)
    acc = _probe_accuracy(ds, run.embeddings, seed=0)
    ok = acc >= 0.78
    print(f"\n  citation-graph test accuracy {acc:.4f}")
    report(10, "stretch: real citation graph", ok, time.monotonic() - t0,
           600.0)


def test_c11_special_function_identities():
    t0 = time.monotonic()
    ok = gamma(1.0) == pytest.approx(1.0, rel=1e-12)
    ok &= gamma(4.0) == pytest.approx(6.0, rel=1e-12)
    ok &= gamma(0.5) == pytest.approx(1.7724538509055159, rel=1e-12)
    ok &= ml(0.7, 0.0, 7.0) == 1.0
    ok &= ml(1.0, 2.0, 1.0) == pytest.approx(math.exp(-2.0), rel=1e-9)
    ok &= order_index(0.75) == 1
    ok &= order_index(0.1) == 9
    ok &= order_index(0.5) == 1
    # asymptotic agreement with the (certified) oracle improves with tau
    for alpha in (0.3, 0.5, 0.75):
        n = order_index(alpha)
        for lam in (0.5, 1.0, 2.0):
            errs = []
            for tau in (1e2, 1e3, 1e4):
                ref = ml_quadrature_oracle(alpha, lam, tau)
                got = ml_asymptotic(MLParams(alpha, lam, tau), n)
                errs.append(abs(got - ref) / abs(ref))
            ok &= errs[0] > errs[1] > errs[2]
    report(11, "decay-law identities", ok, time.monotonic() - t0, 1.0)
