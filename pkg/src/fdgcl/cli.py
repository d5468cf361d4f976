"""Unified command-line entry point.

Subcommands: synth, diffuse, train, eval, spectral-check, ml, ablate.
Exit codes: 0 success, 1 usage error, 2 runtime error.  Every run that
writes files also writes a ``manifest.json`` (atomically, at run end)
recording the command line, config snapshot, seed, package version,
timestamps, and the list of files written.  All tabular outputs are CSV
with a header row; identical seeds reproduce them byte-for-byte.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import tempfile
import time
import traceback

import numpy as np

from . import __version__
from .errors import ConfigError, FdgclError
from . import datagen, evaluation, model, presets, spectral
from .graph import load_dataset
from .model import ModelConfig
from .solver import DiffusionConfig, diffuse
from .special import MLParams, mittag_leffler, ml_asymptotic


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that raises instead of exiting with code 2."""

    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# output helpers

def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return str(path)


def write_matrix_csv(path, matrix) -> str:
    """Headerless matrix dump in the dataset feature-CSV convention, so
    outputs (embeddings, diffused features) can be fed back as inputs."""
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w", encoding="utf-8") as fh:
        for row in m:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return str(path)


class RunManifest:
    def __init__(self, argv, out_dir, seed=None, config=None):
        self.data = {
            "command_line": list(argv),
            "config": config,
            "seed": seed,
            "version": __version__,
            "started_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "finished_at": None,
            "outputs": [],
        }
        self.out_dir = out_dir

    def add(self, path) -> str:
        self.data["outputs"].append(os.path.basename(str(path)))
        return str(path)

    def write(self) -> str:
        self.data["finished_at"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        target = os.path.join(self.out_dir, "manifest.json")
        fd, tmp = tempfile.mkstemp(dir=self.out_dir, suffix=".manifest")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(self.data, fh, indent=2)
                fh.write("\n")
            os.replace(tmp, target)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return target


def _ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _params_bin(path, params) -> str:
    """Little-endian float64 row-major dump of W1 then W2.

    16-byte header: 8-byte magic ``FDGCLW1\\0``, uint32 d_in, uint32 d.
    """
    d_in, d = params.w1.shape
    with open(path, "wb") as fh:
        fh.write(b"FDGCLW1\x00")
        fh.write(np.array([d_in, d], dtype="<u4").tobytes())
        fh.write(np.ascontiguousarray(params.w1, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(params.w2, dtype="<f8").tobytes())
    return str(path)


def read_params_bin(path):
    """Inverse of the params.bin dump; returns (W1, W2)."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != b"FDGCLW1\x00":
            raise ConfigError(f"{path}: bad params.bin magic {magic!r}")
        d_in, d = np.frombuffer(fh.read(8), dtype="<u4")
        body = np.frombuffer(fh.read(), dtype="<f8")
    if body.size != 2 * d_in * d:
        raise ConfigError(f"{path}: truncated params.bin")
    w1 = body[: d_in * d].reshape(d_in, d).copy()
    w2 = body[d_in * d:].reshape(d_in, d).copy()
    return w1, w2


# ---------------------------------------------------------------------------
# subcommands

def _cmd_ml(args, argv):
    p = MLParams(alpha=args.alpha, lam=args.lam, t=args.t)
    if args.asymptotic is not None:
        value = ml_asymptotic(p, args.asymptotic)
    else:
        value = mittag_leffler(p)
    print(repr(value))
    return 0


def _cmd_synth(args, argv):
    out = _ensure_dir(args.out)
    spec = presets.sbm_preset(args.preset, n=args.n, seed=args.seed)
    ds = datagen.generate_sbm(spec)
    manifest = RunManifest(argv, out, seed=args.seed,
                           config=spec.__dict__.copy())
    a = ds.graph.adjacency.tocoo()
    edges = sorted((int(i), int(j)) for i, j in zip(a.row, a.col) if i < j)
    path = os.path.join(out, "graph.tsv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# sbm preset={args.preset} n={spec.n} seed={args.seed}\n")
        for i, j in edges:
            fh.write(f"{i}\t{j}\n")
    manifest.add(path)
    manifest.add(write_matrix_csv(os.path.join(out, "features.csv"),
                                  ds.features))
    path = os.path.join(out, "labels.txt")
    with open(path, "w", encoding="utf-8") as fh:
        for y in ds.labels:
            fh.write(f"{int(y)}\n")
    manifest.add(path)
    path = os.path.join(out, "split.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({k: [int(i) for i in v] for k, v in ds.split.items()},
                  fh, indent=2)
        fh.write("\n")
    manifest.add(path)
    manifest.write()
    print(f"wrote {spec.n}-node {args.preset} dataset to {out} "
          f"(homophily {datagen.homophily(ds):.3f})")
    return 0


def _load_files(args):
    return load_dataset(args.graph, args.features, args.labels, args.split,
                        self_loops=not args.no_self_loops)


def _cmd_diffuse(args, argv):
    from .graph import build_graph, read_edge_list, read_features_csv

    feats = read_features_csv(args.features)
    raw = read_edge_list(args.graph)
    graph = build_graph([(u, v) for u, v, _ in raw], feats.shape[0],
                        self_loops=not args.no_self_loops)
    cfg = DiffusionConfig(alpha=args.alpha, T=args.T, h=args.h, m=args.m,
                          variant=args.variant,
                          gread_gamma=args.gread_gamma,
                          gread_nu=args.gread_nu)
    z = diffuse(args.variant, graph, feats, cfg)
    out_dir = _ensure_dir(os.path.dirname(os.path.abspath(args.out)) or ".")
    manifest = RunManifest(argv, out_dir, seed=None,
                           config={"alpha": args.alpha, "T": args.T,
                                   "h": args.h, "m": args.m,
                                   "variant": args.variant})
    manifest.add(write_matrix_csv(args.out, z))
    manifest.write()
    return 0


def _build_config(args) -> ModelConfig:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "epochs", None) is not None:
        overrides["epochs"] = args.epochs
    if args.preset:
        return presets.load_preset(args.preset, **overrides)
    if not args.config:
        raise ConfigError("pass --config cfg.json or --preset NAME")
    with open(args.config, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    obj.pop("note", None)
    obj.update(overrides)
    return ModelConfig.from_dict(obj)


def _cmd_train(args, argv):
    cfg = _build_config(args)
    ds = _load_files(args)
    run = model.train(ds, cfg)
    out = _ensure_dir(args.out)
    manifest = RunManifest(argv, out, seed=cfg.seed, config=cfg.to_dict())
    manifest.add(write_matrix_csv(os.path.join(out, "embeddings.csv"),
                                  run.embeddings))
    manifest.add(write_csv(
        os.path.join(out, "loss_history.csv"),
        ["epoch", "loss", "reg_term"],
        [(i + 1, run.loss_history[i], run.reg_history[i])
         for i in range(len(run.loss_history))]))
    manifest.add(_params_bin(os.path.join(out, "params.bin"), run.params))
    for name, mat in (("z1", run.z1), ("z2", run.z2),
                      ("pre1", run.pre1), ("pre2", run.pre2)):
        manifest.add(write_matrix_csv(os.path.join(out, f"{name}.csv"), mat))
    manifest.write()
    final = float(run.loss_history[-1]) if cfg.epochs else float("nan")
    print(f"trained {cfg.epochs} epochs; final loss {final!r}; "
          f"outputs in {out}")
    return 0


def _read_matrix(path) -> np.ndarray:
    from .graph import read_features_csv

    return read_features_csv(path)


def _cmd_eval(args, argv):
    from .graph import read_labels, read_split

    emb = _read_matrix(args.embeddings)
    labels = read_labels(args.labels)
    split = read_split(args.split, len(labels))
    if emb.shape[0] != len(labels):
        raise ConfigError(f"embeddings rows {emb.shape[0]} != labels "
                          f"{len(labels)}")
    out = _ensure_dir(args.out)
    manifest = RunManifest(argv, out, seed=args.seed, config=None)
    probe = evaluation.train_probe(emb, labels, split["train"],
                                   lr=args.probe_lr,
                                   epochs=args.probe_epochs, seed=args.seed)
    acc = {name: evaluation.accuracy(probe, emb, labels, split[name])
           for name in ("train", "val", "test") if len(split[name])}
    rc = evaluation.clustering_ratio(emb, labels, seed=args.seed)
    manifest.add(write_csv(os.path.join(out, "rc.csv"),
                           ["class", "r_c"], sorted(rc.items())))
    if args.z1 and args.z2:
        rep = evaluation.collapse_report(_read_matrix(args.z1),
                                         _read_matrix(args.z2))
        rows = []
        for i, v in enumerate(rep.spectrum1):
            rows.append(("z1", i, v, rep.participation1,
                         rep.direction_alignment))
        for i, v in enumerate(rep.spectrum2):
            rows.append(("z2", i, v, rep.participation2,
                         rep.direction_alignment))
        manifest.add(write_csv(
            os.path.join(out, "collapse.csv"),
            ["view", "component", "explained_variance",
             "participation_ratio", "direction_alignment"], rows))
    else:
        spec_ = evaluation.pca_spectrum(emb)
        pr = evaluation.pca_participation(emb)
        manifest.add(write_csv(
            os.path.join(out, "collapse.csv"),
            ["view", "component", "explained_variance",
             "participation_ratio", "direction_alignment"],
            [("combined", i, v, pr, "") for i, v in enumerate(spec_)]))
    manifest.write()
    for name, a in acc.items():
        print(f"{name}_accuracy {a!r}")
    return 0


def _cmd_spectral_check(args, argv):
    from .graph import build_graph, read_edge_list

    raw = read_edge_list(args.graph)
    n = args.n or (max(max(u, v) for u, v, _ in raw) + 1 if raw else 1)
    graph = build_graph([(u, v) for u, v, _ in raw], n,
                        self_loops=not args.no_self_loops)
    report = spectral.theorem_check(graph, args.alpha1, args.alpha2,
                                    args.tau, args.h, args.m)
    out_dir = _ensure_dir(os.path.dirname(os.path.abspath(args.out)) or ".")
    manifest = RunManifest(argv, out_dir, seed=None, config={
        "alpha1": args.alpha1, "alpha2": args.alpha2, "tau": args.tau,
        "h": args.h, "m": args.m})
    rows = [(r["i"], r["lambda"], r["g_alpha1"], r["g_alpha2"],
             r["normalized_ratio_1"], r["normalized_ratio_2"],
             r["pass_flags"]) for r in spectral.report_rows(report)]
    manifest.add(write_csv(args.out,
                           ["i", "lambda", "g_alpha1", "g_alpha2",
                            "normalized_ratio_1", "normalized_ratio_2",
                            "pass_flags"], rows))
    manifest.write()
    print(f"monotone1={report.monotone1} monotone2={report.monotone2} "
          f"retention={report.retention_ok} "
          f"sweep_monotone={report.sweep_monotone} "
          f"retention_margin={report.retention_margin!r}")
    return 0 if report.all_passed else 2


def _parse_grid(text):
    cells = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        bits = part.split(":")
        if len(bits) != 2:
            raise ConfigError(f"grid cell {part!r} is not 'alpha1:alpha2'")
        cells.append((float(bits[0]), float(bits[1])))
    if not cells:
        raise ConfigError("empty (alpha1, alpha2) grid")
    return cells


def _ablate_cell(ds, base: ModelConfig, pair, loss, seed, eval_every):
    alpha1, alpha2 = pair
    cfg = ModelConfig.from_dict({
        **base.to_dict(), "alpha1": alpha1, "alpha2": alpha2,
        "loss": loss, "seed": seed,
        "allow_equal_alpha": alpha1 == alpha2})
    curve = []

    def snapshot(epoch, state):
        if eval_every and (epoch % eval_every == 0 or epoch == cfg.epochs):
            z1, z2, _, _ = model.forward(ds, state["params"], cfg)
            emb = cfg.beta * z1 + (1 - cfg.beta) * z2
            probe = evaluation.train_probe(emb, ds.labels,
                                           ds.split["train"], seed=seed)
            curve.append((epoch, evaluation.accuracy(
                probe, emb, ds.labels, ds.split["test"])))

    run = model.train(ds, cfg, epoch_callback=snapshot if eval_every else None)
    probe = evaluation.train_probe(run.embeddings, ds.labels,
                                   ds.split["train"], seed=seed)
    acc = evaluation.accuracy(probe, run.embeddings, ds.labels,
                              ds.split["test"])
    return acc, curve


def _cmd_ablate(args, argv):
    try:
        pairs = _parse_grid(args.grid)
        loss_names = [s.strip() for s in args.losses.split(",") if s.strip()]
        if not loss_names:
            raise ConfigError("empty loss list")
    except ConfigError as exc:
        raise _UsageError(str(exc)) from None
    ds = _load_files(args)
    base = _build_config(args)
    seeds = list(range(args.seeds))
    out = _ensure_dir(args.out)
    manifest = RunManifest(argv, out, seed=args.seed, config=base.to_dict())

    jobs = [(pair, loss, seed) for pair in pairs for loss in loss_names
            for seed in seeds]
    results = {}
    failures = []

    def run_job(job):
        pair, loss, seed = job
        return job, _ablate_cell(ds, base, pair, loss, seed,
                                 args.eval_every)

    if args.threads > 1:
        with concurrent.futures.ThreadPoolExecutor(args.threads) as pool:
            futures = {pool.submit(run_job, j): j for j in jobs}
            for fut in concurrent.futures.as_completed(futures):
                job = futures[fut]
                try:
                    _, payload = fut.result()
                    results[job] = payload
                except FdgclError as exc:
                    failures.append((job, str(exc)))
    else:
        for job in jobs:
            try:
                results[job] = run_job(job)[1]
            except FdgclError as exc:
                failures.append((job, str(exc)))

    rows = []
    for pair in pairs:
        for loss in loss_names:
            accs = [results[(pair, loss, s)][0] for s in seeds
                    if (pair, loss, s) in results]
            mean = float(np.mean(accs)) if accs else float("nan")
            std = float(np.std(accs)) if accs else float("nan")
            rows.append((pair[0], pair[1], loss, len(accs), mean, std))
    manifest.add(write_csv(os.path.join(out, "ablation.csv"),
                           ["alpha1", "alpha2", "loss", "n_seeds",
                            "mean_accuracy", "std_accuracy"], rows))

    if args.eval_every:
        for loss in loss_names:
            curve_rows = []
            for pair in pairs:
                for seed in seeds:
                    payload = results.get((pair, loss, seed))
                    if payload is None:
                        continue
                    for epoch, acc in payload[1]:
                        curve_rows.append((pair[0], pair[1], seed, epoch,
                                           acc))
            manifest.add(write_csv(
                os.path.join(out, f"curve_{loss}.csv"),
                ["alpha1", "alpha2", "seed", "epoch", "test_accuracy"],
                curve_rows))

    if failures:
        path = os.path.join(out, "failures.log")
        with open(path, "w", encoding="utf-8") as fh:
            for job, msg in failures:
                fh.write(f"{job}: {msg}\n")
        manifest.add(path)
    manifest.write()
    print(f"ablation over {len(pairs)} alpha cells x {len(loss_names)} "
          f"losses x {len(seeds)} seeds -> {out}")
    return 0


# ---------------------------------------------------------------------------
# parser

def _add_data_args(p):
    p.add_argument("--graph", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--no-self-loops", action="store_true",
                   help="normalize without added self-loops (ablation)")


def build_parser() -> _Parser:
    parser = _Parser(prog="fdgcl",
                     description="fractional-diffusion graph contrastive "
                                 "learning toolkit")
    parser.add_argument("--version", action="version",
                        version=f"fdgcl {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("ml", help="evaluate the Mittag-Leffler decay law")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--asymptotic", type=int, default=None, metavar="N",
                   help="force the N-term asymptotic expansion")
    p.set_defaults(func=_cmd_ml)

    p = sub.add_parser("synth", help="generate a synthetic SBM dataset")
    p.add_argument("--preset", required=True,
                   choices=sorted(presets.SBM_PRESETS))
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("diffuse", help="diffuse features over a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--variant", default="grand",
                   choices=("grand", "gread"))
    p.add_argument("--gread-gamma", type=float, default=1.0)
    p.add_argument("--gread-nu", type=float, default=1.0)
    p.add_argument("--no-self-loops", action="store_true")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_diffuse)

    p = sub.add_parser("train", help="train the two-encoder model")
    _add_data_args(p)
    p.add_argument("--config", default=None, help="ModelConfig JSON")
    p.add_argument("--preset", default=None,
                   help="named preset (see presets package)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None,
                   help="override the preset/config epoch count")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="linear-probe a frozen embedding")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--z1", default=None, help="view-1 matrix CSV")
    p.add_argument("--z2", default=None, help="view-2 matrix CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--probe-lr", type=float, default=0.01)
    p.add_argument("--probe-epochs", type=int, default=300)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("spectral-check",
                       help="run the per-mode amplification harness")
    p.add_argument("--graph", required=True)
    p.add_argument("--n", type=int, default=None,
                   help="node count (default: max edge id + 1)")
    p.add_argument("--alpha1", type=float, required=True)
    p.add_argument("--alpha2", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--no-self-loops", action="store_true")
    p.add_argument("--out", required=True, help="report CSV path")
    p.set_defaults(func=_cmd_spectral_check)

    p = sub.add_parser("ablate", help="grid of train+eval runs")
    _add_data_args(p)
    p.add_argument("--config", default=None)
    p.add_argument("--preset", default=None)
    p.add_argument("--grid", required=True,
                   help="comma list of alpha1:alpha2 cells, "
                        "e.g. '0.01:1,1:1'")
    p.add_argument("--losses", default="reg_cosmean",
                   help="comma list of loss names")
    p.add_argument("--seeds", type=int, default=10,
                   help="number of seeds (0 .. n-1)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--eval-every", type=int, default=0,
                   help="probe the test accuracy every K epochs "
                        "(0 = final only)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ablate)

    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args, ["fdgcl"] + list(argv))
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FdgclError, FileNotFoundError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 2


def main() -> int:
    return dispatch(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
