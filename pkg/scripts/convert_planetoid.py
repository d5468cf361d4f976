"""Convert a Planetoid-format citation dataset to fdgcl's file formats.

The widely mirrored distribution of Cora/Citeseer/Pubmed ships eight
pickled files per dataset:

    ind.<name>.x          CSR features of the labeled training nodes
    ind.<name>.y          one-hot labels for those nodes
    ind.<name>.tx         CSR features of the test nodes
    ind.<name>.ty         one-hot labels for the test nodes
    ind.<name>.allx       CSR features of all non-test nodes
    ind.<name>.ally       one-hot labels for all non-test nodes
    ind.<name>.graph      {node: [neighbors]} adjacency dict
    ind.<name>.test.index test node ids, one per line (possibly shuffled)

This script reassembles them in canonical node order and writes
graph.tsv / features.csv / labels.txt / split.json using the standard
public split (train = the x block, val = the next 500 nodes, test = the
test.index block).

Usage:
    python scripts/convert_planetoid.py --raw-dir path/to/raw \\
        --name cora --out data/cora
"""

import argparse
import json
import os
import pickle
import sys

import numpy as np
import scipy.sparse as sp


def _load(raw_dir, name, part):
    path = os.path.join(raw_dir, f"ind.{name}.{part}")
    with open(path, "rb") as fh:
        return pickle.load(fh, encoding="latin1")


def load_planetoid(raw_dir, name):
    x = sp.csr_matrix(_load(raw_dir, name, "x"))
    y = np.asarray(_load(raw_dir, name, "y"))
    tx = sp.csr_matrix(_load(raw_dir, name, "tx"))
    ty = np.asarray(_load(raw_dir, name, "ty"))
    allx = sp.csr_matrix(_load(raw_dir, name, "allx"))
    ally = np.asarray(_load(raw_dir, name, "ally"))
    graph = _load(raw_dir, name, "graph")
    with open(os.path.join(raw_dir, f"ind.{name}.test.index")) as fh:
        test_idx = np.array([int(line) for line in fh if line.strip()])

    # test features/labels arrive in test.index order; scatter them back
    n = allx.shape[0] + len(test_idx)
    order = np.sort(test_idx)
    tx_full = sp.lil_matrix((len(test_idx), x.shape[1]))
    ty_full = np.zeros((len(test_idx), y.shape[1]))
    pos = {idx: i for i, idx in enumerate(order)}
    for row, idx in enumerate(test_idx):
        tx_full[pos[idx]] = tx[row]
        ty_full[pos[idx]] = ty[row]

    features = sp.vstack([allx, sp.csr_matrix(tx_full)]).toarray()
    labels_1hot = np.vstack([ally, ty_full])
    labels = labels_1hot.argmax(axis=1)

    edges = set()
    for u, nbrs in graph.items():
        for v in nbrs:
            if u != v:
                edges.add((min(u, v), max(u, v)))

    # standard public split: train = the x block, val = the next 500
    # non-test nodes (clamped for small corpora), test = test.index
    val_end = min(x.shape[0] + 500, allx.shape[0])
    split = {
        "train": list(range(x.shape[0])),
        "val": list(range(x.shape[0], val_end)),
        "test": [int(i) for i in order],
    }
    return n, sorted(edges), features, labels, split


def write_fdgcl(out_dir, n, edges, features, labels, split):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "graph.tsv"), "w") as fh:
        for u, v in edges:
            fh.write(f"{u}\t{v}\n")
    with open(os.path.join(out_dir, "features.csv"), "w") as fh:
        for row in features:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    with open(os.path.join(out_dir, "labels.txt"), "w") as fh:
        for v in labels:
            fh.write(f"{int(v)}\n")
    with open(os.path.join(out_dir, "split.json"), "w") as fh:
        json.dump(split, fh)
        fh.write("\n")


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--raw-dir", required=True,
                    help="directory containing the ind.<name>.* files")
    ap.add_argument("--name", default="cora")
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    n, edges, features, labels, split = load_planetoid(args.raw_dir,
                                                       args.name)
    write_fdgcl(args.out, n, edges, features, labels, split)
    print(f"wrote {n} nodes, {len(edges)} edges, "
          f"{features.shape[1]} features to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
