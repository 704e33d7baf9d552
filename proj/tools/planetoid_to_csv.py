#!/usr/bin/env python3
"""Convert Planetoid ind.<name>.* pickles to the edge_list_plus_csv layout."""

import argparse
import json
import pickle
import sys
import warnings
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def load(src: Path, name: str, part: str):
    warnings.filterwarnings("ignore", category=DeprecationWarning)
    with open(src / f"ind.{name}.{part}", "rb") as f:
        return pickle.load(f, encoding="latin1")


def convert(src: Path, dst: Path, name: str) -> None:
    allx, tx = load(src, name, "allx"), load(src, name, "tx")
    ally, ty = load(src, name, "ally"), load(src, name, "ty")
    graph = load(src, name, "graph")
    test_index = [int(line) for line in (src / f"ind.{name}.test.index").read_text().split()]

    features = sp.vstack([allx, tx]).tolil()
    labels = np.vstack([ally, ty])
    order = np.sort(test_index)
    features[test_index, :] = features[order, :]
    labels[test_index, :] = labels[order, :]
    n = features.shape[0]
    if len(graph) != n:
        sys.exit(f"{name}: graph has {len(graph)} nodes but features have {n} rows")

    dst.mkdir(parents=True, exist_ok=True)
    dense = features.toarray()
    np.savetxt(dst / "features.csv", dense, delimiter=",", fmt="%.17g")
    np.savetxt(dst / "labels.txt", labels.argmax(axis=1), fmt="%d")
    edges = sorted({(min(u, v), max(u, v)) for u, nbs in graph.items() for v in nbs if u != v})
    with open(dst / "edges.txt", "w") as f:
        f.writelines(f"{u} {v}\n" for u, v in edges)
    binary = bool(np.isin(dense, (0.0, 1.0)).all())
    meta = {"name": name, "feature_kind": "binary" if binary else "continuous", "num_classes": int(labels.shape[1])}
    (dst / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(f"{name}: {n} nodes, {dense.shape[1]} features, {len(edges)} edges, {meta['num_classes']} classes, "
          f"{meta['feature_kind']}")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("src", type=Path, help="directory holding ind.<name>.* files")
    p.add_argument("dst", type=Path)
    p.add_argument("--name", default="pubmed")
    a = p.parse_args()
    convert(a.src, a.dst, a.name)


if __name__ == "__main__":
    main()
