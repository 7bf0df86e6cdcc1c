#!/usr/bin/env python3
"""Regenerates the checked-in fixture models, datasets and reference sidecars.

Trains small dense classifiers with scikit-learn and writes them in the
engine's JSON model format and NNDS binary dataset format. The C++ test
suite only reads the files written here; it never runs this script.

    python3 fixtures/generate_fixtures.py [--out fixtures]
"""
import argparse
import json
import pathlib
import struct
import warnings

import numpy as np
from sklearn.datasets import load_digits
from sklearn.exceptions import ConvergenceWarning
from sklearn.model_selection import train_test_split
from sklearn.neural_network import MLPClassifier


def fmt(x):
    return np.format_float_positional(np.float32(x), unique=True, trim="-")


def write_model(path, name, input_dim, layers, bounds=None):
    lines = ["{", '  "format_version": 1,', f'  "name": "{name}",', f'  "input_dim": {input_dim},']
    if bounds is None:
        lines.append('  "input_bounds": {"lower": 0, "upper": 1},')
    else:
        lo, hi = bounds
        lines.append('  "input_bounds": {')
        lines.append('    "lower": [' + ", ".join(fmt(v) for v in lo) + "],")
        lines.append('    "upper": [' + ", ".join(fmt(v) for v in hi) + "]")
        lines.append("  },")
    lines.append('  "layers": [')
    for li, (w, b, act) in enumerate(layers):
        lines.append("    {")
        lines.append(f'      "units": {w.shape[1]},')
        lines.append(f'      "activation": "{act}",')
        lines.append('      "weights": [')
        rows = ["        [" + ", ".join(fmt(v) for v in row) + "]" for row in w]
        lines.append(",\n".join(rows))
        lines.append("      ],")
        lines.append('      "bias": [' + ", ".join(fmt(v) for v in b) + "]")
        lines.append("    }" + ("," if li + 1 < len(layers) else ""))
    lines.append("  ]")
    lines.append("}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_dataset(path, x, y, n_classes):
    x = np.asarray(x, dtype="<f4")
    y = np.asarray(y, dtype="<u4")
    with open(path, "wb") as fh:
        fh.write(b"NNDS")
        fh.write(struct.pack("<IIII", 1, x.shape[0], x.shape[1], n_classes))
        fh.write(x.tobytes(order="C"))
        fh.write(y.tobytes())


def reference_forward(layers, x):
    a = np.asarray(x, dtype=np.float64)
    for w, b, act in layers:
        z = a @ w.astype(np.float64) + b.astype(np.float64)
        if act == "relu":
            a = np.maximum(z, 0.0)
        elif act == "sigmoid":
            a = 1.0 / (1.0 + np.exp(-z))
        else:
            a = z
    return a


def export_classifier(clf, act, binary):
    layers = []
    n = len(clf.coefs_)
    for k, (w, b) in enumerate(zip(clf.coefs_, clf.intercepts_)):
        w = w.astype(np.float32)
        b = b.astype(np.float32)
        if k + 1 == n:
            if binary:
                # One logistic output becomes two logits [0, z]; softmax of
                # that pair equals the logistic of z.
                w = np.concatenate([np.zeros_like(w), w], axis=1)
                b = np.concatenate([np.zeros_like(b), b])
            layers.append((w, b, "identity"))
        else:
            layers.append((w, b, act))
    return layers


def sidecar(path, layers, x_test, y_test):
    logits = reference_forward(layers, x_test)
    acc = float(np.mean(np.argmax(logits, axis=1) == y_test))
    path.write_text(json.dumps({"accuracy": acc,
                                "sample_logits": logits[:10].tolist()}, indent=1) + "\n",
                    encoding="utf-8")
    return acc


def train(x, y, hidden, act, seed, epochs=20):
    clf = MLPClassifier(hidden_layer_sizes=hidden, activation=act, solver="adam",
                        learning_rate_init=0.001, batch_size=16, max_iter=epochs,
                        random_state=seed, alpha=1e-4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        clf.fit(x, y)
    return clf


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    digits = load_digits()
    x = (digits.data / 16.0).astype(np.float32)
    y = digits.target.astype(np.int64)
    x_tr, x_te, y_tr, y_te = train_test_split(x, y, test_size=360, random_state=0, stratify=y)
    write_dataset(out / "digits_test.nnds", x_te, y_te, 10)

    relu = train(x_tr, y_tr, (32, 32), "relu", seed=1)
    layers = export_classifier(relu, "relu", binary=False)
    write_model(out / "mlp_8x8digits.json", "mlp_8x8digits", 64, layers)
    print("digits relu acc", sidecar(out / "mlp_8x8digits.ref.json", layers, x_te, y_te))

    sig = train(x_tr, y_tr, (32, 32), "logistic", seed=2, epochs=60)
    layers = export_classifier(sig, "sigmoid", binary=False)
    write_model(out / "mlp_8x8digits_sigmoid.json", "mlp_8x8digits_sigmoid", 64, layers)
    print("digits sigmoid acc", sidecar(out / "mlp_8x8digits_sigmoid.ref.json", layers, x_te, y_te))

    # Two overlapping Gaussian classes over 30 features, min-max scaled into [0,1].
    rng = np.random.default_rng(7)
    n = 1200
    labels = rng.integers(0, 2, size=n)
    centers = rng.normal(0.0, 1.0, size=(2, 30))
    feats = centers[labels] * 0.6 + rng.normal(0.0, 1.0, size=(n, 30))
    lo, hi = feats.min(axis=0), feats.max(axis=0)
    feats = ((feats - lo) / (hi - lo)).astype(np.float32)
    xb_tr, xb_te, yb_tr, yb_te = train_test_split(feats, labels, test_size=300, random_state=0)
    write_dataset(out / "synthetic_binary_test.nnds", xb_te, yb_te, 2)
    binc = train(xb_tr, yb_tr, (64, 64), "relu", seed=3)
    layers = export_classifier(binc, "relu", binary=True)
    write_model(out / "mlp_synthetic_binary.json", "mlp_synthetic_binary", 30, layers)
    print("binary acc", sidecar(out / "mlp_synthetic_binary.ref.json", layers, xb_te, yb_te))


if __name__ == "__main__":
    main()
