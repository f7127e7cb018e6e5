"""Deterministic synthetic dataset builders and public-dataset discovery
shared across the test suite."""

import os
from pathlib import Path

import numpy as np

from mlelm.data import MultiLabelDataset

# Reference statistics for the six public KEEL/MULAN multi-label datasets.
# Used only when the corresponding ARFF files are available locally.
PUBLIC_DATASETS = {
    "emotions": {
        "labels": 6,
        "stats": {
            "samples": 593,
            "features": 72,
            "labels": 6,
            "label_cardinality": 1.87,
            "label_density": 0.312,
        },
    },
    "yeast": {
        "labels": 14,
        "stats": {
            "samples": 2417,
            "features": 103,
            "labels": 14,
            "label_cardinality": 4.24,
            "label_density": 0.303,
        },
    },
    "scene": {
        "labels": 6,
        "stats": {
            "samples": 2407,
            "features": 294,
            "labels": 6,
            "label_cardinality": 1.07,
            "label_density": 0.178,
        },
    },
    "corel5k": {
        "labels": 374,
        "stats": {
            "samples": 5000,
            "features": 499,
            "labels": 374,
            "label_cardinality": 3.52,
            "label_density": 0.009,
        },
    },
    "enron": {
        "labels": 53,
        "stats": {
            "samples": 1702,
            "features": 1001,
            "labels": 53,
            "label_cardinality": 3.38,
            "label_density": 0.064,
        },
    },
    "medical": {
        "labels": 45,
        "stats": {
            "samples": 978,
            "features": 1449,
            "labels": 45,
            "label_cardinality": 1.25,
            "label_density": 0.027,
        },
    },
}

FIXTURE_DIR = Path(__file__).resolve().parent / "data"


def dataset_dir() -> Path:
    return Path(os.environ.get("MLELM_DATA_DIR", Path(__file__).resolve().parents[1] / "datasets"))


def find_public_dataset(name: str):
    """Path of a locally available public dataset, or None."""
    root = dataset_dir()
    for candidate in (f"{name}.arff", f"{name.capitalize()}.arff", f"{name.upper()}.arff"):
        path = root / candidate
        if path.is_file():
            return path
    return None


def separable_dataset(n, d, m, seed, margin=0.0, name="synthetic"):
    """Labels are thresholded linear functions of the features, so a wide
    enough network can separate them.

    Each label's linear score is centered at its median so both classes are
    populated. ``margin`` > 0 rejects samples whose score comes within
    ``margin`` standard deviations of any label's cut, which removes
    borderline samples and makes generalization easy.
    """
    rng = np.random.default_rng(seed)
    w = rng.normal(size=(d, m))
    calibration = rng.uniform(-1.0, 1.0, (512, d)) @ w
    cuts = np.median(calibration, axis=0)
    spread = calibration.std(axis=0)
    kept = []
    total = 0
    for _ in range(64):
        pool = rng.uniform(-1.0, 1.0, (max(2 * n, 128), d))
        scores = pool @ w
        if margin > 0.0:
            keep = (np.abs(scores - cuts) >= margin * spread).all(axis=1)
            pool = pool[keep]
        kept.append(pool)
        total += pool.shape[0]
        if total >= n:
            break
    else:
        raise ValueError("margin too aggressive for the requested sample count")
    x = np.vstack(kept)[:n]
    y = (x @ w > cuts).astype(np.int8)
    return MultiLabelDataset(
        features=x,
        labels=y,
        feature_names=tuple(f"f{j}" for j in range(d)),
        label_names=tuple(f"l{j}" for j in range(m)),
        name=name,
    )


def random_dataset(n, d, m, seed, label_rate=0.4, name="random"):
    """Uniform features with independent Bernoulli labels."""
    rng = np.random.default_rng(seed)
    return MultiLabelDataset(
        features=rng.uniform(-1.0, 1.0, (n, d)),
        labels=(rng.random((n, m)) < label_rate).astype(np.int8),
        feature_names=tuple(f"f{j}" for j in range(d)),
        label_names=tuple(f"l{j}" for j in range(m)),
        name=name,
    )
