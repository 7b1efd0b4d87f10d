"""Incomplete multi-view clustering by aligned semi-NMF."""

import json

from ._daimc import (
    ClusterResult,
    ConstraintViolation,
    Dataset,
    Error,
    FactorizationState,
    FormatError,
    Hyperparams,
    InvalidInput,
    IoError,
    NumericError,
    RegressionForm,
    SemiNMFState,
    SynthSpec,
    accuracy,
    apply_incomplete_rate,
    fit,
    fit_from,
    initialize,
    kkt_residual,
    kmeans,
    load_manifest,
    nmi,
    normalize,
    objective,
    removal_count,
    save_manifest,
    seminmf,
    solve_sylvester,
    synth_planted,
)
from . import _daimc

__version__ = "0.1.0"


def synth(n_per_cluster=100, k_clusters=3, dims=(10, 10, 10), separation=1.0, noise_sd=1.0, seed=0):
    spec = SynthSpec()
    spec.n_per_cluster = n_per_cluster
    spec.k_clusters = k_clusters
    spec.n_views = len(dims)
    spec.dims = list(dims)
    spec.separation = separation
    spec.noise_sd = noise_sd
    spec.seed = seed
    return synth_planted(spec)


def hyperparams(**kw):
    hp = Hyperparams()
    for name, value in kw.items():
        if not hasattr(hp, name):
            raise TypeError(f"unknown hyperparameter {name!r}")
        setattr(hp, name, value)
    return hp


def sweep(config):
    """Run a sweep described by a config dict (same schema as the CLI) and
    return the nested report as a dict."""
    return json.loads(_daimc._sweep(json.dumps(config)))


def run(config, out):
    """Single-configuration run writing report.csv, report.json and factors/
    under `out`."""
    return json.loads(_daimc._run(json.dumps(config), str(out)))
