"""
Selection stability and ensemble size
=====================================

Repeated runs on the same training data differ only in how the subsamples
are drawn. Stability of the selected sets across runs is measured with
the Nogueira index. Larger ensembles average out subsample noise, so the
index grows with K.
"""

# %%
import numpy as np

from rentfs import (ElasticNetConfig, apply_standardizer, derive_seed, fit_standardizer,
                    make_synthetic, nogueira_stability, score_features, search_cutoffs,
                    search_enet, select, stratified_split, train_ensemble)
from rentfs.data import STREAM_REPEAT

data, informative = make_synthetic("classification", 250, 300, 10, noise=1.0, seed=1)
split = stratified_split(data, 0.3, 0)
train = apply_standardizer(split.train, fit_standardizer(split.train))
gamma, alpha, _ = search_enet(train)
enet = ElasticNetConfig(gamma, alpha)
print(f"gamma={gamma}, alpha={alpha}")

# %%
n_runs = 10
for k in (5, 20, 50):
    z = np.zeros((n_runs, train.n_features))
    for r in range(n_runs):
        ens = train_ensemble(train, k, enet, master_seed=derive_seed(0, STREAM_REPEAT, r))
        cut, _ = search_cutoffs(ens, train)
        z[r, list(select(score_features(ens.weight_matrix), cut).selected)] = 1
    hits = z[:, informative].sum(1).mean()
    print(f"K={k:3d}: stability {nogueira_stability(z):.3f}, mean |F*| "
          f"{z.sum(1).mean():.1f}, informative found {hits:.1f}/10")
