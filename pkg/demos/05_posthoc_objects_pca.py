"""
Which objects are hard to predict?
==================================

Every training object is predicted by the models whose validation part
contains it. Objects that are often misclassified stand out, and a PCA of
the selected features shows where they lie. The CSV files written at the
end are ready for any plotting tool.
"""

# %%
import tempfile

import numpy as np

from rentfs import (ElasticNetConfig, apply_standardizer, correlation_loadings,
                    export_plot_data, fit_standardizer, make_synthetic, pca_fit,
                    score_features, select, summarize_objects,
                    train_ensemble)

data, informative = make_synthetic("classification", 200, 40, 4, noise=1.0, seed=5)
train = apply_standardizer(data, fit_standardizer(data))
ens = train_ensemble(train, 100, ElasticNetConfig(0.1, 0.9), master_seed=0)
selected = select(score_features(ens.weight_matrix), (0.9, 0.9, 0.975)).selected
print("selected:", list(selected), " informative:", informative.tolist())

# %%
summaries = summarize_objects(ens, train.y)
worst = sorted(summaries, key=lambda s: -s.pct_incorrect)[:5]
for s in worst:
    print(f"object {s.object_index:3d} class {int(s.true_target)}: "
          f"{s.n_incorrect}/{s.n_val_appearances} wrong ({s.pct_incorrect:.1f} %), "
          f"mean ProbC1 {s.mean_probc1:.2f}")

# %%
pca = pca_fit(train.x[:, list(selected)], n_components=2)
print("explained variance:", np.round(pca.explained_variance_ratio, 3))
cl = correlation_loadings(pca, train.x[:, list(selected)])
for j, row in zip(selected, cl):
    print(f"  {train.feature_names[j]}: r = {np.round(row, 2)}")

# %%
out = tempfile.mkdtemp(prefix="rent_posthoc_")
for path in export_plot_data(out, summaries, pca, [train.feature_names[j] for j in selected]):
    print("wrote", path)
