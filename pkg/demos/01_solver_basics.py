"""
Elastic-net building blocks
===========================

The elementary models of the ensemble are elastic-net GLMs. This script
checks the solver against closed forms on a single feature, shows how the
L1 penalty zeroes weights, and scores models with BIC.
"""

# %%
import numpy as np

from rentfs import ElasticNetConfig, bic, fit_linear_enet, fit_logistic_enet, predict

rng = np.random.default_rng(0)

# %%
# One feature scaled so that x'x / I = 1. Lasso then reduces to a
# soft-threshold of x'y / I and ridge to a shrinkage by 1 / (1 + gamma).
x = rng.normal(size=100)
x = (x - x.mean()) / x.std()
y = 0.6 * x + rng.normal(size=100)
z = x @ (y - y.mean()) / 100

for gamma in (0.1, 0.5, 1.0):
    lasso = fit_linear_enet(x[:, None], y, ElasticNetConfig(gamma, 1.0, tol=1e-12))
    ridge = fit_linear_enet(x[:, None], y, ElasticNetConfig(gamma, 0.0, tol=1e-12))
    print(f"gamma={gamma}: lasso {lasso.weights[0]:+.6f} vs "
          f"{np.sign(z) * max(abs(z) - gamma, 0):+.6f}, "
          f"ridge {ridge.weights[0]:+.6f} vs {z / (1 + gamma):+.6f}")

# %%
# A small regularisation path: larger gamma, fewer nonzero weights.
X = rng.normal(size=(80, 30))
X = (X - X.mean(0)) / X.std(0, ddof=1)
w = np.zeros(30)
w[:4] = (2.0, -1.5, 1.0, 0.5)
yy = X @ w + 0.5 * rng.normal(size=80)
for gamma in (0.01, 0.1, 0.3, 1.0):
    m = fit_linear_enet(X, yy, ElasticNetConfig(gamma, 1.0))
    print(f"gamma={gamma:<5} nonzero={m.n_nonzero:2d}  BIC={bic(m, X, yy):8.2f}  "
          f"sweeps={m.n_iterations}")

# %%
# Logistic regression uses reweighted least squares around the same
# coordinate descent; predictions are class-1 probabilities.
labels = (X[:, 0] - X[:, 1] + rng.normal(size=80) > 0).astype(float)
clf = fit_logistic_enet(X, labels, ElasticNetConfig(0.05, 0.9))
p = predict(clf, X)
print("nonzero:", np.flatnonzero(clf.weights))
print("training accuracy:", np.mean((p >= 0.5) == labels))
