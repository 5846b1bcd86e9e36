# mql:statement=1
# mql:kind=gen
# mql:data=<FIXTURES>/Blobs.csv
# mql:over=-
# mql:seed=42
# mql:missing=zero
# mql:algorithm=KMeans
import numpy as np
import pandas as pd
NA_TOKENS = ["", "-", "NA", "Na", "nA", "na", "NAN", "NAn", "NaN", "Nan", "nAN", "nAn", "naN", "nan"]
df = pd.read_csv("<FIXTURES>/Blobs.csv", na_values=NA_TOKENS, keep_default_na=False)
from sklearn.cluster import KMeans
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler
from sklearn.metrics import silhouette_score

# Extracting features (u, v)
X = df[["u", "v"]]
X_train = X[X.notna().all(axis=1)]

# Clustering in standardized feature space
model = make_pipeline(StandardScaler(), KMeans(n_clusters=3, n_init=10, max_iter=300, random_state=42))
model.fit(X_train)
predictions = model[-1].labels_
print("METRIC: inertia_standardized=%r" % float(model[-1].inertia_))
if len(set(predictions)) > 1:
    print("METRIC: silhouette=%r" % float(silhouette_score(model[0].transform(X_train), predictions)))
for value in predictions:
    print("PRED: %d" % int(value))

# Plotting
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
plt.figure(figsize=(8, 5))
Z = X_train.to_numpy(dtype=float)
plt.scatter(Z[:, 0], Z[:, 1], c=predictions, cmap="tab10")
centers = model[0].inverse_transform(model[-1].cluster_centers_)
plt.scatter(centers[:, 0], centers[:, 1], marker="x", color="black", s=80)
plt.xlabel("u")
plt.ylabel("v")
plt.savefig("<OUT>/stmt01_backend_plot.svg")
