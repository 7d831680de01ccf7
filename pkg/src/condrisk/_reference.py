"""Published benchmark numbers for two external rejection methods.

These are static reference values carried for side-by-side display in
reports: a selective network with an integrated rejector ("selnet") and a
no-rejection-learning nearest-neighbor rejector ("nn_knnrej"). They come
from the published benchmark study on the same eight datasets and four
deferral costs and are never recomputed by this package.
"""

REFERENCE_COSTS = (0.2, 0.5, 1.0, 2.0)

# dataset -> method -> RwR loss at costs 0.2 / 0.5 / 1.0 / 2.0
REFERENCE_RWR = {
    "concrete": {"selnet": (0.75, 1.09, 2.82, 3.16), "nn_knnrej": (0.20, 0.50, 1.00, 2.00)},
    "wine": {"selnet": (0.18, 0.24, 0.25, 0.25), "nn_knnrej": (0.23, 0.27, 0.28, 0.28)},
    "airfoil": {"selnet": (0.21, 0.49, 0.99, 1.84), "nn_knnrej": (0.20, 0.50, 1.00, 2.02)},
    "energy": {"selnet": (0.26, 0.49, 0.86, 1.39), "nn_knnrej": (0.21, 0.58, 1.03, 1.60)},
    "housing": {"selnet": (1.27, 1.31, 2.23, 2.47), "nn_knnrej": (0.22, 0.59, 1.00, 2.00)},
    "solar": {"selnet": (0.18, 0.45, 0.52, 0.68), "nn_knnrej": (0.19, 0.40, 0.60, 0.75)},
    "forest": {"selnet": (0.54, 0.78, 1.25, 2.17), "nn_knnrej": (0.30, 0.50, 1.09, 2.13)},
    "parkinsons": {"selnet": (0.20, 0.60, 1.17, 1.97), "nn_knnrej": (0.20, 0.50, 1.00, 2.00)},
}
