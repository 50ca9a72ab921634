# %% [markdown]
# Association between frames
#
# Two people walk past each other. Each frame we score every (track,
# detection) pair with OKS and solve the assignment with the Hungarian method.

# %%
import numpy as np

from posetrack import DEFAULT_SKELETON, build_similarity, gate, hungarian_assign
from posetrack.synth import crossing_scenario, generate

bundle = generate(crossing_scenario())
obs = bundle.observations

# %% Similarity of frame 4 detections against frame 3 detections.
m = build_similarity(obs[3].detections, obs[4].detections, DEFAULT_SKELETON)
np.set_printoptions(precision=3, suppress=True)
print(m.weights)

# %% The assignment keeps each person on their own row.
pairs = hungarian_assign(m)
print(pairs)
print(gate(pairs, m, 0.2))

# %% A hand-made matrix where greedy picking goes wrong.
w = np.array([[10, 9], [9, 1]], dtype=float)
greedy_total = 10 + 1  # (0, 0) first leaves only (1, 1)
best = hungarian_assign(w)
print(best, "total", sum(w[i, j] for i, j in best), "greedy", greedy_total)
