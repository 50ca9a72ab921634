# %% [markdown]
# The command-line workflow
#
# Write a synthetic bundle, track it and score the result, exactly as a user
# would from a shell (``posetrack synth``, ``posetrack track``, ...).

# %%
import tempfile
from pathlib import Path

from posetrack.cli import main

work = Path(tempfile.mkdtemp())
bundle = work / "bundle"
main(["synth", "--preset", "dropout", "--out", str(bundle)])
print(sorted(p.name for p in bundle.iterdir()))

# %%
main(["track", str(bundle / "detections.json"), "--flow-dir", str(bundle / "flow"),
      "--features", str(bundle / "features.txt"), "--out", str(work / "tracked.json")])
main(["eval", str(work / "tracked.json"), str(bundle / "gt.json"), "--out", str(work / "report")])

# %% Overlays for a figure.
main(["overlay", str(work / "tracked.json"), "--out", str(work / "overlay")])
print(len(list((work / "overlay").iterdir())), "frames drawn in", work / "overlay")
