# %% [markdown]
# Bringing back identities after an exit
#
# Each walker leaves the frame for five frames. When they come back, their
# appearance feature is compared with the gallery of lost tracks.

# %%
from posetrack import Gallery, ReidConfig, TrackerConfig, mota, run
from posetrack.synth import generate, reentry_scenario

bundle = generate(reentry_scenario())
for cfg in (TrackerConfig(), TrackerConfig(enable_reid=False)):
    out = run(bundle.observations, cfg=cfg)
    r = mota(out, bundle.ground_truth)
    ids = sorted({x.track_id for poses in out.values() for x in poses})
    print(f"retrieval {cfg.enable_reid!s:<5}  ids used {ids}  IDSW {r.total_idsw}")

# %% The gallery on its own.
g = Gallery()
g.insert(3, [0.0, 0.0], frame=10).insert(5, [60.0, 80.0], frame=12)
print(g.retrieve([55.0, 75.0], ReidConfig(100.0)))  # 5, about 7 away
print(g.retrieve([0.0, 100.0], ReidConfig(100.0)))  # None, exactly 100 away
