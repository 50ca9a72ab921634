"""Multi-person pose tracking with fused keypoint confidence.

Detections carry per-joint location and availability probabilities; the
tracker filters joints on their product, associates poses across frames by
OKS with the Hungarian method, revives missed people with optical flow and
recovers returning people from an appearance gallery.
"""
from .association import (AssignmentResult, SimilarityMatrix, associate, build_similarity, gate,
                          hungarian_assign)
from .confidence import (GaussianSpec, LossConfig, decode_heatmap, filter_keypoints, focal_loss,
                         fuse_confidence, heatmap_mse_loss, render_gaussian)
from .metrics import (ApReport, GroundTruthPerson, GroundTruthSequence, MotaReport, map_eval,
                      match_joints, mota)
from .reid import Gallery, ReidConfig
from .revision import (ConstantVelocityFlowProvider, DenseFileFlowProvider, FieldFlowProvider,
                       FlowField, IdentityFlowProvider, RevisionConfig, oks_nms,
                       overlap_similarity, propose_box, score_filter, suppress_candidates,
                       warp_pose)
from .skeleton import (DEFAULT_SKELETON, BBox, Keypoint, Pose, SkeletonSpec, TrackedPose,
                       bbox_from_keypoints, iou, object_scale, oks)
from .tracker import FrameObservations, PoseTracker, TrackerConfig, run

__version__ = "0.1.0"
