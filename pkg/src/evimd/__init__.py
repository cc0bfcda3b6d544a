"""Event-camera independent-motion detection toolkit.

Pipeline: raw events -> corner events (:class:`CornerDetector`) -> tracked
clusters with image velocities (:class:`FlowTracker`) -> an ego-motion flow
model learned from joint encoders (:class:`EgoMotionRegressor`) -> per-event
independent-motion labels (:class:`IndependentMotionClassifier`). A seeded
scene simulator provides ground-truth streams and the :mod:`evimd.pipeline`
driver chains everything behind one config.
"""

from .classify import (
    LABEL_EGO,
    LABEL_INDEPENDENT_MOTION,
    IndependentMotionClassifier,
    classify_stream,
    mahalanobis,
)
from .corners import CornerDetector, gaussian_window, harris_response, sobel_kernels
from .ego_model import (
    EgoMotionRegressor,
    FlowStatistics,
    collect_examples,
    flow_statistics,
    median_bandwidth,
    train_model,
)
from .encoders import JointVelocityEstimator, smooth_velocities
from .evaluate import (
    DEFAULT_THRESHOLDS,
    PRPoint,
    distance_trace,
    export_trajectories,
    pr_sweep,
    read_pr_csv,
    write_pr_csv,
    write_svg_lines,
    write_trace_csv,
)
from .events import (
    EVENT_DTYPE,
    LABEL_BACKGROUND,
    LABEL_INDEPENDENT,
    LABEL_UNKNOWN,
    US_PER_S,
    LocalSurface,
    check_event_stream,
    make_events,
    surface_patch,
    surface_update,
)
from .exceptions import (
    BoundsError,
    ConfigError,
    CoverageError,
    DegenerateFitError,
    EvimdError,
    FormatError,
    InsufficientDataError,
    OrderingError,
    StageError,
    TruncatedFileError,
)
from .io import (
    DETECTION_DTYPE,
    FLOW_DTYPE,
    empty_flow_array,
    file_digest,
    read_detection_csv,
    read_encoder_csv,
    read_event_file,
    read_flow_file,
    read_velocity_csv,
    write_detection_csv,
    write_encoder_csv,
    write_event_file,
    write_flow_file,
    write_velocity_csv,
)
from .pipeline import PipelineConfig, PipelineInputs, run_pipeline
from .simulate import (
    ObjectSpec,
    Scenario,
    SceneConfig,
    TextureSpec,
    TrajectorySpec,
    get_scenario,
    joint_rates,
    project_checker_nodes,
    scenario_presets,
    simulate,
)
from .tracking import ClusterTracker, FlowTracker, fit_velocity

__version__ = "0.1.0"
