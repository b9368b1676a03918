"""kinplex: jointed mechanisms, their kinematic maps, and how hard those
maps are to invert continuously.

The core objects are Mechanism (links and joints with DH frames),
KinematicMap (configuration chart to workspace model, with Jacobians),
ManipulationPlan (a partition of C x W with a continuous-path rule on each
piece), and the validation/instability reports built on top of them.
"""

__version__ = "0.1.0"

from .charts import (
    Chart,
    Circle,
    Interval,
    Line,
    RigidModel,
    RotationModel,
    SphereModel,
    annulus,
    circle,
    cylinder,
    interval,
    plane,
    space,
    torus,
    wrap_angle,
    wrap_positive,
)
from .errors import (
    AxisUndefinedError,
    DocumentError,
    DomainError,
    GimbalLockError,
    KinplexError,
    PreconditionError,
    TrackingLostError,
    UnsupportedTopologyError,
    VacuousTestError,
)
from .domains import (
    Box,
    Clause,
    Domain,
    DomainContext,
    Feature,
    arc,
    coord,
    reldiff,
    secdiff,
    span,
)
from .kinematics import (
    CANONICAL_NAMES,
    FrameChain,
    KinematicMap,
    SingularScanReport,
    canonical_map,
    coplanarity_test,
    forward_kinematics,
    identity_map,
    jacobian,
    jacobian_fd,
    map_from_mechanism,
    product_map,
    singular_scan,
    singular_test,
    singularity_cross_report,
)
from .mechanism import (
    DHParams,
    JointSpec,
    Mechanism,
    MobilityReport,
    classify_mechanism,
    dh_transform,
    joint_chart,
    mobility,
    parse_mechanism,
    serial_chain,
    serialize_mechanism,
)
from .planning import (
    BUILTIN_PLANS,
    KNOWN_VALUES,
    KnownValue,
    ManipulationPlan,
    PathInC,
    PlanPiece,
    builtin_plan,
    combine_csec_cat,
    combine_from_named,
    disjointify,
    h_fixture_gap,
    h_fixture_plan,
    h_fixture_single_plan,
    identity_circle_plan,
    identity_interval_plan,
    identity_torus_plan,
    known_values,
    parse_plan,
    plateau_map,
    product_plan,
    pullback_plan,
    serialize_plan,
)
from .pose import (
    RigidPose,
    Rotation,
    ScrewParams,
    euler_zyx_from_rot,
    pose_compose,
    pose_from_homogeneous,
    pose_to_homogeneous,
    rot_from_angle_axis,
    rot_from_euler_zyx,
    rot_from_matrix,
    rot_to_angle_axis,
    screw_decompose,
    screw_to_pose,
)
from .sections import (
    CatPiece,
    SectionPiece,
    annulus_section_cover,
    canonical_section,
    cat_cover_torus,
    sphere_section_cover,
    trivial_cat_cover,
)
from .tracking import (
    ProbeReport,
    TrackingResult,
    TrackingSpec,
    WorkPath,
    cyclicity_drift,
    lift_path,
    probe_loop,
    shrinking_loop_probe,
)
from .validation import (
    InstabilityReport,
    ValidationCheck,
    ValidationReport,
    measure_instability,
    validate_plan,
)

__all__ = [name for name in dir() if not name.startswith("_")]
