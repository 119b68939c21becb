//! Error taxonomy shared across the library.
//!
//! Variants are grouped by the operation family that raises them; URDF
//! parsing keeps its own sub-enum so every parse failure stays a distinct
//! diagnostic.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported joint type code {code}")]
    UnsupportedJointType { code: u8 },

    #[error("unknown joint type name {0:?}")]
    UnknownJointTypeName(String),

    #[error("axis is degenerate (norm {norm:.3e})")]
    DegenerateAxis { norm: f64 },

    #[error("axis is not unit length (norm {norm})")]
    NonUnitAxis { norm: f64 },

    #[error("invalid motion range [{lo}, {hi}]: {reason}")]
    InvalidRange { lo: f64, hi: f64, reason: &'static str },

    #[error("value {value} outside normalization domain ({reason})")]
    RangeDomain { value: f64, reason: &'static str },

    #[error("state index {0} outside [0, 1]")]
    StateIndexOutOfRange(f64),

    #[error("matrix is not a rigid rotation: {0}")]
    NonRigidRotation(&'static str),

    #[error("invalid camera: {0}")]
    Camera(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("point map resolution mismatch: {w0}x{h0} vs {w1}x{h1}")]
    ResolutionMismatch { w0: usize, h0: usize, w1: usize, h1: usize },

    #[error("degenerate cluster: {0}")]
    DegenerateCluster(String),

    #[error("assignment needs rows <= cols, got {rows}x{cols}")]
    AssignmentShape { rows: usize, cols: usize },

    #[error("cost matrix contains a non-finite entry at ({row}, {col})")]
    NonFiniteCost { row: usize, col: usize },

    #[error("type scores for slot {slot} are not a probability simplex: {reason}")]
    NotSimplex { slot: usize, reason: &'static str },

    #[error("point map file: {0}")]
    PmapFormat(String),

    #[error(transparent)]
    Urdf(#[from] UrdfError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// URDF subset parse/validation failures.
#[derive(Debug, thiserror::Error)]
pub enum UrdfError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),

    #[error("document has no <robot> root")]
    MissingRobot,

    #[error("duplicate link name {0:?}")]
    DuplicateLink(String),

    #[error("duplicate joint name {0:?}")]
    DuplicateJoint(String),

    #[error("joint {joint:?} has unknown type {type_name:?}")]
    UnknownJointType { joint: String, type_name: String },

    #[error("joint {joint:?} references undefined link {link:?}")]
    DanglingLink { joint: String, link: String },

    #[error("link {link:?} has more than one parent joint")]
    MultipleParents { link: String },

    #[error("joint graph is not a tree rooted at a single base link (roots: {roots:?})")]
    NotSingleRooted { roots: Vec<String> },

    #[error("joint graph contains a cycle through link {link:?}")]
    CyclicGraph { link: String },

    #[error("{kind} joint {joint:?} requires a <limit> element")]
    MissingLimit { joint: String, kind: &'static str },

    #[error("element <{element}> attribute {attribute:?}: bad number {text:?}")]
    BadNumber { element: &'static str, attribute: &'static str, text: String },

    #[error("joint {joint:?}: missing required element <{element}>")]
    MissingElement { joint: String, element: &'static str },

    #[error("model has no links")]
    Empty,
}
