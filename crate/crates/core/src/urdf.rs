//! URDF subset: parse, validate, emit, and flatten joints to world frame.
//!
//! Supported: `<robot>`, `<link name>`, `<joint name type>` with
//! `<origin xyz rpy>`, `<parent link>`, `<child link>`, `<axis xyz>` and
//! `<limit lower upper>`. Joint types fixed/revolute/continuous/prismatic.
//! Anything else inside a link is ignored; unknown joint types are errors.
//!
//! rpy follows the URDF convention: extrinsic X-Y-Z, i.e.
//! R = Rz(yaw) * Ry(pitch) * Rx(roll).

use nalgebra::{Rotation3, Vector3};
use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Result, UrdfError};
use crate::kinematics::{Joint, JointType, RigidTransform, GEOM_TOL};

/// Range assigned to a parsed `continuous` joint: one full turn.
pub const CONTINUOUS_RANGE: (f64, f64) = (-std::f64::consts::PI, std::f64::consts::PI);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrdfLink {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrdfJoint {
    pub name: String,
    pub joint_type: JointType,
    pub parent: String,
    pub child: String,
    pub origin_xyz: Vector3<f64>,
    pub origin_rpy: Vector3<f64>,
    /// Absent for fixed joints.
    pub axis: Option<Vector3<f64>>,
    /// Absent for fixed and continuous joints.
    pub limit: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrdfModel {
    pub name: String,
    pub links: Vec<UrdfLink>,
    pub joints: Vec<UrdfJoint>,
}

/// A parsed model plus non-fatal diagnostics (defaulted axes etc).
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub model: UrdfModel,
    pub warnings: Vec<String>,
}

// ================================= parse ==================================

pub fn parse_urdf(xml: &str) -> Result<ParseOutcome> {
    let doc = roxmltree::Document::parse(xml)
        .map_err(|e| UrdfError::MalformedXml(e.to_string()))?;
    let robot = doc.root_element();
    if robot.tag_name().name() != "robot" {
        return Err(UrdfError::MissingRobot.into());
    }
    let mut warnings = Vec::new();
    let mut links = Vec::new();
    let mut joints = Vec::new();

    for node in robot.children().filter(|n| n.is_element()) {
        match node.tag_name().name() {
            "link" => {
                let name = require_name(&node, "link")?;
                links.push(UrdfLink { name });
            }
            "joint" => joints.push(parse_joint(&node, &mut warnings)?),
            _ => {}
        }
    }

    let model = UrdfModel {
        name: robot.attribute("name").unwrap_or("robot").to_string(),
        links,
        joints,
    };
    validate_model(&model)?;
    Ok(ParseOutcome { model, warnings })
}

fn require_name(node: &roxmltree::Node, element: &'static str) -> Result<String> {
    node.attribute("name")
        .map(str::to_string)
        .ok_or_else(|| UrdfError::MissingElement { joint: format!("<{element}>"), element: "name" }.into())
}

fn parse_joint(node: &roxmltree::Node, warnings: &mut Vec<String>) -> Result<UrdfJoint> {
    let name = require_name(node, "joint")?;
    let type_name = node.attribute("type").unwrap_or("").to_string();
    let joint_type = JointType::from_name(&type_name)
        .map_err(|_| UrdfError::UnknownJointType { joint: name.clone(), type_name })?;

    let child_of = |tag: &str| {
        node.children()
            .filter(|n| n.is_element())
            .find(|n| n.tag_name().name() == tag)
    };
    let link_ref = |tag: &'static str| -> Result<String> {
        let el = child_of(tag)
            .ok_or_else(|| UrdfError::MissingElement { joint: name.clone(), element: tag })?;
        el.attribute("link")
            .map(str::to_string)
            .ok_or_else(|| UrdfError::MissingElement { joint: name.clone(), element: tag }.into())
    };
    let parent = link_ref("parent")?;
    let child = link_ref("child")?;

    let (origin_xyz, origin_rpy) = match child_of("origin") {
        Some(el) => (
            parse_vec3(&el, "origin", "xyz", Vector3::zeros())?,
            parse_vec3(&el, "origin", "rpy", Vector3::zeros())?,
        ),
        None => (Vector3::zeros(), Vector3::zeros()),
    };

    let raw_axis = match child_of("axis") {
        Some(el) => Some(parse_vec3(&el, "axis", "xyz", Vector3::x())?),
        None => None,
    };
    let axis = if joint_type.is_kinematic() {
        Some(raw_axis.unwrap_or_else(|| {
            warnings.push(format!("joint {name:?}: no <axis>, defaulting to (1, 0, 0)"));
            Vector3::x()
        }))
    } else {
        if raw_axis.is_some() {
            warnings.push(format!("joint {name:?}: <axis> on a fixed joint ignored"));
        }
        None
    };

    let raw_limit = match child_of("limit") {
        Some(el) => Some((
            parse_scalar(&el, "limit", "lower", 0.0)?,
            parse_scalar(&el, "limit", "upper", 0.0)?,
        )),
        None => None,
    };
    let limit = match joint_type {
        JointType::Revolute | JointType::Prismatic => Some(raw_limit.ok_or(
            UrdfError::MissingLimit { joint: name.clone(), kind: joint_type.name() },
        )?),
        _ => {
            if raw_limit.is_some() {
                warnings.push(format!(
                    "joint {name:?}: <limit> on a {} joint ignored",
                    joint_type.name()
                ));
            }
            None
        }
    };

    Ok(UrdfJoint { name, joint_type, parent, child, origin_xyz, origin_rpy, axis, limit })
}

fn parse_scalar(
    node: &roxmltree::Node,
    element: &'static str,
    attribute: &'static str,
    default: f64,
) -> Result<f64> {
    match node.attribute(attribute) {
        None => Ok(default),
        Some(text) => text.trim().parse::<f64>().map_err(|_| {
            UrdfError::BadNumber { element, attribute, text: text.to_string() }.into()
        }),
    }
}

fn parse_vec3(
    node: &roxmltree::Node,
    element: &'static str,
    attribute: &'static str,
    default: Vector3<f64>,
) -> Result<Vector3<f64>> {
    let Some(text) = node.attribute(attribute) else {
        return Ok(default);
    };
    let bad = || UrdfError::BadNumber { element, attribute, text: text.to_string() };
    let parts: Vec<f64> = text
        .split_whitespace()
        .map(|p| p.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad())?;
    if parts.len() != 3 {
        return Err(bad().into());
    }
    Ok(Vector3::new(parts[0], parts[1], parts[2]))
}

// =============================== validation ===============================

/// Structural checks: unique names, defined link references, single-rooted
/// acyclic joint graph.
pub fn validate_model(model: &UrdfModel) -> Result<()> {
    if model.links.is_empty() {
        return Err(UrdfError::Empty.into());
    }
    let mut link_idx = HashMap::new();
    for (i, link) in model.links.iter().enumerate() {
        if link_idx.insert(link.name.as_str(), i).is_some() {
            return Err(UrdfError::DuplicateLink(link.name.clone()).into());
        }
    }
    let mut joint_names = std::collections::HashSet::new();
    let mut parent_of: HashMap<&str, &str> = HashMap::new();
    for j in &model.joints {
        if !joint_names.insert(j.name.as_str()) {
            return Err(UrdfError::DuplicateJoint(j.name.clone()).into());
        }
        for link in [&j.parent, &j.child] {
            if !link_idx.contains_key(link.as_str()) {
                return Err(UrdfError::DanglingLink {
                    joint: j.name.clone(),
                    link: link.clone(),
                }
                .into());
            }
        }
        if parent_of.insert(&j.child, &j.parent).is_some() {
            return Err(UrdfError::MultipleParents { link: j.child.clone() }.into());
        }
    }

    let roots: Vec<String> = model
        .links
        .iter()
        .filter(|l| !parent_of.contains_key(l.name.as_str()))
        .map(|l| l.name.clone())
        .collect();
    if roots.len() != 1 {
        return Err(UrdfError::NotSingleRooted { roots }.into());
    }

    // Walk each link to the root; a walk longer than the link count is a cycle.
    for link in &model.links {
        let mut cur = link.name.as_str();
        let mut steps = 0;
        while let Some(&up) = parent_of.get(cur) {
            cur = up;
            steps += 1;
            if steps > model.links.len() {
                return Err(UrdfError::CyclicGraph { link: link.name.clone() }.into());
            }
        }
    }
    Ok(())
}

// ================================== emit ==================================

fn fmt_vec3(v: &Vector3<f64>) -> String {
    format!("{:.9} {:.9} {:.9}", v.x, v.y, v.z)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Deterministic serialization (9 decimal places, 2-space indent). The
/// model is validated first so a hand-built broken tree fails loudly.
pub fn emit_urdf(model: &UrdfModel) -> Result<String> {
    validate_model(model)?;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\"?>\n");
    let _ = writeln!(out, "<robot name=\"{}\">", escape(&model.name));
    for link in &model.links {
        let _ = writeln!(out, "  <link name=\"{}\"/>", escape(&link.name));
    }
    for j in &model.joints {
        let _ = writeln!(
            out,
            "  <joint name=\"{}\" type=\"{}\">",
            escape(&j.name),
            j.joint_type.name()
        );
        let _ = writeln!(
            out,
            "    <origin xyz=\"{}\" rpy=\"{}\"/>",
            fmt_vec3(&j.origin_xyz),
            fmt_vec3(&j.origin_rpy)
        );
        let _ = writeln!(out, "    <parent link=\"{}\"/>", escape(&j.parent));
        let _ = writeln!(out, "    <child link=\"{}\"/>", escape(&j.child));
        if let Some(axis) = &j.axis {
            let _ = writeln!(out, "    <axis xyz=\"{}\"/>", fmt_vec3(axis));
        }
        if let Some((lo, hi)) = j.limit {
            let _ = writeln!(out, "    <limit lower=\"{lo:.9}\" upper=\"{hi:.9}\"/>");
        }
        out.push_str("  </joint>\n");
    }
    out.push_str("</robot>\n");
    Ok(out)
}

// ============================ world-frame joints ===========================

fn rpy_rotation(rpy: &Vector3<f64>) -> Rotation3<f64> {
    Rotation3::from_euler_angles(rpy.x, rpy.y, rpy.z)
}

/// Flattens every joint into the root-link frame by composing origins at
/// the zero configuration. Returned in document order as (joint name, joint).
pub fn joints_in_world(model: &UrdfModel) -> Result<Vec<(String, Joint)>> {
    validate_model(model)?;
    let mut frames: HashMap<&str, RigidTransform> = HashMap::new();
    let incoming: HashMap<&str, &UrdfJoint> =
        model.joints.iter().map(|j| (j.child.as_str(), j)).collect();
    for link in &model.links {
        if !incoming.contains_key(link.name.as_str()) {
            frames.insert(link.name.as_str(), RigidTransform::identity());
        }
    }

    // Children attach where their joint frame sits at zero configuration.
    let mut pending: Vec<&UrdfJoint> = model.joints.iter().collect();
    while !pending.is_empty() {
        let before = pending.len();
        pending.retain(|j| {
            let Some(parent_frame) = frames.get(j.parent.as_str()) else {
                return true;
            };
            let local = RigidTransform {
                rotation: rpy_rotation(&j.origin_rpy).into_inner(),
                translation: j.origin_xyz,
            };
            frames.insert(j.child.as_str(), parent_frame.compose(&local));
            false
        });
        assert!(pending.len() < before, "validated tree failed to converge");
    }

    let mut out = Vec::with_capacity(model.joints.len());
    for j in &model.joints {
        let frame = &frames[j.child.as_str()];
        let joint = match j.joint_type {
            JointType::Fixed => Joint::fixed(frame.translation),
            t => {
                let local = j.axis.expect("kinematic joint parsed without axis");
                if local.norm() < GEOM_TOL {
                    return Err(crate::error::Error::DegenerateAxis { norm: local.norm() });
                }
                let axis = (frame.rotation * local).normalize();
                let range = match t {
                    JointType::Continuous => CONTINUOUS_RANGE,
                    _ => j.limit.expect("limited joint parsed without limit"),
                };
                Joint::new(t, frame.translation, axis, range)?
            }
        };
        out.push((j.name.clone(), joint));
    }
    Ok(out)
}

/// Builds a star-shaped model: one `base` root link, one child link per
/// joint, every joint expressed directly in the base frame.
pub fn model_from_world_joints(robot: &str, joints: &[(String, Joint)]) -> UrdfModel {
    let mut links = vec![UrdfLink { name: "base".to_string() }];
    let mut urdf_joints = Vec::with_capacity(joints.len());
    for (name, j) in joints {
        let child = format!("{name}_link");
        links.push(UrdfLink { name: child.clone() });
        let (axis, limit) = match j.joint_type {
            JointType::Fixed => (None, None),
            JointType::Continuous => (Some(j.axis), None),
            _ => (Some(j.axis), Some(j.range)),
        };
        urdf_joints.push(UrdfJoint {
            name: name.clone(),
            joint_type: j.joint_type,
            parent: "base".to_string(),
            child,
            origin_xyz: j.origin,
            origin_rpy: Vector3::zeros(),
            axis,
            limit,
        });
    }
    UrdfModel { name: robot.to_string(), links, joints: urdf_joints }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use approx::assert_relative_eq;
    use nalgebra::{Isometry3, Translation3, UnitQuaternion};
    use std::f64::consts::{FRAC_PI_2, PI};

    const CABINET: &str = r#"<?xml version="1.0"?>
<robot name="cabinet">
  <link name="base"/>
  <link name="door"/>
  <joint name="hinge" type="revolute">
    <origin xyz="0.1 0.2 0.3" rpy="0 0 0"/>
    <parent link="base"/>
    <child link="door"/>
    <axis xyz="0 0 1"/>
    <limit lower="0" upper="1.5"/>
  </joint>
</robot>
"#;

    #[test]
    fn parses_minimal_document() {
        let out = parse_urdf(CABINET).unwrap();
        assert!(out.warnings.is_empty());
        assert_eq!(out.model.name, "cabinet");
        assert_eq!(out.model.links.len(), 2);
        let j = &out.model.joints[0];
        assert_eq!(j.joint_type, JointType::Revolute);
        assert_eq!(j.origin_xyz, Vector3::new(0.1, 0.2, 0.3));
        assert_eq!(j.axis, Some(Vector3::z()));
        assert_eq!(j.limit, Some((0.0, 1.5)));
    }

    #[test]
    fn world_joint_of_minimal_document() {
        let out = parse_urdf(CABINET).unwrap();
        let joints = joints_in_world(&out.model).unwrap();
        assert_eq!(joints.len(), 1);
        let (name, j) = &joints[0];
        assert_eq!(name, "hinge");
        assert_eq!(j.origin, Vector3::new(0.1, 0.2, 0.3));
        assert_eq!(j.axis, Vector3::z());
        assert_eq!(j.range, (0.0, 1.5));
    }

    #[test]
    fn defaults_and_warnings() {
        let xml = r#"<robot name="r">
  <link name="a"/><link name="b"/><link name="c"/>
  <joint name="j1" type="prismatic">
    <parent link="a"/><child link="b"/>
    <limit lower="-0.1" upper="0.4"/>
  </joint>
  <joint name="j2" type="fixed">
    <parent link="a"/><child link="c"/>
    <axis xyz="0 1 0"/>
  </joint>
</robot>"#;
        let out = parse_urdf(xml).unwrap();
        assert_eq!(out.warnings.len(), 2);
        assert!(out.warnings[0].contains("defaulting"));
        assert!(out.warnings[1].contains("fixed"));
        assert_eq!(out.model.joints[0].axis, Some(Vector3::x()));
        assert_eq!(out.model.joints[1].axis, None);
        // Missing <origin> defaults to identity placement.
        assert_eq!(out.model.joints[0].origin_xyz, Vector3::zeros());
    }

    #[test]
    fn continuous_gets_full_turn_and_ignores_limit() {
        let xml = r#"<robot name="r">
  <link name="a"/><link name="b"/>
  <joint name="spin" type="continuous">
    <parent link="a"/><child link="b"/>
    <axis xyz="0 0 2"/>
    <limit lower="0" upper="1"/>
  </joint>
</robot>"#;
        let out = parse_urdf(xml).unwrap();
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.model.joints[0].limit, None);
        let joints = joints_in_world(&out.model).unwrap();
        assert_eq!(joints[0].1.range, CONTINUOUS_RANGE);
        // Non-unit axis input is normalized.
        assert_eq!(joints[0].1.axis, Vector3::z());
    }

    fn expect_urdf_err(xml: &str, check: impl Fn(&UrdfError) -> bool) {
        match parse_urdf(xml) {
            Err(Error::Urdf(e)) if check(&e) => {}
            other => panic!("expected specific urdf error, got {other:?}"),
        }
    }

    #[test]
    fn distinct_parse_errors() {
        expect_urdf_err("<robot", |e| matches!(e, UrdfError::MalformedXml(_)));
        expect_urdf_err("<machine name=\"x\"/>", |e| matches!(e, UrdfError::MissingRobot));
        expect_urdf_err("<robot name=\"r\"/>", |e| matches!(e, UrdfError::Empty));
        expect_urdf_err(
            "<robot name=\"r\"><link name=\"a\"/><link name=\"a\"/></robot>",
            |e| matches!(e, UrdfError::DuplicateLink(n) if n == "a"),
        );
        expect_urdf_err(
            r#"<robot name="r"><link name="a"/><link name="b"/><link name="c"/>
               <joint name="j" type="fixed"><parent link="a"/><child link="b"/></joint>
               <joint name="j" type="fixed"><parent link="a"/><child link="c"/></joint></robot>"#,
            |e| matches!(e, UrdfError::DuplicateJoint(n) if n == "j"),
        );
        expect_urdf_err(
            r#"<robot name="r"><link name="a"/><link name="b"/>
               <joint name="j" type="planar"><parent link="a"/><child link="b"/></joint></robot>"#,
            |e| matches!(e, UrdfError::UnknownJointType { type_name, .. } if type_name == "planar"),
        );
        expect_urdf_err(
            r#"<robot name="r"><link name="a"/><link name="b"/>
               <joint name="j" type="fixed"><parent link="a"/><child link="ghost"/></joint></robot>"#,
            |e| matches!(e, UrdfError::DanglingLink { link, .. } if link == "ghost"),
        );
        expect_urdf_err(
            r#"<robot name="r"><link name="a"/><link name="b"/><link name="c"/>
               <joint name="j1" type="fixed"><parent link="a"/><child link="c"/></joint>
               <joint name="j2" type="fixed"><parent link="b"/><child link="c"/></joint></robot>"#,
            |e| matches!(e, UrdfError::MultipleParents { link } if link == "c"),
        );
        // Two disconnected roots.
        expect_urdf_err(
            r#"<robot name="r"><link name="a"/><link name="b"/></robot>"#,
            |e| matches!(e, UrdfError::NotSingleRooted { roots } if roots.len() == 2),
        );
        // a->b->a cycle plus a proper root so root detection passes.
        expect_urdf_err(
            r#"<robot name="r"><link name="root"/><link name="a"/><link name="b"/>
               <joint name="j0" type="fixed"><parent link="root"/><child link="root2"/></joint></robot>"#,
            |e| matches!(e, UrdfError::DanglingLink { .. }),
        );
        expect_urdf_err(
            r#"<robot name="r"><link name="root"/><link name="a"/><link name="b"/>
               <joint name="j1" type="fixed"><parent link="a"/><child link="b"/></joint>
               <joint name="j2" type="fixed"><parent link="b"/><child link="a"/></joint></robot>"#,
            |e| matches!(e, UrdfError::CyclicGraph { .. }),
        );
        expect_urdf_err(
            r#"<robot name="r"><link name="a"/><link name="b"/>
               <joint name="j" type="revolute"><parent link="a"/><child link="b"/>
               <axis xyz="0 0 1"/></joint></robot>"#,
            |e| matches!(e, UrdfError::MissingLimit { kind, .. } if *kind == "revolute"),
        );
        expect_urdf_err(
            r#"<robot name="r"><link name="a"/><link name="b"/>
               <joint name="j" type="fixed"><origin xyz="1 2"/><parent link="a"/><child link="b"/></joint></robot>"#,
            |e| matches!(e, UrdfError::BadNumber { attribute, .. } if *attribute == "xyz"),
        );
        expect_urdf_err(
            r#"<robot name="r"><link name="a"/><link name="b"/>
               <joint name="j" type="fixed"><child link="b"/></joint></robot>"#,
            |e| matches!(e, UrdfError::MissingElement { element, .. } if *element == "parent"),
        );
    }

    #[test]
    fn emit_parse_round_trip_preserves_model() {
        let joints = vec![
            (
                "hinge".to_string(),
                Joint::revolute(
                    Vector3::new(0.125, -0.25, 0.5),
                    Vector3::new(0.0, 0.0, 1.0),
                    (0.0, FRAC_PI_2),
                )
                .unwrap(),
            ),
            (
                "slide".to_string(),
                Joint::prismatic(Vector3::new(0.5, 0.0, 0.25), Vector3::x(), (0.0, 0.375)).unwrap(),
            ),
            (
                "spin".to_string(),
                Joint::new(JointType::Continuous, Vector3::zeros(), Vector3::y(), CONTINUOUS_RANGE)
                    .unwrap(),
            ),
            ("mount".to_string(), Joint::fixed(Vector3::new(0.0, 0.5, 0.0))),
        ];
        let model = model_from_world_joints("rig", &joints);
        let xml = emit_urdf(&model).unwrap();
        let reparsed = parse_urdf(&xml).unwrap();
        assert!(reparsed.warnings.is_empty());
        let back = joints_in_world(&reparsed.model).unwrap();
        assert_eq!(back.len(), joints.len());
        for ((n0, j0), (n1, j1)) in joints.iter().zip(&back) {
            assert_eq!(n0, n1);
            assert_eq!(j0.joint_type, j1.joint_type);
            // 9 printed decimals bound the quantization error.
            assert_relative_eq!(j0.origin, j1.origin, epsilon = 1e-9);
            assert_relative_eq!(j0.axis, j1.axis, epsilon = 1e-9);
            assert!((j0.range.0 - j1.range.0).abs() < 1e-9);
            assert!((j0.range.1 - j1.range.1).abs() < 1e-9);
        }
        // Byte-for-byte stable.
        assert_eq!(xml, emit_urdf(&reparsed.model).unwrap());
    }

    #[test]
    fn nested_chain_flattens_through_rpy() {
        let xml = r#"<robot name="arm">
  <link name="base"/><link name="upper"/><link name="hand"/>
  <joint name="shoulder" type="revolute">
    <origin xyz="1 0 0" rpy="0 0 1.5707963267948966"/>
    <parent link="base"/><child link="upper"/>
    <axis xyz="1 0 0"/>
    <limit lower="0" upper="1"/>
  </joint>
  <joint name="wrist" type="prismatic">
    <origin xyz="0.5 0 0" rpy="0 0 0"/>
    <parent link="upper"/><child link="hand"/>
    <axis xyz="0 0 1"/>
    <limit lower="0" upper="0.2"/>
  </joint>
</robot>"#;
        let joints = joints_in_world(&parse_urdf(xml).unwrap().model).unwrap();
        let (_, shoulder) = &joints[0];
        // Yaw of pi/2 turns the local x axis onto world y.
        assert_relative_eq!(shoulder.origin, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(shoulder.axis, Vector3::y(), epsilon = 1e-12);
        let (_, wrist) = &joints[1];
        assert_relative_eq!(wrist.origin, Vector3::new(1.0, 0.5, 0.0), epsilon = 1e-12);
        assert_relative_eq!(wrist.axis, Vector3::z(), epsilon = 1e-12);
    }

    /// Chain frames against an independent quaternion-isometry composition.
    #[test]
    fn flattening_matches_isometry_oracle() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(2024);
        for _ in 0..50 {
            let depth = rng.gen_range(1..=5);
            let mut links = vec![UrdfLink { name: "l0".into() }];
            let mut joints = Vec::new();
            let mut oracle = Isometry3::identity();
            let mut oracles = Vec::new();
            for d in 0..depth {
                let xyz = Vector3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                let rpy = Vector3::new(
                    rng.gen_range(-PI..PI),
                    rng.gen_range(-1.5..1.5),
                    rng.gen_range(-PI..PI),
                );
                links.push(UrdfLink { name: format!("l{}", d + 1) });
                joints.push(UrdfJoint {
                    name: format!("j{d}"),
                    joint_type: JointType::Revolute,
                    parent: format!("l{d}"),
                    child: format!("l{}", d + 1),
                    origin_xyz: xyz,
                    origin_rpy: rpy,
                    axis: Some(Vector3::z()),
                    limit: Some((0.0, 1.0)),
                });
                oracle *= Isometry3::from_parts(
                    Translation3::from(xyz),
                    UnitQuaternion::from_euler_angles(rpy.x, rpy.y, rpy.z),
                );
                oracles.push(oracle);
            }
            let model = UrdfModel { name: "chain".into(), links, joints };
            let world = joints_in_world(&model).unwrap();
            for (d, (_, j)) in world.iter().enumerate() {
                let iso = &oracles[d];
                assert_relative_eq!(j.origin, iso.translation.vector, epsilon = 1e-9);
                assert_relative_eq!(j.axis, iso.rotation * Vector3::z(), epsilon = 1e-9);
            }
        }
    }
}
