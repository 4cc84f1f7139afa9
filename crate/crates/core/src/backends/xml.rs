//! Mitsuba 3 scene XML: one shape per primitive in flatten order, a
//! perspective sensor and a path integrator.

use std::fmt::Write;

use crate::math::{self, Matrix4, Vector3};
use crate::render::{Camera, Projection};
use crate::scene::{FlatPrimitive, Geometry};

pub const SCENE_VERSION: &str = "3.0.0";
pub const MAX_DEPTH: u32 = 8;
const DEFAULT_FOV_DEGREES: f64 = 40.0;

fn num(v: f64) -> String {
    // Collapse -0 so equal scenes print equal text.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:?}")
}

fn triple(v: Vector3) -> String {
    format!("{}, {}, {}", num(v.x), num(v.y), num(v.z))
}

fn matrix(m: &Matrix4) -> String {
    m.as_row_major().iter().map(|v| num(*v)).collect::<Vec<_>>().join(" ")
}

/// The `to_world` matrix Mitsuba needs for a primitive: its builtin cube
/// spans [-1, 1]³, so boxes fold their extent into the transform.
pub fn shape_to_world(p: &FlatPrimitive) -> Matrix4 {
    let half = |s: Vector3| math::scale(s / 2.0, Vector3::ZERO).expect("positive size");
    match &p.spec.geometry {
        Geometry::Cube { size } => p.world * half(*size),
        Geometry::Cuboid { size, .. } => {
            let s = Vector3::new(size[0] as f64, size[1] as f64, size[2] as f64);
            p.world * math::translate(s / 2.0).expect("finite") * half(s)
        }
        Geometry::Sphere { .. } | Geometry::Cylinder { .. } => p.world,
    }
}

/// Serializes primitives and camera. Deleting cuboids carry no geometry and
/// are skipped.
pub fn export_scene_xml(prims: &[FlatPrimitive], camera: &Camera) -> String {
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "<?xml version=\"1.0\" encoding=\"utf-8\"?>").unwrap();
    writeln!(w, "<scene version=\"{SCENE_VERSION}\">").unwrap();
    writeln!(w, "    <integrator type=\"path\">").unwrap();
    writeln!(w, "        <integer name=\"max_depth\" value=\"{MAX_DEPTH}\"/>").unwrap();
    writeln!(w, "    </integrator>").unwrap();

    let fov = match camera.projection() {
        Projection::Perspective { fov_y } => fov_y.to_degrees(),
        Projection::Orthographic { .. } => DEFAULT_FOV_DEGREES,
    };
    writeln!(w, "    <sensor type=\"perspective\">").unwrap();
    writeln!(w, "        <string name=\"fov_axis\" value=\"y\"/>").unwrap();
    writeln!(w, "        <float name=\"fov\" value=\"{}\"/>", num(fov)).unwrap();
    writeln!(w, "        <transform name=\"to_world\">").unwrap();
    writeln!(
        w,
        "            <lookat origin=\"{}\" target=\"{}\" up=\"{}\"/>",
        triple(camera.position()),
        triple(camera.look_at()),
        triple(camera.up())
    )
    .unwrap();
    writeln!(w, "        </transform>").unwrap();
    writeln!(w, "        <film type=\"hdrfilm\">").unwrap();
    writeln!(w, "            <integer name=\"width\" value=\"{}\"/>", camera.width()).unwrap();
    writeln!(w, "            <integer name=\"height\" value=\"{}\"/>", camera.height()).unwrap();
    writeln!(w, "        </film>").unwrap();
    writeln!(w, "    </sensor>").unwrap();

    for p in prims {
        let kind = match &p.spec.geometry {
            Geometry::Cuboid { delete: true, .. } => continue,
            Geometry::Cube { .. } | Geometry::Cuboid { .. } => "cube",
            Geometry::Sphere { .. } => "sphere",
            Geometry::Cylinder { .. } => "cylinder",
        };
        writeln!(w, "    <shape type=\"{kind}\" id=\"shape_{:04}\">", p.embedding_id).unwrap();
        match &p.spec.geometry {
            Geometry::Sphere { radius } => {
                writeln!(w, "        <float name=\"radius\" value=\"{}\"/>", num(*radius)).unwrap();
            }
            Geometry::Cylinder { radius, p0, p1 } => {
                writeln!(w, "        <point name=\"p0\" value=\"{}\"/>", triple(*p0)).unwrap();
                writeln!(w, "        <point name=\"p1\" value=\"{}\"/>", triple(*p1)).unwrap();
                writeln!(w, "        <float name=\"radius\" value=\"{}\"/>", num(*radius)).unwrap();
            }
            _ => {}
        }
        writeln!(w, "        <transform name=\"to_world\">").unwrap();
        writeln!(w, "            <matrix value=\"{}\"/>", matrix(&shape_to_world(p))).unwrap();
        writeln!(w, "        </transform>").unwrap();
        writeln!(w, "        <bsdf type=\"diffuse\">").unwrap();
        let c = p.spec.color;
        writeln!(
            w,
            "            <rgb name=\"reflectance\" value=\"{}, {}, {}\"/>",
            num(c[0]),
            num(c[1]),
            num(c[2])
        )
        .unwrap();
        writeln!(w, "        </bsdf>").unwrap();
        writeln!(w, "    </shape>").unwrap();
    }
    writeln!(w, "</scene>").unwrap();
    out
}
