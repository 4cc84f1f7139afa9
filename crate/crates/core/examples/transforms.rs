//! Builds poses from the transform primitives and checks a few identities.

use std::f64::consts::FRAC_PI_2;

use scenelang::math::{reflect, rotate, scale, translate, Vector3};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let quarter = rotate(FRAC_PI_2, Vector3::Y, Vector3::ZERO)?;
    let lift = translate(Vector3::new(0.0, 2.0, 0.0))?;
    let stretch = scale(Vector3::new(2.0, 1.0, 1.0), Vector3::ZERO)?;

    // Poses compose right to left: stretch, then turn, then lift.
    let pose = lift * quarter * stretch;
    let p = pose.apply_point(Vector3::X);
    println!("x axis tip lands at {p}");

    let mirror = reflect(Vector3::X, Vector3::new(1.0, 0.0, 0.0))?;
    println!("mirror twice is identity: {}", (mirror * mirror).is_identity(1e-12));

    let back = pose.invert()?;
    println!("pose * inverse is identity: {}", (pose * back).is_identity(1e-12));
    println!("row-major pose: {:?}", pose.as_row_major());
    Ok(())
}
