//! Face-by-face corrections on a plane: zero-flux walls on a 2D wave sample.
//!
//!     cargo run --release --example wave_faces

use boonkit::boundary::plane::face_residuals;
use boonkit::boundary::{correct_2d, FaceRule};
use boonkit::pde::{build_dataset, Problem, ProblemSpec};
use boonkit::{DenseKernel, Field, KernelModule};

fn fmt(r: [f64; 4]) -> String {
    r.map(|v| format!("{v:.1e}")).join(", ")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut spec = ProblemSpec::standard(Problem::Wave2D, 17, false).with_size(2);
    spec.nt = 4;
    spec.m = 1;
    let data = build_dataset(&spec)?;
    let u0: Field = data.input(0);
    let k = DenseKernel::random(u0.points(), 5);
    let rules = [FaceRule::Neumann { value: 0.0, order: 2 }; 4];
    let plain = k.apply(&u0)?;
    let fixed = correct_2d(&k, &u0, &rules)?;
    println!("face residuals (x0, x1, y0, y1), data:      {}", fmt(face_residuals(&data.output(0), &rules, false)?));
    println!("face residuals, plain kernel:              {}", fmt(face_residuals(&plain, &rules, false)?));
    println!("face residuals, corrected:                 {}", fmt(face_residuals(&fixed, &rules, false)?));
    Ok(())
}
