//! Finite-difference check of the operator gradient, per parameter group.
//!
//!     cargo run --release --example gradcheck

use boonkit::operator::gradcheck::{check_wirings, gradient_check};
use boonkit::operator::Arch;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for wiring in check_wirings() {
        let arch = Arch { modes: 16, width: 8, layers: 4, out_channels: 1, mollifier: false, corrected: true, wiring };
        let groups = gradient_check(arch, 32, 2, 1)?;
        let worst = groups.iter().max_by(|a, b| a.rel_error.total_cmp(&b.rel_error)).unwrap();
        println!("{wiring:?}: {} groups, worst {} at {:.2e}", groups.len(), worst.group, worst.rel_error);
    }
    Ok(())
}
