//! Builds a small dataset for every 1D problem, writes it, reads it back, and
//! reports how well samples satisfy their own boundary conditions.
//!
//!     cargo run --release --example datagen -- [dir]

use boonkit::pde::{build_dataset, io, Problem, ProblemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(std::path::PathBuf::from).unwrap_or_else(std::env::temp_dir);
    for p in [Problem::StokesSecond, Problem::BurgersRiemann, Problem::BurgersPeriodic, Problem::Heat1D] {
        let spec = ProblemSpec::standard(p, 128, false).with_size(24);
        let t = std::time::Instant::now();
        let data = build_dataset(&spec)?;
        let path = dir.join(format!("{}.boondata", p.name()));
        io::write_dataset(&path, &data)?;
        assert_eq!(io::read_dataset(&path)?, data);
        let worst = (0..data.len()).filter_map(|i| data.bc_residual(i)).fold(0.0f64, f64::max);
        println!(
            "{:<17} {} samples ({} train), {:.2} s, max own-BC residual {worst:.1e} -> {}",
            p.name(),
            data.len(),
            data.meta.train.len(),
            t.elapsed().as_secs_f64(),
            path.display()
        );
    }
    Ok(())
}
