//! Wigner functions of the two cat families written as CSV grids.
//!
//! Usage: `cargo run --example wigner_export [out_dir]`

use std::path::PathBuf;

use multimode_release::harness::{wigner_grid, write_wigner, Metadata};
use multimode_release::quantum::{cat_state_family, CatFamily, C64};

fn main() -> multimode_release::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("wigner"));
    std::fs::create_dir_all(&dir).map_err(|e| multimode_release::Error::Config(e.to_string()))?;
    let alpha = C64::new(2f64.sqrt(), 0.0);
    for (name, family) in [("tccs", CatFamily::Two), ("fccs", CatFamily::Four)] {
        let rho = cat_state_family(12, alpha, family)?.to_density();
        let (x, w) = wigner_grid(&rho, 81)?;
        let (min, max) = (w.min(), w.max());
        let path = dir.join(format!("wigner_{name}.csv"));
        write_wigner(&path, &Metadata::new("example"), &rho, 81)?;
        println!("{name}: W in [{min:.4}, {max:.4}] over |x|,|p| <= {:.2}, written to {}", x[x.len() - 1], path.display());
    }
    Ok(())
}
