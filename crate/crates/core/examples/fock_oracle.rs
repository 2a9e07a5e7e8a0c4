//! Cross-check the closed forms against brute-force evolution of the vacuum.

use multimode_squeeze::fock::{compare, largest_cut, vacuum_statistics, OracleKind, TruncatedFockSpace};
use multimode_squeeze::linalg::c;
use multimode_squeeze::squeeze::{two_beam_statistics, SqueezeMatrix};
use multimode_squeeze::{CMatrix, Complex64};

fn main() -> multimode_squeeze::Result<()> {
    let xi = CMatrix::from_row_slice(2, 2, &[c(0.25), Complex64::new(0.05, -0.03), Complex64::new(0.05, -0.03), c(0.15)]);
    let closed = two_beam_statistics(&SqueezeMatrix::two_beam(xi.clone())?)?;

    let cut = largest_cut(4).expect("four modes fit");
    let space = TruncatedFockSpace::new(4, cut)?;
    println!("Fock space: 4 modes, n_cut = {cut}, dimension {}", space.dimension);
    let oracle = vacuum_statistics(&xi, &space, OracleKind::TwoBeam, 1e-3)?;
    let a = compare(&closed, &oracle);
    for (name, d) in &a.deviations {
        println!("{name:>18}: {d:.2e}");
    }
    println!("max deviation {:.2e}, truncation bound {:.2e}, agrees: {}", a.max_deviation, a.truncation_bound, a.within_bound && a.conclusive);
    Ok(())
}
