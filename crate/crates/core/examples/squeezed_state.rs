//! Closed-form statistics for a hand-written 2×2 squeezing matrix.

use multimode_squeeze::linalg::c;
use multimode_squeeze::squeeze::{two_beam_statistics, SqueezeMatrix};
use multimode_squeeze::{CMatrix, Complex64};

fn main() -> multimode_squeeze::Result<()> {
    let xi = CMatrix::from_row_slice(2, 2, &[c(0.5), Complex64::new(0.1, 0.05), Complex64::new(0.1, 0.05), c(0.3)]);
    let sq = SqueezeMatrix::two_beam(xi)?;
    let rep = two_beam_statistics(&sq)?;

    println!("singular values: {:?}", sq.singular_values());
    println!("V1 diagonal: {:.4} {:.4}", rep.var_x1[(0, 0)].re, rep.var_x1[(1, 1)].re);
    println!("V2 diagonal: {:.4} {:.4}", rep.var_x2[(0, 0)].re, rep.var_x2[(1, 1)].re);
    println!("total variances (v1, v2): ({:.4}, {:.4})", rep.scalar_var.0, rep.scalar_var.1);
    println!("squeezing per mode (dB): {:.2?}", rep.squeezing_db_per_mode);
    println!("n̄ = {:.4}, Var(N) = {:.4}", rep.nbar_total, rep.number_variance);
    println!("pair matrix |M|/Σ|M|:\n{:.3}", rep.pair_normalized);
    Ok(())
}
