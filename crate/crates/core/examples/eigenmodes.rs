//! Diagonalize a normal ξ into independent two-mode squeezers.

use multimode_squeeze::eigenmodes::{decompose, eigenmode_pump, eigenmode_report, state_coefficients};
use multimode_squeeze::linalg::c;
use multimode_squeeze::squeeze::SqueezeMatrix;
use multimode_squeeze::CMatrix;

fn main() -> multimode_squeeze::Result<()> {
    // circulant, hence normal
    let xi = CMatrix::from_row_slice(3, 3, &[c(0.5), c(0.2), c(0.1), c(0.1), c(0.5), c(0.2), c(0.2), c(0.1), c(0.5)]);
    let xi = (&xi + xi.transpose()) * c(0.5);
    let dec = decompose(&SqueezeMatrix::two_beam(xi)?)?;
    for (k, s) in eigenmode_report(&dec).iter().enumerate() {
        println!("λ{} = {:.4}: V− = {:.4} ({:.2} dB), n̄ = {:.4}", k + 1, s.lambda, s.variance_minus, s.db_minus(), s.nbar);
    }
    let pump = eigenmode_pump(&dec, 1)?;
    println!("pump coefficients for λ1: {:.4?}", pump.iter().map(|z| z.re).collect::<Vec<_>>());
    let amps = state_coefficients(&dec, 4);
    println!("λ1 Fock amplitudes |n,n>: {:.4?} (missing norm {:.2e})", amps[0].amplitudes, amps[0].norm_deficit);
    Ok(())
}
