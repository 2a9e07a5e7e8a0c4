//! LG mode amplitudes, basis ordering and transverse orthonormality.

use multimode_squeeze::modes::{lg_amplitude, transverse_inner_product, BeamGeometry, ModeBasis, ModeIndex};

fn main() -> multimode_squeeze::Result<()> {
    let beam = BeamGeometry::new(0.795, 80.0, 0.0)?;
    println!("z_R = {:.1} μm, w(z_R) = {:.2} μm", beam.rayleigh_zr, beam.width(beam.rayleigh_zr));

    let basis = ModeBasis::new(1, 2)?;
    println!("basis order: {}", basis.labels().join("  "));

    let idx = ModeIndex { ell: 1, p: 1 };
    for r in [0.0, 40.0, 80.0, 120.0] {
        let u = lg_amplitude(idx, r, 0.3, 0.5 * beam.rayleigh_zr, &beam);
        println!("u(l=1,p=1) at r = {r:>5.1}: {:.3e} {:+.3e}i", u.re, u.im);
    }

    let z = 2.0 * beam.rayleigh_zr;
    let mut worst = 0.0_f64;
    for a in basis.order() {
        for b in basis.order() {
            let v = transverse_inner_product(*a, *b, z, &beam)?;
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((v.re - want).abs().max(v.im.abs()));
        }
    }
    println!("max |<u_a|u_b> - δ| at z = 2 z_R: {worst:.2e}");
    Ok(())
}
