use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

fn main() {
    // first point of the fig4a loop: dp = 0, kappa = gamma = 0.02
    let m = DMatrix::from_row_slice(3, 3, &[
        C64::new(0.0, -0.02), C64::new(-1.0, 0.0), C64::new(0.0, 0.0),
        C64::new(-1.0, 0.0), C64::new(0.0, -0.02), C64::new(0.0, 0.0),
        C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, -0.02),
    ]);
    eprintln!("try_schur with cap...");
    let s = m.clone().try_schur(1e-12, 2000);
    eprintln!("capped: {:?}", s.map(|s| s.unpack().1.diagonal().iter().cloned().collect::<Vec<_>>()));
    eprintln!("uncapped eigenvalues()...");
    let e = m.eigenvalues();
    eprintln!("uncapped: {:?}", e.map(|v| v.iter().cloned().collect::<Vec<_>>()));
}
