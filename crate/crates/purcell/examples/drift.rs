use purcell::model::{build_two_level_birefringent, PhotonBasis, Rates};
use purcell::ode::{integrate, Options};
use num_complex::Complex64 as C64;

fn main() {
    let h = build_two_level_birefringent(
        &Rates { g: 1.0, delta_p: 2.0_f64.sqrt(), ..Rates::default() },
        PhotonBasis::Circular,
    ).unwrap();
    let m = h.matrix().clone();
    let rhs = move |_t: f64, y: &nalgebra::DVector<C64>| &m * y * C64::new(0.0, -1.0);
    for (rtol, atol) in [(1e-9, 1e-12), (1e-10, 1e-13), (1e-11, 1e-14), (1e-12, 1e-14), (1e-13, 1e-15)] {
        for t_max in [50.0, 500.0] {
            let sol = integrate(&rhs, &h.excited_state(), 0.0, t_max, &Options { rtol, atol, ..Options::default() }, |_, _| false).unwrap();
            let mut worst: f64 = 0.0;
            for s in &sol.steps {
                let y = s.eval(s.t0 + s.h);
                worst = worst.max((y.norm_squared() - 1.0).abs());
            }
            println!("rtol={rtol:.0e} t_max={t_max}: steps={} drift={worst:.3e}", sol.steps.len());
        }
    }
}
