use purcell::model::{build_two_level_birefringent, PhotonBasis, Rates};
use purcell::dynamics::{emission_budget, BudgetMethod};

fn main() {
    let pairs = [(0.02, 0.02), (0.1, 0.1), (0.3, 0.3), (1.0, 1.0)];
    for i in 0..161 {
        let dp = 4.0 * i as f64 / 160.0;
        for &(kappa, gamma) in &pairs {
            eprint!("dp={dp:.4} k={kappa} ");
            let h = build_two_level_birefringent(
                &Rates { g: 1.0, kappa, gamma, delta_p: dp, ..Rates::default() },
                PhotonBasis::Circular,
            ).unwrap();
            let b = emission_budget(&h, BudgetMethod::Steady).unwrap();
            eprintln!("eta={:.6}", b.eta_ext);
        }
    }
}
