//! Cavity-length trade-off studies.
//!
//! Lengthening a Fabry-Perot cavity scales the rates as `g ∝ 1/√L` and
//! `κ ∝ 1/L` while the free-space decay `γ` is unchanged, so the
//! cooperativity is length-independent but the extraction efficiency drops.
//! These routines sweep length against birefringence and locate the longest
//! cavity that still meets an efficiency target.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::emission_budget_steady;
use crate::error::{Error, Result};
use crate::model::{build_two_level_birefringent, PhotonBasis, Rates};
use crate::optimize::maximize_1d;

/// Unit tag for the rate values carried by a [`CavityGeometry`].
///
/// Efficiencies and purities are invariant under a common rescaling of all
/// rates, so `MegahertzOver2Pi` values can be fed to the dimensionless
/// engine after one global conversion at ingestion.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum RateUnit {
    /// Rates in units of some reference rate (conventionally `g = 1`).
    Dimensionless,
    /// Rates quoted as frequency/2π in MHz; multiply by 2π for angular MHz.
    MegahertzOver2Pi,
}

/// Reference-length description of an emitter-cavity system.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct CavityGeometry {
    /// Reference cavity length in micrometres.
    pub l0: f64,
    /// Coupling rate at `l0`.
    pub g0: f64,
    /// Cavity decay rate at `l0`.
    pub kappa0: f64,
    /// Free-space atomic decay rate (length-independent).
    pub gamma: f64,
    pub unit: RateUnit,
}

impl CavityGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.l0 > 0.0) {
            return Err(Error::Config("reference length l0 must be positive".into()));
        }
        if self.g0 < 0.0 || self.kappa0 < 0.0 || self.gamma < 0.0 {
            return Err(Error::Config("g0, kappa0 and gamma must be non-negative".into()));
        }
        Ok(())
    }

    /// Cooperativity, the same at every length.
    pub fn cooperativity(&self) -> Result<f64> {
        self.rates_at_length(self.l0)?.cooperativity()
    }
}

/// Rates at cavity length `l`: `g = g0/√(l/l0)`, `κ = κ0/(l/l0)`, `γ`
/// unchanged. Values stay in the geometry's unit.
pub fn rates_at_length(geom: &CavityGeometry, l: f64) -> Result<Rates> {
    geom.validate()?;
    if !(l > 0.0) {
        return Err(Error::Config(format!("cavity length must be positive, got {l}")));
    }
    let ratio = l / geom.l0;
    Ok(Rates {
        g: geom.g0 / ratio.sqrt(),
        kappa: geom.kappa0 / ratio,
        gamma: geom.gamma,
        ..Rates::default()
    })
}

impl CavityGeometry {
    /// Method form of [`rates_at_length`].
    pub fn rates_at_length(&self, l: f64) -> Result<Rates> {
        rates_at_length(self, l)
    }
}

/// The ion-cavity system of Takahashi et al.:
/// `{g0, κ0, γ}/2π = {12.3, 4.1, 11.5}` MHz at `L0 = 370` µm.
pub fn takahashi_preset() -> CavityGeometry {
    CavityGeometry {
        l0: 370.0,
        g0: 12.3,
        kappa0: 4.1,
        gamma: 11.5,
        unit: RateUnit::MegahertzOver2Pi,
    }
}

/// One evaluated cell of a length/birefringence sweep.
#[derive(Copy, Clone, Debug, Serialize)]
pub struct SweepCell {
    /// Cavity length (same unit as the geometry's `l0`).
    pub l: f64,
    /// Birefringent splitting (same unit as the geometry's rates).
    pub delta_p: f64,
    pub eta_ext: f64,
    pub purity: f64,
}

fn angular(geom: &CavityGeometry, rates: Rates) -> Rates {
    match geom.unit {
        RateUnit::Dimensionless => rates,
        RateUnit::MegahertzOver2Pi => rates.scaled(std::f64::consts::TAU),
    }
}

fn eta_purity_at(geom: &CavityGeometry, l: f64, delta_p: f64) -> Result<(f64, f64)> {
    let mut rates = rates_at_length(geom, l)?;
    rates.delta_p = delta_p;
    let rates = angular(geom, rates);
    let h = build_two_level_birefringent(&rates, PhotonBasis::Circular)?;
    let psi0 = h.excited_state();
    let budget = emission_budget_steady(&h, &psi0, rates.kappa, rates.gamma)?;
    Ok((budget.eta_ext, budget.purity.unwrap_or(1.0)))
}

/// Evaluates the two-level birefringent budget over a length x birefringence
/// grid; rows come out in row-major order (lengths outer, splittings inner).
pub fn sweep_length_birefringence(
    geom: &CavityGeometry,
    lengths: &[f64],
    delta_ps: &[f64],
) -> Result<Vec<SweepCell>> {
    geom.validate()?;
    if lengths.is_empty() || delta_ps.is_empty() {
        return Err(Error::Config("sweep grids must be non-empty".into()));
    }
    if lengths.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Config("all lengths must be positive".into()));
    }
    let cells: Vec<(usize, f64, f64)> = lengths
        .iter()
        .enumerate()
        .flat_map(|(i, &l)| {
            delta_ps
                .iter()
                .enumerate()
                .map(move |(j, &dp)| (i * delta_ps.len() + j, l, dp))
        })
        .collect();
    let mut rows: Vec<(usize, SweepCell)> = cells
        .par_iter()
        .map(|&(idx, l, dp)| {
            let (eta_ext, purity) = eta_purity_at(geom, l, dp)?;
            Ok((idx, SweepCell { l, delta_p: dp, eta_ext, purity }))
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|(idx, _)| *idx);
    Ok(rows.into_iter().map(|(_, c)| c).collect())
}

/// Best achievable efficiency at length `l`, maximized over the
/// birefringence box; returns `(eta_max, delta_p*)`.
pub fn max_efficiency_at_length(
    geom: &CavityGeometry,
    l: f64,
    delta_p_box: (f64, f64),
) -> Result<(f64, f64)> {
    let r = maximize_1d(
        |dp| eta_purity_at(geom, l, dp).map(|(eta, _)| eta),
        delta_p_box.0,
        delta_p_box.1,
        1e-6 * (delta_p_box.1 - delta_p_box.0).abs().max(1e-30),
    )?;
    Ok((r.best_value, r.best_params[0].1))
}

/// Longest cavity (bisection to 0.5% relative) whose birefringence-optimized
/// efficiency still reaches `eta_target`; returns `(l_max, delta_p at
/// l_max)`. Lengths from `0.25 l0` to `8 l0` are probed.
pub fn iso_efficiency_max_length(
    geom: &CavityGeometry,
    eta_target: f64,
    delta_p_box: (f64, f64),
) -> Result<(f64, f64)> {
    geom.validate()?;
    if !(eta_target > 0.0 && eta_target < 1.0) {
        if eta_target <= 0.0 {
            // everything qualifies: the upper probe bound is the answer
            let l = 8.0 * geom.l0;
            let (_, dp) = max_efficiency_at_length(geom, l, delta_p_box)?;
            return Ok((l, dp));
        }
        return Err(Error::Config("eta_target must lie in (0, 1)".into()));
    }
    let l_lo = 0.25 * geom.l0;
    let l_hi = 8.0 * geom.l0;
    let meets = |l: f64| -> Result<bool> {
        Ok(max_efficiency_at_length(geom, l, delta_p_box)?.0 >= eta_target)
    };

    // scan from the top for the largest qualifying probe point
    const PROBES: usize = 25;
    let mut bracket: Option<(f64, f64)> = None;
    let mut prev = l_hi;
    for k in 0..PROBES {
        let frac = 1.0 - k as f64 / (PROBES - 1) as f64;
        let l = l_lo * (l_hi / l_lo).powf(frac);
        if meets(l)? {
            if k == 0 {
                let (_, dp) = max_efficiency_at_length(geom, l_hi, delta_p_box)?;
                return Ok((l_hi, dp));
            }
            bracket = Some((l, prev));
            break;
        }
        prev = l;
    }
    let (mut lo, mut hi) =
        bracket.ok_or(Error::Infeasible { target: eta_target })?;
    while (hi - lo) > 0.005 * lo {
        let mid = 0.5 * (lo + hi);
        if meets(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, dp) = max_efficiency_at_length(geom, lo, delta_p_box)?;
    Ok((lo, dp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::analytic_two_level_efficiency;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_length_returns_reference_rates() {
        let geom = takahashi_preset();
        let r = rates_at_length(&geom, 370.0).unwrap();
        assert_abs_diff_eq!(r.g, 12.3, epsilon = 0.0);
        assert_abs_diff_eq!(r.kappa, 4.1, epsilon = 0.0);
        assert_abs_diff_eq!(r.gamma, 11.5, epsilon = 0.0);
    }

    #[test]
    fn quadrupled_length_halves_g_and_quarters_kappa() {
        let geom = takahashi_preset();
        let r = rates_at_length(&geom, 4.0 * 370.0).unwrap();
        assert_abs_diff_eq!(r.g, 12.3 / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.kappa, 4.1 / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn fifty_percent_longer_cavity() {
        let geom = takahashi_preset();
        let r = rates_at_length(&geom, 555.0).unwrap();
        assert_abs_diff_eq!(r.g, 12.3 / 1.5_f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.kappa, 4.1 / 1.5, epsilon = 1e-12);
    }

    #[test]
    fn cooperativity_is_length_independent() {
        let geom = takahashi_preset();
        let c0 = geom.cooperativity().unwrap();
        assert_abs_diff_eq!(c0, 12.3 * 12.3 / (2.0 * 4.1 * 11.5), epsilon = 1e-12);
        for l in [100.0, 370.0, 555.0, 2000.0] {
            let c = rates_at_length(&geom, l).unwrap().cooperativity().unwrap();
            assert_abs_diff_eq!(c, c0, epsilon = 1e-12 * c0);
        }
    }

    #[test]
    fn non_positive_length_rejected() {
        let geom = takahashi_preset();
        assert!(rates_at_length(&geom, 0.0).is_err());
        assert!(rates_at_length(&geom, -1.0).is_err());
    }

    #[test]
    fn zero_birefringence_column_matches_closed_form() {
        let geom = takahashi_preset();
        let lengths = [300.0, 370.0, 500.0, 700.0];
        let cells = sweep_length_birefringence(&geom, &lengths, &[0.0]).unwrap();
        for cell in &cells {
            let r = rates_at_length(&geom, cell.l).unwrap();
            let expect = analytic_two_level_efficiency(r.g, r.kappa, r.gamma).unwrap();
            assert_abs_diff_eq!(cell.eta_ext, expect, epsilon = 1e-10);
            assert_abs_diff_eq!(cell.purity, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn reference_cell_is_twenty_percent() {
        let geom = takahashi_preset();
        let cells = sweep_length_birefringence(&geom, &[370.0], &[0.0]).unwrap();
        assert!((cells[0].eta_ext - 0.200).abs() < 0.005, "eta = {}", cells[0].eta_ext);
    }

    #[test]
    fn unit_invariance_of_sweep() {
        let mhz = takahashi_preset();
        let dimensionless = CavityGeometry {
            l0: 370.0,
            g0: 1.0,
            kappa0: 4.1 / 12.3,
            gamma: 11.5 / 12.3,
            unit: RateUnit::Dimensionless,
        };
        let a = sweep_length_birefringence(&mhz, &[370.0, 500.0], &[0.0, 19.3]).unwrap();
        let b = sweep_length_birefringence(
            &dimensionless,
            &[370.0, 500.0],
            &[0.0, 19.3 / 12.3],
        )
        .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x.eta_ext, y.eta_ext, epsilon = 1e-8);
            assert_abs_diff_eq!(x.purity, y.purity, epsilon = 1e-8);
        }
    }

    #[test]
    fn efficiency_decreases_with_length_without_birefringence() {
        // monotone beyond the kappa = g crossover
        let geom = takahashi_preset();
        let lengths: Vec<f64> = (0..12).map(|i| 200.0 + 100.0 * i as f64).collect();
        let cells = sweep_length_birefringence(&geom, &lengths, &[0.0]).unwrap();
        // crossover kappa(l) = g(l) happens well below 200 um here
        let r = rates_at_length(&geom, 200.0).unwrap();
        assert!(r.g > r.kappa);
        for w in cells.windows(2) {
            assert!(w[1].eta_ext < w[0].eta_ext);
        }
    }

    #[test]
    fn purity_below_one_with_birefringence() {
        let geom = takahashi_preset();
        let cells = sweep_length_birefringence(&geom, &[370.0], &[19.3]).unwrap();
        assert!(cells[0].purity < 1.0);
        assert!(cells[0].purity > 0.0);
    }

    #[test]
    fn zero_target_returns_upper_probe_bound() {
        let geom = takahashi_preset();
        let (l, _) = iso_efficiency_max_length(&geom, 0.0, (0.0, 40.0)).unwrap();
        assert_abs_diff_eq!(l, 8.0 * 370.0, epsilon = 0.0);
    }

    #[test]
    fn unreachable_target_is_infeasible() {
        let geom = takahashi_preset();
        assert!(matches!(
            iso_efficiency_max_length(&geom, 0.99, (0.0, 40.0)),
            Err(Error::Infeasible { .. })
        ));
    }
}
