//! Parameter sets and effective non-Hermitian Hamiltonians for the four
//! emitter-cavity level schemes.
//!
//! All Hamiltonians live in the single-excitation subspace. Decay is folded
//! into the matrix as `-i * rate` diagonal terms, so every built matrix has
//! the form `S - i*D` with `S` real symmetric and `D` a non-negative diagonal
//! assigned by the cavity/excited masks. The absorbing vacuum is not
//! represented; its population is `1 - <psi|psi>`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical rate set of one model instance, all in a single shared
/// angular-frequency unit.
///
/// Couplings enter the matrices with the conventions of the level diagrams:
/// the atom-cavity coupling `g` appears as a `-g` element, while mode/level
/// splittings (`delta_p`, `delta_z`) and the chain coupling rate `omega`
/// couple pairs of states at half their value (`-delta_p/2`, `-omega/2`).
/// Only the magnitudes matter for efficiencies (parity in each splitting).
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    /// Atom-cavity coupling rate.
    pub g: f64,
    /// Cavity field decay rate (photon emission rate is `2*kappa`).
    pub kappa: f64,
    /// Atomic amplitude decay rate (free-space emission rate is `2*gamma`).
    pub gamma: f64,
    /// Cavity detuning from atomic resonance. For birefringent schemes,
    /// `delta_c = 0` places the two polarisation eigenmodes symmetrically at
    /// `±delta_p/2`.
    pub delta_c: f64,
    /// Polarisation-eigenmode splitting (birefringence).
    pub delta_p: f64,
    /// Ground-state (Zeeman) splitting.
    pub delta_z: f64,
    /// Ground-state chain coupling rate.
    pub omega: f64,
}

impl Rates {
    /// Rates with only the decay triple set; detunings and splittings zero.
    pub fn new(g: f64, kappa: f64, gamma: f64) -> Self {
        Rates { g, kappa, gamma, ..Rates::default() }
    }

    /// Checks the sign and finiteness invariants.
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.g, self.kappa, self.gamma, self.delta_c, self.delta_p, self.delta_z, self.omega,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("rates must be finite".into()));
        }
        if self.g < 0.0 || self.kappa < 0.0 || self.gamma < 0.0 {
            return Err(Error::Config("g, kappa and gamma must be non-negative".into()));
        }
        Ok(())
    }

    /// Cooperativity `C = g^2 / (2 kappa gamma)`.
    ///
    /// Signals the degenerate case instead of returning infinity.
    pub fn cooperativity(&self) -> Result<f64> {
        if self.kappa * self.gamma <= 0.0 {
            return Err(Error::DegenerateRates(
                "cooperativity requires kappa*gamma > 0".into(),
            ));
        }
        Ok(self.g * self.g / (2.0 * self.kappa * self.gamma))
    }

    /// Purcell factor `f_P = 2C = g^2 / (kappa gamma)`.
    pub fn purcell_factor(&self) -> Result<f64> {
        self.cooperativity().map(|c| 2.0 * c)
    }

    /// Every rate multiplied by `s`; the built matrix scales by `s` exactly.
    pub fn scaled(&self, s: f64) -> Rates {
        Rates {
            g: self.g * s,
            kappa: self.kappa * s,
            gamma: self.gamma * s,
            delta_c: self.delta_c * s,
            delta_p: self.delta_p * s,
            delta_z: self.delta_z * s,
            omega: self.omega * s,
        }
    }
}

/// Which of the four level schemes a model instance describes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Two-level atom in a single-mode cavity.
    TwoLevel,
    /// Two-level atom with a circularly polarised transition in a
    /// birefringent cavity.
    TwoLevelBirefringent,
    /// Three-level atom (two Zeeman-split ground states) in a birefringent
    /// cavity.
    ThreeLevel,
    /// N-level atom with `n` chain-coupled degenerate ground states in a
    /// single-mode cavity.
    NLevelChain,
}

impl Scheme {
    /// Number of photon-emitting dressed states of the scheme, the `m` in the
    /// `m*kappa/(m*kappa + gamma)` efficiency limit. `n` is only read for
    /// [`Scheme::NLevelChain`].
    pub fn emitting_multiplicity(&self, n: usize) -> usize {
        match self {
            Scheme::TwoLevel => 1,
            Scheme::TwoLevelBirefringent => 2,
            Scheme::ThreeLevel => 4,
            Scheme::NLevelChain => n,
        }
    }
}

/// Photon-mode basis for the birefringent two-level builder.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhotonBasis {
    /// Atom-aligned circular modes; the atom couples to one mode and the
    /// birefringence couples the two modes to each other.
    Circular,
    /// Cavity-aligned linear eigenmodes at `delta_c ∓ delta_p/2`; the atom
    /// couples to both with weight `g/√2`.
    Linear,
}

/// A level scheme plus its rates; the buildable description of one system.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub scheme: Scheme,
    pub rates: Rates,
    /// Ground-state count, read only by [`Scheme::NLevelChain`].
    pub n: usize,
}

impl ModelSpec {
    pub fn new(scheme: Scheme, rates: Rates) -> Self {
        ModelSpec { scheme, rates, n: 1 }
    }

    pub fn with_ground_states(scheme: Scheme, rates: Rates, n: usize) -> Self {
        ModelSpec { scheme, rates, n }
    }

    /// Builds the effective Hamiltonian for this scheme (circular basis for
    /// the birefringent scheme).
    pub fn build(&self) -> Result<EffectiveHamiltonian> {
        match self.scheme {
            Scheme::TwoLevel => build_two_level(&self.rates),
            Scheme::TwoLevelBirefringent => {
                build_two_level_birefringent(&self.rates, PhotonBasis::Circular)
            }
            Scheme::ThreeLevel => build_three_level(&self.rates),
            Scheme::NLevelChain => build_n_level_chain(&self.rates, self.n),
        }
    }
}

/// Effective non-Hermitian Hamiltonian on a labelled single-excitation basis.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveHamiltonian {
    matrix: DMatrix<C64>,
    labels: Vec<String>,
    cavity_mask: Vec<bool>,
    excited_mask: Vec<bool>,
    plus_mask: Option<Vec<bool>>,
    kappa: f64,
    gamma: f64,
    rotated: bool,
}

impl EffectiveHamiltonian {
    fn new(
        matrix: DMatrix<C64>,
        labels: Vec<String>,
        cavity_mask: Vec<bool>,
        excited_mask: Vec<bool>,
        plus_mask: Option<Vec<bool>>,
        kappa: f64,
        gamma: f64,
    ) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        debug_assert_eq!(matrix.nrows(), labels.len());
        EffectiveHamiltonian {
            matrix,
            labels,
            cavity_mask,
            excited_mask,
            plus_mask,
            kappa,
            gamma,
            rotated: false,
        }
    }

    /// Matrix dimension (number of basis states).
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Per-state flag marking states with one cavity photon.
    pub fn cavity_mask(&self) -> &[bool] {
        &self.cavity_mask
    }

    /// Per-state flag marking states with atomic excitation.
    pub fn excited_mask(&self) -> &[bool] {
        &self.excited_mask
    }

    /// Per-state flag for the atom-coupled circular photon mode, when that
    /// mode is a basis state (circular-basis builds only).
    pub fn plus_mask(&self) -> Option<&[bool]> {
        self.plus_mask.as_deref()
    }

    /// Cavity field decay rate used on the diagonal.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Atomic amplitude decay rate used on the diagonal.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Whether this Hamiltonian came out of [`transform_basis`].
    pub fn is_rotated(&self) -> bool {
        self.rotated
    }

    /// The default initial state: excited atom, empty cavity.
    pub fn excited_state(&self) -> DVector<C64> {
        let mut psi = DVector::zeros(self.dim());
        if let Some(i) = self.excited_mask.iter().position(|&e| e) {
            psi[i] = C64::new(1.0, 0.0);
        }
        psi
    }

    /// Splits the matrix into its real symmetric part `S` and the decay
    /// diagonal `D` with `matrix = S - i*D`.
    pub fn decompose(&self) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.dim();
        let s = DMatrix::from_fn(n, n, |i, j| self.matrix[(i, j)].re);
        let d = DVector::from_fn(n, |i, _| -self.matrix[(i, i)].im);
        (s, d)
    }

    /// Eigenvalues of the (generally non-Hermitian) matrix.
    pub fn eigenvalues(&self) -> Vec<C64> {
        complex_eigenvalues(&self.matrix)
    }

    /// Largest imaginary part over the spectrum; `< 0` means strictly stable.
    pub fn max_im_eigenvalue(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|l| l.im)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when the matrix is Hermitian to `tol` (entrywise).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = &self.matrix;
        let n = self.dim();
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        for i in 0..n {
            for j in 0..n {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > tol * scale {
                    return false;
                }
            }
        }
        true
    }
}

pub(crate) use crate::linalg::eigenvalues as complex_eigenvalues;

fn reject_foreign(rates: &Rates, scheme: &str, fields: &[(&str, f64)]) -> Result<()> {
    for (name, value) in fields {
        if *value != 0.0 {
            return Err(Error::Config(format!(
                "{name} = {value} is not used by the {scheme} scheme; set it to zero"
            )));
        }
    }
    rates.validate()
}

/// Two-level atom in a single-mode cavity on basis `{|e,0>, |u,1>}`.
///
/// Diagonal `(delta_c - i*gamma, -i*kappa)`, coupling `-g` on both
/// off-diagonal entries.
pub fn build_two_level(rates: &Rates) -> Result<EffectiveHamiltonian> {
    reject_foreign(
        rates,
        "two-level",
        &[("delta_p", rates.delta_p), ("delta_z", rates.delta_z), ("omega", rates.omega)],
    )?;
    let g = C64::new(-rates.g, 0.0);
    let matrix = DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(rates.delta_c, -rates.gamma), g, g, C64::new(0.0, -rates.kappa)],
    );
    Ok(EffectiveHamiltonian::new(
        matrix,
        vec!["e,0".into(), "u,1".into()],
        vec![false, true],
        vec![true, false],
        None,
        rates.kappa,
        rates.gamma,
    ))
}

/// Two-level atom with a circularly polarised transition in a birefringent
/// cavity, on basis `{|e,0,0>, |u,1+,0>, |u,0,1->}` (circular) or
/// `{|e,0,0>, |u,1x,0>, |u,0,1y>}` (linear).
///
/// In the circular basis the atom couples only to the `+` mode and the
/// birefringence couples the two photon states at `-delta_p/2`; in the linear
/// basis the photon diagonals sit at `delta_c ∓ delta_p/2` and the atom
/// couples to both modes with weight `g/√2` (real, gauge-fixed). The two
/// builds share the same eigenvalue spectrum.
pub fn build_two_level_birefringent(
    rates: &Rates,
    basis: PhotonBasis,
) -> Result<EffectiveHamiltonian> {
    reject_foreign(
        rates,
        "two-level-birefringent",
        &[("delta_z", rates.delta_z), ("omega", rates.omega)],
    )?;
    let dc = rates.delta_c;
    let atom = C64::new(dc, -rates.gamma);
    let photon = C64::new(dc, -rates.kappa);
    let matrix = match basis {
        PhotonBasis::Circular => {
            let g = C64::new(-rates.g, 0.0);
            let hp = C64::new(-rates.delta_p / 2.0, 0.0);
            DMatrix::from_row_slice(
                3,
                3,
                &[
                    atom,
                    g,
                    C64::new(0.0, 0.0),
                    g,
                    photon,
                    hp,
                    C64::new(0.0, 0.0),
                    hp,
                    photon,
                ],
            )
        }
        PhotonBasis::Linear => {
            let gl = C64::new(-rates.g / 2.0_f64.sqrt(), 0.0);
            let half = C64::new(rates.delta_p / 2.0, 0.0);
            DMatrix::from_row_slice(
                3,
                3,
                &[
                    atom,
                    gl,
                    gl,
                    gl,
                    photon - half,
                    C64::new(0.0, 0.0),
                    gl,
                    C64::new(0.0, 0.0),
                    photon + half,
                ],
            )
        }
    };
    let (labels, plus_mask) = match basis {
        PhotonBasis::Circular => (
            vec!["e,0,0".into(), "u,1+,0".into(), "u,0,1-".into()],
            Some(vec![false, true, false]),
        ),
        PhotonBasis::Linear => {
            (vec!["e,0,0".into(), "u,1x,0".into(), "u,0,1y".into()], None)
        }
    };
    Ok(EffectiveHamiltonian::new(
        matrix,
        labels,
        vec![false, true, true],
        vec![true, false, false],
        plus_mask,
        rates.kappa,
        rates.gamma,
    ))
}

/// Three-level atom (ground states split by `delta_z`) in a birefringent
/// cavity, on basis `{|u+,1+,0>, |u+,0,1->, |u-,1+,0>, |u-,0,1->, |e0,0,0>}`.
///
/// Ground-state diagonals `∓delta_z/2 - i*kappa` (plus `delta_c` on all four
/// photon states), photon-mode couplings `-delta_p/2` within each
/// ground-state block, couplings `-g` from the excited state to states 1 and
/// 4, and `-i*gamma` on the excited state.
pub fn build_three_level(rates: &Rates) -> Result<EffectiveHamiltonian> {
    reject_foreign(rates, "three-level", &[("omega", rates.omega)])?;
    let mut m = DMatrix::<C64>::zeros(5, 5);
    let hp = C64::new(-rates.delta_p / 2.0, 0.0);
    let g = C64::new(-rates.g, 0.0);
    for i in 0..4 {
        let zeeman = if i < 2 { -rates.delta_z / 2.0 } else { rates.delta_z / 2.0 };
        m[(i, i)] = C64::new(rates.delta_c + zeeman, -rates.kappa);
    }
    m[(4, 4)] = C64::new(0.0, -rates.gamma);
    m[(0, 1)] = hp;
    m[(1, 0)] = hp;
    m[(2, 3)] = hp;
    m[(3, 2)] = hp;
    m[(0, 4)] = g;
    m[(4, 0)] = g;
    m[(3, 4)] = g;
    m[(4, 3)] = g;
    Ok(EffectiveHamiltonian::new(
        m,
        vec![
            "u+,1+,0".into(),
            "u+,0,1-".into(),
            "u-,1+,0".into(),
            "u-,0,1-".into(),
            "e0,0,0".into(),
        ],
        vec![true, true, true, true, false],
        vec![false, false, false, false, true],
        Some(vec![true, false, true, false, false]),
        rates.kappa,
        rates.gamma,
    ))
}

/// N-level atom with `n` degenerate ground states coupled in a chain at rate
/// `omega`, on basis `{|e,0>, |u1,1>, ..., |un,1>}`.
///
/// The cavity couples `|e,0>` to `|u1,1>` with `-g`; consecutive ground
/// states couple at `-omega/2` (same rate-to-element convention as the
/// `delta_p` mode splitting). `omega` is ignored for `n = 1`.
pub fn build_n_level_chain(rates: &Rates, n: usize) -> Result<EffectiveHamiltonian> {
    if n < 1 {
        return Err(Error::Config("chain needs at least one ground state (n >= 1)".into()));
    }
    reject_foreign(
        rates,
        "n-level-chain",
        &[
            ("delta_c", rates.delta_c),
            ("delta_p", rates.delta_p),
            ("delta_z", rates.delta_z),
        ],
    )?;
    let dim = n + 1;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    m[(0, 0)] = C64::new(0.0, -rates.gamma);
    for i in 1..dim {
        m[(i, i)] = C64::new(0.0, -rates.kappa);
    }
    let g = C64::new(-rates.g, 0.0);
    m[(0, 1)] = g;
    m[(1, 0)] = g;
    let w = C64::new(-rates.omega / 2.0, 0.0);
    for i in 1..n {
        m[(i, i + 1)] = w;
        m[(i + 1, i)] = w;
    }
    let mut labels = vec!["e,0".to_string()];
    labels.extend((1..=n).map(|i| format!("u{i},1")));
    let mut cavity = vec![true; dim];
    cavity[0] = false;
    let mut excited = vec![false; dim];
    excited[0] = true;
    Ok(EffectiveHamiltonian::new(
        m,
        labels,
        cavity,
        excited,
        None,
        rates.kappa,
        rates.gamma,
    ))
}

/// Similarity transform `u * M * u^T` by a real orthogonal matrix.
///
/// Masks survive the rotation only when `u` does not mix states across mask
/// classes (block-diagonal with respect to the cavity/excited partition, and
/// for the plus mask also with respect to the +/- split); otherwise they are
/// dropped and downstream budget calls will reject the rotated Hamiltonian.
pub fn transform_basis(
    h: &EffectiveHamiltonian,
    u: &DMatrix<f64>,
) -> Result<EffectiveHamiltonian> {
    let n = h.dim();
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::Config(format!(
            "transform dimension {}x{} does not match Hamiltonian dimension {n}",
            u.nrows(),
            u.ncols()
        )));
    }
    let utu = u.transpose() * u;
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((utu[(i, j)] - target).abs());
        }
    }
    if dev > 1e-12 {
        return Err(Error::Config(format!(
            "transform is not orthogonal: max |u^T u - I| = {dev:.3e}"
        )));
    }
    let uc = u.map(|x| C64::new(x, 0.0));
    let matrix = &uc * &h.matrix * uc.transpose();

    let preserves = |mask: &[bool]| -> bool {
        (0..n).all(|i| {
            (0..n).all(|j| mask[i] == mask[j] || u[(i, j)].abs() <= 1e-12)
        })
    };
    let masks_ok = preserves(&h.cavity_mask) && preserves(&h.excited_mask);
    let plus = match (&h.plus_mask, masks_ok) {
        (Some(p), true) if preserves(p) => Some(p.clone()),
        _ => None,
    };
    let labels = (0..n).map(|i| format!("rot{i}")).collect();
    let mut out = EffectiveHamiltonian {
        matrix,
        labels,
        cavity_mask: if masks_ok { h.cavity_mask.clone() } else { vec![false; n] },
        excited_mask: if masks_ok { h.excited_mask.clone() } else { vec![false; n] },
        plus_mask: plus,
        kappa: h.kappa,
        gamma: h.gamma,
        rotated: true,
    };
    if !masks_ok {
        out.cavity_mask.clear();
        out.excited_mask.clear();
    }
    Ok(out)
}

/// The 5x5 real orthogonal rotation that diagonalises the photon-mode blocks
/// of the three-level model (pairwise sum/difference combinations of the two
/// photon states within each ground-state block; excited state untouched).
pub fn three_level_mode_rotation() -> DMatrix<f64> {
    let s = 1.0 / 2.0_f64.sqrt();
    DMatrix::from_row_slice(
        5,
        5,
        &[
            s, s, 0.0, 0.0, 0.0, //
            -s, s, 0.0, 0.0, 0.0, //
            0.0, 0.0, s, s, 0.0, //
            0.0, 0.0, -s, s, 0.0, //
            0.0, 0.0, 0.0, 0.0, 1.0,
        ],
    )
}
