//! Three-qubit states, dichotomic projective measurements, and the Born rule.
//!
//! Outcome bit 0 maps to eigenvalue +1, bit 1 to −1; projectors are
//! Π^x_a = (I + (−1)^a n_x·σ)/2. Party order is A⊗B⊗C everywhere; splits that
//! involve a middle party are realized by explicit factor permutation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::behavior::Behavior;
use crate::tensor::ComplexMatrix;
use crate::{Error, Result};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| if i != j { c(1., 0.) } else { c(0., 0.) })
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 1) => c(0., -1.),
        (1, 0) => c(0., 1.),
        _ => c(0., 0.),
    })
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| {
        if i == j {
            c(if i == 0 { 1. } else { -1. }, 0.)
        } else {
            c(0., 0.)
        }
    })
}

/// The three parties, in tensor order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
    C,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::A, Party::B, Party::C];

    pub fn index(self) -> usize {
        match self {
            Party::A => 0,
            Party::B => 1,
            Party::C => 2,
        }
    }
}

/// An unordered pair of parties, ordered by tensor position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pair {
    AB,
    AC,
    BC,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::AB, Pair::AC, Pair::BC];

    pub fn parties(self) -> (Party, Party) {
        match self {
            Pair::AB => (Party::A, Party::B),
            Pair::AC => (Party::A, Party::C),
            Pair::BC => (Party::B, Party::C),
        }
    }

    /// The party left out of the pair.
    pub fn complement(self) -> Party {
        match self {
            Pair::AB => Party::C,
            Pair::AC => Party::B,
            Pair::BC => Party::A,
        }
    }
}

/// A bipartition of the three parties, named by the split-off singleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bipartition {
    /// A | BC
    A,
    /// B | AC
    B,
    /// C | AB
    C,
}

impl Bipartition {
    pub const ALL: [Bipartition; 3] = [Bipartition::A, Bipartition::B, Bipartition::C];

    pub fn singleton(self) -> Party {
        match self {
            Bipartition::A => Party::A,
            Bipartition::B => Party::B,
            Bipartition::C => Party::C,
        }
    }

    pub fn pair(self) -> Pair {
        match self {
            Bipartition::A => Pair::BC,
            Bipartition::B => Pair::AC,
            Bipartition::C => Pair::AB,
        }
    }

    /// Permutation sending the (singleton, pair.0, pair.1) factor order back
    /// to (A, B, C): output factor i is input factor perm[i].
    pub fn placement_permutation(self) -> [usize; 3] {
        match self {
            Bipartition::A => [0, 1, 2],
            Bipartition::B => [1, 0, 2],
            Bipartition::C => [1, 2, 0],
        }
    }
}

impl std::fmt::Display for Bipartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bipartition::A => write!(f, "A|BC"),
            Bipartition::B => write!(f, "B|AC"),
            Bipartition::C => write!(f, "C|AB"),
        }
    }
}

/// Sharp dichotomic qubit observable n·σ, with n a unit Bloch vector.
/// Construction normalizes the direction, so the unit invariant holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochObservable {
    n: [f64; 3],
}

impl BlochObservable {
    pub fn new(n: [f64; 3]) -> Result<Self> {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if norm < 1e-9 {
            return Err(Error::InvalidParameter(
                "Bloch direction has near-zero norm".into(),
            ));
        }
        Ok(Self {
            n: [n[0] / norm, n[1] / norm, n[2] / norm],
        })
    }

    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self {
            n: [
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ],
        }
    }

    pub fn direction(&self) -> [f64; 3] {
        self.n
    }

    /// The induced 2×2 operator n·σ.
    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => c(self.n[2], 0.),
            (0, 1) => c(self.n[0], -self.n[1]),
            (1, 0) => c(self.n[0], self.n[1]),
            _ => c(-self.n[2], 0.),
        })
    }

    /// Projector onto the (−1)^outcome eigenspace: (I + (−1)^a n·σ)/2.
    pub fn projector(&self, outcome: u8) -> ComplexMatrix {
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        ComplexMatrix::identity(2)
            .add(&self.matrix().scale_re(sign))
            .unwrap()
            .scale_re(0.5)
    }
}

/// Two Bloch observables per party.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSettings {
    parties: [[BlochObservable; 2]; 3],
}

impl MeasurementSettings {
    pub fn new(a: [BlochObservable; 2], b: [BlochObservable; 2], c: [BlochObservable; 2]) -> Self {
        Self { parties: [a, b, c] }
    }

    pub fn observable(&self, party: Party, setting: usize) -> &BlochObservable {
        &self.parties[party.index()][setting]
    }
}

/// On-disk settings schema: {"A": [[nx,ny,nz],[nx,ny,nz]], "B": ..., "C": ...}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsFile {
    #[serde(rename = "A")]
    pub a: [[f64; 3]; 2],
    #[serde(rename = "B")]
    pub b: [[f64; 3]; 2],
    #[serde(rename = "C")]
    pub c: [[f64; 3]; 2],
}

impl SettingsFile {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json)
            .map_err(|e| Error::InvalidParameter(format!("settings file: {e}")))
    }

    pub fn to_settings(&self) -> Result<MeasurementSettings> {
        let build = |v: &[[f64; 3]; 2], party: &str| -> Result<[BlochObservable; 2]> {
            let o0 = BlochObservable::new(v[0])
                .map_err(|e| Error::InvalidParameter(format!("{party}[0]: {e}")))?;
            let o1 = BlochObservable::new(v[1])
                .map_err(|e| Error::InvalidParameter(format!("{party}[1]: {e}")))?;
            Ok([o0, o1])
        };
        Ok(MeasurementSettings::new(
            build(&self.a, "A")?,
            build(&self.b, "B")?,
            build(&self.c, "C")?,
        ))
    }

    pub fn from_settings(s: &MeasurementSettings) -> Self {
        let arr = |p: Party| {
            [
                s.observable(p, 0).direction(),
                s.observable(p, 1).direction(),
            ]
        };
        Self {
            a: arr(Party::A),
            b: arr(Party::B),
            c: arr(Party::C),
        }
    }
}

/// Validated density matrix: Hermitian within 1e-10, unit trace within 1e-10,
/// PSD within 1e-9. Carries a free-form provenance label.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    label: String,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let dim = matrix.dim();
        if !matches!(dim, 2 | 4 | 8) {
            return Err(Error::InvalidState(format!(
                "density matrix dimension must be 2, 4 or 8, got {dim}"
            )));
        }
        let dev = matrix.hermiticity_deviation();
        if dev > 1e-10 {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {dev:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        if !matrix.is_psd(1e-9)? {
            return Err(Error::InvalidState("not positive semidefinite".into()));
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    pub fn from_pure(amplitudes: &[Complex64], label: impl Into<String>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!(
                "state vector norm {norm} is not 1"
            )));
        }
        Self::new(ComplexMatrix::outer(amplitudes), label)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Reduced state on the given parties (positions must be increasing).
    pub fn reduce(&self, keep: &[usize]) -> Result<ComplexMatrix> {
        if self.dim() != 8 {
            return Err(Error::DimensionMismatch(
                "reduction expects a three-qubit state".into(),
            ));
        }
        self.matrix.partial_trace(&[2, 2, 2], keep)
    }
}

/// Convex mixture of density matrices of equal dimension.
pub fn mix_states(parts: &[(f64, &DensityMatrix)]) -> Result<DensityMatrix> {
    if parts.is_empty() {
        return Err(Error::InvalidParameter("empty mixture".into()));
    }
    let dim = parts[0].1.dim();
    let mut acc = ComplexMatrix::zeros(dim);
    let mut wsum = 0.0;
    for &(w, rho) in parts {
        if w < -1e-12 {
            return Err(Error::InvalidParameter("negative mixture weight".into()));
        }
        wsum += w;
        acc = acc.add(&rho.matrix().scale_re(w))?;
    }
    if (wsum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "mixture weights sum to {wsum}"
        )));
    }
    DensityMatrix::new(acc, "mixture")
}

/// |W⟩ = (|001⟩ + |010⟩ + |100⟩)/√3 as a rank-1 projector.
pub fn w_state() -> DensityMatrix {
    let s = 1.0 / 3f64.sqrt();
    let mut v = [c(0., 0.); 8];
    v[0b001] = c(s, 0.);
    v[0b010] = c(s, 0.);
    v[0b100] = c(s, 0.);
    DensityMatrix::from_pure(&v, "W").expect("W state is valid")
}

/// v·|W⟩⟨W| + (1−v)·I/8 (white noise spread over all three qubits).
pub fn noisy_w(v: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!(
            "visibility {v} outside [0, 1]"
        )));
    }
    let m = w_state()
        .matrix()
        .scale_re(v)
        .add(&ComplexMatrix::identity(8).scale_re((1.0 - v) / 8.0))?;
    DensityMatrix::new(m, format!("noisy-W v={v} (noise I/8)"))
}

/// cosθ|000⟩ + sinθ|111⟩ for 0 < θ ≤ π/4.
pub fn gghz_state(theta: f64) -> Result<DensityMatrix> {
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_4) {
        return Err(Error::InvalidParameter(format!(
            "theta {theta} outside (0, pi/4]"
        )));
    }
    let mut v = [c(0., 0.); 8];
    v[0] = c(theta.cos(), 0.);
    v[7] = c(theta.sin(), 0.);
    DensityMatrix::from_pure(&v, format!("GGHZ theta={theta}"))
}

/// The standard GHZ state (θ = π/4).
pub fn ghz_state() -> DensityMatrix {
    gghz_state(std::f64::consts::FRAC_PI_4).expect("pi/4 is in range")
}

/// Two-qubit Bell states as density matrices.
pub fn bell_state(which: BellState) -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = [c(0., 0.); 4];
    match which {
        BellState::PhiPlus => {
            v[0b00] = c(s, 0.);
            v[0b11] = c(s, 0.);
        }
        BellState::PhiMinus => {
            v[0b00] = c(s, 0.);
            v[0b11] = c(-s, 0.);
        }
        BellState::PsiPlus => {
            v[0b01] = c(s, 0.);
            v[0b10] = c(s, 0.);
        }
        BellState::PsiMinus => {
            v[0b01] = c(s, 0.);
            v[0b10] = c(-s, 0.);
        }
    }
    DensityMatrix::from_pure(&v, format!("{which:?}")).expect("Bell states are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    /// The singlet.
    PsiMinus,
}

/// Product of a single-qubit pure state and a two-qubit pair state across the
/// chosen bipartition, reordered back to A⊗B⊗C.
pub fn biseparable_state(
    branch: Bipartition,
    pure_single: &[Complex64; 2],
    bell_pair: &DensityMatrix,
) -> Result<DensityMatrix> {
    let norm: f64 = pure_single.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!(
            "single-party vector norm {norm} is not 1"
        )));
    }
    if bell_pair.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "pair state must have dimension 4, got {}",
            bell_pair.dim()
        )));
    }
    let single = ComplexMatrix::outer(pure_single);
    let product = single.kron(bell_pair.matrix());
    let placed = product.permute_systems(&[2, 2, 2], &branch.placement_permutation())?;
    DensityMatrix::new(placed, format!("biseparable {branch}"))
}

/// ⟨A⊗B⊗C⟩ on a three-qubit state: Re Tr[ρ (A⊗B⊗C)].
pub fn correlator_expectation(
    rho: &DensityMatrix,
    a: &BlochObservable,
    b: &BlochObservable,
    c_obs: &BlochObservable,
) -> f64 {
    let op = a.matrix().kron(&b.matrix()).kron(&c_obs.matrix());
    rho.matrix()
        .trace_product_re(&op)
        .expect("dimensions match")
}

/// Full behavior table from the Born rule:
/// P(abc|xyz) = Tr[ρ (Π^x_a ⊗ Π^y_b ⊗ Π^z_c)].
pub fn born_behavior(rho: &DensityMatrix, settings: &MeasurementSettings) -> Result<Behavior> {
    if rho.dim() != 8 {
        return Err(Error::DimensionMismatch(format!(
            "behavior generation expects a three-qubit state, got dim {}",
            rho.dim()
        )));
    }
    // 12 projectors, indexed [party][setting][outcome]
    let mut projectors: Vec<Vec<[ComplexMatrix; 2]>> = Vec::with_capacity(3);
    for party in Party::ALL {
        let mut per_setting = Vec::with_capacity(2);
        for setting in 0..2 {
            let obs = settings.observable(party, setting);
            per_setting.push([obs.projector(0), obs.projector(1)]);
        }
        projectors.push(per_setting);
    }
    Behavior::from_fn(|x, y, z, a, b, c_out| {
        let op = projectors[0][x][a]
            .kron(&projectors[1][y][b])
            .kron(&projectors[2][z][c_out]);
        rho.matrix().trace_product_re(&op).expect("dim 8")
    })
}
