//! Mermin-family witnesses, the Q quantity, CHSH and Svetlichny combinations,
//! the branch-operator decomposition check, and the certification rules.

use serde::{Deserialize, Serialize};

use crate::behavior::{Behavior, MarginalProfile, PairBehavior};
use crate::quantum::{Bipartition, DensityMatrix, MeasurementSettings, Party};
use crate::tensor::ComplexMatrix;
use crate::{tol, Error, Result};

pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

fn sign(bit: usize) -> f64 {
    if bit & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The signed four-correlator Mermin combination
/// ⟨x0y0z1⟩ + ⟨x0y1z0⟩ + ⟨x1y0z0⟩ − ⟨x1y1z1⟩.
pub fn mermin_signed(p: &Behavior) -> f64 {
    mermin_family_member(p, 0, 0, 0)
}

/// Absolute value of the Mermin combination. Local bound 2, quantum maximum 4.
pub fn mermin_value(p: &Behavior) -> f64 {
    mermin_signed(p).abs()
}

/// Family member M_{αβγ}: the even-parity members use the plus form, the
/// odd-parity members the minus form.
pub fn mermin_family_member(p: &Behavior, alpha: usize, beta: usize, gamma: usize) -> f64 {
    let e = |x: usize, y: usize, z: usize| p.correlator(x, y, z);
    if (alpha ^ beta ^ gamma) & 1 == 0 {
        sign(gamma) * e(0, 0, 1)
            + sign(beta) * e(0, 1, 0)
            + sign(alpha) * e(1, 0, 0)
            + sign(alpha ^ beta ^ gamma ^ 1) * e(1, 1, 1)
    } else {
        sign(alpha ^ beta ^ 1) * e(1, 1, 0)
            + sign(alpha ^ gamma ^ 1) * e(1, 0, 1)
            + sign(beta ^ gamma ^ 1) * e(0, 1, 1)
            + e(0, 0, 0)
    }
}

/// All eight family members, indexed by the bits (α<<2)|(β<<1)|γ.
pub fn mermin_family(p: &Behavior) -> [f64; 8] {
    let mut fam = [0.0; 8];
    for alpha in 0..2 {
        for beta in 0..2 {
            for gamma in 0..2 {
                fam[(alpha << 2) | (beta << 1) | gamma] =
                    mermin_family_member(p, alpha, beta, gamma);
            }
        }
    }
    fam
}

/// Which bit (0 = α, 1 = β, 2 = γ) occupies the outer, middle, and inner
/// nesting level of the absolute-value tree.
pub type NestingOrder = [usize; 3];

/// Configuration of the permutation set minimized over by the Q quantity.
#[derive(Debug, Clone)]
pub struct QConfig {
    pub orders: Vec<NestingOrder>,
}

impl Default for QConfig {
    /// All six assignments of the three bits to nesting levels.
    fn default() -> Self {
        Self {
            orders: vec![
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ],
        }
    }
}

/// One nested absolute-difference tree over the family values.
pub fn q_nested(family: &[f64; 8], order: NestingOrder) -> f64 {
    let member = |u: usize, v: usize, w: usize| -> f64 {
        let mut bits = [0usize; 3];
        bits[order[0]] = u;
        bits[order[1]] = v;
        bits[order[2]] = w;
        family[(bits[0] << 2) | (bits[1] << 1) | bits[2]]
    };
    let d = |u: usize, v: usize| (member(u, v, 0) - member(u, v, 1)).abs();
    let e = |u: usize| (d(u, 0) - d(u, 1)).abs();
    (e(0) - e(1)).abs()
}

pub fn q_from_family(family: &[f64; 8], cfg: &QConfig) -> f64 {
    cfg.orders
        .iter()
        .map(|&order| q_nested(family, order))
        .fold(f64::INFINITY, f64::min)
}

/// Q = min over the configured nesting orders; ≥ 0 by construction.
pub fn q_value(p: &Behavior) -> f64 {
    q_from_family(&mermin_family(p), &QConfig::default())
}

/// The canonical bipartite combination ⟨u1v1⟩ + ⟨u1v0⟩ + ⟨u0v1⟩ − ⟨u0v0⟩;
/// `primed` interchanges setting indices 0 and 1 on both sides.
pub fn chsh_value(p: &PairBehavior, primed: bool) -> Result<f64> {
    p.require_no_signaling()?;
    let idx = |s: usize| if primed { 1 - s } else { s };
    Ok(p.correlator(idx(1), idx(1)) + p.correlator(idx(1), idx(0)) + p.correlator(idx(0), idx(1))
        - p.correlator(idx(0), idx(0)))
}

/// |M⁺₀₀₀ + M⁻₀₀₀|: the eight-correlator Svetlichny combination with
/// two-way-local bound 4, quantum maximum 4√2, no-signaling maximum 8.
pub fn svetlichny_value(p: &Behavior) -> f64 {
    let plus = mermin_family_member(p, 0, 0, 0);
    let minus = {
        let e = |x: usize, y: usize, z: usize| p.correlator(x, y, z);
        sign(1) * e(1, 1, 0) + sign(1) * e(1, 0, 1) + sign(1) * e(0, 1, 1) + e(0, 0, 0)
    };
    (plus + minus).abs()
}

/// CHSH and primed-CHSH operators (4×4) for two parties' observables,
/// in pair order (u, v): u1v1 + u1v0 + u0v1 − u0v0.
fn chsh_operators(
    settings: &MeasurementSettings,
    u: Party,
    v: Party,
) -> (ComplexMatrix, ComplexMatrix) {
    let op = |i: usize, j: usize| {
        settings
            .observable(u, i)
            .matrix()
            .kron(&settings.observable(v, j).matrix())
    };
    let chsh = op(1, 1)
        .add(&op(1, 0))
        .unwrap()
        .add(&op(0, 1))
        .unwrap()
        .sub(&op(0, 0))
        .unwrap();
    let primed = op(0, 0)
        .add(&op(0, 1))
        .unwrap()
        .add(&op(1, 0))
        .unwrap()
        .sub(&op(1, 1))
        .unwrap();
    (chsh, primed)
}

/// The branch Mermin operator ½[s₀⊗(CHSH − CHSH') + s₁⊗(CHSH + CHSH')],
/// assembled as an 8×8 operator in A⊗B⊗C order.
pub fn branch_mermin_operator(
    settings: &MeasurementSettings,
    branch: Bipartition,
) -> ComplexMatrix {
    let single = branch.singleton();
    let (u, v) = branch.pair().parties();
    let (chsh, primed) = chsh_operators(settings, u, v);
    let diff = chsh.sub(&primed).unwrap();
    let sum = chsh.add(&primed).unwrap();
    let s0 = settings.observable(single, 0).matrix();
    let s1 = settings.observable(single, 1).matrix();
    let op = s0
        .kron(&diff)
        .add(&s1.kron(&sum))
        .unwrap()
        .scale_re(0.5);
    op.permute_systems(&[2, 2, 2], &branch.placement_permutation())
        .expect("three qubit factors")
}

/// Residual of the product-state identity behind the branch decomposition:
/// |⟨M⟩ − ½(⟨s₀⟩·U + ⟨s₁⟩·V)| with U = ⟨CHSH⟩ − ⟨CHSH'⟩ and
/// V = ⟨CHSH⟩ + ⟨CHSH'⟩ evaluated on the reduced pair state. The caller
/// asserts that `rho` is a product across the stated branch; the residual is
/// only guaranteed small in that case.
pub fn mermin_decomposition_residual(
    rho: &DensityMatrix,
    settings: &MeasurementSettings,
    branch: Bipartition,
) -> Result<f64> {
    if rho.dim() != 8 {
        return Err(Error::DimensionMismatch(
            "decomposition check expects a three-qubit state".into(),
        ));
    }
    let op = branch_mermin_operator(settings, branch);
    let lhs = rho.matrix().trace_product_re(&op)?;

    let single = branch.singleton();
    let (u, v) = branch.pair().parties();
    let rho_single = rho.reduce(&[single.index()])?;
    let mut pair_keep = [u.index(), v.index()];
    pair_keep.sort_unstable();
    let rho_pair = rho.reduce(&pair_keep)?;

    let (chsh, primed) = chsh_operators(settings, u, v);
    let uval = rho_pair.trace_product_re(&chsh)? - rho_pair.trace_product_re(&primed)?;
    let vval = rho_pair.trace_product_re(&chsh)? + rho_pair.trace_product_re(&primed)?;
    let e0 = rho_single.trace_product_re(&settings.observable(single, 0).matrix())?;
    let e1 = rho_single.trace_product_re(&settings.observable(single, 1).matrix())?;
    let rhs = 0.5 * (e0 * uval + e1 * vval);
    Ok((lhs - rhs).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "GME_certified")]
    GmeCertified,
    #[serde(rename = "not_certified")]
    NotCertified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertMode {
    DeviceIndependent,
    SemiDeviceIndependent,
    AboveThreshold,
}

/// One numeric comparison that entered a certification decision.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Evidence {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub relation: String,
    pub satisfied: bool,
}

impl Evidence {
    fn gt(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            relation: ">".into(),
            satisfied: value > threshold,
        }
    }

    fn le(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            relation: "<=".into(),
            satisfied: value <= threshold,
        }
    }
}

/// Certification outcome with the numeric evidence that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub mode: Option<CertMode>,
    pub evidence: Vec<Evidence>,
    pub assumptions: Vec<String>,
}

/// Apply the three certification rules in order:
/// (i) Mermin above 2√2 + tol certifies outright;
/// (ii) Mermin at 2√2 with at least two non-random marginals and Q above the
///      threshold certifies device-independently;
/// (iii) the same marginal condition with Q at zero certifies under the
///       recorded single-qubit dimension assumption.
pub fn certify(p: &Behavior, tol_mermin: f64, tol_marginal: f64) -> Result<Certificate> {
    let dev = p.no_signaling_deviation();
    if dev > tol::NO_SIGNALING {
        return Err(Error::Signaling { deviation: dev });
    }
    let mermin = mermin_value(p);
    let q = q_value(p);
    let mut non_mixed = 0usize;
    let mut evidence = Vec::new();
    for party in Party::ALL {
        let mixed = p.is_marginal_maximally_mixed(party, tol_marginal)?;
        if !mixed {
            non_mixed += 1;
        }
        let e0 = p.single_marginal_expectation(party, 0)?;
        let e1 = p.single_marginal_expectation(party, 1)?;
        evidence.push(Evidence::gt(
            &format!("party_{party:?}_marginal_magnitude"),
            e0.abs().max(e1.abs()),
            tol_marginal,
        ));
    }

    let above = Evidence::gt("mermin_above_threshold", mermin, TSIRELSON + tol_mermin);
    let at_value = Evidence::le(
        "mermin_at_2sqrt2_deviation",
        (mermin - TSIRELSON).abs(),
        tol_mermin,
    );
    let enough_marginals = Evidence::gt("non_maximally_mixed_parties", non_mixed as f64, 1.0);
    let q_positive = Evidence::gt("q_value", q, tol_marginal);
    evidence.push(above.clone());
    evidence.push(at_value.clone());
    evidence.push(enough_marginals.clone());
    evidence.push(q_positive.clone());

    if above.satisfied {
        return Ok(Certificate {
            verdict: Verdict::GmeCertified,
            mode: Some(CertMode::AboveThreshold),
            evidence,
            assumptions: vec![],
        });
    }
    if at_value.satisfied && enough_marginals.satisfied {
        if q_positive.satisfied {
            return Ok(Certificate {
                verdict: Verdict::GmeCertified,
                mode: Some(CertMode::DeviceIndependent),
                evidence,
                assumptions: vec![],
            });
        }
        return Ok(Certificate {
            verdict: Verdict::GmeCertified,
            mode: Some(CertMode::SemiDeviceIndependent),
            evidence,
            assumptions: vec!["at least one local dimension = 2".into()],
        });
    }
    Ok(Certificate {
        verdict: Verdict::NotCertified,
        mode: None,
        evidence,
        assumptions: vec![],
    })
}

/// Route flags for the report: each is the condition of one certification
/// rule, evaluated independently.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdicts {
    #[serde(rename = "above_threshold_GME")]
    pub above_threshold_gme: bool,
    #[serde(rename = "semi_DI_GME")]
    pub semi_di_gme: bool,
    #[serde(rename = "DI_GME")]
    pub di_gme: bool,
}

/// Everything the witness evaluation produces for one behavior.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessReport {
    pub mermin: f64,
    pub mermin_family: [f64; 8],
    pub q_value: f64,
    pub svetlichny: f64,
    pub marginal_profile: MarginalProfile,
    pub verdicts: Verdicts,
    pub assumptions: Vec<String>,
}

pub fn witness_report(p: &Behavior, tol_mermin: f64, tol_marginal: f64) -> Result<WitnessReport> {
    let family = mermin_family(p);
    let mermin = family[0].abs();
    let q = q_from_family(&family, &QConfig::default());
    let cert = certify(p, tol_mermin, tol_marginal)?;
    let mut non_mixed = 0usize;
    for party in Party::ALL {
        if !p.is_marginal_maximally_mixed(party, tol_marginal)? {
            non_mixed += 1;
        }
    }
    let at_value = (mermin - TSIRELSON).abs() <= tol_mermin;
    let verdicts = Verdicts {
        above_threshold_gme: mermin > TSIRELSON + tol_mermin,
        semi_di_gme: at_value && non_mixed >= 2,
        di_gme: at_value && non_mixed >= 2 && q > tol_marginal,
    };
    Ok(WitnessReport {
        mermin,
        mermin_family: family,
        q_value: q,
        svetlichny: svetlichny_value(p),
        marginal_profile: p.marginal_profile()?,
        verdicts,
        assumptions: cert.assumptions,
    })
}
