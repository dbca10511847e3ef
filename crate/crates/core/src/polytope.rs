//! Vertex enumeration for the fully-local and two-way-local polytopes,
//! PR-type boxes, the canonical two-way-local mixture family, and LP-based
//! membership tests.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::behavior::{self, Behavior, PairBehavior};
use crate::par;
use crate::quantum::Bipartition;
use crate::simplex::{solve_equality, Feasibility, LpScalar};
use crate::{Error, Result};

/// PR convention whose correlators align with the canonical CHSH combination
/// ⟨u1v1⟩ + ⟨u1v0⟩ + ⟨u0v1⟩ − ⟨u0v0⟩ (value 4). Id 0 is the textbook box
/// a⊕b = x·y.
pub const PR_CANONICAL_ALIGNED: u8 = 7;

/// One of the 8 PR-type boxes: P(ab|xy) = 1/2 iff a⊕b = xy ⊕ μx ⊕ νy ⊕ σ,
/// with the id packing the bits as (μ<<2)|(ν<<1)|σ. Correlators are
/// E_xy = (−1)^{xy ⊕ μx ⊕ νy ⊕ σ}; marginals are maximally mixed.
pub fn pr_box(id: u8) -> Result<PairBehavior> {
    if id > 7 {
        return Err(Error::InvalidParameter(format!(
            "PR convention id {id} outside 0..8"
        )));
    }
    let (mu, nu, sg) = ((id >> 2) & 1, (id >> 1) & 1, id & 1);
    PairBehavior::from_fn(|x, y, a, b| {
        let target = (x & y) ^ (mu as usize & x) ^ (nu as usize & y) ^ sg as usize;
        if (a ^ b) == target {
            0.5
        } else {
            0.0
        }
    })
}

/// λ·PR + (1−λ)·white noise.
pub fn noisy_pr_box(id: u8, lambda: f64) -> Result<PairBehavior> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "lambda {lambda} outside [0, 1]"
        )));
    }
    let pr = pr_box(id)?;
    PairBehavior::mix(&[(lambda, &pr), (1.0 - lambda, &PairBehavior::white_noise())])
}

/// Single-party deterministic strategy: output (s >> x) & 1 on input x.
fn det_output(strategy: u8, input: usize) -> usize {
    ((strategy >> input) & 1) as usize
}

/// Deterministic bipartite box from two single-party strategies.
pub fn deterministic_pair(sa: u8, sb: u8) -> PairBehavior {
    PairBehavior::from_fn(|x, y, a, b| {
        if a == det_output(sa, x) && b == det_output(sb, y) {
            1.0
        } else {
            0.0
        }
    })
    .expect("deterministic boxes are valid")
}

/// Deterministic tripartite box from three single-party strategies.
pub fn deterministic_tripartite(sa: u8, sb: u8, sc: u8) -> Behavior {
    Behavior::from_fn(|x, y, z, a, b, c| {
        if a == det_output(sa, x) && b == det_output(sb, y) && c == det_output(sc, z) {
            1.0
        } else {
            0.0
        }
    })
    .expect("deterministic boxes are valid")
}

/// Product of a single-party deterministic strategy with a bipartite box,
/// placed across the given bipartition.
pub fn product_behavior(branch: Bipartition, single_strategy: u8, pair: &PairBehavior) -> Behavior {
    Behavior::from_fn(|x, y, z, a, b, c| match branch {
        Bipartition::A => {
            if a == det_output(single_strategy, x) {
                pair.get(y, z, b, c)
            } else {
                0.0
            }
        }
        Bipartition::B => {
            if b == det_output(single_strategy, y) {
                pair.get(x, z, a, c)
            } else {
                0.0
            }
        }
        Bipartition::C => {
            if c == det_output(single_strategy, z) {
                pair.get(x, y, a, b)
            } else {
                0.0
            }
        }
    })
    .expect("products of valid boxes are valid")
}

/// The no-signaling extremal box reaching the algebraic Svetlichny maximum 8:
/// P(abc|xyz) = 1/4 iff a⊕b⊕c = xy ⊕ yz ⊕ zx.
pub fn svetlichny_box() -> Behavior {
    Behavior::from_fn(|x, y, z, a, b, c| {
        if (a ^ b ^ c) == ((x & y) ^ (y & z) ^ (z & x)) {
            0.25
        } else {
            0.0
        }
    })
    .expect("valid by construction")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    FullyLocal,
    TwoWayLocal,
}

/// An enumerated vertex set with per-vertex provenance labels.
#[derive(Debug, Clone)]
pub struct VertexSet {
    pub kind: VertexKind,
    pub vertices: Vec<Behavior>,
    pub labels: Vec<String>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// JSON array of behavior objects, for external cross-checking.
    pub fn export_json(&self) -> serde_json::Value {
        let items: Vec<serde_json::Value> = self
            .vertices
            .iter()
            .zip(&self.labels)
            .map(|(v, label)| {
                serde_json::json!({
                    "inputs": 2,
                    "outputs": 2,
                    "parties": 3,
                    "p": v.entries().to_vec(),
                    "meta": {"label": label},
                })
            })
            .collect();
        serde_json::Value::Array(items)
    }
}

/// All 64 products of single-party deterministic strategies.
pub fn enumerate_fully_local() -> VertexSet {
    let mut vertices = Vec::with_capacity(64);
    let mut labels = Vec::with_capacity(64);
    for sa in 0..4u8 {
        for sb in 0..4u8 {
            for sc in 0..4u8 {
                vertices.push(deterministic_tripartite(sa, sb, sc));
                labels.push(format!("det a={sa:02b} b={sb:02b} c={sc:02b}"));
            }
        }
    }
    VertexSet {
        kind: VertexKind::FullyLocal,
        vertices,
        labels,
    }
}

/// The 24 extremal boxes of the bipartite two-input/two-output no-signaling
/// polytope: 16 deterministic boxes followed by the 8 PR variants.
pub fn enumerate_bipartite_ns_extremals() -> Vec<PairBehavior> {
    let mut out = Vec::with_capacity(24);
    for sa in 0..4u8 {
        for sb in 0..4u8 {
            out.push(deterministic_pair(sa, sb));
        }
    }
    for id in 0..8u8 {
        out.push(pr_box(id).expect("id in range"));
    }
    out
}

/// All products D_single × bipartite-NS-extremal over the three bipartitions
/// (3 × 4 × 24 = 288 candidates), with exact duplicates removed. The fully
/// deterministic products coincide across bipartitions, leaving 64 + 96
/// distinct vertices.
pub fn enumerate_two_way_local() -> VertexSet {
    let extremals = enumerate_bipartite_ns_extremals();
    let mut vertices: Vec<Behavior> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for branch in Bipartition::ALL {
        for strategy in 0..4u8 {
            for (ei, ext) in extremals.iter().enumerate() {
                let candidate = product_behavior(branch, strategy, ext);
                if !vertices.contains(&candidate) {
                    let kind = if ei < 16 {
                        format!("det{ei}")
                    } else {
                        format!("PR{}", ei - 16)
                    };
                    labels.push(format!("{branch} d={strategy:02b} {kind}"));
                    vertices.push(candidate);
                }
            }
        }
    }
    VertexSet {
        kind: VertexKind::TwoWayLocal,
        vertices,
        labels,
    }
}

/// The canonical two-way-local mixture
/// k₁·D_A×PR^λ_BC + k₂·D_B×PR^λ_AC + k₃·D_C×PR^λ_AB.
pub fn canonical_l2_behavior(
    k: [f64; 3],
    lambda: f64,
    conventions: &BranchConventions,
) -> Result<Behavior> {
    if k.iter().any(|&w| w < -1e-12) {
        return Err(Error::InvalidParameter("negative branch weight".into()));
    }
    let sum: f64 = k.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "branch weights sum to {sum}"
        )));
    }
    let parts = [
        (Bipartition::A, k[0], conventions.a),
        (Bipartition::B, k[1], conventions.b),
        (Bipartition::C, k[2], conventions.c),
    ];
    let mut built = Vec::new();
    for (branch, weight, conv) in parts {
        let noisy = noisy_pr_box(conv.pr, lambda)?;
        built.push((weight, product_behavior(branch, conv.det, &noisy)));
    }
    let refs: Vec<(f64, &Behavior)> = built.iter().map(|(w, b)| (*w, b)).collect();
    Behavior::mix(&refs)
}

/// Per-branch choice of deterministic box and PR convention.
#[derive(Debug, Clone, Copy)]
pub struct BranchConvention {
    /// Single-party deterministic strategy id (0..4).
    pub det: u8,
    /// PR convention id (0..8).
    pub pr: u8,
}

#[derive(Debug, Clone, Copy)]
pub struct BranchConventions {
    pub a: BranchConvention,
    pub b: BranchConvention,
    pub c: BranchConvention,
}

impl BranchConventions {
    /// Conventions under which the three branch contributions to the Mermin
    /// combination add with a common sign: always-output-0 deterministic
    /// boxes with the textbook PR in every branch.
    pub fn aligned() -> Self {
        let conv = BranchConvention { det: 0, pr: 0 };
        Self {
            a: conv,
            b: conv,
            c: conv,
        }
    }
}

/// LP membership verdict. When `member` is true the weights reconstruct the
/// query within `max_residual` (at most 1e-8 per entry for the float path,
/// exactly for the rational path).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeVerdict {
    pub member: bool,
    pub weights: Option<Vec<(usize, f64)>>,
    pub max_residual: f64,
}

fn reconstruction_residual(p: &Behavior, v: &VertexSet, weights: &[(usize, f64)]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..behavior::N_ENTRIES {
        let mut acc = 0.0;
        for &(vi, w) in weights {
            acc += w * v.vertices[vi].entries()[i];
        }
        worst = worst.max((acc - p.entries()[i]).abs());
    }
    worst
}

fn membership_generic<T: LpScalar>(p: &Behavior, v: &VertexSet) -> PolytopeVerdict {
    let n = v.len();
    // 64 entry equations plus the normalization row
    let mut a: Vec<Vec<T>> = Vec::with_capacity(behavior::N_ENTRIES + 1);
    let mut b: Vec<T> = Vec::with_capacity(behavior::N_ENTRIES + 1);
    for i in 0..behavior::N_ENTRIES {
        let row: Vec<T> = (0..n)
            .map(|j| T::from_f64(v.vertices[j].entries()[i]))
            .collect();
        a.push(row);
        b.push(T::from_f64(p.entries()[i]));
    }
    a.push(vec![T::one(); n]);
    b.push(T::one());

    match solve_equality(&a, &b, None) {
        Feasibility::Feasible { x } => {
            let weights: Vec<(usize, f64)> = x
                .iter()
                .enumerate()
                .filter_map(|(i, w)| {
                    let wf = w.to_f64();
                    (wf > 1e-12).then_some((i, wf))
                })
                .collect();
            let max_residual = reconstruction_residual(p, v, &weights);
            PolytopeVerdict {
                member: true,
                weights: Some(weights),
                max_residual,
            }
        }
        Feasibility::Infeasible { residual } => PolytopeVerdict {
            member: false,
            weights: None,
            max_residual: residual.to_f64(),
        },
    }
}

/// Float-path membership test: does `p` lie in the convex hull of the vertex
/// set? Solves the weight-finding LP with a two-phase dense simplex.
pub fn membership(p: &Behavior, v: &VertexSet) -> PolytopeVerdict {
    membership_generic::<f64>(p, v)
}

/// Exact-rational membership. Every f64 entry is interpreted as the dyadic
/// rational it exactly is, so dyadic queries are decided exactly. A query
/// produced by floating-point arithmetic generally lies off the no-signaling
/// affine hull by rounding error, which exact arithmetic reports as
/// infeasible with a rounding-scale residual; use the float path for such
/// tables.
pub fn membership_exact(p: &Behavior, v: &VertexSet) -> PolytopeVerdict {
    membership_generic::<BigRational>(p, v)
}

/// Independent membership tests for a batch of behaviors.
pub fn membership_batch(ps: &[Behavior], v: &VertexSet) -> Vec<PolytopeVerdict> {
    par::map_slice(ps, |p| membership(p, v))
}

/// Extremality check used to validate the bipartite enumeration: a box is
/// extremal iff it is not a convex combination of the remaining ones.
pub fn pair_in_hull(p: &PairBehavior, hull: &[&PairBehavior]) -> bool {
    let n = hull.len();
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(behavior::PAIR_ENTRIES + 1);
    let mut b: Vec<f64> = Vec::with_capacity(behavior::PAIR_ENTRIES + 1);
    for i in 0..behavior::PAIR_ENTRIES {
        a.push((0..n).map(|j| hull[j].entries()[i]).collect());
        b.push(p.entries()[i]);
    }
    a.push(vec![1.0; n]);
    b.push(1.0);
    matches!(solve_equality(&a, &b, None), Feasibility::Feasible { .. })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::{chsh_value, mermin_value, svetlichny_value};
    use rand::Rng;
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

    #[test]
    fn fully_local_count_and_determinism() {
        let set = enumerate_fully_local();
        assert_eq!(set.len(), 64);
        for v in &set.vertices {
            assert!(v.entries().iter().all(|&e| e == 0.0 || e == 1.0));
            assert!(v.no_signaling_deviation() <= 1e-12);
        }
    }

    #[test]
    fn bipartite_extremal_count_and_ns() {
        let ext = enumerate_bipartite_ns_extremals();
        assert_eq!(ext.len(), 24);
        for e in &ext {
            assert!(e.no_signaling_deviation() <= 1e-12);
        }
        // exactly 8 reach 4 on some CHSH sign convention
        let reach_four = ext
            .iter()
            .filter(|e| {
                let mut best = 0.0f64;
                for signs in 0..8u8 {
                    // sign pattern with odd parity: flip term signs per bits
                    let s = |bit: u8| if bit == 0 { 1.0 } else { -1.0 };
                    let v = s(signs & 1) * e.correlator(0, 0)
                        + s((signs >> 1) & 1) * e.correlator(0, 1)
                        + s((signs >> 2) & 1) * e.correlator(1, 0)
                        - s(signs & 1) * s((signs >> 1) & 1) * s((signs >> 2) & 1)
                            * e.correlator(1, 1);
                    best = best.max(v.abs());
                }
                (best - 4.0).abs() <= 1e-12
            })
            .count();
        assert_eq!(reach_four, 8);
    }

    #[test]
    fn bipartite_extremals_pass_lp_extremality_oracle() {
        let ext = enumerate_bipartite_ns_extremals();
        for i in 0..ext.len() {
            let others: Vec<&PairBehavior> = ext
                .iter()
                .enumerate()
                .filter_map(|(j, e)| (j != i).then_some(e))
                .collect();
            assert!(
                !pair_in_hull(&ext[i], &others),
                "box {i} decomposed into the others"
            );
        }
    }

    #[test]
    fn two_way_local_enumeration() {
        let extremals = enumerate_bipartite_ns_extremals();
        let mut candidates = 0usize;
        for _branch in Bipartition::ALL {
            for _strategy in 0..4u8 {
                candidates += extremals.len();
            }
        }
        assert_eq!(candidates, 288);

        let set = enumerate_two_way_local();
        assert_eq!(set.len(), 160); // 64 deterministic + 96 PR products
        for v in &set.vertices {
            assert!(v.no_signaling_deviation() <= 1e-12);
        }
        // contains every fully-local vertex
        let local = enumerate_fully_local();
        for v in &local.vertices {
            assert!(set.vertices.contains(v));
        }
    }

    #[test]
    fn pr_box_examples() {
        let textbook = pr_box(0).unwrap();
        let mut pattern = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                pattern.push(textbook.correlator(x, y));
            }
        }
        assert_eq!(pattern, vec![1.0, 1.0, 1.0, -1.0]);
        // standard combination E00 + E01 + E10 − E11 reaches 4
        let standard = pattern[0] + pattern[1] + pattern[2] - pattern[3];
        assert_eq!(standard, 4.0);
        // aligned convention reaches 4 on the canonical combination
        let aligned = pr_box(PR_CANONICAL_ALIGNED).unwrap();
        assert_eq!(chsh_value(&aligned, false).unwrap(), 4.0);
        for setting in 0..2 {
            assert!(aligned.single_expectation(0, setting).abs() <= 1e-15);
            assert!(aligned.single_expectation(1, setting).abs() <= 1e-15);
        }
        let white = noisy_pr_box(0, 0.0).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(white.correlator(x, y), 0.0);
            }
        }
        assert!(pr_box(8).is_err());
        assert!(noisy_pr_box(0, 1.2).is_err());
    }

    #[test]
    fn mermin_maxima_over_vertex_sets() {
        let local = enumerate_fully_local();
        let max_local = local
            .vertices
            .iter()
            .map(mermin_value)
            .fold(0.0f64, f64::max);
        assert_eq!(max_local, 2.0);

        let two_way = enumerate_two_way_local();
        let max_two_way = two_way
            .vertices
            .iter()
            .map(mermin_value)
            .fold(0.0f64, f64::max);
        assert!((max_two_way - 4.0).abs() <= 1e-12);
    }

    #[test]
    fn svetlichny_bound_on_two_way_vertices() {
        let two_way = enumerate_two_way_local();
        let max = two_way
            .vertices
            .iter()
            .map(svetlichny_value)
            .fold(0.0f64, f64::max);
        assert!((max - 4.0).abs() <= 1e-12);
    }

    #[test]
    fn canonical_l2_examples() {
        let lam = std::f64::consts::FRAC_1_SQRT_2;
        let aligned = BranchConventions::aligned();
        let single = canonical_l2_behavior([1.0, 0.0, 0.0], lam, &aligned).unwrap();
        assert!((mermin_value(&single) - crate::witness::TSIRELSON).abs() <= 1e-12);

        let two = canonical_l2_behavior([0.5, 0.5, 0.0], lam, &aligned).unwrap();
        let ea = two
            .single_marginal_expectation(crate::quantum::Party::A, 0)
            .unwrap();
        let eb = two
            .single_marginal_expectation(crate::quantum::Party::B, 0)
            .unwrap();
        let ec = two
            .single_marginal_expectation(crate::quantum::Party::C, 0)
            .unwrap();
        assert!(ea.abs() > 1e-6 && eb.abs() > 1e-6);
        assert!(ec.abs() <= 1e-12);

        assert!(canonical_l2_behavior([0.5, 0.6, 0.0], lam, &aligned).is_err());
        assert!(canonical_l2_behavior([1.0, 0.0, 0.0], 1.5, &aligned).is_err());
    }

    #[test]
    fn membership_accepts_vertices_and_mixtures() {
        let local = enumerate_fully_local();
        let verdict = membership(&local.vertices[17], &local);
        assert!(verdict.member);
        assert!(verdict.max_residual <= 1e-8);

        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..20 {
            let i = rng.gen_range(0..64);
            let j = rng.gen_range(0..64);
            let w = rng.gen_range(0.0..1.0);
            let mixed = Behavior::mix(&[(w, &local.vertices[i]), (1.0 - w, &local.vertices[j])])
                .unwrap();
            let verdict = membership(&mixed, &local);
            assert!(verdict.member);
            assert!(verdict.max_residual <= 1e-8);
        }
    }

    #[test]
    fn inclusion_chain_local_subset_of_two_way() {
        let local = enumerate_fully_local();
        let two_way = enumerate_two_way_local();
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let mut queries = Vec::with_capacity(200);
        for _ in 0..200 {
            let terms = rng.gen_range(2..5);
            let mut weights: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.01..1.0)).collect();
            let sum: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= sum);
            let parts: Vec<(f64, &Behavior)> = weights
                .iter()
                .map(|&w| (w, &local.vertices[rng.gen_range(0..64)]))
                .collect();
            queries.push(Behavior::mix(&parts).unwrap());
        }
        let verdicts = membership_batch(&queries, &two_way);
        assert!(verdicts.iter().all(|v| v.member && v.max_residual <= 1e-8));
    }

    #[test]
    fn membership_rejects_nonlocal_boxes() {
        let local = enumerate_fully_local();
        let two_way = enumerate_two_way_local();
        let l2 = canonical_l2_behavior(
            [0.2, 0.5, 0.3],
            std::f64::consts::FRAC_1_SQRT_2,
            &BranchConventions::aligned(),
        )
        .unwrap();
        assert!(membership(&l2, &two_way).member);
        assert!(!membership(&l2, &local).member);

        let svet = svetlichny_box();
        assert!(!membership(&svet, &two_way).member);
    }

    #[test]
    fn quantum_behavior_at_tsirelson_value_is_two_way_local() {
        // Mermin 2√2 sits well inside the two-way polytope (whose maximum is
        // 4), so the float LP accepts; the exact path sees the same table as
        // a dyadic point off the no-signaling hull and reports a
        // rounding-scale infeasibility instead.
        let p = crate::quantum::born_behavior(
            &crate::quantum::noisy_w(0.928585).unwrap(),
            &crate::reference::appendix_a_settings(),
        )
        .unwrap();
        let two_way = enumerate_two_way_local();
        let float_verdict = membership(&p, &two_way);
        assert!(float_verdict.member);
        assert!(float_verdict.max_residual <= 1e-8);
        let exact_verdict = membership_exact(&p, &two_way);
        assert!(!exact_verdict.member);
        assert!(exact_verdict.max_residual <= 1e-9, "rounding-scale residual");
    }

    #[test]
    fn membership_exact_on_dyadic_queries() {
        let local = enumerate_fully_local();
        let mixed = Behavior::mix(&[
            (0.25, &local.vertices[3]),
            (0.5, &local.vertices[40]),
            (0.25, &local.vertices[63]),
        ])
        .unwrap();
        let verdict = membership_exact(&mixed, &local);
        assert!(verdict.member);
        assert_eq!(verdict.max_residual, 0.0);
        let svet = svetlichny_box();
        let two_way = enumerate_two_way_local();
        assert!(!membership_exact(&svet, &two_way).member);
    }

    #[test]
    fn infeasibility_confirmed_by_grid_oracle() {
        // spot oracle on the bipartite case: the textbook PR box is not a
        // convex combination of any three deterministic boxes on a fine grid
        let pr = pr_box(0).unwrap();
        let det: Vec<PairBehavior> = (0..4u8)
            .flat_map(|sa| (0..4u8).map(move |sb| deterministic_pair(sa, sb)))
            .collect();
        let refs: Vec<&PairBehavior> = det.iter().collect();
        assert!(!pair_in_hull(&pr, &refs));
        let steps = 20usize;
        for i in 0..det.len() {
            for j in (i + 1)..det.len() {
                for k in (j + 1)..det.len() {
                    for wi in 0..=steps {
                        for wj in 0..=(steps - wi) {
                            let w = [
                                wi as f64 / steps as f64,
                                wj as f64 / steps as f64,
                                (steps - wi - wj) as f64 / steps as f64,
                            ];
                            let mut worst = 0.0f64;
                            for e in 0..behavior::PAIR_ENTRIES {
                                let acc = w[0] * det[i].entries()[e]
                                    + w[1] * det[j].entries()[e]
                                    + w[2] * det[k].entries()[e];
                                worst = worst.max((acc - pr.entries()[e]).abs());
                            }
                            assert!(worst > 1e-6, "grid point reconstructed the PR box");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn vertex_export_shape() {
        let local = enumerate_fully_local();
        let json = local.export_json();
        let arr = json.as_array().unwrap();
        assert_eq!(arr.len(), 64);
        assert_eq!(arr[0]["p"].as_array().unwrap().len(), 64);
    }
}
