//! Derivative-free maximization of witness values over measurement settings,
//! threshold-visibility computation, and CHSH maximization for a fixed
//! observable pair. Restarts are independent given per-restart seed streams
//! and merge by maximum, so parallel execution stays deterministic.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use serde::{Deserialize, Serialize};

use crate::par;
use crate::quantum::{BlochObservable, DensityMatrix, MeasurementSettings, Party};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub shrink_tolerance: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iterations: 2000,
            shrink_tolerance: 1e-10,
            seed: 42,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be >= 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        if self.shrink_tolerance <= 0.0 {
            return Err(Error::InvalidParameter(
                "shrink_tolerance must be > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Mermin,
    Svetlichny,
    ChshPair,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best_value: f64,
    pub best_settings: MeasurementSettings,
    /// Best value found by each restart, in restart order.
    pub trace: Vec<f64>,
}

/// 12 spherical angles (3 parties × 2 settings × (θ, φ)) → settings.
pub fn settings_from_params(params: &[f64]) -> MeasurementSettings {
    let obs = |i: usize| BlochObservable::from_angles(params[2 * i], params[2 * i + 1]);
    MeasurementSettings::new(
        [obs(0), obs(1)],
        [obs(2), obs(3)],
        [obs(4), obs(5)],
    )
}

fn objective_value(rho: &DensityMatrix, objective: Objective, s: &MeasurementSettings) -> f64 {
    let e = |x: usize, y: usize, z: usize| {
        crate::quantum::correlator_expectation(
            rho,
            s.observable(Party::A, x),
            s.observable(Party::B, y),
            s.observable(Party::C, z),
        )
    };
    match objective {
        Objective::Mermin => (e(0, 0, 1) + e(0, 1, 0) + e(1, 0, 0) - e(1, 1, 1)).abs(),
        Objective::Svetlichny => {
            let mut acc = 0.0;
            for x in 0..2usize {
                for y in 0..2usize {
                    for z in 0..2usize {
                        let sign = if ((x & y) ^ (y & z) ^ (z & x)) == 0 {
                            1.0
                        } else {
                            -1.0
                        };
                        acc += sign * e(x, y, z);
                    }
                }
            }
            acc.abs()
        }
        Objective::ChshPair => {
            let rho_bc = rho.reduce(&[1, 2]).expect("three-qubit state");
            let pair = |j: usize, k: usize| {
                let op = s
                    .observable(Party::B, j)
                    .matrix()
                    .kron(&s.observable(Party::C, k).matrix());
                rho_bc.trace_product_re(&op).expect("dim 4")
            };
            (pair(1, 1) + pair(1, 0) + pair(0, 1) - pair(0, 0)).abs()
        }
    }
}

/// Standard Nelder–Mead descent (reflection 1, expansion 2, contraction ½,
/// shrink ½). Returns the best point and value found.
fn nelder_mead(
    f: &(impl Fn(&[f64]) -> f64 + ?Sized),
    x0: &[f64],
    max_iterations: usize,
    shrink_tolerance: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let step = 0.6;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        let fp = f(&p);
        simplex.push((p, fp));
    }

    for _ in 0..max_iterations {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let spread = simplex[n].1 - simplex[0].1;
        let extent = (0..n)
            .map(|d| {
                simplex
                    .iter()
                    .map(|(p, _)| (p[d] - simplex[0].0[d]).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if spread.abs() <= shrink_tolerance && extent <= shrink_tolerance.sqrt() {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|(p, _)| p[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> = (0..n)
            .map(|d| centroid[d] + (centroid[d] - worst.0[d]))
            .collect();
        let fr = f(&reflect);

        if fr < simplex[0].1 {
            let expand: Vec<f64> = (0..n)
                .map(|d| centroid[d] + 2.0 * (centroid[d] - worst.0[d]))
                .collect();
            let fe = f(&expand);
            simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            let contract: Vec<f64> = if fr < worst.1 {
                (0..n)
                    .map(|d| centroid[d] + 0.5 * (reflect[d] - centroid[d]))
                    .collect()
            } else {
                (0..n)
                    .map(|d| centroid[d] + 0.5 * (worst.0[d] - centroid[d]))
                    .collect()
            };
            let fc = f(&contract);
            if fc < fr.min(worst.1) {
                simplex[n] = (contract, fc);
            } else {
                // shrink toward the best point
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = (0..n)
                        .map(|d| best[d] + 0.5 * (entry.0[d] - best[d]))
                        .collect();
                    let fp = f(&p);
                    *entry = (p, fp);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex[0].clone()
}

fn restart_seed(base: u64, restart: usize) -> u64 {
    base.wrapping_add((restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Multi-restart maximization of a witness over measurement settings.
/// Deterministic given the config seed; the restart merge is an associative
/// maximum with index tie-break.
pub fn maximize_witness(
    rho: &DensityMatrix,
    objective: Objective,
    cfg: &SearchConfig,
) -> Result<SearchResult> {
    cfg.validate()?;
    if rho.dim() != 8 {
        return Err(Error::DimensionMismatch(
            "witness search expects a three-qubit state".into(),
        ));
    }
    let results = par::map_indices(cfg.restarts, |restart| {
        let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(cfg.seed, restart));
        let x0: Vec<f64> = (0..12)
            .map(|i| {
                if i % 2 == 0 {
                    rng.gen_range(0.0..std::f64::consts::PI)
                } else {
                    rng.gen_range(0.0..2.0 * std::f64::consts::PI)
                }
            })
            .collect();
        let f = |params: &[f64]| -> f64 {
            -objective_value(rho, objective, &settings_from_params(params))
        };
        let (x, fx) = nelder_mead(&f, &x0, cfg.max_iterations, cfg.shrink_tolerance);
        (-fx, x)
    });
    let trace: Vec<f64> = results.iter().map(|(v, _)| *v).collect();
    let (best_value, best_params) = results
        .into_iter()
        .reduce(|best, cur| if cur.0 > best.0 { cur } else { best })
        .expect("at least one restart");
    Ok(SearchResult {
        best_value,
        best_settings: settings_from_params(&best_params),
        trace,
    })
}

/// Visibility v* = target / max-witness(pure state), using the linearity of
/// full correlators under white-noise mixing.
pub fn threshold_visibility(pure: &DensityMatrix, target: f64, cfg: &SearchConfig) -> Result<f64> {
    let result = maximize_witness(pure, Objective::Mermin, cfg)?;
    if result.best_value <= 0.0 {
        return Err(Error::Search(format!(
            "optimizer returned non-positive maximum {}",
            result.best_value
        )));
    }
    Ok(target / result.best_value)
}

/// Maximum of the canonical CHSH combination over the shared two-qubit state
/// and the first side's two observables, with the second side's observables
/// fixed at the given pair.
pub fn chsh_max_given_pair(
    b0: &BlochObservable,
    b1: &BlochObservable,
    cfg: &SearchConfig,
) -> Result<f64> {
    cfg.validate()?;
    let fixed = [b0.matrix(), b1.matrix()];
    // parameters: 8 reals for the shared pure state, 4 angles for side A
    let eval = |params: &[f64]| -> f64 {
        let mut amp = [Complex64::new(0.0, 0.0); 4];
        let mut norm_sq = 0.0;
        for i in 0..4 {
            amp[i] = Complex64::new(params[2 * i], params[2 * i + 1]);
            norm_sq += amp[i].norm_sqr();
        }
        if norm_sq < 1e-12 {
            return 0.0;
        }
        let scale = norm_sq.sqrt();
        for a in amp.iter_mut() {
            *a /= Complex64::new(scale, 0.0);
        }
        let a_obs = [
            BlochObservable::from_angles(params[8], params[9]).matrix(),
            BlochObservable::from_angles(params[10], params[11]).matrix(),
        ];
        let expect = |i: usize, j: usize| -> f64 {
            let op = a_obs[i].kron(&fixed[j]);
            let av = op.apply(&amp);
            amp.iter()
                .zip(&av)
                .map(|(x, y)| (x.conj() * y).re)
                .sum::<f64>()
        };
        expect(1, 1) + expect(1, 0) + expect(0, 1) - expect(0, 0)
    };

    let results = par::map_indices(cfg.restarts, |restart| {
        let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(cfg.seed, restart));
        let x0: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = |params: &[f64]| -> f64 { -eval(params) };
        let (_, fx) = nelder_mead(&f, &x0, cfg.max_iterations, cfg.shrink_tolerance);
        -fx
    });
    Ok(results.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{born_behavior, ghz_state, noisy_w, w_state};
    use crate::witness::{mermin_value, TSIRELSON};

    fn light_cfg(restarts: usize) -> SearchConfig {
        SearchConfig {
            restarts,
            max_iterations: 800,
            shrink_tolerance: 1e-10,
            seed: 42,
        }
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig {
            restarts: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SearchConfig {
            shrink_tolerance: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn ghz_mermin_maximum() {
        let result = maximize_witness(&ghz_state(), Objective::Mermin, &light_cfg(16)).unwrap();
        assert!(
            (result.best_value - 4.0).abs() <= 1e-4,
            "got {}",
            result.best_value
        );
    }

    #[test]
    fn noisy_w_reaches_tsirelson_value() {
        let rho = noisy_w(0.928585).unwrap();
        let result = maximize_witness(&rho, Objective::Mermin, &light_cfg(24)).unwrap();
        assert!(
            (result.best_value - TSIRELSON).abs() <= 1e-3,
            "got {}",
            result.best_value
        );
    }

    #[test]
    fn product_state_stays_local() {
        let mut v = [Complex64::new(0.0, 0.0); 8];
        v[0] = Complex64::new(1.0, 0.0);
        let rho = DensityMatrix::from_pure(&v, "|000>").unwrap();
        let result = maximize_witness(&rho, Objective::Mermin, &light_cfg(16)).unwrap();
        assert!(result.best_value <= 2.0 + 1e-6, "got {}", result.best_value);
    }

    #[test]
    fn best_value_matches_fresh_born_evaluation() {
        let rho = noisy_w(0.9).unwrap();
        let result = maximize_witness(&rho, Objective::Mermin, &light_cfg(8)).unwrap();
        let p = born_behavior(&rho, &result.best_settings).unwrap();
        assert!((mermin_value(&p) - result.best_value).abs() <= 1e-9);
    }

    #[test]
    fn restarts_are_monotone_under_shared_seed_stream() {
        let rho = noisy_w(0.8).unwrap();
        let one = maximize_witness(&rho, Objective::Mermin, &light_cfg(1)).unwrap();
        let many = maximize_witness(&rho, Objective::Mermin, &light_cfg(8)).unwrap();
        assert!(many.best_value >= one.best_value - 1e-12);
        assert_eq!(many.trace.len(), 8);
        assert!((many.trace[0] - one.best_value).abs() <= 1e-12);
    }

    #[test]
    fn ghz_svetlichny_maximum() {
        let result =
            maximize_witness(&ghz_state(), Objective::Svetlichny, &light_cfg(16)).unwrap();
        assert!(
            (result.best_value - 4.0 * std::f64::consts::SQRT_2).abs() <= 1e-3,
            "got {}",
            result.best_value
        );
    }

    #[test]
    fn chsh_pair_objective_reaches_tsirelson_on_singlet_branch() {
        // biseparable |0⟩ ⊗ singlet: the BC pair can reach 2√2
        let zero = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let rho = crate::quantum::biseparable_state(
            crate::quantum::Bipartition::A,
            &zero,
            &crate::quantum::bell_state(crate::quantum::BellState::PsiMinus),
        )
        .unwrap();
        let result = maximize_witness(&rho, Objective::ChshPair, &light_cfg(16)).unwrap();
        assert!(
            (result.best_value - TSIRELSON).abs() <= 1e-3,
            "got {}",
            result.best_value
        );
    }

    #[test]
    fn visibility_examples() {
        let ghz = ghz_state();
        let v = threshold_visibility(&ghz, TSIRELSON, &light_cfg(16)).unwrap();
        assert!((v - TSIRELSON / 4.0).abs() <= 1e-3, "got {v}");
        let zero = threshold_visibility(&ghz, 0.0, &light_cfg(4)).unwrap();
        assert_eq!(zero, 0.0);
        let w = threshold_visibility(&w_state(), TSIRELSON, &light_cfg(24)).unwrap();
        assert!((w - 0.928585).abs() <= 1e-3, "got {w}");
    }

    #[test]
    fn chsh_pair_commuting_and_orthogonal() {
        let z = BlochObservable::new([0.0, 0.0, 1.0]).unwrap();
        let x = BlochObservable::new([1.0, 0.0, 0.0]).unwrap();
        let commuting = chsh_max_given_pair(&z, &z, &light_cfg(8)).unwrap();
        assert!(commuting <= 2.0 + 1e-6, "got {commuting}");
        let orthogonal = chsh_max_given_pair(&z, &x, &light_cfg(24)).unwrap();
        assert!(
            (orthogonal - TSIRELSON).abs() <= 1e-3,
            "got {orthogonal}"
        );
        let tilted = BlochObservable::new([0.1f64.sin(), 0.0, 0.1f64.cos()]).unwrap();
        let slight = chsh_max_given_pair(&z, &tilted, &light_cfg(16)).unwrap();
        assert!(slight > 2.0 + 1e-4, "got {slight}");
    }
}
