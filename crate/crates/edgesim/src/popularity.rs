//! Per-client file popularity: MZipf initialization plus the rewatch update.
//!
//! Every client starts from the same MZipf law over the catalog's files
//! (rank 1 = most popular). After each request the client's distribution is
//! reshaped by its rewatch factor `alpha`: the requested file keeps `alpha`
//! of its probability and the released mass is spread over the other files
//! in proportion to their current probabilities. `alpha = 1` leaves the
//! distribution untouched (pure rewatcher), `alpha = 0` removes a requested
//! file from the client's future (never rewatches).

use crate::error::SimError;
use rand::Rng;

/// Parameters of the popularity process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopularityParams {
    /// Catalog size (number of files).
    pub n_files: u32,
    /// Zipf skew exponent; larger means more head-heavy.
    pub gamma: f64,
    /// MZipf plateau factor; larger flattens the head.
    pub q: f64,
    /// Rewatch factor in `[0, 1]`.
    pub alpha: f64,
}

impl PopularityParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_files == 0 {
            return Err(SimError::config("n_files must be at least 1"));
        }
        if !(self.gamma > 0.0) {
            return Err(SimError::config(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.q >= 0.0) {
            return Err(SimError::config(format!(
                "q must be non-negative, got {}",
                self.q
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(SimError::config(format!(
                "alpha must be in [0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// A probability distribution over file ranks `1..=n_files`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityDistribution {
    probs: Vec<f64>,
}

impl PopularityDistribution {
    /// MZipf initial distribution: `P(rank i) ∝ (i + q)^-gamma`.
    pub fn mzipf(params: &PopularityParams) -> Result<Self, SimError> {
        params.validate()?;
        let weights: Vec<f64> = (1..=params.n_files)
            .map(|i| (i as f64 + params.q).powf(-params.gamma))
            .collect();
        let total: f64 = weights.iter().sum();
        Ok(Self {
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    /// Number of files the distribution ranges over.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of the file at `rank` (1-based).
    pub fn prob(&self, rank: u32) -> f64 {
        self.probs[(rank - 1) as usize]
    }

    /// All probabilities, index 0 holding rank 1.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Rewatch update after a request for `requested` (1-based rank).
    ///
    /// The requested file keeps `alpha` of its probability; every other file
    /// picks up a share of the released mass proportional to its own
    /// probability, which works out to the closed-form scale factor
    /// `(1 - alpha * p_req) / (1 - p_req)`. The result is renormalized to
    /// stop floating-point drift over long request sequences.
    ///
    /// If the requested file holds the entire mass and `alpha < 1` the scale
    /// factor is undefined; the released mass then has no proportions to
    /// follow and is spread uniformly over the other files.
    pub fn apply_rewatch_update(&mut self, requested: u32, params: &PopularityParams) {
        assert!(
            (1..=self.probs.len() as u32).contains(&requested),
            "requested rank {requested} out of range 1..={}",
            self.probs.len()
        );
        let alpha = params.alpha;
        if alpha == 1.0 || self.probs.len() == 1 {
            return; // identity: requested keeps all of its probability
        }
        let j = (requested - 1) as usize;
        let p_req = self.probs[j];
        let remainder = 1.0 - p_req;
        if remainder <= 1e-12 {
            // Degenerate: the requested file held everything. Uniform spread.
            let share = (1.0 - alpha) / (self.probs.len() - 1) as f64;
            for p in &mut self.probs {
                *p = share;
            }
            self.probs[j] = alpha;
            return;
        }
        let scale = (1.0 - alpha * p_req) / remainder;
        for p in &mut self.probs {
            *p *= scale;
        }
        self.probs[j] = alpha * p_req;
        let total: f64 = self.probs.iter().sum();
        for p in &mut self.probs {
            *p /= total;
        }
    }

    /// Draw a file rank by inverse-CDF sampling with a single uniform draw.
    pub fn sample_file<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last_positive = 1;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                last_positive = i as u32 + 1;
                acc += p;
                if u < acc {
                    return i as u32 + 1;
                }
            }
        }
        // Rounding can leave acc marginally below 1; fall back to the last
        // file that had any probability.
        last_positive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn params(n_files: u32, gamma: f64, q: f64, alpha: f64) -> PopularityParams {
        PopularityParams {
            n_files,
            gamma,
            q,
            alpha,
        }
    }

    fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
        assert!(
            (actual - expected).abs() <= tol,
            "{what}: expected {expected}, got {actual}"
        );
    }

    #[test]
    fn mzipf_small_case_exact() {
        // n=3, q=0, gamma=1: weights 1, 1/2, 1/3 normalize to 6/11, 3/11, 2/11.
        let d = PopularityDistribution::mzipf(&params(3, 1.0, 0.0, 0.5)).unwrap();
        assert_close(d.prob(1), 6.0 / 11.0, 1e-12, "rank 1");
        assert_close(d.prob(2), 3.0 / 11.0, 1e-12, "rank 2");
        assert_close(d.prob(3), 2.0 / 11.0, 1e-12, "rank 3");
    }

    #[test]
    fn mzipf_sums_to_one_and_is_monotone() {
        let d = PopularityDistribution::mzipf(&params(100, 2.5, 10.0, 0.5)).unwrap();
        let total: f64 = d.probs().iter().sum();
        assert_close(total, 1.0, 1e-12, "total mass");
        for w in d.probs().windows(2) {
            assert!(w[0] >= w[1], "probabilities must not increase with rank");
        }
    }

    #[test]
    fn mzipf_default_top_20_mass() {
        // With the default catalog shape the 20 most popular files carry
        // roughly 80% of the request probability.
        let d = PopularityDistribution::mzipf(&params(100, 2.5, 10.0, 0.5)).unwrap();
        let top20: f64 = d.probs()[..20].iter().sum();
        assert!(
            (top20 - 0.80).abs() <= 0.03,
            "top-20 mass {top20} outside 0.80 +/- 0.03"
        );
    }

    #[test]
    fn rewatch_update_two_file_case() {
        let p = params(2, 1.0, 0.0, 0.5);
        let mut d = PopularityDistribution {
            probs: vec![0.6, 0.4],
        };
        d.apply_rewatch_update(1, &p);
        assert_close(d.prob(1), 0.3, 1e-12, "requested keeps alpha share");
        assert_close(d.prob(2), 0.7, 1e-12, "other absorbs released mass");
    }

    #[test]
    fn rewatch_alpha_one_is_identity() {
        let p = params(5, 2.0, 3.0, 1.0);
        let before = PopularityDistribution::mzipf(&p).unwrap();
        let mut after = before.clone();
        after.apply_rewatch_update(2, &p);
        for (a, b) in after.probs().iter().zip(before.probs()) {
            assert!((a - b).abs() <= 1e-15, "alpha=1 must not move probability");
        }
    }

    #[test]
    fn rewatch_alpha_zero_removes_requested() {
        let p = params(4, 1.5, 1.0, 0.0);
        let mut d = PopularityDistribution::mzipf(&p).unwrap();
        d.apply_rewatch_update(3, &p);
        assert_eq!(d.prob(3), 0.0, "alpha=0 must zero the requested file");
        let total: f64 = d.probs().iter().sum();
        assert_close(total, 1.0, 1e-12, "total mass after removal");
    }

    #[test]
    fn rewatch_preserves_proportions_of_others() {
        // The non-requested files must keep their mutual proportions: the
        // update multiplies them all by one common scale factor.
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(2..30u32);
            let alpha = rng.gen_range(0.0..=1.0);
            let p = params(n, rng.gen_range(0.5..3.0), rng.gen_range(0.0..20.0), alpha);
            let mut d = PopularityDistribution::mzipf(&p).unwrap();
            // Randomize the state with a few updates first.
            for _ in 0..5 {
                let req = rng.gen_range(1..=n);
                d.apply_rewatch_update(req, &p);
            }
            let req = rng.gen_range(1..=n);
            let before = d.clone();
            d.apply_rewatch_update(req, &p);
            let total: f64 = d.probs().iter().sum();
            assert_close(total, 1.0, 1e-12, "mass after update");
            let mut ratio: Option<f64> = None;
            for rank in 1..=n {
                if rank == req || before.prob(rank) < 1e-12 {
                    continue;
                }
                let r = d.prob(rank) / before.prob(rank);
                if let Some(r0) = ratio {
                    assert!(
                        (r - r0).abs() <= 1e-9,
                        "others must share one scale factor: {r} vs {r0}"
                    );
                } else {
                    ratio = Some(r);
                }
            }
        }
    }

    #[test]
    fn rewatch_degenerate_full_mass_spreads_uniformly() {
        let p = params(4, 1.0, 0.0, 0.3);
        let mut d = PopularityDistribution {
            probs: vec![0.0, 1.0, 0.0, 0.0],
        };
        d.apply_rewatch_update(2, &p);
        assert_close(d.prob(2), 0.3, 1e-12, "requested keeps alpha");
        for rank in [1, 3, 4] {
            assert_close(d.prob(rank), 0.7 / 3.0, 1e-12, "uniform share");
        }
    }

    #[test]
    fn single_file_catalog_is_stable() {
        let p = params(1, 1.0, 0.0, 0.0);
        let mut d = PopularityDistribution::mzipf(&p).unwrap();
        d.apply_rewatch_update(1, &p);
        assert_eq!(d.probs(), &[1.0], "only file must keep all mass");
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert_eq!(d.sample_file(&mut rng), 1);
    }

    #[test]
    fn sample_follows_probabilities() {
        let d = PopularityDistribution {
            probs: vec![0.9, 0.1],
        };
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let draws = 100_000;
        let ones = (0..draws)
            .filter(|_| d.sample_file(&mut rng) == 1)
            .count();
        let freq = ones as f64 / draws as f64;
        assert!(
            (0.89..=0.91).contains(&freq),
            "rank-1 frequency {freq} outside [0.89, 0.91]"
        );
    }

    #[test]
    fn sample_skips_zero_probability_files() {
        let d = PopularityDistribution {
            probs: vec![0.0, 1.0, 0.0],
        };
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(d.sample_file(&mut rng), 2);
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(PopularityDistribution::mzipf(&params(0, 2.5, 10.0, 0.5)).is_err());
        assert!(PopularityDistribution::mzipf(&params(10, 0.0, 10.0, 0.5)).is_err());
        assert!(PopularityDistribution::mzipf(&params(10, -1.0, 10.0, 0.5)).is_err());
        assert!(PopularityDistribution::mzipf(&params(10, 2.5, -0.1, 0.5)).is_err());
        assert!(PopularityDistribution::mzipf(&params(10, 2.5, 10.0, 1.2)).is_err());
        assert!(PopularityDistribution::mzipf(&params(10, 2.5, 10.0, -0.2)).is_err());
    }
}
