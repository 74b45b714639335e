//! Training-set engineering: tune an MA prior so its `K = D` mean purity sits
//! at the lower purity bound, sample it with `K ≥ D`, and keep only the states
//! inside a simultaneous purity/concurrence band.

use log::debug;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::{ma_mean_purity, sample_ma};
use crate::error::{Error, Result};
use crate::qcore::{concurrence, purity, DensityMatrix};
use crate::scalar::Real;

/// Survival rate below which a band is declared infeasible.
pub const MIN_SURVIVAL_RATE: f64 = 1e-4;

/// Smallest probe batch drawn before the survival rate is estimated.
pub const MIN_PROBE_BATCH: usize = 10_000;

/// Closed purity and concurrence intervals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandpassSpec {
    pub p_min: f64,
    pub p_max: f64,
    pub c_min: f64,
    pub c_max: f64,
}

impl BandpassSpec {
    pub fn new(p_min: f64, p_max: f64, c_min: f64, c_max: f64) -> Self {
        Self { p_min, p_max, c_min, c_max }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let floor = 1.0 / dim as f64;
        if !(self.p_min >= floor - 1e-12 && self.p_min <= self.p_max && self.p_max <= 1.0) {
            return Err(Error::Config(format!(
                "purity band [{}, {}] must satisfy 1/D ≤ p_min ≤ p_max ≤ 1",
                self.p_min, self.p_max
            )));
        }
        if !(self.c_min >= 0.0 && self.c_min <= self.c_max && self.c_max <= 1.0) {
            return Err(Error::Config(format!(
                "concurrence band [{}, {}] must satisfy 0 ≤ c_min ≤ c_max ≤ 1",
                self.c_min, self.c_max
            )));
        }
        Ok(())
    }

    /// Both interval tests, endpoints included.
    pub fn admits(&self, purity: f64, concurrence: f64) -> bool {
        self.p_min <= purity
            && purity <= self.p_max
            && self.c_min <= concurrence
            && concurrence <= self.c_max
    }
}

/// MA concentration whose `K = D` mean purity equals `p_min`:
/// `α = D(1 - P) / (D(D·P - 1) - D + 1)`.
pub fn alpha_for_min_purity(p_min: f64, dim: usize) -> Result<f64> {
    let d = dim as f64;
    let lower = (2.0 * d - 1.0) / (d * d);
    if !(p_min > lower && p_min < 1.0) {
        return Err(Error::OutOfDomain(format!(
            "minimum purity {p_min} must lie in ((2D-1)/D², 1) = ({lower}, 1) for D = {dim}"
        )));
    }
    Ok(d * (1.0 - p_min) / (d * (d * p_min - 1.0) - d + 1.0))
}

/// States that pass the band, in their original order.
pub fn bandpass<T: Real>(
    states: &[DensityMatrix<T>],
    spec: &BandpassSpec,
) -> Result<Vec<DensityMatrix<T>>> {
    let mut out = Vec::new();
    for rho in states {
        if passes(rho, spec)? {
            out.push(rho.clone());
        }
    }
    Ok(out)
}

fn passes<T: Real>(rho: &DensityMatrix<T>, spec: &BandpassSpec) -> Result<bool> {
    let c = concurrence(rho)?.to_f64();
    Ok(spec.admits(purity(rho).to_f64(), c))
}

/// Engineered-distribution generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Engineer {
    pub band: BandpassSpec,
    /// Number of pure states in each MA mixture; at least `D`.
    pub k: usize,
    /// Replaces the α derived from `band.p_min`.
    #[serde(default)]
    pub alpha_override: Option<f64>,
}

impl Engineer {
    pub const DIM: usize = 4;

    pub fn new(band: BandpassSpec, k: usize) -> Self {
        Self { band, k, alpha_override: None }
    }

    /// The MA concentration used for sampling.
    pub fn alpha(&self) -> Result<f64> {
        match self.alpha_override {
            Some(a) if a > 0.0 && a.is_finite() => Ok(a),
            Some(a) => Err(Error::Config(format!("α override must be positive, got {a}"))),
            None => alpha_for_min_purity(self.band.p_min, Self::DIM).map_err(|e| {
                Error::Infeasible(format!("cannot tune the MA prior to the band: {e}"))
            }),
        }
    }

    /// Exactly `n_target` in-band two-qubit states.
    ///
    /// A probe batch of `max(2n, 10⁴)` estimates the survival rate; later
    /// rounds draw `ceil(remaining / rate · 1.2)`.
    pub fn generate<T: Real, R: Rng + ?Sized>(
        &self,
        n_target: usize,
        rng: &mut R,
    ) -> Result<Vec<DensityMatrix<T>>> {
        self.band.validate(Self::DIM)?;
        if self.k < Self::DIM {
            return Err(Error::Config(format!("K = {} must be at least D = {}", self.k, Self::DIM)));
        }
        let alpha = T::lit(self.alpha()?);
        let mut kept = Vec::with_capacity(n_target);
        let mut drawn = 0usize;
        let mut total_survivors = 0usize;
        let mut batch = (2 * n_target).max(MIN_PROBE_BATCH);
        while kept.len() < n_target {
            let mut survivors = 0usize;
            for _ in 0..batch {
                let rho = sample_ma(alpha, self.k, Self::DIM, rng);
                if passes(&rho, &self.band)? {
                    survivors += 1;
                    if kept.len() < n_target {
                        kept.push(rho);
                    }
                }
            }
            drawn += batch;
            total_survivors += survivors;
            let rate = total_survivors as f64 / drawn as f64;
            debug!("bandpass round: {survivors}/{batch} survived, {} kept", kept.len());
            if rate < MIN_SURVIVAL_RATE {
                return Err(Error::Infeasible(format!(
                    "survival rate {rate:.2e} below {MIN_SURVIVAL_RATE:e} after {drawn} draws"
                )));
            }
            let remaining = n_target.saturating_sub(kept.len());
            batch = ((remaining as f64 / rate) * 1.2).ceil().max(1.0) as usize;
        }
        Ok(kept)
    }
}

/// Free-function form of [`Engineer::generate`] with the derived α.
pub fn engineer_training_set<T: Real, R: Rng + ?Sized>(
    spec: &BandpassSpec,
    k: usize,
    n_target: usize,
    rng: &mut R,
) -> Result<Vec<DensityMatrix<T>>> {
    Engineer::new(*spec, k).generate(n_target, rng)
}

/// Mean purity the tuned prior would have at `K = D`; equals `p_min`.
pub fn tuned_mean_purity(p_min: f64, dim: usize) -> Result<f64> {
    Ok(ma_mean_purity(alpha_for_min_purity(p_min, dim)?, dim, dim))
}
