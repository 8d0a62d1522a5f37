//! Entanglement and population observables, ensemble accumulation, and
//! bootstrap uncertainty bands.
//!
//! Ensemble-level quantities are evaluated on the averaged density matrix
//! (negativity and purity are nonlinear, so averaging per-trajectory values
//! would measure something else); uncertainty bands come from bootstrap
//! resampling of batch-averaged density matrices.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, partial_transpose, Bipartition, CMatrix, CVector, DensityMatrix,
    Subsystem, C64,
};
use crate::model::ProductState;
use crate::rng::CounterRng;

/// Negativity of the partial transpose: `max(0, -lambda_min(rho^T_B))`, the
/// magnitude of the smallest negative eigenvalue.
///
/// Zero for every separable two-qubit state (positivity of the partial
/// transpose is exact at 2x2), where at most one eigenvalue can be negative —
/// asserted here, so the smallest-eigenvalue and sum-of-negatives conventions
/// coincide.
pub fn negativity(rho: &DensityMatrix, dims: Bipartition) -> Result<f64> {
    if rho.dim() != dims.total() {
        return Err(Error::DimensionMismatch {
            context: "negativity",
            expected: dims.total(),
            found: rho.dim(),
        });
    }
    let pt = partial_transpose(rho.matrix(), dims, Subsystem::B)?;
    let eigs = hermitian_eigenvalues(&pt)?;
    if dims.dim_a == 2 && dims.dim_b == 2 {
        let negatives = eigs.iter().filter(|&&x| x < -1e-12).count();
        assert!(
            negatives <= 1,
            "a two-qubit partial transpose has at most one negative eigenvalue"
        );
    }
    Ok((-eigs.first().copied().unwrap_or(0.0)).max(0.0))
}

/// Occupation probability `<target| rho |target>` of a normalized pure state,
/// clamped to `[0, 1]`.
pub fn population(rho: &DensityMatrix, target: &CVector) -> Result<f64> {
    let dev = (target.norm() - 1.0).abs();
    if dev > 1e-10 {
        return Err(Error::InvalidState {
            norm_deviation: dev,
        });
    }
    if rho.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            context: "population",
            expected: rho.dim(),
            found: target.dim(),
        });
    }
    Ok(rho.matrix().quadratic_form(target).re.clamp(0.0, 1.0))
}

/// `tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().matmul(rho.matrix()).trace().re
}

/// A sampled observable with a one-standard-deviation uncertainty band.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
    pub label: String,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, mean: Vec<f64>, stddev: Vec<f64>, label: String) -> Result<Self> {
        if times.len() != mean.len() || times.len() != stddev.len() {
            return Err(Error::DimensionMismatch {
                context: "time series",
                expected: times.len(),
                found: mean.len(),
            });
        }
        if stddev.iter().any(|&s| s < 0.0 || !s.is_finite()) {
            return Err(Error::NonFinite {
                context: "time series stddev",
            });
        }
        Ok(Self {
            times,
            mean,
            stddev,
            label,
        })
    }

    /// Series with an identically zero band (deterministic or closed-form
    /// data).
    pub fn exact(times: Vec<f64>, mean: Vec<f64>, label: String) -> Result<Self> {
        let n = times.len();
        Self::new(times, mean, vec![0.0; n], label)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Running per-batch sums of trajectory density matrices on a fixed time
/// grid. Trajectories are assigned to batches by index (`batch = idx /
/// batch_size`), aborted trajectories are counted and excluded, and merging
/// two accumulators adds their sums, so reduction is associative.
#[derive(Debug, Clone)]
pub struct EnsembleAccumulator {
    times: Vec<f64>,
    dim: usize,
    batch_size: usize,
    sums: Vec<Vec<CMatrix>>,
    valid: Vec<usize>,
    aborted: usize,
}

impl EnsembleAccumulator {
    pub fn new(times: Vec<f64>, dim: usize, batches: usize, batch_size: usize) -> Result<Self> {
        if batches == 0 || batch_size == 0 {
            return Err(Error::InvalidConfig {
                detail: "batches and batch size must be positive",
            });
        }
        let sums = (0..batches)
            .map(|_| (0..times.len()).map(|_| CMatrix::zeros(dim, dim)).collect())
            .collect();
        Ok(Self {
            times,
            dim,
            batch_size,
            sums,
            valid: vec![0; batches],
            aborted: 0,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn batches(&self) -> usize {
        self.sums.len()
    }

    pub fn total_valid(&self) -> usize {
        self.valid.iter().sum()
    }

    pub fn aborted(&self) -> usize {
        self.aborted
    }

    pub fn abort_fraction(&self) -> f64 {
        let total = self.total_valid() + self.aborted;
        if total == 0 {
            0.0
        } else {
            self.aborted as f64 / total as f64
        }
    }

    fn batch_of(&self, traj_idx: usize) -> usize {
        (traj_idx / self.batch_size).min(self.sums.len() - 1)
    }

    /// Accumulate one unrestricted trajectory recorded as pure states on the
    /// grid.
    pub fn add_pure_states(&mut self, traj_idx: usize, states: &[CVector]) -> Result<()> {
        if states.len() != self.times.len() {
            return Err(Error::DimensionMismatch {
                context: "accumulator grid",
                expected: self.times.len(),
                found: states.len(),
            });
        }
        let b = self.batch_of(traj_idx);
        for (t, psi) in states.iter().enumerate() {
            self.sums[b][t] = self.sums[b][t].add(&psi.outer(psi));
        }
        self.valid[b] += 1;
        Ok(())
    }

    /// Accumulate one restricted trajectory; the composite density is an
    /// exact product-state projector at every grid time.
    pub fn add_product_states(&mut self, traj_idx: usize, states: &[ProductState]) -> Result<()> {
        if states.len() != self.times.len() {
            return Err(Error::DimensionMismatch {
                context: "accumulator grid",
                expected: self.times.len(),
                found: states.len(),
            });
        }
        let b = self.batch_of(traj_idx);
        for (t, s) in states.iter().enumerate() {
            let psi = s.composite();
            self.sums[b][t] = self.sums[b][t].add(&psi.outer(&psi));
        }
        self.valid[b] += 1;
        Ok(())
    }

    pub fn record_aborted(&mut self) {
        self.aborted += 1;
    }

    /// Fold another accumulator over the same grid into this one.
    pub fn merge(&mut self, other: &EnsembleAccumulator) -> Result<()> {
        if other.times != self.times || other.sums.len() != self.sums.len() {
            return Err(Error::GridMismatch);
        }
        for (b, batch) in other.sums.iter().enumerate() {
            for (t, m) in batch.iter().enumerate() {
                self.sums[b][t] = self.sums[b][t].add(m);
            }
            self.valid[b] += other.valid[b];
        }
        self.aborted += other.aborted;
        Ok(())
    }

    /// Ensemble-averaged density matrix at one grid time, validated.
    pub fn mean(&self, t_idx: usize) -> Result<DensityMatrix> {
        let total = self.total_valid();
        if total == 0 {
            return Err(Error::InvalidConfig {
                detail: "no valid trajectories accumulated",
            });
        }
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for batch in &self.sums {
            acc = acc.add(&batch[t_idx]);
        }
        DensityMatrix::new(acc.scale(C64::new(1.0 / total as f64, 0.0)))
    }

    /// Observable of the ensemble average with a bootstrap band: the band is
    /// the standard deviation of the observable across `resamples` resampled
    /// batch combinations (batches drawn with replacement, weighted by their
    /// accepted-trajectory counts). Deterministic for a fixed seed.
    pub fn observable_series<F>(
        &self,
        f: F,
        resamples: usize,
        seed: u64,
        label: &str,
    ) -> Result<TimeSeries>
    where
        F: Fn(&DensityMatrix) -> Result<f64>,
    {
        let n_batches = self.batches();
        let populated = self.valid.iter().filter(|&&v| v > 0).count();
        if populated < 2 {
            return Err(Error::TooFewBatches { found: populated });
        }
        let n_times = self.times.len();
        let mut mean = Vec::with_capacity(n_times);
        for t in 0..n_times {
            mean.push(f(&self.mean(t)?)?);
        }

        // One index set per resample, shared across the grid, so each
        // resample is a coherent pseudo-ensemble.
        let mut rng = CounterRng::new(seed, 0);
        let mut index_sets = Vec::with_capacity(resamples);
        for _ in 0..resamples {
            let set: Vec<usize> = (0..n_batches)
                .map(|_| ((rng.next_f64() * n_batches as f64) as usize).min(n_batches - 1))
                .collect();
            index_sets.push(set);
        }

        let mut stddev = Vec::with_capacity(n_times);
        for t in 0..n_times {
            let mut values = Vec::with_capacity(resamples);
            for set in &index_sets {
                let mut acc = CMatrix::zeros(self.dim, self.dim);
                let mut count = 0usize;
                for &b in set {
                    acc = acc.add(&self.sums[b][t]);
                    count += self.valid[b];
                }
                if count == 0 {
                    continue;
                }
                let rho = DensityMatrix::new(acc.scale(C64::new(1.0 / count as f64, 0.0)))?;
                values.push(f(&rho)?);
            }
            stddev.push(sample_stddev(&values));
        }

        TimeSeries::new(self.times.clone(), mean, stddev, String::from(label))
    }
}

/// Bootstrap band for scalar per-batch observables.
///
/// `samples_per_time[t]` holds one value per batch; the mean is the plain
/// batch average, the band the standard deviation across `resamples`
/// resampled batch means. At least two batches are required.
pub fn bootstrap_band(
    times: &[f64],
    samples_per_time: &[Vec<f64>],
    resamples: usize,
    seed: u64,
    label: &str,
) -> Result<TimeSeries> {
    if samples_per_time.len() != times.len() {
        return Err(Error::GridMismatch);
    }
    let n_batches = samples_per_time.first().map(|v| v.len()).unwrap_or(0);
    if n_batches < 2 {
        return Err(Error::TooFewBatches { found: n_batches });
    }
    if samples_per_time.iter().any(|v| v.len() != n_batches) {
        return Err(Error::GridMismatch);
    }

    let mut rng = CounterRng::new(seed, 0);
    let mut index_sets = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let set: Vec<usize> = (0..n_batches)
            .map(|_| ((rng.next_f64() * n_batches as f64) as usize).min(n_batches - 1))
            .collect();
        index_sets.push(set);
    }

    let mut mean = Vec::with_capacity(times.len());
    let mut stddev = Vec::with_capacity(times.len());
    for samples in samples_per_time {
        mean.push(samples.iter().sum::<f64>() / n_batches as f64);
        let resampled: Vec<f64> = index_sets
            .iter()
            .map(|set| set.iter().map(|&b| samples[b]).sum::<f64>() / set.len() as f64)
            .collect();
        stddev.push(sample_stddev(&resampled));
    }
    TimeSeries::new(times.to_vec(), mean, stddev, String::from(label))
}

fn sample_stddev(values: &[f64]) -> f64 {
    if values.len() < 2 || values.windows(2).all(|w| w[0] == w[1]) {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    libm::sqrt(var.max(0.0))
}
