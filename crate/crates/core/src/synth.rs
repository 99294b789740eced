//! Seeded synthetic datasets for tests, benchmarks and trend checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::ingest::Dataset;
use crate::series::TimeSeries;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Gaussian random walks with lengths uniform in `[max_len - spread, max_len]`.
pub fn random_walks(count: usize, max_len: usize, spread: usize, seed: u64) -> Vec<TimeSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let len = rng.gen_range(max_len.saturating_sub(spread).max(1)..=max_len);
            let mut x = 0.0;
            let values = (0..len)
                .map(|_| {
                    x += normal(&mut rng);
                    x
                })
                .collect();
            TimeSeries::new(values).expect("finite").with_id(i as u64)
        })
        .collect()
}

/// Cylinder-Bell-Funnel: three labelled shape classes of length `len`,
/// `per_class` sequences each, interleaved by class.
pub fn cylinder_bell_funnel(per_class: usize, len: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = len as f64 / 128.0;
    let mut sequences = Vec::with_capacity(3 * per_class);
    for k in 0..3 * per_class {
        let class = k % 3;
        let a = rng.gen_range(16.0..32.0) * scale;
        let b = a + rng.gen_range(32.0..96.0) * scale;
        let amp = 6.0 + normal(&mut rng);
        let values = (0..len)
            .map(|t| {
                let t = t as f64;
                let inside = if t >= a && t <= b { 1.0 } else { 0.0 };
                let shape = match class {
                    0 => 1.0,
                    1 => (t - a) / (b - a),
                    _ => (b - t) / (b - a),
                };
                amp * inside * shape + normal(&mut rng)
            })
            .collect();
        let label = ["cylinder", "bell", "funnel"][class];
        sequences.push(TimeSeries::new(values).expect("finite").with_id(k as u64).with_label(label));
    }
    Dataset::new("cbf", sequences).expect("non-empty")
}

/// Three smooth shape families (sine bursts, damped oscillations, sigmoid
/// steps) with light noise; `per_class` each, length `len`.
pub fn smooth_shapes(per_class: usize, len: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sequences = Vec::with_capacity(3 * per_class);
    for k in 0..3 * per_class {
        let class = k % 3;
        let freq = rng.gen_range(1.0..3.0);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let amp = rng.gen_range(1.5..3.0);
        let centre = rng.gen_range(0.3..0.7);
        let values = (0..len)
            .map(|t| {
                let x = t as f64 / len as f64;
                let shape = match class {
                    0 => amp * (std::f64::consts::TAU * freq * x + phase).sin(),
                    1 => amp * (-3.0 * x).exp() * (std::f64::consts::TAU * 2.0 * freq * x + phase).cos(),
                    _ => amp * (1.0 / (1.0 + (-(x - centre) * 25.0).exp()) - 0.5),
                };
                shape + 0.1 * normal(&mut rng)
            })
            .collect();
        let label = ["sine", "damped", "step"][class];
        sequences.push(TimeSeries::new(values).expect("finite").with_id(k as u64).with_label(label));
    }
    Dataset::new("smooth", sequences).expect("non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seeded() {
        assert_eq!(random_walks(5, 20, 3, 1), random_walks(5, 20, 3, 1));
        assert_ne!(random_walks(5, 20, 3, 1), random_walks(5, 20, 3, 2));
        assert_eq!(cylinder_bell_funnel(4, 64, 9), cylinder_bell_funnel(4, 64, 9));
        let s = smooth_shapes(2, 100, 1);
        assert_eq!(s.len(), 6);
        assert!(s.sequences.iter().all(|x| x.len() == 100));
    }

    #[test]
    fn walk_lengths_stay_in_range() {
        for s in random_walks(200, 30, 6, 7) {
            assert!((24..=30).contains(&s.len()));
        }
    }
}
