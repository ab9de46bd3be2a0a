//! Reproducible datasets: the 200-row admissions example, a family with one
//! feature whose correlation with the sensitive attribute is tunable, and
//! small random discrete datasets.

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};

use crate::dataset::{default_feature_names, discrete_kinds, ColumnKind, Dataset, Group};
use crate::error::{Error, Result};

/// Admissions example: one binary feature `gpa_high`, label `+1` for a high
/// GPA. Reference group: 51 high, 49 low. Protected group: 48 high, 52 low.
pub fn students() -> Dataset {
    let cells: [(Group, f64, usize); 4] = [
        (Group::Reference, 1.0, 51),
        (Group::Reference, 0.0, 49),
        (Group::Protected, 1.0, 48),
        (Group::Protected, 0.0, 52),
    ];
    let mut features = Vec::with_capacity(200);
    let mut labels = Vec::with_capacity(200);
    let mut sensitive = Vec::with_capacity(200);
    for (g, high, count) in cells {
        for _ in 0..count {
            features.push(high);
            labels.push(if high == 1.0 { 1 } else { -1 });
            sensitive.push(g);
        }
    }
    Dataset::new(features, 1, labels, sensitive, alloc::vec![alloc::string::String::from("gpa_high")], discrete_kinds(1))
        .expect("fixture satisfies the dataset invariants")
}

/// Parameters of the biased family:
/// `s ~ Bernoulli(p)`, `x1 = beta (2 s - 1) + N(0, 1)`, `x2, x3 ~ N(0, 1)`,
/// `y = sign(x1 + 1.5 x2 + 0.5 x3 + noise N(0, 0.25))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasedFamily {
    pub n: usize,
    /// Probability of the reference group.
    pub p: f64,
    /// Shift of `x1` between groups; 0 makes the features independent of `s`.
    pub beta: f64,
    pub seed: u64,
}

impl Default for BiasedFamily {
    fn default() -> Self {
        BiasedFamily { n: 1_000, p: 0.5, beta: 0.3, seed: 7 }
    }
}

pub fn biased_family(cfg: &BiasedFamily) -> Result<Dataset> {
    let bern = Bernoulli::new(cfg.p).map_err(|_| Error::param("p", "must lie in [0, 1]"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut features = Vec::with_capacity(cfg.n * 3);
    let mut labels = Vec::with_capacity(cfg.n);
    let mut sensitive = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let reference = bern.sample(&mut rng);
        let s = if reference { 1.0 } else { -1.0 };
        let x1 = cfg.beta * s + normal(&mut rng);
        let x2 = normal(&mut rng);
        let x3 = normal(&mut rng);
        let z = x1 + 1.5 * x2 + 0.5 * x3 + 0.5 * normal(&mut rng);
        features.extend_from_slice(&[x1, x2, x3]);
        labels.push(if z >= 0.0 { 1 } else { -1 });
        sensitive.push(if reference { Group::Reference } else { Group::Protected });
    }
    Dataset::new(features, 3, labels, sensitive, default_feature_names(3), alloc::vec![ColumnKind::Continuous; 3])
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Random dataset over `cells` distinct binary feature vectors (four binary
/// columns, so at most 16). Each cell draws its own group and label rates.
///
/// # Panics
/// If `n < 2` or `cells` is not in `1..=16`.
pub fn random_discrete<R: Rng + ?Sized>(rng: &mut R, n: usize, cells: usize) -> Dataset {
    assert!(n >= 2 && (1..=16).contains(&cells), "need n >= 2 and 1..=16 cells");
    let patterns: Vec<usize> = {
        let mut all: Vec<usize> = (0..16).collect();
        rand::seq::SliceRandom::shuffle(all.as_mut_slice(), rng);
        all.truncate(cells);
        all
    };
    let group_rate: Vec<f64> = (0..cells).map(|_| rng.random_range(0.05..0.95)).collect();
    let label_rate: Vec<f64> = (0..cells).map(|_| rng.random_range(0.1..0.9)).collect();
    let mut features = Vec::with_capacity(n * 4);
    let mut labels = Vec::with_capacity(n);
    let mut sensitive = Vec::with_capacity(n);
    for _ in 0..n {
        let c = rng.random_range(0..cells);
        for bit in 0..4 {
            features.push(((patterns[c] >> bit) & 1) as f64);
        }
        sensitive.push(if rng.random_bool(group_rate[c]) { Group::Reference } else { Group::Protected });
        labels.push(if rng.random_bool(label_rate[c]) { 1 } else { -1 });
    }
    // both groups must occur
    let n_ref = sensitive.iter().filter(|g| g.is_reference()).count();
    if n_ref == 0 {
        sensitive[0] = Group::Reference;
    } else if n_ref == n {
        sensitive[0] = Group::Protected;
    }
    Dataset::new(features, 4, labels, sensitive, default_feature_names(4), discrete_kinds(4))
        .expect("generated rows satisfy the dataset invariants")
}
