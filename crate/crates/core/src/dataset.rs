//! Dataset bookkeeping: manifest records, stratified holdout + k-fold
//! assignment, inverse-frequency class weights, stratified fraction
//! subsampling, and the synthetic image generator used for desk-scale runs.
//!
//! Every quota that must sum exactly uses largest-remainder rounding, and
//! every randomized choice draws from a named [`crate::rng::CounterRng`]
//! stream, so splits are pure functions of `(input, seed)`.

pub mod synth;

use crate::rng::CounterRng;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// One manifest row: a sample id, its image path, and the screening label
/// (0 = no referable glaucoma, 1 = referable glaucoma).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestRecord {
    pub id: String,
    pub path: String,
    pub label: u8,
}

/// Role of an id within one fold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Train,
    Val,
    Test,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Train => "train",
            Role::Val => "val",
            Role::Test => "test",
        }
    }
}

/// Split failures.
#[derive(Clone, Debug, PartialEq)]
pub enum SplitError {
    /// `test_count` must be strictly between 0 and the record count.
    TestCountOutOfRange { test_count: usize, total: usize },
    /// k must be at least 2.
    TooFewFolds(u32),
    /// A class has fewer members than there are folds.
    ClassSmallerThanK { label: u8, count: usize, k: u32 },
    /// `val_fraction` disagrees with `1/k`.
    ValFractionMismatch { val_fraction: f64, k: u32 },
    /// A class required by the operation is absent.
    MissingClass(u8),
    /// A label outside {0, 1}.
    BadLabel { id: String, label: u8 },
    /// Duplicate id in the manifest.
    DuplicateId(String),
    /// A fold index at or beyond k.
    BadFoldIndex { id: String, fold: u32, k: u32 },
}

impl core::fmt::Display for SplitError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::TestCountOutOfRange { test_count, total } => {
                write!(f, "test_count {test_count} must be in 1..{total}")
            }
            Self::TooFewFolds(k) => write!(f, "k must be >= 2, got {k}"),
            Self::ClassSmallerThanK { label, count, k } => {
                write!(f, "class {label} has only {count} samples, fewer than k = {k}")
            }
            Self::ValFractionMismatch { val_fraction, k } => {
                write!(f, "val_fraction {val_fraction} is inconsistent with k = {k} (expected 1/k)")
            }
            Self::MissingClass(label) => write!(f, "class {label} is absent"),
            Self::BadLabel { id, label } => write!(f, "record `{id}` has label {label}, expected 0 or 1"),
            Self::DuplicateId(id) => write!(f, "duplicate id `{id}`"),
            Self::BadFoldIndex { id, fold, k } => {
                write!(f, "id `{id}` assigned to fold {fold}, but k = {k}")
            }
        }
    }
}

impl core::error::Error for SplitError {}

/// Checks id uniqueness and the label domain; order-preserving by contract.
pub fn validate_manifest(records: &[ManifestRecord]) -> Result<(), SplitError> {
    let mut ids: Vec<&str> = records.iter().map(|r| r.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(dup) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(SplitError::DuplicateId(dup[0].into()));
    }
    for r in records {
        if r.label > 1 {
            return Err(SplitError::BadLabel { id: r.id.clone(), label: r.label });
        }
    }
    Ok(())
}

/// Per-class sample counts, indexed by label.
pub fn class_counts(records: &[ManifestRecord]) -> [usize; 2] {
    let mut counts = [0usize; 2];
    for r in records {
        counts[usize::from(r.label.min(1))] += 1;
    }
    counts
}

/// Allocates `target` units across bins proportionally to `weights`,
/// flooring quotas and distributing the leftovers by descending fractional
/// remainder (ties to the lower index). Exact integer arithmetic.
pub fn largest_remainder(weights: &[usize], target: usize) -> Vec<usize> {
    let total: u128 = weights.iter().map(|&w| w as u128).sum();
    if total == 0 {
        return vec![0; weights.len()];
    }
    let mut quotas: Vec<usize> = Vec::with_capacity(weights.len());
    let mut remainders: Vec<(u128, usize)> = Vec::with_capacity(weights.len());
    let mut assigned = 0usize;
    for (i, &w) in weights.iter().enumerate() {
        let scaled = target as u128 * w as u128;
        let q = (scaled / total) as usize;
        quotas.push(q);
        assigned += q;
        remainders.push((scaled % total, i));
    }
    // Largest fractional part first; ties favor the lower index.
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(target - assigned) {
        quotas[i] += 1;
    }
    quotas
}

/// Indices of `records` grouped by class, in record order.
fn indices_by_class(records: &[ManifestRecord]) -> [Vec<usize>; 2] {
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, r) in records.iter().enumerate() {
        by_class[usize::from(r.label.min(1))].push(i);
    }
    by_class
}

/// Stratified test holdout: each class contributes its proportional share
/// of `test_count` (largest-remainder exact), members chosen by seeded
/// shuffle within the class. Both outputs preserve manifest order.
pub fn stratified_holdout(
    records: &[ManifestRecord],
    test_count: usize,
    seed: u64,
) -> Result<(Vec<ManifestRecord>, Vec<ManifestRecord>), SplitError> {
    if test_count == 0 || test_count >= records.len() {
        return Err(SplitError::TestCountOutOfRange { test_count, total: records.len() });
    }
    let by_class = indices_by_class(records);
    let counts = [by_class[0].len(), by_class[1].len()];
    let quotas = largest_remainder(&counts, test_count);
    let mut in_test = vec![false; records.len()];
    for (label, class) in by_class.iter().enumerate() {
        let mut shuffled = class.clone();
        CounterRng::named(seed, &format!("holdout-{label}")).shuffle(&mut shuffled);
        for &i in shuffled.iter().take(quotas[label]) {
            in_test[i] = true;
        }
    }
    let mut pool = Vec::with_capacity(records.len() - test_count);
    let mut test = Vec::with_capacity(test_count);
    for (i, r) in records.iter().enumerate() {
        if in_test[i] {
            test.push(r.clone());
        } else {
            pool.push(r.clone());
        }
    }
    Ok((pool, test))
}

/// Cross-validation plan: `k` disjoint validation shards drawn from the
/// pool, plus the fold-independent test ids. When `k` does not divide the
/// pool size, the leftover ids (fewer than `k`) belong to no shard and
/// train in every fold, so all folds share identical train and val sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldPlan {
    k: u32,
    seed: u64,
    /// Pool ids in manifest order, with each id's validation shard; `None`
    /// marks an id that trains in every fold.
    pool: Vec<(String, Option<u32>)>,
    /// Test ids in manifest order.
    test: Vec<String>,
}

impl FoldPlan {
    /// Assembles a plan from raw parts, validating shard indices.
    pub fn from_parts(
        k: u32,
        seed: u64,
        pool: Vec<(String, Option<u32>)>,
        test: Vec<String>,
    ) -> Result<Self, SplitError> {
        if k < 2 {
            return Err(SplitError::TooFewFolds(k));
        }
        for (id, fold) in &pool {
            if let Some(fold) = *fold {
                if fold >= k {
                    return Err(SplitError::BadFoldIndex { id: id.clone(), fold, k });
                }
            }
        }
        Ok(Self { k, seed, pool, test })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Pool ids with their validation shard, in manifest order.
    pub fn pool(&self) -> &[(String, Option<u32>)] {
        &self.pool
    }

    pub fn test_ids(&self) -> impl Iterator<Item = &str> {
        self.test.iter().map(String::as_str)
    }

    pub fn val_ids(&self, fold: u32) -> impl Iterator<Item = &str> {
        self.pool.iter().filter(move |(_, f)| *f == Some(fold)).map(|(id, _)| id.as_str())
    }

    pub fn train_ids(&self, fold: u32) -> impl Iterator<Item = &str> {
        self.pool.iter().filter(move |(_, f)| *f != Some(fold)).map(|(id, _)| id.as_str())
    }

    pub fn test_len(&self) -> usize {
        self.test.len()
    }

    pub fn val_len(&self, fold: u32) -> usize {
        self.pool.iter().filter(|(_, f)| *f == Some(fold)).count()
    }

    pub fn train_len(&self, fold: u32) -> usize {
        self.pool.len() - self.val_len(fold)
    }
}

/// Stratified k-fold assignment of the pool.
///
/// Every shard holds exactly `pool / k` ids: the per-class seat totals come
/// from a largest-remainder allocation of `k * (pool / k)` seats, each
/// class spreads its seats over the shards with its own leftover units
/// going to the shards holding the fewest so far (ties toward the higher
/// shard index), and the sub-`k` rounding remainder of the pool joins no
/// shard at all — those ids train in every fold. `val_fraction` must equal
/// `1/k`; it exists so configs can state the 80/20 shape explicitly.
pub fn kfold(
    pool: &[ManifestRecord],
    k: u32,
    val_fraction: f64,
    seed: u64,
) -> Result<FoldPlan, SplitError> {
    if k < 2 {
        return Err(SplitError::TooFewFolds(k));
    }
    if (val_fraction * f64::from(k) - 1.0).abs() > 1e-6 {
        return Err(SplitError::ValFractionMismatch { val_fraction, k });
    }
    let by_class = indices_by_class(pool);
    for (label, class) in by_class.iter().enumerate() {
        if class.len() < k as usize {
            return Err(SplitError::ClassSmallerThanK {
                label: label as u8,
                count: class.len(),
                k,
            });
        }
    }
    let val_size = pool.len() / k as usize;
    let seats = largest_remainder(
        &[by_class[0].len(), by_class[1].len()],
        k as usize * val_size,
    );
    let mut shard_of: Vec<Option<u32>> = vec![None; pool.len()];
    let mut extras_per_shard = vec![0u32; k as usize];
    for (label, class) in by_class.iter().enumerate() {
        let base = seats[label] / k as usize;
        let leftover = seats[label] % k as usize;
        // Shards with the fewest leftovers so far absorb this class's
        // remainder; ties resolve toward the higher index so fold 0 keeps
        // the nominal size.
        let mut order: Vec<usize> = (0..k as usize).collect();
        order.sort_by(|&a, &b| extras_per_shard[a].cmp(&extras_per_shard[b]).then(b.cmp(&a)));
        let mut quota = vec![base; k as usize];
        for &s in order.iter().take(leftover) {
            quota[s] += 1;
            extras_per_shard[s] += 1;
        }
        let mut shuffled = class.clone();
        CounterRng::named(seed, &format!("kfold-{label}")).shuffle(&mut shuffled);
        let mut cursor = 0usize;
        for (shard, &q) in quota.iter().enumerate() {
            for &i in &shuffled[cursor..cursor + q] {
                shard_of[i] = Some(shard as u32);
            }
            cursor += q;
        }
        // `shuffled[cursor..]` is the rounding remainder: never a val
        // member, so it trains in every fold.
    }
    let pool_assign =
        pool.iter().zip(&shard_of).map(|(r, &s)| (r.id.clone(), s)).collect();
    FoldPlan::from_parts(k, seed, pool_assign, Vec::new())
}

/// Holdout followed by k-fold on the remaining pool: the complete split
/// protocol in one call.
pub fn split_manifest(
    records: &[ManifestRecord],
    test_count: usize,
    k: u32,
    val_fraction: f64,
    seed: u64,
) -> Result<FoldPlan, SplitError> {
    validate_manifest(records)?;
    let (pool, test) = stratified_holdout(records, test_count, seed)?;
    let plan = kfold(&pool, k, val_fraction, seed)?;
    FoldPlan::from_parts(k, seed, plan.pool, test.into_iter().map(|r| r.id).collect())
}

/// Inverse-frequency class weights: `w_j = N / (C * n_j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassWeights {
    w: [f64; 2],
}

impl ClassWeights {
    pub fn uniform() -> Self {
        Self { w: [1.0, 1.0] }
    }

    pub fn from_weights(w0: f64, w1: f64) -> Self {
        assert!(w0 > 0.0 && w1 > 0.0 && w0.is_finite() && w1.is_finite());
        Self { w: [w0, w1] }
    }

    /// Weights `N / (2 * n_c)` from a bare label list; errors if a class is
    /// absent (its weight would be infinite).
    pub fn from_labels(labels: &[u8]) -> Result<Self, SplitError> {
        let mut counts = [0usize; 2];
        for &label in labels {
            counts[usize::from(label.min(1))] += 1;
        }
        for (label, &n) in counts.iter().enumerate() {
            if n == 0 {
                return Err(SplitError::MissingClass(label as u8));
            }
        }
        let n = labels.len() as f64;
        Ok(Self { w: [n / (2.0 * counts[0] as f64), n / (2.0 * counts[1] as f64)] })
    }

    #[inline]
    pub fn get(&self, label: u8) -> f64 {
        self.w[usize::from(label.min(1))]
    }
}

/// Weights from the label histogram of `records`; errors if a class is
/// absent (its weight would be infinite).
pub fn class_weights(records: &[ManifestRecord]) -> Result<ClassWeights, SplitError> {
    let labels: Vec<u8> = records.iter().map(|r| r.label).collect();
    ClassWeights::from_labels(&labels)
}

/// Stratified seeded subsample of `round(fraction * N)` records, preserving
/// manifest order.
pub fn subsample_fraction(
    records: &[ManifestRecord],
    fraction: f64,
    seed: u64,
) -> Vec<ManifestRecord> {
    assert!((0.0..=1.0).contains(&fraction), "fraction must be in [0, 1]");
    let target = libm::floor(fraction * records.len() as f64 + 0.5) as usize;
    if target >= records.len() {
        return records.to_vec();
    }
    let by_class = indices_by_class(records);
    let counts = [by_class[0].len(), by_class[1].len()];
    let quotas = largest_remainder(&counts, target);
    let mut keep = vec![false; records.len()];
    for (label, class) in by_class.iter().enumerate() {
        let mut shuffled = class.clone();
        CounterRng::named(seed, &format!("subsample-{label}")).shuffle(&mut shuffled);
        for &i in shuffled.iter().take(quotas[label]) {
            keep[i] = true;
        }
    }
    records
        .iter()
        .enumerate()
        .filter(|(i, _)| keep[*i])
        .map(|(_, r)| r.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(n0: usize, n1: usize) -> Vec<ManifestRecord> {
        // Interleave classes so order-sensitivity bugs surface.
        let mut out = Vec::with_capacity(n0 + n1);
        let mut c1 = 0;
        for i in 0..n0 + n1 {
            let label = if (i * n1) % (n0 + n1) < n1 && c1 < n1 {
                c1 += 1;
                1
            } else {
                0
            };
            out.push(ManifestRecord {
                id: format!("s{i:06}"),
                path: format!("images/s{i:06}.png"),
                label,
            });
        }
        assert_eq!(class_counts(&out), [n0, n1]);
        out
    }

    #[test]
    fn manifest_validation_catches_duplicates_and_bad_labels() {
        let mut rs = records(3, 2);
        assert!(validate_manifest(&rs).is_ok());
        rs[3].id = rs[1].id.clone();
        assert!(matches!(validate_manifest(&rs), Err(SplitError::DuplicateId(_))));
        let mut rs = records(3, 2);
        rs[0].label = 7;
        assert!(matches!(validate_manifest(&rs), Err(SplitError::BadLabel { .. })));
    }

    #[test]
    fn largest_remainder_is_exact_and_proportional() {
        assert_eq!(largest_remainder(&[96_402, 5_040], 10_000), vec![9_503, 497]);
        assert_eq!(largest_remainder(&[1, 1, 1], 10), vec![4, 3, 3]);
        assert_eq!(largest_remainder(&[5, 5], 10), vec![5, 5]);
        let q = largest_remainder(&[7, 11, 13], 100);
        assert_eq!(q.iter().sum::<usize>(), 100);
    }

    #[test]
    fn holdout_reproduces_the_reference_partition_sizes() {
        let rs = records(96_402, 5_040);
        let (pool, test) = stratified_holdout(&rs, 10_000, 11).unwrap();
        assert_eq!(pool.len(), 91_442);
        assert_eq!(test.len(), 10_000);
        assert_eq!(class_counts(&test), [9_503, 497]);
        assert_eq!(class_counts(&pool), [86_899, 4_543]);
        // Test class ratio tracks the overall ratio within +-0.1%.
        let overall = 5_040.0f64 / 101_442.0;
        let in_test = 497.0 / 10_000.0;
        assert!((overall - in_test).abs() < 0.001);
    }

    #[test]
    fn holdout_is_deterministic_and_small_cases_work() {
        let rs = records(9, 1);
        let (pool, test) = stratified_holdout(&rs, 1, 5).unwrap();
        assert_eq!((pool.len(), test.len()), (9, 1));
        let again = stratified_holdout(&rs, 1, 5).unwrap();
        assert_eq!((pool, test), again);
        let different = stratified_holdout(&rs, 1, 6).unwrap();
        // With 10 records the chosen test element usually moves with the seed;
        // equality of sizes must hold regardless.
        assert_eq!((different.0.len(), different.1.len()), (9, 1));
    }

    #[test]
    fn holdout_rejects_out_of_range_counts() {
        let rs = records(5, 5);
        assert!(matches!(
            stratified_holdout(&rs, 0, 0),
            Err(SplitError::TestCountOutOfRange { .. })
        ));
        assert!(matches!(
            stratified_holdout(&rs, 10, 0),
            Err(SplitError::TestCountOutOfRange { .. })
        ));
    }

    #[test]
    fn kfold_reproduces_the_reference_fold_sizes() {
        let pool = records(86_899, 4_543);
        let plan = kfold(&pool, 5, 0.2, 3).unwrap();
        for fold in 0..5 {
            assert_eq!(plan.val_len(fold), 18_288, "fold {fold} val size");
            assert_eq!(plan.train_len(fold), 73_154, "fold {fold} train size");
        }
        // 91,442 = 5 * 18,288 + 2: the two rounding leftovers join no
        // shard and train in every fold.
        let always_train = plan.pool().iter().filter(|(_, f)| f.is_none()).count();
        assert_eq!(always_train, 2);
    }

    #[test]
    fn kfold_remainder_ids_train_in_every_fold() {
        let pool = records(83, 19);
        let plan = kfold(&pool, 5, 0.2, 11).unwrap();
        // 102 ids, shard size 102 / 5 = 20: two ids are never val.
        let leftovers: Vec<&str> = plan
            .pool()
            .iter()
            .filter(|(_, f)| f.is_none())
            .map(|(id, _)| id.as_str())
            .collect();
        assert_eq!(leftovers.len(), 2);
        for fold in 0..5 {
            assert_eq!(plan.val_len(fold), 20);
            assert_eq!(plan.train_len(fold), 82);
            let train: alloc::collections::BTreeSet<&str> = plan.train_ids(fold).collect();
            for id in &leftovers {
                assert!(train.contains(id), "{id} missing from fold {fold} train");
            }
        }
    }

    #[test]
    fn kfold_shards_partition_the_pool() {
        let pool = records(83, 17);
        let plan = kfold(&pool, 5, 0.2, 9).unwrap();
        let mut seen = alloc::collections::BTreeSet::new();
        let mut total = 0;
        for fold in 0..5 {
            for id in plan.val_ids(fold) {
                assert!(seen.insert(String::from(id)), "id {id} in two shards");
                total += 1;
            }
        }
        assert_eq!(total, 100);
        // Stratification: per-class shard counts within 1 of the ideal.
        for fold in 0..5 {
            let val: Vec<&str> = plan.val_ids(fold).collect();
            let ones = val
                .iter()
                .filter(|id| pool.iter().any(|r| r.id == **id && r.label == 1))
                .count();
            assert!((ones as f64 - 17.0 / 5.0).abs() <= 1.0, "fold {fold}: {ones} positives");
        }
    }

    #[test]
    fn kfold_of_ten_gives_two_per_shard() {
        let pool = records(5, 5);
        let plan = kfold(&pool, 5, 0.2, 1).unwrap();
        for fold in 0..5 {
            assert_eq!(plan.val_len(fold), 2);
            assert_eq!(plan.train_len(fold), 8);
        }
    }

    #[test]
    fn kfold_rejects_bad_parameters() {
        let pool = records(8, 2);
        assert!(matches!(
            kfold(&pool, 5, 0.2, 0),
            Err(SplitError::ClassSmallerThanK { label: 1, count: 2, k: 5 })
        ));
        assert!(matches!(kfold(&pool, 1, 1.0, 0), Err(SplitError::TooFewFolds(1))));
        assert!(matches!(
            kfold(&records(10, 10), 5, 0.3, 0),
            Err(SplitError::ValFractionMismatch { .. })
        ));
    }

    #[test]
    fn split_manifest_keeps_test_fixed_across_folds() {
        let rs = records(90, 10);
        let plan = split_manifest(&rs, 10, 5, 0.2, 4).unwrap();
        assert_eq!(plan.test_len(), 10);
        assert_eq!(plan.pool().len(), 90);
        // Every id appears exactly once: either test or exactly one shard.
        let mut all: Vec<&str> = plan.test_ids().collect();
        all.extend(plan.pool().iter().map(|(id, _)| id.as_str()));
        let mut sorted = all.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 100);
        // train/val of each fold are disjoint by construction; check one.
        let val0: alloc::collections::BTreeSet<&str> = plan.val_ids(0).collect();
        assert!(plan.train_ids(0).all(|id| !val0.contains(id)));
    }

    #[test]
    fn class_weights_match_inverse_frequency() {
        let w = class_weights(&records(50, 50)).unwrap();
        assert_eq!((w.get(0), w.get(1)), (1.0, 1.0));
        let w = class_weights(&records(95, 5)).unwrap();
        assert!((w.get(0) - 0.526_315_789_473_684_2).abs() < 1e-12);
        assert!((w.get(1) - 10.0).abs() < 1e-12);
        let w = class_weights(&records(30, 2)).unwrap();
        assert!((w.get(0) - 0.533_333_333_333_333_3).abs() < 1e-12);
        assert!((w.get(1) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn class_weights_satisfy_the_mass_identity() {
        for (n0, n1) in [(95usize, 5usize), (30, 2), (7, 13), (1, 1)] {
            let w = class_weights(&records(n0, n1)).unwrap();
            let mass = w.get(0) * n0 as f64 + w.get(1) * n1 as f64;
            assert!((mass - (n0 + n1) as f64).abs() < 1e-9, "({n0},{n1})");
        }
    }

    #[test]
    fn class_weights_require_both_classes() {
        assert_eq!(class_weights(&records(5, 0)), Err(SplitError::MissingClass(1)));
    }

    #[test]
    fn subsample_extremes_and_reference_case() {
        let rs = records(200, 111);
        assert_eq!(subsample_fraction(&rs, 1.0, 0), rs);
        assert!(subsample_fraction(&rs, 0.0, 0).is_empty());
        let half = subsample_fraction(&rs, 0.5, 0);
        assert_eq!(half.len(), 156);
        let counts = class_counts(&half);
        assert!((counts[0] as f64 - 100.32).abs() <= 1.0);
        assert!((counts[1] as f64 - 55.67).abs() <= 1.0);
        // Order is preserved and output is reproducible.
        let again = subsample_fraction(&rs, 0.5, 0);
        assert_eq!(half, again);
        let positions: Vec<usize> =
            half.iter().map(|r| rs.iter().position(|x| x.id == r.id).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }
}
