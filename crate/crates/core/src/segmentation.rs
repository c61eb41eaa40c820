//! Chronological halving and the stratified train/validation/test split.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataio::RecordingSet;
use crate::dsp::RowMeta;
use crate::error::{Error, Result};

pub const DEFAULT_RATIOS: (f64, f64, f64) = (0.7, 0.15, 0.15);

/// Global trial indices split into the first and second chronological half.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfAssignment {
    pub half_1h: Vec<usize>,
    pub half_2h: Vec<usize>,
}

/// Splits every subject's trials at the chronological midpoint: the first
/// `ceil(m/2)` trials go to 1H, the remainder to 2H. Index lists preserve
/// input order.
pub fn split_halves(set: &RecordingSet) -> Result<HalfAssignment> {
    let meta: Vec<(u32, u32)> = set
        .trials
        .iter()
        .map(|t| (t.subject_id, t.chrono_index))
        .collect();
    split_halves_meta(&meta)
}

/// As [`split_halves`] but on bare (subject, chrono) pairs, so feature
/// matrices can be halved without the original recordings.
pub fn split_halves_meta(meta: &[(u32, u32)]) -> Result<HalfAssignment> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    let mut max_chrono: BTreeMap<u32, u32> = BTreeMap::new();
    for &(sid, chrono) in meta {
        *counts.entry(sid).or_insert(0) += 1;
        let e = max_chrono.entry(sid).or_insert(0);
        *e = (*e).max(chrono);
    }
    for (&sid, &m) in &counts {
        if m < 2 {
            return Err(Error::Validation(format!(
                "subject {sid} has {m} trial(s); halving needs at least 2"
            )));
        }
        if max_chrono[&sid] as usize + 1 != m {
            return Err(Error::Validation(format!(
                "subject {sid}: chrono indices are not gapless 0..{}",
                m - 1
            )));
        }
    }
    let mut half_1h = Vec::new();
    let mut half_2h = Vec::new();
    for (i, &(sid, chrono)) in meta.iter().enumerate() {
        let m = counts[&sid];
        if (chrono as usize) < m.div_ceil(2) {
            half_1h.push(i);
        } else {
            half_2h.push(i);
        }
    }
    Ok(HalfAssignment { half_1h, half_2h })
}

pub fn halves_of_rows(meta: &[RowMeta]) -> Result<HalfAssignment> {
    let pairs: Vec<(u32, u32)> = meta.iter().map(|m| (m.subject_id, m.chrono_index)).collect();
    split_halves_meta(&pairs)
}

/// Row indices for the three partitions of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub ratios: (f64, f64, f64),
    pub seed: u64,
}

/// Largest-remainder allocation of `n` items to the three partitions.
/// Remainder units go to the largest fractional parts; ties prefer the
/// partition furthest below its global target, then train > val > test.
fn allocate(
    n: usize,
    ratios: (f64, f64, f64),
    global_ideal: [f64; 3],
    taken_so_far: [usize; 3],
) -> [usize; 3] {
    let r = [ratios.0, ratios.1, ratios.2];
    let ideal: Vec<f64> = r.iter().map(|ri| ri * n as f64).collect();
    let mut alloc = [0usize; 3];
    for p in 0..3 {
        alloc[p] = ideal[p].floor() as usize;
    }
    let mut remainder = n - alloc.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let frac_a = ideal[a] - ideal[a].floor();
        let frac_b = ideal[b] - ideal[b].floor();
        frac_b
            .partial_cmp(&frac_a)
            .unwrap()
            .then_with(|| {
                let deficit_a = global_ideal[a] - (taken_so_far[a] + alloc[a]) as f64;
                let deficit_b = global_ideal[b] - (taken_so_far[b] + alloc[b]) as f64;
                deficit_b.partial_cmp(&deficit_a).unwrap()
            })
            .then_with(|| a.cmp(&b))
    });
    for &p in &order {
        if remainder == 0 {
            break;
        }
        alloc[p] += 1;
        remainder -= 1;
    }
    alloc
}

/// Stratified 0.7:0.15:0.15 split. Within each label group the indices are
/// shuffled by the seeded generator and assigned by largest-remainder
/// rounding; the result is deterministic in `(labels, seed)`.
pub fn split_train_val_test(
    labels: &[u8],
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<SplitIndices> {
    let n = labels.len();
    if n < 10 {
        return Err(Error::Precondition(format!(
            "split needs at least 10 rows, got {n}"
        )));
    }
    if let Some(bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::Validation(format!("label {bad} is not binary")));
    }
    let sum = ratios.0 + ratios.1 + ratios.2;
    if !(ratios.0 > 0.0 && ratios.1 >= 0.0 && ratios.2 >= 0.0 && (sum - 1.0).abs() < 1e-9) {
        return Err(Error::Argument(format!("ratios {ratios:?} must sum to 1")));
    }

    let mut groups: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        groups[l as usize].push(i);
    }
    if groups[0].is_empty() || groups[1].is_empty() {
        return Err(Error::Stratification(
            "both labels must be present".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let global_ideal = [
        ratios.0 * n as f64,
        ratios.1 * n as f64,
        ratios.2 * n as f64,
    ];
    let mut taken = [0usize; 3];
    let mut train = Vec::new();
    let mut val = Vec::new();
    let mut test = Vec::new();
    for group in &mut groups {
        group.shuffle(&mut rng);
        let alloc = allocate(group.len(), ratios, global_ideal, taken);
        for p in 0..3 {
            taken[p] += alloc[p];
        }
        train.extend_from_slice(&group[..alloc[0]]);
        val.extend_from_slice(&group[alloc[0]..alloc[0] + alloc[1]]);
        test.extend_from_slice(&group[alloc[0] + alloc[1]..]);
        debug_assert_eq!(alloc.iter().sum::<usize>(), group.len());
    }
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();

    // stratification guard: the 0.7 share dominates, so every non-empty
    // group lands at least one row in train
    for l in 0..2u8 {
        if !train.iter().any(|&i| labels[i] == l) {
            return Err(Error::Stratification(format!(
                "label {l} missing from the training partition"
            )));
        }
    }
    Ok(SplitIndices {
        train,
        val,
        test,
        ratios,
        seed,
    })
}
