use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::EvalError;

fn by_class(y: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in y.iter().enumerate() {
        groups.entry(c).or_default().push(i);
    }
    groups
}

/// Per-class test quotas: floors of `n_c * fraction`, topped up by largest
/// remainder (ties to the lower class) until the total is
/// `round(n * fraction)`. A class never gives up all of its samples.
pub fn test_quotas(class_sizes: &[usize], fraction: f64) -> Vec<usize> {
    let n: usize = class_sizes.iter().sum();
    let target = (n as f64 * fraction).round() as usize;
    let mut quotas: Vec<usize> = class_sizes
        .iter()
        .map(|&s| ((s as f64 * fraction).floor() as usize).min(s.saturating_sub(1)))
        .collect();
    let mut order: Vec<(usize, f64)> = class_sizes
        .iter()
        .enumerate()
        .map(|(c, &s)| (c, s as f64 * fraction - (s as f64 * fraction).floor()))
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut extra = target.saturating_sub(quotas.iter().sum());
    for (c, _) in order {
        if extra == 0 {
            break;
        }
        if quotas[c] + 1 < class_sizes[c] {
            quotas[c] += 1;
            extra -= 1;
        }
    }
    quotas
}

/// Stratified train/test split. Returns sorted `(train, test)` indices.
pub fn stratified_split(y: &[usize], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvalError::InvalidFraction(test_fraction));
    }
    let groups = by_class(y);
    for (&class, members) in &groups {
        if members.len() < 2 {
            return Err(EvalError::ClassTooSmall {
                class,
                count: members.len(),
                required: 2,
            });
        }
    }
    let sizes: Vec<usize> = groups.values().map(Vec::len).collect();
    let quotas = test_quotas(&sizes, test_fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(y.len());
    let mut test = Vec::new();
    for (members, quota) in groups.into_values().zip(quotas) {
        let mut members = members;
        members.shuffle(&mut rng);
        test.extend_from_slice(&members[..quota]);
        train.extend_from_slice(&members[quota..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Stratified k-fold assignment. Within each class fold sizes differ by at
/// most one; class offsets rotate so overall fold sizes stay balanced.
pub fn stratified_kfold(y: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidFolds(k));
    }
    let groups = by_class(y);
    for (&class, members) in &groups {
        if members.len() < k {
            return Err(EvalError::ClassTooSmall {
                class,
                count: members.len(),
                required: k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for members in groups.into_values() {
        let mut members = members;
        members.shuffle(&mut rng);
        for (j, idx) in members.iter().enumerate() {
            folds[(offset + j) % k].push(*idx);
        }
        offset = (offset + members.len()) % k;
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(sizes: &[usize]) -> Vec<usize> {
        sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
            .collect()
    }

    fn per_class(y: &[usize], idx: &[usize], c: usize) -> usize {
        idx.iter().filter(|&&i| y[i] == c).count()
    }

    #[test]
    fn exact_proportions() {
        let y = labels(&[10, 10, 10]);
        let (train, test) = stratified_split(&y, 0.2, 3).unwrap();
        assert_eq!(test.len(), 6);
        assert_eq!(train.len(), 24);
        for c in 0..3 {
            assert_eq!(per_class(&y, &test, c), 2);
        }
    }

    #[test]
    fn uneven_three_class_split() {
        assert_eq!(test_quotas(&[122, 121, 126], 0.2), vec![25, 24, 25]);
        let y = labels(&[122, 121, 126]);
        let (train, test) = stratified_split(&y, 0.2, 11).unwrap();
        assert_eq!(test.len(), 74);
        assert_eq!(train.len() + test.len(), 369);
    }

    #[test]
    fn fraction_bounds() {
        let y = labels(&[5, 5]);
        assert!(matches!(
            stratified_split(&y, 0.0, 1),
            Err(EvalError::InvalidFraction(_))
        ));
        assert!(matches!(
            stratified_split(&y, 1.0, 1),
            Err(EvalError::InvalidFraction(_))
        ));
    }

    #[test]
    fn singleton_class_is_named() {
        let y = labels(&[5, 1]);
        let err = stratified_split(&y, 0.2, 1).unwrap_err();
        assert!(matches!(err, EvalError::ClassTooSmall { class: 1, count: 1, .. }));
    }

    #[test]
    fn kfold_one_per_class_per_fold() {
        let y = labels(&[5, 5, 5]);
        let folds = stratified_kfold(&y, 5, 2).unwrap();
        for f in &folds {
            for c in 0..3 {
                assert_eq!(per_class(&y, f, c), 1);
            }
        }
    }

    #[test]
    fn kfold_pigeonhole_and_partition() {
        let y = labels(&[7, 5]);
        let folds = stratified_kfold(&y, 5, 8).unwrap();
        for f in &folds {
            assert!((1..=2).contains(&per_class(&y, f, 0)));
        }
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn kfold_rejects_small_classes() {
        let y = labels(&[7, 3]);
        assert!(matches!(
            stratified_kfold(&y, 5, 0),
            Err(EvalError::ClassTooSmall {
                class: 1,
                count: 3,
                required: 5
            })
        ));
        assert!(stratified_kfold(&y, 1, 0).is_err());
    }

    #[test]
    fn same_seed_same_split() {
        let y = labels(&[9, 8, 7]);
        assert_eq!(
            stratified_split(&y, 0.3, 5).unwrap(),
            stratified_split(&y, 0.3, 5).unwrap()
        );
        assert_ne!(
            stratified_split(&y, 0.3, 5).unwrap(),
            stratified_split(&y, 0.3, 6).unwrap()
        );
    }
}
