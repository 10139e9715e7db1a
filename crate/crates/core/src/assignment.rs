//! Min-max (bottleneck) bipartite assignment between point sets in ℂ: the
//! matching realizes the smallest possible largest pair distance, which is
//! the right notion for "E′ = E + 𝒪(α)" set comparisons.

use num_complex::Complex64 as C64;

/// A partial bijection between two indexed sets with its sup deviation.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MatchResult {
    /// (source index, target index, distance) triples.
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_src: Vec<usize>,
    pub unmatched_tgt: Vec<usize>,
    /// max over pairs (0 when there are none).
    pub max_distance: f64,
}

/// Kuhn's augmenting-path maximum matching restricted to edges with
/// d(i,j) ≤ cap; returns target-side assignment (tgt j → src i).
fn max_matching_under(d: &[Vec<f64>], n_src: usize, n_tgt: usize, cap: f64) -> Vec<Option<usize>> {
    let mut tgt_of: Vec<Option<usize>> = vec![None; n_tgt];
    fn try_augment(
        i: usize,
        d: &[Vec<f64>],
        cap: f64,
        seen: &mut [bool],
        tgt_of: &mut [Option<usize>],
    ) -> bool {
        for j in 0..seen.len() {
            if d[i][j] <= cap && !seen[j] {
                seen[j] = true;
                if tgt_of[j].is_none()
                    || try_augment(tgt_of[j].unwrap(), d, cap, seen, tgt_of)
                {
                    tgt_of[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    for i in 0..n_src {
        let mut seen = vec![false; n_tgt];
        try_augment(i, d, cap, &mut seen, &mut tgt_of);
    }
    tgt_of
}

/// Bottleneck matching of min(|src|, |tgt|) pairs: binary search over the
/// sorted distinct distances for the smallest cap admitting a maximum
/// matching, then report that matching.
pub fn bottleneck_match(src: &[C64], tgt: &[C64]) -> MatchResult {
    let (n_src, n_tgt) = (src.len(), tgt.len());
    let want = n_src.min(n_tgt);
    if want == 0 {
        return MatchResult {
            pairs: Vec::new(),
            unmatched_src: (0..n_src).collect(),
            unmatched_tgt: (0..n_tgt).collect(),
            max_distance: 0.0,
        };
    }
    let d: Vec<Vec<f64>> = src
        .iter()
        .map(|a| tgt.iter().map(|b| (a - b).norm()).collect())
        .collect();
    let mut caps: Vec<f64> = d.iter().flatten().copied().collect();
    caps.sort_by(f64::total_cmp);
    caps.dedup();
    // smallest cap with a full-size matching
    let size_at = |cap: f64| -> usize {
        max_matching_under(&d, n_src, n_tgt, cap)
            .iter()
            .filter(|x| x.is_some())
            .count()
    };
    let (mut lo, mut hi) = (0usize, caps.len() - 1);
    debug_assert!(size_at(caps[hi]) == want);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if size_at(caps[mid]) == want {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let cap = caps[lo];
    let tgt_of = max_matching_under(&d, n_src, n_tgt, cap);
    let mut pairs = Vec::new();
    let mut src_used = vec![false; n_src];
    for (j, &src_i) in tgt_of.iter().enumerate() {
        if let Some(i) = src_i {
            pairs.push((i, j, d[i][j]));
            src_used[i] = true;
        }
    }
    pairs.sort_by_key(|p| p.0);
    let max_distance = pairs.iter().map(|p| p.2).fold(0.0, f64::max);
    MatchResult {
        unmatched_src: (0..n_src).filter(|&i| !src_used[i]).collect(),
        unmatched_tgt: (0..n_tgt).filter(|&j| tgt_of[j].is_none()).collect(),
        pairs,
        max_distance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identical_sets_pair_identically() {
        let e = vec![c(1.0, -0.1), c(2.0, -0.2), c(3.0, -0.3)];
        let m = bottleneck_match(&e, &e);
        assert_eq!(m.pairs.len(), 3);
        assert_eq!(m.max_distance, 0.0);
        assert!(m.unmatched_src.is_empty() && m.unmatched_tgt.is_empty());
        for (i, j, d) in &m.pairs {
            assert_eq!(i, j);
            assert_eq!(*d, 0.0);
        }
    }

    #[test]
    fn uniform_shift_detected() {
        let e = vec![c(1.0, -0.1), c(2.0, -0.2)];
        let eps = 1e-5;
        let shifted: Vec<C64> = e.iter().map(|z| z + c(eps, 0.0)).collect();
        let m = bottleneck_match(&e, &shifted);
        assert_eq!(m.pairs.len(), 2);
        assert!((m.max_distance - eps).abs() < 1e-15);
    }

    #[test]
    fn cardinality_mismatch_flags_unmatched() {
        let e = vec![c(1.0, 0.0), c(2.0, 0.0), c(9.0, 0.0)];
        let f = vec![c(2.0, 0.0), c(1.0, 0.0)];
        let m = bottleneck_match(&e, &f);
        assert_eq!(m.pairs.len(), 2);
        assert_eq!(m.unmatched_src, vec![2]);
        assert!(m.unmatched_tgt.is_empty());
        assert_eq!(m.max_distance, 0.0);
    }

    #[test]
    fn beats_greedy_on_crossing_pairs() {
        // greedy nearest-neighbor would pair 0↔0 at distance 0.9 and leave
        // 1↔1 at 2.1; bottleneck pairing crosses for max 1.1
        let e = vec![c(0.0, 0.0), c(2.0, 0.0)];
        let f = vec![c(0.9, 0.0), c(-1.1, 0.0)];
        let m = bottleneck_match(&e, &f);
        assert!((m.max_distance - 1.1).abs() < 1e-12, "{}", m.max_distance);
    }

    #[test]
    fn matches_brute_force_on_random_sets() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let n = 5;
            let a: Vec<C64> = (0..n)
                .map(|_| c(rng.random::<f64>(), rng.random::<f64>()))
                .collect();
            let b: Vec<C64> = (0..n)
                .map(|_| c(rng.random::<f64>(), rng.random::<f64>()))
                .collect();
            let m = bottleneck_match(&a, &b);
            // brute force over all 120 permutations
            let mut best = f64::INFINITY;
            let mut perm: Vec<usize> = (0..n).collect();
            loop {
                let worst = perm
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| (a[i] - b[j]).norm())
                    .fold(0.0, f64::max);
                best = best.min(worst);
                // next_permutation
                let mut k = n as i64 - 2;
                while k >= 0 && perm[k as usize] >= perm[k as usize + 1] {
                    k -= 1;
                }
                if k < 0 {
                    break;
                }
                let k = k as usize;
                let mut l = n - 1;
                while perm[l] <= perm[k] {
                    l -= 1;
                }
                perm.swap(k, l);
                perm[k + 1..].reverse();
            }
            assert!(
                (m.max_distance - best).abs() < 1e-12,
                "bottleneck {} vs brute {best}",
                m.max_distance
            );
        }
    }
}
