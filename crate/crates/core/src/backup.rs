//! Turning a backup map into a family of bijections.
//!
//! Given `sigma` with `sigma[a] > a`, the directed graph on parts
//! `{(a, sigma[a])}` is a forest of paths flowing toward part `n-1` (every
//! out-edge moves strictly forward, and only part `n-1` has none). For each
//! choice `k` of the absent agent, following that flow from `k` reaches
//! `n-1`; shifting every agent on that path to its backup part and fixing
//! everyone else yields a bijection onto the parts other than `k`.

use crate::instance::{BackupMap, BijectionFamily};

/// Builds the `n` bijections induced by a backup map.
///
/// For every `k`, `pi[k][a]` is either `a` or `sigma[a]`, and `pi[n-1]` is
/// the identity. The result always passes [`BijectionFamily::new`].
pub fn backup_to_bijections(sigma: &BackupMap, n: usize) -> BijectionFamily {
    assert_eq!(sigma.sigma.len(), n - 1, "backup map size does not match n");
    let mut pi = Vec::with_capacity(n);
    for k in 0..n {
        let mut map: Vec<usize> = (0..n - 1).collect();
        // Walk the sigma-path from k; all agents on it hand their part to
        // the previous walker and move to their backup part.
        let mut at = k;
        while at != n - 1 {
            map[at] = sigma.sigma[at];
            at = sigma.sigma[at];
        }
        pi.push(map);
    }
    BijectionFamily { pi }
}
