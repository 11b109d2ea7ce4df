//! Shared fixtures for the criterion benches.

use ssfinsler::zoo::{zoo, zoo_domain, ZooEntry};
use ssfinsler::{r_grid, s_grid};

/// The reference metrics in dimension `n`.
pub fn fixtures(n: usize) -> Vec<ZooEntry> {
    zoo(n).expect("zoo entries are valid")
}

/// A deterministic `(r, s)` cloud over the zoo domain.
pub fn sample_points(r_count: usize, s_count: usize) -> Vec<(f64, f64)> {
    r_grid(zoo_domain(), r_count)
        .into_iter()
        .flat_map(|r| s_grid(r, s_count).into_iter().map(move |s| (r, s)))
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn points_cover_the_grid() {
        let pts = super::sample_points(3, 5);
        assert_eq!(pts.len(), 15);
        assert!(pts.iter().all(|(r, s)| s.abs() < *r));
    }
}
