use alloc::vec::Vec;

use super::StatsError;

/// Holm step-down adjustment, returned in input order.
pub fn holm_bonferroni(raw: &[f64]) -> Result<Vec<f64>, StatsError> {
    if let Some(&p) = raw.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(StatsError::OutOfRangeP(p));
    }
    let m = raw.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| raw[i].total_cmp(&raw[j]));
    let mut adjusted = alloc::vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max((m - rank) as f64 * raw[i]).min(1.0);
        adjusted[i] = running;
    }
    Ok(adjusted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let adj = holm_bonferroni(&[0.01, 0.02, 0.03]).unwrap();
        let expected = [0.03, 0.04, 0.04];
        for (a, e) in adj.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
    }

    #[test]
    fn input_order_and_ties() {
        let adj = holm_bonferroni(&[0.04, 0.01, 0.04]).unwrap();
        assert_eq!(adj[0], adj[2]);
        assert!((adj[1] - 0.03).abs() < 1e-15);
        assert_eq!(holm_bonferroni(&[1.0, 1.0]).unwrap(), alloc::vec![1.0, 1.0]);
        assert_eq!(holm_bonferroni(&[1.2]), Err(StatsError::OutOfRangeP(1.2)));
    }
}
