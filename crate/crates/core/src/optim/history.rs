use std::collections::VecDeque;

use crate::error::{Error, Result};

/// The last `H` iterates with their gradients.
#[derive(Clone, Debug, Default)]
pub struct IterateHistory {
    capacity: usize,
    entries: VecDeque<(Vec<f64>, Vec<f64>)>,
}

impl IterateHistory {
    pub fn new(capacity: usize) -> Self {
        IterateHistory {
            capacity: capacity.max(1),
            entries: VecDeque::with_capacity(capacity.max(1)),
        }
    }

    /// Appends `(λ, ∇g(λ))`, ignoring a repeat of the previous `λ`.
    pub fn push(&mut self, lambda: &[f64], grad: &[f64]) {
        if self.entries.back().is_some_and(|(l, _)| l.as_slice() == lambda) {
            return;
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((lambda.to_vec(), grad.to_vec()));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Vec<f64>, Vec<f64>)> {
        self.entries.iter()
    }
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// `L_t = max_s ‖∇g(λ_s) − ∇g(λ_{s−1})‖ / ‖λ_s − λ_{s−1}‖` over consecutive
/// history entries, skipping pairs closer than `1e-15`.
pub fn estimate_l(history: &IterateHistory) -> Result<f64> {
    if history.len() < 2 {
        return Err(Error::InsufficientHistory);
    }
    let mut best = 0.0f64;
    let mut prev: Option<&(Vec<f64>, Vec<f64>)> = None;
    for cur in history.iter() {
        if let Some((l0, g0)) = prev {
            let dl = diff_norm(&cur.0, l0);
            if dl >= 1e-15 {
                best = best.max(diff_norm(&cur.1, g0) / dl);
            }
        }
        prev = Some(cur);
    }
    Ok(best)
}

/// Starting step: `η_min` during the first `H` iterations, then
/// `min(1/L_t, η_max)`.
pub fn initial_step(t: usize, h: usize, eta_min: f64, eta_max: f64, l_t: Option<f64>) -> f64 {
    if t <= h {
        return eta_min;
    }
    match l_t {
        Some(l) if l > 0.0 => (1.0 / l).min(eta_max),
        Some(_) => eta_max,
        None => eta_min,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_quotient() {
        let mut h = IterateHistory::new(10);
        h.push(&[0.0, 0.0], &[0.0, 0.0]);
        h.push(&[0.5, 0.0], &[1.0, 0.0]);
        assert_eq!(estimate_l(&h).unwrap(), 2.0);
    }

    #[test]
    fn identical_gradients() {
        let mut h = IterateHistory::new(10);
        h.push(&[0.0], &[3.0]);
        h.push(&[1.0], &[3.0]);
        assert_eq!(estimate_l(&h).unwrap(), 0.0);
    }

    #[test]
    fn max_of_quotients() {
        let mut h = IterateHistory::new(10);
        // quotients 2, 5, 3
        h.push(&[0.0], &[0.0]);
        h.push(&[1.0], &[2.0]);
        h.push(&[2.0], &[7.0]);
        h.push(&[3.0], &[10.0]);
        assert_eq!(estimate_l(&h).unwrap(), 5.0);
    }

    #[test]
    fn needs_two_entries() {
        let mut h = IterateHistory::new(3);
        assert!(matches!(estimate_l(&h), Err(Error::InsufficientHistory)));
        h.push(&[1.0], &[1.0]);
        h.push(&[1.0], &[2.0]);
        assert_eq!(h.len(), 1);
    }

    #[test]
    fn ring_buffer_capacity() {
        let mut h = IterateHistory::new(2);
        for k in 0..5 {
            h.push(&[k as f64], &[0.0]);
        }
        assert_eq!(h.len(), 2);
        assert_eq!(h.iter().next().unwrap().0, vec![3.0]);
    }

    #[test]
    fn step_rules() {
        assert_eq!(initial_step(1, 10, 1e-6, 1.0, Some(3.0)), 1e-6);
        assert_eq!(initial_step(20, 10, 1e-6, 1.0, Some(100.0)), 0.01);
        assert_eq!(initial_step(20, 10, 1e-6, 1.0, Some(0.5)), 1.0);
    }
}
