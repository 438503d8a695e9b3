//! Deterministic log-domain accumulation.
//!
//! All reductions over enumerated words use a balanced pairwise tree whose
//! shape depends only on the slice length, so results are bit-identical no
//! matter how the work is split across threads.

/// Knobs for enumeration-backed operations.
#[derive(Clone, Debug)]
pub struct EvalOptions {
    /// Worker threads for enumeration and reduction. Output is byte-stable
    /// for any value.
    pub threads: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { threads: 1 }
    }
}

impl EvalOptions {
    pub fn with_threads(threads: usize) -> Self {
        EvalOptions {
            threads: threads.max(1),
        }
    }
}

/// Leaf block of the fixed reduction tree.
const LEAF: usize = 64;
/// Below this length, spawning threads is not worth it.
const PAR_MIN: usize = 1 << 16;

/// Pairwise-tree sum of `exp(q·x − shift)` over `terms`.
pub(crate) fn sum_exp_scaled(terms: &[f64], q: f64, shift: f64, threads: usize) -> f64 {
    if terms.len() <= LEAF {
        return terms
            .iter()
            .fold(0.0, |acc, &x| acc + (q * x - shift).exp());
    }
    let mid = terms.len() / 2;
    let (left, right) = terms.split_at(mid);
    if threads > 1 && terms.len() >= PAR_MIN {
        let lt = threads / 2;
        let rt = threads - lt;
        std::thread::scope(|s| {
            let handle = s.spawn(move || sum_exp_scaled(left, q, shift, lt));
            let r = sum_exp_scaled(right, q, shift, rt);
            handle.join().expect("reduction worker panicked") + r
        })
    } else {
        sum_exp_scaled(left, q, shift, 1) + sum_exp_scaled(right, q, shift, 1)
    }
}

/// Pairwise-tree sum of a plain slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `log Σ exp(q·xᵢ)` with a max-shift; `terms` must be nonempty.
pub(crate) fn log_sum_exp_scaled(terms: &[f64], q: f64, threads: usize) -> f64 {
    debug_assert!(!terms.is_empty());
    let extreme = if q >= 0.0 {
        terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    } else {
        terms.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let shift = q * extreme;
    shift + sum_exp_scaled(terms, q, shift, threads).ln()
}

/// Fixed 12-significant-digit formatting used by every CSV and report writer.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Linear-interpolation percentile of a sorted slice (`p` in `[0,1]`).
pub(crate) fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_inputs() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin().abs()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }

    #[test]
    fn log_sum_handles_large_magnitudes() {
        // log(exp(1000) + exp(998)) = 1000 + log(1 + e^-2)
        let terms = [1000.0, 998.0];
        let got = log_sum_exp_scaled(&terms, 1.0, 1);
        let expect = 1000.0 + (1.0 + (-2.0f64).exp()).ln();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn negative_q_uses_min_shift() {
        let terms = [500.0, 700.0];
        let got = log_sum_exp_scaled(&terms, -2.0, 1);
        // -1000 + log(1 + e^-400)
        assert!((got - (-1000.0)).abs() < 1e-12);
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let terms: Vec<f64> = (0..200_000)
            .map(|i| ((i * 37 % 1000) as f64) * 1e-3)
            .collect();
        let s1 = sum_exp_scaled(&terms, 1.5, 0.9, 1);
        let s2 = sum_exp_scaled(&terms, 1.5, 0.9, 2);
        let s8 = sum_exp_scaled(&terms, 1.5, 0.9, 8);
        assert_eq!(s1.to_bits(), s2.to_bits());
        assert_eq!(s1.to_bits(), s8.to_bits());
    }

    #[test]
    fn fmt12_is_stable() {
        assert_eq!(fmt12(std::f64::consts::LN_2), "6.93147180560e-1");
        assert_eq!(fmt12(0.0), "0.00000000000e0");
    }
}
