//! Scaling-exponent formulas, numerical pressure derivatives, the dimension
//! spectrum of growth-rate level sets, and the dual upper bound.
//!
//! Everything here is a pure function of a supplied pressure evaluation
//! `q ↦ P(q)`; callers pass either a cached enumeration estimator or a
//! closed-form demo curve.

use crate::error::{Error, Result};
use crate::gibbs::GibbsTable;
use crate::numeric::fmt12;

/// One-sided slope disagreement above which a spectrum point is flagged as
/// sitting near a kink.
pub const KINK_FLAG_THRESHOLD: f64 = 0.05;

/// `τ(t) = (t·P(q) − P(q·t)) / log m`: the scaling spectrum of the level-q
/// measure expressed through the pressure function.
pub fn tau_formula<F: Fn(f64) -> f64>(q: f64, t: f64, pressure: &F, m: usize) -> f64 {
    (t * pressure(q) - pressure(q * t)) / (m as f64).ln()
}

/// Empirical scaling exponent `log Σ w^t / (−n·log m)` of a cylinder table,
/// summing over nonzero weights only.
pub fn tau_empirical(table: &GibbsTable, t: f64, m: usize) -> f64 {
    let logs: Vec<f64> = table
        .weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w.ln())
        .collect();
    let lse = crate::numeric::log_sum_exp_scaled(&logs, t, 1);
    lse / (-(table.level as f64) * (m as f64).ln())
}

/// Central difference with one Richardson step: `(4·D(h/2) − D(h)) / 3`.
pub fn pressure_derivative<F: Fn(f64) -> f64>(pressure: &F, q: f64, h: f64) -> f64 {
    let d = |step: f64| (pressure(q + step) - pressure(q - step)) / (2.0 * step);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// One point of the dimension spectrum.
#[derive(Clone, Copy, Debug)]
pub struct SpectrumPoint {
    pub q: f64,
    /// Growth-rate value α = P′(q).
    pub alpha: f64,
    /// `(−α·q + P(q)) / log m`.
    pub f_alpha: f64,
    /// Residual of the slope identity `P′(q) = (P(q) − log m·τ′(1))/q`,
    /// evaluated with matched finite-difference stencils.
    pub tau_slope_check: f64,
    pub alpha_left: f64,
    pub alpha_right: f64,
    /// One-sided slopes disagree by more than [`KINK_FLAG_THRESHOLD`]; the
    /// closed formulas apply only where the derivative exists.
    pub flagged: bool,
}

/// Evaluate α = P′(q) and the dimension value over a grid. The grid must
/// stay away from 0, where no derivative contract exists.
pub fn dimension_spectrum<F: Fn(f64) -> f64>(
    pressure: &F,
    q_grid: &[f64],
    h: f64,
    m: usize,
) -> Result<Vec<SpectrumPoint>> {
    if q_grid.is_empty() {
        return Err(Error::Input("empty q grid".into()));
    }
    if h <= 0.0 {
        return Err(Error::Input(format!("step h={h} must be positive")));
    }
    if m < 2 {
        return Err(Error::Input(format!(
            "alphabet size m={m} must be at least 2"
        )));
    }
    let log_m = (m as f64).ln();
    let mut out = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        if q.abs() < 1e-9 {
            return Err(Error::Precondition(
                "the spectrum grid must avoid q = 0".into(),
            ));
        }
        let p = pressure(q);
        let alpha = pressure_derivative(pressure, q, h);
        let alpha_left = (p - pressure(q - h)) / h;
        let alpha_right = (pressure(q + h) - p) / h;
        let flagged = (alpha_right - alpha_left).abs() > KINK_FLAG_THRESHOLD;
        let f_alpha = (-alpha * q + p) / log_m;

        // slope of τ in t at t=1, stencil matched to the q-derivative
        let ht = h / q.abs();
        let tau_slope = (tau_formula(q, 1.0 + ht, pressure, m)
            - tau_formula(q, 1.0 - ht, pressure, m))
            / (2.0 * ht);
        let tau_slope_check = alpha - (p - log_m * tau_slope) / q;

        out.push(SpectrumPoint {
            q,
            alpha,
            f_alpha,
            tau_slope_check,
            alpha_left,
            alpha_right,
            flagged,
        });
    }
    Ok(out)
}

/// `min_q (−α·q + P(q)) / log m` over the supplied grid — the tightest of
/// the family of dual upper bounds for the dimension at growth rate α.
pub fn legendre_upper_bound<F: Fn(f64) -> f64>(
    pressure: &F,
    alpha: f64,
    q_grid: &[f64],
    m: usize,
) -> Result<f64> {
    if q_grid.is_empty() {
        return Err(Error::Input("empty q grid".into()));
    }
    let log_m = (m as f64).ln();
    Ok(q_grid
        .iter()
        .map(|&q| (-alpha * q + pressure(q)) / log_m)
        .fold(f64::INFINITY, f64::min))
}

/// `q,alpha,f_alpha,flag` rows; flagged points carry the literal `kink`.
pub fn spectrum_to_csv(points: &[SpectrumPoint]) -> String {
    let mut s = String::from("q,alpha,f_alpha,flag\n");
    for p in points {
        s.push_str(&format!(
            "{},{},{},{}\n",
            fmt12(p.q),
            fmt12(p.alpha),
            fmt12(p.f_alpha),
            if p.flagged { "kink" } else { "" }
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::level_weights;
    use crate::matrix::{Mat, MatrixFamily};
    use crate::numeric::EvalOptions;
    use crate::sft::SubshiftSpec;

    fn p35(q: f64) -> f64 {
        ((q + 1.0) * 2.0f64.ln()).max((1.0 + 3.0f64.powf(q)).ln())
    }

    #[test]
    fn tau_vanishes_at_t_one() {
        for q in [0.5, 1.0, 2.0, -0.7] {
            assert_eq!(tau_formula(q, 1.0, &p35, 2), 0.0);
        }
    }

    #[test]
    fn tau_closed_form_point() {
        // (2·log10 − log82)/log2
        let got = tau_formula(2.0, 2.0, &p35, 2);
        let expect = (2.0 * 10.0f64.ln() - 82.0f64.ln()) / 2.0f64.ln();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn tau_for_constant_pressure_is_linear() {
        let flat = |_: f64| 2.0f64.ln();
        for (q, t) in [(0.5, 2.0), (1.0, 3.0), (2.0, 0.5)] {
            assert!((tau_formula(q, t, &flat, 2) - (t - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn tau_empirical_of_uniform_tables() {
        let spec = SubshiftSpec::full_shift(2).unwrap();
        let fam = MatrixFamily::depth1(
            spec,
            vec![
                Mat::from_rows(&[vec![1.0]]).unwrap(),
                Mat::from_rows(&[vec![1.0]]).unwrap(),
            ],
        )
        .unwrap();
        let table = level_weights(&fam, 5, 1.0, None, &EvalOptions::default()).unwrap();
        for t in [0.5, 2.0, 3.0] {
            assert!((tau_empirical(&table, t, 2) - (t - 1.0)).abs() < 1e-12);
        }
        assert!(tau_empirical(&table, 1.0, 2).abs() < 1e-14);
    }

    #[test]
    fn derivative_on_the_smooth_branch() {
        let got = pressure_derivative(&p35, 2.0, 0.05);
        let expect = 9.0 * 3.0f64.ln() / 10.0;
        assert!((got - expect).abs() < 1e-4, "derivative {got} vs {expect}");

        let flat = |_: f64| 2.0f64.ln();
        assert!(pressure_derivative(&flat, 1.0, 0.05).abs() < 1e-14);
    }

    #[test]
    fn spectrum_values_and_flags() {
        let pts = dimension_spectrum(&p35, &[0.5, 1.0, 2.0], 0.05, 2).unwrap();
        // away from the kink the relation residual is tiny
        assert!(pts[0].tau_slope_check.abs() < 2e-4);
        assert!(pts[2].tau_slope_check.abs() < 2e-4);
        // q = 1 sits on the kink: one-sided slopes split by ≈ 0.131
        assert!(pts[1].flagged);
        assert!((pts[1].alpha_right - pts[1].alpha_left - 0.1309).abs() < 0.02);
        // f(α) at q=2 from the closed form
        assert!((pts[2].f_alpha - 0.469).abs() < 5e-3);

        let flat = |_: f64| 2.0f64.ln();
        let fp = dimension_spectrum(&flat, &[0.5, 1.0, 2.0], 0.05, 2).unwrap();
        for p in &fp {
            assert!(p.alpha.abs() < 1e-12);
            assert!((p.f_alpha - 1.0).abs() < 1e-12);
            assert!(!p.flagged);
        }

        assert!(dimension_spectrum(&p35, &[0.0], 0.05, 2).is_err());
    }

    #[test]
    fn legendre_duality_on_the_smooth_branch() {
        let alpha = pressure_derivative(&p35, 2.0, 0.05);
        let grid: Vec<f64> = (10..=60).map(|i| i as f64 * 0.05).collect();
        let bound = legendre_upper_bound(&p35, alpha, &grid, 2).unwrap();
        let f = (-alpha * 2.0 + p35(2.0)) / 2.0f64.ln();
        assert!((bound - f).abs() < 1e-3, "bound {bound} vs f {f}");
        // constant pressure, α = 0: the whole space
        let flat = |_: f64| 2.0f64.ln();
        let b = legendre_upper_bound(&flat, 0.0, &grid, 2).unwrap();
        assert!((b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slope_relation_holds_on_enumeration_estimates() {
        use crate::demos::Demo;
        use crate::pressure::PressureEvaluator;
        let fam = Demo::Golden.family();
        let eval = PressureEvaluator::new(&fam, 10, &EvalOptions::default()).unwrap();
        let f = |q: f64| eval.estimate(q);
        let pts = dimension_spectrum(&f, &[0.5, 1.0, 2.0], 0.05, 3).unwrap();
        for p in &pts {
            assert!(
                p.tau_slope_check.abs() <= 2e-4,
                "slope relation residual {} at q={}",
                p.tau_slope_check,
                p.q
            );
        }
        // normalized dimension values never exceed the ambient space
        let grid: Vec<f64> = (2..=12).map(|i| 0.25 * i as f64).collect();
        for p in dimension_spectrum(&f, &grid, 0.05, 3).unwrap() {
            assert!(p.f_alpha <= 1.0 + 1e-6, "f(α) = {} at q={}", p.f_alpha, p.q);
        }
    }

    #[test]
    fn spectrum_csv_flags() {
        let pts = dimension_spectrum(&p35, &[0.5, 1.0, 1.5], 0.05, 2).unwrap();
        let csv = spectrum_to_csv(&pts);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "q,alpha,f_alpha,flag");
        assert!(lines[2].ends_with(",kink"));
        assert!(lines[1].ends_with(','));
    }
}
