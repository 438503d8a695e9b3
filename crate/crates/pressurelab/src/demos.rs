//! Built-in demo systems.
//!
//! * `ex35` — two diagonal 2×2 matrices on the full 2-shift. The pressure
//!   has the closed form `max{(q+1)·log 2, log(1+3^q)}`, non-differentiable
//!   at q = 1, and the symbol sum is reducible, so the bridging check fails.
//! * `ex36` — an upper-triangular unipotent matrix plus a positive matrix.
//!   `‖M_{1…1}‖` grows linearly, which kills the lower quasi-Bernoulli
//!   bound while the upper one survives.
//! * `golden` — the three 2×2 matrices arising from the golden-ratio
//!   Bernoulli convolution rewritten over a 3-letter alphabet; bridging
//!   holds at horizon 1.
//! * `scalar` — unit scalars on the full 2-shift: pressure is log 2.
//! * `goldenmean_sft` — unit scalars over the golden-mean shift: pressure
//!   is the log of the golden ratio at every exponent.

use crate::error::{Error, Result};
use crate::matrix::{Mat, MatrixFamily};
use crate::pressure::{Method, PressureResult};
use crate::sft::SubshiftSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Demo {
    Ex35,
    Ex36,
    Golden,
    Scalar,
    GoldenmeanSft,
}

pub const DEMO_NAMES: [&str; 5] = ["ex35", "ex36", "golden", "scalar", "goldenmean_sft"];

impl Demo {
    pub fn parse(name: &str) -> Result<Demo> {
        match name {
            "ex35" => Ok(Demo::Ex35),
            "ex36" => Ok(Demo::Ex36),
            "golden" => Ok(Demo::Golden),
            "scalar" => Ok(Demo::Scalar),
            "goldenmean_sft" => Ok(Demo::GoldenmeanSft),
            other => Err(Error::Input(format!(
                "unknown demo '{other}'; available: {}",
                DEMO_NAMES.join(", ")
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Demo::Ex35 => "ex35",
            Demo::Ex36 => "ex36",
            Demo::Golden => "golden",
            Demo::Scalar => "scalar",
            Demo::GoldenmeanSft => "goldenmean_sft",
        }
    }

    pub fn family(&self) -> MatrixFamily {
        match self {
            Demo::Ex35 => {
                let spec = SubshiftSpec::full_shift(2).expect("valid spec");
                MatrixFamily::depth1(
                    spec,
                    vec![
                        Mat::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).expect("valid"),
                        Mat::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]]).expect("valid"),
                    ],
                )
                .expect("valid family")
            }
            Demo::Ex36 => {
                let spec = SubshiftSpec::full_shift(2).expect("valid spec");
                MatrixFamily::depth1(
                    spec,
                    vec![
                        Mat::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).expect("valid"),
                        Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).expect("valid"),
                    ],
                )
                .expect("valid family")
            }
            Demo::Golden => {
                let spec = SubshiftSpec::full_shift(3).expect("valid spec");
                MatrixFamily::depth1(
                    spec,
                    vec![
                        Mat::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).expect("valid"),
                        Mat::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).expect("valid"),
                        Mat::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).expect("valid"),
                    ],
                )
                .expect("valid family")
            }
            Demo::Scalar => {
                let spec = SubshiftSpec::full_shift(2).expect("valid spec");
                MatrixFamily::depth1(
                    spec,
                    vec![
                        Mat::from_rows(&[vec![1.0]]).expect("valid"),
                        Mat::from_rows(&[vec![1.0]]).expect("valid"),
                    ],
                )
                .expect("valid family")
            }
            Demo::GoldenmeanSft => {
                let spec = SubshiftSpec::new(2, &[vec![1, 1], vec![1, 0]]).expect("valid spec");
                MatrixFamily::depth1(
                    spec,
                    vec![
                        Mat::from_rows(&[vec![1.0]]).expect("valid"),
                        Mat::from_rows(&[vec![1.0]]).expect("valid"),
                    ],
                )
                .expect("valid family")
            }
        }
    }

    /// Exact pressure function, where one is known.
    pub fn closed_form(&self) -> Option<fn(f64) -> f64> {
        match self {
            Demo::Ex35 => Some(ex35_pressure),
            Demo::Scalar => Some(scalar_pressure),
            Demo::GoldenmeanSft => Some(goldenmean_pressure),
            _ => None,
        }
    }
}

/// `max{(q+1)·log 2, log(1 + 3^q)}`.
pub fn ex35_pressure(q: f64) -> f64 {
    ((q + 1.0) * 2.0f64.ln()).max((1.0 + 3.0f64.powf(q)).ln())
}

fn scalar_pressure(_q: f64) -> f64 {
    2.0f64.ln()
}

fn goldenmean_pressure(_q: f64) -> f64 {
    ((1.0 + 5.0f64.sqrt()) / 2.0).ln()
}

/// Exact partition sum for `ex35`: norms depend only on the count of
/// second symbols, so `s_n(q) = Σ_k C(n,k)·(2ⁿ + 3^k)^q`. Serves as an
/// enumeration-independent oracle.
pub fn ex35_partition_sum(n: usize, q: f64) -> f64 {
    let mut binom = 1.0f64;
    let mut total = 0.0;
    let two_n = 2.0f64.powi(n as i32);
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        total += binom * (two_n + 3.0f64.powi(k as i32)).powf(q);
    }
    total
}

/// Sample a closed-form pressure curve into `PressureResult`s (no bracket,
/// no enumeration level).
pub fn closed_form_curve(pressure: fn(f64) -> f64, q_grid: &[f64]) -> Vec<PressureResult> {
    q_grid
        .iter()
        .map(|&q| PressureResult {
            q,
            estimate: pressure(q),
            lower: None,
            upper: None,
            n_used: 0,
            method: Method::ClosedFormDemo,
        })
        .collect()
}

/// Exact integer norms for the `ex36` decay law: returns
/// `(‖M₁^{2n}‖, ‖M₁ⁿ‖²)` computed in integer arithmetic.
pub fn ex36_norm_ratio(n: u32) -> (u64, u64) {
    fn unipotent_norm(n: u32) -> u64 {
        // norm of [[1,1],[0,1]]^n by exact integer powering
        let mut p = [1u64, 0, 0, 1];
        for _ in 0..n {
            p = [p[0], p[0] + p[1], p[2], p[2] + p[3]];
        }
        p.iter().sum()
    }
    let single = unipotent_norm(n);
    (unipotent_norm(2 * n), single * single)
}
