//! Redundancy of a quantized model and the closed-form bounds on it.
//!
//! All bounds are in nats per symbol: they rest on `−ln(1 − x) ≤ x/(1 − x)`,
//! which holds for the natural logarithm. [`kl_divergence`] also reports
//! bits for comparison against coder output.
//!
//! | bound | value |
//! |---|---|
//! | [`lemma1_bound`] | `m·δ* / (1 − δ*/p_min)` |
//! | [`theorem1_bound`] | `(m/2t) / (1 − 1/(2t·p_min))` |
//! | [`theorem2_bound_mary`] | `(m/t^(1+1/m)) / (1 − 1/(t^(1+1/m)·p_min))` |
//! | [`theorem2_bound_binary`] | `(2κ/t²) / (1 − κ/(t²·p_min))` |

mod plan;
mod report;

pub use plan::{plan_precision, PlanMode, PrecisionPlan};
pub use report::{bound_report, Applicability, BoundReport};

use rug::float::Constant;
use rug::{Float, Integer, Rational};

use crate::approx::continued_fraction;
use crate::error::{Error, Result};
use crate::precision::{integer_pow, rational_pow, Precision};
use crate::prob_model::{FrequencyTable, ProbabilityVector};

/// The binary approximation constant: `5^(−1/2)` for numbers equivalent to
/// the golden section `ψ = (√5 − 1)/2`, `2^(−3/2)` for everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Kappa {
    Golden,
    #[default]
    Generic,
}

impl Kappa {
    /// `κ²`, exact.
    pub fn squared(self) -> Rational {
        match self {
            Kappa::Golden => Rational::from((1, 5)),
            Kappa::Generic => Rational::from((1, 8)),
        }
    }

    pub fn value(self, prec: Precision) -> Float {
        prec.float(self.squared()).sqrt()
    }

    pub fn name(self) -> &'static str {
        match self {
            Kappa::Golden => "golden",
            Kappa::Generic => "generic",
        }
    }
}

/// Golden-section equivalence cannot be decided from a finite expansion, so
/// the caller states it.
pub fn kappa_select(golden_equivalent: bool) -> Kappa {
    if golden_equivalent {
        Kappa::Golden
    } else {
        Kappa::Generic
    }
}

/// Minimum run of trailing partial quotients equal to 1 for
/// [`looks_golden_equivalent`].
pub const GOLDEN_TAIL: usize = 20;

/// Heuristic: `x` looks equivalent to `ψ` when the trustworthy part of its
/// continued fraction ends in at least [`GOLDEN_TAIL`] ones. A rational
/// surrogate `a/b` is trusted up to convergent denominators `q ≤ √(b/2^20)`.
pub fn looks_golden_equivalent(x: &Rational) -> bool {
    // Partial quotients near q ≈ √denominator already reflect the truncation.
    let limit = Integer::from(x.denom() >> 20u32).sqrt();
    let terms = continued_fraction(x, usize::MAX);
    let (mut k_prev, mut k) = (Integer::from(0), Integer::from(1));
    let mut trusted = 0;
    for a in &terms {
        let next = Integer::from(a * &k) + &k_prev;
        if next > limit {
            break;
        }
        k_prev = std::mem::replace(&mut k, next);
        trusted += 1;
    }
    // terms[0] is the integer part and does not count toward the tail.
    trusted > GOLDEN_TAIL && terms[trusted - GOLDEN_TAIL..trusted].iter().all(|a| *a == 1)
}

/// `D(p‖p̂)` in both units.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub nats: Float,
    pub bits: Float,
}

/// `D(p‖f/t) = Σ p_i ln(p_i·t/f_i)`, each term evaluated as
/// `p_i · ln_1p(u_i)` with `u_i = (p_i·t − f_i)/f_i` formed exactly.
pub fn kl_divergence(p: &ProbabilityVector, table: &FrequencyTable, prec: Precision) -> Result<Divergence> {
    if p.len() != table.len() {
        return Err(Error::DimensionMismatch { source_len: p.len(), table_len: table.len() });
    }
    let d = p.denominator();
    let t = table.total();
    let mut nats = prec.float(0);
    for ((n, &f), prob) in p.numerators().iter().zip(table.freqs()).zip(p.probs()) {
        if f == 0 {
            return Err(Error::ZeroFrequency(0));
        }
        let scale = Integer::from(d * f);
        let u = Rational::from((Integer::from(n * t) - &scale, scale));
        if u != 0 {
            nats += prec.float(&u).ln_1p() * prec.float(prob);
        }
    }
    let bits = Float::with_val(prec.bits(), &nats / prec.float(Constant::Log2));
    Ok(Divergence { nats, bits })
}

/// `m·δ*/(1 − δ*/p_min)`, exact. Requires `δ*/p_min < 1`.
pub fn lemma1_bound(m: usize, delta_star: &Rational, p_min: &Rational) -> Result<Rational> {
    let ratio = Rational::from(delta_star / p_min);
    if ratio >= 1 {
        return Err(Error::RatioNotLessThanOne(ratio.to_string()));
    }
    Ok(Rational::from(delta_star * m as u64) / (1u32 - ratio))
}

/// [`lemma1_bound`] at an irrational `δ*`.
pub fn lemma1_bound_real(m: usize, delta_star: &Float, p_min: &Rational, prec: Precision) -> Result<Float> {
    let ratio = prec.float(delta_star / prec.float(p_min));
    if ratio >= 1 {
        return Err(Error::RatioNotLessThanOne(ratio.to_string_radix(10, Some(12))));
    }
    let numer = prec.float(delta_star * m as u64);
    Ok(numer / (1u32 - ratio))
}

/// `(m/(2t)) / (1 − 1/(2t·p_min))`, exact. Requires `2t·p_min > 1`.
pub fn theorem1_bound(m: usize, t: u64, p_min: &Rational) -> Result<Rational> {
    let two_t = Integer::from(t) * 2u32;
    let scaled = Rational::from(p_min * &two_t);
    if scaled <= 1 {
        return Err(Error::PreconditionViolated(format!("2·t·p_min = {scaled} is not above 1")));
    }
    let lead = Rational::from((Integer::from(m), two_t));
    Ok(lead / (1u32 - scaled.recip()))
}

/// `(m/t^(1+1/m)) / (1 − 1/(t^(1+1/m)·p_min))` for `m > 2`. Requires
/// `t^(1+1/m)·p_min > 1`, checked exactly as `t^(m+1)·p_min^m > 1`.
pub fn theorem2_bound_mary(m: usize, t: u64, p_min: &Rational, prec: Precision) -> Result<Float> {
    if m <= 2 {
        return Err(Error::AlphabetNotMary(m));
    }
    let m32 = m as u32;
    let exact = rational_pow(p_min, m32) * integer_pow(t, m32 + 1);
    if exact <= 1 {
        return Err(Error::PreconditionViolated("t^(1+1/m)·p_min is not above 1".into()));
    }
    let scale = prec.float(t).root(m32) * t;
    let lead = prec.float(m as u64) / &scale;
    let tail = 1u32 - (scale * prec.float(p_min)).recip();
    Ok(lead / tail)
}

/// `(2κ/t²) / (1 − κ/(t²·p_min))`. Requires `t²·p_min > κ`.
pub fn theorem2_bound_binary(t: u64, p_min: &Rational, kappa: Kappa, prec: Precision) -> Result<Float> {
    let t2 = Integer::from(t).square();
    let scaled = Rational::from(p_min * &t2);
    if scaled.clone().square() <= kappa.squared() {
        return Err(Error::PreconditionViolated(format!("t²·p_min = {scaled} is not above kappa")));
    }
    let k = kappa.value(prec);
    let lead = prec.float(&k * 2u32) / prec.float(&t2);
    let tail = 1u32 - k / prec.float(&scaled);
    Ok(lead / tail)
}

/// A width guaranteed by a corollary, with the real-valued bound it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthBound {
    pub width: u32,
    /// `log₂(m/R + 1/p_min)`
    pub raw: f64,
}

fn corollary_argument(scale: u64, target: &Rational, p_min: &Rational) -> Result<Rational> {
    if *target <= 0 {
        return Err(Error::NonPositiveTarget);
    }
    Ok(Rational::from((scale, 1u32)) / target + Rational::from(p_min.recip_ref()))
}

fn log2_f64(x: &Rational) -> f64 {
    let f = Float::with_val(128, x);
    f.log2().to_f64()
}

/// Largest integer `W` strictly below `log₂(m/R + 1/p_min)`, at least 1.
/// Decided exactly by comparing `2^W` with `m/R + 1/p_min`.
pub fn corollary1_width(m: usize, target: &Rational, p_min: &Rational) -> Result<WidthBound> {
    let x = corollary_argument(m as u64, target, p_min)?;
    let mut width = 0u32;
    while Integer::from(1) << (width + 1) < x {
        width += 1;
    }
    Ok(WidthBound { width: width.max(1), raw: log2_f64(&x) })
}

/// The existence bound on `W`:
/// `(m/(m+1))·log₂(m/R + 1/p_min) + 1` for `m > 2`, and
/// `½·log₂(2/R + 1/p_min) + ½·log₂(4κ)` for `m = 2`.
pub fn corollary2_width(m: usize, target: &Rational, p_min: &Rational, kappa: Option<Kappa>) -> Result<f64> {
    let x = corollary_argument(m as u64, target, p_min)?;
    match (m, kappa) {
        (2, Some(k)) => {
            // log₂(4κ) = 2 + ½·log₂(κ²)
            let log_4k = 2.0 + 0.5 * log2_f64(&k.squared());
            Ok(0.5 * log2_f64(&x) + 0.5 * log_4k)
        }
        (2, None) => Err(Error::KappaMissing),
        (_, None) => Ok(m as f64 / (m as f64 + 1.0) * log2_f64(&x) + 1.0),
        (_, Some(_)) => Err(Error::PreconditionViolated("kappa applies only to binary sources".into())),
    }
}
