//! Rational approximations `f/t` of a source distribution: optimal rounding
//! at a fixed denominator, continued-fraction convergents, and scans over
//! `t` for record (best simultaneous) approximations.

use rayon::prelude::*;
use rug::{Float, Integer, Rational};

use crate::bounds::{kl_divergence, Kappa};
use crate::error::{Error, Result};
use crate::precision::{format_sig, integer_pow, rational_pow, Precision};
use crate::prob_model::{FrequencyTable, ProbabilityVector};

/// Result of min-max rounding at one denominator, kept in integer form.
///
/// `errors[i] = t·N_i − f_i·D` where `p_i = N_i / D`, so that
/// `δ_i = errors[i] / (t·D)`.
#[derive(Debug, Clone)]
pub(crate) struct Rounding {
    pub t: u64,
    pub freqs: Vec<u64>,
    pub errors: Vec<Integer>,
}

impl Rounding {
    /// `max_i |t·N_i − f_i·D|`
    pub fn max_abs_error(&self) -> Integer {
        self.errors.iter().map(|e| Integer::from(e.abs_ref())).max().expect("m >= 2")
    }

    pub fn delta_star(&self, p: &ProbabilityVector) -> Rational {
        let scale = Integer::from(p.denominator() * self.t);
        Rational::from((self.max_abs_error(), scale))
    }

    /// `Σ |δ_i|` as an f64, for cheap screening only.
    pub fn l1_error_f64(&self, p: &ProbabilityVector) -> f64 {
        let sum: Integer = self.errors.iter().map(|e| Integer::from(e.abs_ref())).sum();
        Rational::from((sum, Integer::from(p.denominator() * self.t))).to_f64()
    }
}

pub(crate) fn min_max_round(p: &ProbabilityVector, t: u64) -> Result<Rounding> {
    let m = p.len();
    if t < m as u64 {
        return Err(Error::DenominatorTooSmall { t, m });
    }
    let d = p.denominator();
    let mut freqs = Vec::with_capacity(m);
    let mut errors = Vec::with_capacity(m);
    for n in p.numerators() {
        let (floor, rem) = Integer::from(n * t).div_rem_euc(d.clone());
        if floor == 0 {
            // f_i >= 1 is mandatory; the symbol starts over-allocated.
            freqs.push(1u64);
            errors.push(rem - d);
        } else {
            freqs.push(floor.to_u64().expect("floor(t·p_i) < t"));
            errors.push(rem);
        }
    }
    let mut total: u64 = freqs.iter().sum();
    // Each unit moves one error by exactly D; the costs |e_i| are convex in
    // f_i, so handing out (or taking back) units one at a time to the symbol
    // whose error ends up smallest reaches the min-max optimum.
    while total < t {
        let i = (0..m).rev().max_by(|&a, &b| errors[a].cmp(&errors[b])).expect("m >= 2");
        freqs[i] += 1;
        errors[i] -= d;
        total += 1;
    }
    while total > t {
        let i = (0..m)
            .filter(|&i| freqs[i] >= 2)
            .min_by(|&a, &b| errors[a].cmp(&errors[b]))
            .expect("t >= m leaves a symbol with f_i >= 2");
        freqs[i] -= 1;
        errors[i] += d;
        total -= 1;
    }
    Ok(Rounding { t, freqs, errors })
}

/// The table with `Σ f_i = t`, every `f_i ≥ 1`, and the smallest possible
/// `δ* = max_i |p_i − f_i/t|`.
///
/// Floors every `t·p_i`, then hands the leftover units to the largest
/// remainders (largest-remainder apportionment). Symbols whose floor is 0
/// are lifted to 1 and the excess is taken back from the symbols whose
/// error grows least. The result is optimal, with `δ* < 1/t` whenever
/// `t·p_min ≥ 1`.
pub fn round_min_max(p: &ProbabilityVector, t: u64) -> Result<FrequencyTable> {
    let r = min_max_round(p, t)?;
    FrequencyTable::for_source(p, r.freqs)
}

/// Brute-force minimizer of `δ*` over every composition of `t` into `m`
/// positive parts. Ties go to the lexicographically smallest `f`.
pub fn exhaustive_best(p: &ProbabilityVector, t: u64) -> Result<FrequencyTable> {
    let m = p.len();
    if m > 4 || t > 64 {
        return Err(Error::InstanceTooLarge { m, t });
    }
    if t < m as u64 {
        return Err(Error::DenominatorTooSmall { t, m });
    }
    let targets: Vec<Integer> = p.numerators().iter().map(|n| Integer::from(n * t)).collect();
    let mut search =
        Exhaustive { targets: &targets, denom: p.denominator(), current: Vec::with_capacity(m), best: None };
    search.descend(t, Integer::new());
    let (_, freqs) = search.best.expect("at least one composition exists");
    FrequencyTable::for_source(p, freqs)
}

struct Exhaustive<'a> {
    targets: &'a [Integer],
    denom: &'a Integer,
    current: Vec<u64>,
    best: Option<(Integer, Vec<u64>)>,
}

impl Exhaustive<'_> {
    fn descend(&mut self, remaining: u64, worst: Integer) {
        let idx = self.current.len();
        let last = idx + 1 == self.targets.len();
        let upper = if last { remaining } else { remaining - (self.targets.len() - idx - 1) as u64 };
        let lower = if last { remaining } else { 1 };
        for f in lower..=upper {
            let err = (&self.targets[idx] - Integer::from(self.denom * f)).abs();
            let worst = worst.clone().max(err);
            if matches!(&self.best, Some((b, _)) if worst >= *b) {
                continue;
            }
            self.current.push(f);
            if last {
                self.best = Some((worst, self.current.clone()));
            } else {
                self.descend(remaining - f, worst);
            }
            self.current.pop();
        }
    }
}

/// A convergent `numer / denom` of a continued fraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub numer: Integer,
    pub denom: Integer,
}

impl Convergent {
    pub fn value(&self) -> Rational {
        Rational::from((self.numer.clone(), self.denom.clone()))
    }
}

/// Partial quotients `[a0; a1, a2, …]` of a non-negative rational, at most
/// `max_terms` of them.
pub fn continued_fraction(x: &Rational, max_terms: usize) -> Vec<Integer> {
    let mut terms = Vec::new();
    let (mut num, mut den) = (x.numer().clone(), x.denom().clone());
    while terms.len() < max_terms && den != 0 {
        let (a, r) = num.div_rem_euc(den.clone());
        terms.push(a);
        num = std::mem::replace(&mut den, r);
    }
    terms
}

/// Convergents of `x` with denominators up to `max_q`, strictly increasing
/// in denominator. When two consecutive convergents share a denominator
/// (`a1 = 1`), only the later, closer one is kept.
pub fn cf_convergents(x: &Rational, max_q: u64) -> Vec<Convergent> {
    let mut out: Vec<Convergent> = Vec::new();
    let (mut h_prev, mut h) = (Integer::from(0), Integer::from(1));
    let (mut k_prev, mut k) = (Integer::from(1), Integer::from(0));
    let (mut num, mut den) = (x.numer().clone(), x.denom().clone());
    while den != 0 {
        let (a, r) = num.div_rem_euc(den.clone());
        let h_next = Integer::from(&a * &h) + &h_prev;
        let k_next = Integer::from(&a * &k) + &k_prev;
        if k_next > max_q {
            break;
        }
        let conv = Convergent { numer: h_next.clone(), denom: k_next.clone() };
        match out.last_mut() {
            Some(last) if last.denom == conv.denom => *last = conv,
            _ => out.push(conv),
        }
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        num = std::mem::replace(&mut den, r);
    }
    out
}

/// One denominator of a record scan.
#[derive(Debug, Clone)]
pub struct ScanEntry {
    pub t: u64,
    pub freqs: Vec<u64>,
    pub delta_star: Rational,
    /// `t²·δ*` for binary sources, `t^(1+1/m)·δ*` otherwise.
    pub quality: Float,
    /// `δ*` is strictly smaller than at every smaller denominator.
    pub is_record: bool,
    /// `quality` is below the existence constant: `κ` for `m = 2`,
    /// `m/(m+1)` otherwise. Decided exactly, not from `quality`.
    pub beats_fact_constant: bool,
}

/// Every scanned denominator with its record and threshold flags.
#[derive(Debug, Clone)]
pub struct RecordScan {
    pub m: usize,
    pub kappa: Kappa,
    pub entries: Vec<ScanEntry>,
    /// Set when some `t` represents `p` exactly; the scan stops there.
    pub exact_at: Option<u64>,
}

impl RecordScan {
    pub fn records(&self) -> impl Iterator<Item = &ScanEntry> {
        self.entries.iter().filter(|e| e.is_record)
    }

    /// Scanned denominators beating the existence constant.
    pub fn fact_hits(&self) -> usize {
        self.entries.iter().filter(|e| e.beats_fact_constant).count()
    }

    /// Records beating the existence constant.
    pub fn record_fact_hits(&self) -> usize {
        self.records().filter(|e| e.beats_fact_constant).count()
    }

    pub fn entry(&self, t: u64) -> Option<&ScanEntry> {
        let first = self.entries.first()?.t;
        self.entries.get(usize::try_from(t.checked_sub(first)?).ok()?)
    }

    /// CSV rows `t,delta_star_decimal,quality_decimal,is_record,beats_fact_constant`
    /// with 30 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Format(e.to_string());
        csv.write_record(["t", "delta_star_decimal", "quality_decimal", "is_record", "beats_fact_constant"])
            .map_err(io)?;
        let bits = Precision::digits(40).bits();
        for e in &self.entries {
            csv.write_record([
                e.t.to_string(),
                format_sig(&Float::with_val(bits, &e.delta_star), 30),
                format_sig(&e.quality, 30),
                e.is_record.to_string(),
                e.beats_fact_constant.to_string(),
            ])
            .map_err(io)?;
        }
        csv.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

/// `quality` of an approximation, evaluated in high precision.
pub fn approximation_quality(m: usize, t: u64, delta_star: &Rational, prec: Precision) -> Float {
    if m == 2 {
        prec.float(Rational::from(delta_star * Integer::from(t).square()))
    } else {
        let root = prec.float(t).root(m as u32);
        root * prec.float(Rational::from(delta_star * t))
    }
}

/// Exact test of `quality < κ` (m = 2) or `quality < m/(m+1)` (m > 2),
/// comparing integer powers so no rounding is involved.
pub fn beats_fact_constant(m: usize, t: u64, delta_star: &Rational, kappa: Kappa) -> bool {
    if m == 2 {
        let q = Rational::from(delta_star * Integer::from(t).square());
        q.square() < kappa.squared()
    } else {
        let m32 = m as u32;
        let lhs = rational_pow(delta_star, m32) * integer_pow(t, m32 + 1);
        let rhs = rational_pow(&Rational::from((m32, m32 + 1)), m32);
        lhs < rhs
    }
}

/// Scans `t = m..=t_max`, rounding optimally at each `t`, and flags the
/// record denominators: those whose `δ*` beats every smaller `t`. Records are
/// the best simultaneous approximations; for a binary source they are the
/// continued-fraction convergents (plus admissible semiconvergents).
///
/// A denominator that represents `p` exactly ends the scan.
pub fn record_scan(p: &ProbabilityVector, t_max: u64, kappa: Kappa, prec: Precision) -> Result<RecordScan> {
    let m = p.len();
    if t_max < m as u64 {
        return Err(Error::DenominatorTooSmall { t: t_max, m });
    }
    let roundings: Vec<Rounding> =
        (m as u64..=t_max).into_par_iter().map(|t| min_max_round(p, t)).collect::<Result<_>>()?;

    let mut entries = Vec::with_capacity(roundings.len());
    let mut best: Option<Rational> = None;
    let mut exact_at = None;
    for r in roundings {
        let delta_star = r.delta_star(p);
        let is_record = best.as_ref().is_none_or(|b| delta_star < *b);
        if is_record {
            best = Some(delta_star.clone());
        }
        let exact = delta_star == 0;
        entries.push(ScanEntry {
            quality: approximation_quality(m, r.t, &delta_star, prec),
            beats_fact_constant: beats_fact_constant(m, r.t, &delta_star, kappa),
            t: r.t,
            freqs: r.freqs,
            delta_star,
            is_record,
        });
        if exact {
            exact_at = Some(r.t);
            break;
        }
    }
    Ok(RecordScan { m, kappa, entries, exact_at })
}

/// What [`best_table_under_width`] minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MinDelta,
    MinDivergence,
}

/// Largest width accepted by the width-constrained scans.
pub const MAX_SCAN_WIDTH: u32 = 40;

/// Best optimally-rounded table over every `t` with `m ≤ t ≤ 2^width`.
/// Ties go to the smallest `t`.
pub fn best_table_under_width(
    p: &ProbabilityVector,
    width: u32,
    objective: Objective,
    prec: Precision,
) -> Result<FrequencyTable> {
    let m = p.len();
    if width > MAX_SCAN_WIDTH {
        return Err(Error::PreconditionViolated(format!(
            "width {width} exceeds the scan limit of {MAX_SCAN_WIDTH} bits"
        )));
    }
    let limit = 1u64 << width;
    if limit < m as u64 {
        return Err(Error::WidthTooSmall { width, m });
    }
    let best = match objective {
        Objective::MinDelta => scan_min_delta(p, m as u64, limit)?,
        Objective::MinDivergence => scan_min_divergence(p, m as u64, limit, prec)?.0,
    };
    FrequencyTable::for_source(p, best.freqs)
}

fn scan_min_delta(p: &ProbabilityVector, from: u64, to: u64) -> Result<Rounding> {
    let mut best: Option<(Integer, Rounding)> = None;
    for t in from..=to {
        let r = min_max_round(p, t)?;
        let err = r.max_abs_error();
        // δ* = err / (t·D): compare err_a · t_b < err_b · t_a.
        let better = match &best {
            None => true,
            Some((b_err, b)) => Integer::from(&err * b.t) < Integer::from(b_err * t),
        };
        let exact = err == 0;
        if better {
            best = Some((err, r));
        }
        if exact {
            break;
        }
    }
    Ok(best.expect("non-empty range").1)
}

/// Smallest `D(p‖f/t)` over `t ∈ [from, to]` with the divergence of the winner.
pub(crate) fn scan_min_divergence(
    p: &ProbabilityVector,
    from: u64,
    to: u64,
    prec: Precision,
) -> Result<(Rounding, Float)> {
    let mut best: Option<(Rounding, Float, f64)> = None;
    for t in from..=to {
        let r = min_max_round(p, t)?;
        if let Some((_, _, best_f64)) = &best {
            // Pinsker: D ≥ ½‖p − p̂‖₁², so anything whose lower bound clearly
            // exceeds the incumbent cannot win.
            let l1 = r.l1_error_f64(p);
            if 0.5 * l1 * l1 * (1.0 - 1e-9) > *best_f64 {
                continue;
            }
        }
        let table = FrequencyTable::for_source(p, r.freqs.clone())?;
        let d = kl_divergence(p, &table, prec)?.nats;
        if best.as_ref().is_none_or(|(_, b, _)| d < *b) {
            let exact = d.is_zero();
            let d64 = d.to_f64();
            best = Some((r, d, d64));
            if exact {
                break;
            }
        }
    }
    let (r, d, _) = best.expect("non-empty range");
    Ok((r, d))
}
