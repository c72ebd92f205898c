//! Exact source distributions, quantized frequency tables and the error and
//! width quantities derived from them.

use std::fmt::Write as _;
use std::str::FromStr;

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::precision::format_rational_sig;

/// Digits carried by the irrational presets. Their rational surrogates
/// have denominators around 10^60, far beyond the square of any scan
/// horizon used here.
pub const PRESET_DIGITS: u32 = 60;

/// Parses `7/10`, `-3/4`, `0.7`, `1e-5` or `2.5E+3` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = Integer::from_str(num.trim()).map_err(|_| bad())?;
        let den = Integer::from_str(den.trim()).map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Rational::from((num, den)));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp = s[pos + 1..].parse::<i32>().map_err(|_| bad())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let joined = format!("{int_part}{frac_part}");
    let mut value = Rational::from(Integer::from_str(&joined).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let pow = Integer::from(Integer::u_pow_u(10, scale.unsigned_abs()));
    if scale >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// A memoryless source distribution held as exact rationals.
///
/// The probabilities are also kept over a common denominator so that
/// `t · p_i` can be split into integer and fractional parts without
/// building intermediate rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbabilityVector {
    probs: Vec<Rational>,
    numerators: Vec<Integer>,
    denominator: Integer,
    p_min: Rational,
}

impl ProbabilityVector {
    /// Builds a distribution whose entries must be positive and sum to 1
    /// exactly.
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::AlphabetTooSmall(probs.len()));
        }
        if let Some(bad) = probs.iter().find(|p| **p <= 0) {
            return Err(Error::NonPositiveProbability(bad.to_string()));
        }
        let sum: Rational = probs.iter().sum();
        if sum != 1 {
            return Err(Error::SumOutOfTolerance(sum.to_string()));
        }
        let mut denominator = Integer::from(1);
        for p in &probs {
            denominator.lcm_mut(p.denom());
        }
        let numerators = probs.iter().map(|p| p.numer() * Integer::from(&denominator / p.denom())).collect();
        let p_min = probs.iter().min().cloned().expect("m >= 2");
        Ok(ProbabilityVector { probs, numerators, denominator, p_min })
    }

    /// Normalizes positive integer weights into a distribution.
    pub fn from_weights<I>(weights: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<Integer>,
    {
        let weights: Vec<Integer> = weights.into_iter().map(Into::into).collect();
        if let Some(bad) = weights.iter().find(|w| **w <= 0) {
            return Err(Error::NonPositiveProbability(bad.to_string()));
        }
        let total: Integer = weights.iter().sum();
        Self::new(weights.into_iter().map(|w| Rational::from((w, total.clone()))).collect())
    }

    /// Parses decimal or fractional entries. A raw sum within 10⁻⁹ of 1 is
    /// renormalized proportionally; anything further off is rejected.
    pub fn parse<S: AsRef<str>>(entries: &[S]) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::AlphabetTooSmall(entries.len()));
        }
        let probs = entries.iter().map(|e| parse_rational(e.as_ref())).collect::<Result<Vec<_>>>()?;
        if let Some((raw, _)) = entries.iter().zip(&probs).find(|(_, p)| **p <= 0) {
            return Err(Error::NonPositiveProbability(raw.as_ref().trim().to_string()));
        }
        let sum: Rational = probs.iter().sum();
        let tolerance = Rational::from((1, 1_000_000_000));
        if Rational::from(&sum - 1u32).abs() >= tolerance {
            return Err(Error::SumOutOfTolerance(format_rational_sig(&sum, 12)));
        }
        if sum == 1 {
            Self::new(probs)
        } else {
            Self::new(probs.into_iter().map(|p| p / &sum).collect())
        }
    }

    /// `(ψ, 1 − ψ)` with `ψ = (√5 − 1)/2`, truncated to `digits` decimals.
    pub fn golden(digits: u32) -> Self {
        let scale = Integer::from(Integer::u_pow_u(10, digits));
        let sqrt5 = (Integer::from(5u32 * &scale) * &scale).sqrt();
        let psi = Rational::from((sqrt5 - &scale, Integer::from(2u32 * &scale)));
        let rest = Rational::from(1u32 - &psi);
        Self::new(vec![psi, rest]).expect("golden surrogate is a distribution")
    }

    /// `(√2 − 1, 2 − √2)`, truncated to `digits` decimals.
    pub fn silver(digits: u32) -> Self {
        let scale = Integer::from(Integer::u_pow_u(10, digits));
        let sqrt2 = (Integer::from(2u32 * &scale) * &scale).sqrt();
        let a = Rational::from((sqrt2 - &scale, scale));
        let rest = Rational::from(1u32 - &a);
        Self::new(vec![a, rest]).expect("silver surrogate is a distribution")
    }

    /// `(√2 − 1, 2 − √3, √3 − √2)`: three entries with {1, √2, √3}
    /// linearly independent over the rationals.
    pub fn surd3(digits: u32) -> Self {
        let scale = Integer::from(Integer::u_pow_u(10, digits));
        let square = Integer::from(&scale * &scale);
        let s2 = Integer::from(2u32 * &square).sqrt();
        let s3 = Integer::from(3u32 * &square).sqrt();
        let a = Rational::from((Integer::from(&s2 - &scale), scale.clone()));
        let b = Rational::from((Integer::from(2u32 * &scale) - &s3, scale.clone()));
        let c = Rational::from((s3 - s2, scale));
        Self::new(vec![a, b, c]).expect("surd surrogate is a distribution")
    }

    /// Named irrational presets: `golden`, `silver`, `surd3`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "golden" => Some(Self::golden(PRESET_DIGITS)),
            "silver" => Some(Self::silver(PRESET_DIGITS)),
            "surd3" => Some(Self::surd3(PRESET_DIGITS)),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn p_min(&self) -> &Rational {
        &self.p_min
    }

    /// `p_i = numerators()[i] / denominator()`.
    pub fn numerators(&self) -> &[Integer] {
        &self.numerators
    }

    pub fn denominator(&self) -> &Integer {
        &self.denominator
    }

    /// Symbol indices by ascending probability, ties by ascending index.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.probs[a].cmp(&self.probs[b]));
        order
    }
}

/// Integer frequencies `f_i ≥ 1` with common denominator `t = Σ f_i`.
///
/// `order` lists symbol indices in the order their intervals are laid out;
/// `cum[k]` is the inclusive prefix sum of `f` over `order[..=k]`, so symbol
/// `order[k]` owns `[cum[k] − f, cum[k])` of `[0, t)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrequencyTable {
    freqs: Vec<u64>,
    total: u64,
    order: Vec<usize>,
    cum: Vec<u64>,
    width_bits: u32,
}

impl FrequencyTable {
    /// Table with intervals laid out in symbol-index order.
    pub fn new(freqs: Vec<u64>) -> Result<Self> {
        let order = (0..freqs.len()).collect();
        Self::with_order(freqs, order)
    }

    pub fn with_order(freqs: Vec<u64>, order: Vec<usize>) -> Result<Self> {
        let m = freqs.len();
        if m < 2 {
            return Err(Error::AlphabetTooSmall(m));
        }
        if let Some(i) = freqs.iter().position(|&f| f == 0) {
            return Err(Error::ZeroFrequency(i));
        }
        if order.len() != m {
            return Err(Error::InvalidTable(format!("order has {} entries for {m} symbols", order.len())));
        }
        let mut seen = vec![false; m];
        for &s in &order {
            if s >= m || std::mem::replace(&mut seen[s], true) {
                return Err(Error::InvalidTable("order is not a permutation".into()));
            }
        }
        let mut cum = Vec::with_capacity(m);
        let mut acc = 0u64;
        for &s in &order {
            acc =
                acc.checked_add(freqs[s]).ok_or_else(|| Error::InvalidTable("frequency total overflows u64".into()))?;
            cum.push(acc);
        }
        Ok(FrequencyTable { width_bits: register_width(acc), total: acc, freqs, order, cum })
    }

    /// Table laid out in the source's canonical (ascending probability) order.
    pub fn for_source(p: &ProbabilityVector, freqs: Vec<u64>) -> Result<Self> {
        if freqs.len() != p.len() {
            return Err(Error::DimensionMismatch { source_len: p.len(), table_len: freqs.len() });
        }
        Self::with_order(freqs, p.canonical_order())
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn freqs(&self) -> &[u64] {
        &self.freqs
    }

    /// The common denominator `t`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn cumulative(&self) -> &[u64] {
        &self.cum
    }

    pub fn width_bits(&self) -> u32 {
        self.width_bits
    }

    /// `p̂_i = f_i / t`.
    pub fn approx_prob(&self, symbol: usize) -> Rational {
        Rational::from((self.freqs[symbol], self.total))
    }

    /// Serializes to the line-oriented table format:
    ///
    /// ```text
    /// # delta_star = 1/20 ~ 5.00000000000000000000000000000e-2
    /// m t W
    /// symbol_index f_i s_i      (one line per symbol, canonical order)
    /// ```
    pub fn to_text(&self, delta_star: Option<&Rational>) -> String {
        let mut out = String::new();
        if let Some(d) = delta_star {
            writeln!(out, "# delta_star = {d} ~ {}", format_rational_sig(d, 30)).unwrap();
        }
        writeln!(out, "{} {} {}", self.len(), self.total, self.width_bits).unwrap();
        for (&s, &c) in self.order.iter().zip(&self.cum) {
            writeln!(out, "{s} {} {c}", self.freqs[s]).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let fields = |line: &str| -> Result<Vec<u64>> {
            line.split_whitespace()
                .map(|f| f.parse::<u64>().map_err(|_| Error::Format(format!("bad table field `{f}`"))))
                .collect()
        };
        let header = fields(lines.next().ok_or_else(|| Error::Format("empty table".into()))?)?;
        let [m, t, width] = header[..] else {
            return Err(Error::Format("table header must be `m t W`".into()));
        };
        let m = usize::try_from(m).map_err(|_| Error::Format("alphabet too large".into()))?;
        let mut freqs = vec![0u64; m];
        let mut order = Vec::with_capacity(m);
        let mut expected_cum = Vec::with_capacity(m);
        for line in lines {
            let row = fields(line)?;
            let [s, f, c] = row[..] else {
                return Err(Error::Format("table rows must be `symbol f s`".into()));
            };
            let s = usize::try_from(s)
                .ok()
                .filter(|&s| s < m)
                .ok_or_else(|| Error::Format(format!("symbol index {s} out of range for m = {m}")))?;
            freqs[s] = f;
            order.push(s);
            expected_cum.push(c);
        }
        if order.len() != m {
            return Err(Error::Format(format!("header declares {m} symbols, found {}", order.len())));
        }
        let table = Self::with_order(freqs, order)?;
        if table.total != t || u64::from(table.width_bits) != width || table.cum != expected_cum {
            return Err(Error::Format("table totals, widths or cumulative sums are inconsistent".into()));
        }
        Ok(table)
    }
}

/// Per-symbol signed errors `δ_i = p_i − f_i/t` and their maximum magnitude.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorProfile {
    pub deltas: Vec<Rational>,
    pub delta_star: Rational,
    /// `δ* / p_min`; the redundancy bounds need this below 1.
    pub ratio: Rational,
}

impl ErrorProfile {
    pub fn ratio_below_one(&self) -> bool {
        self.ratio < 1
    }
}

fn check_dims(p: &ProbabilityVector, table: &FrequencyTable) -> Result<()> {
    if p.len() != table.len() {
        return Err(Error::DimensionMismatch { source_len: p.len(), table_len: table.len() });
    }
    Ok(())
}

pub fn error_profile(p: &ProbabilityVector, table: &FrequencyTable) -> Result<ErrorProfile> {
    check_dims(p, table)?;
    let deltas: Vec<Rational> = p.probs().iter().enumerate().map(|(i, pi)| pi - table.approx_prob(i)).collect();
    let delta_star = deltas.iter().map(|d| Rational::from(d.abs_ref())).max().expect("m >= 2");
    let ratio = Rational::from(&delta_star / p.p_min());
    Ok(ErrorProfile { deltas, delta_star, ratio })
}

/// Canonical layout of a table's frequencies for a given source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cumulative {
    pub order: Vec<usize>,
    /// Inclusive prefix sums `s_1 < s_2 < … < s_m = t`.
    pub sums: Vec<u64>,
}

/// Prefix sums of `f` with symbols ordered by ascending `p_i` (stable by index).
pub fn cumulative(p: &ProbabilityVector, table: &FrequencyTable) -> Result<Cumulative> {
    check_dims(p, table)?;
    let order = p.canonical_order();
    let sums = order
        .iter()
        .scan(0u64, |acc, &s| {
            *acc += table.freqs()[s];
            Some(*acc)
        })
        .collect();
    Ok(Cumulative { order, sums })
}

/// `W = ⌈log₂ t⌉` by integer bit length; 0 for `t ≤ 1`.
pub fn register_width(t: u64) -> u32 {
    if t <= 1 {
        0
    } else {
        u64::BITS - (t - 1).leading_zeros()
    }
}

/// `M = m · W` bits of table storage.
pub fn memory_cost(m: usize, width: u32) -> u64 {
    m as u64 * u64::from(width)
}
