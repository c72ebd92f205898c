use std::fmt;

use rug::{Float, Integer, Rational};

use super::{
    kl_divergence, lemma1_bound, theorem1_bound, theorem2_bound_binary, theorem2_bound_mary, Divergence, Kappa,
};
use crate::approx::beats_fact_constant;
use crate::error::{Error, Result};
use crate::precision::{format_rational_sig, format_sig, integer_pow, rational_pow, Precision};
use crate::prob_model::{error_profile, FrequencyTable, ProbabilityVector};

/// Which bounds have their premises met by the table at hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Applicability {
    /// `δ*/p_min < 1`
    pub lemma1: bool,
    /// `δ* ≤ 1/(2t)` and `2t·p_min > 1`
    pub theorem1: bool,
    /// `δ* ≤ t^(−1−1/m)` (m > 2) or `δ* < κ/t²` (m = 2), with the
    /// bound's own precondition met
    pub theorem2: bool,
}

/// Exact divergence of one `(p, f/t)` pair next to every bound that can be
/// evaluated for it.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub m: usize,
    pub t: u64,
    pub width_bits: u32,
    pub delta_star: Rational,
    pub p_min: Rational,
    pub divergence: Divergence,
    pub lemma1: Option<Float>,
    pub theorem1: Option<Float>,
    pub theorem2: Option<Float>,
    pub kappa: Option<Kappa>,
    pub applicable: Applicability,
    pub precision: Precision,
}

/// Evaluates the divergence and all bounds. `kappa` is used only for binary
/// sources.
pub fn bound_report(
    p: &ProbabilityVector,
    table: &FrequencyTable,
    kappa: Kappa,
    prec: Precision,
) -> Result<BoundReport> {
    let m = p.len();
    let t = table.total();
    let profile = error_profile(p, table)?;
    let divergence = kl_divergence(p, table, prec)?;
    let delta_star = profile.delta_star;
    let p_min = p.p_min().clone();

    let lemma1 = lemma1_bound(m, &delta_star, &p_min).ok().map(|b| prec.float(&b));
    let theorem1 = theorem1_bound(m, t, &p_min).ok().map(|b| prec.float(&b));
    let (theorem2, kappa, premise2) = if m == 2 {
        let premise = beats_fact_constant(2, t, &delta_star, kappa);
        (theorem2_bound_binary(t, &p_min, kappa, prec).ok(), Some(kappa), premise)
    } else {
        let m32 = m as u32;
        let premise = rational_pow(&delta_star, m32) * integer_pow(t, m32 + 1) <= 1;
        (theorem2_bound_mary(m, t, &p_min, prec).ok(), None, premise)
    };
    let applicable = Applicability {
        lemma1: lemma1.is_some(),
        theorem1: theorem1.is_some() && delta_star <= Rational::from((1u32, Integer::from(t) * 2u32)),
        theorem2: theorem2.is_some() && premise2,
    };
    Ok(BoundReport {
        m,
        t,
        width_bits: table.width_bits(),
        delta_star,
        p_min,
        divergence,
        lemma1,
        theorem1,
        theorem2,
        kappa,
        applicable,
        precision: prec,
    })
}

impl BoundReport {
    /// Names of applicable bounds that the divergence exceeds. Empty for any
    /// correct implementation.
    pub fn violations(&self) -> Vec<&'static str> {
        let d = &self.divergence.nats;
        let checks = [
            ("lemma1", self.applicable.lemma1, &self.lemma1),
            ("theorem1", self.applicable.theorem1, &self.theorem1),
            ("theorem2", self.applicable.theorem2, &self.theorem2),
        ];
        checks
            .into_iter()
            .filter(|(_, on, bound)| *on && bound.as_ref().is_some_and(|b| d > b))
            .map(|(name, _, _)| name)
            .collect()
    }

    pub const CSV_HEADER: [&'static str; 14] = [
        "m",
        "t",
        "width_bits",
        "delta_star",
        "divergence_nats",
        "divergence_bits",
        "lemma1_nats",
        "theorem1_nats",
        "theorem2_nats",
        "kappa",
        "lemma1_applicable",
        "theorem1_applicable",
        "theorem2_applicable",
        "precision_digits",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let opt = |x: &Option<Float>| x.as_ref().map(|v| format_sig(v, 12)).unwrap_or_default();
        vec![
            self.m.to_string(),
            self.t.to_string(),
            self.width_bits.to_string(),
            format_rational_sig(&self.delta_star, 12),
            format_sig(&self.divergence.nats, 12),
            format_sig(&self.divergence.bits, 12),
            opt(&self.lemma1),
            opt(&self.theorem1),
            opt(&self.theorem2),
            self.kappa.map(|k| k.name().to_string()).unwrap_or_default(),
            self.applicable.lemma1.to_string(),
            self.applicable.theorem1.to_string(),
            self.applicable.theorem2.to_string(),
            self.precision.decimal_digits().to_string(),
        ]
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Format(e.to_string());
        csv.write_record(Self::CSV_HEADER).map_err(io)?;
        csv.write_record(self.csv_record()).map_err(io)?;
        csv.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bound = |name: &str, value: &Option<Float>, on: bool, f: &mut fmt::Formatter<'_>| match value {
            Some(v) => {
                let status = if !on {
                    "premise not met"
                } else if self.divergence.nats <= *v {
                    "holds"
                } else {
                    "VIOLATED"
                };
                writeln!(f, "  {name:<9} {}  ({status})", format_sig(v, 12))
            }
            None => writeln!(f, "  {name:<9} n/a"),
        };
        writeln!(f, "m = {}, t = {}, W = {} bits", self.m, self.t, self.width_bits)?;
        writeln!(f, "delta*     = {} ~ {}", self.delta_star, format_rational_sig(&self.delta_star, 12))?;
        writeln!(f, "p_min      = {}", format_rational_sig(&self.p_min, 12))?;
        writeln!(
            f,
            "D(p||f/t)  = {} nats = {} bits",
            format_sig(&self.divergence.nats, 12),
            format_sig(&self.divergence.bits, 12)
        )?;
        writeln!(f, "bounds (nats/symbol):")?;
        bound("lemma1", &self.lemma1, self.applicable.lemma1, f)?;
        bound("theorem1", &self.theorem1, self.applicable.theorem1, f)?;
        bound("theorem2", &self.theorem2, self.applicable.theorem2, f)?;
        if let Some(k) = self.kappa {
            writeln!(f, "kappa      = {} ({})", format_sig(&k.value(self.precision), 12), k.name())?;
        }
        writeln!(f, "working precision: {} digits", self.precision.decimal_digits())
    }
}
