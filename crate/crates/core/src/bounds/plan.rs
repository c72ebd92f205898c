use std::fmt;

use rug::{Float, Rational};

use super::{corollary1_width, corollary2_width, kl_divergence, Divergence, Kappa, WidthBound};
use crate::approx::{min_max_round, scan_min_divergence, Rounding};
use crate::error::{Error, Result};
use crate::precision::{format_rational_sig, format_sig, Precision};
use crate::prob_model::{error_profile, memory_cost, FrequencyTable, ProbabilityVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanMode {
    /// Take `W` from the general width corollary and pick the best table
    /// that fits in it.
    Guaranteed,
    /// Walk `t` upward and stop at the first table that meets the target.
    Opportunistic,
}

impl PlanMode {
    pub fn name(self) -> &'static str {
        match self {
            PlanMode::Guaranteed => "guaranteed",
            PlanMode::Opportunistic => "opportunistic",
        }
    }
}

/// A register width, table and verified redundancy for a target `R`.
#[derive(Debug, Clone)]
pub struct PrecisionPlan {
    pub mode: PlanMode,
    /// Target redundancy in nats per symbol.
    pub target: Rational,
    /// Register width `W` in bits.
    pub width: u32,
    pub table: FrequencyTable,
    pub delta_star: Rational,
    /// `D(p‖f/t)` of `table`, checked `≤ target`.
    pub verified: Divergence,
    pub corollary1: WidthBound,
    /// Real-valued existence bound on `W` for sources like this one.
    pub corollary2: f64,
    /// `M = m·W` bits.
    pub memory_bits: u64,
    /// `W / log₂(m/R)`, when `m/R > 1`.
    pub eta: Option<f64>,
    pub precision: Precision,
}

impl PrecisionPlan {
    pub fn t(&self) -> u64 {
        self.table.total()
    }

    /// Recomputes the divergence of the plan's table from scratch and
    /// compares it with the target.
    pub fn verify(&self, p: &ProbabilityVector) -> Result<bool> {
        let d = kl_divergence(p, &self.table, self.precision)?;
        Ok(d.nats <= self.target)
    }

    pub const CSV_HEADER: [&'static str; 14] = [
        "mode",
        "m",
        "target_nats",
        "width_bits",
        "t",
        "delta_star",
        "verified_nats",
        "verified_bits",
        "corollary1_width",
        "corollary1_raw",
        "corollary2_raw",
        "memory_bits",
        "eta",
        "precision_digits",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.mode.name().to_string(),
            self.table.len().to_string(),
            format_rational_sig(&self.target, 12),
            self.width.to_string(),
            self.t().to_string(),
            format_rational_sig(&self.delta_star, 12),
            format_sig(&self.verified.nats, 12),
            format_sig(&self.verified.bits, 12),
            self.corollary1.width.to_string(),
            format!("{:.12}", self.corollary1.raw),
            format!("{:.12}", self.corollary2),
            self.memory_bits.to_string(),
            self.eta.map(|e| format!("{e:.12}")).unwrap_or_default(),
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

impl fmt::Display for PrecisionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode              {}", self.mode.name())?;
        writeln!(f, "target R          {} nats/symbol", format_rational_sig(&self.target, 12))?;
        writeln!(f, "width W           {} bits (t = {})", self.width, self.t())?;
        writeln!(f, "frequencies       {:?}", self.table.freqs())?;
        writeln!(f, "delta*            {}", format_rational_sig(&self.delta_star, 12))?;
        writeln!(
            f,
            "verified D        {} nats = {} bits",
            format_sig(&self.verified.nats, 12),
            format_sig(&self.verified.bits, 12)
        )?;
        writeln!(f, "corollary 1       W = {} (bound {:.6})", self.corollary1.width, self.corollary1.raw)?;
        writeln!(f, "corollary 2       {:.6}", self.corollary2)?;
        writeln!(f, "memory M = mW     {} bits", self.memory_bits)?;
        if let Some(eta) = self.eta {
            writeln!(f, "eta = W/log2(m/R) {eta:.6}")?;
        }
        writeln!(f, "working precision {} digits", self.precision.decimal_digits())
    }
}

/// Finds a width and table whose exact redundancy is at most `target`
/// nats per symbol.
///
/// Either mode gives up once every `t ≤ 2^(W₁+2)` has been tried, where
/// `W₁` is the width from [`corollary1_width`]. `kappa` feeds the binary
/// existence bound reported alongside the plan.
pub fn plan_precision(
    p: &ProbabilityVector,
    target: &Rational,
    mode: PlanMode,
    kappa: Kappa,
    prec: Precision,
) -> Result<PrecisionPlan> {
    let m = p.len();
    let corollary1 = corollary1_width(m, target, p.p_min())?;
    let corollary2 = corollary2_width(m, target, p.p_min(), (m == 2).then_some(kappa))?;
    let limit = 1u64
        .checked_shl(corollary1.width + 2)
        .filter(|_| corollary1.width + 2 <= crate::approx::MAX_SCAN_WIDTH)
        .ok_or_else(|| Error::PreconditionViolated(format!("target needs a {}-bit scan", corollary1.width + 2)))?;
    let budget = 1u64 << corollary1.width;

    let mut found: Option<(Rounding, Float, u32)> = None;
    if mode == PlanMode::Guaranteed && budget >= m as u64 {
        let (r, d) = scan_min_divergence(p, m as u64, budget, prec)?;
        if d <= *target {
            found = Some((r, d, corollary1.width));
        }
    }
    if found.is_none() {
        let from = match mode {
            PlanMode::Guaranteed => budget.max(m as u64 - 1) + 1,
            PlanMode::Opportunistic => m as u64,
        };
        found = first_within(p, from, limit, target, prec)?.map(|(r, d)| {
            let w = crate::prob_model::register_width(r.t);
            (r, d, w)
        });
    }
    let (rounding, _, width) = found.ok_or(Error::TargetUnachievableWithinScan { limit })?;

    let table = FrequencyTable::for_source(p, rounding.freqs)?;
    let verified = kl_divergence(p, &table, prec)?;
    let delta_star = error_profile(p, &table)?.delta_star;
    let ratio = Rational::from(m as u64) / target;
    let eta = (ratio > 1).then(|| {
        let log = Float::with_val(128, &ratio).log2().to_f64();
        f64::from(width) / log
    });
    Ok(PrecisionPlan {
        mode,
        target: target.clone(),
        width,
        memory_bits: memory_cost(m, width),
        table,
        delta_star,
        verified,
        corollary1,
        corollary2,
        eta,
        precision: prec,
    })
}

/// First `t` in `[from, to]` whose optimally rounded table meets `target`.
fn first_within(
    p: &ProbabilityVector,
    from: u64,
    to: u64,
    target: &Rational,
    prec: Precision,
) -> Result<Option<(Rounding, Float)>> {
    let target_f64 = target.to_f64();
    for t in from..=to {
        let r = min_max_round(p, t)?;
        // Pinsker lower bound D ≥ ½‖p − p̂‖₁² screens out hopeless t.
        let l1 = r.l1_error_f64(p);
        if 0.5 * l1 * l1 * (1.0 - 1e-9) > target_f64 {
            continue;
        }
        let table = FrequencyTable::for_source(p, r.freqs.clone())?;
        let d = kl_divergence(p, &table, prec)?.nats;
        if d <= *target {
            return Ok(Some((r, d)));
        }
    }
    Ok(None)
}
