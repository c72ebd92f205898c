//! Range coder driven by a [`FrequencyTable`], and a harness that measures
//! its rate on seeded iid data.
//!
//! The coder keeps a 56-bit `range` register (plus one carry bit in `low`)
//! and renormalizes a byte at a time whenever `range` drops below `2^48`.
//! Tables are limited to `t ≤ 2^24`, so `range / t ≥ 2^24` and no interval
//! of a nonzero frequency is ever truncated to zero. Output is big-endian
//! with carries propagated back into already buffered bytes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Integer, Rational};

use crate::bounds::kl_divergence;
use crate::error::{Error, Result};
use crate::precision::Precision;
use crate::prob_model::{FrequencyTable, ProbabilityVector};

/// Bits in the coder's `range` register.
pub const REGISTER_BITS: u32 = 56;
/// Largest table total the coder accepts.
pub const MAX_TOTAL: u64 = 1 << 24;

const TOP: u64 = 1 << REGISTER_BITS;
const BOTTOM: u64 = 1 << (REGISTER_BITS - 8);
const BYTE_SHIFT: u32 = REGISTER_BITS - 8;

/// Per-symbol interval lookup shared by encoder and decoder.
#[derive(Debug, Clone)]
struct Intervals {
    total: u64,
    /// `(start, freq)` indexed by symbol.
    by_symbol: Vec<(u64, u64)>,
    /// Inclusive ends in layout order, with the symbol at each slot.
    ends: Vec<u64>,
    order: Vec<usize>,
}

impl Intervals {
    fn new(table: &FrequencyTable) -> Result<Self> {
        let total = table.total();
        if total > MAX_TOTAL {
            return Err(Error::TableTooWide(total));
        }
        let mut by_symbol = vec![(0, 0); table.len()];
        for (&s, &end) in table.order().iter().zip(table.cumulative()) {
            let f = table.freqs()[s];
            by_symbol[s] = (end - f, f);
        }
        Ok(Intervals { total, by_symbol, ends: table.cumulative().to_vec(), order: table.order().to_vec() })
    }

    fn lookup(&self, value: u64) -> usize {
        self.ends.partition_point(|&end| end <= value)
    }
}

/// Streaming encoder. Feed symbols with [`Encoder::push`], then
/// [`Encoder::finish`].
#[derive(Debug, Clone)]
pub struct Encoder {
    intervals: Intervals,
    low: u64,
    range: u64,
    cache: u8,
    pending: u64,
    leading: bool,
    out: Vec<u8>,
}

impl Encoder {
    pub fn new(table: &FrequencyTable) -> Result<Self> {
        Ok(Encoder {
            intervals: Intervals::new(table)?,
            low: 0,
            range: TOP - 1,
            cache: 0,
            pending: 1,
            leading: true,
            out: Vec::new(),
        })
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    pub fn push(&mut self, symbol: usize) -> Result<()> {
        let m = self.intervals.by_symbol.len();
        let &(start, freq) = self.intervals.by_symbol.get(symbol).ok_or(Error::SymbolOutOfRange { symbol, m })?;
        let t = self.intervals.total;
        let r = self.range / t;
        self.low += r * start;
        // The last interval absorbs the remainder of range / t.
        self.range = if start + freq == t { self.range - r * start } else { r * freq };
        while self.range < BOTTOM {
            self.range <<= 8;
            self.shift_low();
        }
        Ok(())
    }

    fn shift_low(&mut self) {
        if (self.low & (TOP - 1)) < (0xFF << BYTE_SHIFT) || self.low >= TOP {
            let carry = (self.low >> REGISTER_BITS) as u8;
            let mut byte = self.cache;
            loop {
                let value = byte.wrapping_add(carry);
                if self.leading {
                    // The first cached byte is always zero: low + range never
                    // exceeds its initial bound.
                    debug_assert_eq!(value, 0);
                    self.leading = false;
                } else {
                    self.out.push(value);
                }
                byte = 0xFF;
                self.pending -= 1;
                if self.pending == 0 {
                    break;
                }
            }
            self.cache = ((self.low >> BYTE_SHIFT) & 0xFF) as u8;
        }
        self.pending += 1;
        self.low = (self.low & (BOTTOM - 1)) << 8;
    }

    /// Flushes a tail that pins a value inside the final interval: a
    /// multiple of `2^48` always fits because `range ≥ 2^48`. The decoder
    /// reads zeros past the end, so the low bytes are never written.
    pub fn finish(mut self) -> Vec<u8> {
        self.low = (self.low + BOTTOM - 1) & !(BOTTOM - 1);
        self.shift_low();
        self.shift_low();
        self.out
    }
}

#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    intervals: Intervals,
    input: &'a [u8],
    pos: usize,
    code: u64,
    range: u64,
}

impl<'a> Decoder<'a> {
    pub fn new(input: &'a [u8], table: &FrequencyTable) -> Result<Self> {
        let mut d = Decoder { intervals: Intervals::new(table)?, input, pos: 0, code: 0, range: TOP - 1 };
        for _ in 0..REGISTER_BITS / 8 {
            d.code = (d.code << 8) | u64::from(d.next_byte());
        }
        Ok(d)
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    fn next_byte(&mut self) -> u8 {
        let b = self.input.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b
    }

    pub fn pull(&mut self) -> Result<usize> {
        if self.code >= self.range {
            return Err(Error::CorruptStream(format!("code {:#x} outside range {:#x}", self.code, self.range)));
        }
        let t = self.intervals.total;
        let r = self.range / t;
        let value = (self.code / r).min(t - 1);
        let slot = self.intervals.lookup(value);
        let symbol = self.intervals.order[slot];
        let (start, freq) = self.intervals.by_symbol[symbol];
        self.code -= r * start;
        self.range = if start + freq == t { self.range - r * start } else { r * freq };
        if self.code >= self.range {
            return Err(Error::CorruptStream("code left its symbol interval".into()));
        }
        while self.range < BOTTOM {
            self.range <<= 8;
            self.code = (self.code << 8) | u64::from(self.next_byte());
        }
        Ok(symbol)
    }
}

pub fn encode(symbols: &[usize], table: &FrequencyTable) -> Result<Vec<u8>> {
    let mut enc = Encoder::new(table)?;
    for &s in symbols {
        enc.push(s)?;
    }
    Ok(enc.finish())
}

pub fn decode(bytes: &[u8], n: usize, table: &FrequencyTable) -> Result<Vec<usize>> {
    let mut dec = Decoder::new(bytes, table)?;
    (0..n).map(|_| dec.pull()).collect()
}

/// Magic prefix of the self-describing stream.
pub const FRAME_MAGIC: &[u8; 4] = b"QC01";

/// `QC01`, u32 BE table length, table text, u64 BE symbol count, payload.
pub fn encode_framed(symbols: &[usize], table: &FrequencyTable) -> Result<Vec<u8>> {
    let payload = encode(symbols, table)?;
    let text = table.to_text(None);
    let len = u32::try_from(text.len()).map_err(|_| Error::Format("table text too long".into()))?;
    let mut out = Vec::with_capacity(16 + text.len() + payload.len());
    out.extend_from_slice(FRAME_MAGIC);
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(text.as_bytes());
    out.extend_from_slice(&(symbols.len() as u64).to_be_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}

/// Inverse of [`encode_framed`]; also returns the embedded table.
pub fn decode_framed(bytes: &[u8]) -> Result<(FrequencyTable, Vec<usize>)> {
    let truncated = || Error::Format("truncated framed stream".into());
    let rest = bytes.strip_prefix(FRAME_MAGIC).ok_or_else(|| Error::Format("missing QC01 magic".into()))?;
    let (len, rest) = rest.split_first_chunk::<4>().ok_or_else(truncated)?;
    let len = u32::from_be_bytes(*len) as usize;
    if rest.len() < len {
        return Err(truncated());
    }
    let (text, rest) = rest.split_at(len);
    let text = std::str::from_utf8(text).map_err(|_| Error::Format("table text is not UTF-8".into()))?;
    let table = FrequencyTable::from_text(text)?;
    let (n, payload) = rest.split_first_chunk::<8>().ok_or_else(truncated)?;
    let n = usize::try_from(u64::from_be_bytes(*n)).map_err(|_| Error::Format("symbol count too large".into()))?;
    let symbols = decode(payload, n, &table)?;
    Ok((table, symbols))
}

/// Draws `n` iid symbols from `p`, deterministically for a given seed.
///
/// Each draw is a uniform 64-bit integer compared against the exact
/// cumulative thresholds `⌊2^64 · (p_1 + … + p_i)⌋`.
pub fn sample_symbols(p: &ProbabilityVector, n: usize, seed: u64) -> Vec<usize> {
    let scale = Integer::from(1) << 64;
    let mut acc = Rational::new();
    let thresholds: Vec<u128> = p
        .probs()
        .iter()
        .map(|pi| {
            acc += pi;
            Integer::from((Rational::from(&acc * &scale)).floor_ref()).to_u128().expect("≤ 2^64")
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u = u128::from(rng.random::<u64>());
            thresholds.partition_point(|&th| th <= u).min(thresholds.len() - 1)
        })
        .collect()
}

/// Measured coder rate against the ideal code length of the same sample.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub n: u64,
    pub total_bits: u64,
    /// `total_bits / n`
    pub rate: f64,
    /// Ideal code length of the sample under the true source,
    /// `(1/n) Σ −log₂ p(x_k)`.
    pub entropy_bits: f64,
    /// `H(p)`, for reference.
    pub source_entropy_bits: f64,
    /// `D(p‖f/t)` in bits, from the high-precision evaluation.
    pub divergence_bits: f64,
    /// `rate − entropy_bits`; converges to `divergence_bits`.
    pub excess: f64,
    /// Standard error of the per-symbol excess code length
    /// `log₂ p(x) − log₂ f(x)/t`, the noise in `excess`.
    pub std_error: f64,
    pub lossless: bool,
}

impl RateReport {
    pub const CSV_HEADER: [&'static str; 10] = [
        "n",
        "total_bits",
        "rate",
        "entropy_bits",
        "source_entropy_bits",
        "divergence_bits",
        "excess",
        "std_error",
        "lossless",
        "seed",
    ];

    pub fn csv_record(&self, seed: u64) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.total_bits.to_string(),
            format!("{:.12e}", self.rate),
            format!("{:.12e}", self.entropy_bits),
            format!("{:.12e}", self.source_entropy_bits),
            format!("{:.12e}", self.divergence_bits),
            format!("{:.12e}", self.excess),
            format!("{:.12e}", self.std_error),
            self.lossless.to_string(),
            seed.to_string(),
        ]
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W, seed: u64) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Format(e.to_string());
        csv.write_record(Self::CSV_HEADER).map_err(io)?;
        csv.write_record(self.csv_record(seed)).map_err(io)?;
        csv.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

/// Encodes `n` seeded iid symbols from `p` with `table`, checks the
/// roundtrip, and compares the rate with the sample's ideal code length.
pub fn measure_rate(p: &ProbabilityVector, table: &FrequencyTable, n: usize, seed: u64) -> Result<RateReport> {
    if n == 0 {
        return Err(Error::PreconditionViolated("n must be at least 1".into()));
    }
    if p.len() != table.len() {
        return Err(Error::DimensionMismatch { source_len: p.len(), table_len: table.len() });
    }
    let symbols = sample_symbols(p, n, seed);
    let bytes = encode(&symbols, table)?;
    let lossless = decode(&bytes, n, table)? == symbols;

    let mut counts = vec![0u64; p.len()];
    for &s in &symbols {
        counts[s] += 1;
    }
    let t = table.total() as f64;
    let self_info: Vec<f64> = p.probs().iter().map(|pi| -pi.to_f64().log2()).collect();
    let excess_len: Vec<f64> = table.freqs().iter().zip(&self_info).map(|(&f, h)| (t / f as f64).log2() - h).collect();
    let nf = n as f64;
    let entropy_bits = counts.iter().zip(&self_info).map(|(&c, h)| c as f64 * h).sum::<f64>() / nf;
    let mean = counts.iter().zip(&excess_len).map(|(&c, l)| c as f64 * l).sum::<f64>() / nf;
    let second = counts.iter().zip(&excess_len).map(|(&c, l)| c as f64 * l * l).sum::<f64>() / nf;
    let std_error = ((second - mean * mean).max(0.0) / nf).sqrt();
    let source_entropy_bits = p.probs().iter().zip(&self_info).map(|(pi, h)| pi.to_f64() * h).sum();
    let divergence_bits = kl_divergence(p, table, Precision::default())?.bits.to_f64();

    let total_bits = 8 * bytes.len() as u64;
    let rate = total_bits as f64 / nf;
    Ok(RateReport {
        n: n as u64,
        total_bits,
        rate,
        entropy_bits,
        source_entropy_bits,
        divergence_bits,
        excess: rate - entropy_bits,
        std_error,
        lossless,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(entries: &[&str]) -> ProbabilityVector {
        ProbabilityVector::parse(entries).unwrap()
    }

    #[test]
    fn empty_stream() {
        let table = FrequencyTable::new(vec![1, 1]).unwrap();
        let bytes = encode(&[], &table).unwrap();
        assert!(bytes.len() <= 2);
        assert_eq!(decode(&bytes, 0, &table).unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn constant_stream_costs_one_bit_per_symbol() {
        let table = FrequencyTable::new(vec![1, 1]).unwrap();
        let symbols = vec![0usize; 10_000];
        let bytes = encode(&symbols, &table).unwrap();
        let rate = 8.0 * bytes.len() as f64 / 1e4;
        assert!((rate - 1.0).abs() < 0.01, "{rate}");
        assert_eq!(decode(&bytes, symbols.len(), &table).unwrap(), symbols);
    }

    #[test]
    fn roundtrip_single_and_random() {
        let p = pv(&["7/10", "2/10", "1/10"]);
        let table = FrequencyTable::for_source(&p, vec![7, 2, 1]).unwrap();
        for s in 0..3 {
            let bytes = encode(&[s], &table).unwrap();
            assert_eq!(decode(&bytes, 1, &table).unwrap(), vec![s]);
        }
        let symbols = sample_symbols(&p, 100_000, 7);
        let bytes = encode(&symbols, &table).unwrap();
        assert_eq!(decode(&bytes, symbols.len(), &table).unwrap(), symbols);
    }

    #[test]
    fn encoder_and_decoder_move_in_lockstep() {
        let p = pv(&["1/3", "1/2", "1/6"]);
        let table = FrequencyTable::for_source(&p, vec![300, 517, 183]).unwrap();
        let symbols = sample_symbols(&p, 5_000, 3);
        let mut enc = Encoder::new(&table).unwrap();
        let mut ranges = Vec::new();
        for &s in &symbols {
            enc.push(s).unwrap();
            assert!(enc.range() >= BOTTOM);
            ranges.push(enc.range());
        }
        let bytes = enc.finish();
        let mut dec = Decoder::new(&bytes, &table).unwrap();
        for (&s, &r) in symbols.iter().zip(&ranges) {
            assert_eq!(dec.pull().unwrap(), s);
            assert_eq!(dec.range(), r);
        }
    }

    #[test]
    fn rejects_bad_symbols_and_tables() {
        let table = FrequencyTable::new(vec![1, 1]).unwrap();
        assert_eq!(encode(&[2], &table), Err(Error::SymbolOutOfRange { symbol: 2, m: 2 }));
        let wide = FrequencyTable::new(vec![1 << 24, 1]).unwrap();
        assert_eq!(encode(&[0], &wide), Err(Error::TableTooWide((1 << 24) + 1)));
    }

    #[test]
    fn garbage_is_reported_not_panicked() {
        let table = FrequencyTable::new(vec![1, 1000]).unwrap();
        let garbage = vec![0xFFu8; 64];
        // Either decodes to something or reports corruption; never panics.
        let _ = decode(&garbage, 100, &table);
    }

    #[test]
    fn framed_roundtrip() {
        let p = pv(&["7/10", "2/10", "1/10"]);
        let table = FrequencyTable::for_source(&p, vec![7, 2, 1]).unwrap();
        let symbols = sample_symbols(&p, 1000, 1);
        let framed = encode_framed(&symbols, &table).unwrap();
        assert_eq!(&framed[..4], b"QC01");
        let (t2, back) = decode_framed(&framed).unwrap();
        assert_eq!((t2, back), (table, symbols));
        assert!(decode_framed(b"QC02").is_err());
        assert!(decode_framed(&framed[..10]).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_faithful() {
        let p = pv(&["7/10", "2/10", "1/10"]);
        let a = sample_symbols(&p, 100_000, 42);
        assert_eq!(a, sample_symbols(&p, 100_000, 42));
        let share = a.iter().filter(|&&s| s == 0).count() as f64 / 1e5;
        assert!((share - 0.7).abs() < 0.01);
    }

    #[test]
    fn exact_uniform_model_has_tiny_excess() {
        let p = pv(&["1/2", "1/2"]);
        let table = FrequencyTable::new(vec![1, 1]).unwrap();
        let r = measure_rate(&p, &table, 100_000, 5).unwrap();
        assert!(r.lossless);
        assert!(r.excess.abs() <= f64::from(REGISTER_BITS + 8) / 1e5, "{}", r.excess);
    }
}
