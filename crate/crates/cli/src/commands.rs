use std::fs;
use std::io::{ErrorKind, Write};
use std::path::Path;

use quantacode::bounds::looks_golden_equivalent;
use quantacode::prob_model::parse_rational;
use quantacode::{
    best_table_under_width, bound_report, decode, decode_framed, encode, encode_framed, kappa_select, measure_rate,
    plan_precision, record_scan, round_min_max, FrequencyTable, Kappa, Objective, PlanMode, Precision,
    ProbabilityVector,
};

use crate::args::{
    ApproximateArgs, Cli, Command, DecodeArgs, EncodeArgs, KappaArg, ModeArg, ObjectiveArg, PlanArgs, ScanArgs,
    SimulateArgs, Source,
};
use crate::failure::Failure;

type Outcome = Result<(), Failure>;

pub fn run(cli: &Cli) -> Outcome {
    let ctx = Context { precision: Precision::digits(cli.precision), seed: cli.seed };
    match &cli.command {
        Command::Approximate(args) => approximate(&ctx, args),
        Command::Scan(args) => scan(&ctx, args),
        Command::Plan(args) => plan(&ctx, args),
        Command::Encode(args) => encode_cmd(args),
        Command::Decode(args) => decode_cmd(args),
        Command::Simulate(args) => simulate(&ctx, args),
    }
}

struct Context {
    precision: Precision,
    seed: u64,
}

impl Context {
    /// Reproducibility line that heads every CSV.
    fn csv_comment(&self) -> String {
        format!(
            "# quantacode {} precision={} seed={}\n",
            env!("CARGO_PKG_VERSION"),
            self.precision.decimal_digits(),
            self.seed
        )
    }

    fn csv<F>(&self, write: F) -> Result<Vec<u8>, Failure>
    where
        F: FnOnce(&mut Vec<u8>) -> quantacode::Result<()>,
    {
        let mut buf = self.csv_comment().into_bytes();
        write(&mut buf).map_err(|e| Failure::internal(e.to_string()))?;
        Ok(buf)
    }
}

fn source(arg: &Source) -> Result<ProbabilityVector, Failure> {
    if let Some(p) = ProbabilityVector::preset(arg.probs.trim()) {
        return Ok(p);
    }
    let entries: Vec<&str> = arg.probs.split(',').map(str::trim).collect();
    Ok(ProbabilityVector::parse(&entries)?)
}

fn kappa(arg: Option<KappaArg>, p: &ProbabilityVector) -> Kappa {
    match arg {
        Some(KappaArg::Golden) => Kappa::Golden,
        Some(KappaArg::Generic) => Kappa::Generic,
        None => kappa_select(p.len() == 2 && looks_golden_equivalent(&p.probs()[0])),
    }
}

fn read_table(path: &Path) -> Result<FrequencyTable, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::reading(path, e))?;
    Ok(FrequencyTable::from_text(&text)?)
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::writing(path, e))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Outcome {
    match out {
        Some(path) => write_file(path, bytes),
        None => match std::io::stdout().lock().write_all(bytes) {
            Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn approximate(ctx: &Context, args: &ApproximateArgs) -> Outcome {
    let p = source(&args.source)?;
    let table = match (args.t, args.width) {
        (Some(t), _) => round_min_max(&p, t)?,
        (None, Some(width)) => {
            let objective = match args.objective {
                ObjectiveArg::Delta => Objective::MinDelta,
                ObjectiveArg::Divergence => Objective::MinDivergence,
            };
            best_table_under_width(&p, width, objective, ctx.precision)?
        }
        (None, None) => return Err(Failure::invalid("one of -t or -W is required")),
    };
    let report = bound_report(&p, &table, kappa(args.kappa, &p), ctx.precision)?;
    if !report.violations().is_empty() {
        return Err(Failure::internal(format!("bound violated: {:?}", report.violations())));
    }
    let text = table.to_text(Some(&report.delta_star));
    match &args.out {
        Some(path) => {
            write_file(path, text.as_bytes())?;
            emit(None, format!("frequencies {:?}\n{report}", table.freqs()).as_bytes())?;
        }
        None => emit(None, format!("{text}\n{report}").as_bytes())?,
    }
    if let Some(path) = &args.report {
        let csv = ctx.csv(|buf| report.write_csv(buf))?;
        write_file(path, &csv)?;
    }
    Ok(())
}

fn scan(ctx: &Context, args: &ScanArgs) -> Outcome {
    let p = source(&args.source)?;
    let result = record_scan(&p, args.t_max, kappa(args.kappa, &p), ctx.precision)?;
    let csv = ctx.csv(|buf| result.write_csv(buf))?;
    emit(args.out.as_deref(), &csv)?;
    eprintln!(
        "{} denominators, {} records, {} below the existence constant ({} of them records){}",
        result.entries.len(),
        result.records().count(),
        result.fact_hits(),
        result.record_fact_hits(),
        result.exact_at.map(|t| format!(", exact at t = {t}")).unwrap_or_default()
    );
    Ok(())
}

fn plan(ctx: &Context, args: &PlanArgs) -> Outcome {
    let p = source(&args.source)?;
    let target = parse_rational(&args.target)?;
    let mode = match args.mode {
        ModeArg::Guaranteed => PlanMode::Guaranteed,
        ModeArg::Opportunistic => PlanMode::Opportunistic,
    };
    let plan = plan_precision(&p, &target, mode, kappa(args.kappa, &p), ctx.precision)?;
    emit(None, plan.to_string().as_bytes())?;
    if let Some(path) = &args.out {
        let csv = ctx.csv(|buf| plan.write_csv(buf))?;
        write_file(path, &csv)?;
    }
    if let Some(path) = &args.table {
        write_file(path, plan.table.to_text(Some(&plan.delta_star)).as_bytes())?;
    }
    Ok(())
}

fn encode_cmd(args: &EncodeArgs) -> Outcome {
    let table = read_table(&args.table)?;
    let input = fs::read(&args.input).map_err(|e| Failure::reading(&args.input, e))?;
    let symbols: Vec<usize> = input.iter().map(|&b| usize::from(b)).collect();
    let bytes = if args.framed { encode_framed(&symbols, &table)? } else { encode(&symbols, &table)? };
    write_file(&args.out, &bytes)?;
    eprintln!("{} symbols -> {} bytes", symbols.len(), bytes.len());
    Ok(())
}

fn decode_cmd(args: &DecodeArgs) -> Outcome {
    let input = fs::read(&args.input).map_err(|e| Failure::reading(&args.input, e))?;
    let symbols = if args.framed {
        decode_framed(&input)?.1
    } else {
        let (Some(path), Some(n)) = (&args.table, args.n) else {
            return Err(Failure::invalid("unframed streams need --table and -n"));
        };
        let n = usize::try_from(n).map_err(|_| Failure::invalid("symbol count too large"))?;
        decode(&input, n, &read_table(path)?)?
    };
    let bytes = symbols
        .iter()
        .map(|&s| u8::try_from(s).map_err(|_| Failure::invalid(format!("symbol {s} does not fit in a byte"))))
        .collect::<Result<Vec<u8>, _>>()?;
    write_file(&args.out, &bytes)
}

fn simulate(ctx: &Context, args: &SimulateArgs) -> Outcome {
    let p = source(&args.source)?;
    let table = match (&args.table, args.t) {
        (Some(path), _) => read_table(path)?,
        (None, Some(t)) => round_min_max(&p, t)?,
        (None, None) => return Err(Failure::invalid("one of --table or -t is required")),
    };
    let n = usize::try_from(args.n).map_err(|_| Failure::invalid("n too large"))?;
    let report = measure_rate(&p, &table, n, ctx.seed)?;
    if !report.lossless {
        return Err(Failure::internal("roundtrip mismatch"));
    }
    let csv = ctx.csv(|buf| report.write_csv(buf, ctx.seed))?;
    emit(args.out.as_deref(), &csv)?;
    eprintln!(
        "rate {:.6} bits/symbol, excess {:.6} (D = {:.6} bits, std error {:.2e})",
        report.rate, report.excess, report.divergence_bits, report.std_error
    );
    Ok(())
}
