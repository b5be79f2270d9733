#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod report;

use std::fs;
use std::io::Write as _;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use emphi::divergence::PhiSpec;
use emphi::inference::{invert_ci, IntervalEstimate};
use emphi::montecarlo::{power_curve, simulate_coverage, simulate_width, Scenario};
use emphi::samples::{load_two_samples, TwoSampleData};
use emphi::statistics::{fit_h0, Statistic};
use emphi::{EmphiError, STUDY_GAMMAS};

use args::{Case, Cli, Command, DataArgs, DesignArgs, Family, StatArgs};
use report::{Cell, Table};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e
                .chain()
                .find_map(|c| c.downcast_ref::<EmphiError>())
                .map_or("Error".to_string(), error_kind);
            let message: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            eprintln!("error,{kind},\"{}\"", message.join(": ").replace('"', "'"));
            ExitCode::FAILURE
        }
    }
}

fn error_kind(e: &EmphiError) -> String {
    let debug = format!("{e:?}");
    debug
        .split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or("Error")
        .to_string()
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Test(a) => {
            let data = load(&a.data)?;
            let stats = statistics(&a.stat, &[0.0])?;
            if cli.verbose {
                if let Ok(fit) = fit_h0(&data, &a.delta0) {
                    log::debug!(
                        "mu_tilde {:?} lambda1 {:?} lambda2 {:?} residual {:e} iterations {}",
                        fit.mu_tilde,
                        fit.lambda1,
                        fit.lambda2,
                        fit.residual_norm,
                        fit.iterations
                    );
                }
            }
            let mut table = Table::new(&["statistic", "df", "p_value"]);
            let labelled = stats.len() > 1;
            let mut table_multi = Table::new(&["stat", "statistic", "df", "p_value"]);
            for s in &stats {
                let t = s
                    .evaluate_at(&data, &a.delta0)
                    .with_context(|| format!("{s} at delta0 = {:?}", a.delta0))?;
                let cells = [Cell::Num(t.statistic), Cell::Int(t.df), Cell::Num(t.p_value)];
                if labelled {
                    let mut row = vec![Cell::Text(s.label())];
                    row.extend(cells);
                    table_multi.row(&row);
                } else {
                    table.row(&cells);
                }
            }
            emit(if labelled { table_multi } else { table }, a.out.as_deref())
        }
        Command::Ci(a) => {
            let data = load(&a.data)?;
            let stats = statistics(&a.stat, &[0.0])?;
            if stats.len() == 1 {
                let ci = interval(&data, &stats[0], a.level, cli.verbose)?;
                let mut table = Table::new(&["lower", "upper", "width"]);
                table.row(&[Cell::Num(ci.lower), Cell::Num(ci.upper), Cell::Num(ci.width())]);
                emit(table, a.out.as_deref())
            } else {
                let mut table = Table::new(&["statistic", "lower", "upper", "width"]);
                for s in &stats {
                    let ci = interval(&data, s, a.level, cli.verbose)?;
                    interval_row(&mut table, &ci);
                }
                emit(table, a.out.as_deref())
            }
        }
        Command::Example(a) => {
            let rows = emphi::example::reid_intervals(a.level)?;
            let mut table = Table::new(&["statistic", "lower", "upper", "width"]);
            for ci in &rows {
                interval_row(&mut table, ci);
            }
            emit(table, a.out.as_deref())
        }
        Command::Simulate(a) => {
            let d = &a.design;
            let (sc, stats) = design(d)?;
            let cov = simulate_coverage(&sc, &stats, d.replications)?;
            let width = if a.coverage_only {
                None
            } else {
                let r = a.width_replications.unwrap_or(d.replications / 5);
                Some(simulate_width(&sc, &stats, r)?)
            };
            let mut table = Table::new(&[
                "m",
                "n",
                "statistic",
                "coverage",
                "coverage_se",
                "width",
                "width_se",
                "failures",
            ]);
            for (i, row) in cov.rows.iter().enumerate() {
                let w = width.as_ref().map(|w| &w.rows[i]);
                table.row(&[
                    Cell::Int(sc.m),
                    Cell::Int(sc.n),
                    Cell::Text(row.kind.label()),
                    Cell::Num(row.estimate),
                    Cell::Num(row.stderr),
                    Cell::Num(w.map_or(f64::NAN, |w| w.estimate)),
                    Cell::Num(w.map_or(f64::NAN, |w| w.stderr)),
                    Cell::Int(row.failures + w.map_or(0, |w| w.failures)),
                ]);
            }
            emit(table, d.out.as_deref())
        }
        Command::Power(a) => {
            let d = &a.design;
            let (sc, stats) = design(d)?;
            if a.points < 2 || !(a.delta_max > a.delta_min) {
                bail!(EmphiError::InvalidParameter(
                    "power grid needs --points >= 2 and --delta-max > --delta-min".into()
                ));
            }
            let grid: Vec<f64> = (0..a.points)
                .map(|i| a.delta_min + (a.delta_max - a.delta_min) * i as f64 / (a.points - 1) as f64)
                .collect();
            let points = power_curve(&sc, &stats, &grid, d.replications)?;
            let mut table = Table::new(&["delta", "stat", "rejection_rate", "stderr"]);
            for p in &points {
                table.row(&[
                    Cell::Num(p.delta),
                    Cell::Text(p.kind.label()),
                    Cell::Num(p.rejection_rate),
                    Cell::Num(p.stderr),
                ]);
            }
            emit(table, d.out.as_deref())
        }
    }
}

fn interval(data: &TwoSampleData, s: &Statistic, level: f64, verbose: bool) -> Result<IntervalEstimate> {
    let ci = invert_ci(data, s, level).with_context(|| format!("inverting {s}"))?;
    if verbose {
        log::debug!("{s}: {} statistic evaluations", ci.evaluations);
    }
    Ok(ci)
}

fn interval_row(table: &mut Table, ci: &IntervalEstimate) {
    table.row(&[
        Cell::Text(ci.kind.label()),
        Cell::Num(ci.lower),
        Cell::Num(ci.upper),
        Cell::Num(ci.width()),
    ]);
}

fn load(a: &DataArgs) -> Result<TwoSampleData> {
    let data = load_two_samples(&a.x, &a.y)?;
    if let Some(k) = a.dim {
        if data.dim() != k {
            bail!(EmphiError::DimensionMismatch {
                expected: k,
                found: data.dim(),
            });
        }
    }
    Ok(data)
}

/// `--stat` wins; otherwise the family with `--gamma` (or `default_gammas`),
/// plus any Renyi orders.
fn statistics(a: &StatArgs, default_gammas: &[f64]) -> Result<Vec<Statistic>> {
    let mut stats = Vec::new();
    for s in &a.stats {
        stats.push(s.parse::<Statistic>()?);
    }
    if stats.is_empty() {
        match a.family {
            Family::Power => {
                let gammas = if a.gamma.is_empty() { default_gammas } else { &a.gamma };
                stats.extend(gammas.iter().map(|g| Statistic::PowerGamma(*g)));
            }
            Family::Kl => stats.push(Statistic::Phi(PhiSpec::KullbackLeibler)),
        }
    }
    for r in &a.renyi_a {
        stats.push(Statistic::renyi(*r)?);
    }
    Ok(stats)
}

fn design(d: &DesignArgs) -> Result<(Scenario, Vec<Statistic>)> {
    let mut sc = match d.case {
        Case::Normal => Scenario::normal_case(d.m, d.n, d.seed),
        Case::Lognormal => Scenario::lognormal_case(d.m, d.n, d.seed),
    };
    sc.level = d.level;
    let mut stats = statistics(&d.stat, &STUDY_GAMMAS)?;
    if d.stat.stats.is_empty() {
        stats.push(Statistic::ZTest);
    }
    Ok((sc, stats))
}

fn emit(table: Table, out: Option<&std::path::Path>) -> Result<()> {
    let text = table.finish();
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

/// Caps the rayon pool at `EMPHI_THREADS`.
fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("EMPHI_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .with_context(|| format!("EMPHI_THREADS must be a positive integer, got {value:?}"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}
