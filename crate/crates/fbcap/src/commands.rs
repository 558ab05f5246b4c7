//! One function per subcommand, each producing an [`Outcome`].

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use fbcap_core::feedback::{self, default_alpha_grid, log_grid, sk_root_for};
use fbcap_core::simulator::{variance_recursion, MonteCarloPlan};
use fbcap_core::waterfill::nonfeedback_capacity;
use fbcap_core::{BoundReport, Error, PsdSpec, QuadratureConfig, SchemeConfig, VarianceTrace};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cli::{Cli, Command, Format, PowerSweep};
use crate::parallel::run_plan;
use crate::psd_file::parse_psd_arg;
use crate::report::{self, InputEcho, Outcome, RunReport, Table};
use crate::CliError;

/// Tolerance of the scalar root finders.
pub const ROOT_TOL: f64 = 1e-12;

/// Runs the parsed command line and fills in the wall time.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let started = Instant::now();
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(CliError::Invalid("--tol must be positive".into()));
    }
    let quad = QuadratureConfig::with_tolerance(cli.tol);
    let mut outcome = match &cli.command {
        Command::Capacity {
            psd,
            power,
            grid_points,
        } => capacity(psd, *power, *grid_points, &quad)?,
        Command::SkRate { psd, power } => sk_rate(psd, *power, &quad)?,
        Command::Bounds {
            psd,
            power,
            alpha_min,
            alpha_max,
            alpha_points,
        } => bounds(psd, *power, (*alpha_min, *alpha_max, *alpha_points), &quad)?,
        Command::Counterexample { power_sweep } => counterexample(power_sweep.as_ref(), &quad)?,
        Command::Simulate {
            psd,
            power,
            rate,
            horizon,
            burn_in,
            trials,
            seed,
            trace_out,
        } => {
            let args = SimulateArgs {
                power: *power,
                rate: *rate,
                horizon: *horizon,
                burn_in: *burn_in,
                trials: *trials,
                seed: *seed,
            };
            simulate(psd, &args, trace_out.as_deref(), &quad)?
        }
    };
    if !cli.no_timing {
        outcome.report.wall_time_s = Some(started.elapsed().as_secs_f64());
    }
    Ok(outcome)
}

pub fn render(outcome: &Outcome, format: Format) -> Result<String, CliError> {
    match format {
        Format::Text => Ok(report::to_text(&outcome.report)),
        Format::Json => Ok(report::to_json(&outcome.report) + "\n"),
        Format::Csv => outcome.table.to_csv(),
    }
}

fn echo(psd: Option<(&PsdSpec, &str)>, power: Option<f64>, quad: &QuadratureConfig) -> InputEcho {
    InputEcho {
        psd: psd.map(|(p, _)| p.clone()),
        psd_source: psd.map(|(_, s)| s.to_string()),
        power,
        quadrature_tol: quad.abs_tolerance,
        root_tol: ROOT_TOL,
        seed: None,
        parameters: BTreeMap::new(),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("outputs always serialize")
}

fn finish(command: &str, input: InputEcho, outputs: Value, table: Table) -> Outcome {
    Outcome {
        report: RunReport {
            command: command.into(),
            input,
            outputs,
            verdicts: BTreeMap::new(),
            messages: Vec::new(),
            wall_time_s: None,
        },
        table,
        failure: None,
    }
}

/// Records the verdicts and turns any false one into an exit-4 failure.
fn judge(outcome: &mut Outcome, verdicts: &[(&str, bool)]) {
    let failed: Vec<&str> = verdicts
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| *n)
        .collect();
    for (name, ok) in verdicts {
        outcome.report.verdicts.insert(name.to_string(), *ok);
    }
    if !failed.is_empty() {
        outcome.failure = Some(CliError::Check(failed.join(", ")));
    }
}

fn check_power(power: f64) -> Result<(), CliError> {
    if power > 0.0 && power.is_finite() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "power must be positive and finite, got {power}"
        )))
    }
}

pub fn capacity(
    psd_arg: &str,
    power: f64,
    grid_points: usize,
    quad: &QuadratureConfig,
) -> Result<Outcome, CliError> {
    let psd = parse_psd_arg(psd_arg)?;
    check_power(power)?;
    let sol = nonfeedback_capacity(&psd, power, quad)?;
    let mut outputs = to_value(&sol);
    let mut table;
    if grid_points > 0 {
        table = Table::new(&["theta", "noise_psd", "input_psd", "output_psd"]);
        let grid = sol.spectra_grid(grid_points);
        for row in &grid {
            table.push(row.iter().map(|v| json!(v)).collect());
        }
        let spectra: Vec<Value> = grid
            .iter()
            .map(
                |[t, s, x, y]| json!({"theta": t, "noise_psd": s, "input_psd": x, "output_psd": y}),
            )
            .collect();
        outputs["spectra"] = Value::Array(spectra);
    } else {
        table = Table::new(&["power", "water_level", "capacity_bits", "power_residual"]);
        table.push(vec![
            json!(sol.power),
            json!(sol.water_level),
            json!(sol.capacity_bits),
            json!(sol.power_residual),
        ]);
    }
    let mut input = echo(Some((&psd, psd_arg)), Some(power), quad);
    input
        .parameters
        .insert("grid_points".into(), json!(grid_points));
    Ok(finish("capacity", input, outputs, table))
}

pub fn sk_rate(psd_arg: &str, power: f64, quad: &QuadratureConfig) -> Result<Outcome, CliError> {
    let psd = parse_psd_arg(psd_arg)?;
    check_power(power)?;
    let sol = sk_root_for(&psd, power)?;
    let mut table = Table::new(&["power", "x0", "rate_bits", "residual"]);
    table.push(vec![
        json!(sol.power),
        json!(sol.x0),
        json!(sol.rate_bits),
        json!(sol.residual),
    ]);
    let input = echo(Some((&psd, psd_arg)), Some(power), quad);
    Ok(finish("sk-rate", input, to_value(&sol), table))
}

fn cy_table(report: &BoundReport) -> Table {
    let mut table = Table::new(&["alpha", "bound1", "bound2"]);
    for p in &report.cy_curve {
        table.push(vec![json!(p.alpha), json!(p.bound1), json!(p.bound2)]);
    }
    table
}

pub fn bounds(
    psd_arg: &str,
    power: f64,
    (alpha_min, alpha_max, alpha_points): (f64, f64, usize),
    quad: &QuadratureConfig,
) -> Result<Outcome, CliError> {
    let psd = parse_psd_arg(psd_arg)?;
    check_power(power)?;
    let grid = log_grid(alpha_min, alpha_max, alpha_points)?;
    let report = feedback::bound_report(&psd, power, &grid, quad)?;
    let mut input = echo(Some((&psd, psd_arg)), Some(power), quad);
    input
        .parameters
        .insert("alpha_min".into(), json!(alpha_min));
    input
        .parameters
        .insert("alpha_max".into(), json!(alpha_max));
    input
        .parameters
        .insert("alpha_points".into(), json!(alpha_points));
    let failed = report.failed_checks();
    let mut outcome = finish("bounds", input, to_value(&report), cy_table(&report));
    let sandwich = failed.is_empty();
    if report.sk.is_some() {
        // informational: not a consistency requirement
        outcome
            .report
            .verdicts
            .insert("violated".into(), report.violated);
    }
    for name in failed {
        outcome
            .report
            .messages
            .push(format!("failed check: {name}"));
    }
    judge(&mut outcome, &[("sandwich", sandwich)]);
    Ok(outcome)
}

#[derive(Debug, Serialize)]
struct SweepRow {
    power: f64,
    sk_rate: f64,
    c_2p: f64,
    violated: bool,
    margin: f64,
}

#[derive(Debug, Serialize)]
struct CounterexampleOutputs {
    power: f64,
    c_p: f64,
    c_2p: f64,
    water_level_2p: f64,
    x0: f64,
    sk_residual: f64,
    sk_rate: f64,
    cp_double: f64,
    cp_plus_half: f64,
    cy_min_alpha: f64,
    cy_min: f64,
    conjecture_bound: f64,
    violated: bool,
    margin: f64,
    cy_curve: Vec<fbcap_core::CyPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<Vec<SweepRow>>,
}

/// Unit power on `Z_i = U_i + U_{i−1}`: the feedback rate against the
/// conjectured bound `C(2P)`, with every upper bound as a consistency check.
pub fn counterexample(
    sweep: Option<&PowerSweep>,
    quad: &QuadratureConfig,
) -> Result<Outcome, CliError> {
    let psd = PsdSpec::first_order_ma();
    let power = 1.0;
    let report = feedback::bound_report(&psd, power, &default_alpha_grid(), quad)?;
    let water_2p = nonfeedback_capacity(&psd, 2.0 * power, quad)?.water_level;
    let sk = report.sk.ok_or_else(|| {
        CliError::Check("feedback rate missing for the moving-average channel".into())
    })?;
    let margin = report.margin.unwrap_or(f64::NAN);

    let sweep_rows = match sweep {
        Some(s) => Some(
            s.powers()
                .into_iter()
                .map(|p| {
                    let rate = sk_root_for(&psd, p)?.rate_bits;
                    let c_2p = nonfeedback_capacity(&psd, 2.0 * p, quad)?.capacity_bits;
                    Ok(SweepRow {
                        power: p,
                        sk_rate: rate,
                        c_2p,
                        violated: rate > c_2p,
                        margin: rate - c_2p,
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?,
        ),
        None => None,
    };

    let mut table = Table::new(&["power", "sk_rate", "c_2p", "violated", "margin"]);
    match &sweep_rows {
        Some(rows) => rows.iter().for_each(|r| {
            table.push(vec![
                json!(r.power),
                json!(r.sk_rate),
                json!(r.c_2p),
                json!(r.violated),
                json!(r.margin),
            ])
        }),
        None => table.push(vec![
            json!(power),
            json!(sk.rate_bits),
            json!(report.c_2p),
            json!(report.violated),
            json!(margin),
        ]),
    }

    let outputs = CounterexampleOutputs {
        power,
        c_p: report.c_p,
        c_2p: report.c_2p,
        water_level_2p: water_2p,
        x0: sk.x0,
        sk_residual: sk.residual,
        sk_rate: sk.rate_bits,
        cp_double: report.cp_double,
        cp_plus_half: report.cp_plus_half,
        cy_min_alpha: report.cy_min_alpha,
        cy_min: report.cy_min,
        conjecture_bound: report.conjecture_bound,
        violated: report.violated,
        margin,
        cy_curve: report.cy_curve.clone(),
        sweep: sweep_rows,
    };
    let mut input = echo(Some((&psd, "paper")), Some(power), quad);
    if let Some(s) = sweep {
        input.parameters.insert(
            "power_sweep".into(),
            json!({"start": s.start, "end": s.end, "steps": s.steps}),
        );
    }
    let failed = report.failed_checks();
    let mut outcome = finish("counterexample", input, to_value(&outputs), table);
    for name in &failed {
        outcome
            .report
            .messages
            .push(format!("failed check: {name}"));
    }
    let verdicts = [
        ("c_2p_is_one", (report.c_2p - 1.0).abs() <= 1e-6),
        ("x0_below_half", sk.x0 > 0.0 && sk.x0 < 0.5),
        ("root_converged", sk.residual <= ROOT_TOL),
        ("sandwich", failed.is_empty()),
        ("violated", report.violated),
    ];
    outcome.report.messages.push(if report.violated {
        format!(
            "CONJECTURE VIOLATED: C_FB(1) >= {} > 1 = C(2)",
            report::format_number(sk.rate_bits)
        )
    } else {
        format!(
            "conjecture not violated: sk_rate {} <= C(2) = {}",
            report::format_number(sk.rate_bits),
            report::format_number(report.c_2p)
        )
    });
    judge(&mut outcome, &verdicts);
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateArgs {
    pub power: f64,
    pub rate: Option<f64>,
    pub horizon: usize,
    pub burn_in: Option<usize>,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
struct SimulateOutputs {
    scheme: SchemeConfig,
    trace_rate_bits: f64,
    contraction_estimate: f64,
    terminal_error_variance: f64,
    trace_csv: Option<String>,
    trace: Vec<fbcap_core::TraceStep>,
    monte_carlo: Option<fbcap_core::MonteCarloReport>,
    monte_carlo_skipped: Option<String>,
}

pub fn trace_table(trace: &VarianceTrace) -> Table {
    let mut table = Table::new(&["step", "power", "error_variance", "contraction"]);
    for s in &trace.steps {
        table.push(vec![
            json!(s.step),
            json!(s.power),
            json!(s.error_variance),
            json!(s.contraction),
        ]);
    }
    table
}

pub fn simulate(
    psd_arg: &str,
    args: &SimulateArgs,
    trace_out: Option<&Path>,
    quad: &QuadratureConfig,
) -> Result<Outcome, CliError> {
    let psd = parse_psd_arg(psd_arg)?;
    check_power(args.power)?;
    let burn_in = args.burn_in.unwrap_or(args.horizon / 4);
    // the trace does not depend on the rate, so a placeholder rate finds the default
    let probe = SchemeConfig::new(args.power, args.horizon, 1.0)?.with_burn_in(burn_in);
    let trace = variance_recursion(&probe, &psd)?;
    let rate = args.rate.unwrap_or(0.9 * trace.rate_bits());
    let config = SchemeConfig {
        rate_bits: rate,
        ..probe
    }
    .with_seed(args.seed);
    config.validate()?;

    let table = trace_table(&trace);
    if let Some(path) = trace_out {
        std::fs::write(path, table.to_csv()?).map_err(|e| {
            CliError::Invalid(format!("cannot write trace to {}: {e}", path.display()))
        })?;
    }

    let (monte_carlo, skipped) = if args.trials == 0 {
        (None, Some("no trials requested".to_string()))
    } else {
        match MonteCarloPlan::new(&config, &psd) {
            Ok(plan) => (Some(run_plan(&plan, args.trials)?), None),
            Err(e @ Error::InvalidInput(_)) => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        }
    };

    let outputs = SimulateOutputs {
        scheme: config,
        trace_rate_bits: trace.rate_bits(),
        contraction_estimate: trace.contraction_estimate,
        terminal_error_variance: trace.terminal_error_variance(),
        trace_csv: trace_out.map(|p| p.display().to_string()),
        trace: trace.steps.clone(),
        monte_carlo,
        monte_carlo_skipped: skipped.clone(),
    };
    let mut input = echo(Some((&psd, psd_arg)), Some(args.power), quad);
    input.seed = Some(args.seed);
    for (k, v) in [
        ("rate", json!(rate)),
        ("horizon", json!(args.horizon)),
        ("burn_in", json!(burn_in)),
        ("trials", json!(args.trials)),
    ] {
        input.parameters.insert(k.into(), v);
    }
    let mut outcome = finish("simulate", input, to_value(&outputs), table);
    if let Some(reason) = skipped {
        outcome
            .report
            .messages
            .push(format!("monte carlo skipped: {reason}"));
    }
    Ok(outcome)
}
