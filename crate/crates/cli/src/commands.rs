//! The five workflows behind the CLI verbs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use risbeam_core::oracle::{
    exhaustive_discrete, grid_continuous, moreau_direct, projection_dense, OracleBudget,
    OracleError,
};
use risbeam_core::{
    align_for_quantization, assemble_channel, moreau_value, power_ratio_report, project_simplex,
    quantize_phases, region_coverage, scattered_pattern, solve_maxmin, user_powers,
    widebeam_directions, ChannelMatrix, Direction, PhaseConfig, RegionSpec, Scenario, Solution,
    SolverOptions, SolverStatus, Terminal, WeightedUser,
};

use crate::config::{ScenarioFile, SolverOverrides};
use crate::solution_io::{CoverageBlock, MetricsBlock, SolutionRecord};
use crate::CliError;

/// Exit code for a run that completed but did not converge.
pub const EXIT_NON_CONVERGENCE: i32 = 4;

fn write_output(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn solve_with_report(
    scenario: &Scenario,
    opts: &SolverOptions,
    verbose: bool,
) -> Result<(Solution, Vec<f64>, ChannelMatrix), CliError> {
    let channel = assemble_channel(scenario)
        .map_err(|e| CliError::Validation(format!("channel assembly: {e}")))?;
    let solution = solve_maxmin(&channel, &scenario.weights(), scenario.tx_power, opts)
        .map_err(|e| CliError::Validation(format!("solver: {e}")))?;
    let ratios = power_ratio_report(&solution.user_powers)
        .map_err(|e| CliError::Validation(format!("ratio report: {e}")))?;
    if verbose {
        eprintln!(
            "solve: status {:?}, gap {:.3e} (tau {:.3e}), {} outer iterations, {} inner steps",
            solution.status,
            solution.gap,
            solution.tau,
            solution.gap_trace.len(),
            solution.inner_iterations
        );
        eprintln!("solve: powers {:?}", solution.user_powers);
    }
    Ok((solution, ratios, channel))
}

pub struct SolveArgs {
    pub scenario: PathBuf,
    pub overrides: SolverOverrides,
    pub dump_channel: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub verbose: bool,
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32, CliError> {
    let file = ScenarioFile::load(&args.scenario)?;
    let scenario = file.build_scenario()?;
    let opts = file.solver_options(&args.overrides)?;
    if args.verbose {
        eprintln!("resolved scenario:\n{}", file.to_toml_string());
    }
    let (solution, ratios, channel) = solve_with_report(&scenario, &opts, args.verbose)?;

    if let Some(dump) = &args.dump_channel {
        let mut buf = Vec::new();
        channel
            .write_csv(&mut buf)
            .map_err(|e| CliError::Parse(format!("channel dump: {e}")))?;
        fs::write(dump, buf)
            .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", dump.display())))?;
    }

    let record = SolutionRecord::from_solution(&solution, ratios);
    write_output(args.out.as_deref(), &record.to_toml_string())?;
    Ok(if solution.status == SolverStatus::Converged {
        0
    } else {
        EXIT_NON_CONVERGENCE
    })
}

pub struct PatternArgs {
    pub scenario: PathBuf,
    pub solution: PathBuf,
    pub theta_step: f64,
    pub phi_step: f64,
    pub range: Option<f64>,
    pub normalize: bool,
    pub out: Option<PathBuf>,
}

/// Default probe range for pattern and wide-beam evaluation, in meters.
pub const DEFAULT_PROBE_RANGE_M: f64 = 15.0;

pub fn cmd_pattern(args: &PatternArgs) -> Result<i32, CliError> {
    let file = ScenarioFile::load(&args.scenario)?;
    let scenario = file.build_scenario()?;
    let record = SolutionRecord::load(&args.solution)?;
    if record.omega.len() != scenario.n_units() {
        return Err(CliError::Validation(format!(
            "solution has {} phases, scenario has {} units",
            record.omega.len(),
            scenario.n_units()
        )));
    }
    if !(args.theta_step > 0.0 && args.phi_step > 0.0) {
        return Err(CliError::Validation("grid steps must be > 0".into()));
    }
    let phases = PhaseConfig::new(record.omega);
    let thetas = sample_axis(args.theta_step, 90.0);
    let phis = sample_axis(args.phi_step, 360.0);
    let range = args.range.unwrap_or(DEFAULT_PROBE_RANGE_M);
    let grid = scattered_pattern(&scenario, &phases, &thetas, &phis, range, args.normalize)
        .map_err(|e| CliError::Validation(format!("pattern: {e}")))?;
    let mut buf = Vec::new();
    grid.write_csv(&mut buf)
        .map_err(|e| CliError::Parse(format!("pattern csv: {e}")))?;
    write_output(
        args.out.as_deref(),
        &String::from_utf8(buf).expect("csv is utf8"),
    )?;
    Ok(0)
}

fn sample_axis(step: f64, upper: f64) -> Vec<f64> {
    let mut samples = Vec::new();
    let mut i = 0u64;
    loop {
        let v = i as f64 * step;
        if v >= upper {
            return samples;
        }
        samples.push(v);
        i += 1;
    }
}

pub struct WidebeamArgs {
    pub scenario: PathBuf,
    pub center_theta: f64,
    pub center_phi: f64,
    pub radius: f64,
    pub count: usize,
    pub range: Option<f64>,
    pub overrides: SolverOverrides,
    pub out: Option<PathBuf>,
    pub verbose: bool,
}

pub fn cmd_widebeam(args: &WidebeamArgs) -> Result<i32, CliError> {
    let file = ScenarioFile::load(&args.scenario)?;
    let base = file.build_scenario()?;
    let opts = file.solver_options(&args.overrides)?;

    let center = Direction::new(args.center_theta, args.center_phi)
        .map_err(|e| CliError::Validation(format!("--center-theta/--center-phi: {e}")))?;
    let region = RegionSpec::new(center, args.radius, args.count)
        .map_err(|e| CliError::Validation(format!("--radius/--count: {e}")))?;
    let dirs = widebeam_directions(&region)
        .map_err(|e| CliError::Validation(format!("sub-beam layout: {e}")))?;

    let range = args.range.unwrap_or(DEFAULT_PROBE_RANGE_M);
    let mut scenario = base;
    scenario.users = dirs
        .iter()
        .map(|&d| {
            Terminal::new(d, range)
                .and_then(|t| WeightedUser::new(t, 1.0))
                .map_err(|e| CliError::Validation(format!("virtual user: {e}")))
        })
        .collect::<Result<_, _>>()?;

    let (solution, ratios, _) = solve_with_report(&scenario, &opts, args.verbose)?;
    let coverage = region_coverage(&scenario, &solution.phases, &region, range)
        .map_err(|e| CliError::Validation(format!("coverage report: {e}")))?;
    if args.verbose {
        eprintln!(
            "widebeam: coverage min {:.3e}, max {:.3e}, ripple {:.2} dB",
            coverage.min_power, coverage.max_power, coverage.ripple_db
        );
    }

    let mut record = SolutionRecord::from_solution(&solution, ratios);
    record.coverage = Some(CoverageBlock::from(&coverage));
    write_output(args.out.as_deref(), &record.to_toml_string())?;
    Ok(if solution.status == SolverStatus::Converged {
        0
    } else {
        EXIT_NON_CONVERGENCE
    })
}

pub struct QuantizeArgs {
    pub solution: PathBuf,
    pub scenario: PathBuf,
    pub bits: Option<u32>,
    pub out: Option<PathBuf>,
}

pub fn cmd_quantize(args: &QuantizeArgs) -> Result<i32, CliError> {
    let file = ScenarioFile::load(&args.scenario)?;
    let scenario = file.build_scenario()?;
    let weights = file.weights()?;
    let record = SolutionRecord::load(&args.solution)?;
    let bits = args
        .bits
        .or(file.quantize.as_ref().map(|q| q.bits))
        .ok_or_else(|| {
            CliError::Usage("--bits required (no [quantize] section in the scenario)".into())
        })?;
    if record.omega.len() != scenario.n_units() {
        return Err(CliError::Validation(format!(
            "solution has {} phases, scenario has {} units",
            record.omega.len(),
            scenario.n_units()
        )));
    }

    let channel = assemble_channel(&scenario)
        .map_err(|e| CliError::Validation(format!("channel assembly: {e}")))?;
    let metrics = |phases: &PhaseConfig| -> Result<MetricsBlock, CliError> {
        let powers = user_powers(&channel, phases, scenario.tx_power)
            .map_err(|e| CliError::Validation(format!("power evaluation: {e}")))?;
        let weighted: Vec<f64> = powers.iter().zip(&weights).map(|(p, a)| p * a).collect();
        let ratios = power_ratio_report(&powers)
            .map_err(|e| CliError::Validation(format!("ratio report: {e}")))?;
        let min_weighted_power = weighted.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(MetricsBlock {
            user_powers: powers,
            weighted_values: weighted,
            ratios,
            min_weighted_power,
        })
    };

    let input_phases = PhaseConfig::new(record.omega.clone());
    // carry a pre-existing continuous block through, so re-quantizing an
    // already-quantized record is the identity
    let continuous = match &record.continuous {
        Some(block) => block.clone(),
        None => metrics(&input_phases)?,
    };
    let aligned = align_for_quantization(&input_phases, bits)
        .map_err(|e| CliError::Validation(format!("quantize: {e}")))?;
    let quantized = quantize_phases(&aligned, bits)
        .map_err(|e| CliError::Validation(format!("quantize: {e}")))?;
    let quantized_metrics = metrics(&quantized)?;

    let out_record = SolutionRecord {
        bit_depth: Some(bits),
        omega: quantized.phases().to_vec(),
        user_powers: quantized_metrics.user_powers.clone(),
        weighted_values: quantized_metrics.weighted_values.clone(),
        ratios: quantized_metrics.ratios.clone(),
        continuous: Some(continuous),
        ..record
    };
    write_output(args.out.as_deref(), &out_record.to_toml_string())?;
    Ok(0)
}

pub struct OracleCheckArgs {
    pub bits: Option<u32>,
    pub units: Option<usize>,
    pub users: Option<usize>,
    pub max_evaluations: Option<u64>,
    pub seed: u64,
}

struct CheckRow {
    name: String,
    detail: String,
    pass: bool,
}

pub fn cmd_oracle_check(args: &OracleCheckArgs) -> Result<i32, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut rows: Vec<CheckRow> = Vec::new();
    let map_budget = |e: OracleError| match e {
        OracleError::BudgetExceeded { .. } | OracleError::TooManyDimensions { .. } => {
            CliError::OracleBudget(format!("{e}"))
        }
        other => CliError::Validation(format!("{other}")),
    };

    // 1. exact projection vs dense barycentric grid, n <= 3
    {
        let budget = OracleBudget::new(10_000_000, 600).map_err(map_budget)?;
        let tol = 2.0 / 600.0;
        let mut worst: f64 = 0.0;
        for _ in 0..60 {
            let n = rng.gen_range(1..4);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let dense = projection_dense(&x, &budget).map_err(map_budget)?;
            let exact = project_simplex(&x)
                .map_err(|e| CliError::Validation(format!("projection: {e}")))?;
            let dist: f64 = dense
                .iter()
                .zip(exact.weights())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(dist);
        }
        rows.push(CheckRow {
            name: "projection vs dense grid (n<=3)".into(),
            detail: format!("worst distance {worst:.2e} <= {tol:.2e}"),
            pass: worst <= tol,
        });
    }

    // 2. envelope closed form vs direct minimization, n <= 2
    {
        let budget = OracleBudget::new(200_000_000, 4000).map_err(map_budget)?;
        let tol = 1e-6;
        let mut worst: f64 = 0.0;
        for n in [1usize, 2, 2] {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let direct = moreau_direct(&x, 1.0, &budget).map_err(map_budget)?;
            let closed = moreau_value(&x, 1.0)
                .map_err(|e| CliError::Validation(format!("envelope: {e}")))?;
            worst = worst.max((direct - closed).abs());
        }
        rows.push(CheckRow {
            name: "envelope closed form vs direct minimization (n<=2)".into(),
            detail: format!("worst |delta| {worst:.2e} <= {tol:.0e}"),
            pass: worst <= tol,
        });
    }

    // 3. solver vs continuous grid, N = 3
    {
        let budget = OracleBudget::new(1_000_000, 72).map_err(map_budget)?;
        let h = random_channel(&mut rng, 3, 2);
        let weights = [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)];
        let (_, grid_value) = grid_continuous(&h, &weights, &budget).map_err(map_budget)?;
        let opts = SolverOptions {
            restarts: 5,
            seed: args.seed,
            ..Default::default()
        };
        let sol = solve_maxmin(&h, &weights, 1.0, &opts)
            .map_err(|e| CliError::Validation(format!("solver: {e}")))?;
        let ratio = sol.min_weighted_power() / grid_value;
        rows.push(CheckRow {
            name: "solver vs continuous grid (N=3, K=2)".into(),
            detail: format!("solver/grid ratio {ratio:.4} >= 0.98"),
            pass: ratio >= 0.98,
        });
    }

    // 4. optional: exhaustive discrete vs quantized solver
    if args.bits.is_some() || args.units.is_some() || args.users.is_some() {
        let bits = args.bits.unwrap_or(2);
        let n = args.units.unwrap_or(4);
        let k = args.users.unwrap_or(2);
        let budget = OracleBudget::new(
            args.max_evaluations
                .unwrap_or(OracleBudget::default().max_evaluations),
            72,
        )
        .map_err(map_budget)?;
        let h = random_channel(&mut rng, n, k);
        let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..2.0)).collect();
        let (_, exhaustive_value) =
            exhaustive_discrete(&h, &weights, bits, &budget).map_err(map_budget)?;
        let opts = SolverOptions {
            restarts: 5,
            seed: args.seed,
            ..Default::default()
        };
        let sol = solve_maxmin(&h, &weights, 1.0, &opts)
            .map_err(|e| CliError::Validation(format!("solver: {e}")))?;
        let aligned = align_for_quantization(&sol.phases, bits)
            .map_err(|e| CliError::Validation(format!("quantize: {e}")))?;
        let quantized = quantize_phases(&aligned, bits)
            .map_err(|e| CliError::Validation(format!("quantize: {e}")))?;
        let powers = user_powers(&h, &quantized, 1.0)
            .map_err(|e| CliError::Validation(format!("power: {e}")))?;
        let quantized_value = powers
            .iter()
            .zip(&weights)
            .map(|(p, a)| p * a)
            .fold(f64::INFINITY, f64::min);
        // enumeration is the discrete global optimum, so it must dominate
        rows.push(CheckRow {
            name: format!("exhaustive vs quantized solver (N={n}, K={k}, {bits}-bit)"),
            detail: format!(
                "exhaustive {exhaustive_value:.4e} >= quantized {quantized_value:.4e} \
                 (gap {:.1}%)",
                (1.0 - quantized_value / exhaustive_value) * 100.0
            ),
            pass: exhaustive_value >= quantized_value - 1e-12 * exhaustive_value.abs(),
        });
    }

    let name_width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut all_pass = true;
    for row in &rows {
        println!(
            "{:<width$}  {}  {}",
            row.name,
            if row.pass { "PASS" } else { "FAIL" },
            row.detail,
            width = name_width
        );
        all_pass &= row.pass;
    }
    Ok(if all_pass { 0 } else { 3 })
}

fn random_channel(rng: &mut impl Rng, n: usize, k: usize) -> ChannelMatrix {
    let entries = (0..n * k)
        .map(|_| num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ChannelMatrix::from_entries(n, k, entries).expect("dimensions agree")
}
