//! Command-line surface of the marine-reserve models.
//!
//! [`run`] parses arguments, executes one subcommand and returns the process
//! exit code: 0 on success, 2 on invalid input, 3 when a solver fails.

mod csv_out;
mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use mpa_core::dynamics::ModelVariant;
use mpa_core::equilibrium::{r2_upper_bound, EquilibriumReport, ReserveModel};
use mpa_core::scenario::{parse_scenario, RunRecord, Scenario, TrajectorySummary};
use mpa_core::simulation::{discounted_revenue, integrate, ControlSchedule};
use mpa_core::{
    calibrate_r, global_equilibrium, normality_diagnosis, patches_equilibrium, reproduce_paper,
    DiffusionSpec, Error, PaperAudit,
};

use csv_out::{equilibrium_row, opt_float, CsvFile};
pub use csv_out::{float as csv_float, EQUILIBRIUM_HEADER};
use table::{num, opt, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mpa", version, about = "Marine reserve bioeconomic models")]
struct Cli {
    /// Suppress tables on standard output; files are still written.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal stationary equilibrium of one reserve model.
    Equilibrium {
        /// Scenario TOML file; the built-in reproduction scenario when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// patches | global
        #[arg(long, default_value = "patches")]
        model: String,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the run record as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normality and profitability diagnostics of the patches model.
    Check {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a model forward under the scenario's constant effort.
    Simulate {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// patches | global | patches-open | global-open; defaults to the scenario variant.
        #[arg(long)]
        model: Option<String>,
        /// Trajectory CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Calibrate the aggregate growth rate from the open-access patches optimum.
    Calibrate {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Patches and global equilibria side by side.
    Compare {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Stationary values over a grid of reserve shares with size-dependent diffusion.
    AlphaSweep {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Interior grid points; alpha_i = i / (N + 1).
        #[arg(long, default_value_t = 19)]
        points: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Recompute the published numerical comparison and report deviations.
    ReproducePaper {
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the run record as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs the CLI on `args` (including the program name), writing tables to
/// `stdout` and errors to standard error.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(text.as_bytes());
                return EXIT_OK;
            }
            eprint!("{text}");
            return EXIT_VALIDATION;
        }
    };
    let mut sink = Vec::new();
    let result = execute(cli.command, &mut sink);
    if !cli.quiet {
        let _ = stdout.write_all(&sink);
        let _ = stdout.flush();
    }
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_SOLVER
    }
}

pub fn load_scenario(path: Option<&Path>) -> Result<Scenario, Error> {
    match path {
        None => Ok(Scenario::paper()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Scenario(format!("cannot read {}: {e}", p.display())))?;
            parse_scenario(&text)
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text)
        .map_err(|e| Error::Scenario(format!("cannot write {}: {e}", path.display())))
}

type Out<'a> = &'a mut Vec<u8>;

fn execute(command: Command, out: Out) -> Result<(), Error> {
    match command {
        Command::Equilibrium {
            scenario,
            model,
            csv,
            out: record,
        } => cmd_equilibrium(
            &load_scenario(scenario.as_deref())?,
            &model,
            csv.as_deref(),
            record.as_deref(),
            out,
        ),
        Command::Check {
            scenario,
            out: record,
        } => cmd_check(&load_scenario(scenario.as_deref())?, record.as_deref(), out),
        Command::Simulate {
            scenario,
            model,
            out: path,
        } => cmd_simulate(
            &load_scenario(scenario.as_deref())?,
            model.as_deref(),
            &path,
            out,
        ),
        Command::Calibrate {
            scenario,
            csv,
            out: record,
        } => cmd_calibrate(
            &load_scenario(scenario.as_deref())?,
            csv.as_deref(),
            record.as_deref(),
            out,
        ),
        Command::Compare { scenario, csv } => {
            cmd_compare(&load_scenario(scenario.as_deref())?, csv.as_deref(), out)
        }
        Command::AlphaSweep {
            scenario,
            points,
            csv,
        } => cmd_alpha_sweep(
            &load_scenario(scenario.as_deref())?,
            points,
            csv.as_deref(),
            out,
        ),
        Command::ReproducePaper { csv, out: record } => {
            cmd_reproduce(csv.as_deref(), record.as_deref(), out)
        }
    }
}

fn header(out: Out, scenario: &Scenario) {
    let _ = writeln!(
        out,
        "scenario: {} (digest {})",
        scenario.name,
        &scenario.digest()[..16]
    );
}

fn equilibrium_table(r: &EquilibriumReport) -> Table {
    let mut t = Table::new(["quantity", "value"]);
    t.row(["x1_star".into(), num(r.x1_star)])
        .row(["x2_star".into(), num(r.x2_star)])
        .row(["E_star".into(), num(r.e_star)])
        .row(["lambda_star".into(), opt(r.lambda_star)])
        .row(["J_star".into(), num(r.j_star)])
        .row(["normal".into(), r.normal.to_string()])
        .row(["profitable".into(), r.profitable.to_string()])
        .row(["feasible".into(), r.feasible.to_string()]);
    t
}

fn diagnostics_lines(out: Out, r: &EquilibriumReport) {
    for f in &r.diagnostics {
        match f.value {
            Some(v) => {
                let _ = writeln!(out, "  {}: {}  {}", f.key, num(v), f.note);
            }
            None => {
                let _ = writeln!(out, "  {}: {}", f.key, f.note);
            }
        }
    }
}

fn cmd_equilibrium(
    scenario: &Scenario,
    model: &str,
    csv: Option<&Path>,
    record: Option<&Path>,
    out: Out,
) -> Result<(), Error> {
    let model: ReserveModel = model.parse()?;
    let report = mpa_core::equilibrium::equilibrium(model, &scenario.bio, &scenario.econ)?;
    header(out, scenario);
    let _ = writeln!(out, "model: {model:?}\n");
    let _ = write!(out, "{}", equilibrium_table(&report).render());
    if !report.diagnostics.is_empty() {
        let _ = writeln!(out, "\ndiagnostics:");
        diagnostics_lines(out, &report);
    }
    if let Some(path) = csv {
        let mut f = CsvFile::new(&EQUILIBRIUM_HEADER);
        f.record(equilibrium_row(&report));
        f.write_to(path)?;
    }
    if let Some(path) = record {
        let mut rec = RunRecord::new(scenario);
        rec.equilibria.push(report);
        write_text(path, &rec.to_json())?;
    }
    Ok(())
}

fn cmd_check(scenario: &Scenario, record: Option<&Path>, out: Out) -> Result<(), Error> {
    let (bio, econ) = (&scenario.bio, &scenario.econ);
    let diag = normality_diagnosis(bio, econ)?;
    let r2_bound = r2_upper_bound(bio, econ).ok();
    let profitable = econ.p * econ.q > econ.c;
    header(out, scenario);
    let mut t = Table::new(["quantity", "value"]);
    t.row(["normality".into(), diag.decision.to_string()])
        .row(["normality (criterion)".into(), diag.criterion.to_string()])
        .row(["criteria agree".into(), diag.agrees().to_string()])
        .row(["theta = pq/c".into(), num(diag.theta)])
        .row(["theta0".into(), opt(diag.theta0)])
        .row(["alpha bound".into(), opt(diag.alpha_bound)])
        .row(["alpha".into(), num(bio.alpha)])
        .row(["r2 upper bound".into(), opt(r2_bound)])
        .row([
            "reserve density x1*/alpha".into(),
            num(diag.reserve_density),
        ])
        .row([
            "fished density x2*/(1-alpha)".into(),
            num(diag.fished_density),
        ])
        .row(["profitable (pq > c)".into(), profitable.to_string()]);
    let _ = write!(out, "\n{}", t.render());
    if let Some(path) = record {
        let mut rec = RunRecord::new(scenario);
        rec.normality = Some(diag);
        write_text(path, &rec.to_json())?;
    }
    Ok(())
}

fn cmd_simulate(
    scenario: &Scenario,
    model: Option<&str>,
    path: &Path,
    out: Out,
) -> Result<(), Error> {
    let variant = match model {
        Some(m) => m.parse::<ModelVariant>()?,
        None => scenario.variant,
    };
    let setup = scenario
        .simulation
        .ok_or_else(|| Error::Scenario("simulate needs a [simulation] table".into()))?;
    let traj = integrate(
        variant,
        setup.initial,
        &ControlSchedule::constant(setup.effort),
        &scenario.bio,
        &scenario.econ,
        scenario.diffusion,
        setup.horizon,
        setup.step,
    )?;
    let revenue = discounted_revenue(&traj, &scenario.econ, scenario.bio.alpha)?;
    let delta = scenario.econ.delta;
    let mut f = CsvFile::new(&["t", "x1", "x2", "E", "rent", "discounted_rent"]);
    for i in 0..traj.len() {
        let t = traj.times[i];
        let s = traj.states[i];
        let rent = traj.rents[i];
        f.record([
            csv_float(t),
            csv_float(s.x1),
            csv_float(s.x2),
            csv_float(traj.efforts[i]),
            csv_float(rent),
            csv_float((-delta * t).exp() * rent),
        ]);
    }
    f.write_to(path)?;
    let summary = TrajectorySummary {
        samples: traj.len(),
        horizon: *traj.times.last().unwrap(),
        final_state: traj.last_state(),
        discounted_revenue: revenue.value,
        tail_bound: revenue.tail_bound,
        clamped_samples: traj.clamped.iter().filter(|c| **c).count(),
    };
    header(out, scenario);
    let mut t = Table::new(["quantity", "value"]);
    t.row(["variant".into(), variant.name().to_string()])
        .row(["samples".into(), summary.samples.to_string()])
        .row(["horizon".into(), num(summary.horizon)])
        .row(["effort".into(), num(setup.effort)])
        .row(["final x1".into(), num(summary.final_state.x1)])
        .row(["final x2".into(), num(summary.final_state.x2)])
        .row(["discounted revenue".into(), num(summary.discounted_revenue)])
        .row(["tail bound".into(), num(summary.tail_bound)])
        .row([
            "clamped samples".into(),
            summary.clamped_samples.to_string(),
        ]);
    let _ = write!(out, "\n{}", t.render());
    let _ = writeln!(out, "trajectory written to {}", path.display());
    Ok(())
}

fn cmd_calibrate(
    scenario: &Scenario,
    csv: Option<&Path>,
    record: Option<&Path>,
    out: Out,
) -> Result<(), Error> {
    let cal = calibrate_r(&scenario.bio, &scenario.econ, scenario.diffusion)?;
    header(out, scenario);
    let mut t = Table::new(["quantity", "value"]);
    t.row(["E_bar (open-access patches effort)".into(), num(cal.e_bar)])
        .row(["stationary x1".into(), num(cal.foc.x1)])
        .row(["stationary x2".into(), num(cal.foc.x2)])
        .row(["costate p1".into(), num(cal.foc.p1)])
        .row(["costate p2".into(), num(cal.foc.p2)])
        .row(["stationarity residual".into(), num(cal.foc.residual_norm)])
        .row([
            "converged starts".into(),
            cal.foc.converged_starts.to_string(),
        ])
        .row(["calibrated r".into(), num(cal.r)])
        .row(["aggregate z*".into(), num(cal.z_star)])
        .row(["aggregate effort".into(), num(cal.clark_effort)])
        .row(["golden-rule residual".into(), num(cal.golden_rule_residual)])
        .row(["bisection iterations".into(), cal.iterations.to_string()]);
    let _ = write!(out, "\n{}", t.render());
    if let Some(path) = csv {
        let mut f = CsvFile::new(&[
            "E_bar",
            "x1",
            "x2",
            "p1",
            "p2",
            "r",
            "z_star",
            "clark_effort",
            "golden_rule_residual",
        ]);
        f.record(
            [
                cal.e_bar,
                cal.foc.x1,
                cal.foc.x2,
                cal.foc.p1,
                cal.foc.p2,
                cal.r,
                cal.z_star,
                cal.clark_effort,
                cal.golden_rule_residual,
            ]
            .map(csv_float),
        );
        f.write_to(path)?;
    }
    if let Some(path) = record {
        let mut rec = RunRecord::new(scenario);
        rec.calibration = Some(cal);
        write_text(path, &rec.to_json())?;
    }
    Ok(())
}

fn cmd_compare(scenario: &Scenario, csv: Option<&Path>, out: Out) -> Result<(), Error> {
    let (bio, econ) = (&scenario.bio, &scenario.econ);
    let patches = patches_equilibrium(bio, econ)?;
    let global = global_equilibrium(bio, econ)?;
    header(out, scenario);
    let ratio = econ.c / (econ.p * econ.q);
    let mut t = Table::new(["quantity", "patches", "global", "note"]);
    t.row([
        "x1_star".into(),
        num(patches.x1_star),
        num(global.x1_star),
        "patches: alpha(r1-delta)/(2 r1), independent of c/(pq); global: 1 - (1-alpha) c/(pq)"
            .to_string(),
    ])
    .row([
        "x2_star".into(),
        num(patches.x2_star),
        num(global.x2_star),
        "patches: root of a cubic; global: (1-alpha) c/(pq)".to_string(),
    ])
    .row([
        "E_star".into(),
        num(patches.e_star),
        num(global.e_star),
        "patches fishes at a positive rate; global effort is null".to_string(),
    ])
    .row([
        "lambda_star".into(),
        opt(patches.lambda_star),
        opt(global.lambda_star),
        String::new(),
    ])
    .row([
        "J_star".into(),
        num(patches.j_star),
        num(global.j_star),
        "global revenue is null: the fished zone sits at break-even density".to_string(),
    ])
    .row([
        "normal".into(),
        patches.normal.to_string(),
        global.normal.to_string(),
        String::new(),
    ])
    .row([
        "feasible".into(),
        patches.feasible.to_string(),
        global.feasible.to_string(),
        String::new(),
    ]);
    let _ = write!(out, "\n{}", t.render());
    let _ = writeln!(out, "\nc/(pq) = {}", num(ratio));
    if !patches.feasible {
        let _ = writeln!(
            out,
            "patches equilibrium is infeasible at these parameters:"
        );
        diagnostics_lines(out, &patches);
    }
    if let Some(path) = csv {
        let mut header = vec!["model"];
        header.extend(EQUILIBRIUM_HEADER);
        let mut f = CsvFile::new(&header);
        for (name, r) in [("patches", &patches), ("global", &global)] {
            let mut row = vec![name.to_string()];
            row.extend(equilibrium_row(r));
            f.record(row);
        }
        f.write_to(path)?;
    }
    Ok(())
}

/// Base coefficient of the size-dependent law used by the sweep. A constant
/// coefficient is rescaled so that the law reproduces it at the scenario share.
pub fn sweep_lambda0(scenario: &Scenario) -> f64 {
    match scenario.diffusion {
        DiffusionSpec::SizeDependent { lambda0 } => lambda0,
        DiffusionSpec::Constant { lambda } => {
            let a = scenario.bio.alpha;
            lambda / (a * (1.0 - a))
        }
    }
}

fn cmd_alpha_sweep(
    scenario: &Scenario,
    points: usize,
    csv: Option<&Path>,
    out: Out,
) -> Result<(), Error> {
    if points == 0 {
        return Err(Error::Invariant("points >= 1".into()));
    }
    let lambda0 = sweep_lambda0(scenario);
    let spec = DiffusionSpec::SizeDependent { lambda0 };
    let mut f = CsvFile::new(&[
        "alpha",
        "lambda_alpha",
        "x1_star",
        "x2_star",
        "E_star",
        "lambda_star",
        "J_star",
        "normal",
        "feasible",
        "global_x1_star",
        "global_x2_star",
        "global_J_star",
        "status",
    ]);
    let mut t = Table::new([
        "alpha",
        "lambda(alpha)",
        "x1*",
        "x2*",
        "E*",
        "lambda*",
        "J*",
        "feasible",
        "global J*",
    ]);
    header(out, scenario);
    let _ = writeln!(out, "size-dependent diffusion lambda0 = {}\n", num(lambda0));
    for i in 1..=points {
        let alpha = i as f64 / (points + 1) as f64;
        let mut bio = scenario.bio;
        bio.alpha = alpha;
        let lambda_alpha = spec.effective(alpha);
        let patches = patches_equilibrium(&bio, &scenario.econ);
        let global = global_equilibrium(&bio, &scenario.econ).ok();
        let status = match &patches {
            Ok(_) => "ok".to_string(),
            Err(e) if e.is_validation() => e.to_string(),
            Err(_) => return Err(patches.unwrap_err()),
        };
        let p = patches.as_ref().ok();
        let g = global.as_ref();
        f.record([
            csv_float(alpha),
            csv_float(lambda_alpha),
            opt_float(p.map(|r| r.x1_star)),
            opt_float(p.map(|r| r.x2_star)),
            opt_float(p.map(|r| r.e_star)),
            opt_float(p.and_then(|r| r.lambda_star)),
            opt_float(p.map(|r| r.j_star)),
            p.map(|r| r.normal.to_string()).unwrap_or_default(),
            p.map(|r| r.feasible.to_string()).unwrap_or_default(),
            opt_float(g.map(|r| r.x1_star)),
            opt_float(g.map(|r| r.x2_star)),
            opt_float(g.map(|r| r.j_star)),
            status,
        ]);
        t.row([
            format!("{alpha:.4}"),
            num(lambda_alpha),
            opt(p.map(|r| r.x1_star)),
            opt(p.map(|r| r.x2_star)),
            opt(p.map(|r| r.e_star)),
            opt(p.and_then(|r| r.lambda_star)),
            opt(p.map(|r| r.j_star)),
            p.map(|r| r.feasible.to_string())
                .unwrap_or_else(|| "-".into()),
            opt(g.map(|r| r.j_star)),
        ]);
    }
    let _ = write!(out, "{}", t.render());
    if let Some(path) = csv {
        f.write_to(path)?;
    }
    Ok(())
}

/// CSV artifact of the reproduction audit.
pub fn audit_csv(audit: &PaperAudit) -> Vec<u8> {
    let mut f = CsvFile::new(&[
        "quantity",
        "published",
        "computed",
        "deviation",
        "kind",
        "exact",
    ]);
    for row in &audit.rows {
        f.record([
            row.quantity.to_string(),
            csv_float(row.published),
            csv_float(row.computed),
            csv_float(row.deviation),
            format!("{:?}", row.kind).to_lowercase(),
            row.matches().to_string(),
        ]);
    }
    f.into_bytes()
}

fn cmd_reproduce(csv: Option<&Path>, record: Option<&Path>, out: Out) -> Result<(), Error> {
    let audit = reproduce_paper()?;
    let s = &audit.scenario;
    let _ = writeln!(
        out,
        "built-in scenario: alpha={} r1={} r2={} delta={} q={} c={} lambda=20",
        s.bio.alpha, s.bio.r1, s.bio.r2, s.econ.delta, s.econ.q, s.econ.c
    );
    let _ = writeln!(
        out,
        "*** p = {} is REVERSE-ENGINEERED (not published): chosen so that the global x2* equals 0.125 ***\n",
        s.econ.p
    );
    let mut t = Table::new(["quantity", "published", "computed", "deviation", ""]);
    for row in &audit.rows {
        let kind = match row.kind {
            mpa_core::DeviationKind::Relative => "rel",
            mpa_core::DeviationKind::Absolute => "abs",
        };
        t.row([
            row.quantity.to_string(),
            row.published.to_string(),
            num(row.computed),
            format!("{} ({kind})", num(row.deviation)),
            if row.matches() {
                "exact".into()
            } else {
                "DEVIATES".to_string()
            },
        ]);
    }
    let _ = write!(out, "{}", t.render());
    let _ = writeln!(out, "\nnotes:");
    for note in &audit.notes {
        let _ = writeln!(out, "  - {note}");
    }
    if let Some(path) = csv {
        std::fs::write(path, audit_csv(&audit))
            .map_err(|e| Error::Scenario(format!("cannot write {}: {e}", path.display())))?;
    }
    if let Some(path) = record {
        let mut rec = RunRecord::new(s);
        rec.equilibria = vec![audit.patches.clone(), audit.global.clone()];
        rec.normality = Some(audit.normality.clone());
        rec.calibration = Some(audit.calibration);
        rec.deviations = audit.rows.clone();
        write_text(path, &rec.to_json())?;
    }
    Ok(())
}
