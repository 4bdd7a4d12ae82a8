//! `ptshock` command-line front end.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use ptshock_core::characteristics::{enumerate_branches, Characteristics};
use ptshock_core::charges::{drift_report, DriftOptions};
use ptshock_core::deform::{map_u_from_w, map_w_from_u, Anchor};
use ptshock_core::io::{self, Table};
use ptshock_core::profile::eval_dual;
use ptshock_core::scenarios::{run_all, run_scenario, ScenarioConfig, ScenarioOutput};
use ptshock_core::shock::{complex_shock_roots, deformed_shock_time, find_shock_events, ComplexShockOutcome};
use ptshock_core::{parse, DeformedSystem, FSpec, InitialProfile, ShockEvent};

use config::{Settings, UsageError};

#[derive(Debug, Parser)]
#[command(name = "ptshock", version)]
#[command(about = "Shock and peak times of Burgers-type equations and their PT-symmetric deformations")]
struct Cli {
    /// Config file of `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Print the resolved settings and exit.
    #[arg(long, global = true)]
    show_config: bool,

    /// Report errors on stderr as JSON.
    #[arg(long, global = true)]
    json_errors: bool,

    /// Print results as JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,

    /// Deformed-side initial profile u0(x).
    #[arg(long, global = true, allow_hyphen_values = true)]
    u0: Option<String>,

    /// Undeformed initial profile w0(x), instead of u0.
    #[arg(long, global = true, allow_hyphen_values = true)]
    w0: Option<String>,

    /// Nonlinearity: a power such as `w^2`, or an expression in x.
    #[arg(long, global = true)]
    f: Option<String>,

    /// Deformation exponent; a comma list for shock-times.
    #[arg(long, global = true)]
    eps: Option<String>,

    /// Reality phase `m,sign` applied to u0.
    #[arg(long, global = true, allow_hyphen_values = true)]
    phase: Option<String>,

    /// Scan window `min,max,points`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    window: Option<String>,

    /// Spatial grid `min,max,points`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,

    /// Characteristic labels `min,max,points` for loop elimination.
    #[arg(long, global = true, allow_hyphen_values = true)]
    labels: Option<String>,

    /// Time or comma list of times.
    #[arg(long, global = true)]
    t: Option<String>,

    /// Charge exponents.
    #[arg(long, global = true)]
    kappa: Option<String>,

    /// Transform direction: `w-to-u` or `u-to-w`.
    #[arg(long, global = true)]
    direction: Option<String>,

    /// Complex search box `re_min,re_max,im_min,im_max`.
    #[arg(long = "box", global = true, allow_hyphen_values = true)]
    search_box: Option<String>,

    /// Seed lattice points per side of the box.
    #[arg(long, global = true)]
    lattice: Option<String>,

    /// Directory for CSV and JSON files.
    #[arg(long, global = true)]
    out: Option<String>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Catastrophe times and positions of a profile
    ShockTimes,
    /// All branches of the implicit solution at the given times
    Evolve,
    /// Map a field across the deformation
    Transform,
    /// Charges and their drift over the given times
    Charges,
    /// Complex catastrophe roots in a search box
    ComplexRoots,
    /// Run a named case study, or `all`
    Scenario { name: String },
}

impl Cli {
    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("u0", self.u0.clone()),
            ("w0", self.w0.clone()),
            ("f", self.f.clone()),
            ("eps", self.eps.clone()),
            ("phase", self.phase.clone()),
            ("window", self.window.clone()),
            ("grid", self.grid.clone()),
            ("labels", self.labels.clone()),
            ("t", self.t.clone()),
            ("kappa", self.kappa.clone()),
            ("direction", self.direction.clone()),
            ("box", self.search_box.clone()),
            ("lattice", self.lattice.clone()),
            ("out", self.out.clone()),
        ]
    }
}

#[derive(Debug)]
enum Failure {
    /// Bad invocation; `offset` locates a syntax error in a profile.
    Usage(String, Option<usize>),
    Domain(ptshock_core::Error),
    Scenario(Vec<String>),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0, None)
    }
}

impl From<ptshock_core::Error> for Failure {
    fn from(e: ptshock_core::Error) -> Self {
        use ptshock_core::Error;
        if e.is_usage() {
            let offset = match &e {
                Error::Syntax { offset, .. } | Error::UnknownIdentifier { offset, .. } => Some(*offset),
                _ => None,
            };
            Failure::Usage(e.to_string(), offset)
        } else {
            Failure::Domain(e)
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Usage(..) => 2,
            Failure::Scenario(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Domain(_) => "domain",
            Failure::Usage(..) => "usage",
            Failure::Scenario(_) => "scenario",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m, _) => m.clone(),
            Failure::Domain(e) => e.to_string(),
            Failure::Scenario(names) => format!("expectations not met: {}", names.join(", ")),
        }
    }

    fn offset(&self) -> Option<usize> {
        match self {
            Failure::Usage(_, offset) => *offset,
            _ => None,
        }
    }
}

type Run<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let json_errors = std::env::args().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if json_errors {
                report(&Failure::Usage(e.kind().to_string(), None), true);
            } else {
                let _ = e.print();
            }
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report(&f, cli.json_errors);
            ExitCode::from(f.code())
        }
    }
}

fn report(f: &Failure, json: bool) {
    if json {
        let v = serde_json::json!({
            "error": {
                "kind": f.kind(),
                "message": f.message(),
                "offset": f.offset(),
                "exit_code": f.code(),
            }
        });
        eprintln!("{v}");
    } else {
        eprintln!("error: {}", f.message());
    }
}

fn run(cli: &Cli) -> Run {
    let s = Settings::resolve(cli.config.as_deref(), &cli.flags())?;
    if cli.show_config {
        say(&s.dump());
        return Ok(());
    }
    let Some(command) = &cli.command else {
        return Err(Failure::Usage("missing subcommand; see --help".into(), None));
    };
    let out = s.get("out").map(PathBuf::from);
    match command {
        Command::ShockTimes => shock_times(&s, cli.json, out.as_deref()),
        Command::Evolve => evolve(&s, cli.json, out.as_deref()),
        Command::Transform => transform(&s, cli.json, out.as_deref()),
        Command::Charges => charges(&s, cli.json, out.as_deref()),
        Command::ComplexRoots => complex_roots(&s, cli.json, out.as_deref()),
        Command::Scenario { name } => scenario(name, &s, cli.json, out.as_deref()),
    }
}

/// The profile as typed, and whether it is `u0` (deformed side).
enum Profile {
    U0(ptshock_core::ProfileAst),
    W0(ptshock_core::ProfileAst),
}

fn profile(s: &Settings) -> Run<Profile> {
    match (s.get("u0"), s.get("w0")) {
        (Some(u), None) => Ok(Profile::U0(parse(u)?)),
        (None, Some(w)) => Ok(Profile::W0(parse(w)?)),
        (Some(_), Some(_)) => Err(Failure::Usage("give either u0 or w0, not both".into(), None)),
        (None, None) => Err(Failure::Usage("missing setting `u0` (or `w0`)".into(), None)),
    }
}

fn system(s: &Settings, eps: f64) -> Run<DeformedSystem> {
    let sys = DeformedSystem::new(eps, FSpec::parse(s.require("f")?)?)?;
    match s.get("phase") {
        None => Ok(sys),
        Some(p) => {
            let bad = || Failure::Usage(format!("`phase` must be m,sign with sign +1 or -1, got `{p}`"), None);
            let (m, sign) = p.split_once(',').ok_or_else(bad)?;
            let m: i32 = m.trim().parse().map_err(|_| bad())?;
            let sign: i8 = sign.trim().parse().map_err(|_| bad())?;
            Ok(sys.with_phase(m, sign)?)
        }
    }
}

fn single_eps(s: &Settings) -> Run<f64> {
    let eps: Vec<f64> = s.list("eps")?;
    match eps.as_slice() {
        [e] => Ok(*e),
        _ => Err(Failure::Usage("this command takes a single `eps`".into(), None)),
    }
}

fn characteristics(p: &Profile, sys: &DeformedSystem) -> Characteristics {
    match p {
        Profile::U0(u0) => Characteristics::for_system(u0.clone(), sys),
        Profile::W0(w0) => Characteristics::from_w0(w0.clone(), sys.undeformed_f()),
    }
}

fn emit(out: Option<&Path>, file: &str, table: &Table) -> Run {
    let csv = table.to_csv()?;
    match out {
        Some(dir) => write_file(&dir.join(file), &csv),
        None => {
            say(&csv);
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Run {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(ptshock_core::Error::from)?;
    }
    std::fs::write(path, text).map_err(|e| Failure::Domain(e.into()))
}

fn print_json<T: Serialize>(v: &T) -> Run {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::Domain(ptshock_core::Error::Io(e.to_string())))?;
    say(&format!("{text}\n"));
    Ok(())
}

/// Write to stdout; a closed pipe ends the process quietly.
fn say(text: &str) {
    use std::io::{ErrorKind, Write};
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() != ErrorKind::BrokenPipe {
            eprintln!("error: cannot write output: {e}");
            std::process::exit(1);
        }
        std::process::exit(0);
    }
}

#[derive(Serialize)]
struct EventRow {
    eps: f64,
    events: Vec<ShockEvent>,
}

fn shock_times(s: &Settings, json: bool, out: Option<&Path>) -> Run {
    let p = profile(s)?;
    let window = s.grid("window")?;
    let mut rows = Vec::new();
    for eps in s.list::<f64>("eps")? {
        let sys = system(s, eps)?;
        let events = match &p {
            Profile::U0(u0) => deformed_shock_time(u0, &sys, &window)?,
            Profile::W0(w0) => find_shock_events(&InitialProfile::W(w0.clone()), &sys.undeformed_f(), &window)?,
        };
        rows.push(EventRow { eps, events });
    }
    if let Some(dir) = out {
        let mut t = Table::new(&["eps", "t_s", "x_s", "re_x0", "im_x0", "kind", "system"]);
        for r in &rows {
            for mut row in io::events_table(&r.events).rows {
                row.insert(0, io::fmt_f64(r.eps));
                t.rows.push(row);
            }
        }
        write_file(&dir.join("events.csv"), &t.to_csv()?)?;
    }
    if json {
        return print_json(&rows);
    }
    let n = rows.iter().map(|r| r.events.len()).max().unwrap_or(0);
    let mut header = vec!["eps".to_string()];
    header.extend((1..=n).map(|k| format!("t_s{k}")));
    header.extend((1..=n).map(|k| format!("x_s{k}")));
    header.push("kind".into());
    let mut lines = vec![header];
    for r in &rows {
        let mut line = vec![format!("{}", r.eps)];
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.9}"));
        line.extend((0..n).map(|k| cell(r.events.get(k).map(|e| e.t_s))));
        line.extend((0..n).map(|k| cell(r.events.get(k).map(|e| e.x_s))));
        let kinds: Vec<String> = r
            .events
            .iter()
            .map(|e| format!("{:?}", e.kind).to_lowercase())
            .collect();
        line.push(kinds.join(","));
        lines.push(line);
    }
    print_aligned(&lines);
    Ok(())
}

fn print_aligned(lines: &[Vec<String>]) {
    let cols = lines.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            lines
                .iter()
                .filter_map(|l| l.get(c))
                .map(String::len)
                .max()
                .unwrap_or(0)
        })
        .collect();
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    for l in lines {
        let cells: Vec<String> = l
            .iter()
            .enumerate()
            .map(|(c, v)| format!("{v:>width$}", width = widths[c]))
            .collect();
        let _ = writeln!(w, "{}", cells.join("  "));
    }
}

fn evolve(s: &Settings, json: bool, out: Option<&Path>) -> Run {
    let p = profile(s)?;
    let sys = system(s, single_eps(s)?)?;
    let ch = characteristics(&p, &sys);
    let grid = s.grid("grid")?;
    let times: Vec<f64> = s.list("t")?;
    let mut sets = Vec::new();
    for &t in &times {
        sets.push(enumerate_branches(&ch.w0, &ch.f, &grid, t)?);
    }
    if json {
        return print_json(&sets);
    }
    match out {
        Some(dir) => {
            for (k, bs) in sets.iter().enumerate() {
                let file = format!("branches_{k}.csv");
                write_file(&dir.join(&file), &io::branch_set_table(bs).to_csv()?)?;
                say(&format!(
                    "t = {}: {} branches -> {}\n",
                    bs.t,
                    bs.max_branch_count(),
                    file
                ));
            }
            Ok(())
        }
        None => {
            let mut table = Table::new(&["t", "x", "branch_id", "re_w", "im_w"]);
            for bs in &sets {
                for mut row in io::branch_set_table(bs).rows {
                    row.insert(0, io::fmt_f64(bs.t));
                    table.rows.push(row);
                }
            }
            emit(None, "", &table)
        }
    }
}

fn transform(s: &Settings, json: bool, out: Option<&Path>) -> Run {
    let p = profile(s)?;
    let eps = single_eps(s)?;
    let sys = system(s, eps)?;
    let grid = s.grid("grid")?;
    let t: f64 = s.parsed("t")?;
    match s.require("direction")? {
        "w-to-u" => {
            let ch = characteristics(&p, &sys);
            let field = map_u_from_w(&ch, t, &grid, eps, Anchor::Left(Complex64::new(0.0, 0.0)))?;
            if json {
                return print_json(&field);
            }
            emit(out, "u.csv", &io::field_table(&field))
        }
        "u-to-w" => {
            let Profile::U0(u0) = p else {
                return Err(Failure::Usage("u-to-w maps a sampled u0; give `u0`".into(), None));
            };
            if t != 0.0 {
                return Err(Failure::Usage(
                    "u-to-w maps the initial profile; use t = 0".into(),
                    None,
                ));
            }
            let x = grid.nodes();
            let mut u = Vec::with_capacity(x.len());
            let mut u_x = Vec::with_capacity(x.len());
            let phase = sys
                .phase
                .map(|_| ptshock_core::model::reality_phase(&sys))
                .unwrap_or(Complex64::new(1.0, 0.0));
            for &xj in &x {
                let d = eval_dual(&u0, Complex64::new(xj, 0.0))?;
                u.push(d.value * phase);
                u_x.push(d.derivative * phase);
            }
            let w = map_w_from_u(&u, &u_x, &sys)?.w;
            if json {
                return print_json(&serde_json::json!({ "x": x, "w": w }));
            }
            emit(out, "w.csv", &io::complex_series_table(&x, "w", &w))
        }
        other => Err(Failure::Usage(
            format!("unknown direction `{other}`; use w-to-u or u-to-w"),
            None,
        )),
    }
}

fn charges(s: &Settings, json: bool, out: Option<&Path>) -> Run {
    let p = profile(s)?;
    let sys = system(s, single_eps(s)?)?;
    let ch = characteristics(&p, &sys);
    let opts = DriftOptions {
        grid: s.grid("grid")?,
        labels: s.grid("labels")?,
        shock_time: None,
    };
    let r = drift_report(&ch, &sys, &s.list::<f64>("kappa")?, &s.list::<f64>("t")?, &opts)?;
    if json {
        return print_json(&r);
    }
    emit(out, "charges.csv", &io::charge_table(&r))
}

fn complex_roots(s: &Settings, json: bool, out: Option<&Path>) -> Run {
    let p = profile(s)?;
    let sys = system(s, single_eps(s)?)?;
    let ch = characteristics(&p, &sys);
    let outcome = complex_shock_roots(&ch.w0, &ch.f, &s.search_box()?)?;
    if json {
        return print_json(&outcome);
    }
    match &outcome {
        ComplexShockOutcome::Roots { roots } => emit(out, "roots.csv", &io::roots_table(roots)),
        ComplexShockOutcome::RealDegenerate { events } => {
            eprintln!("real profile: roots lie on the real axis; reporting real events");
            emit(out, "events.csv", &io::events_table(events))
        }
    }
}

fn scenario_config(s: &Settings) -> Run<ScenarioConfig> {
    let grid = s.grid("grid")?;
    Ok(ScenarioConfig {
        window: s.grid("window")?,
        search_box: s.search_box()?,
        map_grid: grid,
        labels: s.grid("labels")?,
        drift_grid: grid,
    })
}

fn scenario(name: &str, s: &Settings, json: bool, out: Option<&Path>) -> Run {
    let cfg = scenario_config(s)?;
    let results: Vec<(String, ptshock_core::Result<ScenarioOutput>)> = if name == "all" {
        run_all(&cfg)
    } else {
        vec![(name.to_string(), run_scenario(name, &cfg))]
    };
    let mut outputs = Vec::new();
    for (_, r) in results {
        outputs.push(r?);
    }
    if let Some(dir) = out {
        for o in &outputs {
            o.write(dir)?;
        }
    }
    if json {
        let reports: Vec<_> = outputs.iter().map(|o| &o.report).collect();
        print_json(&reports)?;
    } else {
        for o in &outputs {
            let r = &o.report;
            say(&format!(
                "{} {}: {}\n",
                if r.passed { "PASS" } else { "FAIL" },
                r.name,
                r.description
            ));
            for c in &r.checks {
                say(&format!("  {c}\n"));
            }
        }
    }
    let failed: Vec<String> = outputs
        .iter()
        .filter(|o| !o.report.passed)
        .map(|o| o.report.name.clone())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Scenario(failed))
    }
}
