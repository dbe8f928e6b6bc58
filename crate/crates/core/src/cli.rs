//! Command-line front end. Every command produces one table, written as CSV
//! (header `name[unit]`) or JSON `{"columns": [...], "rows": [[...]]}`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bound_opt::find_working_point;
use crate::cycle_opt::{
    max_power_asymmetric, max_power_at_efficiency, max_power_unconstrained, BathPair,
    CyclePerformance,
};
use crate::error::{invalid, Error, Result};
use crate::explicit_sim::efficiency_sweep;
use crate::metrics::{ControlBasis, MetricRecipe};
use crate::models::{
    ising_max_capacity, optimal_degenerate_gap_ln, oscillator_bosonic_fom, qubit_bosonic_fom,
    three_level_fom, three_level_optimum, IsingMode,
};
use crate::optimize::{maximize_1d, OptimizerConfig};
use crate::protocol::{integrate_dissipation, ControlProtocol};
use crate::scaling::{
    asymptotic_table, criticality_check, multi_cycle_ratio, otto_comparison, CriticalExponents,
    EpsilonLaw, ScalingExponents,
};
use crate::thermo_core::HermitianOperator;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "CARNOT_LD_THREADS";

#[derive(Parser, Debug)]
#[command(name = "carnot-ld", version, about = "Low-dissipation heat engine toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Seed for multi-start optimizations.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Maximal heat capacity against system size.
    Capacity {
        #[arg(long, value_enum)]
        model: CapacityModel,
        /// `a:b`, `a:b:step` or a comma list.
        #[arg(long, default_value = "1:10")]
        n_range: String,
        #[arg(long, value_enum, default_value_t = IsingModeArg::Transfer)]
        ising_mode: IsingModeArg,
    },
    /// Figure of merit of a bosonic-bath model over its gap.
    ModelOpt {
        #[arg(long, value_enum)]
        model: BosonicModel,
        #[arg(long, default_value_t = 0.0)]
        ohmicity: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma0: f64,
        #[arg(long, default_value_t = 0.05)]
        w_min: f64,
        #[arg(long, default_value_t = 10.0)]
        w_max: f64,
        #[arg(long, default_value_t = 40)]
        points: usize,
    },
    /// Performance of a Carnot-like cycle built from a protocol file.
    Cycle {
        #[arg(long)]
        protocol: PathBuf,
        /// Separate protocol for the cold stroke (asymmetric dissipation).
        #[arg(long)]
        cold_protocol: Option<PathBuf>,
        #[arg(long = "Th")]
        t_h: f64,
        #[arg(long = "Tc")]
        t_c: f64,
        #[arg(long, conflicts_with = "max_power")]
        gamma: Option<f64>,
        #[arg(long)]
        max_power: bool,
    },
    /// Degenerate-level engine sweep at efficiency `(1 - 1/N) eta_C`.
    Explicit {
        #[arg(long = "N-range", default_value = "4:16")]
        n_range: String,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// `T_c / T_h`.
        #[arg(long, default_value_t = 0.9)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma_rate: f64,
    },
    /// Leading-order scaling table.
    Scaling(ScalingArgs),
}

#[derive(Args, Debug)]
pub struct ScalingArgs {
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    /// `alpha_c nu z dim`.
    #[arg(long, num_args = 4, value_names = ["ALPHA_C", "NU", "Z", "DIM"], allow_negative_numbers = true)]
    pub critical: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau0: f64,
    #[arg(long = "Th", default_value_t = 1.0)]
    pub t_h: f64,
    #[arg(long = "Tc", default_value_t = 0.9)]
    pub t_c: f64,
    #[arg(long, value_enum, default_value_t = EpsLawArg::InverseN)]
    pub eps_law: EpsLawArg,
    #[arg(long, default_value_t = 1.0)]
    pub eps_c: f64,
    #[arg(long, default_value = "8,16,32,64")]
    pub n_range: String,
    /// Number of cycles for the accumulated fluctuation column.
    #[arg(long, default_value_t = 1)]
    pub cycles: u64,
    /// Otto-to-isotherm relaxation factor.
    #[arg(long, default_value_t = 5.0)]
    pub kappa: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CapacityModel {
    Independent,
    Ising,
    Full,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsingModeArg {
    Exact,
    Transfer,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BosonicModel {
    Qubit,
    Oscillator,
    Threelevel,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsLawArg {
    Constant,
    InverseN,
    Critical,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(x.to_string()),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub warnings: Vec<String>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Numerical(format!("csv output failed: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Numerical(format!("csv output failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<Value>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::to_json).collect())
            .collect();
        let mut s = serde_json::to_string_pretty(&json!({ "columns": self.columns, "rows": rows }))
            .expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(self.to_json()),
        }
    }
}

/// Parses `a:b`, `a:b:step` or `x,y,z`.
pub fn parse_range(s: &str) -> Result<Vec<u64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|_| Error::InvalidInput(format!("bad size '{t}' in range '{s}'")))
    };
    let out: Vec<u64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let (a, b, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, c] => (num(a)?, num(b)?, num(c)?),
            _ => return invalid(format!("bad range '{s}'")),
        };
        if step == 0 || b < a {
            return invalid(format!("bad range '{s}'"));
        }
        (a..=b).step_by(step as usize).collect()
    } else {
        s.split(',').map(num).collect::<Result<_>>()?
    };
    if out.is_empty() {
        return invalid("empty size range");
    }
    Ok(out)
}

fn optimizer(common: &Common) -> OptimizerConfig {
    OptimizerConfig {
        seed: common.seed,
        ..OptimizerConfig::default()
    }
}

fn cmd_capacity(common: &Common, model: CapacityModel, ns: &[u64], mode: IsingModeArg) -> Result<Table> {
    let mut t = Table::new(&["N[1]", "C_max[1]", "C_max_per_N[1]", "lambda1[1]", "lambda2[1]"]);
    let cfg = optimizer(common);
    match model {
        CapacityModel::Independent => {
            let basis = ControlBasis::new(
                vec![HermitianOperator::from_diagonal(&[0.0, 1.0])?],
                vec!["w".into()],
            )?;
            let wp = find_working_point(&basis, &[1.0], &MetricRecipe::Kmb { tau_eq: 1.0 }, &cfg)?;
            for &n in ns {
                let c = wp.figure_of_merit * n as f64;
                t.push(vec![n.into(), c.into(), wp.figure_of_merit.into(), wp.lambda_star[0].into(), 0.0.into()]);
            }
        }
        CapacityModel::Ising => {
            let mode = match mode {
                IsingModeArg::Exact => IsingMode::Exact,
                IsingModeArg::Transfer => IsingMode::Transfer,
            };
            for &n in ns {
                let n32 = u32::try_from(n).map_err(|_| Error::Size(format!("N = {n} too large")))?;
                let (l1, l2, c) = ising_max_capacity(n32, mode, &cfg)?;
                t.push(vec![n.into(), (c * n as f64).into(), c.into(), l1.into(), l2.into()]);
            }
        }
        CapacityModel::Full => {
            for &n in ns {
                // ln(2^N - 1)
                let nf = n as f64;
                let ln_dm1 = nf * std::f64::consts::LN_2 + (-(-nf * std::f64::consts::LN_2).exp()).ln_1p();
                let (x, c) = optimal_degenerate_gap_ln(ln_dm1)?;
                t.push(vec![n.into(), c.into(), (c / nf).into(), x.into(), 0.0.into()]);
            }
        }
    }
    Ok(t)
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return invalid("need 0 < w_min < w_max and at least two points");
    }
    let h = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + i as f64 * h).collect())
}

fn cmd_model_opt(
    common: &Common,
    model: BosonicModel,
    alpha: f64,
    gamma0: f64,
    ws: &[f64],
) -> Result<Table> {
    if !(gamma0 > 0.0) {
        return invalid("gamma0 must be positive");
    }
    let mut t = Table::new(&["row[-]", "E1[1]", "E2[1]", "value[Gamma0]", "mu1[1]", "mu2[1]", "note[-]"]);
    let row = |kind: &str, e1: f64, e2: f64, v: f64, mu: (f64, f64), note: &str| {
        vec![kind.into(), e1.into(), e2.into(), v.into(), mu.0.into(), mu.1.into(), note.into()]
    };
    let tol = 1e-10;
    match model {
        BosonicModel::Qubit => {
            for &w in ws {
                t.push(row("curve", w, 0.0, qubit_bosonic_fom(w, alpha)?, (1.0, 0.0), ""));
            }
            let best = ws
                .iter()
                .copied()
                .max_by(|a, b| {
                    let f = |x: f64| qubit_bosonic_fom(x, alpha).unwrap_or(f64::NEG_INFINITY);
                    f(*a).total_cmp(&f(*b))
                })
                .expect("grid is not empty");
            match maximize_1d(|w| qubit_bosonic_fom(w, alpha).unwrap_or(f64::NEG_INFINITY), best, tol) {
                Some((w, v)) => t.push(row("optimum", w, 0.0, v, (1.0, 0.0), "")),
                None => unbounded(&mut t, "objective grows without bound as w -> 0"),
            }
        }
        BosonicModel::Oscillator => {
            for &w in ws {
                let v = oscillator_bosonic_fom(w, alpha)?;
                t.push(row("curve", w, 0.0, v.value, (1.0, 0.0), ""));
            }
            if alpha < 2.0 {
                unbounded(&mut t, "objective diverges as w -> 0 for ohmicity < 2");
            } else {
                let f = |w: f64| oscillator_bosonic_fom(w, alpha).map_or(f64::NEG_INFINITY, |v| v.value);
                let x0 = ws.iter().copied().max_by(|a, b| f(*a).total_cmp(&f(*b))).expect("grid is not empty");
                match maximize_1d(f, x0, tol) {
                    Some((w, v)) if w > 0.0 => t.push(row("optimum", w, 0.0, v, (1.0, 0.0), "")),
                    _ => unbounded(&mut t, "supremum approached as w -> 0"),
                }
            }
        }
        BosonicModel::Threelevel => {
            for &e in ws {
                t.push(row("curve", e, e, three_level_fom(e, e, alpha, gamma0)?, (0.0, 0.0), ""));
            }
            let wp = three_level_optimum(alpha, gamma0, &optimizer(common))?;
            let mu = (wp.direction_mu[0], wp.direction_mu[1]);
            t.push(row("optimum", wp.lambda_star[0], wp.lambda_star[1], wp.figure_of_merit, mu, ""));
        }
    }
    // Curves for the single-gap models are in units of Gamma0.
    if model != BosonicModel::Threelevel {
        for r in &mut t.rows {
            if let Cell::Num(v) = &mut r[3] {
                *v *= gamma0;
            }
        }
    }
    Ok(t)
}

fn unbounded(t: &mut Table, msg: &str) {
    t.warnings.push(msg.to_string());
    t.push(vec![
        "warning".into(),
        0.0.into(),
        0.0.into(),
        f64::INFINITY.into(),
        0.0.into(),
        0.0.into(),
        "unbounded".into(),
    ]);
}

fn read_protocol(path: &Path) -> Result<ControlProtocol> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    ControlProtocol::from_json(&text)
}

fn performance_table(p: &CyclePerformance) -> Table {
    let mut t = Table::new(&[
        "delta_S[k_B]",
        "Sigma_c[k_B*time]",
        "Sigma_h[k_B*time]",
        "tau_c[time]",
        "tau_h[time]",
        "Q_h[energy]",
        "Q_c[energy]",
        "W[energy]",
        "P[energy/time]",
        "eta[1]",
    ]);
    t.push(
        [p.delta_s, p.sigma_c, p.sigma_h, p.tau_c, p.tau_h, p.q_h, p.q_c, p.w, p.p, p.eta]
            .into_iter()
            .map(Cell::from)
            .collect(),
    );
    t
}

fn cmd_cycle(
    protocol: &Path,
    cold: Option<&Path>,
    baths: BathPair,
    gamma: Option<f64>,
    max_power: bool,
) -> Result<Table> {
    let hot = integrate_dissipation(&read_protocol(protocol)?)?;
    let cold_sigma = match cold {
        Some(path) => Some(integrate_dissipation(&read_protocol(path)?)?.sigma),
        None => None,
    };
    let perf = match (gamma, max_power, cold_sigma) {
        (Some(g), false, None) => max_power_at_efficiency(hot.delta_s, hot.sigma, baths, g)?,
        (Some(_), _, Some(_)) => {
            return invalid("--gamma is only available for symmetric dissipation");
        }
        (None, true, None) => max_power_unconstrained(hot.delta_s, hot.sigma, baths)?,
        (None, true, Some(sc)) => max_power_asymmetric(hot.delta_s, sc, hot.sigma, baths)?,
        _ => return invalid("give exactly one of --gamma or --max-power"),
    };
    Ok(performance_table(&perf))
}

fn cmd_explicit(ns: &[u64], eps: f64, r: f64, gamma_rate: f64) -> Result<Table> {
    let ns32 = ns
        .iter()
        .map(|&n| u32::try_from(n).map_err(|_| Error::Size(format!("N = {n} too large"))))
        .collect::<Result<Vec<_>>>()?;
    let engines = efficiency_sweep(&ns32, eps, r, gamma_rate)?;
    let mut t = Table::new(&[
        "N[1]",
        "P_ideal[energy/time]",
        "P_LD[energy/time]",
        "P_exact[energy/time]",
        "eta[1]",
        "tau_c[time]",
        "sigma_w2[energy^2]",
    ]);
    for e in engines {
        for w in &e.warnings {
            t.warnings.push(format!("N = {}: {w}", e.n));
        }
        t.push(vec![
            (e.n as u64).into(),
            e.p_ideal.into(),
            e.p_ld.into(),
            e.p_exact.into(),
            e.eta.into(),
            e.tau_c.into(),
            e.sigma_w2.into(),
        ]);
    }
    Ok(t)
}

fn cmd_scaling(s: &ScalingArgs) -> Result<Table> {
    let baths = BathPair::new(s.t_h, s.t_c)?;
    let critical = match &s.critical {
        Some(v) => Some(CriticalExponents {
            alpha_c: v[0],
            nu: v[1],
            z: v[2],
            dim: v[3],
        }),
        None => None,
    };
    let exps = match critical {
        Some(c) => {
            let mut e = ScalingExponents::from_critical(c, s.c0, s.tau0)?;
            if let Some(a) = s.a {
                e.a = a;
            }
            if let Some(b) = s.b {
                e.b = b;
            }
            if let Some(xi) = s.xi {
                e.xi = xi;
            }
            e.validate()?;
            e
        }
        None => ScalingExponents::new(s.a.unwrap_or(1.0), s.b.unwrap_or(0.0), s.xi.unwrap_or(1.0), s.c0, s.tau0)?,
    };
    let law = match s.eps_law {
        EpsLawArg::Constant => EpsilonLaw::Constant { c: s.eps_c },
        EpsLawArg::InverseN => EpsilonLaw::InverseN { c: s.eps_c },
        EpsLawArg::Critical => match critical {
            Some(c) => EpsilonLaw::Critical {
                c: s.eps_c,
                nu: c.nu,
                dim: c.dim,
            },
            None => return invalid("--eps-law critical needs --critical"),
        },
    };
    let ns = parse_range(&s.n_range)?;
    let rows = asymptotic_table(&exps, baths, law, &ns)?;
    let mut cols = vec![
        "N[1]",
        "epsilon[1]",
        "P[energy/time]",
        "tau_c[time]",
        "tau_h[time]",
        "W[energy]",
        "sigma_w2[energy^2]",
        "f_w[1]",
        "f_w_cycles[1]",
        "otto_ratio[1]",
    ];
    if critical.is_some() {
        cols.extend(["criticality_margin[1]", "supralinear[-]"]);
    }
    let mut t = Table::new(&cols);
    t.warnings = exps.warnings();
    // Otto comparison on a qubit at its capacity optimum.
    let qubit = HermitianOperator::from_diagonal(&[0.0, 2.399_357_280_515_467])?;
    let verdict = critical.map(|c| criticality_check(c.alpha_c, c.nu, c.z));
    for r in rows {
        let gamma = exps.gamma(r.n as f64);
        let otto = if gamma > 0.0 && gamma < 1.0 && s.t_h > s.t_c {
            otto_comparison(&qubit, s.t_h, 1.0 / s.t_h, 1.0 / s.t_c, gamma, s.kappa, s.tau0)?.ratio
        } else {
            0.0
        };
        let mut row: Vec<Cell> = vec![
            r.n.into(),
            r.epsilon.into(),
            r.p.into(),
            r.tau_c.into(),
            r.tau_h.into(),
            r.w.into(),
            r.sigma_w2.into(),
            r.f_w.into(),
            multi_cycle_ratio(r.f_w, s.cycles).into(),
            otto.into(),
        ];
        if let Some(v) = verdict {
            row.push(v.margin.into());
            row.push(if v.supralinear { "true" } else { "false" }.into());
        }
        t.push(row);
    }
    Ok(t)
}

/// Runs a parsed command and returns its table.
pub fn execute(cli: &Cli) -> Result<Table> {
    match &cli.command {
        Command::Capacity {
            model,
            n_range,
            ising_mode,
        } => cmd_capacity(&cli.common, *model, &parse_range(n_range)?, *ising_mode),
        Command::ModelOpt {
            model,
            ohmicity,
            gamma0,
            w_min,
            w_max,
            points,
        } => cmd_model_opt(&cli.common, *model, *ohmicity, *gamma0, &grid(*w_min, *w_max, *points)?),
        Command::Cycle {
            protocol,
            cold_protocol,
            t_h,
            t_c,
            gamma,
            max_power,
        } => cmd_cycle(
            protocol,
            cold_protocol.as_deref(),
            BathPair::new(*t_h, *t_c)?,
            *gamma,
            *max_power,
        ),
        Command::Explicit {
            n_range,
            eps,
            r,
            gamma_rate,
        } => cmd_explicit(&parse_range(n_range)?, *eps, *r, *gamma_rate),
        Command::Scaling(s) => cmd_scaling(s),
    }
}

/// Writes `text` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| Error::InvalidInput(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidInput(format!("{THREADS_ENV} must be a positive integer")))?;
        // A pool built earlier in the process keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = configure_threads()
        .and_then(|_| execute(&cli))
        .and_then(|t| {
            for w in &t.warnings {
                eprintln!("warning: {w}");
            }
            let text = t.render(cli.common.format)?;
            match &cli.common.out {
                Some(p) => write_atomic(p, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("4:8").unwrap(), vec![4, 5, 6, 7, 8]);
        assert_eq!(parse_range("2:10:4").unwrap(), vec![2, 6, 10]);
        assert_eq!(parse_range("8,16").unwrap(), vec![8, 16]);
        assert!(parse_range("5:2").is_err());
        assert!(parse_range("a").is_err());
    }

    #[test]
    fn csv_and_json_agree() {
        let mut t = Table::new(&["x[1]", "label[-]"]);
        t.push(vec![1.5.into(), "a".into()]);
        assert_eq!(t.to_csv().unwrap(), "x[1],label[-]\n1.5,a\n");
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["columns"][0], "x[1]");
        assert_eq!(v["rows"][0][0], 1.5);
    }

    #[test]
    fn full_capacity_rows() {
        let cli = Cli::try_parse_from(["carnot-ld", "capacity", "--model", "full", "--n-range", "1,10"]).unwrap();
        let t = execute(&cli).unwrap();
        assert_eq!(t.rows.len(), 2);
        match &t.rows[0][1] {
            Cell::Num(c) => assert!((c - 0.4392).abs() < 1e-4),
            _ => panic!(),
        }
    }

    #[test]
    fn bad_flags_exit_2() {
        assert_eq!(run(["carnot-ld", "capacity", "--model", "nope"]), 2);
        assert_eq!(run(["carnot-ld", "explicit", "--N-range", "1:3"]), 2);
    }
}
