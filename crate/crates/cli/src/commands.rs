use crate::args::{Cli, Command, Format, KiteAction, RunArgs};
use crate::output::{attach_densities, components_csv, CommandOutput, OutputFile};
use crate::CliError;
use serde::Serialize;
use slapmap_core::ergodic::{analyze_with, ErgodicReport, UlamConfig};
use slapmap_core::geometry::{extract_slap_map, Polygon, PolygonFile, PolygonReport};
use slapmap_core::kite::{
    bifurcation_probe_with, newton_solve, return_map_slopes, verify_doubling_orbit, DoublingOrbitReport,
    ProbeReport, ReturnSlopes, DEFAULT_GUESS,
};
use slapmap_core::lorenz::{self, LorenzAnalysis};
use slapmap_core::nonergodic::{self, Attempt, NonergodicConfig};
use slapmap_core::regular::{self, Prediction, RegularReport};
use slapmap_core::triangles::{
    check_second_iterate_invariance, classify, predict_triangle, triangle_from_angles, TriangleKind,
    TrianglePrediction, TriangleSpec,
};
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

/// Newton tolerance when `--tol` is not given.
pub const NEWTON_TOL: f64 = 1e-12;
/// Newton iteration cap when `--max-iter` is not given.
pub const NEWTON_MAX_ITER: usize = 100;
/// Smallest fraction of bins an acute triangle's component must cover.
pub const FULL_SUPPORT_FRACTION: f64 = 0.999;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub bins: f64,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            bins: 3000.0,
            tol: None,
            max_iter: None,
            format: Format::Json,
            out: None,
        }
    }
}

impl From<&RunArgs> for RunConfig {
    fn from(a: &RunArgs) -> Self {
        RunConfig {
            bins: a.bins,
            tol: a.tol,
            max_iter: a.max_iter,
            format: a.format,
            out: a.out.clone(),
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        let bad = |what: &str| Err(CliError::Input(format!("{what} must be positive")));
        if !(self.bins > 0.0 && self.bins.is_finite()) {
            return bad("--bins");
        }
        if self.tol.is_some_and(|t| !(t > 0.0)) {
            return bad("--tol");
        }
        if self.max_iter == Some(0) {
            return bad("--max-iter");
        }
        Ok(())
    }

    pub fn ulam(&self) -> UlamConfig {
        let d = UlamConfig::default();
        UlamConfig {
            power_tol: self.tol.unwrap_or(d.power_tol),
            power_max_iter: self.max_iter.unwrap_or(d.power_max_iter),
            ..d
        }
    }

    /// Uniform bin count for a boundary of the given length.
    pub fn bins_for(&self, perimeter: f64) -> usize {
        (self.bins * perimeter).round().max(10.0) as usize
    }

    fn newton(&self) -> (f64, usize) {
        (self.tol.unwrap_or(NEWTON_TOL), self.max_iter.unwrap_or(NEWTON_MAX_ITER))
    }
}

pub fn run(cli: &Cli) -> Result<CommandOutput, CliError> {
    let cfg = RunConfig::from(&cli.run);
    cfg.validate()?;
    match &cli.command {
        Command::Analyze { file } => cmd_analyze(file, &cfg),
        Command::Regular { d } => cmd_regular(*d, &cfg),
        Command::Triangle { a1, a2 } => cmd_triangle(*a1, *a2, &cfg),
        Command::Lorenz { a } => cmd_lorenz(*a),
        Command::Kite { action } => match action {
            KiteAction::Solve { guess } => cmd_kite_solve(guess_pair(guess.as_deref()), &cfg),
            KiteAction::Probe { epsilon, guess } => cmd_kite_probe(*epsilon, guess_pair(guess.as_deref()), &cfg),
        },
        Command::Nonergodic { n, pivot, apex } => {
            let mut nc = NonergodicConfig {
                pivot: *pivot,
                ..NonergodicConfig::default()
            };
            if let Some(a) = apex {
                nc.apex_schedule = a.clone();
            }
            cmd_nonergodic(*n, nc, &cfg)
        }
    }
}

fn guess_pair(g: Option<&[f64]>) -> (f64, f64) {
    match g {
        Some([a, b]) => (*a, *b),
        _ => DEFAULT_GUESS,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub polygon: PolygonReport,
    pub report: ErgodicReport,
}

pub fn cmd_analyze(file: &std::path::Path, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let text = fs::read_to_string(file).map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
    let parsed: PolygonFile =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
    let poly = Polygon::new(parsed.vertices)?;
    let slap = extract_slap_map(&poly)?;
    let mut report = analyze_with(&slap.map, cfg.bins_for(poly.perimeter()), &cfg.ulam())?;
    let files = attach_densities(&mut report, cfg.out.as_deref(), "");
    let matched = !report.unresolved();
    let csv = components_csv(&report);
    let body = AnalyzeReport {
        polygon: PolygonReport::from(&poly),
        report,
    };
    Ok(with_files(CommandOutput::new(&body, csv, matched), files))
}

fn with_files(mut out: CommandOutput, files: Vec<OutputFile>) -> CommandOutput {
    out.files.extend(files);
    out
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegularOutcome {
    /// Even polygons: every point has period two, nothing to measure.
    Involution { d: usize, notice: String },
    Odd(Box<RegularVerification>),
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularVerification {
    #[serde(flatten)]
    pub facts: RegularReport,
    pub tower: LorenzAnalysis,
    pub measured: Prediction,
    pub periods: Vec<usize>,
    pub ergodic_match: bool,
    pub mixing_match: bool,
    pub report: ErgodicReport,
}

pub fn cmd_regular(d: usize, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    if d < 3 {
        return Err(CliError::Input(format!("a regular polygon needs d >= 3, got {d}")));
    }
    if d % 2 == 0 {
        let body = RegularOutcome::Involution {
            d,
            notice: format!("the slap map of the regular {d}-gon is an involution: every point has period 2"),
        };
        let csv = format!("d,kind\n{d},involution\n");
        return Ok(CommandOutput::new(&body, csv, true));
    }
    let v = verify_regular(d, cfg)?;
    let matched = v.ergodic_match && v.mixing_match && !v.report.unresolved();
    let mut csv = format!(
        "d,m,predicted_ergodic,predicted_mixing,measured_ergodic,measured_mixing,match\n{d},{},{},{},{},{},{}\n",
        v.facts.m, v.facts.predicted.ergodic, v.facts.predicted.mixing, v.measured.ergodic, v.measured.mixing, matched
    );
    csv.push('\n');
    csv.push_str(&components_csv(&v.report));
    let mut v = v;
    let files = attach_densities(&mut v.report, cfg.out.as_deref(), "");
    let body = RegularOutcome::Odd(Box::new(v));
    Ok(with_files(CommandOutput::new(&body, csv, matched), files))
}

/// Predictions, renormalization tower and Ulam measurement for odd `d`.
pub fn verify_regular(d: usize, cfg: &RunConfig) -> Result<RegularVerification, CliError> {
    let facts = regular::regular_report(d)?;
    let tower = lorenz::renormalization_tower(regular::reduced_slap(d)?.expansion())?;
    let poly = Polygon::regular(d)?;
    let slap = extract_slap_map(&poly)?;
    let report = analyze_with(&slap.map, cfg.bins_for(poly.perimeter()), &cfg.ulam())?;
    let periods = report.periods();
    let mixing = if periods.iter().all(|&p| p == periods[0]) { periods[0] } else { 0 };
    let measured = Prediction {
        ergodic: report.component_count(),
        mixing,
    };
    Ok(RegularVerification {
        ergodic_match: measured.ergodic == facts.predicted.ergodic,
        mixing_match: measured.mixing == facts.predicted.mixing,
        facts,
        tower,
        measured,
        periods,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangleReport {
    pub spec: TriangleSpec,
    pub kind: TriangleKind,
    pub prediction: TrianglePrediction,
    /// Second-iterate invariance of the longest side; only for non-acute.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariance: Option<bool>,
    /// Fraction of bins in the support; only for acute.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_fraction: Option<f64>,
    pub count_match: bool,
    pub mixing_match: bool,
    pub report: ErgodicReport,
}

impl TriangleReport {
    pub fn matched(&self) -> bool {
        self.count_match
            && self.mixing_match
            && self.invariance.unwrap_or(true)
            && self.support_fraction.map_or(true, |f| f >= FULL_SUPPORT_FRACTION)
            && !self.report.unresolved()
    }
}

pub fn verify_triangle(a1: f64, a2: f64, cfg: &RunConfig) -> Result<TriangleReport, CliError> {
    let t = triangle_from_angles(a1, a2, 1.0)?;
    let spec = TriangleSpec::from_polygon(&t)?;
    let kind = classify(&spec);
    let prediction = predict_triangle(&spec);
    let slap = extract_slap_map(&t)?;
    let report = analyze_with(&slap.map, cfg.bins_for(t.perimeter()), &cfg.ulam())?;
    let invariance = match kind {
        TriangleKind::Acute => None,
        _ => Some(check_second_iterate_invariance(&t)?),
    };
    let support_fraction = match (kind, report.components.first()) {
        (TriangleKind::Acute, Some(c)) => Some(c.cell_count as f64 / report.bin_count as f64),
        (TriangleKind::Acute, None) => Some(0.0),
        _ => None,
    };
    Ok(TriangleReport {
        spec,
        kind,
        prediction,
        invariance,
        support_fraction,
        count_match: report.component_count() == prediction.ergodic_count,
        mixing_match: report.periods().iter().all(|&p| prediction.mixing.admits(p)),
        report,
    })
}

pub fn cmd_triangle(a1: f64, a2: f64, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let mut r = verify_triangle(a1, a2, cfg)?;
    let matched = r.matched();
    let mut csv = format!(
        "a1,a2,kind,invariance,support_fraction,match\n{a1},{a2},{},{},{},{matched}\n\n",
        serde_json::to_value(r.kind).expect("kind serializes").as_str().unwrap_or_default(),
        r.invariance.map_or(String::new(), |b| b.to_string()),
        r.support_fraction.map_or(String::new(), |f| f.to_string()),
    );
    csv.push_str(&components_csv(&r.report));
    let files = attach_densities(&mut r.report, cfg.out.as_deref(), "");
    Ok(with_files(CommandOutput::new(&r, csv, matched), files))
}

#[derive(Debug, Clone, Serialize)]
pub struct LorenzReport {
    #[serde(flatten)]
    pub tower: LorenzAnalysis,
    pub mixing_components: usize,
}

pub fn cmd_lorenz(a: f64) -> Result<CommandOutput, CliError> {
    let tower = lorenz::renormalization_tower(a)?;
    let mixing_components = lorenz::predicted_mixing_components(a)?;
    let mut csv = String::from("level,lo,hi\n");
    for (k, j) in tower.intervals.iter().enumerate() {
        let _ = writeln!(csv, "{k},{},{}", j[0], j[1]);
    }
    let body = LorenzReport {
        tower,
        mixing_components,
    };
    Ok(CommandOutput::new(&body, csv, true))
}

#[derive(Debug, Clone, Serialize)]
pub struct KiteSolveReport {
    pub alpha: f64,
    pub beta: f64,
    pub det: f64,
    pub residual: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub return_slopes: ReturnSlopes,
    pub orbit: DoublingOrbitReport,
}

pub fn solve_kite(guess: (f64, f64), cfg: &RunConfig) -> Result<KiteSolveReport, CliError> {
    let (tol, max_iter) = cfg.newton();
    let s = newton_solve(guess, tol, max_iter)?;
    let orbit = verify_doubling_orbit(s.alpha, s.beta)?;
    Ok(KiteSolveReport {
        alpha: s.alpha,
        beta: s.beta,
        det: s.det,
        residual: s.residual,
        iterations: s.iterations,
        residual_history: s.history,
        return_slopes: return_map_slopes(s.alpha, s.beta)?,
        orbit,
    })
}

pub fn cmd_kite_solve(guess: (f64, f64), cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let r = solve_kite(guess, cfg)?;
    let csv = format!("alpha,beta,det,residual\n{},{},{},{}\n", r.alpha, r.beta, r.det, r.residual);
    Ok(CommandOutput::new(&r, csv, true))
}

pub fn cmd_kite_probe(epsilon: f64, guess: (f64, f64), cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let root = solve_kite(guess, cfg)?;
    let perimeter = Polygon::kite(root.alpha, root.beta)?.perimeter();
    let mut r: ProbeReport =
        bifurcation_probe_with(root.alpha, root.beta, epsilon, cfg.bins_for(perimeter), &cfg.ulam())?;
    let matched = !r.report.unresolved();
    let mut csv = format!(
        "epsilon,sign_plus,sign_minus,alpha,beta\n{epsilon},{},{},{},{}\n\n",
        r.signs[0], r.signs[1], r.alpha, r.beta
    );
    csv.push_str(&components_csv(&r.report));
    let files = attach_densities(&mut r.report, cfg.out.as_deref(), "");
    Ok(with_files(CommandOutput::new(&r, csv, matched), files))
}

#[derive(Debug, Clone, Serialize)]
pub struct NonergodicReport {
    pub n: usize,
    pub apex: f64,
    pub pivot: f64,
    pub polygon: PolygonReport,
    pub attempts: Vec<Attempt>,
    pub report: ErgodicReport,
}

pub fn cmd_nonergodic(n: usize, mut nc: NonergodicConfig, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    nc.bins_per_length = cfg.bins;
    nc.ulam = cfg.ulam();
    let built = nonergodic::construct(n, &nc)?;
    let mut report = built.report;
    let mut files = attach_densities(&mut report, cfg.out.as_deref(), "");
    let polygon_file = PolygonFile {
        vertices: built.polygon.vertices().to_vec(),
    };
    files.push(OutputFile {
        name: "polygon.json".into(),
        contents: serde_json::to_string_pretty(&polygon_file).expect("polygon serializes") + "\n",
    });
    let matched = !report.unresolved();
    let mut csv = String::from("x,y\n");
    for p in built.polygon.vertices() {
        let _ = writeln!(csv, "{},{}", p.x, p.y);
    }
    csv.push('\n');
    csv.push_str(&components_csv(&report));
    let body = NonergodicReport {
        n,
        apex: built.apex,
        pivot: built.pivot,
        polygon: PolygonReport::from(&built.polygon),
        attempts: built.attempts,
        report,
    };
    Ok(with_files(CommandOutput::new(&body, csv, matched), files))
}
