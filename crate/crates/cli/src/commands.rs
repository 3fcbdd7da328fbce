use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;
use warpband::debranges::{
    affine_boundedness_test, dbr_kernel, dbr_measure_bound_check, hg_norm, DbrMeasure,
    StructureFunction, StructureKind,
};
use warpband::io::{
    error_curve_csv, CoeffsFile, GramFile, SignalFile, SignalKind, StructureFile, WarpFile,
};
use warpband::paley_wiener::{
    pw_kernel, synthesize, synthesize_grid, BandSpec, BandlimitedSignal, RealGrid,
};
use warpband::range_rkhs::{build_gram, project_onto_kernels, WarpedKernel};
use warpband::truncation::{error_curve_samples, truncate_samples, warp_signal};
use warpband::warps::{
    check_measure_bound, classify, Warp, WarpKind, DEFAULT_GRID_SPACING, DEFAULT_PROBE_WINDOW,
};
use warpband::{Error, Result};

use crate::config::RunConfig;
use crate::output::{read_input, FileRecord, Outputs};

/// Result of a command before anything is written.
pub struct Run {
    pub parameters: Value,
    pub inputs: Vec<FileRecord>,
    pub outputs: Outputs,
    pub stdout: String,
}

impl Run {
    fn new<P: Serialize>(parameters: &P) -> Result<Self> {
        Ok(Run {
            parameters: serde_json::to_value(parameters)?,
            inputs: Vec::new(),
            outputs: Outputs::default(),
            stdout: String::new(),
        })
    }

    fn say(&mut self, line: impl AsRef<str>) {
        self.stdout.push_str(line.as_ref());
        self.stdout.push('\n');
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    Sinc,
    RandomSpectrum,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    /// Bandwidth `a`.
    #[arg(long, allow_negative_numbers = true)]
    pub band: f64,
    /// Spectral node count (odd, at least 17).
    #[arg(long)]
    pub nodes: Option<usize>,
}

/// A warp from a file or from inline ascending coefficients.
#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct WarpSource {
    #[arg(long)]
    #[serde(skip)]
    pub warp: Option<PathBuf>,
    /// Ascending polynomial coefficients, e.g. `0,1,0,1` for x³ + x.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub coefficients: Option<Vec<f64>>,
}

impl WarpSource {
    fn load(&self, inputs: &mut Vec<FileRecord>) -> Result<Warp> {
        match (&self.warp, &self.coefficients) {
            (Some(p), _) => WarpFile::parse(&read_input(p, inputs)?)?.to_warp(),
            (None, Some(c)) => {
                let kind = if c.len() == 2 {
                    WarpKind::Affine
                } else {
                    WarpKind::Polynomial
                };
                Warp::new(kind, c.clone())
            }
            (None, None) => Err(Error::Invalid("no warp given".into())),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GridArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub grid_start: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long)]
    pub grid_count: Option<usize>,
}

impl GridArgs {
    fn resolve(&self, config: &RunConfig) -> Result<RealGrid> {
        let g = config.time_grid;
        RealGrid::new(
            self.grid_start.unwrap_or(g.start),
            self.grid_step.unwrap_or(g.step),
            self.grid_count.unwrap_or(g.count),
        )
    }
}

#[derive(Debug, Args, Serialize)]
pub struct WarpArgs {
    /// Spectrum signal file.
    #[arg(long)]
    #[serde(skip)]
    pub signal: PathBuf,
    #[command(flatten)]
    pub warp: WarpSource,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct TruncateArgs {
    /// Time-samples signal file, typically from `warp`.
    #[arg(long)]
    #[serde(skip)]
    pub warped: PathBuf,
    /// Ascending band limits.
    #[arg(long = "A", value_delimiter = ',', num_args = 1.., required = true)]
    pub a_values: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub warp: WarpSource,
}

#[derive(Debug, Args, Serialize)]
pub struct GramArgs {
    #[arg(long)]
    pub band: f64,
    #[command(flatten)]
    pub warp: WarpSource,
    /// Nodes are the integers `-n..=n`.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub ridge: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProjectArgs {
    /// Gram file from `gram`.
    #[arg(long)]
    #[serde(skip)]
    pub gram: PathBuf,
    /// Spectrum signal whose warped samples at the nodes are projected.
    #[arg(long)]
    #[serde(skip)]
    pub signal: PathBuf,
    #[command(flatten)]
    pub warp: WarpSource,
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct StructureSource {
    #[arg(long)]
    #[serde(skip)]
    pub structure: Option<PathBuf>,
    /// Shorthand for `g(z) = e^{-iaz}`.
    #[arg(long = "exp")]
    pub exp_rate: Option<f64>,
}

impl StructureSource {
    fn load(&self, inputs: &mut Vec<FileRecord>) -> Result<StructureFunction> {
        match (&self.structure, self.exp_rate) {
            (Some(p), _) => StructureFile::parse(&read_input(p, inputs)?)?.to_structure(),
            (None, Some(a)) => StructureFunction::exponential(a),
            (None, None) => Err(Error::Invalid("no structure function given".into())),
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "check")]
pub enum DbrCommand {
    /// dBR kernel against the sinc kernel and its own Hermitian symmetry.
    KernelCheck {
        #[command(flatten)]
        #[serde(flatten)]
        structure: StructureSource,
        #[arg(long, default_value_t = 500)]
        pairs: usize,
    },
    /// Sup of |g(at+b)/g(t)| over nested windows.
    Boundedness {
        #[command(flatten)]
        #[serde(flatten)]
        structure: StructureSource,
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        b_re: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        b_im: f64,
    },
    /// H(g) norm of a signal on the configured time grid.
    Norm {
        #[command(flatten)]
        #[serde(flatten)]
        structure: StructureSource,
        #[arg(long)]
        #[serde(skip)]
        signal: PathBuf,
    },
    /// λ(φ⁻¹E)/λ(E) over random subintervals of [lo, hi].
    Measure {
        #[command(flatten)]
        #[serde(flatten)]
        structure: StructureSource,
        #[command(flatten)]
        #[serde(flatten)]
        warp: WarpSource,
        #[arg(long, default_value_t = 50)]
        intervals: usize,
        #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
        hi: f64,
        #[arg(long)]
        cap: Option<f64>,
    },
}

pub fn gen(args: &GenArgs, config: &RunConfig) -> Result<Run> {
    let mut run = Run::new(args)?;
    let band = BandSpec::new(args.band)?;
    let nodes = args.nodes.unwrap_or(config.spectral_nodes);
    let f = match args.kind {
        GenKind::Sinc => BandlimitedSignal::sinc(band, nodes)?,
        GenKind::RandomSpectrum => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            BandlimitedSignal::random(band, nodes, &mut rng)?
        }
    };
    let f0 = synthesize(&f, Complex64::new(0.0, 0.0))?;
    run.say(format!("f(0) = {} {:+}i", f0.re, f0.im));
    run.outputs
        .add_json("signal.json", &SignalFile::from_signal(&f))?;
    Ok(run)
}

pub fn warp(args: &WarpArgs, config: &RunConfig) -> Result<Run> {
    let mut run = Run::new(args)?;
    let f = SignalFile::parse(&read_input(&args.signal, &mut run.inputs)?)?.to_signal()?;
    let w = args.warp.load(&mut run.inputs)?;
    let grid = args.grid.resolve(config)?;
    let g = warp_signal(&f, &w, grid)?;
    run.say(format!("measure bound certified: {}", g.hypothesis_holds()));
    let file = SignalFile::from_samples(f.band().a(), &g.samples, Some(g.measure_bound.clone()));
    run.outputs.add_json("warped.json", &file)?;
    Ok(run)
}

#[derive(Serialize)]
struct TruncationPoint {
    a_limit: f64,
    l2_error: f64,
    tail_mass: f64,
    plancherel_defect: f64,
}

#[derive(Serialize)]
struct TruncationReport {
    hypothesis_holds: bool,
    points: Vec<TruncationPoint>,
}

pub fn truncate(args: &TruncateArgs, _config: &RunConfig) -> Result<Run> {
    let mut run = Run::new(args)?;
    let file = SignalFile::parse(&read_input(&args.warped, &mut run.inputs)?)?;
    let x = file.to_samples()?;
    let curve = error_curve_samples(&x, &args.a_values)?;
    let mut points = Vec::with_capacity(curve.len());
    for (i, &a) in args.a_values.iter().enumerate() {
        let r = truncate_samples(&x, a)?;
        points.push(TruncationPoint {
            a_limit: a,
            l2_error: r.l2_error,
            tail_mass: r.tail_mass,
            plancherel_defect: r.plancherel_defect(),
        });
        run.outputs.add_json(
            format!("truncated_{i:02}.json"),
            &SignalFile::from_samples(a, &r.h, None),
        )?;
        run.say(format!("A = {a}: l2_error = {}", r.l2_error));
    }
    let hypothesis_holds = file
        .measure_bound
        .as_ref()
        .is_some_and(|m| m.bound_c.is_some());
    run.outputs.add("error_curve.csv", error_curve_csv(&curve));
    run.outputs.add_json(
        "truncation_report.json",
        &TruncationReport {
            hypothesis_holds,
            points,
        },
    )?;
    Ok(run)
}

pub fn classify_cmd(args: &ClassifyArgs, _config: &RunConfig) -> Result<Run> {
    let mut run = Run::new(args)?;
    let w = args.warp.load(&mut run.inputs)?;
    let c = classify(&w);
    let measure_bound = check_measure_bound(&w, DEFAULT_PROBE_WINDOW, DEFAULT_GRID_SPACING)?;
    run.say(format!("preserves: {}", c.preserves_pw));
    run.say(format!(
        "reason: {}",
        serde_json::to_value(c.reason)?.as_str().unwrap_or("")
    ));
    if let Some(f) = c.target_band_factor {
        run.say(format!("target_band_factor: {f}"));
    }
    #[derive(Serialize)]
    struct Report<'a> {
        classification: &'a warpband::warps::WarpClassification,
        measure_bound: &'a warpband::warps::MeasureBoundReport,
    }
    run.outputs.add_json(
        "classification.json",
        &Report {
            classification: &c,
            measure_bound: &measure_bound,
        },
    )?;
    Ok(run)
}

#[derive(Serialize)]
struct GramReport {
    dimension: usize,
    ridge: f64,
    hermitian_defect: f64,
    min_eigenvalue: f64,
    condition_estimate: f64,
    orthonormality_defect: f64,
    eigen_fallback: bool,
}

pub fn gram(args: &GramArgs, config: &RunConfig) -> Result<Run> {
    let mut run = Run::new(args)?;
    let w = args.warp.load(&mut run.inputs)?;
    let ridge = args.ridge.unwrap_or(config.ridge);
    let k = WarpedKernel::new(BandSpec::new(args.band)?, w);
    let g = build_gram(&k, args.n, ridge)?;
    let report = GramReport {
        dimension: g.dimension(),
        ridge,
        hermitian_defect: g.hermitian_defect(),
        min_eigenvalue: g.min_eigenvalue(),
        condition_estimate: g.condition_estimate(),
        orthonormality_defect: g.orthonormality_defect(),
        eigen_fallback: g.used_eigen_fallback(),
    };
    run.say(format!("dimension: {}", report.dimension));
    run.say(format!("min eigenvalue: {}", report.min_eigenvalue));
    run.say(format!(
        "distance from identity: {:e}",
        report.orthonormality_defect
    ));
    run.outputs
        .add_json("gram.json", &GramFile::from_gram(&g))?;
    run.outputs.add_json("gram_report.json", &report)?;
    Ok(run)
}

pub fn project(args: &ProjectArgs, _config: &RunConfig) -> Result<Run> {
    let mut run = Run::new(args)?;
    let g = GramFile::parse(&read_input(&args.gram, &mut run.inputs)?)?.to_gram()?;
    let f = SignalFile::parse(&read_input(&args.signal, &mut run.inputs)?)?.to_signal()?;
    let w = args.warp.load(&mut run.inputs)?;
    let target = g
        .nodes
        .iter()
        .map(|&n| synthesize(&f, w.eval_real(n).into()))
        .collect::<Result<Vec<_>>>()?;
    let p = project_onto_kernels(&g, &target)?;
    run.say(format!("residual norm: {:e}", p.residual_norm));
    run.outputs.add_json(
        "coeffs.json",
        &CoeffsFile::from_coefficients(&p.coefficients),
    )?;
    run.outputs.add_json(
        "projection_report.json",
        &serde_json::json!({ "residual_norm": p.residual_norm }),
    )?;
    Ok(run)
}

pub fn dbr(cmd: &DbrCommand, config: &RunConfig) -> Result<Run> {
    let mut run = Run::new(cmd)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    match cmd {
        DbrCommand::KernelCheck { structure, pairs } => {
            let s = structure.load(&mut run.inputs)?;
            let band = match s.kind() {
                StructureKind::Exponential { a } => Some(BandSpec::new(*a)?),
                _ => None,
            };
            let mut pw_error: f64 = 0.0;
            let mut hermitian: f64 = 0.0;
            let mut min_diagonal = f64::INFINITY;
            for _ in 0..*pairs {
                let z = Complex64::new(rng.gen_range(-10.0..10.0), rng.gen_range(-2.0..2.0));
                let w = Complex64::new(rng.gen_range(-10.0..10.0), rng.gen_range(-2.0..2.0));
                let k = dbr_kernel(&s, z, w)?;
                let kt = dbr_kernel(&s, w, z)?;
                hermitian = hermitian.max((k - kt.conj()).norm() / k.norm().max(f64::MIN_POSITIVE));
                if let Some(b) = band {
                    let p = pw_kernel(b, z, w);
                    pw_error = pw_error.max((k - p).norm() / p.norm().max(f64::MIN_POSITIVE));
                }
                let x = Complex64::new(z.re, 0.0);
                min_diagonal = min_diagonal.min(dbr_kernel(&s, x, x)?.re);
            }
            let report = serde_json::json!({
                "pairs": pairs,
                "max_pw_reduction_error": band.map(|_| pw_error),
                "max_hermitian_defect": hermitian,
                "min_real_diagonal": min_diagonal,
            });
            if band.is_some() {
                run.say(format!("max PW-reduction error: {pw_error:e}"));
            }
            run.say(format!("max Hermitian defect: {hermitian:e}"));
            run.outputs.add_json("dbr_kernel_check.json", &report)?;
        }
        DbrCommand::Boundedness {
            structure,
            a,
            b_re,
            b_im,
        } => {
            let s = structure.load(&mut run.inputs)?;
            let probe = RealGrid::spanning(-100.0, 100.0, 1e-2)?;
            let r = affine_boundedness_test(&s, *a, Complex64::new(*b_re, *b_im), probe)?;
            run.say(format!("bounded: {}", r.bounded));
            run.say(format!("c_estimate: {}", r.c_estimate));
            let report = serde_json::json!({
                "bounded": r.bounded,
                "c_estimate": r.c_estimate,
                "window_sups": r.window_sups,
                "asymptotic": r.asymptotic,
            });
            run.outputs.add_json("dbr_boundedness.json", &report)?;
        }
        DbrCommand::Norm { structure, signal } => {
            let s = structure.load(&mut run.inputs)?;
            let file = SignalFile::parse(&read_input(signal, &mut run.inputs)?)?;
            let x = match file.kind {
                SignalKind::Spectrum => {
                    let grid = config.time_grid.to_grid()?;
                    synthesize_grid(&file.to_signal()?, grid)
                }
                SignalKind::TimeSamples => file.to_samples()?,
            };
            let n = hg_norm(&x, &s)?;
            run.say(format!("H(g) norm: {n}"));
            let report = serde_json::json!({ "hg_norm": n, "l2_norm": x.l2_norm() });
            run.outputs.add_json("dbr_norm.json", &report)?;
        }
        DbrCommand::Measure {
            structure,
            warp,
            intervals,
            lo,
            hi,
            cap,
        } => {
            if !(lo < hi) {
                return Err(Error::Invalid(format!("need lo < hi, got [{lo}, {hi}]")));
            }
            let s = structure.load(&mut run.inputs)?;
            let w = warp.load(&mut run.inputs)?;
            let m =
                DbrMeasure::new(s, DEFAULT_PROBE_WINDOW)?.with_tolerance(config.quadrature_tol)?;
            let sets: Vec<(f64, f64)> = (0..*intervals)
                .map(|_| {
                    let u = rng.gen_range(*lo..*hi);
                    let v = rng.gen_range(*lo..*hi);
                    if u == v {
                        (u, u + f64::EPSILON.max(u.abs() * f64::EPSILON))
                    } else {
                        (u.min(v), u.max(v))
                    }
                })
                .collect();
            let r = dbr_measure_bound_check(&m, &w, &sets, *cap)?;
            run.say(format!("c_estimate: {}", r.c_estimate));
            run.say(format!("violations: {}", r.violations));
            let report = serde_json::json!({
                "c_estimate": r.c_estimate,
                "violations": r.violations,
                "intervals": sets,
                "ratios": r.ratios,
            });
            run.outputs.add_json("dbr_measure.json", &report)?;
        }
    }
    Ok(run)
}
