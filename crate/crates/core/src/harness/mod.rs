//! Command-line harness: parse a config, run a solver, write CSV and
//! checkpoint outputs.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure (NaN or
//! singular matrix), 4 I/O error.

pub mod config;
pub mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::coin::MassSample;
use crate::curved::{curved_evolve, AProfile, CurvedConfig, MassQ, QField, ZeroQ};
use crate::equilibrium::{post_collide, write_diagnostics_csv, OmegaForm, RelaxationConfig};
use crate::error::{Error, Result};
use crate::fields::checkpoint::{Checkpoint, Shape};
use crate::fields::{
    centroid, density, init_packet, norm, ConstantMass, FnMass, Lattice1D, Mass, MassField, PacketKind, SampledMass,
    SpinorField1D,
};
use crate::fmt::g17;
use crate::linalg::C64;
use crate::multid::{
    checkpoint_2d, field_from_checkpoint, norm_2d, run_experiment_2d, Experiment2D, ExperimentKind, Grid2D,
    ImpurityConfig, NjlConfig, Packet2D,
};
use crate::solvers::{
    convergence_order, dispersion, solve_observed, ConvergenceSetup, ParamMap, Reference, SchemeKind,
};
use crate::walk::Observer;

use config::{AKind, FormChoice, InitialKind, LoadedConfig, MassKind, Scheme, SourceKind};
use output::{OutputDir, Provenance};

#[derive(Debug, Parser)]
#[command(name = "qwlb", version, about = "Lattice Dirac solvers as quantum walks")]
pub struct Cli {
    /// Worker threads (default: all cores). `--threads 1` is the serial reference;
    /// outputs are byte-identical either way.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// 1-D run with the split, qlb, naive or equilibrium scheme.
    Run1d(RunArgs),
    /// 2-D run: impurity scattering or NJL self-interaction.
    Run2d(RunArgs),
    /// 1-D curved-space finite-volume run.
    Curved(RunArgs),
    /// Euler-angle coin parameters for a mass table.
    MapParams(MapParamsArgs),
    /// Numerical dispersion relation for a constant mass.
    Dispersion(DispersionArgs),
    /// Order of accuracy against analytic plane waves.
    Convergence(ConvergenceArgs),
    /// Print the header and norm of a checkpoint.
    InspectCheckpoint {
        path: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML config; every key has a default, so this may be omitted.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set lattice.n=1024`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory (`run.output`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of steps (`run.steps`).
    #[arg(long)]
    pub steps: Option<u64>,
    /// PRNG seed (`run.seed`).
    #[arg(long)]
    pub seed: Option<u64>,
}

impl RunArgs {
    /// `--set` values followed by the dedicated flags, so flags win.
    fn overrides(&self) -> Vec<String> {
        let mut o = self.set.clone();
        if let Some(out) = &self.out {
            o.push(format!("run.output={}", toml::Value::String(out.display().to_string())));
        }
        if let Some(s) = self.steps {
            o.push(format!("run.steps={s}"));
        }
        if let Some(s) = self.seed {
            o.push(format!("run.seed={s}"));
        }
        o
    }
}

#[derive(Debug, Args)]
pub struct MapParamsArgs {
    /// Mass table with columns `j,m0,mx,my,mz`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub dt: f64,
    /// `split` or `qlb`.
    #[arg(long, default_value = "qlb")]
    pub scheme: String,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DispersionArgs {
    #[arg(long, default_value = "qlb")]
    pub scheme: String,
    /// Majorana mass.
    #[arg(long, default_value_t = 0.0)]
    pub m: f64,
    #[arg(long, default_value_t = 1.0)]
    pub dz: f64,
    /// Samples on `[0, π/dz]`.
    #[arg(long, default_value_t = 65)]
    pub points: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[arg(long, default_value = "qlb")]
    pub scheme: String,
    /// Majorana mass.
    #[arg(long, default_value_t = 0.3)]
    pub m: f64,
    #[arg(long, default_value_t = 12.8)]
    pub length: f64,
    #[arg(long, default_value_t = 3.2)]
    pub t_final: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.05, 0.025, 0.0125])]
    pub dts: Vec<f64>,
    /// Plane-wave mode number across the box.
    #[arg(long, default_value_t = 1)]
    pub mode: i64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parse `args` and run. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
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
    match run_cli(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run_cli(cli: &Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidArgument("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start thread pool: {e}")))?;
    pool.install(|| dispatch(&cli.command))
}

fn dispatch(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Run1d(a) => run1d(&config::load_config(a.config.as_deref(), &a.overrides())?),
        Command::Run2d(a) => run2d(&config::load_config(a.config.as_deref(), &a.overrides())?),
        Command::Curved(a) => run_curved(&config::load_config(a.config.as_deref(), &a.overrides())?),
        Command::MapParams(a) => map_params(a),
        Command::Dispersion(a) => dispersion_table(a),
        Command::Convergence(a) => convergence_table(a),
        Command::InspectCheckpoint { path } => inspect_checkpoint(path, &mut std::io::stdout().lock()),
    }
}

fn arg_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        line: None,
        message: message.into(),
    }
}

fn scheme_arg(s: &str) -> Result<SchemeKind> {
    s.parse().map_err(|_| arg_error("--scheme", format!("unknown scheme `{s}`")))
}

/// Read a mass table `j,m0,mx,my,mz`; `#` lines and a non-numeric header are skipped.
pub fn read_mass_csv(path: &Path) -> Result<Vec<Mass>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = t.split(',').map(str::trim).collect();
        let nums: std::result::Result<Vec<f64>, _> = cols.iter().map(|c| c.parse::<f64>()).collect();
        let bad = |msg: String| Error::Config {
            path: path.display().to_string(),
            line: Some(i + 1),
            message: msg,
        };
        match nums {
            Err(_) if out.is_empty() && cols.first().is_some_and(|c| c.parse::<f64>().is_err()) => continue,
            Err(e) => return Err(bad(format!("unparseable number: {e}"))),
            Ok(v) if v.len() != 5 => return Err(bad(format!("expected 5 columns j,m0,mx,my,mz, got {}", v.len()))),
            Ok(v) => {
                let m = Mass::new(v[1], v[2], v[3], v[4]);
                if !m.is_finite() {
                    return Err(bad("non-finite mass".into()));
                }
                out.push(m);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Config {
            path: path.display().to_string(),
            line: None,
            message: "mass table is empty".into(),
        });
    }
    Ok(out)
}

fn lattice(c: &config::ExperimentConfig) -> Result<Lattice1D> {
    Lattice1D::new(c.lattice.n, c.lattice.dz, c.lattice.dt(), c.lattice.boundary.into())
}

fn mass_field(loaded: &LoadedConfig, lat: &Lattice1D) -> Result<Arc<dyn MassField>> {
    let m = loaded.config.mass.clone();
    let center = m.center.unwrap_or(0.5 * lat.length());
    Ok(match m.kind {
        MassKind::Constant => Arc::new(ConstantMass(Mass::new(m.m0, m.mx, m.my, m.mz))),
        MassKind::Sampled => {
            let file = m.file.as_ref().expect("validated");
            let sites = read_mass_csv(&loaded.resolve(file))?;
            if sites.len() != lat.n_sites() {
                return Err(loaded.error(
                    "mass.file",
                    format!("table has {} rows but the lattice has {} sites", sites.len(), lat.n_sites()),
                ));
            }
            Arc::new(SampledMass { sites })
        }
        MassKind::Kink => Arc::new(FnMass(move |z: f64, _t: f64| {
            Mass::new(m.m0, m.mx, m.my * ((z - center) / m.width).tanh(), m.mz)
        })),
        MassKind::Barrier => Arc::new(FnMass(move |z: f64, _t: f64| {
            let inside = (z - center).abs() < 0.5 * m.width;
            Mass::new(m.m0 + if inside { m.v } else { 0.0 }, m.mx, m.my, m.mz)
        })),
    })
}

fn initial_field(c: &config::ExperimentConfig, lat: &Lattice1D) -> Result<SpinorField1D> {
    let i = &c.initial;
    let kind = match i.kind {
        InitialKind::Gaussian => PacketKind::Gaussian {
            sigma: i.sigma,
            k0: i.k,
            center: i.center,
        },
        InitialKind::Plane => PacketKind::PlaneWave { k: i.k },
        InitialKind::Delta => PacketKind::Delta { site: i.site },
    };
    let w = i.weights;
    init_packet(lat, kind, [C64::new(w[0], w[1]), C64::new(w[2], w[3])])
}

fn open_output(loaded: &LoadedConfig, command: &str) -> Result<OutputDir> {
    let canonical = loaded.canonical();
    let out = OutputDir::create(
        &loaded.config.run.output,
        Provenance::for_text(&canonical, Some(loaded.config.run.seed)),
    )?;
    out.metadata(command, &canonical)?;
    Ok(out)
}

/// Per-step norm and centroid, plus a density CSV every `stride` steps.
struct Recorder1D<'a> {
    out: &'a OutputDir,
    lat: Lattice1D,
    stride: u64,
    last: u64,
    series: Vec<(u64, f64, f64)>,
}

impl Recorder1D<'_> {
    fn record(&mut self, step: u64, f: &SpinorField1D) -> std::result::Result<(), String> {
        self.series.push((step, norm(f, &self.lat), centroid(f, &self.lat)));
        if step % self.stride == 0 || step == self.last {
            let lat = self.lat;
            self.out
                .csv(&format!("density_{step:06}.csv"), |w| {
                    writeln!(w, "j,z,rho")?;
                    for (j, r) in density(f).iter().enumerate() {
                        writeln!(w, "{j},{},{}", g17(lat.z(j)), g17(*r))?;
                    }
                    Ok(())
                })
                .map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    fn finish(self, final_field: &SpinorField1D, checkpoint: bool) -> Result<()> {
        self.out.csv("series.csv", |w| {
            writeln!(w, "step,norm,centroid")?;
            for (s, n, c) in &self.series {
                writeln!(w, "{s},{},{}", g17(*n), g17(*c))?;
            }
            Ok(())
        })?;
        if checkpoint {
            Checkpoint::from_field(final_field, &self.lat).save(self.out.path("final.ckpt"))?;
        }
        Ok(())
    }
}

pub fn run1d(loaded: &LoadedConfig) -> Result<()> {
    let c = &loaded.config;
    let scheme = c.run.scheme.unwrap_or(Scheme::Qlb);
    let kind = match scheme {
        Scheme::Split => Some(SchemeKind::Split),
        Scheme::Qlb => Some(SchemeKind::Qlb),
        Scheme::Naive => Some(SchemeKind::Naive),
        Scheme::Equilibrium => None,
        Scheme::Curved | Scheme::Walk2d => {
            return Err(loaded.error(
                "run.scheme",
                "run1d runs split, qlb, naive or equilibrium; use the curved or run2d subcommand",
            ))
        }
    };
    loaded.require_cfl_one()?;
    let lat = lattice(c)?;
    let mass = mass_field(loaded, &lat)?;
    let f0 = initial_field(c, &lat)?;
    let out = open_output(loaded, "run1d")?;
    let mut rec = Recorder1D {
        out: &out,
        lat,
        stride: c.run.stride,
        last: c.run.steps,
        series: Vec::new(),
    };
    let final_field = {
        let mut obs = Observer::new(1, |n, f| rec.record(n, f));
        match kind {
            Some(kind) => solve_observed(kind, &mass, &lat, f0, c.run.steps, Some(&mut obs))?,
            None => {
                let tau = c.equilibrium.tau.unwrap_or(lat.dt());
                let form = match c.equilibrium.form {
                    FormChoice::Exact => OmegaForm::Exact,
                    FormChoice::Paper => OmegaForm::Paper,
                };
                let rcfg = RelaxationConfig::new(tau, form)?;
                out.csv("equilibrium_diagnostics.csv", |w| {
                    write_diagnostics_csv(w, &mass, &lat, &rcfg, 0)
                })?;
                let mut f = f0;
                obs.notify(&f)?;
                for _ in 0..c.run.steps {
                    f = post_collide(&f, &mass, &lat, &rcfg)?;
                    f.check_finite()?;
                    obs.notify(&f)?;
                }
                f
            }
        }
    };
    rec.finish(&final_field, c.run.checkpoint)
}

pub fn run_curved(loaded: &LoadedConfig) -> Result<()> {
    let c = &loaded.config;
    if c.run.scheme.is_some_and(|s| s != Scheme::Curved) {
        return Err(loaded.error("run.scheme", "the curved subcommand only runs scheme = \"curved\""));
    }
    let lat = lattice(c)?;
    let cv = &c.curved;
    let a0 = cv.a0.unwrap_or(lat.speed());
    let a = match cv.a {
        AKind::Constant => AProfile::Constant(a0),
        AKind::Linear => AProfile::Linear { a0, eps: cv.eps },
        AKind::Bump => AProfile::GaussianBump {
            a0,
            depth: cv.depth,
            center: cv.center.unwrap_or(0.5 * lat.length()),
            width: cv.width,
        },
    };
    let q: Arc<dyn QField> = match cv.source {
        SourceKind::Mass => Arc::new(MassQ(mass_field(loaded, &lat)?)),
        SourceKind::None => Arc::new(ZeroQ),
    };
    let cfg = CurvedConfig::new(a, q);
    cfg.validate(&lat).map_err(|e| loaded.error("curved.a0", e.to_string()))?;
    let f0 = initial_field(c, &lat)?;
    let out = open_output(loaded, "curved")?;
    let mut rec = Recorder1D {
        out: &out,
        lat,
        stride: c.run.stride,
        last: c.run.steps,
        series: Vec::new(),
    };
    let final_field = {
        let mut obs = Observer::new(1, |n, f| rec.record(n, f));
        curved_evolve(f0, &cfg, &lat, c.run.steps, Some(&mut obs))?
    };
    rec.finish(&final_field, c.run.checkpoint)
}

/// The 2-D experiment a config describes.
pub fn experiment_2d(loaded: &LoadedConfig) -> Result<Experiment2D> {
    let c = &loaded.config;
    if c.run.scheme.is_some_and(|s| s != Scheme::Walk2d) {
        return Err(loaded.error("run.scheme", "run2d only runs scheme = \"walk2d\""));
    }
    let grid = Grid2D::new(c.grid.nz, c.grid.ny, c.grid.h)?;
    let p = &c.packet2d;
    let center = match (p.center_z, p.center_y) {
        (None, None) => None,
        (z, y) => Some((z.unwrap_or(grid.center().0), y.unwrap_or(grid.center().1))),
    };
    let kind = match (&c.njl, &c.impurity) {
        (Some(n), _) => ExperimentKind::Njl(NjlConfig { g: n.g, m: n.m }),
        (None, imp) => {
            let imp = imp.clone().unwrap_or_default();
            ExperimentKind::Impurity {
                impurity: ImpurityConfig::new(imp.concentration, imp.v, c.run.seed)?,
                mass: imp.mass,
            }
        }
    };
    Ok(Experiment2D {
        kind,
        grid,
        packet: Packet2D {
            sigma: p.sigma,
            kz: p.kz,
            ky: p.ky,
            c_u: p.cu,
            c_d: p.cd,
            center,
        },
        n_steps: c.run.steps,
        stride: c.run.stride,
    })
}

pub fn run2d(loaded: &LoadedConfig) -> Result<()> {
    let exp = experiment_2d(loaded)?;
    let out = open_output(loaded, "run2d")?;
    let res = run_experiment_2d(&exp)?;
    let grid = exp.grid;
    for snap in &res.snapshots {
        out.csv(&format!("rho_{:06}.csv", snap.step), |w| {
            writeln!(w, "z,y,rho")?;
            for (s, r) in snap.rho.iter().enumerate() {
                let (z, y) = grid.coords(s);
                writeln!(w, "{},{},{}", g17(z), g17(y), g17(*r))?;
            }
            Ok(())
        })?;
    }
    let start = res.final_field.step_index - exp.n_steps;
    out.csv("series.csv", |w| {
        writeln!(w, "step,norm,centroid_z,centroid_y,spread")?;
        for (i, n) in res.norms.iter().enumerate() {
            let (cz, cy) = res.centroids[i];
            writeln!(
                w,
                "{},{},{},{},{}",
                start + i as u64,
                g17(*n),
                g17(cz),
                g17(cy),
                g17(res.spreads[i])
            )?;
        }
        Ok(())
    })?;
    if loaded.config.run.checkpoint {
        checkpoint_2d(&res.final_field, &grid).save(out.path("final.ckpt"))?;
    }
    Ok(())
}

/// Write `body` with a provenance header to `path`, or to stdout.
fn emit<F>(path: Option<&Path>, provenance: &Provenance, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    match path {
        Some(p) => {
            let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let name = p.file_name().ok_or_else(|| arg_error("--output", "not a file path"))?;
            OutputDir::create(dir, provenance.clone())?.csv(&name.to_string_lossy(), body)?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            let run = |w: &mut dyn Write| -> std::io::Result<()> {
                w.write_all(provenance.header().as_bytes())?;
                body(w)?;
                w.flush()
            };
            run(&mut w).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

pub fn map_params(a: &MapParamsArgs) -> Result<()> {
    let map = match scheme_arg(&a.scheme)? {
        SchemeKind::Split => ParamMap::Split,
        SchemeKind::Qlb => ParamMap::Qlb,
        SchemeKind::Naive => return Err(arg_error("--scheme", "the naive transfer matrix is not unitary")),
    };
    if !(a.dt > 0.0 && a.dt.is_finite()) {
        return Err(arg_error("--dt", format!("must be positive, got {}", a.dt)));
    }
    let masses = read_mass_csv(&a.input)?;
    let input = std::fs::read(&a.input).map_err(|e| Error::io(&a.input, e))?;
    let prov = Provenance::for_text(
        &format!("map-params scheme={} dt={}\n{}", a.scheme, g17(a.dt), output::sha256_hex(&input)),
        None,
    );
    emit(a.output.as_deref(), &prov, |w| {
        writeln!(w, "j,xi,alpha,beta,theta")?;
        for (j, m) in masses.iter().enumerate() {
            let p = map.params(MassSample::new(*m, a.dt));
            writeln!(w, "{j},{},{},{},{}", g17(p.xi), g17(p.alpha), g17(p.beta), g17(p.theta))?;
        }
        Ok(())
    })
}

pub fn dispersion_table(a: &DispersionArgs) -> Result<()> {
    let kind = scheme_arg(&a.scheme)?;
    if a.points < 2 {
        return Err(arg_error("--points", "need at least 2 samples"));
    }
    let lat = Lattice1D::flat(16, a.dz).map_err(|e| arg_error("--dz", e.to_string()))?;
    let kmax = std::f64::consts::PI / a.dz;
    let ks: Vec<f64> = (0..a.points).map(|i| kmax * i as f64 / (a.points - 1) as f64).collect();
    let table = dispersion(kind, Mass::free(a.m), &lat, &ks)?;
    let prov = Provenance::for_text(
        &format!("dispersion scheme={} m={} dz={} points={}", kind, g17(a.m), g17(a.dz), a.points),
        None,
    );
    emit(a.output.as_deref(), &prov, |w| {
        writeln!(w, "k,omega_plus,omega_minus,modulus_defect")?;
        for p in &table {
            writeln!(
                w,
                "{},{},{},{}",
                g17(p.k),
                g17(p.omega_plus),
                g17(p.omega_minus),
                g17(p.modulus_defect)
            )?;
        }
        Ok(())
    })
}

pub fn convergence_table(a: &ConvergenceArgs) -> Result<()> {
    let kind = scheme_arg(&a.scheme)?;
    let setup = ConvergenceSetup {
        length: a.length,
        t_final: a.t_final,
        dts: a.dts.clone(),
    };
    let reference = Reference::AnalyticPlaneWave {
        mass: Mass::free(a.m),
        mode: a.mode,
    };
    let rep = convergence_order(kind, &reference, &setup)?;
    let dts: Vec<String> = a.dts.iter().map(|d| g17(*d)).collect();
    let prov = Provenance::for_text(
        &format!(
            "convergence scheme={} m={} length={} t_final={} dts={} mode={}",
            kind,
            g17(a.m),
            g17(a.length),
            g17(a.t_final),
            dts.join(","),
            a.mode
        ),
        None,
    );
    emit(a.output.as_deref(), &prov, |w| {
        writeln!(w, "dt,error,symmetrized_error")?;
        let sym = rep.symmetrized_errors.clone().unwrap_or_default();
        for (i, (dt, e)) in rep.dts.iter().zip(&rep.errors).enumerate() {
            let s = sym.get(i).map_or_else(|| "nan".to_string(), |v| g17(*v));
            writeln!(w, "{},{},{}", g17(*dt), g17(*e), s)?;
        }
        writeln!(w, "# order = {}", g17(rep.order))?;
        if let Some(o) = rep.symmetrized_order {
            writeln!(w, "# symmetrized_order = {}", g17(o))?;
        }
        for warn in &rep.warnings {
            writeln!(w, "# warning: {warn}")?;
        }
        Ok(())
    })
}

pub fn inspect_checkpoint(path: &Path, w: &mut dyn Write) -> Result<()> {
    let cp = Checkpoint::load(path)?;
    let io = |e| Error::io("<stdout>", e);
    let (shape, nrm) = match cp.shape {
        Shape::OneD(n) => {
            let (f, lat) = cp.clone().into_field()?;
            (format!("1d, {n} sites"), norm(&f, &lat))
        }
        Shape::TwoD { nz, ny } => {
            let (f, grid) = field_from_checkpoint(&cp)?;
            (format!("2d, {nz} x {ny} sites"), norm_2d(&f, &grid))
        }
    };
    writeln!(w, "shape = {shape}").map_err(io)?;
    writeln!(w, "components = {}", cp.shape.components()).map_err(io)?;
    writeln!(w, "dz = {}", g17(cp.dz)).map_err(io)?;
    writeln!(w, "dt = {}", g17(cp.dt)).map_err(io)?;
    writeln!(w, "step = {}", cp.step_index).map_err(io)?;
    writeln!(w, "norm = {}", g17(nrm)).map_err(io)?;
    Ok(())
}
