//! Scenario files: `key = value` lines grouped under `[section]` headers.
//!
//! `#` starts a comment. Keys marked repeatable (`segment`, `box`) may appear
//! several times; any other repeated or unknown key is an error. Relative
//! paths are resolved against the directory of the scenario file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use shalegas_core::assembly::{WellBox, WellTreatment};
use shalegas_core::linalg::EigenMethod;
use shalegas_core::mesh::{FractureGenerator, FractureSpec, Segment};
use shalegas_core::physics::PhysicalConstants;
use shalegas_core::precond::{BasisRule, LocalOperator, TwoGridConfig};
use shalegas_core::timestep::StepConvention;

use crate::error::{Error, Result};
use crate::io;

pub const SECONDS_PER_DAY: f64 = 86400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    LinearlyImplicit,
    Picard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PreconditionerKind {
    #[default]
    TwoGrid,
    Jacobi,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum FieldSelection {
    #[default]
    Homogeneous,
    /// Multiplier rasters for `phi` and `kappa_m`.
    Heterogeneous { phi: PathBuf, k: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub coarse: usize,
    pub fractures: FractureSpec,
    pub field: FieldSelection,
    /// Fracture permeability multiplier, `kappa_f = kf * 1e-20`.
    pub kf: f64,
    pub constants: PhysicalConstants,
    pub frozen: bool,
    pub well_treatment: WellTreatment,
    pub wells: Vec<WellBox>,
    pub t_max_days: f64,
    pub nt: usize,
    pub convention: StepConvention,
    pub scheme: Scheme,
    pub tol: f64,
    pub max_iter: usize,
    pub warm_start: bool,
    pub preconditioner: PreconditionerKind,
    pub two_grid: TwoGridConfig,
    pub picard_tol_percent: f64,
    pub picard_max_iter: usize,
    pub picard_inner_tol: f64,
    pub output: Option<PathBuf>,
    pub vtk_steps: Vec<usize>,
    pub dump_matrices: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            n: 50,
            coarse: 5,
            fractures: FractureSpec::default(),
            field: FieldSelection::Homogeneous,
            kf: 1e6,
            constants: PhysicalConstants::default(),
            frozen: false,
            well_treatment: WellTreatment::Implicit,
            wells: default_wells(),
            t_max_days: 1.0,
            nt: 10,
            convention: StepConvention::PerStep,
            scheme: Scheme::LinearlyImplicit,
            tol: 1e-9,
            max_iter: 1000,
            warm_start: false,
            preconditioner: PreconditionerKind::TwoGrid,
            two_grid: TwoGridConfig::default(),
            picard_tol_percent: 0.1,
            picard_max_iter: 10,
            picard_inner_tol: 1e-9,
            output: None,
            vtk_steps: Vec::new(),
            dump_matrices: false,
        }
    }
}

/// Production boxes in the lower-left and upper-right areas.
pub fn default_wells() -> Vec<WellBox> {
    vec![WellBox::new(0.1, 0.15, 0.05, 0.1), WellBox::new(0.6, 0.65, 0.9, 0.95)]
}

struct Entry {
    section: String,
    key: String,
    value: String,
    line: usize,
}

fn tokenize(text: &str, path: &str) -> Result<Vec<Entry>> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Config {
            path: path.to_string(),
            line: k + 1,
            message,
        };
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| err(format!("unterminated section header '{line}'")))?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected 'key = value', found '{line}'")))?;
        out.push(Entry {
            section: section.clone(),
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            line: k + 1,
        });
    }
    Ok(out)
}

struct Ctx<'a> {
    path: &'a str,
    base: &'a Path,
}

impl Ctx<'_> {
    fn err(&self, e: &Entry, message: impl Into<String>) -> Error {
        Error::Config {
            path: self.path.to_string(),
            line: e.line,
            message: message.into(),
        }
    }

    fn num<T: std::str::FromStr>(&self, e: &Entry) -> Result<T> {
        e.value
            .parse()
            .map_err(|_| self.err(e, format!("{}.{}: cannot parse '{}'", e.section, e.key, e.value)))
    }

    fn flag(&self, e: &Entry) -> Result<bool> {
        match e.value.as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            v => Err(self.err(e, format!("{}.{}: expected a boolean, found '{v}'", e.section, e.key))),
        }
    }

    fn list(&self, e: &Entry) -> Result<Vec<f64>> {
        e.value
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().map_err(|_| self.err(e, format!("{}.{}: bad number '{t}'", e.section, e.key))))
            .collect()
    }

    fn quad(&self, e: &Entry) -> Result<[f64; 4]> {
        let v = self.list(e)?;
        v.as_slice()
            .try_into()
            .map_err(|_| self.err(e, format!("{}.{}: expected 4 numbers, found {}", e.section, e.key, v.len())))
    }

    fn path(&self, e: &Entry) -> PathBuf {
        let p = PathBuf::from(&e.value);
        if p.is_absolute() {
            p
        } else {
            self.base.join(p)
        }
    }
}

fn constant_slot<'a>(k: &'a mut PhysicalConstants, name: &str) -> Option<&'a mut f64> {
    Some(match name {
        "r_gas" => &mut k.r_gas,
        "temperature" => &mut k.temperature,
        "z" => &mut k.z,
        "p_init" => &mut k.p_init,
        "p_well" => &mut k.p_well,
        "p_langmuir" => &mut k.p_langmuir,
        "c_mu_s" => &mut k.c_mu_s,
        "phi" => &mut k.phi,
        "phi_f" => &mut k.phi_f,
        "eps_ks" => &mut k.eps_ks,
        "eps_kp" => &mut k.eps_kp,
        "diffusivity" => &mut k.diffusivity,
        "diffusivity_s" => &mut k.diffusivity_s,
        "kappa_m" => &mut k.kappa_m,
        "kappa_w" => &mut k.kappa_w,
        "mu" => &mut k.mu,
        "zeta_mf" => &mut k.zeta_mf,
        _ => return None,
    })
}

const CONSTANT_NAMES: [&str; 17] = [
    "r_gas",
    "temperature",
    "z",
    "p_init",
    "p_well",
    "p_langmuir",
    "c_mu_s",
    "phi",
    "phi_f",
    "eps_ks",
    "eps_kp",
    "diffusivity",
    "diffusivity_s",
    "kappa_m",
    "kappa_w",
    "mu",
    "zeta_mf",
];

fn get_constant(k: &PhysicalConstants, name: &str) -> f64 {
    let mut copy = *k;
    constant_slot(&mut copy, name).map_or(f64::NAN, |v| *v)
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, &path.display().to_string(), base)
    }

    pub fn parse(text: &str, path: &str, base: &Path) -> Result<Self> {
        let ctx = Ctx { path, base };
        let entries = tokenize(text, path)?;
        let mut s = Scenario::default();
        let mut seen: Vec<(String, String)> = Vec::new();
        let mut explicit_wells: Option<Vec<WellBox>> = None;
        let mut gen: Option<FractureGenerator> = None;
        let (mut phi_raster, mut k_raster) = (None, None);
        let mut rule_name = "adaptive".to_string();
        let (mut delta, mut m_fixed) = (1e-3, 1usize);
        for e in &entries {
            let id = (e.section.clone(), e.key.clone());
            let repeatable = matches!((e.section.as_str(), e.key.as_str()), ("fractures", "segment") | ("wells", "box"));
            if !repeatable {
                if seen.contains(&id) {
                    return Err(ctx.err(e, format!("duplicate key {}.{}", e.section, e.key)));
                }
                seen.push(id);
            }
            let g = || FractureGenerator {
                count: 0,
                length_min: 0.1,
                length_max: 0.3,
                orientations: vec![0.0, std::f64::consts::FRAC_PI_2],
                seed: 0,
            };
            match (e.section.as_str(), e.key.as_str()) {
                ("scenario", "name") => s.name = e.value.clone(),
                ("mesh", "n") => s.n = ctx.num(e)?,
                ("mesh", "coarse") => s.coarse = ctx.num(e)?,
                ("fractures", "file") => {
                    let spec = io::read_fractures(&ctx.path(e))?;
                    s.fractures.segments.extend(spec.segments);
                    if spec.generator.is_some() {
                        gen = spec.generator;
                    }
                }
                ("fractures", "segment") => {
                    let q = ctx.quad(e)?;
                    s.fractures.segments.push(Segment::new([q[0], q[1]], [q[2], q[3]]));
                }
                ("fractures", "count") => gen.get_or_insert_with(g).count = ctx.num(e)?,
                ("fractures", "length_min") => gen.get_or_insert_with(g).length_min = ctx.num(e)?,
                ("fractures", "length_max") => gen.get_or_insert_with(g).length_max = ctx.num(e)?,
                ("fractures", "orientations_deg") => {
                    gen.get_or_insert_with(g).orientations = ctx.list(e)?.iter().map(|d| d.to_radians()).collect()
                }
                ("fractures", "seed") => gen.get_or_insert_with(g).seed = ctx.num(e)?,
                ("physics", "kf") => s.kf = ctx.num(e)?,
                ("physics", "frozen") => s.frozen = ctx.flag(e)?,
                ("physics", "well_treatment") => {
                    s.well_treatment = match e.value.as_str() {
                        "implicit" => WellTreatment::Implicit,
                        "explicit" => WellTreatment::Explicit,
                        v => return Err(ctx.err(e, format!("unknown well treatment '{v}'"))),
                    }
                }
                ("physics", "phi_raster") => phi_raster = Some(ctx.path(e)),
                ("physics", "k_raster") => k_raster = Some(ctx.path(e)),
                ("physics", name) if CONSTANT_NAMES.contains(&name) => {
                    let v = ctx.num(e)?;
                    if let Some(slot) = constant_slot(&mut s.constants, name) {
                        *slot = v;
                    }
                }
                ("wells", "box") => {
                    let q = ctx.quad(e)?;
                    explicit_wells.get_or_insert_with(Vec::new).push(WellBox::new(q[0], q[1], q[2], q[3]));
                }
                ("wells", "enabled") => {
                    if !ctx.flag(e)? {
                        explicit_wells = Some(Vec::new());
                    }
                }
                ("time", "t_max_days") => s.t_max_days = ctx.num(e)?,
                ("time", "nt") => s.nt = ctx.num(e)?,
                ("time", "convention") => {
                    s.convention = match e.value.as_str() {
                        "per_step" => StepConvention::PerStep,
                        "fence" => StepConvention::Fence,
                        v => return Err(ctx.err(e, format!("unknown step convention '{v}'"))),
                    }
                }
                ("time", "scheme") => {
                    s.scheme = match e.value.as_str() {
                        "linearly_implicit" => Scheme::LinearlyImplicit,
                        "picard" => Scheme::Picard,
                        v => return Err(ctx.err(e, format!("unknown scheme '{v}'"))),
                    }
                }
                ("solver", "tol") => s.tol = ctx.num(e)?,
                ("solver", "max_iter") => s.max_iter = ctx.num(e)?,
                ("solver", "warm_start") => s.warm_start = ctx.flag(e)?,
                ("solver", "preconditioner") => {
                    s.preconditioner = match e.value.as_str() {
                        "two_grid" => PreconditionerKind::TwoGrid,
                        "jacobi" => PreconditionerKind::Jacobi,
                        "none" => PreconditionerKind::Identity,
                        v => return Err(ctx.err(e, format!("unknown preconditioner '{v}'"))),
                    }
                }
                ("basis", "rule") => {
                    if !matches!(e.value.as_str(), "adaptive" | "adaptive_plus_one" | "fixed") {
                        return Err(ctx.err(e, format!("unknown basis rule '{}'", e.value)));
                    }
                    rule_name = e.value.clone();
                }
                ("basis", "delta") => delta = ctx.num(e)?,
                ("basis", "m") => m_fixed = ctx.num(e)?,
                ("basis", "nu") => s.two_grid.nu = ctx.num(e)?,
                ("basis", "k_max") => s.two_grid.k_max = ctx.num(e)?,
                ("basis", "operator") => {
                    s.two_grid.operator = match e.value.as_str() {
                        "diffusion_only" => LocalOperator::DiffusionOnly,
                        "full_a" => LocalOperator::FullA,
                        v => return Err(ctx.err(e, format!("unknown local operator '{v}'"))),
                    }
                }
                ("basis", "eigen") => {
                    s.two_grid.method = match e.value.as_str() {
                        "tridiagonal" => EigenMethod::Tridiagonal,
                        "jacobi" => EigenMethod::Jacobi,
                        v => return Err(ctx.err(e, format!("unknown eigen method '{v}'"))),
                    }
                }
                ("picard", "tol_percent") => s.picard_tol_percent = ctx.num(e)?,
                ("picard", "max_iter") => s.picard_max_iter = ctx.num(e)?,
                ("picard", "inner_tol") => s.picard_inner_tol = ctx.num(e)?,
                ("output", "dir") => s.output = Some(ctx.path(e)),
                ("output", "vtk_steps") => {
                    s.vtk_steps = ctx.list(e)?.into_iter().map(|v| v as usize).collect();
                }
                ("output", "dump_matrices") => s.dump_matrices = ctx.flag(e)?,
                (sec, key) => return Err(ctx.err(e, format!("unknown key '{key}' in section [{sec}]"))),
            }
        }
        if gen.is_some() {
            s.fractures.generator = gen;
        }
        if let Some(w) = explicit_wells {
            s.wells = w;
        }
        s.two_grid.rule = match rule_name.as_str() {
            "fixed" => BasisRule::Fixed(m_fixed),
            "adaptive_plus_one" => BasisRule::AdaptivePlusOne { delta },
            _ => BasisRule::Adaptive { delta },
        };
        s.field = match (phi_raster, k_raster) {
            (None, None) => FieldSelection::Homogeneous,
            (Some(phi), Some(k)) => FieldSelection::Heterogeneous { phi, k },
            _ => return Err(Error::Scenario("phi_raster and k_raster must be given together".into())),
        };
        s.constants = s.constants.with_contrast(s.kf);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Scenario(m));
        if self.n == 0 {
            return bad("mesh.n must be positive".into());
        }
        if self.preconditioner == PreconditionerKind::TwoGrid && (self.coarse == 0 || !self.n.is_multiple_of(self.coarse)) {
            return bad(format!("mesh.coarse = {} must divide mesh.n = {}", self.coarse, self.n));
        }
        if self.nt == 0 {
            return bad("time.nt must be positive".into());
        }
        if !(self.t_max_days > 0.0) {
            return bad("time.t_max_days must be positive".into());
        }
        if !(self.kf > 0.0) {
            return bad("physics.kf must be positive".into());
        }
        for (i, w) in self.wells.iter().enumerate() {
            let ok = |a: f64, b: f64| (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) && a <= b;
            if !(ok(w.x0, w.x1) && ok(w.y0, w.y1)) {
                return bad(format!("well box {i} is not an ordered rectangle inside the unit square"));
            }
        }
        if let FieldSelection::Heterogeneous { phi, k } = &self.field {
            for p in [phi, k] {
                if !p.exists() {
                    return bad(format!("raster {} does not exist", p.display()));
                }
            }
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("solver.tol and solver.max_iter must be positive".into());
        }
        self.constants.validate().map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn t_max(&self) -> f64 {
        self.t_max_days * SECONDS_PER_DAY
    }

    /// The scenario with every setting spelled out; parsing it back gives an
    /// identical scenario.
    pub fn to_config_string(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "[scenario]\nname = {}\n", self.name);
        let _ = writeln!(o, "[mesh]\nn = {}\ncoarse = {}\n", self.n, self.coarse);
        o.push_str("[fractures]\n");
        for s in &self.fractures.segments {
            let _ = writeln!(o, "segment = {:?} {:?} {:?} {:?}", s.a[0], s.a[1], s.b[0], s.b[1]);
        }
        if let Some(g) = &self.fractures.generator {
            let deg: Vec<String> = g.orientations.iter().map(|r| format!("{:?}", r.to_degrees())).collect();
            let _ = writeln!(
                o,
                "count = {}\nlength_min = {:?}\nlength_max = {:?}\norientations_deg = {}\nseed = {}",
                g.count,
                g.length_min,
                g.length_max,
                deg.join(", "),
                g.seed
            );
        }
        let _ = writeln!(o, "\n[physics]\nkf = {:?}\nfrozen = {}", self.kf, self.frozen);
        let wt = match self.well_treatment {
            WellTreatment::Implicit => "implicit",
            WellTreatment::Explicit => "explicit",
        };
        let _ = writeln!(o, "well_treatment = {wt}");
        for name in CONSTANT_NAMES {
            let _ = writeln!(o, "{name} = {:?}", get_constant(&self.constants, name));
        }
        if let FieldSelection::Heterogeneous { phi, k } = &self.field {
            let _ = writeln!(o, "phi_raster = {}\nk_raster = {}", phi.display(), k.display());
        }
        o.push_str("\n[wells]\n");
        if self.wells.is_empty() {
            o.push_str("enabled = false\n");
        }
        for w in &self.wells {
            let _ = writeln!(o, "box = {:?} {:?} {:?} {:?}", w.x0, w.x1, w.y0, w.y1);
        }
        let conv = match self.convention {
            StepConvention::PerStep => "per_step",
            StepConvention::Fence => "fence",
        };
        let scheme = match self.scheme {
            Scheme::LinearlyImplicit => "linearly_implicit",
            Scheme::Picard => "picard",
        };
        let _ = writeln!(
            o,
            "\n[time]\nt_max_days = {:?}\nnt = {}\nconvention = {conv}\nscheme = {scheme}",
            self.t_max_days, self.nt
        );
        let pc = match self.preconditioner {
            PreconditionerKind::TwoGrid => "two_grid",
            PreconditionerKind::Jacobi => "jacobi",
            PreconditionerKind::Identity => "none",
        };
        let _ = writeln!(
            o,
            "\n[solver]\ntol = {:?}\nmax_iter = {}\nwarm_start = {}\npreconditioner = {pc}",
            self.tol, self.max_iter, self.warm_start
        );
        let tg = &self.two_grid;
        o.push_str("\n[basis]\n");
        match tg.rule {
            BasisRule::Fixed(m) => {
                let _ = writeln!(o, "rule = fixed\nm = {m}");
            }
            BasisRule::Adaptive { delta } => {
                let _ = writeln!(o, "rule = adaptive\ndelta = {delta:?}");
            }
            BasisRule::AdaptivePlusOne { delta } => {
                let _ = writeln!(o, "rule = adaptive_plus_one\ndelta = {delta:?}");
            }
        }
        let op = match tg.operator {
            LocalOperator::DiffusionOnly => "diffusion_only",
            LocalOperator::FullA => "full_a",
        };
        let eig = match tg.method {
            EigenMethod::Tridiagonal => "tridiagonal",
            EigenMethod::Jacobi => "jacobi",
        };
        let _ = writeln!(o, "nu = {}\nk_max = {}\noperator = {op}\neigen = {eig}", tg.nu, tg.k_max);
        let _ = writeln!(
            o,
            "\n[picard]\ntol_percent = {:?}\nmax_iter = {}\ninner_tol = {:?}",
            self.picard_tol_percent, self.picard_max_iter, self.picard_inner_tol
        );
        o.push_str("\n[output]\n");
        if let Some(d) = &self.output {
            let _ = writeln!(o, "dir = {}", d.display());
        }
        if !self.vtk_steps.is_empty() {
            let v: Vec<String> = self.vtk_steps.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(o, "vtk_steps = {}", v.join(", "));
        }
        let _ = writeln!(o, "dump_matrices = {}", self.dump_matrices);
        o
    }
}
