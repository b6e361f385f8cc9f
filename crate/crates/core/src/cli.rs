//! Command-line front end. Exit codes: 0 every check passed, 1 a check
//! failed (the report says which), 2 bad usage, malformed or invalid input,
//! or an exceeded resource bound.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use crate::characterisation::{check_canonical, check_coreflexives_split, check_subcanonical, derive_topology, derived_involution, roundtrip};
use crate::crible::build_rc;
use crate::error::{Error, Result};
use crate::fincat::{load_site, validate_category, validate_topology, CategoryData, FinCategory, GrothendieckTopology, SiteData};
use crate::fixtures::write_fixtures;
use crate::matr::{check_matr_modular, MatrConfig, DEFAULT_SAMPLES};
use crate::nucleus::closed_cribles;
use crate::quantaloid::{maps_category, validate_involution, validate_quantaloid, validate_quantaloid_data, FinQuantaloid, Involution, Property, PropertyContext, QuantaloidData};
use crate::report::{Check, CheckReport, Verdict};
use crate::Bounds;

#[derive(Parser, Debug)]
#[command(name = "qcrib", version, about = "Finite quantaloids of closed cribles")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Cap applied to every enumeration.
    #[arg(long, env = "QCRIB_BOUND", global = true)]
    bound: Option<u64>,
    /// Seed for randomized Matr(Q) sampling; selects randomized mode.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Toggle::On, global = true)]
    parallel: Toggle,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InvolutionChoice {
    /// The involution stored in the file.
    File,
    /// The involution determined by the maps of Q.
    Derived,
    /// `q^o = q`.
    Identity,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a category, site or quantaloid file against its laws.
    Validate { file: PathBuf },
    /// Check the four characterising axioms of a quantaloid.
    Axioms {
        file: PathBuf,
        /// Also check modular, tabular and map_tabular.
        #[arg(long)]
        extended: bool,
    },
    /// Build the quantaloid of cribles on a category.
    BuildRc {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the quantaloid of closed cribles on a site.
    BuildRcj {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the category of maps of a quantaloid.
    Map {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive the topology on the maps of a quantaloid.
    DeriveTopology {
        file: PathBuf,
        /// Write the derived site here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct a quantaloid from closed cribles on its maps.
    Roundtrip { file: PathBuf },
    /// Check that every representable is a sheaf on a site.
    Subcanonical { file: PathBuf },
    /// Check that a site carries the canonical topology.
    Canonical { file: PathBuf },
    /// Check that coreflexives split.
    SplitCheck { file: PathBuf },
    /// Check the modular law for matrices over a quantaloid.
    MatrCheck {
        file: PathBuf,
        /// Largest typed set.
        #[arg(long, default_value_t = 2)]
        size: usize,
        /// Random triples per shape in randomized mode.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: u64,
        /// Defaults to the file's involution, else the derived one.
        #[arg(long, value_enum)]
        involution: Option<InvolutionChoice>,
    },
    /// Write the built-in instances as files.
    Fixtures { dir: PathBuf },
}

/// Runs the CLI on `args` (including the program name), writing the report
/// to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if e.use_stderr() {
                eprint!("{e}");
            } else {
                let _ = write!(out, "{e}");
            }
            return code;
        }
    };
    let result = match cli.parallel {
        Toggle::On => execute(&cli),
        Toggle::Off => match rayon::ThreadPoolBuilder::new().num_threads(1).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(Error::Internal(e.to_string())),
        },
    };
    match result {
        Ok(Some(report)) => {
            let text = match cli.format {
                Format::Text => report.to_text(),
                Format::Json => report.to_json() + "\n",
            };
            if out.write_all(text.as_bytes()).is_err() {
                return 2;
            }
            if report.overall {
                0
            } else {
                1
            }
        }
        Ok(None) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn require(kind: &'static str, v: Verdict) -> Result<()> {
    match v.witness {
        None => Ok(()),
        Some(w) => Err(Error::invalid(kind, w)),
    }
}

fn load_category(path: &Path) -> Result<FinCategory> {
    FinCategory::from_data(&read_json::<CategoryData>(path)?)
}

fn load_site_file(path: &Path) -> Result<(FinCategory, GrothendieckTopology)> {
    let data: SiteData = read_json(path)?;
    let (c, j) = load_site(&data, path.parent())?;
    require("topology", validate_topology(&c, &j))?;
    Ok((c, j))
}

fn load_quantaloid(path: &Path) -> Result<(FinQuantaloid, Option<Involution>)> {
    let (q, inv) = FinQuantaloid::from_data(&read_json::<QuantaloidData>(path)?)?;
    require("quantaloid", validate_quantaloid(&q))?;
    if let Some(i) = &inv {
        require("involution", validate_involution(&q, i)?)?;
    }
    Ok((q, inv))
}

fn subject(path: &Path) -> String {
    path.display().to_string()
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64() * 1e3))
}

fn hom_sizes(q: &FinQuantaloid) -> serde_json::Value {
    let n = q.n_objects();
    let map: serde_json::Map<String, serde_json::Value> = (0..n * n)
        .map(|h| {
            let (x, y) = (h / n, h % n);
            (crate::quantaloid::hom_key(q.object_id(x), q.object_id(y)), q.hom(x, y).len().into())
        })
        .collect();
    map.into()
}

fn execute(cli: &Cli) -> Result<Option<CheckReport>> {
    let bounds = cli.bound.map(Bounds::with_global).unwrap_or_default();
    let report = match &cli.command {
        Command::Validate { file } => validate(file)?,
        Command::Axioms { file, extended } => {
            let (q, inv) = load_quantaloid(file)?;
            let ctx = PropertyContext::new(&q)?;
            let mut r = CheckReport::new(subject(file));
            for p in Property::AXIOMS {
                let (v, ms) = timed(|| ctx.check(p, None))?;
                r.push(Check::new(p.as_str(), v.verdict).timed(ms));
            }
            if *extended {
                let inv = match inv {
                    Some(i) => Some(i),
                    None => derived_involution(&q).ok(),
                };
                for p in [Property::MapTabular, Property::Tabular, Property::Modular] {
                    if p.needs_involution() && inv.is_none() {
                        return Err(Error::Argument(format!(
                            "`{p}` needs an involution: the file has none and the axioms do not determine one"
                        )));
                    }
                    let (v, ms) = timed(|| ctx.check(p, inv.as_ref()))?;
                    r.push(Check::new(p.as_str(), v.verdict).timed(ms));
                }
            }
            r
        }
        Command::BuildRc { file, out } => {
            let c = load_category(file)?;
            let (rc, ms) = timed(|| build_rc(&c, &bounds))?;
            let mut r = CheckReport::new(subject(file));
            r.push(Check::new("quantaloid laws", validate_quantaloid(&rc.quantaloid)).timed(ms));
            r.push(Check::new("involution laws", validate_involution(&rc.quantaloid, &rc.involution)?));
            r.attach("hom_sizes", hom_sizes(&rc.quantaloid));
            if let Some(p) = out {
                write_json(p, &rc.quantaloid.to_data(Some(&rc.involution)))?;
            }
            r
        }
        Command::BuildRcj { file, out } => {
            let (c, j) = load_site_file(file)?;
            let (closed, ms) = timed(|| closed_cribles(build_rc(&c, &bounds)?, &j))?;
            let q = closed.quantaloid();
            let mut r = CheckReport::new(subject(file));
            r.push(Check::new("quantaloid laws", validate_quantaloid(q)).timed(ms));
            r.push(Check::new("involution laws", validate_involution(q, &closed.involution)?));
            r.attach("hom_sizes", hom_sizes(q));
            if let Some(p) = out {
                write_json(p, &q.to_data(Some(&closed.involution)))?;
            }
            r
        }
        Command::Map { file, out } => {
            let (q, _) = load_quantaloid(file)?;
            let m = maps_category(&q)?;
            let data = m.category.to_data();
            let mut r = CheckReport::new(subject(file));
            r.push(Check::new("maps form a category", validate_category(&data)?));
            r.attach("category", serde_json::to_value(&data)?);
            if let Some(p) = out {
                write_json(p, &data)?;
            }
            r
        }
        Command::DeriveTopology { file, out } => {
            let (q, _) = load_quantaloid(file)?;
            let (d, ms) = timed(|| derive_topology(&q))?;
            let mut r = CheckReport::new(subject(file));
            r.push(Check::new("derived topology satisfies the axioms", d.verdict.clone()).timed(ms));
            r.attach("topology", serde_json::to_value(d.topology.to_covers_data(&d.maps.category))?);
            if let Some(p) = out {
                write_json(p, &SiteData::new(&d.maps.category, &d.topology))?;
            }
            r
        }
        Command::Roundtrip { file } => {
            let (q, _) = load_quantaloid(file)?;
            roundtrip(&q, &bounds)?.report(&subject(file))
        }
        Command::Subcanonical { file } => {
            let (c, j) = load_site_file(file)?;
            let (v, ms) = timed(|| check_subcanonical(&c, &j, &bounds))?;
            let mut r = CheckReport::new(subject(file));
            r.push(Check::new("subcanonical", v).timed(ms));
            r
        }
        Command::Canonical { file } => {
            let (c, j) = load_site_file(file)?;
            let (v, ms) = timed(|| check_canonical(&c, &j, &bounds))?;
            let mut r = CheckReport::new(subject(file));
            r.push(Check::new("canonical", v).timed(ms));
            r
        }
        Command::SplitCheck { file } => {
            let (q, _) = load_quantaloid(file)?;
            let mut r = CheckReport::new(subject(file));
            r.push(Check::new("coreflexives split", check_coreflexives_split(&q)));
            r
        }
        Command::MatrCheck {
            file,
            size,
            samples,
            involution,
        } => {
            let (q, stored) = load_quantaloid(file)?;
            let inv = match (involution, stored) {
                (Some(InvolutionChoice::Identity), _) => Involution::identity_on_ids(&q)?,
                (Some(InvolutionChoice::Derived), _) | (None, None) => derived_involution(&q)?,
                (Some(InvolutionChoice::File), None) => {
                    return Err(Error::Argument("the file has no involution".into()));
                }
                (_, Some(i)) => i,
            };
            require("involution", validate_involution(&q, &inv)?)?;
            let cfg = MatrConfig {
                size_bound: *size,
                seed: cli.seed,
                samples: *samples,
                budget: bounds.matr_triples,
            };
            let mut r = check_matr_modular(&q, &inv, &cfg)?;
            r.subject = subject(file);
            r
        }
        Command::Fixtures { dir } => {
            let mut r = CheckReport::new(subject(dir));
            let paths = write_fixtures(dir)?;
            let names: Vec<String> = paths.iter().map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned()).collect();
            r.attach("written", serde_json::to_value(names)?);
            r
        }
    };
    Ok(Some(report))
}

/// File kind by shape: quantaloids have `homs`, sites have `covers`.
fn validate(file: &Path) -> Result<CheckReport> {
    let raw: serde_json::Value = read_json(file)?;
    let mut r = CheckReport::new(subject(file));
    if raw.get("homs").is_some() {
        let data: QuantaloidData = serde_json::from_value(raw).map_err(|e| Error::Malformed(e.to_string()))?;
        for (name, v) in validate_quantaloid_data(&data)? {
            r.push(Check::new(name, v));
        }
    } else if raw.get("covers").is_some() {
        let data: SiteData = serde_json::from_value(raw).map_err(|e| Error::Malformed(e.to_string()))?;
        let (c, j) = load_site(&data, file.parent())?;
        r.push(Check::new("category", Verdict::pass()));
        r.push(Check::new("topology", validate_topology(&c, &j)));
    } else {
        let data: CategoryData = serde_json::from_value(raw).map_err(|e| Error::Malformed(e.to_string()))?;
        r.push(Check::new("category", validate_category(&data)?));
    }
    Ok(r)
}
