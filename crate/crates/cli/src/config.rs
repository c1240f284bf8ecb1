//! Flag validation and the optional TOML defaults file.
//!
//! A config file uses the flag names as keys. Top-level scalars set global
//! flags; a table named after a subcommand sets that subcommand's flags:
//!
//! ```toml
//! eps-deg = 1e-9
//!
//! [iterate]
//! degrees = true
//! steps = 20
//! ```
//!
//! Config entries are spliced into the argument list ahead of the user's own
//! flags, and every flag overrides earlier occurrences of itself, so the
//! command line always wins. Positional arguments cannot come from the file.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tritrans_core::angle_dynamics::{AngleTriple, Tolerances, DEFAULT_CLOSED_FORM_CAP};
use tritrans_core::mesh_io::{Colormap, MeshFormat};
use tritrans_core::plane_geometry::{Point2, TrianglePoints};
use tritrans_core::simple_mesh::{random_admissible_mesh, SimpleMeshAngles};

use crate::args::{Cli, Command, FormatArg};
use crate::error::CliError;

const SUBCOMMANDS: [&str; 6] = [
    "iterate",
    "predict",
    "construct",
    "simple-mesh",
    "analyze",
    "render",
];
const GLOBAL_VALUE_FLAGS: [&str; 4] = [
    "--config",
    "--eps-deg",
    "--sum-repair-tol",
    "--closed-form-cap",
];

/// Inserts the entries of the `--config` file, if any, into `argv`.
pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = find_config_path(&argv) else {
        return Ok(argv);
    };
    let Some(sub_idx) = find_subcommand(&argv) else {
        // Let clap report the missing subcommand.
        return Ok(argv);
    };
    let sub = argv[sub_idx].to_string_lossy().into_owned();
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?;

    let mut global = Vec::new();
    let mut local = Vec::new();
    for (key, value) in &table {
        match value {
            toml::Value::Table(inner) => {
                if !SUBCOMMANDS.contains(&key.as_str()) {
                    return Err(CliError::Validation(format!(
                        "config: unknown section [{key}]"
                    )));
                }
                if *key == sub {
                    for (k, v) in inner {
                        push_flag(&mut local, &format!("{key}.{k}"), k, v)?;
                    }
                }
            }
            v => push_flag(&mut global, key, key, v)?,
        }
    }

    let mut out = Vec::with_capacity(argv.len() + global.len() + local.len());
    out.push(argv[0].clone());
    out.push(argv[sub_idx].clone());
    out.extend(global);
    out.extend(local);
    out.extend(argv[1..sub_idx].iter().cloned());
    out.extend(argv[sub_idx + 1..].iter().cloned());
    Ok(out)
}

fn push_flag(
    out: &mut Vec<OsString>,
    ctx: &str,
    key: &str,
    value: &toml::Value,
) -> Result<(), CliError> {
    let flag = format!("--{}", key.replace('_', "-"));
    if flag == "--config" {
        return Err(CliError::Validation("config: nested `config` key".into()));
    }
    let scalar = |v: &toml::Value| -> Result<String, CliError> {
        match v {
            toml::Value::String(s) => Ok(s.clone()),
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(f) => Ok(format!("{f:e}")),
            _ => Err(CliError::Validation(format!(
                "config: unsupported value for `{ctx}`"
            ))),
        }
    };
    match value {
        toml::Value::Boolean(true) => out.push(flag.into()),
        toml::Value::Boolean(false) => {}
        toml::Value::Array(items) => {
            let joined = items
                .iter()
                .map(scalar)
                .collect::<Result<Vec<_>, _>>()?
                .join(",");
            out.push(format!("{flag}={joined}").into());
        }
        v => out.push(format!("{flag}={}", scalar(v)?).into()),
    }
    Ok(())
}

fn find_config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Index of the subcommand name, skipping values of global flags.
fn find_subcommand(argv: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let s = argv[i].to_string_lossy();
        if SUBCOMMANDS.contains(&s.as_ref()) {
            return Some(i);
        }
        i += if GLOBAL_VALUE_FLAGS.contains(&s.as_ref()) {
            2
        } else {
            1
        };
    }
    None
}

/// Validated inputs for one invocation. Built before any computation runs.
#[derive(Debug)]
pub struct RunConfig {
    pub tolerances: Tolerances,
    pub closed_form_cap: u64,
    pub task: Task,
}

#[derive(Debug)]
pub enum Task {
    Iterate {
        angles: AngleTriple,
        degrees: bool,
        steps: u64,
        closed_form: bool,
        json: bool,
    },
    Predict {
        angles: AngleTriple,
        degrees: bool,
        steps: Vec<u64>,
        paper_literal: bool,
        json: bool,
    },
    Construct {
        triangle: TrianglePoints,
        steps: usize,
        rescale: bool,
        json: bool,
        svg: Option<PathBuf>,
    },
    SimpleMesh {
        mesh: SimpleMeshAngles,
        source: String,
        steps: usize,
        json: bool,
        svg: Option<PathBuf>,
        colormap: Colormap,
    },
    Analyze {
        mesh: PathBuf,
        format: MeshFormat,
        steps: Vec<u64>,
        report: Option<PathBuf>,
        csv: Option<PathBuf>,
        bins: usize,
    },
    Render {
        mesh: PathBuf,
        format: MeshFormat,
        out: PathBuf,
        colormap: Colormap,
    },
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Validation(format!(
            "--{name} must be a positive number, got {v}"
        )))
    }
}

fn angle_triple(values: &[f64], degrees: bool, tol: &Tolerances) -> Result<AngleTriple, CliError> {
    let &[a, b, c] = values else {
        return Err(CliError::Validation(format!(
            "--angles needs exactly 3 values, got {}",
            values.len()
        )));
    };
    let conv = |x: f64| if degrees { x.to_radians() } else { x };
    AngleTriple::with_tolerances(conv(a), conv(b), conv(c), tol)
        .map_err(|e| CliError::Validation(format!("invalid angles: {e}")))
}

fn resolve_format(path: &Path, flag: Option<FormatArg>) -> Result<MeshFormat, CliError> {
    match flag {
        Some(FormatArg::Off) => Ok(MeshFormat::Off),
        Some(FormatArg::Obj) => Ok(MeshFormat::Obj),
        None => MeshFormat::from_path(path).ok_or_else(|| {
            CliError::Validation(format!(
                "cannot tell the format of {} from its extension; pass --format",
                path.display()
            ))
        }),
    }
}

fn colormap(spec: Option<&str>) -> Result<Colormap, CliError> {
    spec.unwrap_or("default").parse().map_err(CliError::from)
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let defaults = Tolerances::default();
        let tolerances = Tolerances {
            degeneracy_eps: positive("eps-deg", cli.eps_deg.unwrap_or(defaults.degeneracy_eps))?,
            sum_repair_tol: positive(
                "sum-repair-tol",
                cli.sum_repair_tol.unwrap_or(defaults.sum_repair_tol),
            )?,
        };
        let closed_form_cap = cli.closed_form_cap.unwrap_or(DEFAULT_CLOSED_FORM_CAP);
        if closed_form_cap == 0 {
            return Err(CliError::Validation(
                "--closed-form-cap must be positive".into(),
            ));
        }

        let task = match cli.command {
            Command::Iterate(a) => Task::Iterate {
                angles: angle_triple(&a.input.angles, a.input.degrees, &tolerances)?,
                degrees: a.input.degrees,
                steps: a.steps,
                closed_form: a.closed_form,
                json: a.json,
            },
            Command::Predict(a) => Task::Predict {
                angles: angle_triple(&a.input.angles, a.input.degrees, &tolerances)?,
                degrees: a.input.degrees,
                steps: a.steps,
                paper_literal: a.paper_literal,
                json: a.json,
            },
            Command::Construct(a) => {
                let &[x1, y1, x2, y2, x3, y3] = a.points.as_slice() else {
                    return Err(CliError::Validation(format!(
                        "--points needs exactly 6 values (x1,y1,x2,y2,x3,y3), got {}",
                        a.points.len()
                    )));
                };
                let triangle = TrianglePoints::new(
                    Point2::new(x1, y1),
                    Point2::new(x2, y2),
                    Point2::new(x3, y3),
                )
                .map_err(|e| CliError::Validation(format!("invalid triangle: {e}")))?;
                Task::Construct {
                    triangle,
                    steps: a.steps,
                    rescale: a.rescale,
                    json: a.json,
                    svg: a.svg,
                }
            }
            Command::SimpleMesh(a) => {
                let (mesh, source) = match (&a.input, a.n, a.optimal, a.random) {
                    (Some(path), _, _, _) => {
                        let text = std::fs::read_to_string(path).map_err(|e| {
                            CliError::Io(format!("cannot read {}: {e}", path.display()))
                        })?;
                        let mesh = SimpleMeshAngles::from_json(&text).map_err(|e| {
                            CliError::Validation(format!("{}: {e}", path.display()))
                        })?;
                        (mesh, format!("file {}", path.display()))
                    }
                    (None, Some(n), true, None) => {
                        (SimpleMeshAngles::optimal(n)?, "optimal".to_string())
                    }
                    (None, Some(n), false, Some(seed)) => {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        (
                            random_admissible_mesh(n, &mut rng)?,
                            format!("random seed {seed}"),
                        )
                    }
                    _ => return Err(CliError::Validation(
                        "simple-mesh needs --input PATH, --n N --optimal, or --n N --random SEED"
                            .into(),
                    )),
                };
                Task::SimpleMesh {
                    mesh,
                    source,
                    steps: a.steps,
                    json: a.json,
                    svg: a.svg,
                    colormap: colormap(a.colormap.as_deref())?,
                }
            }
            Command::Analyze(a) => {
                if a.bins == 0 {
                    return Err(CliError::Validation("--bins must be at least 1".into()));
                }
                Task::Analyze {
                    format: resolve_format(&a.mesh, a.format)?,
                    mesh: a.mesh,
                    steps: a.steps,
                    report: a.report,
                    csv: a.csv,
                    bins: a.bins,
                }
            }
            Command::Render(a) => Task::Render {
                format: resolve_format(&a.mesh, a.format)?,
                mesh: a.mesh,
                out: a.out,
                colormap: colormap(a.colormap.as_deref())?,
            },
        };
        Ok(Self {
            tolerances,
            closed_form_cap,
            task,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn subcommand_found_after_global_values() {
        assert_eq!(
            find_subcommand(&os(&["t", "--eps-deg", "1e-9", "iterate"])),
            Some(3)
        );
        assert_eq!(
            find_subcommand(&os(&["t", "--config=x.toml", "predict"])),
            Some(2)
        );
        assert_eq!(find_subcommand(&os(&["t", "--config", "iterate"])), None);
    }

    #[test]
    fn config_entries_precede_user_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "eps-deg = 1e-6\n[iterate]\nangles = [90, 60, 30]\ndegrees = true\njson = false\n[predict]\nsteps = [1]\n").unwrap();
        let p = path.to_str().unwrap();
        let out = expand_config(os(&["t", "--config", p, "iterate", "--steps", "3"])).unwrap();
        let got: Vec<String> = out
            .iter()
            .map(|s| s.to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            got,
            [
                "t",
                "iterate",
                "--eps-deg=1e-6",
                "--angles=90,60,30",
                "--degrees",
                "--config",
                p,
                "--steps",
                "3"
            ]
        );
    }

    #[test]
    fn unknown_section_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[nope]\nx = 1\n").unwrap();
        let err =
            expand_config(os(&["t", "--config", path.to_str().unwrap(), "iterate"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
