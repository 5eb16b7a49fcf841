//! Command-line interface.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand};
use symclust_core::{cut_height, cut_k, suggest_k};

use crate::error::{Error, Result};
use crate::formats::{read_merges, read_objects, write_objects, LabelTable};
use crate::pipeline::{self, ClusterConfig};
use crate::profile::{profile, write_profile};
use crate::schema_file::{load_schema, write_schema};
use crate::synth::{generate_synthetic, SynthProfile};

#[derive(Debug, Parser)]
#[command(
    name = "symclust",
    version,
    about = "Clustering of modal-valued symbolic data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured pipeline and write its outputs.
    Cluster {
        #[arg(long)]
        config: PathBuf,
        /// Run restarts one after another instead of on the thread pool.
        #[arg(long)]
        sequential: bool,
    },
    /// Cut a merge list into a flat clustering.
    #[command(group(ArgGroup::new("level").required(true).args(["k", "height"])))]
    Cut {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        height: Option<f64>,
        /// Leaf names (`leaves.csv` of a run).
        #[arg(long)]
        leaves: Option<PathBuf>,
        /// Map units to clusters through their `leader` or `leaf` column.
        #[arg(long)]
        assignments: Option<PathBuf>,
        /// Output CSV; standard output by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pooled distributions per cluster and variable.
    Profile {
        #[arg(long)]
        clustering: PathBuf,
        #[arg(long)]
        units: PathBuf,
        /// Supplies variable and category names.
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Label column; defaults to `cluster`, then `leader`, then `leaf`.
        #[arg(long)]
        column: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate synthetic units with planted groups.
    Generate {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Directory for `units.jsonl`, `labels.csv` and `schema.toml`.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| Error::io(p, e))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn cmd_cluster(config: &Path, sequential: bool) -> Result<()> {
    let cfg = ClusterConfig::load(config)?;
    let run = pipeline::run(&cfg, sequential)?;
    let written = run.write(&cfg.output_dir)?;
    for w in run.report["warnings"].as_array().into_iter().flatten() {
        eprintln!("warning: {}", w.as_str().unwrap_or_default());
    }
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_cut(
    tree: &Path,
    k: Option<usize>,
    height: Option<f64>,
    leaves: Option<&Path>,
    assignments: Option<&Path>,
    out: &Option<PathBuf>,
) -> Result<()> {
    let merges = read_merges(tree)?;
    let n = merges.len() + 1;
    let labels = match (k, height) {
        (Some(k), _) => {
            if k == 0 || k > n {
                return Err(Error::Config(format!("k = {k} outside 1..={n}")));
            }
            cut_k(n, &merges, k)?
        }
        (None, Some(h)) => cut_height(n, &merges, h)?,
        (None, None) => unreachable!("clap requires one"),
    };
    let heights: Vec<String> = merges.iter().map(|m| m.height.to_string()).collect();
    eprintln!("heights: {}", heights.join(" "));
    match suggest_k(&merges) {
        Some(s) => eprintln!("largest gap suggests k = {s}"),
        None => eprintln!("too few merges to suggest k"),
    }
    eprintln!("clusters: {}", labels.iter().max().map_or(0, |m| m + 1));

    let table = if let Some(a) = assignments {
        let t = LabelTable::read(a)?;
        let (_, leaf_of) = t
            .first_of(&["leader", "leaf"])
            .ok_or_else(|| Error::Data(format!("{}: no `leader` or `leaf` column", a.display())))?;
        let cl = leaf_of
            .iter()
            .map(|&l| {
                labels
                    .get(l)
                    .copied()
                    .ok_or_else(|| Error::Data(format!("leaf {l} not in a tree of {n} leaves")))
            })
            .collect::<Result<Vec<_>>>()?;
        (
            LabelTable::new(t.ids.clone()).with("cluster", cl),
            "unit_id",
        )
    } else {
        let names = match leaves {
            Some(p) => {
                let t = LabelTable::read(p)?;
                if t.ids.len() != n {
                    return Err(Error::Data(format!(
                        "{} names {} leaves but the tree has {n}",
                        p.display(),
                        t.ids.len()
                    )));
                }
                t.ids
            }
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        (LabelTable::new(names).with("cluster", labels), "leaf")
    };
    match out {
        Some(p) => table.0.write(p, table.1),
        None => std::io::stdout()
            .write_all(table.0.to_csv(table.1)?.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn cmd_profile(
    clustering: &Path,
    units: &Path,
    schema: Option<&Path>,
    column: Option<&str>,
    out: &Option<PathBuf>,
) -> Result<()> {
    let schema = schema.map(load_schema).transpose()?.map(|s| s.schema);
    let units = read_objects(units, schema.as_ref())?;
    let table = LabelTable::read(clustering)?;
    let labels = match column {
        Some(c) => table
            .column(c)
            .ok_or_else(|| Error::Config(format!("{}: no column '{c}'", clustering.display())))?,
        None => {
            table
                .first_of(&["cluster", "leader", "leaf"])
                .ok_or_else(|| Error::Data(format!("{}: no label column", clustering.display())))?
                .1
        }
    };
    let by_id: HashMap<&str, usize> = table
        .ids
        .iter()
        .map(String::as_str)
        .zip(labels.iter().copied())
        .collect();
    if by_id.len() != units.len() {
        return Err(Error::Data(format!(
            "clustering covers {} units, the units file has {}",
            by_id.len(),
            units.len()
        )));
    }
    let unit_labels = units
        .iter()
        .map(|x| {
            by_id
                .get(x.id.as_str())
                .copied()
                .ok_or_else(|| Error::Data(format!("unit '{}' is not in the clustering", x.id)))
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = profile(&units, &unit_labels, schema.as_ref())?;
    write_profile(output(out)?, &rows)
}

fn cmd_generate(profile_path: &Path, seed: u64, out: &Path) -> Result<()> {
    let profile = SynthProfile::load(profile_path)?;
    let data = generate_synthetic(&profile, seed)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_objects(&out.join("units.jsonl"), &data.units)?;
    write_schema(&data.schema, &out.join("schema.toml"))?;
    LabelTable::new(data.units.iter().map(|x| x.id.clone()).collect())
        .with("group", data.labels)
        .write(&out.join("labels.csv"), "unit_id")?;
    eprintln!("wrote {} units to {}", data.units.len(), out.display());
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Cluster { config, sequential } => cmd_cluster(&config, sequential),
        Command::Cut {
            tree,
            k,
            height,
            leaves,
            assignments,
            out,
        } => cmd_cut(
            &tree,
            k,
            height,
            leaves.as_deref(),
            assignments.as_deref(),
            &out,
        ),
        Command::Profile {
            clustering,
            units,
            schema,
            column,
            out,
        } => cmd_profile(
            &clustering,
            &units,
            schema.as_deref(),
            column.as_deref(),
            &out,
        ),
        Command::Generate { profile, seed, out } => cmd_generate(&profile, seed, &out),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
