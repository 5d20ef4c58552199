//! Batch front end. Exit codes: 0 when every check passes or the solver
//! converges, 1 when a violation or non-convergence is reported, 2 for
//! usage and configuration errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::catalog::ENTRIES;
use crate::config::{Instance, RunConfig};
use crate::error::{Error, Result};
use crate::maps::CoupledMap;
use crate::oracle::{enumerate_points, fuzz_campaign, oracle_vs_solver};
use crate::order::{
    antisymmetry_failures, check_isotone, check_phi_bound, check_preorder_laws, grid_pairs, is_seed, seed_search,
    Direction,
};
use crate::relations::{check_weakly_left_related, check_weakly_right_related};
use crate::solver::{kmap_round_robin, solve, Scheme, Status};
use crate::space::{check_axioms, check_t0};

#[derive(Debug, Parser)]
#[command(name = "qpfix", version, about = "Coupled fixed points in preordered quasi-pseudometric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the quasi-pseudometric axioms and T₀ on the sample.
    CheckSpace(Common),
    /// Check the induced preorder, the φ bound, and isotonicity of F.
    CheckOrder(Common),
    /// Check that F is weakly related to every self map.
    CheckRelations(Common),
    /// Run the iteration scheme; writes trace.csv and report.json.
    Solve(Common),
    /// Enumerate every fixed and coincidence point of a finite instance.
    Oracle(Common),
    /// Compare solver runs against the oracle, on one instance or a random campaign.
    Compare(CompareArgs),
    /// List catalog ids as JSON.
    Catalog,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    /// RNG seed; required when the config has a `fuzz` block.
    #[arg(long)]
    seed: Option<u64>,
}

const DEFAULT_OUTPUT: &str = "qpfix-out";

struct Outcome {
    passed: bool,
    summary: String,
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(out) => {
            println!("{}", out.summary);
            if out.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("qpfix: {e}");
            2
        }
    }
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::CheckSpace(c) => with_config(&c, check_space),
        Command::CheckOrder(c) => with_config(&c, check_order),
        Command::CheckRelations(c) => with_config(&c, check_relations),
        Command::Solve(c) => with_config(&c, run_solve),
        Command::Oracle(c) => with_config(&c, run_oracle),
        Command::Compare(c) => with_config(&c.common, |cfg, out| compare(cfg, out, c.seed)),
        Command::Catalog => {
            let text = serde_json::to_string_pretty(ENTRIES)?;
            Ok(Outcome { passed: true, summary: text })
        }
    }
}

fn with_config(c: &Common, f: impl FnOnce(&RunConfig, &Path) -> Result<Outcome>) -> Result<Outcome> {
    let cfg = RunConfig::load(&c.config)?;
    let out = c.output_dir.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    fs::create_dir_all(&out)?;
    f(&cfg, &out)
}

/// Write through a temporary sibling and rename, so readers never see a partial file.
fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut file = fs::File::create(&tmp)?;
    file.write_all(bytes)?;
    file.sync_all()?;
    fs::rename(&tmp, dir.join(name))?;
    Ok(())
}

fn write_report(dir: &Path, report: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    write_atomic(dir, "report.json", text.as_bytes())
}

fn coupled(inst: &Instance) -> Result<&CoupledMap> {
    inst.f.as_ref().ok_or_else(|| Error::Config("\"maps\" must start with a coupled map".into()))
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "FAIL"
    }
}

fn check_space(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let inst = cfg.build()?;
    let space = &inst.ctx.space;
    let axioms = check_axioms(space, &inst.sample)?;
    let t0 = check_t0(space, &inst.sample)?;
    let passed = axioms.passed();
    write_report(out, &json!({"command": "check-space", "passed": passed, "axioms": axioms, "t0": t0}))?;
    Ok(Outcome {
        passed,
        summary: format!(
            "check-space: {} ({} identity, {} triangle violations; T₀ {})",
            verdict(passed),
            axioms.identity_violations.len(),
            axioms.triangle_violations.len(),
            if t0.passed() { "holds" } else { "fails" }
        ),
    })
}

fn check_order(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let inst = cfg.build()?;
    let ctx = &inst.ctx;
    let points = inst.sample.resolve(&ctx.space)?;
    let laws = check_preorder_laws(ctx, &inst.sample)?;
    let antisymmetry = antisymmetry_failures(ctx, &inst.sample)?;
    let bound = check_phi_bound(&ctx.phi, &points);
    let (isotone, seeds) = match &inst.f {
        Some(f) => {
            let iso = check_isotone(ctx, f, &inst.sample)?;
            let mut seeds = 0usize;
            for (x, y) in grid_pairs(&points) {
                seeds += usize::from(is_seed(ctx, f, x, y, cfg.solver.direction)?);
            }
            (Some(iso), Some(seeds))
        }
        None => (None, None),
    };
    let passed = laws.passed() && bound.passed() && isotone.as_ref().is_none_or(|r| r.passed());
    write_report(
        out,
        &json!({
            "command": "check-order",
            "passed": passed,
            "laws": laws,
            "antisymmetry_failures": antisymmetry,
            "phi_bound": bound,
            "isotone": isotone,
            "seed_pairs": seeds,
        }),
    )?;
    Ok(Outcome {
        passed,
        summary: format!(
            "check-order: {} (laws {}, φ bound {}, isotone {})",
            verdict(passed),
            verdict(laws.passed()),
            verdict(bound.passed()),
            isotone.as_ref().map_or("n/a", |r| verdict(r.passed()))
        ),
    })
}

fn check_relations(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let inst = cfg.build()?;
    let f = coupled(&inst)?;
    if inst.maps.is_empty() {
        return Err(Error::Config("check-relations needs at least one self map after F".into()));
    }
    let pairs = grid_pairs(&inst.sample.resolve(&inst.ctx.space)?);
    let mut reports = Vec::new();
    for g in &inst.maps {
        let rep = match cfg.solver.direction {
            Direction::Forward => check_weakly_left_related(&inst.ctx, f, g, &pairs)?,
            Direction::Reverse => check_weakly_right_related(&inst.ctx, f, g, &pairs)?,
        };
        reports.push(json!({"map": g.name(), "passed": rep.passed(), "report": rep}));
    }
    let failing: Vec<&str> =
        reports.iter().filter(|r| r["passed"] == false).filter_map(|r| r["map"].as_str()).collect();
    let passed = failing.is_empty();
    let summary = if passed {
        format!("check-relations: pass ({} maps, {} pairs)", reports.len(), pairs.len())
    } else {
        format!("check-relations: FAIL for {}", failing.join(", "))
    };
    write_report(out, &json!({"command": "check-relations", "passed": passed, "relations": reports}))?;
    Ok(Outcome { passed, summary })
}

fn run_solve(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let inst = cfg.build()?;
    let f = coupled(&inst)?;
    let seed = match cfg.seed(&inst.ctx.space)? {
        Some(s) => Some(s),
        None => {
            let pairs = grid_pairs(&inst.sample.resolve(&inst.ctx.space)?);
            seed_search(&inst.ctx, f, &pairs, cfg.solver.direction)?
        }
    };
    let Some(seed) = seed else {
        write_report(out, &json!({"command": "solve", "seed": null, "report": null}))?;
        return Ok(Outcome { passed: false, summary: "solve: no seed pair found on the sample".into() });
    };
    let run = match cfg.scheme() {
        Some(Scheme::Kmap) => kmap_round_robin(&inst.ctx, f, &inst.maps, seed, &cfg.solver)?,
        _ => solve(&inst.ctx, f, &inst.maps, seed, &cfg.solver)?,
    };
    let mut csv = Vec::new();
    run.trace.write_csv(&mut csv)?;
    write_atomic(out, "trace.csv", &csv)?;
    write_report(out, &json!({"command": "solve", "seed": seed, "report": run.report}))?;

    let r = &run.report;
    let summary = match (r.status, r.candidate, &r.violation) {
        (Status::Converged, Some((x, y)), _) => {
            format!(
                "solve: converged to ({x}, {y}) at n = {} (max dˢ residual {:e})",
                r.iterations,
                r.max_residual_ds()
            )
        }
        (Status::HypothesisViolated, _, Some(v)) => {
            format!("solve: hypothesis violated: {} at n = {} on ({}, {})", v.condition, v.index, v.pair.0, v.pair.1)
        }
        _ => format!("solve: no convergence after {} iterations", r.iterations),
    };
    Ok(Outcome { passed: r.status == Status::Converged, summary })
}

fn run_oracle(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let inst = cfg.build()?;
    let rep = enumerate_points(&inst.ctx.space, coupled(&inst)?, &inst.maps, 0.0)?;
    write_report(out, &json!({"command": "oracle", "sets": rep}))?;
    Ok(Outcome { passed: true, summary: format!("oracle: {} coupled fixed points", rep.e1.len()) })
}

fn compare(cfg: &RunConfig, out: &Path, seed: Option<u64>) -> Result<Outcome> {
    if let Some(fuzz) = &cfg.fuzz {
        let seed = seed.ok_or_else(|| Error::Config("randomized compare needs --seed".into()))?;
        let rep = fuzz_campaign(seed, fuzz, &cfg.solver)?;
        write_report(out, &json!({"command": "compare", "campaign": rep}))?;
        return Ok(Outcome {
            passed: rep.agrees(),
            summary: format!(
                "compare: {} disagreements over {} instances ({} runs, {} converged)",
                rep.disagreements, rep.instances, rep.seeds_tried, rep.converged
            ),
        });
    }
    let inst = cfg.build()?;
    let rep = oracle_vs_solver(&inst.ctx, coupled(&inst)?, &inst.maps, &cfg.solver)?;
    write_report(out, &json!({"command": "compare", "agreement": rep}))?;
    let note = if rep.no_seeds { ", no seeds" } else { "" };
    Ok(Outcome {
        passed: rep.agrees(),
        summary: format!("compare: {} disagreements over {} seeds{note}", rep.disagreements.len(), rep.seeds_tried),
    })
}
