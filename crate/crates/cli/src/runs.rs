//! Subcommand implementations.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use lochs::config::{DataSpec, EquationConfig, ExperimentConfig, NormsConfig, OutputConfig};
use lochs::error::{Error, Result};
use lochs::norms::{uls_norm, CutoffFamily, SupMode};
use lochs::propagator::linear_evolve;
use lochs::solver::{
    ap_propagation_check, energy_diagnostics, galerkin_cauchy_study, solve_with_time_search,
    Backend, EquationSpec, SolveConfig,
};
use lochs::symbols::{dyadic_grid, symbol_by_name, validate_symbol};
use lochs::verify::{run_all, run_case, InequalityCase, REGISTRY};
use lochs::{Dyadic, SpectralField};

use crate::plot;
use crate::Command;

pub fn parse_sup_mode(s: &str) -> std::result::Result<SupMode, String> {
    match s {
        "lattice" => Ok(SupMode::Lattice),
        "translation" => Ok(SupMode::Translation),
        other => Err(format!(
            "unknown sup mode '{other}' (lattice | translation)"
        )),
    }
}

fn load_data(path: &Path) -> Result<DataSpec> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn load_equation(path: &Path) -> Result<EquationConfig> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::ValidateSymbol {
            symbol,
            k_max,
            grid_max_exp,
        } => {
            let sym = symbol_by_name(&symbol)?;
            let report = validate_symbol(&sym, k_max, &dyadic_grid(grid_max_exp))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Norm {
            data,
            s,
            symbol,
            mode,
            grid,
        } => {
            let spec = load_data(&data)?;
            let sym = symbol_by_name(&symbol)?;
            let family = CutoffFamily::for_symbol(&sym);
            let report = if grid {
                uls_norm(&spec.build_grid()?, s, &family, mode)?
            } else {
                uls_norm(&spec.build_trig()?, s, &family, mode)?
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::EvolveLinear {
            data,
            symbol,
            s,
            times,
            out,
        } => {
            let spec = load_data(&data)?;
            let sym = symbol_by_name(&symbol)?;
            let family = CutoffFamily::for_symbol(&sym);
            let u0 = spec.build_trig()?;
            let times: std::result::Result<Vec<f64>, _> =
                times.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let times = times.map_err(|e| Error::InvalidConfig(format!("bad time list: {e}")))?;
            let base = uls_norm(&u0, s, &family, SupMode::Lattice)?;
            let all_blocks: Vec<Dyadic> = base.per_block.keys().copied().collect();
            let mut csv = String::new();
            csv.push_str("t,norm,ratio");
            for n in &all_blocks {
                csv.push_str(&format!(",block_{n}"));
            }
            csv.push('\n');
            let mut write_row = |t: f64, rep: &lochs::NormReport| {
                let ratio = if base.value == 0.0 {
                    1.0
                } else {
                    rep.value / base.value
                };
                csv.push_str(&format!("{t},{},{ratio}", rep.value));
                for n in &all_blocks {
                    let b = rep.per_block.get(n).map(|b| b.value).unwrap_or(0.0);
                    csv.push_str(&format!(",{b}"));
                }
                csv.push('\n');
            };
            write_row(0.0, &base);
            for &t in &times {
                let evolved = linear_evolve(&u0, &sym, t);
                let rep = uls_norm(&evolved, s, &family, SupMode::Lattice)?;
                write_row(t, &rep);
            }
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Evolve {
            config,
            equation,
            data,
            t,
            nodes,
            m,
            backend,
            out_dir,
        } => {
            let mut cfg = match (&config, &equation, &data) {
                (Some(path), _, _) => ExperimentConfig::load(path)?,
                (None, Some(eq_path), Some(data_path)) => ExperimentConfig {
                    version: lochs::config::SCHEMA_VERSION.into(),
                    equation: load_equation(eq_path)?,
                    data: load_data(data_path)?,
                    solve: SolveConfig::default(),
                    norms: NormsConfig::default(),
                    output: OutputConfig::default(),
                },
                _ => {
                    return Err(Error::InvalidConfig(
                        "evolve needs --config or both --equation and --data".into(),
                    ))
                }
            };
            if let Some(t) = t {
                cfg.solve.t_final = t;
            }
            if let Some(nodes) = nodes {
                cfg.solve.n_time_nodes = nodes;
            }
            if let Some(m) = m {
                cfg.solve.m_list = vec![Dyadic::from_value(m).ok_or_else(|| {
                    Error::InvalidConfig(format!("M = {m} is not a power of two"))
                })?];
            }
            if let Some(b) = backend {
                cfg.solve.backend = match b.as_str() {
                    "trig" => Backend::Trig,
                    "grid" => Backend::Grid,
                    other => {
                        return Err(Error::InvalidConfig(format!(
                            "unknown backend '{other}' (trig | grid)"
                        )))
                    }
                };
            }
            if let Some(dir) = out_dir {
                cfg.output.dir = dir.to_string_lossy().into_owned();
            }
            run_evolve(&cfg)
        }
        Command::CauchyStudy { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let eq = cfg.equation.build()?;
            let family = CutoffFamily::for_symbol(&eq.sym);
            let study = match cfg.solve.backend {
                Backend::Trig => {
                    galerkin_cauchy_study(&cfg.data.build_trig()?, &eq, &cfg.solve, &family)?
                }
                Backend::Grid => {
                    galerkin_cauchy_study(&cfg.data.build_grid()?, &eq, &cfg.solve, &family)?
                }
            };
            let dir = ensure_out_dir(&cfg)?;
            let mut csv = String::from("m,sup_diff\n");
            for row in &study.rows {
                csv.push_str(&format!("{},{}\n", row.m, row.sup_diff));
            }
            let path = dir.join(format!("{}.cauchy.csv", cfg.output.prefix));
            std::fs::write(&path, artifact_csv(&cfg, &csv))?;
            println!("{}", serde_json::to_string_pretty(&study)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Envelope {
            data,
            s,
            delta,
            symbol,
        } => {
            let spec = load_data(&data)?;
            let sym = symbol_by_name(&symbol)?;
            let family = CutoffFamily::for_symbol(&sym);
            let env = lochs::solver::build_envelope(&spec.build_trig()?, s, delta, &family)?;
            println!("{}", serde_json::to_string_pretty(&env)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::ApCheck { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let eq = cfg.equation.build()?;
            let family = CutoffFamily::for_symbol(&eq.sym);
            let u0 = cfg.data.build_trig()?;
            let module0 = u0.module().clone();
            let reg = cfg.solve.m_list.last().copied();
            let reg = if eq.q.is_zero() {
                reg
            } else {
                Some(reg.unwrap_or(Dyadic::from_exponent(6)))
            };
            let traj = solve_with_time_search(&u0, &eq, reg, &cfg.solve, &family)?;
            let check = ap_propagation_check(&traj, &module0);
            let out = serde_json::json!({
                "config_sha256": cfg.hash(),
                "achieved_t": traj.achieved_t,
                "contained": check.contained,
                "spectrum_growth": check.spectrum_growth,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(if check.contained {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Verify {
            case,
            trials,
            seed,
            report,
        } => {
            let cases: Vec<InequalityCase> = match case {
                Some(name) => {
                    let default = REGISTRY
                        .iter()
                        .find(|c| c.name == name)
                        .map(|c| c.default_trials)
                        .unwrap_or(20);
                    vec![run_case(&name, trials.unwrap_or(default), seed)?]
                }
                None => run_all(seed)?.cases,
            };
            let all_pass = cases.iter().all(|c| c.pass);
            for c in &cases {
                let slopes: Vec<String> = c
                    .slopes
                    .iter()
                    .map(|s| {
                        format!(
                            "{}: {:.3} (target {} +/- {})",
                            s.label, s.slope, s.target, s.tol
                        )
                    })
                    .collect();
                println!(
                    "{} {:<24} max={:>12.5e} median={:>12.5e} bound={:<9} trials={:<4} [{} ms]{}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.stats.max,
                    c.stats.median,
                    c.threshold,
                    c.trials,
                    c.elapsed_ms,
                    if slopes.is_empty() {
                        String::new()
                    } else {
                        format!(" {}", slopes.join("; "))
                    }
                );
                for f in &c.failures {
                    println!("     failure: {f}");
                }
            }
            if let Some(path) = report {
                let doc = serde_json::json!({ "seed": seed, "all_pass": all_pass, "cases": cases });
                std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
            }
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Plot {
            input,
            output,
            x,
            y,
            loglog,
        } => {
            plot::render(&input, &output, &x, y.as_deref(), loglog)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn ensure_out_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&cfg.output.dir);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Prepends the config hash as a comment line so every artifact cites its
/// configuration.
fn artifact_csv(cfg: &ExperimentConfig, body: &str) -> String {
    format!("# config_sha256={}\n{body}", cfg.hash())
}

fn run_evolve(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let eq = cfg.equation.build()?;
    let family = CutoffFamily::for_symbol(&eq.sym);
    match cfg.solve.backend {
        Backend::Trig => {
            let u0 = cfg.data.build_trig()?;
            evolve_and_emit(cfg, &eq, &family, &u0)
        }
        Backend::Grid => {
            let u0 = cfg.data.build_grid()?;
            evolve_and_emit(cfg, &eq, &family, &u0)
        }
    }
}

fn evolve_and_emit<F: SpectralField>(
    cfg: &ExperimentConfig,
    eq: &EquationSpec,
    family: &CutoffFamily,
    u0: &F,
) -> Result<ExitCode> {
    let reg = if eq.q.is_zero() {
        None
    } else {
        Some(pick_reg(cfg)?)
    };
    let traj = solve_with_time_search(u0, eq, reg, &cfg.solve, family)?;
    let energy = energy_diagnostics(&traj, eq, family)?;
    let dir = ensure_out_dir(cfg)?;

    let mut csv = String::from("t,norm_s,norm_c1,spectrum_size,pruned_mass\n");
    for d in &traj.diagnostics {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            d.t, d.norm_s, d.norm_c1, d.spectrum_size, d.pruned_mass
        ));
    }
    let csv_path = dir.join(format!("{}.diagnostics.csv", cfg.output.prefix));
    std::fs::write(&csv_path, artifact_csv(cfg, &csv))?;

    let doc = serde_json::json!({
        "config_sha256": cfg.hash(),
        "achieved_t": traj.achieved_t,
        "sweeps": traj.sweeps,
        "final_residual": traj.final_residual,
        "pruned_mass": traj.pruned_mass,
        "energy": energy,
        "trajectory": traj,
    });
    let json_path = dir.join(format!("{}.trajectory.json", cfg.output.prefix));
    let mut f = std::io::BufWriter::new(std::fs::File::create(&json_path)?);
    f.write_all(serde_json::to_string_pretty(&doc)?.as_bytes())?;
    f.flush()?;

    println!(
        "solved to t={} in {} sweeps; artifacts: {}, {}",
        traj.achieved_t,
        traj.sweeps,
        json_path.display(),
        csv_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn pick_reg(cfg: &ExperimentConfig) -> Result<Dyadic> {
    cfg.solve.m_list.last().copied().ok_or_else(|| {
        Error::InvalidConfig(
            "equations with a derivative nonlinearity need a regularization level (--m)".into(),
        )
    })
}
