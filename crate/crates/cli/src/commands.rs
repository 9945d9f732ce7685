use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use cvqkd_core::model::{self, mutual_information_ab};
use cvqkd_core::rate_match::{
    self, format_sig, headroom_operating_point, optimize_operating_point, required_artificial_noise,
    sweep_transmittance,
};
use cvqkd_core::sim::simulate as run_simulation;
use cvqkd_core::{CodeSpec, LinkParams, OperatingPoint, RateMatchError, SimConfig};
use serde_json::{json, Value};

use crate::config::{OperatingPointSource, ScenarioConfig};
use crate::CliError;

fn infeasible(err: RateMatchError) -> CliError {
    CliError::Infeasible(err.to_string())
}

fn io_error(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {err}", path.display()))
}

/// Rounds to the 12 significant digits used in all printed output.
fn sig(x: f64) -> f64 {
    format_sig(x).parse().unwrap_or(x)
}

fn build_operating_point(
    cfg: &ScenarioConfig,
    headroom: Option<f64>,
) -> Result<OperatingPoint, CliError> {
    let code = cfg.code()?;
    let l = &cfg.link;
    let op = match cfg.operating_point_source() {
        OperatingPointSource::Optimize => optimize_operating_point(l.xi_ch, l.t_rec, l.xi_rec, &code),
        OperatingPointSource::Transmittance(t) => {
            OperatingPoint::at_transmittance(t, l.xi_ch, l.t_rec, l.xi_rec, &code)
        }
        OperatingPointSource::Modulation(v) => {
            OperatingPoint::at_modulation(v, l.xi_ch, l.t_rec, l.xi_rec, &code)
        }
        OperatingPointSource::Explicit { t_ch, v_mod } => {
            let p = LinkParams::new(v_mod, t_ch, l.xi_ch, l.t_rec, l.xi_rec, 0.0)
                .map_err(|e| CliError::Config(e.to_string()))?;
            OperatingPoint::from_link(&p, &code)
        }
    }
    .map_err(infeasible)?;
    let factor = headroom.unwrap_or(cfg.headroom_factor);
    if !(factor >= 1.0 && factor.is_finite()) {
        return Err(CliError::Config(format!("headroom must be >= 1, got {factor}")));
    }
    headroom_operating_point(&op, factor).map_err(infeasible)
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_error(path, e))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_error(path, e))
}

fn code_json(code: &CodeSpec) -> Value {
    json!({
        "label": code.label,
        "rate": sig(code.rate),
        "beta": sig(code.beta),
        "min_snr": sig(rate_match::min_snr(code)),
    })
}

fn link_json(p: &LinkParams) -> Value {
    json!({
        "v_mod": sig(p.v_mod),
        "t_ch": sig(p.t_ch),
        "xi_ch": sig(p.xi_ch),
        "t_rec": sig(p.t_rec),
        "xi_rec": sig(p.xi_rec),
        "xi_art": sig(p.xi_art),
        "t_total": sig(p.total_transmittance()),
    })
}

fn print_rows(rows: &[(&str, f64)]) {
    for (name, value) in rows {
        println!("  {name:<16} {}", format_sig(*value));
    }
}

pub fn operating_point(
    config: &Path,
    headroom: Option<f64>,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(config)?;
    let op = build_operating_point(&cfg, headroom)?;
    let budget = op.budget().map_err(infeasible)?;
    let p = op.params();
    let code = op.code();

    println!(
        "code {} (rate {}, beta {}, min_snr {})",
        code.label,
        format_sig(code.rate),
        format_sig(code.beta),
        format_sig(rate_match::min_snr(code))
    );
    println!("operating point");
    print_rows(&[
        ("v_mod", p.v_mod),
        ("t_ch", p.t_ch),
        ("t_rec", p.t_rec),
        ("t_total", p.total_transmittance()),
        ("t_total_nominal", op.t_total_nominal()),
        ("xi_ch", p.xi_ch),
        ("xi_rec", p.xi_rec),
        ("xi_art", p.xi_art),
        ("headroom", op.headroom_factor()),
    ]);
    println!("information budget");
    print_rows(&[
        ("snr", budget.snr()),
        ("i_ab", budget.i_ab()),
        ("b", budget.b()),
        ("chi", budget.chi()),
        ("r", budget.r()),
    ]);

    if let Some(path) = output {
        let record = json!({
            "code": code_json(code),
            "link": link_json(p),
            "t_total_nominal": sig(op.t_total_nominal()),
            "headroom_factor": sig(op.headroom_factor()),
            "budget": {
                "snr": sig(budget.snr()),
                "i_ab": sig(budget.i_ab()),
                "b": sig(budget.b()),
                "chi": sig(budget.chi()),
                "r": sig(budget.r()),
            },
        });
        write_json(path, &record)?;
    }
    Ok(())
}

pub fn sweep(
    config: &Path,
    headroom: Option<f64>,
    strategies: &[String],
    output: Option<&Path>,
) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(config)?;
    let sweep_cfg = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [sweep] block".into()))?;
    let strategies = cfg.strategies(strategies)?;
    let op = build_operating_point(&cfg, headroom)?;
    let grid = sweep_cfg.grid(op.params().t_ch);
    let table = sweep_transmittance(&op, &grid, &strategies);

    match output {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_error(path, e))?;
            table
                .write_csv(BufWriter::new(file))
                .map_err(|e| io_error(path, e))
        }
        None => table
            .write_csv(io::stdout().lock())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

pub fn simulate(
    config: &Path,
    headroom: Option<f64>,
    seed: Option<u64>,
    n_symbols: Option<u64>,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(config)?;
    let block = cfg
        .sim
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [sim] block".into()))?;
    let n_symbols = n_symbols.unwrap_or(block.n_symbols);
    let seed = seed.unwrap_or(block.seed);
    if n_symbols == 0 {
        return Err(CliError::Config("n_symbols must be >= 1".into()));
    }

    let params = match cfg.operating_point_source() {
        // An explicit link is simulated as given, with whatever artificial
        // noise pins it (none if it is already below threshold).
        OperatingPointSource::Explicit { t_ch, v_mod } => {
            let l = &cfg.link;
            let p = LinkParams::new(v_mod, t_ch, l.xi_ch, l.t_rec, l.xi_rec, 0.0)
                .map_err(|e| CliError::Config(e.to_string()))?;
            p.with_xi_art(required_artificial_noise(&p, &cfg.code()?).max(0.0))
        }
        _ => *build_operating_point(&cfg, headroom)?.params(),
    };

    let stats = run_simulation(&SimConfig { params, n_symbols, seed })
        .map_err(|e| CliError::Config(e.to_string()))?;
    let snr = model::snr(&params);
    let mi = mutual_information_ab(snr);
    let rel_dev = if snr > 0.0 {
        (stats.empirical_snr() - snr) / snr
    } else {
        f64::NAN
    };

    println!("monte carlo: {n_symbols} symbols, seed {seed}");
    print_rows(&[
        ("v_mod", params.v_mod),
        ("t_total", params.total_transmittance()),
        ("xi_art", params.xi_art),
        ("snr", snr),
        ("snr_empirical", stats.empirical_snr()),
        ("snr_q", stats.empirical_snr_q),
        ("snr_p", stats.empirical_snr_p),
        ("snr_rel_dev", rel_dev),
        ("i_ab", mi),
        ("i_ab_empirical", stats.empirical_mi),
        ("i_ab_dev", stats.empirical_mi - mi),
    ]);

    if let Some(path) = output {
        let record = json!({
            "n_symbols": n_symbols,
            "seed": seed,
            "link": link_json(&params),
            "analytic": { "snr": sig(snr), "i_ab": sig(mi) },
            "empirical": {
                "snr": sig(stats.empirical_snr()),
                "snr_q": sig(stats.empirical_snr_q),
                "snr_p": sig(stats.empirical_snr_p),
                "corr_q": sig(stats.empirical_corr_q),
                "corr_p": sig(stats.empirical_corr_p),
                "i_ab": sig(stats.empirical_mi),
            },
        });
        write_json(path, &record)?;
    }
    Ok(())
}

pub fn codes(config: Option<&Path>) -> Result<(), CliError> {
    let mut codes = CodeSpec::presets();
    if let Some(path) = config {
        let code = ScenarioConfig::load(path)?.code()?;
        if !codes.contains(&code) {
            codes.push(code);
        }
    }
    println!("{:<16} {:>14} {:>14} {:>14}", "label", "rate", "beta", "min_snr");
    for c in &codes {
        println!(
            "{:<16} {:>14} {:>14} {:>14}",
            c.label,
            format_sig(c.rate),
            format_sig(c.beta),
            format_sig(rate_match::min_snr(c))
        );
    }
    Ok(())
}
