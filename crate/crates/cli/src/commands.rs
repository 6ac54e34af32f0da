//! The `run`, `validate` and `psd` subcommands.

use std::path::Path;
use std::time::Instant;

use colornoise::correlations::h_function;
use colornoise::dynamics::{sample_fixed_rates, series_from_model, CoefficientModel, EnvironmentRates, Topology};
use colornoise::mc::{compare, estimate_correlations, McConfig};
use colornoise::spectra::{collection_periodogram, collection_spectrum, fitted_slope, log_space, synthesized_spectrum};
use serde_json::json;

use crate::config::{self, RawConfig, Settings, Sources, DEFAULT_POINTS, DEFAULT_VALIDATE_POINTS};
use crate::output::{self, Manifest, SampledRates};
use crate::{CliError, CommonArgs};

/// Fraction of time points that must agree within 3 standard errors.
const PASS_FRACTION: f64 = 0.99;
const IDENTITY_TOL: f64 = 1e-10;

struct Loaded {
    settings: Settings,
    replay: Option<Manifest>,
}

fn load(args: &CommonArgs, command: &str, default_points: usize) -> Result<Loaded, CliError> {
    let (mut raw, mut sources, replay) = if let Some(path) = &args.manifest {
        let m = output::read_manifest(path)?;
        if m.command != command {
            return Err(CliError::Config(format!(
                "{}: manifest records `{}`, not `{command}`",
                path.display(),
                m.command
            )));
        }
        (m.config.clone(), Sources::default(), Some(m))
    } else if let Some(path) = &args.config {
        let (raw, sources) = config::read_file(path)?;
        (raw, sources, None)
    } else {
        (RawConfig::default(), Sources::default(), None)
    };
    let s = &mut sources;
    config::set(&mut raw.scenario, args.scenario.clone(), "scenario", s);
    config::set(&mut raw.topology, args.topology.clone(), "topology", s);
    config::set(&mut raw.alpha, args.alpha, "alpha", s);
    config::set(&mut raw.gamma_min, args.gamma_min, "gamma_min", s);
    config::set(&mut raw.gamma_max, args.gamma_max, "gamma_max", s);
    config::set(&mut raw.nf, args.nf, "nf", s);
    config::set(&mut raw.t_max, args.t_max, "t_max", s);
    config::set(&mut raw.points, args.points, "points", s);
    config::set(&mut raw.mc, args.mc.then_some(true), "mc", s);
    config::set(&mut raw.trajectories, args.trajectories, "trajectories", s);
    config::set(&mut raw.seed, args.seed, "seed", s);
    config::set(&mut raw.threads, args.threads, "threads", s);
    config::set(&mut raw.freq_points, args.freq_points, "freq_points", s);
    config::set(&mut raw.periodogram, args.no_periodogram.then_some(false), "periodogram", s);
    if (args.t_max.is_some() || args.points.is_some()) && raw.times.is_some() {
        raw.times = None;
    }
    let settings = config::resolve(&raw, &sources, default_points)?;
    if let Some(n) = settings.threads {
        // Fails only if a pool already exists, which is harmless here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(Loaded { settings, replay })
}

fn sampled(rates: Option<&EnvironmentRates>) -> Option<SampledRates> {
    rates.map(|r| SampledRates {
        qubit_a: r.qubit_a.clone(),
        qubit_b: r.qubit_b.clone(),
    })
}

fn check_replay(replay: &Option<Manifest>, rates: &Option<SampledRates>) -> Result<(), CliError> {
    match replay {
        Some(m) if &m.rates != rates => Err(CliError::Numerical(
            "replayed rates differ from the ones recorded in the manifest".into(),
        )),
        _ => Ok(()),
    }
}

fn finish(
    out: &Path,
    command: &str,
    loaded: &Loaded,
    rates: Option<SampledRates>,
    start: Instant,
    outputs: &[&str],
    results: serde_json::Value,
) -> Result<(), CliError> {
    let manifest = Manifest {
        version: colornoise::VERSION.to_string(),
        command: command.to_string(),
        seed: loaded.settings.scenario.seed,
        config: loaded.settings.echo.clone(),
        rates,
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
        results,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    output::write(out, "manifest.json", &(text + "\n"))
}

fn mc_config(settings: &Settings) -> McConfig {
    let mut c = McConfig::new(settings.scenario.clone(), settings.trajectories);
    c.threads = settings.threads;
    c
}

pub fn run(args: &CommonArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let loaded = load(args, "run", DEFAULT_POINTS)?;
    let s = &loaded.settings;
    let model = CoefficientModel::new(&s.scenario)?;
    let series = series_from_model(&s.scenario, &model)?;
    let rates = sampled(series.rates.as_ref());
    check_replay(&loaded.replay, &rates)?;

    let times = s.scenario.time_grid.times();
    let negativity: Vec<f64> = series.points.iter().map(|p| p.negativity).collect();
    let discord: Vec<f64> = series.points.iter().map(|p| p.discord).collect();
    let text = if s.mc {
        let mc = estimate_correlations(&mc_config(s))?;
        let mean: Vec<f64> = mc.points.iter().map(|p| p.coeff).collect();
        let stderr: Vec<f64> = mc.points.iter().map(|p| p.coeff_stderr).collect();
        output::csv(
            &["t", "coeff", "negativity", "discord", "mc_coeff", "mc_stderr"],
            &[times, &series.coefficients, &negativity, &discord, &mean, &stderr],
        )?
    } else {
        output::csv(
            &["t", "coeff", "negativity", "discord"],
            &[times, &series.coefficients, &negativity, &discord],
        )?
    };
    output::write(&args.out, "series.csv", &text)?;
    finish(&args.out, "run", &loaded, rates, start, &["series.csv"], serde_json::Value::Null)?;
    println!("wrote {} points to {}", times.len(), args.out.join("series.csv").display());
    Ok(())
}

pub fn validate(args: &CommonArgs, mismatch_m: Option<f64>) -> Result<(), CliError> {
    let start = Instant::now();
    let loaded = load(args, "validate", DEFAULT_VALIDATE_POINTS)?;
    let s = &loaded.settings;
    let mut model = CoefficientModel::new(&s.scenario)?;
    if let Some(m) = mismatch_m {
        if !(m.is_finite() && m > 0.0) {
            return Err(CliError::Config(format!("--mismatch-m: {m} must be positive")));
        }
        model = model.with_multiplier(m);
    }
    let analytic = series_from_model(&s.scenario, &model)?;
    let rates = sampled(analytic.rates.as_ref());
    check_replay(&loaded.replay, &rates)?;
    let mc = estimate_correlations(&mc_config(s))?;
    let checks = compare(&analytic, &mc, 3.0)?;

    let passing = checks.iter().filter(|c| c.passed()).count();
    let fraction = passing as f64 / checks.len() as f64;
    let max_z = checks.iter().map(|c| c.z.abs()).fold(0.0, f64::max);
    let agreement_ok = fraction >= PASS_FRACTION;

    let mut identity = 0.0f64;
    for p in &analytic.points {
        identity = identity.max((p.discord - h_function(p.negativity)?).abs());
    }
    let identity_ok = identity <= IDENTITY_TOL;
    let mut mc_identity = 0.0f64;
    for p in &mc.points {
        mc_identity = mc_identity.max((p.discord - h_function(p.negativity)?).abs());
    }
    let family_ok = mc.estimates.iter().all(|e| e.stays_in_bell_family());
    let passed = agreement_ok && identity_ok && family_ok;

    let report = json!({
        "passed": passed,
        "mismatch_m": mismatch_m,
        "trajectories": s.trajectories,
        "checks": {
            "monte_carlo_agreement": {
                "passed": agreement_ok,
                "k_sigma": 3.0,
                "required_fraction": PASS_FRACTION,
                "points": checks.len(),
                "passing": passing,
                "fraction": fraction,
                "max_abs_z": max_z,
            },
            "discord_identity": { "passed": identity_ok, "tolerance": IDENTITY_TOL, "max_deviation": identity },
            "bell_family": { "passed": family_ok },
            "monte_carlo_identity_deviation": mc_identity,
        },
        "points": checks.iter().map(|c| json!({
            "t": c.time,
            "analytic": c.analytic,
            "mc": c.estimate,
            "stderr": c.stderr,
            "z": c.z,
            "passed": c.passed(),
        })).collect::<Vec<_>>(),
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    output::write(&args.out, "validation.json", &(text + "\n"))?;
    let summary = json!({ "passed": passed, "fraction": fraction, "max_abs_z": max_z });
    finish(&args.out, "validate", &loaded, rates, start, &["validation.json"], summary)?;
    println!(
        "{}: {passing}/{} points within 3 sigma, max |z| = {max_z:.2}",
        if passed { "PASS" } else { "FAIL" },
        checks.len()
    );
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("report in {}", args.out.join("validation.json").display())))
    }
}

pub fn psd(args: &CommonArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let loaded = load(args, "psd", DEFAULT_POINTS)?;
    let s = &loaded.settings;
    let dist = &s.scenario.dist;
    let band = dist.fit_band();
    if band.0 >= band.1 {
        return Err(CliError::Config(format!(
            "gamma range [{}, {}] is too narrow for a fit band",
            dist.gamma_min(),
            dist.gamma_max()
        )));
    }
    let explicit = s.scenario.fixed_rates.clone();
    let rates = explicit
        .clone()
        .unwrap_or_else(|| sample_fixed_rates(dist, s.scenario.n_fluctuators, Topology::Common, s.scenario.seed).qubit_a);
    let recorded = Some(SampledRates {
        qubit_a: rates.clone(),
        qubit_b: None,
    });
    check_replay(&loaded.replay, &recorded)?;

    let freqs = log_space(band.0, band.1, s.freq_points);
    let n = rates.len() as f64;
    let collection = freqs
        .iter()
        .map(|&f| Ok(collection_spectrum(&rates, f)? / n))
        .collect::<Result<Vec<f64>, CliError>>()?;
    let analytic = match explicit {
        Some(_) => collection.clone(),
        None => freqs
            .iter()
            .map(|&f| Ok(synthesized_spectrum(dist, f)?))
            .collect::<Result<Vec<f64>, CliError>>()?,
    };
    let mut header = vec!["f", "s_analytic", "s_collection"];
    let mut slopes = serde_json::Map::new();
    slopes.insert("analytic".into(), json!(fitted_slope(&freqs, &analytic, band)));
    slopes.insert("collection".into(), json!(fitted_slope(&freqs, &collection, band)));
    let periodogram = if s.periodogram {
        header.push("s_periodogram");
        let p = collection_periodogram(&rates, &freqs, s.scenario.seed)?;
        slopes.insert("periodogram".into(), json!(fitted_slope(&freqs, &p, band)));
        Some(p)
    } else {
        None
    };
    let mut columns: Vec<&[f64]> = vec![&freqs, &analytic, &collection];
    if let Some(p) = &periodogram {
        columns.push(p);
    }
    let text = output::csv(&header, &columns)?;
    output::write(&args.out, "spectrum.csv", &text)?;
    let results = json!({ "band": [band.0, band.1], "slope": slopes });
    println!("band [{:.4e}, {:.4e}], slopes {}", band.0, band.1, serde_json::Value::Object(slopes));
    finish(&args.out, "psd", &loaded, recorded, start, &["spectrum.csv"], results)
}
