use rayon::prelude::*;
use serde_json::{json, Map, Value};

use statmean_core::covariance::{covariance_asymptote_falpha, covariance_exact_falpha, covariance_sequence_with};
use statmean_core::deterministic::{chebyshev_min_max, decay_rate_from_variances};
use statmean_core::efficiency::{
    beran_kunsch_expansion, efficiency_finite, general_class_asymptote, lse_asymptotic_efficiency,
    lse_efficiency_exact_falpha, overestimation_efficiency, short_memory_variance_limit, underestimation_limit,
};
use statmean_core::estimators::{adenstedt_weights, lse_weights, parabolic_weights, pseudo_best_weights, variance_under};
use statmean_core::opuc::{christoffel_curve, christoffel_limit_in_disk, prediction_error, szego_function, szego_recursion};
use statmean_core::simulate::{monte_carlo_variance, sample_paths};
use statmean_core::toeplitz::{blue_for, blue_for_auto};
use statmean_core::{
    ArcRegion, BlueSolution, EstimatorWeights, Precision, PrecisionMode, SpectralMeasure, SpectralModel,
};

use crate::args::*;
use crate::error::{invalid, usage, CliError};
use crate::output::{to_value, Report, Table};
use crate::parse::{parse_angle, parse_arcs, parse_complex, parse_grid};

/// Model files read during a run, recorded in the manifest.
#[derive(Default)]
pub struct Inputs(pub Map<String, Value>);

impl Inputs {
    fn measure(&mut self, flag: &str, source: &str) -> Result<SpectralMeasure, CliError> {
        let text = if source.trim_start().starts_with('{') {
            source.to_string()
        } else {
            std::fs::read_to_string(source).map_err(|e| invalid(format!("cannot read --{flag} {source}: {e}")))?
        };
        let m = SpectralMeasure::from_json(&text)?;
        self.0.insert(flag.to_string(), to_value(&m)?);
        Ok(m)
    }

    /// A density without atoms, for laws stated for absolutely continuous spectra.
    fn density(&mut self, flag: &str, source: &str) -> Result<SpectralModel, CliError> {
        let m = self.measure(flag, source)?;
        if !m.atoms.is_empty() {
            return Err(invalid(format!("--{flag} must be a density without atoms for this law")));
        }
        Ok(m.density)
    }
}

fn need<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| usage(format!("--{flag} is required here")))
}

fn grid(text: &str) -> Result<Vec<usize>, CliError> {
    parse_grid(text).map_err(usage)
}

fn solve(measure: &SpectralMeasure, n: usize, p: PrecisionArg) -> Result<BlueSolution, CliError> {
    Ok(match p {
        PrecisionArg::Double => blue_for(measure, n, Precision::Double)?,
        PrecisionArg::Dd => blue_for(measure, n, Precision::DoubleDouble)?,
        PrecisionArg::Auto => blue_for_auto(measure, n)?,
    })
}

fn estimator_weights(
    kind: EstimatorKind,
    n: usize,
    alpha: Option<f64>,
    model: Option<&SpectralMeasure>,
    design: Option<&SpectralModel>,
) -> Result<EstimatorWeights, CliError> {
    Ok(match kind {
        EstimatorKind::Lse => lse_weights(n),
        EstimatorKind::Parabolic => parabolic_weights(n)?,
        EstimatorKind::Adenstedt => adenstedt_weights(n, need(&alpha, "alpha")?)?,
        EstimatorKind::Blue => {
            let m = model.ok_or_else(|| usage("the blue estimator needs --model"))?;
            blue_for_auto(m, n)?.weights
        }
        EstimatorKind::PseudoBest => {
            let d = design.ok_or_else(|| usage("the pseudo-best estimator needs --design"))?;
            pseudo_best_weights(d, n)?
        }
    })
}

fn design(inputs: &mut Inputs, opts: &EstimatorOpts) -> Result<Option<SpectralModel>, CliError> {
    opts.design.as_deref().map(|d| inputs.density("design", d)).transpose()
}

pub fn run(cmd: &Command, inputs: &mut Inputs) -> Result<Report, CliError> {
    match cmd {
        Command::Classify(a) => classify(a, inputs),
        Command::Covariance(a) => covariance(a, inputs),
        Command::Blue(a) => blue(a, inputs),
        Command::Weights(a) => weights(a, inputs),
        Command::Variance(a) => variance(a, inputs),
        Command::Christoffel(a) => christoffel(a, inputs),
        Command::Efficiency(a) => efficiency(a, inputs),
        Command::Asymptote(a) => asymptote(a, inputs),
        Command::Chebyshev(a) => chebyshev(a),
        Command::Decay(a) => decay(a, inputs),
        Command::Simulate(a) => simulate(a, inputs),
    }
}

fn classify(a: &ClassifyArgs, inputs: &mut Inputs) -> Result<Report, CliError> {
    let m = inputs.measure("model", &a.model)?;
    let c = m.classify()?;
    Report::single(json!({
        "model": m.density.name(),
        "atoms": m.atoms.len(),
        "determinism": c.determinism,
        "memory": c.memory,
        "origin_exponent": c.origin_exponent,
        "szego_integral": c.szego_integral,
        "geometric_mean": m.density.geometric_mean()?,
        "inverse_integrable": m.density.inverse_integrable(),
    }))
}

fn covariance(a: &CovarianceArgs, inputs: &mut Inputs) -> Result<Report, CliError> {
    let m = inputs.measure("model", &a.model)?;
    let precision = match a.precision {
        PrecisionArg::Double => Precision::Double,
        PrecisionArg::Dd => Precision::DoubleDouble,
        PrecisionArg::Auto => return Err(usage("covariance supports --precision double or dd")),
    };
    let c = covariance_sequence_with(&m, a.n, precision)?;
    let mut t = Table::new(&["k", "r"]);
    for (k, r) in c.values.iter().enumerate() {
        t.push(vec![json!(k), json!(r)]);
    }
    Report::curve(
        json!({ "n": a.n, "values": c.values, "provenance": c.provenance, "precision": c.precision }),
        t,
    )
}

fn weights_table(c: &[f64], column: &str) -> Table {
    let mut t = Table::new(&["k", column]);
    for (k, v) in c.iter().enumerate() {
        t.push(vec![json!(k), json!(v)]);
    }
    t
}

fn blue(a: &BlueArgs, inputs: &mut Inputs) -> Result<Report, CliError> {
    let m = inputs.measure("model", &a.model)?;
    let s = solve(&m, a.n, a.precision)?;
    let table = weights_table(&s.weights.coefficients, "weight");
    Ok(Report::single(json!({
        "n": s.n,
        "variance": s.variance,
        "weights": s.weights.coefficients,
        "precision": s.precision,
        "solver": s.solver,
        "log10_condition_estimate": s.log10_condition_estimate,
    }))?
    .with_table(table))
}

fn weights(a: &WeightsArgs, inputs: &mut Inputs) -> Result<Report, CliError> {
    let model = a.model.as_deref().map(|m| inputs.measure("model", m)).transpose()?;
    let design = a.design.as_deref().map(|d| inputs.density("design", d)).transpose()?;
    let w = estimator_weights(a.estimator, a.n, a.alpha, model.as_ref(), design.as_ref())?;
    let table = weights_table(&w.coefficients, "weight");
    Ok(Report::single(json!({ "n": a.n, "label": w.label, "weights": w.coefficients }))?.with_table(table))
}

fn variance(a: &VarianceArgs, inputs: &mut Inputs) -> Result<Report, CliError> {
    let m = inputs.measure("model", &a.model)?;
    let d = design(inputs, &a.estimator)?;
    let w = estimator_weights(a.estimator.estimator, a.n, a.alpha, Some(&m), d.as_ref())?;
    let v = variance_under(&w, &m)?;
    Report::single(json!({ "n": a.n, "label": w.label, "variance": v }))
}

fn christoffel(a: &ChristoffelArgs, inputs: &mut Inputs) -> Result<Report, CliError> {
    let m = inputs.measure("model", &a.model)?;
    let probe = parse_complex(&a.probe).map_err(usage)?;
    let state = szego_recursion(&m, a.n, &[probe])?;
    let curve = christoffel_curve(&state, probe)?;
    let errors = (0..=a.n).map(|k| prediction_error(&state, k)).collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&["m", "christoffel", "prediction_error"]);
    for (k, (c, e)) in curve.iter().zip(&errors).enumerate() {
        t.push(vec![json!(k), json!(c), json!(e)]);
    }
    Report::curve(
        json!({
            "n": a.n,
            "probe": [probe.re, probe.im],
            "christoffel": curve,
            "prediction_error": errors,
            "verblunsky": state.verblunsky,
        }),
        t,
    )
}

fn efficiency(a: &EfficiencyArgs, inputs: &mut Inputs) -> Result<Report, CliError> {
    if a.finite {
        let m = inputs.measure("model", &need(&a.model, "model")?)?;
        let d = design(inputs, &a.estimator)?;
        let ns = grid(&need(&a.n_grid, "n-grid")?)?;
        let reports = ns
            .par_iter()
            .map(|&n| {
                let w = estimator_weights(a.estimator.estimator, n, a.alpha, Some(&m), d.as_ref())?;
                Ok(efficiency_finite(&w, &m, n)?)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let mut t = Table::new(&["n", "efficiency", "blue_variance", "estimator_variance"]);
        for (r, n) in reports.iter().zip(&ns) {
            t.push(vec![
                json!(n),
                json!(r.value),
                json!(r.numerator_variance),
                json!(r.denominator_variance),
            ]);
        }
        return Report::curve(json!({ "reports": reports }), t);
    }
    let alpha = need(&a.alpha, "alpha")?;
    let law = a.law.ok_or_else(|| usage("--law or --finite is required"))?;
    let r = match law {
        EfficiencyLawArg::Overestimation => overestimation_efficiency(alpha, need(&a.beta, "beta")?)?,
        EfficiencyLawArg::LseAsymptotic => lse_asymptotic_efficiency(alpha)?,
        EfficiencyLawArg::SamarovTaqqu => lse_efficiency_exact_falpha(need(&a.n, "n")?, alpha)?,
        EfficiencyLawArg::BeranKunsch => beran_kunsch_expansion(alpha)?,
    };
    Report::single(r)
}

fn asymptote(a: &AsymptoteArgs, inputs: &mut Inputs) -> Result<Report, CliError> {
    let point = || -> Result<statmean_core::Complex64, CliError> {
        parse_complex(&need(&a.xi, "xi")?).map_err(usage)
    };
    let result = match a.law {
        AsymptoteLaw::ShortMemory => {
            let g = inputs.density("model", &need(&a.model, "model")?)?;
            json!({ "law": "short-memory", "value": short_memory_variance_limit(&g)? })
        }
        AsymptoteLaw::GeneralClass => json!({
            "law": "general-class",
            "value": general_class_asymptote(need(&a.alpha, "alpha")?, need(&a.g0, "g0")?)?,
        }),
        AsymptoteLaw::Underestimation => {
            let alpha = need(&a.alpha, "alpha")?;
            if !(alpha >= 0.0 && alpha.fract() == 0.0 && alpha <= 64.0) {
                return Err(invalid("the underestimation law needs a nonnegative integer --alpha"));
            }
            let g = inputs.density("model", &need(&a.model, "model")?)?;
            json!({ "law": "underestimation", "value": underestimation_limit(alpha as u32, &g)? })
        }
        AsymptoteLaw::Covariance => {
            let (alpha, k) = (need(&a.alpha, "alpha")?, need(&a.k, "k")?);
            let asym = covariance_asymptote_falpha(alpha, k)?;
            json!({
                "law": "covariance",
                "k": k,
                "value": asym.value,
                "degenerate": asym.degenerate,
                "exact": covariance_exact_falpha(alpha, k)?,
            })
        }
        AsymptoteLaw::DiskLimit => {
            let g = inputs.density("model", &need(&a.model, "model")?)?;
            let xi = point()?;
            json!({ "law": "disk-limit", "xi": [xi.re, xi.im], "value": christoffel_limit_in_disk(&g, xi)? })
        }
        AsymptoteLaw::SzegoFunction => {
            let g = inputs.density("model", &need(&a.model, "model")?)?;
            let e = szego_function(&g, point()?)?;
            let mut v = to_value(&e)?;
            v["law"] = json!("szego-function");
            v
        }
    };
    Report::single(result)
}

fn chebyshev(a: &ChebyshevArgs) -> Result<Report, CliError> {
    let region = match (&a.arcs, &a.complement_arc) {
        (Some(arcs), None) => ArcRegion::new(&parse_arcs(arcs).map_err(usage)?)?,
        (None, Some(alpha)) => ArcRegion::complement_arc(parse_angle(alpha).map_err(usage)?)?,
        (None, None) => return Err(usage("--arcs or --complement-arc is required")),
        (Some(_), Some(_)) => return Err(usage("--arcs and --complement-arc are exclusive")),
    };
    let ns = grid(&a.n_grid)?;
    let solutions = ns
        .par_iter()
        .map(|&n| chebyshev_min_max(&region, n, a.grid_points))
        .collect::<Result<Vec<_>, _>>()?;
    let taus: Vec<f64> = solutions.iter().map(|s| s.constant_estimate).collect();
    let top = &taus[taus.len() / 2..];
    let oscillation = taus.iter().cloned().fold(f64::MIN, f64::max) - top.iter().cloned().fold(f64::MAX, f64::min);
    let mut t = Table::new(&["n", "deviation", "tau", "iterations", "converged", "power_candidate", "precision"]);
    for s in &solutions {
        t.push(vec![
            json!(s.order),
            json!(s.deviation),
            json!(s.constant_estimate),
            json!(s.iterations),
            json!(s.converged),
            json!(s.used_power_candidate),
            to_value(s.precision)?,
        ]);
    }
    Ok(Report::single(json!({
        "region": region,
        "estimate": taus.last(),
        "oscillation": oscillation,
        "all_converged": solutions.iter().all(|s| s.converged),
        "solutions": solutions,
    }))?
    .with_table(t))
}

fn decay(a: &DecayArgs, inputs: &mut Inputs) -> Result<Report, CliError> {
    let m = inputs.measure("model", &a.model)?;
    let mode = match a.precision {
        PrecisionArg::Double => PrecisionMode::Double,
        PrecisionArg::Dd => PrecisionMode::DoubleDouble,
        PrecisionArg::Auto => PrecisionMode::Auto,
    };
    let fit = decay_rate_from_variances(&m, &grid(&a.n_grid)?, mode)?;
    let mut t = Table::new(&["n", "variance", "precision", "step_ratio"]);
    for (i, (&n, &v)) in fit.n_grid.iter().zip(&fit.variances).enumerate() {
        let ratio = if i == 0 { Value::Null } else { json!(fit.step_ratios[i - 1]) };
        t.push(vec![json!(n), json!(v), to_value(fit.precisions[i])?, ratio]);
    }
    Ok(Report::single(&fit)?.with_table(t))
}

fn simulate(a: &SimulateArgs, inputs: &mut Inputs) -> Result<Report, CliError> {
    let m = inputs.measure("model", &a.model)?;
    if a.paths {
        let batch = sample_paths(&m, a.n + 1, a.reps, a.seed)?;
        let mut columns = vec!["t".to_string()];
        columns.extend((0..batch.paths.len()).map(|i| format!("path_{i}")));
        let mut t = Table { columns, rows: vec![] };
        for k in 0..=a.n {
            let mut row = vec![json!(k)];
            row.extend(batch.paths.iter().map(|p| json!(p[k])));
            t.push(row);
        }
        let mut r = Report::single(&batch)?.with_table(t);
        r.seeds = vec![a.seed];
        return Ok(r);
    }
    let d = design(inputs, &a.estimator)?;
    let w = estimator_weights(a.estimator.estimator, a.n, a.alpha, Some(&m), d.as_ref())?;
    let mc = monte_carlo_variance(&w, &m, a.reps, a.seed)?;
    let exact = variance_under(&w, &m)?;
    let mut r = Report::single(json!({
        "n": a.n,
        "label": w.label,
        "estimate": mc.estimate,
        "standard_error": mc.standard_error,
        "analytic_variance": exact,
        "z_score": (mc.estimate - exact) / mc.standard_error,
        "replicates": mc.replicates,
        "generator": mc.generator,
    }))?;
    r.seeds = vec![a.seed];
    Ok(r)
}
