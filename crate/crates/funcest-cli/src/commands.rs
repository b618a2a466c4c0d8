//! Subcommand implementations. Every command resolves its effective
//! configuration (file plus flag overrides), runs the experiment through the
//! library, and emits a provenance-stamped table.

use std::path::{Path, PathBuf};

use funcest::classify::{evaluate_accuracy, fit_rlda, Label, RldaMode};
use funcest::covariance::MeanMode;
use funcest::functional::{
    estimate_functional, theoretical_rate_j, DantzigConfig, EstimateStatus, RateSpec, TailRegime,
};
use funcest::numerics::sup_norm;
use funcest::portfolio::{backtest_information_ratio, AllocationMethod, BacktestConfig};
use funcest::prediction::{
    relative_risk_experiment, sfso_default_lambda, PredictorSpec, ScalarSeriesModel,
};
use funcest::process::{build_model_truncated, simulate, ArModel, SampleMatrix};
use funcest::experiments::{
    run_block_design_classification, run_tuning_cell, synthetic_market, BlockDesignConfig,
    SyntheticMarketConfig, TuningCellConfig, TuningProcedure,
};
use funcest::tuning::{tune_lambda_datasplit, LambdaGrid};

use crate::configs::*;
use crate::input;
use crate::table::{emit_table, fmt_g6, Cell, OutputFormat, Provenance, Table};
use crate::CliError;

pub struct CommonArgs {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

pub fn cmd_simulate(config_path: Option<&Path>, common: &CommonArgs) -> Result<(), CliError> {
    let mut cfg: SimulateConfig = load_config(config_path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if cfg.p == 0 || cfg.n == 0 {
        return Err(CliError::Validation("p and n must be positive".into()));
    }
    if !(cfg.beta > 0.5) {
        return Err(CliError::Validation(format!("beta: must exceed 0.5, got {}", cfg.beta)));
    }
    if !(0.0..1.0).contains(&cfg.sparsify_frac) {
        return Err(CliError::Validation(format!(
            "sparsify_frac: must lie in [0, 1), got {}",
            cfg.sparsify_frac
        )));
    }
    let innovation = parse_innovation(&cfg.innovation)?;
    let model = build_model_truncated(
        cfg.p,
        cfg.beta,
        cfg.sparsify_frac,
        cfg.truncation,
        innovation,
        cfg.seed,
    );
    if let Some(model_out) = &cfg.model_out {
        let text = serde_json::to_string(&model)
            .map_err(|e| CliError::Numerical(format!("model serialization failed: {e}")))?;
        std::fs::write(model_out, text).map_err(|e| {
            CliError::Validation(format!("cannot write {}: {e}", model_out.display()))
        })?;
    }
    let sample = simulate(&model, cfg.n, cfg.seed.wrapping_add(1));

    let columns: Vec<String> = (1..=cfg.p).map(|j| format!("x{j}")).collect();
    let column_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let mut table = Table::new(&column_refs);
    for i in 0..sample.n {
        table.push(sample.observation(i).iter().map(|&v| Cell::Float(v)).collect());
    }
    let provenance = Provenance::new(cfg.seed, canonical_json(&cfg));
    emit_table(&table, common.format, common.out.as_deref(), &provenance)
}

pub fn cmd_estimate(
    config_path: Option<&Path>,
    s_csv: Option<PathBuf>,
    b_csv: Option<PathBuf>,
    lambda: Option<f64>,
    common: &CommonArgs,
) -> Result<(), CliError> {
    let mut cfg: EstimateConfig = load_config(config_path)?;
    if s_csv.is_some() {
        cfg.s_csv = s_csv;
    }
    if b_csv.is_some() {
        cfg.b_csv = b_csv;
    }
    if let Some(lambda) = lambda {
        cfg.lambda = lambda;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if cfg.lambda < 0.0 {
        return Err(CliError::Validation(format!("lambda: must be >= 0, got {}", cfg.lambda)));
    }
    let s_path = cfg
        .s_csv
        .clone()
        .ok_or_else(|| CliError::Validation("s_csv: a covariance CSV is required".into()))?;
    let b_path = cfg
        .b_csv
        .clone()
        .ok_or_else(|| CliError::Validation("b_csv: a target CSV is required".into()))?;
    let s = input::read_matrix(&s_path)?;
    let b = input::read_vector(&b_path)?;
    if !s.is_square() || s.rows() != b.len() {
        return Err(CliError::Validation(format!(
            "s_csv/b_csv: dimension mismatch ({}x{} vs {})",
            s.rows(),
            s.cols(),
            b.len()
        )));
    }

    let est = estimate_functional(
        &s,
        &b,
        &DantzigConfig { lambda: cfg.lambda, lp_tol: cfg.lp_tol, lp_max_iter: cfg.lp_max_iter },
    );
    match est.status {
        EstimateStatus::Optimal => {}
        EstimateStatus::Infeasible => {
            return Err(CliError::Numerical(format!(
                "lambda: band width {} is below the attainable residual floor",
                cfg.lambda
            )))
        }
        EstimateStatus::SolverLimit => {
            return Err(CliError::Numerical(format!(
                "lp_max_iter: solver stopped after {} iterations",
                est.lp_iterations
            )))
        }
    }
    eprintln!(
        "status=optimal l1_norm={} iterations={}",
        fmt_g6(est.l1_norm),
        est.lp_iterations
    );

    let mut table = Table::new(&["j", "theta_hat"]);
    for (j, &v) in est.theta_hat.iter().enumerate() {
        table.push(vec![(j + 1).into(), v.into()]);
    }
    let provenance = Provenance::new(cfg.seed, canonical_json(&cfg));
    emit_table(&table, common.format, common.out.as_deref(), &provenance)
}

pub fn cmd_tune(config_path: Option<&Path>, common: &CommonArgs) -> Result<(), CliError> {
    let mut cfg: TuneConfig = load_config(config_path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if cfg.replicates == 0 {
        return Err(CliError::Validation("replicates: must be positive".into()));
    }
    let innovation = parse_innovation(&cfg.innovation)?;
    let procedures: Vec<TuningProcedure> = cfg
        .procedures
        .iter()
        .map(|name| match name.as_str() {
            "oracle" => Ok(TuningProcedure::Oracle),
            "block" => Ok(TuningProcedure::Block),
            other => Err(CliError::Validation(format!(
                "procedures: unknown value {other:?} (expected oracle | block)"
            ))),
        })
        .collect::<Result<_, _>>()?;
    if procedures.is_empty() {
        return Err(CliError::Validation("procedures: at least one required".into()));
    }

    let cell = TuningCellConfig {
        p: cfg.p,
        n: cfg.n,
        beta: cfg.beta,
        innovation,
        coeff_sparsify: cfg.sparsify_frac,
        theta_zero_frac: cfg.theta_zero_frac,
        truncation: cfg.truncation,
        replicates: cfg.replicates,
        grid_points: cfg.grid_points,
        grid_lo_frac: cfg.grid_lo_frac,
        grid_hi_frac: cfg.grid_hi_frac,
    };
    let result = run_tuning_cell(&cell, &procedures, cfg.seed);

    if let Some(curves_out) = &cfg.curves_out {
        let mut curve_table = Table::new(&["procedure", "lambda", "loss"]);
        for (procedure, validation) in
            funcest::experiments::tuning_replicate_curves(&cell, cfg.seed, 0, &procedures)
        {
            for (lambda, loss) in validation.curve() {
                curve_table.push(vec![procedure.name().into(), lambda.into(), loss.into()]);
            }
        }
        let provenance = Provenance::new(cfg.seed, canonical_json(&cfg));
        emit_table(&curve_table, common.format, Some(curves_out.as_path()), &provenance)?;
    }

    let mut table = Table::new(&["procedure", "replicate", "lambda_star", "loss_star"]);
    for row in &result.rows {
        table.push(vec![
            row.procedure.name().into(),
            row.replicate.into(),
            row.lambda_star.into(),
            row.loss_star.into(),
        ]);
    }
    for &procedure in &procedures {
        let stars = result.lambda_stars(procedure);
        eprintln!(
            "{}: mean lambda* = {} sd = {} over {} replicates ({} failures)",
            procedure.name(),
            fmt_g6(mean(&stars)),
            fmt_g6(sample_sd(&stars)),
            stars.len(),
            result.failures,
        );
    }
    let provenance = Provenance::new(cfg.seed, canonical_json(&cfg));
    emit_table(&table, common.format, common.out.as_deref(), &provenance)
}

fn resolve_model(choice: &ModelChoice) -> Result<ArModel, CliError> {
    match choice {
        ModelChoice::Named(name) => match name.as_str() {
            "ar1" => Ok(ArModel::new(vec![-0.5], 1.0)),
            "ar14" => {
                let mut coeffs = vec![0.0; 14];
                coeffs[0] = -0.3;
                coeffs[2] = 0.7;
                coeffs[13] = -0.2;
                Ok(ArModel::new(coeffs, 1.0))
            }
            other => Err(CliError::Validation(format!(
                "model: unknown name {other:?} (expected ar1 | ar14 or a custom object)"
            ))),
        },
        ModelChoice::Custom { coefficients, noise_sd } => {
            if *noise_sd <= 0.0 {
                return Err(CliError::Validation("model.noise_sd: must be positive".into()));
            }
            Ok(ArModel::new(coefficients.clone(), *noise_sd))
        }
    }
}

pub fn cmd_predict(config_path: Option<&Path>, common: &CommonArgs) -> Result<(), CliError> {
    let mut cfg: PredictConfig = load_config(config_path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if cfg.replicates == 0 || cfg.n < 20 {
        return Err(CliError::Validation("replicates must be positive and n >= 20".into()));
    }
    let lambda = cfg.lambda.unwrap_or_else(|| sfso_default_lambda(cfg.n));
    let methods: Vec<PredictorSpec> = cfg
        .methods
        .iter()
        .map(|name| match name.as_str() {
            "sfso" => Ok(PredictorSpec::Sfso { lambda }),
            "fso" => Ok(PredictorSpec::Fso),
            "ar_aic" => Ok(PredictorSpec::ArAic { max_order: cfg.max_order }),
            other => Err(CliError::Validation(format!(
                "methods: unknown value {other:?} (expected sfso | fso | ar_aic)"
            ))),
        })
        .collect::<Result<_, _>>()?;
    if methods.is_empty() {
        return Err(CliError::Validation("methods: at least one required".into()));
    }
    let model = ScalarSeriesModel::Ar(resolve_model(&cfg.model)?);

    let reports = relative_risk_experiment(&model, cfg.n, &methods, cfg.replicates, cfg.seed)
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    let mut table =
        Table::new(&["method", "n", "mean_relative_risk", "std_error", "failures"]);
    for r in &reports {
        table.push(vec![
            r.method.name().into(),
            r.n.into(),
            r.relative_risk.into(),
            r.std_error.into(),
            r.failures.into(),
        ]);
        eprintln!(
            "{}: mean relative risk {} (se {}, {} failures, oracle risk {})",
            r.method.name(),
            fmt_g6(r.relative_risk),
            fmt_g6(r.std_error),
            r.failures,
            fmt_g6(r.oracle_risk),
        );
    }
    let provenance = Provenance::new(cfg.seed, canonical_json(&cfg));
    emit_table(&table, common.format, common.out.as_deref(), &provenance)
}

pub fn cmd_portfolio(config_path: Option<&Path>, common: &CommonArgs) -> Result<(), CliError> {
    let mut cfg: PortfolioConfig = load_config(config_path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let methods: Vec<AllocationMethod> = cfg
        .methods
        .iter()
        .map(|name| match name.as_str() {
            "functional" => Ok(AllocationMethod::Functional),
            "ridge" => Ok(AllocationMethod::Ridge),
            other => Err(CliError::Validation(format!(
                "methods: unknown value {other:?} (expected functional | ridge)"
            ))),
        })
        .collect::<Result<_, _>>()?;
    if methods.is_empty() {
        return Err(CliError::Validation("methods: at least one required".into()));
    }

    let returns = match &cfg.source {
        ReturnsSource::Synthetic { p, n_days, priced_assets } => {
            if *p == 0 || *n_days == 0 || *priced_assets == 0 || priced_assets > p {
                return Err(CliError::Validation(
                    "source: synthetic market needs p >= priced_assets >= 1 and n_days >= 1"
                        .into(),
                ));
            }
            synthetic_market(&SyntheticMarketConfig::factor_market(*p, *n_days, *priced_assets), cfg.seed)
                .returns
        }
        ReturnsSource::Csv { path } => input::read_returns(path)?.1,
    };

    let backtest = BacktestConfig {
        window: cfg.window,
        hold: cfg.hold,
        k_periods: cfg.k_periods,
        n_train: cfg.n_train,
        n_test: cfg.n_test,
        target_return: cfg.target_return,
        functional_grid: BacktestConfig::even_grid(cfg.functional_grid_max),
        ridge_grid: BacktestConfig::even_grid(cfg.ridge_grid_max),
    };

    let mut table =
        Table::new(&["window_start", "method", "lambda", "mean_return", "risk", "ir"]);
    let mut summaries = Vec::new();
    for &method in &methods {
        let report = backtest_information_ratio(&returns, &backtest, method)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        for w in &report.windows {
            table.push(vec![
                w.start.into(),
                method.name().into(),
                report.lambda_selected.into(),
                w.realized_return.into(),
                w.realized_risk.into(),
                report.information_ratio.into(),
            ]);
        }
        eprintln!(
            "{}: lambda* = {} IR = {} mean return = {} mean risk = {} ({} windows, {} skipped)",
            method.name(),
            fmt_g6(report.lambda_selected),
            fmt_g6(report.information_ratio),
            fmt_g6(report.mean_return),
            fmt_g6(report.mean_risk),
            report.windows.len(),
            report.skipped_windows,
        );
        summaries.push(serde_json::json!({
            "method": method.name(),
            "lambda": report.lambda_selected,
            "information_ratio": report.information_ratio,
            "mean_return": report.mean_return,
            "mean_risk": report.mean_risk,
            "windows": report.windows.len(),
            "skipped_windows": report.skipped_windows,
        }));
    }

    let provenance = Provenance::new(cfg.seed, canonical_json(&cfg));
    let summary = serde_json::json!({
        "seed": provenance.seed,
        "config_hash": provenance.config_hash(),
        "methods": summaries,
    });
    match &common.out {
        Some(out) => {
            let summary_path = out.with_extension("summary.json");
            std::fs::write(&summary_path, serde_json::to_string_pretty(&summary).unwrap())
                .map_err(|e| {
                    CliError::Validation(format!(
                        "cannot write {}: {e}",
                        summary_path.display()
                    ))
                })?;
        }
        None => println!("{}", serde_json::to_string_pretty(&summary).unwrap()),
    }
    emit_table(&table, common.format, common.out.as_deref(), &provenance)
}

pub fn cmd_classify(config_path: Option<&Path>, common: &CommonArgs) -> Result<(), CliError> {
    let mut cfg: ClassifyConfig = load_config(config_path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let mut table = Table::new(&["replicate", "mode", "lambda", "accuracy"]);

    match &cfg.source {
        ClassifySource::Synthetic {
            p,
            block_len,
            train_blocks_per_class,
            test_blocks_per_class,
            shift_support,
            shift_magnitude,
            beta,
            innovation,
        } => {
            if cfg.replicates == 0 {
                return Err(CliError::Validation("replicates: must be positive".into()));
            }
            let block_cfg = BlockDesignConfig {
                p: *p,
                block_len: *block_len,
                train_blocks_per_class: *train_blocks_per_class,
                test_blocks_per_class: *test_blocks_per_class,
                shift_support: *shift_support,
                shift_magnitude: *shift_magnitude,
                beta: *beta,
                innovation: parse_innovation(innovation)?,
                truncation: 32,
                coeff_sparsify: 0.8,
                standardize: cfg.standardize,
                grid_points: 12,
            };
            let mut func_acc = Vec::new();
            let mut gnb_acc = Vec::new();
            for rep in 0..cfg.replicates {
                let cmp = run_block_design_classification(
                    &block_cfg,
                    funcest::process::derive_seed(cfg.seed, rep as u64),
                )
                .map_err(|e| CliError::Numerical(e.to_string()))?;
                table.push(vec![
                    rep.into(),
                    "functional".into(),
                    cmp.lambda.into(),
                    cmp.functional.accuracy.into(),
                ]);
                table.push(vec![
                    rep.into(),
                    "gnb".into(),
                    Cell::Float(f64::NAN),
                    cmp.gnb.accuracy.into(),
                ]);
                func_acc.push(cmp.functional.accuracy);
                gnb_acc.push(cmp.gnb.accuracy);
            }
            eprintln!(
                "functional: mean accuracy {} | gnb: mean accuracy {} ({} replicates)",
                fmt_g6(mean(&func_acc)),
                fmt_g6(mean(&gnb_acc)),
                cfg.replicates,
            );
        }
        ClassifySource::Csv { train, test, window, lambda } => {
            let (train_labels, train_data) = input::read_labeled(train)?;
            let (test_labels, test_data) = input::read_labeled(test)?;
            if *window == 0 || test_data.n % window != 0 {
                return Err(CliError::Validation(format!(
                    "window: {} does not divide the {} test rows",
                    window, test_data.n
                )));
            }
            let split = |label: Label| -> SampleMatrix {
                let rows: Vec<Vec<f64>> = (0..train_data.n)
                    .filter(|&i| train_labels[i] == label)
                    .map(|i| train_data.data.row(i).to_vec())
                    .collect();
                SampleMatrix::new(funcest::numerics::DenseMatrix::from_rows(&rows))
            };
            let mut train_p = split(Label::P);
            let mut train_s = split(Label::S);
            if train_p.n == 0 || train_s.n == 0 {
                return Err(CliError::Validation(
                    "train: both P and S rows are required".into(),
                ));
            }
            let mut test_data = test_data;
            if cfg.standardize {
                let scales = funcest::classify::unit_diagonal_scales(&train_p, &train_s)
                    .map_err(|e| CliError::Numerical(e.to_string()))?;
                train_p = funcest::classify::apply_scales(&train_p, &scales);
                train_s = funcest::classify::apply_scales(&train_s, &scales);
                test_data = funcest::classify::apply_scales(&test_data, &scales);
            }
            // Per-window labels, validated to be constant within each block.
            let mut window_labels = Vec::new();
            for blk in 0..(test_data.n / window) {
                let lab = test_labels[blk * window];
                if (blk * window..(blk + 1) * window).any(|i| test_labels[i] != lab) {
                    return Err(CliError::Validation(format!(
                        "test: block {} mixes labels; blocks of {} rows must be single-label",
                        blk, window
                    )));
                }
                window_labels.push(lab);
            }
            let lambda = match lambda {
                Some(v) => *v,
                None => {
                    let mu_p = train_p.column_means();
                    let mu_s = train_s.column_means();
                    let b: Vec<f64> =
                        mu_p.iter().zip(&mu_s).map(|(a, c)| a - c).collect();
                    let bmax = sup_norm(&b);
                    if bmax <= 0.0 {
                        return Err(CliError::Numerical(
                            "class means are identical; nothing to tune".into(),
                        ));
                    }
                    let grid = LambdaGrid::log_spaced(0.05 * bmax, 1.2 * bmax, 12);
                    // Tune on the pooled training sample with the mean
                    // difference as the target.
                    let pooled = train_p.vstack(&train_s);
                    tune_lambda_datasplit(&pooled, &b, &grid, &MeanMode::Estimated)
                        .map(|r| r.lambda_star)
                        .unwrap_or(bmax)
                }
            };
            for (mode, name) in [(RldaMode::Functional, "functional"), (RldaMode::Gnb, "gnb")] {
                let model = fit_rlda(&train_p, &train_s, lambda, mode)
                    .map_err(|e| CliError::Numerical(e.to_string()))?;
                let report = evaluate_accuracy(&model, &test_data, &window_labels, *window)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                table.push(vec![
                    0usize.into(),
                    name.into(),
                    lambda.into(),
                    report.accuracy.into(),
                ]);
                eprintln!("{name}: accuracy {}", fmt_g6(report.accuracy));
            }
        }
    }

    let provenance = Provenance::new(cfg.seed, canonical_json(&cfg));
    emit_table(&table, common.format, common.out.as_deref(), &provenance)
}

pub fn cmd_rates(
    config_path: Option<&Path>,
    regime: Option<String>,
    alpha: Option<f64>,
    q: Option<f64>,
    beta: Option<f64>,
    n: Option<usize>,
    p: Option<usize>,
    r_b: Option<f64>,
    common: &CommonArgs,
) -> Result<(), CliError> {
    let mut cfg: RatesConfig = load_config(config_path)?;
    if let Some(v) = regime {
        cfg.regime = v;
    }
    if alpha.is_some() {
        cfg.alpha = alpha;
    }
    if q.is_some() {
        cfg.q = q;
    }
    if let Some(v) = beta {
        cfg.beta = v;
    }
    if let Some(v) = n {
        cfg.n = v;
    }
    if let Some(v) = p {
        cfg.p = v;
    }
    if let Some(v) = r_b {
        cfg.r_b = v;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }

    let regime = match cfg.regime.as_str() {
        "subgaussian" => TailRegime::SubGaussian,
        "exponential" => TailRegime::Exponential {
            alpha: cfg.alpha.ok_or_else(|| {
                CliError::Validation("alpha: required for the exponential regime".into())
            })?,
        },
        "polynomial" => TailRegime::Polynomial {
            q: cfg.q.ok_or_else(|| {
                CliError::Validation("q: required for the polynomial regime".into())
            })?,
        },
        other => {
            return Err(CliError::Validation(format!(
                "regime: unknown value {other:?} (expected subgaussian | exponential | polynomial)"
            )))
        }
    };
    let spec = RateSpec { regime, beta: cfg.beta, n: cfg.n, p: cfg.p, r_b: cfg.r_b };
    let j = theoretical_rate_j(&spec)
        .map_err(|e| CliError::Validation(format!("regime parameters: {e}")))?;
    println!("{}", fmt_g6(cfg.r_b + j));

    if common.out.is_some() {
        let mut table = Table::new(&["regime", "beta", "n", "p", "r_b", "rate"]);
        table.push(vec![
            cfg.regime.as_str().into(),
            cfg.beta.into(),
            cfg.n.into(),
            cfg.p.into(),
            cfg.r_b.into(),
            (cfg.r_b + j).into(),
        ]);
        let provenance = Provenance::new(cfg.seed, canonical_json(&cfg));
        emit_table(&table, common.format, common.out.as_deref(), &provenance)?;
    }
    Ok(())
}
