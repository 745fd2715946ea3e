//! The four commands. Each reads a validated config, drives the library and
//! writes its reports into the output directory.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use binloss::fisher::{
    detectability_from_quadform, fim_binned, fim_list_mode, loss_quadform, NEAR_ZERO_LOSS,
};
use binloss::montecarlo::{empirical_mean_check_against, sample_list, trial_seed, MeanCheckReport};
use binloss::reconstruction::{apply_system, build_convolution_operator, loss_object};
use binloss::{build_rule, BinningScheme, LossReport, NodeRule, PsfSpec};
use serde::Serialize;

use crate::config::{uniform, BinningSection, ExperimentConfig, PsfSection};
use crate::error::{CliError, Stage};
use crate::output::{
    ensure_dir, f17s, fmt17, write_csv, write_json, DetectabilityJson, LossJson, MatrixJson, F17,
};

pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_Z_GATE: f64 = 5.0;
pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Serialize)]
struct AnalyzeJson {
    command: &'static str,
    source: String,
    n_bins: usize,
    nodes_per_axis: usize,
    loss: LossJson,
    detectability_list_mode: DetectabilityJson,
    detectability_binned: DetectabilityJson,
}

fn rule_for(
    config: &ExperimentConfig,
    scheme: &BinningScheme<f64>,
) -> Result<NodeRule<f64>, CliError> {
    build_rule(scheme.space(), scheme, config.quadrature.nodes_per_axis).stage("quadrature")
}

/// FIMs, the three-route loss report and detectabilities for one
/// perturbation. Returns the loss report.
pub fn cmd_analyze(config: &ExperimentConfig, out: &Path) -> Result<LossReport<f64>, CliError> {
    ensure_dir(out)?;
    let space = config.space()?;
    let scheme = config.scheme(&space)?;
    let rule = rule_for(config, &scheme)?;

    let (report, source) = if config.system.is_some() {
        let op = build_convolution_operator(&config.psf()?, &config.object_grid()?, &rule)
            .stage("reconstruction")?;
        let (f, df) = config.objects()?;
        (
            loss_object(&op, &scheme, &rule, &f, &df).stage("reconstruction")?,
            "system".to_string(),
        )
    } else {
        let model = config.zoo_model()?;
        let theta = &config.model_section()?.theta;
        let delta = config.delta_theta()?;
        let lm = fim_list_mode(&model, theta, &rule).stage("fisher")?;
        let b = fim_binned(&model, theta, &scheme, &rule).stage("fisher")?;
        write_json(
            &out.join("fim_list_mode.json"),
            &MatrixJson::from(&lm.matrix),
        )?;
        write_json(&out.join("fim_binned.json"), &MatrixJson::from(&b.matrix))?;
        (
            loss_quadform(&model, theta, &delta, &scheme, &rule).stage("fisher")?,
            model.kind().to_string(),
        )
    };

    let json = AnalyzeJson {
        command: "analyze",
        source,
        n_bins: scheme.len(),
        nodes_per_axis: config.quadrature.nodes_per_axis,
        loss: LossJson::from(&report),
        detectability_list_mode: detectability_from_quadform(report.quadform_lm)
            .stage("fisher")?
            .into(),
        detectability_binned: detectability_from_quadform(report.quadform_binned.max(0.0))
            .stage("fisher")?
            .into(),
    };
    write_json(&out.join("loss_report.json"), &json)?;
    Ok(report)
}

/// One row of the bin-count sweep.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub bins: usize,
    pub report: LossReport<f64>,
    /// `loss(previous row) / loss(this row)`, when both are above the
    /// near-zero floor.
    pub ratio: Option<f64>,
}

fn above_floor(r: &LossReport<f64>) -> bool {
    r.loss_direct.abs() > NEAR_ZERO_LOSS * r.quadform_lm.abs()
}

/// Loss against the number of bins per axis, written to `sweep.csv`.
pub fn cmd_sweep_bins(config: &ExperimentConfig, out: &Path) -> Result<Vec<SweepRow>, CliError> {
    ensure_dir(out)?;
    let counts = config
        .task
        .bin_counts
        .clone()
        .ok_or_else(|| CliError::Config("missing field `task.bin_counts`".into()))?;
    let model = config.zoo_model()?;
    let theta = &config.model_section()?.theta;
    let delta = config.delta_theta()?;
    let space = config.space()?;

    let mut rows: Vec<SweepRow> = Vec::with_capacity(counts.len());
    for &m in &counts {
        let scheme = uniform(&space, &[m])?;
        let rule = rule_for(config, &scheme)?;
        let report = loss_quadform(&model, theta, &delta, &scheme, &rule).stage("fisher")?;
        let ratio = rows
            .last()
            .filter(|p| above_floor(&p.report) && above_floor(&report))
            .map(|p| p.report.loss_direct / report.loss_direct);
        rows.push(SweepRow {
            bins: m,
            report,
            ratio,
        });
    }

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.bins.to_string(),
                fmt17(r.report.quadform_lm),
                fmt17(r.report.quadform_binned),
                fmt17(r.report.loss_direct),
                r.ratio.map(fmt17).unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(
        &out.join("sweep.csv"),
        &["M", "quadform_lm", "quadform_binned", "loss", "loss_ratio"],
        &table,
    )?;
    Ok(rows)
}

/// One row of the convolution example.
#[derive(Clone, Debug)]
pub struct ConvRow {
    /// `nyquist`, `sweep` or `alpha-control`.
    pub case: &'static str,
    pub bandwidth: f64,
    pub bin_width: f64,
    pub report: LossReport<f64>,
}

#[derive(Serialize)]
struct ConvJson {
    command: &'static str,
    bin_width: F17,
    nyquist_bandwidth: F17,
    nyquist: LossJson,
    nyquist_loss_positive: bool,
    sweep_bandwidths: Vec<F17>,
    sweep_losses: Vec<F17>,
    loss_increasing_in_bandwidth: bool,
    alpha: F17,
    alpha_control_loss: F17,
}

/// The band-limited convolution example: loss at Nyquist binning, across a
/// bandwidth sweep at fixed binning, and the proportional control row.
pub fn cmd_conv_example(config: &ExperimentConfig, out: &Path) -> Result<Vec<ConvRow>, CliError> {
    ensure_dir(out)?;
    let system = config.system_section()?;
    if !matches!(system.psf, PsfSection::Sinc { .. }) {
        return Err(CliError::Config("conv-example needs a `sinc` psf".into()));
    }
    let space = config.space()?;
    let counts = match &config.binning {
        BinningSection::Counts(c) if c.len() == 1 => c[0],
        _ => {
            return Err(CliError::Config(
                "conv-example needs uniform `binning.counts` with one entry".into(),
            ))
        }
    };
    let scheme = uniform(&space, &[counts])?;
    let rule = rule_for(config, &scheme)?;
    let grid = config.object_grid()?;
    let (f, df) = config.objects()?;
    let dx = space.extent(0) / counts as f64;
    let nyquist = 1.0 / dx;
    let bandwidths = config
        .task
        .bandwidths
        .clone()
        .unwrap_or_else(|| vec![0.5 * nyquist, nyquist, 2.0 * nyquist]);
    let alpha = config.task.alpha.unwrap_or(DEFAULT_ALPHA);

    let run = |b: f64, df: &binloss::ObjectFunction<f64>| -> Result<LossReport<f64>, CliError> {
        let op = build_convolution_operator(&PsfSpec::bandlimited(b), &grid, &rule)
            .stage("reconstruction")?;
        apply_system(&op, &f).stage("reconstruction")?;
        loss_object(&op, &scheme, &rule, &f, df).stage("reconstruction")
    };

    let mut rows = vec![ConvRow {
        case: "nyquist",
        bandwidth: nyquist,
        bin_width: dx,
        report: run(nyquist, &df)?,
    }];
    for &b in &bandwidths {
        rows.push(ConvRow {
            case: "sweep",
            bandwidth: b,
            bin_width: dx,
            report: run(b, &df)?,
        });
    }
    rows.push(ConvRow {
        case: "alpha-control",
        bandwidth: nyquist,
        bin_width: dx,
        report: run(nyquist, &f.scaled(alpha))?,
    });

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.case.to_string(),
                fmt17(r.bandwidth),
                fmt17(r.bin_width),
                fmt17(r.bandwidth * r.bin_width),
                fmt17(r.report.quadform_lm),
                fmt17(r.report.quadform_binned),
                fmt17(r.report.loss_direct),
            ]
        })
        .collect();
    write_csv(
        &out.join("conv_sweep.csv"),
        &[
            "case",
            "bandwidth",
            "bin_width",
            "b_times_dx",
            "quadform_lm",
            "quadform_binned",
            "loss",
        ],
        &table,
    )?;

    let ny = &rows[0].report;
    let sweep: Vec<&ConvRow> = rows.iter().filter(|r| r.case == "sweep").collect();
    let losses: Vec<f64> = sweep.iter().map(|r| r.report.loss_direct).collect();
    let json = ConvJson {
        command: "conv-example",
        bin_width: F17(dx),
        nyquist_bandwidth: F17(nyquist),
        nyquist: LossJson::from(ny),
        nyquist_loss_positive: ny.loss_direct > 1e-10 * ny.quadform_lm,
        sweep_bandwidths: f17s(&bandwidths),
        sweep_losses: f17s(&losses),
        loss_increasing_in_bandwidth: losses.windows(2).all(|w| w[0] < w[1]),
        alpha: F17(alpha),
        alpha_control_loss: F17(rows.last().expect("control row").report.loss_direct),
    };
    write_json(&out.join("conv_report.json"), &json)?;
    Ok(rows)
}

#[derive(Serialize)]
struct McJson {
    command: &'static str,
    seed: u64,
    n_trials: usize,
    z_gate: F17,
    max_abs_z: F17,
    counts_conserved: bool,
    total_events: u64,
    passed: bool,
}

/// Samples event lists, bins them and z-scores the bin averages. Fails with
/// a validation error (after writing the reports) if the gate is missed.
pub fn cmd_mc_validate(config: &ExperimentConfig, out: &Path) -> Result<MeanCheckReport, CliError> {
    ensure_dir(out)?;
    let model = config.zoo_model()?;
    let theta = &config.model_section()?.theta;
    let check_theta = config
        .task
        .check_theta
        .clone()
        .unwrap_or_else(|| theta.clone());
    if check_theta.len() != theta.len() {
        return Err(CliError::Config(
            "task.check_theta has the wrong length".into(),
        ));
    }
    let space = config.space()?;
    let scheme = config.scheme(&space)?;
    let rule = rule_for(config, &scheme)?;
    let n_trials = config.task.n_trials.unwrap_or(DEFAULT_TRIALS);
    let gate = config.task.z_gate.unwrap_or(DEFAULT_Z_GATE);

    let report = empirical_mean_check_against(
        &model,
        theta,
        &check_theta,
        &scheme,
        &rule,
        n_trials,
        config.seed,
    )
    .stage("montecarlo")?;

    let table: Vec<Vec<String>> = (0..scheme.len())
        .map(|m| {
            vec![
                m.to_string(),
                fmt17(report.expected[m]),
                fmt17(report.empirical[m]),
                fmt17(report.z[m]),
            ]
        })
        .collect();
    write_csv(
        &out.join("mc_zscores.csv"),
        &["bin", "expected", "empirical", "z"],
        &table,
    )?;
    let passed = report.passes(gate);
    write_json(
        &out.join("mc_report.json"),
        &McJson {
            command: "mc-validate",
            seed: config.seed,
            n_trials,
            z_gate: F17(gate),
            max_abs_z: F17(report.max_abs_z),
            counts_conserved: report.counts_conserved,
            total_events: report.total_events,
            passed,
        },
    )?;
    if config.task.export_events {
        // the first trial's list
        let list =
            sample_list(&model, theta, &rule, trial_seed(config.seed, 0)).stage("montecarlo")?;
        let path = out.join("events.txt");
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        list.write_text(BufWriter::new(file))
            .map_err(|e| CliError::io(&path, e))?;
    }
    if !passed {
        return Err(CliError::Validation(format!(
            "max |z| = {:.3} exceeds the gate {gate} (counts conserved: {})",
            report.max_abs_z, report.counts_conserved
        )));
    }
    Ok(report)
}
