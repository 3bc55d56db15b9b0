use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use su11_core::circuit::{
    preset_mzi, preset_mzi_squeezed, preset_pa_bs, preset_sui, Circuit, SuiParams, IDLER_PHASE_QUADRATURE,
    SIGNAL_PHASE_QUADRATURE,
};
use su11_core::jsf::{filter_box, jsf_multistage, marginal_intensity, schmidt_analysis, uniform_axis, JsfGrid};
use su11_core::metrology::{fringe_scan, scheme_setup_with_loss, snr, LossSite, SnrReport};
use su11_core::oracles::{i_ps, oracle_intensity, oracle_loss, oracle_snr, OracleValue, Scheme, SchemeParams};

use crate::config::{LossConfig, ScenarioConfig, Spacing, SweepConfig, SweepParameter};
use crate::table::{num, opt, writer, REPORT_HEADER};
use crate::{CliError, Common, SelfcheckArgs};

/// Example configs shipped with the binary; `selfcheck` runs all of them.
pub const BUNDLED: &[(&str, &str)] = &[
    ("mzi_classical.json", include_str!("../configs/mzi_classical.json")),
    ("mzi_squeezed.json", include_str!("../configs/mzi_squeezed.json")),
    ("mzi_squeezed_loss_sweep.json", include_str!("../configs/mzi_squeezed_loss_sweep.json")),
    ("sui_port1.json", include_str!("../configs/sui_port1.json")),
    ("sui_port2.json", include_str!("../configs/sui_port2.json")),
    ("sui_joint.json", include_str!("../configs/sui_joint.json")),
    ("sui_g2_sweep.json", include_str!("../configs/sui_g2_sweep.json")),
    ("sui_external_loss_sweep.json", include_str!("../configs/sui_external_loss_sweep.json")),
    ("sui_fringe.json", include_str!("../configs/sui_fringe.json")),
    ("pa_bs.json", include_str!("../configs/pa_bs.json")),
    ("truncated.json", include_str!("../configs/truncated.json")),
    ("dual_beam_port.json", include_str!("../configs/dual_beam_port.json")),
    ("dual_beam_amplitude.json", include_str!("../configs/dual_beam_amplitude.json")),
    ("jsf_broadband.json", include_str!("../configs/jsf_broadband.json")),
    ("jsf_binomial3.json", include_str!("../configs/jsf_binomial3.json")),
];

#[derive(Debug, Clone)]
pub struct Row {
    pub scheme: Scheme,
    pub param_json: String,
    pub report: SnrReport,
    pub oracle: Option<OracleValue>,
    pub tolerance: f64,
    pub swept: Option<f64>,
}

impl Row {
    pub fn rel_err(&self) -> Option<f64> {
        self.oracle.map(|o| {
            let d = (self.report.snr - o.value).abs();
            if o.value == 0.0 {
                d
            } else {
                d / o.value.abs()
            }
        })
    }

    pub fn passes(&self) -> bool {
        self.rel_err().is_none_or(|e| e <= self.tolerance)
    }

    fn record(&self) -> Vec<String> {
        let r = &self.report;
        let mut out = vec![
            self.scheme.name().to_string(),
            self.param_json.clone(),
            num(r.i_ps),
            num(r.signal_power),
            num(r.noise_power),
            num(r.snr),
            num(r.snr_db),
            opt(self.oracle.map(|o| o.value)),
            opt(self.rel_err()),
        ];
        if let Some(v) = self.swept {
            out.push(num(v));
        }
        out
    }
}

#[derive(Serialize)]
struct ParamRecord<'a> {
    #[serde(flatten)]
    params: &'a SchemeParams,
    loss: f64,
    loss_site: LossSite,
}

/// Closed-form SNR for the configuration, if one exists.
fn oracle_for(scheme: Scheme, p: &SchemeParams, loss: LossConfig) -> Option<OracleValue> {
    if loss.value == 0.0 {
        return oracle_snr(scheme, p).ok();
    }
    match (scheme, loss.site) {
        (Scheme::SuiPort1 | Scheme::SuiPort2, LossSite::External) => oracle_loss(scheme, p, loss.value).ok(),
        (Scheme::MziSqueezed, LossSite::Input) => {
            let lossless = oracle_snr(scheme, p).ok()?;
            let noise = oracle_loss(scheme, p, loss.value).ok()?;
            let floor = p.alpha * p.alpha * (-2.0 * p.r).exp();
            Some(OracleValue { value: lossless.value * floor / noise.value, exact: false })
        }
        _ => None,
    }
}

fn evaluate(
    cfg: &ScenarioConfig,
    scheme: Scheme,
    p: &SchemeParams,
    loss: LossConfig,
    tolerance: Option<f64>,
) -> Result<Row, CliError> {
    p.validate()?;
    let (builder, default_measurement) = scheme_setup_with_loss(scheme, p, loss.value, loss.site)?;
    let measurement = cfg.measurement.clone().unwrap_or(default_measurement);
    let signal = if scheme == Scheme::DualBeamAmplitude { p.epsilon } else { p.delta };
    let report = snr(scheme.name(), builder, &measurement, signal, i_ps(scheme, p))?;
    let oracle = if cfg.measurement.is_some() { None } else { oracle_for(scheme, p, loss) };
    let tolerance = tolerance.or(cfg.tolerance).unwrap_or(match oracle {
        Some(o) if !o.exact => 1e-2,
        _ => 1e-6,
    });
    let record = ParamRecord { params: p, loss: loss.value, loss_site: loss.site };
    let param_json = serde_json::to_string(&record).map_err(|e| CliError::Failed(e.to_string()))?;
    Ok(Row { scheme, param_json, report, oracle, tolerance, swept: None })
}

fn output_path(args_out: &Option<PathBuf>, cfg: &ScenarioConfig) -> Option<PathBuf> {
    args_out.clone().or_else(|| cfg.output.clone())
}

fn write_report(rows: &[Row], path: Option<&Path>, swept: Option<&str>) -> Result<(), CliError> {
    let mut w = writer(path)?;
    let mut header: Vec<&str> = REPORT_HEADER.to_vec();
    if let Some(name) = swept {
        header.push(name);
    }
    w.write_record(&header)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

fn check_rows(rows: &[Row]) -> Result<(), CliError> {
    let bad: Vec<String> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.passes())
        .map(|(i, r)| format!("row {i} ({}) rel_err {} > {}", r.scheme.name(), opt(r.rel_err()), num(r.tolerance)))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(bad.join("; ")))
    }
}

fn run_rows(cfg: &ScenarioConfig, tolerance: Option<f64>) -> Result<Vec<Row>, CliError> {
    Ok(vec![evaluate(cfg, cfg.scheme()?, &cfg.params, cfg.loss(), tolerance)?])
}

pub fn run(args: &Common) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(&args.config)?;
    let rows = run_rows(&cfg, args.tolerance)?;
    write_report(&rows, output_path(&args.out, &cfg).as_deref(), None)?;
    if args.selfcheck {
        check_rows(&rows)?;
    }
    Ok(())
}

fn sweep_values(s: &SweepConfig, seed: u64) -> Vec<f64> {
    match s.spacing {
        Spacing::Linear if s.steps == 1 => vec![s.from],
        Spacing::Linear => {
            let span = s.to - s.from;
            let last = (s.steps - 1) as f64;
            (0..s.steps).map(|k| if k + 1 == s.steps { s.to } else { s.from + span * k as f64 / last }).collect()
        }
        Spacing::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (lo, hi) = (s.from.min(s.to), s.from.max(s.to));
            (0..s.steps).map(|_| rng.gen_range(lo..hi)).collect()
        }
    }
}

fn apply(p: &mut SchemeParams, loss: &mut LossConfig, name: SweepParameter, v: f64) {
    match name {
        SweepParameter::G1 => p.g1 = v,
        SweepParameter::G2 => p.g2 = v,
        SweepParameter::Alpha => p.alpha = v,
        SweepParameter::T1 => p.t1 = v,
        SweepParameter::T2 => p.t2 = v,
        SweepParameter::R => p.r = v,
        SweepParameter::Transmissivity => p.transmissivity = Some(v),
        SweepParameter::Weight => p.weight = v,
        SweepParameter::Delta => p.delta = v,
        SweepParameter::Epsilon => p.epsilon = v,
        SweepParameter::Loss => loss.value = v,
    }
}

fn sweep_rows(cfg: &ScenarioConfig, tolerance: Option<f64>, seed: Option<u64>) -> Result<Vec<Row>, CliError> {
    let s = cfg.sweep.ok_or_else(|| CliError::Invalid("config has no sweep block".into()))?;
    let scheme = cfg.scheme()?;
    let mut base_loss = cfg.loss();
    if let Some(site) = s.site {
        base_loss.site = site;
    }
    let values = sweep_values(&s, seed.or(cfg.seed).unwrap_or(0));
    values
        .par_iter()
        .map(|&v| {
            let (mut p, mut loss) = (cfg.params, base_loss);
            apply(&mut p, &mut loss, s.parameter, v);
            if !(0.0..=1.0).contains(&loss.value) {
                return Err(CliError::Invalid(format!("loss must lie in [0, 1], got {}", loss.value)));
            }
            let mut row = evaluate(cfg, scheme, &p, loss, tolerance)?;
            row.swept = Some(v);
            Ok(row)
        })
        .collect()
}

pub fn sweep(args: &Common) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(&args.config)?;
    let rows = sweep_rows(&cfg, args.tolerance, args.seed)?;
    let name = cfg.sweep.map(|s| s.parameter.name());
    write_report(&rows, output_path(&args.out, &cfg).as_deref(), name)?;
    if args.selfcheck {
        check_rows(&rows)?;
    }
    Ok(())
}

type PhaseBuilder = Box<dyn Fn(f64) -> su11_core::Result<Circuit> + Sync>;

/// Circuit at fringe phase `phase`: the arm phase sum for SU(1,1), the arm
/// phase difference for the Mach-Zehnder and PA+BS.
fn fringe_builder(scheme: Scheme, p: &SchemeParams) -> Result<(PhaseBuilder, (f64, f64)), CliError> {
    let q = *p;
    let alpha = Complex64::new(q.alpha, 0.0);
    Ok(match scheme {
        Scheme::MziClassical => (Box::new(move |ph| preset_mzi(q.t1, q.t2, ph, alpha)), (FRAC_PI_2, FRAC_PI_2)),
        Scheme::MziSqueezed => {
            (Box::new(move |ph| preset_mzi_squeezed(q.t1, q.t2, ph, alpha, q.r)), (FRAC_PI_2, FRAC_PI_2))
        }
        Scheme::PaBs => {
            let t = q.pa_bs_transmissivity();
            (Box::new(move |ph| preset_pa_bs(q.g1, t, alpha, [0.0, ph])), (FRAC_PI_2, FRAC_PI_2))
        }
        Scheme::Truncated => return Err(CliError::Invalid("the truncated scheme has no fringe".into())),
        s => {
            let base = SuiParams { dual_beam: s.is_dual_beam(), ..SuiParams::dark_fringe(q.g1, q.g2, q.alpha) };
            (
                Box::new(move |ph| preset_sui(&SuiParams { phi1: 0.0, phi2: ph, ..base })),
                (SIGNAL_PHASE_QUADRATURE, IDLER_PHASE_QUADRATURE),
            )
        }
    })
}

fn fringe_table(cfg: &ScenarioConfig) -> Result<Vec<Vec<String>>, CliError> {
    let scheme = cfg.scheme()?;
    let points = cfg.fringe.map_or(64, |f| f.points);
    let grid: Vec<f64> = (0..points).map(|k| 2.0 * PI * k as f64 / points as f64).collect();
    let (builder, angles) = fringe_builder(scheme, &cfg.params)?;
    let scan = fringe_scan(&builder, &grid, angles)?;
    let oracle_scheme = match scheme {
        Scheme::MziClassical | Scheme::PaBs => Some(scheme),
        s if !matches!(s, Scheme::MziSqueezed) => Some(Scheme::SuiPort1),
        _ => None,
    };
    scan.iter()
        .map(|f| {
            let o = oracle_scheme.and_then(|s| oracle_intensity(s, &cfg.params, f.phase).ok());
            Ok(vec![
                num(f.phase),
                num(f.i1),
                num(f.i2),
                num(f.var1),
                num(f.var2),
                opt(o.map(|o| o.0.value)),
                opt(o.map(|o| o.1.value)),
            ])
        })
        .collect()
}

pub fn fringe(args: &Common) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(&args.config)?;
    let rows = fringe_table(&cfg)?;
    let mut w = writer(output_path(&args.out, &cfg).as_deref())?;
    w.write_record(["phase", "i1", "i2", "var1", "var2", "i1_oracle", "i2_oracle"])?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub struct JsfResult {
    pub grid: JsfGrid,
    pub schmidt_number: f64,
}

fn compute_jsf(cfg: &ScenarioConfig) -> Result<JsfResult, CliError> {
    let j = cfg.jsf.as_ref().ok_or_else(|| CliError::Invalid("config has no jsf block".into()))?;
    let spec = j.stage_spec()?;
    let axis = uniform_axis(j.points, j.half_width)?;
    let mut grid = jsf_multistage(&axis, &axis, &spec, &j.mismatch)?;
    if let Some(f) = j.filter {
        grid = filter_box(&grid, f.omega_s, f.omega_i)?;
    }
    let schmidt_number = schmidt_analysis(&grid)?.schmidt_number;
    Ok(JsfResult { grid, schmidt_number })
}

pub fn jsf(args: &Common) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(&args.config)?;
    let res = compute_jsf(&cfg)?;
    let dir = output_path(&args.out, &cfg).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let g = &res.grid;
    let intensity = g.intensity();

    let mut w = writer(Some(&dir.join("jsf_intensity.csv")))?;
    let mut head = vec!["omega_s\\omega_i".to_string()];
    head.extend(g.omega_i().iter().map(|&v| num(v)));
    w.write_record(&head)?;
    for (r, &ws) in g.omega_s().iter().enumerate() {
        let mut row = vec![num(ws)];
        row.extend(intensity.row(r).iter().map(|&v| num(v)));
        w.write_record(&row)?;
    }
    w.flush()?;

    let signal = marginal_intensity(g)?;
    let ds = g.d_omega_s();
    let idler: Vec<f64> = intensity.column_iter().map(|c| c.sum() * ds).collect();
    let mut w = writer(Some(&dir.join("jsf_marginals.csv")))?;
    w.write_record(["omega", "signal", "idler"])?;
    for (k, &omega) in g.omega_s().iter().enumerate() {
        w.write_record([num(omega), num(signal[k]), num(idler[k])])?;
    }
    w.flush()?;

    let summary = format!("schmidt_number={}\nnorm={}\npoints={}\n", num(res.schmidt_number), num(g.norm()), g.omega_s().len());
    fs::write(dir.join("jsf_summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn check_config(cfg: &ScenarioConfig, tolerance: Option<f64>, seed: Option<u64>) -> Result<String, CliError> {
    if cfg.jsf.is_some() {
        let res = compute_jsf(cfg)?;
        if !(res.grid.is_normalized() && res.schmidt_number >= 1.0 - 1e-9 && res.schmidt_number.is_finite()) {
            return Err(CliError::Mismatch(format!("Schmidt number {} out of range", res.schmidt_number)));
        }
        return Ok(format!("K={}", num(res.schmidt_number)));
    }
    if cfg.fringe.is_some() {
        let rows = fringe_table(cfg)?;
        return Ok(format!("{} fringe points", rows.len()));
    }
    let rows = if cfg.sweep.is_some() { sweep_rows(cfg, tolerance, seed)? } else { run_rows(cfg, tolerance)? };
    check_rows(&rows)?;
    let worst = rows.iter().filter_map(Row::rel_err).fold(0.0, f64::max);
    Ok(format!("{} rows, max rel_err {}", rows.len(), num(worst)))
}

pub fn selfcheck(args: &SelfcheckArgs) -> Result<(), CliError> {
    let configs: Vec<(String, ScenarioConfig)> = match &args.config {
        Some(path) => vec![(path.display().to_string(), ScenarioConfig::load(path)?)],
        None => BUNDLED
            .iter()
            .map(|(name, text)| Ok((name.to_string(), ScenarioConfig::parse(text, name)?)))
            .collect::<Result<_, CliError>>()?,
    };
    let mut failed = Vec::new();
    for (name, cfg) in &configs {
        match check_config(cfg, args.tolerance, args.seed) {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(CliError::Mismatch(m)) => {
                println!("FAIL {name}: {m}");
                failed.push(name.clone());
            }
            Err(e) => return Err(e),
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(failed.join(", ")))
    }
}
