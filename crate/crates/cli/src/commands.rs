//! Subcommand implementations. Each returns an [`Output`] holding both the
//! CSV and the JSON rendering; the caller picks one.

use std::collections::BTreeMap;
use std::path::PathBuf;

use donor_strain::donor::{DonorSpecies, ParameterSet, ShiftModelParams};
use donor_strain::echo::{
    extract_shift_series, fit_trace, synthesize_echo, EchoFitOptions, EchoTrace, LmOptions, VoigtParams, Window,
};
use donor_strain::fit::{compare_with_theory, fit_anisotropy, fit_slope_vs_dfda, MeasurementRecord};
use donor_strain::response::predict_df_deps11;
use donor_strain::spin::{eigensystem, HalfInt, SpinSystem, TransitionOptions, TransitionTable, transitions_at_frequency};
use donor_strain::strain::{decompose, frame_110, hydrostatic_fraction_110, strain_from_stress_110, Load, StressAxis, StressSpec};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use serde_json::json;

use crate::config::{Context, OutputFormat};
use crate::error::{CliError, Result};
use crate::io::{csv_table, read_records, read_trace, Meta};

#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub csv: String,
    pub json: serde_json::Value,
}

impl Output {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.csv.clone(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("json value");
                s.push('\n');
                s
            }
        }
    }
}

fn base_meta(ctx: &Context, command: &str) -> Meta {
    let mut m = Meta::default();
    m.push("command", command);
    m.push("config_hash", &ctx.config_hash);
    m.push("constants_version", &ctx.donors.version);
    m
}

fn table_output<T: Serialize>(meta: Meta, rows: &[T], extra: serde_json::Value) -> Result<Output> {
    let mut json = json!({ "meta": meta.to_json(), "rows": rows });
    if let (Some(obj), serde_json::Value::Object(more)) = (json.as_object_mut(), extra) {
        obj.extend(more);
    }
    Ok(Output { csv: csv_table(&meta, rows)?, json })
}

fn donor<'a>(ctx: &'a Context, name: &str) -> Result<&'a DonorSpecies> {
    Ok(ctx.donors.get(name)?)
}

fn transition_table(ctx: &Context, d: &DonorSpecies, a_hz: f64) -> Result<TransitionTable> {
    Ok(transitions_at_frequency(d, a_hz, d.g_e, ctx.config.drive_hz, &TransitionOptions::default())?)
}

// levels

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelRow {
    #[serde(rename = "B_T")]
    pub b_t: f64,
    /// `m_S,m_I` at finite field, `F=...` at zero field.
    pub state: String,
    #[serde(rename = "energy_Hz")]
    pub energy_hz: f64,
    pub degeneracy: usize,
}

pub struct LevelsArgs {
    pub donor: String,
    pub b_min_t: f64,
    pub b_max_t: f64,
    pub points: usize,
    pub a_hz: Option<f64>,
}

fn zero_field_rows(sys: &SpinSystem, a_hz: f64, g_e: f64) -> Result<Vec<LevelRow>> {
    let e = eigensystem(&sys.hamiltonian(a_hz, g_e, 0.0))?;
    let i = sys.nuclear_spin().value();
    let tol = 1e-9 * a_hz.abs().max(1.0);
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for &v in &e.energies {
        match groups.last_mut() {
            Some((c, n)) if (v - *c / *n as f64).abs() < tol => {
                *c += v;
                *n += 1;
            }
            _ => groups.push((v, 1)),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(sum, n)| {
            let energy = sum / n as f64;
            // E = A/2 [F(F+1) - I(I+1) - 3/4]
            let ff = 2.0 * energy / a_hz + i * (i + 1.0) + 0.75;
            let f = (-1.0 + (1.0 + 4.0 * ff).sqrt()) / 2.0;
            LevelRow { b_t: 0.0, state: format!("F={}", HalfInt::from_f64(f).map(|h| h.to_string()).unwrap_or_else(|_| format!("{f:.3}"))), energy_hz: energy, degeneracy: n }
        })
        .collect())
}

pub fn levels(ctx: &Context, args: &LevelsArgs) -> Result<Output> {
    let d = donor(ctx, &args.donor)?;
    let a = args.a_hz.unwrap_or(d.a0_hz);
    let (lo, hi, n) = (args.b_min_t, args.b_max_t, args.points);
    if !(lo >= 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
        return Err(CliError::Invalid(format!("bad field range [{lo}, {hi}] T")));
    }
    if n == 0 || (n == 1 && hi != lo) || (n >= 2 && hi == lo) {
        return Err(CliError::Invalid("a field sweep needs at least 2 points over a non-empty range".into()));
    }
    let fields: Vec<f64> = if n == 1 { vec![lo] } else { (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect() };
    let sys = SpinSystem::for_donor(d);
    let b_first = fields.iter().copied().find(|b| *b > 0.0);
    let map = b_first.map(|b| sys.label_map(a, d.g_e, b)).transpose()?;
    let mut rows = Vec::new();
    for &b in &fields {
        if b == 0.0 {
            rows.extend(zero_field_rows(&sys, a, d.g_e)?);
            continue;
        }
        let eig = sys.blocked_eigensystem(&sys.hamiltonian(a, d.g_e, b));
        let map = map.as_ref().expect("map exists for positive fields");
        for label in sys.basis() {
            let col = map.column(&eig, *label).ok_or_else(|| donor_strain::Error::LabelingConflict {
                field_t: b,
                detail: format!("label {label} not found"),
            })?;
            rows.push(LevelRow { b_t: b, state: format!("{},{}", label.m_s, label.m_i), energy_hz: eig.energies[col], degeneracy: 1 });
        }
    }
    let mut meta = base_meta(ctx, "levels");
    meta.push("donor", &d.name);
    meta.push("A_Hz", a);
    table_output(meta, &rows, json!({}))
}

// transitions

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionRow {
    pub donor: String,
    #[serde(rename = "m_I")]
    pub m_i: f64,
    #[serde(rename = "B_res_T")]
    pub b_res_t: f64,
    #[serde(rename = "f_Hz")]
    pub f_hz: f64,
    #[serde(rename = "dfdA")]
    pub dfda: f64,
    #[serde(rename = "dfdg_Hz")]
    pub dfdg_hz: f64,
    pub intensity: f64,
}

pub fn transitions(ctx: &Context, donor_name: &str, a_hz: Option<f64>) -> Result<Output> {
    let d = donor(ctx, donor_name)?;
    let t = transition_table(ctx, d, a_hz.unwrap_or(d.a0_hz))?;
    for w in &t.warnings {
        eprintln!("warning: {} m_I = {}: {}", d.name, w.m_i, w.reason);
    }
    let rows: Vec<TransitionRow> = t
        .rows
        .iter()
        .map(|r| TransitionRow {
            donor: d.name.clone(),
            m_i: r.m_i.value(),
            b_res_t: r.b_res_t,
            f_hz: r.f_hz,
            dfda: r.dfda,
            dfdg_hz: r.dfdg_hz,
            intensity: r.intensity,
        })
        .collect();
    let mut meta = base_meta(ctx, "transitions");
    meta.push("donor", &d.name);
    meta.push("f_mw_Hz", ctx.config.drive_hz);
    meta.push("A_Hz", t.a_hz);
    table_output(meta, &rows, json!({ "warnings": t.warnings }))
}

// strain

pub struct StrainArgs {
    pub axis: StressAxis,
    pub mass_kg: Option<f64>,
    pub stress_pa: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantityRow {
    pub quantity: String,
    pub value: f64,
}

const AXES: [&str; 3] = ["x", "y", "z"];

pub fn strain(ctx: &Context, args: &StrainArgs) -> Result<Output> {
    let load = match (args.mass_kg, args.stress_pa) {
        (Some(kg), None) => Load::Mass { kg, cross_section_m2: ctx.config.cross_section_m2 },
        (None, Some(s)) => Load::Stress(s),
        _ => return Err(CliError::Invalid("give exactly one of --mass-kg or --stress-pa".into())),
    };
    let spec = StressSpec { axis: args.axis, load };
    let sigma = spec.sigma_pa()?;
    let eps = spec.strain(&ctx.elastic)?;
    let parts = decompose(&eps);
    let mut rows = vec![QuantityRow { quantity: "sigma_Pa".into(), value: sigma }];
    let m = eps.matrix();
    for i in 0..3 {
        for j in 0..3 {
            rows.push(QuantityRow { quantity: format!("eps_{}{}", AXES[i], AXES[j]), value: m[(i, j)] });
        }
    }
    let mut json = json!({
        "axis": args.axis.to_string(),
        "sigma_Pa": sigma,
        "cubic": eps,
        "decomposition": { "eps_hs": parts.eps_hs, "uniaxial": parts.eps_uni, "shear": parts.eps_shear },
    });
    if args.axis == StressAxis::Axis110 {
        let s = strain_from_stress_110(sigma, &ctx.elastic)?;
        for (k, v) in s.frame.iter().enumerate() {
            rows.push(QuantityRow { quantity: format!("eps_{}{}", k + 1, k + 1), value: *v });
        }
        let rotated = eps.in_frame(&frame_110());
        json["frame"] = json!({
            "axes": ["[110]", "[-110]", "[001]"],
            "eps_11": s.frame[0], "eps_22": s.frame[1], "eps_33": s.frame[2],
            "off_diagonal_max": rotated[(0, 1)].abs().max(rotated[(0, 2)].abs()).max(rotated[(1, 2)].abs()),
        });
        json["hydrostatic_fraction"] = json!(hydrostatic_fraction_110(&ctx.elastic));
    }
    rows.push(QuantityRow { quantity: "eps_hs".into(), value: parts.eps_hs });
    let (u, s) = (parts.eps_uni.matrix(), parts.eps_shear.matrix());
    for i in 0..3 {
        rows.push(QuantityRow { quantity: format!("uni_{}{}", AXES[i], AXES[i]), value: u[(i, i)] });
    }
    for (i, j) in [(1, 2), (0, 2), (0, 1)] {
        rows.push(QuantityRow { quantity: format!("shear_{}{}", AXES[i], AXES[j]), value: s[(i, j)] });
    }
    let mut meta = base_meta(ctx, "strain");
    meta.push("axis", args.axis);
    meta.push("elastic", format!("c11={} c12={} c44={}", ctx.elastic.c11, ctx.elastic.c12, ctx.elastic.c44));
    table_output(meta, &rows, json)
}

// predict

#[derive(Clone, Debug, Default)]
pub struct ParamOverrides {
    pub k: Option<f64>,
    pub beta_vrm: Option<f64>,
    pub beta_shear: Option<f64>,
}

impl ParamOverrides {
    fn apply(&self, p: &mut ShiftModelParams) -> Vec<&'static str> {
        let mut changed = Vec::new();
        for (v, field, name) in [(self.k, &mut p.k, "K"), (self.beta_vrm, &mut p.beta_vrm, "beta_vrm"), (self.beta_shear, &mut p.beta_shear, "beta_shear")] {
            if let Some(v) = v {
                *field = v;
                changed.push(name);
            }
        }
        if !changed.is_empty() {
            p.errors = None;
        }
        changed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictRow {
    pub donor: String,
    #[serde(rename = "m_I")]
    pub m_i: f64,
    pub theta_deg: f64,
    #[serde(rename = "B_res_T")]
    pub b_res_t: f64,
    #[serde(rename = "dfdA")]
    pub dfda: f64,
    pub dfdg: f64,
    #[serde(rename = "df_deps11_Hz")]
    pub df_deps11_hz: f64,
    #[serde(rename = "df_dhs_Hz")]
    pub df_dhs_hz: f64,
}

pub struct PredictArgs {
    pub donor: String,
    pub thetas_deg: Vec<f64>,
    pub overrides: ParamOverrides,
}

fn resolved_params(ctx: &Context, d: &DonorSpecies, set: ParameterSet) -> ShiftModelParams {
    ctx.donors.params(d, set, &ctx.elastic, ctx.config.g_anisotropy)
}

pub fn predict(ctx: &Context, args: &PredictArgs) -> Result<Output> {
    if args.thetas_deg.is_empty() {
        return Err(CliError::Invalid("give at least one angle".into()));
    }
    let d = donor(ctx, &args.donor)?;
    let mut p = resolved_params(ctx, d, ctx.config.parameter_set);
    let changed = args.overrides.apply(&mut p);
    let t = transition_table(ctx, d, d.a0_hz)?;
    let mut rows = Vec::new();
    for &th in &args.thetas_deg {
        if !(0.0..=90.0).contains(&th) {
            return Err(CliError::Invalid(format!("theta must lie in [0, 90] degrees, got {th}")));
        }
        for tr in &t.rows {
            let pr = predict_df_deps11(d, tr, th.to_radians(), &p, &ctx.elastic);
            rows.push(PredictRow {
                donor: d.name.clone(),
                m_i: tr.m_i.value(),
                theta_deg: th,
                b_res_t: tr.b_res_t,
                dfda: tr.dfda,
                dfdg: tr.dfdg_hz,
                df_deps11_hz: pr.df_deps11_hz,
                df_dhs_hz: pr.df_dhs_hz(&ctx.elastic),
            });
        }
    }
    let mut meta = base_meta(ctx, "predict");
    meta.push("donor", &d.name);
    meta.push("parameter_set", p.provenance);
    if !changed.is_empty() {
        meta.push("overridden", changed.join(" "));
    }
    meta.push("K", p.k);
    meta.push("beta_vrm", p.beta_vrm);
    meta.push("beta_shear", p.beta_shear);
    meta.push("f_mw_Hz", ctx.config.drive_hz);
    table_output(meta, &rows, json!({ "params": p }))
}

// echo

pub struct SynthSpec {
    pub slope_hz: f64,
    pub strains: Vec<f64>,
    pub offset_hz: f64,
    pub lineshape: VoigtParams,
    pub dt_s: f64,
    pub samples: usize,
    pub noise_rms: f64,
    pub seed: u64,
}

pub enum EchoSource {
    Files { traces: Vec<PathBuf>, strains: Vec<f64> },
    Synth(SynthSpec),
}

pub struct EchoArgs {
    pub source: EchoSource,
    pub window: Window,
    pub restarts: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EchoRow {
    pub index: usize,
    pub eps11: Option<f64>,
    #[serde(rename = "detuning_Hz")]
    pub detuning_hz: f64,
    #[serde(rename = "sigma_Hz")]
    pub sigma_hz: f64,
    #[serde(rename = "gamma_Hz")]
    pub gamma_hz: f64,
    #[serde(rename = "bin_Hz")]
    pub bin_hz: f64,
    pub rss: f64,
}

pub fn synthesize_series(spec: &SynthSpec) -> Result<Vec<EchoTrace>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = if spec.noise_rms > 0.0 {
        Some(Normal::new(0.0, spec.noise_rms / 2f64.sqrt()).map_err(|e| CliError::Invalid(e.to_string()))?)
    } else {
        None
    };
    spec.strains
        .iter()
        .map(|e| {
            let mut tr = synthesize_echo(spec.offset_hz + spec.slope_hz * e, &spec.lineshape, spec.dt_s, spec.samples)?;
            if let Some(n) = &noise {
                for s in tr.samples.iter_mut() {
                    *s += Complex64::new(n.sample(&mut rng), n.sample(&mut rng));
                }
            }
            Ok(tr)
        })
        .collect()
}

pub fn echo(ctx: &Context, args: &EchoArgs) -> Result<Output> {
    let (traces, strains, source) = match &args.source {
        EchoSource::Files { traces, strains } => {
            if !strains.is_empty() && strains.len() != traces.len() {
                return Err(CliError::Invalid(format!("{} traces but {} strains", traces.len(), strains.len())));
            }
            let t = traces.iter().map(|p| read_trace(p)).collect::<Result<Vec<_>>>()?;
            (t, strains.clone(), "files")
        }
        EchoSource::Synth(spec) => (synthesize_series(spec)?, spec.strains.clone(), "synthetic"),
    };
    if traces.is_empty() {
        return Err(CliError::Invalid("no traces".into()));
    }
    let opts = EchoFitOptions {
        window: args.window,
        lm: LmOptions { restarts: args.restarts, seed: args.seed, ..LmOptions::default() },
        ..EchoFitOptions::default()
    };
    let mut meta = base_meta(ctx, "echo");
    meta.push("source", source);
    meta.push("window", format!("{:?}", args.window).to_lowercase());
    let (fits, line) = if strains.len() >= 3 {
        let s = extract_shift_series(&traces, &strains, &opts)?;
        meta.push("slope_Hz", s.line.slope);
        meta.push("slope_se_Hz", s.line.slope_se);
        meta.push("intercept_Hz", s.line.intercept);
        (s.fits, Some(s.line))
    } else {
        (traces.iter().map(|t| fit_trace(t, &opts)).collect::<std::result::Result<Vec<_>, _>>()?, None)
    };
    let rows: Vec<EchoRow> = fits
        .iter()
        .enumerate()
        .map(|(k, f)| EchoRow {
            index: k,
            eps11: strains.get(k).copied(),
            detuning_hz: f.detuning_hz,
            sigma_hz: f.fit.params.sigma_hz,
            gamma_hz: f.fit.params.gamma_hz,
            bin_hz: f.bin_hz,
            rss: f.fit.rss,
        })
        .collect();
    table_output(meta, &rows, json!({ "line_fit": line }))
}

// fit

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitMode {
    Slope,
    Anisotropy,
}

impl std::str::FromStr for FitMode {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slope" => Ok(FitMode::Slope),
            "anisotropy" => Ok(FitMode::Anisotropy),
            _ => Err(CliError::Invalid(format!("unknown fit mode `{s}` (slope, anisotropy)"))),
        }
    }
}

pub struct FitArgs {
    pub dataset: PathBuf,
    pub mode: FitMode,
    pub donor: Option<String>,
    pub noise_sigma_hz: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitRow {
    pub quantity: String,
    pub fitted: f64,
    pub std_error: f64,
    pub theory: Option<f64>,
    pub theory_source: Option<String>,
    pub ratio: Option<f64>,
}

fn dataset_donor<'a>(ctx: &'a Context, records: &[MeasurementRecord], requested: Option<&str>) -> Result<&'a DonorSpecies> {
    let names: std::collections::BTreeSet<String> = records.iter().map(|r| r.donor.to_ascii_lowercase()).collect();
    let name = match requested {
        Some(n) => n.to_string(),
        None if names.len() == 1 => records[0].donor.clone(),
        None => return Err(CliError::Invalid("dataset holds several donors; pick one with --donor".into())),
    };
    let d = donor(ctx, &name)?;
    Ok(d)
}

/// Per-transition df/d eps_11: slope records directly, raw records by a
/// through-origin fit of df on eps11.
fn transition_slopes(records: &[MeasurementRecord]) -> Result<BTreeMap<HalfInt, f64>> {
    let mut groups: BTreeMap<HalfInt, (f64, f64, usize, bool)> = BTreeMap::new();
    for r in records {
        let g = groups.entry(r.m_i).or_insert((0.0, 0.0, 0, false));
        g.0 += r.eps11 * r.df_hz;
        g.1 += r.eps11 * r.eps11;
        g.2 += 1;
        g.3 |= r.is_slope();
    }
    groups
        .into_iter()
        .map(|(m, (sxy, sxx, n, slope))| {
            if slope && n > 1 {
                return Err(CliError::Invalid(format!("m_I = {m} has {n} slope records")));
            }
            Ok((m, sxy / sxx))
        })
        .collect()
}

pub fn fit(ctx: &Context, args: &FitArgs) -> Result<Output> {
    let all = read_records(&args.dataset)?;
    let d = dataset_donor(ctx, &all, args.donor.as_deref())?;
    let records: Vec<MeasurementRecord> = all
        .into_iter()
        .filter(|r| r.donor.eq_ignore_ascii_case(&d.name) || r.donor.eq_ignore_ascii_case(&d.isotope))
        .collect();
    if records.is_empty() {
        return Err(CliError::Invalid(format!("no records for {}", d.name)));
    }
    for r in &records {
        r.validate(d)?;
    }
    let table = transition_table(ctx, d, d.a0_hz)?;
    let mut meta = base_meta(ctx, "fit");
    meta.push("donor", &d.name);
    meta.push("records", records.len());
    meta.push("f_mw_Hz", ctx.config.drive_hz);
    match args.mode {
        FitMode::Slope => {
            meta.push("mode", "slope");
            let thetas: std::collections::BTreeSet<u64> = records.iter().map(|r| r.theta_rad.to_bits()).collect();
            if thetas.len() > 1 {
                return Err(CliError::Invalid("slope mode needs records at a single angle".into()));
            }
            let slopes = transition_slopes(&records)?;
            let mut y = Vec::new();
            let mut x = Vec::new();
            for (m, s) in &slopes {
                let tr = table.row(*m).ok_or_else(|| CliError::Invalid(format!("m_I = {m} has no allowed transition")))?;
                y.push(*s);
                x.push(tr.dfda);
            }
            let f = fit_slope_vs_dfda(&y, &x, &ctx.elastic)?;
            let (k, k_se) = f.k(d.a0_hz);
            let exp = resolved_params(ctx, d, ParameterSet::Experimental);
            let rows = vec![
                FitRow { quantity: "dA_deps11_Hz".into(), fitted: f.da_deps11_hz, std_error: f.da_deps11_se_hz, theory: None, theory_source: None, ratio: None },
                FitRow { quantity: "dA_dhs_Hz".into(), fitted: f.da_dhs_hz, std_error: f.da_dhs_se_hz, theory: None, theory_source: None, ratio: None },
                FitRow { quantity: "K".into(), fitted: k, std_error: k_se, theory: Some(exp.k), theory_source: Some("experimental".into()), ratio: Some(k / exp.k) },
            ];
            table_output(meta, &rows, json!({ "slope_fit": f }))
        }
        FitMode::Anisotropy => {
            meta.push("mode", "anisotropy");
            let f = fit_anisotropy(&records, d, &table, &ctx.elastic, args.noise_sigma_hz)?;
            let cmp = compare_with_theory(&f, d, &ctx.donors, &ctx.elastic, ctx.config.g_anisotropy);
            meta.push("condition_number", f.result.condition_number);
            meta.push("rss", f.result.rss);
            let rows: Vec<FitRow> = cmp
                .rows
                .iter()
                .map(|r| FitRow {
                    quantity: r.quantity.to_string(),
                    fitted: r.fitted,
                    std_error: r.fitted_se,
                    theory: Some(r.theory),
                    theory_source: Some(r.theory_source.to_string()),
                    ratio: Some(r.ratio),
                })
                .collect();
            let text = human_table(&rows);
            table_output(meta, &rows, json!({ "fit": f, "table": text }))
        }
    }
}

pub fn human_table(rows: &[FitRow]) -> String {
    let mut s = format!("{:<14} {:>14} {:>12} {:>14} {:>8}\n", "quantity", "fitted", "std_error", "theory", "ratio");
    for r in rows {
        let th = r.theory.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
        let ra = r.ratio.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
        s.push_str(&format!("{:<14} {:>14.6e} {:>12.3e} {:>14} {:>8}\n", r.quantity, r.fitted, r.std_error, th, ra));
    }
    s
}

// report

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub donor: String,
    pub parameter_set: String,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "K_err")]
    pub k_err: Option<f64>,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub beta_vrm: f64,
    pub beta_shear: f64,
    #[serde(rename = "dA_deps11_Hz")]
    pub da_deps11_hz: f64,
    #[serde(rename = "dA_dhs_Hz")]
    pub da_dhs_hz: f64,
}

pub fn report(ctx: &Context, donor_name: Option<&str>) -> Result<Output> {
    let donors: Vec<&DonorSpecies> = match donor_name {
        Some(n) => vec![donor(ctx, n)?],
        None => ctx.donors.donors().collect(),
    };
    let h = hydrostatic_fraction_110(&ctx.elastic);
    let mut rows = Vec::new();
    for d in donors {
        for set in ParameterSet::ALL {
            let p = resolved_params(ctx, d, set);
            rows.push(ReportRow {
                donor: d.name.clone(),
                parameter_set: set.to_string(),
                k: p.k,
                k_err: p.errors.map(|e| e.k),
                l: p.l,
                n: p.n,
                beta_vrm: p.beta_vrm,
                beta_shear: p.beta_shear,
                da_deps11_hz: d.a0_hz * p.k * h,
                da_dhs_hz: d.a0_hz * p.k,
            });
        }
    }
    let mut meta = base_meta(ctx, "report");
    meta.push("hydrostatic_fraction_110", h);
    meta.push("k1", ctx.elastic.k1());
    meta.push("k2", ctx.elastic.k2());
    meta.push("g_anisotropy", format!("{:?}", ctx.config.g_anisotropy).to_lowercase());
    table_output(meta, &rows, json!({}))
}
