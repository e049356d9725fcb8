use std::fs;

use atlas_core::io::{ChartJson, ParamsJson, SystemJson};
use atlas_core::linalg::{orthogonality_residual, row_orthonormality_residual, spectral_radius, to_rows};
use atlas_core::pivot::matrix_has_pivot_structure;
use atlas_core::schur::{build_r, extract_state_space, recover_params, RealizationMatrix};
use atlas_core::sysid::{
    chart_condition, controllability_gramian, controllability_matrix, find_charts, input_normalize,
    observability_gramian, orthogonal_canonicalize, StateSpace, STABILITY_MARGIN,
};
use atlas_core::young::{enumerate_all, minimal_atlas, Chart};
use atlas_core::{Error, SchurParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::output;
use crate::{AtlasKind, Format};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// Largest `m * n` for which `check` searches the full atlas.
const CHECK_MAX_SIZE: usize = 24;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Argument(_)
            | Error::InvalidStructure(_)
            | Error::Dimension(_)
            | Error::Inadmissible(_)
            | Error::InvalidDiagram(_) => EXIT_USAGE,
            Error::SchurNorm { .. }
            | Error::Domain(_)
            | Error::Unstable { .. }
            | Error::RankDeficient(_)
            | Error::ChartMismatch { .. } => EXIT_NUMERICAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{path}: {e}")))
}

fn emit(text: &str, out: Option<&str>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::usage(format!("{path}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(value: &T, out: Option<&str>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    emit(&text, out)
}

pub fn enumerate(m: usize, n: usize, minimal: bool, format: Format, max_size: usize) -> Result<u8, CliError> {
    if m == 0 || n == 0 {
        return Err(CliError::usage("m and n must be positive"));
    }
    if m.saturating_mul(n) > max_size {
        return Err(CliError::usage(format!("m * n = {} exceeds the limit {max_size}", m * n)));
    }
    let charts = if minimal { minimal_atlas(m, n) } else { enumerate_all(m, n) };
    let text = match format {
        Format::Json => {
            let rows: Vec<output::IndexedChart> = charts
                .iter()
                .enumerate()
                .map(|(i, c)| output::IndexedChart {
                    index: i + 1,
                    chart: ChartJson::from(c),
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&rows).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => output::charts_csv(&charts).map_err(|e| CliError::usage(e.to_string()))?,
        Format::Text => output::charts_text(&charts),
    };
    emit(&text, None)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct RealizeValidation {
    orthogonality_residual: f64,
    spectral_radius: f64,
    stability_margin: f64,
    pivot_structure: bool,
    controllability_structure: bool,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct RealizeOutput {
    #[serde(flatten)]
    system: SystemJson,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    validation: RealizeValidation,
}

fn load_chart(path: &str) -> Result<Chart, CliError> {
    Ok(read_json::<ChartJson>(path)?.to_chart()?)
}

pub fn realize(chart: &str, params: &str, out: Option<&str>, tol: f64) -> Result<u8, CliError> {
    let chart = load_chart(chart)?;
    let params_json: ParamsJson = read_json(params)?;
    if (params_json.m, params_json.n) != (chart.m(), chart.n()) {
        return Err(CliError::usage(format!(
            "parameters are for m = {}, n = {}; chart is for m = {}, n = {}",
            params_json.m,
            params_json.n,
            chart.m(),
            chart.n()
        )));
    }
    let params = params_json.to_params()?;
    let r = build_r(&params, chart.u_idx())?;
    let (a, b) = (r.a(), r.b());
    let residual = r.orthogonality_residual();
    let radius = spectral_radius(&a);
    let k = controllability_matrix(&a, &b, chart.n())?;
    let pivot_ok = matrix_has_pivot_structure(&r.input_pair(), chart.j(), tol)?;
    let k_ok = matrix_has_pivot_structure(&k, chart.jtilde(), tol)?;
    let passed = residual <= tol && radius < 1.0 - STABILITY_MARGIN && pivot_ok && k_ok;
    let result = RealizeOutput {
        system: SystemJson::from(&extract_state_space(&r)),
        r: to_rows(r.matrix()),
        validation: RealizeValidation {
            orthogonality_residual: residual,
            spectral_radius: radius,
            stability_margin: 1.0 - radius,
            pivot_structure: pivot_ok,
            controllability_structure: k_ok,
            passed,
        },
    };
    emit_json(&result, out)?;
    if passed {
        Ok(EXIT_OK)
    } else {
        eprintln!("validation failed");
        Ok(EXIT_VALIDATION)
    }
}

#[derive(Debug, Serialize)]
struct CanonicalOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    chart_index: Option<usize>,
    chart: ChartJson,
    condition: f64,
    normalized: bool,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    t: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(flatten)]
    system: SystemJson,
}

pub fn canonicalize(
    system: &str,
    chart: Option<&str>,
    atlas: Option<AtlasKind>,
    tol: f64,
    out: Option<&str>,
) -> Result<u8, CliError> {
    let ss = read_json::<SystemJson>(system)?.to_state_space()?;
    let (m, n) = (ss.m(), ss.n());

    // bring a raw pair to input-normal form first
    let pair_residual = row_orthonormality_residual(&ss.input_pair());
    let (ss, t) = if pair_residual <= tol {
        (ss, None)
    } else {
        let normal = input_normalize(&ss.a, &ss.b)?;
        let t_inv = normal
            .t
            .clone()
            .try_inverse()
            .ok_or_else(|| CliError::numerical("normalizing transform is singular"))?;
        let c = ss.c.as_ref().map(|c| c * &t_inv);
        let next = StateSpace::new(normal.a, normal.b, c, ss.d.clone())?;
        (next, Some(normal.t))
    };

    let (index, chart) = match (chart, atlas) {
        (Some(path), _) => (None, load_chart(path)?),
        (None, Some(AtlasKind::Minimal)) => {
            let charts = minimal_atlas(m, n);
            let fits = find_charts(&ss.b, &ss.a, &charts, tol)?;
            let best = fits
                .iter()
                .min_by(|x, y| x.condition.total_cmp(&y.condition))
                .map(|f| (f.index, f.chart.clone()));
            match best {
                Some((i, c)) => (Some(i + 1), c),
                None => {
                    for (i, c) in charts.iter().enumerate() {
                        let cond = chart_condition(&ss.b, &ss.a, c)?;
                        eprintln!("chart {:>3} d = {:?}: condition {cond:.3e}", i + 1, c.dynamical_indices().as_slice());
                    }
                    return Err(CliError::numerical("no chart of the minimal atlas contains the system"));
                }
            }
        }
        (None, None) => return Err(CliError::usage("either --chart or --atlas is required")),
    };
    if (chart.m(), chart.n()) != (m, n) {
        return Err(CliError::usage(format!(
            "chart is for m = {}, n = {}; system has m = {m}, n = {n}",
            chart.m(),
            chart.n()
        )));
    }
    let canon = orthogonal_canonicalize(&ss.b, &ss.a, &chart, tol)?;
    let c = ss.c.as_ref().map(|c| c * canon.q.transpose());
    let result_ss = StateSpace::new(canon.a.clone(), canon.b.clone(), c, ss.d.clone())?;
    let result = CanonicalOutput {
        chart_index: index,
        chart: ChartJson::from(&chart),
        condition: canon.condition,
        normalized: t.is_some(),
        t: t.as_ref().map(to_rows),
        q: to_rows(&canon.q),
        system: SystemJson::from(&result_ss),
    };
    emit_json(&result, out)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct CheckItem {
    pub name: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub checks: Vec<CheckItem>,
}

fn item(name: &'static str, passed: bool, value: Option<f64>, detail: impl Into<String>) -> CheckItem {
    CheckItem {
        name,
        passed,
        value,
        detail: detail.into(),
    }
}

fn gramian_item(name: &'static str, w: atlas_core::Result<atlas_core::Gramian>, tol: f64) -> CheckItem {
    match w {
        Ok(w) => {
            let dist = w.distance_to_identity();
            item(name, dist <= tol, Some(dist), "max |W - I|")
        }
        Err(e) => item(name, false, None, e.to_string()),
    }
}

/// First chart of the full atlas whose structure `[B, A]` carries and, when
/// `R` is available, whose directions undo to a positive Hessenberg matrix.
fn chart_item(ss: &StateSpace, tol: f64) -> CheckItem {
    let (m, n) = (ss.m(), ss.n());
    if m * n > CHECK_MAX_SIZE {
        return item("chart_structure", false, None, format!("m * n above {CHECK_MAX_SIZE}, atlas not searched"));
    }
    let r = ss
        .realization_matrix()
        .filter(|r| r.is_square())
        .map(|r| RealizationMatrix::new(m, n, r).expect("square block matrix"));
    let ba = ss.input_pair();
    for (i, chart) in enumerate_all(m, n).iter().enumerate() {
        if !matrix_has_pivot_structure(&ba, chart.j(), tol).unwrap_or(false) {
            continue;
        }
        let hessenberg = match &r {
            Some(r) => recover_params(r, chart.u_idx(), tol).is_ok(),
            None => true,
        };
        if hessenberg {
            return item(
                "chart_structure",
                true,
                Some((i + 1) as f64),
                format!("chart {} with d = {:?}", i + 1, chart.dynamical_indices().as_slice()),
            );
        }
    }
    item("chart_structure", false, None, "no chart structure found")
}

pub fn check_report(ss: &StateSpace, tol: f64) -> CheckReport {
    let mut checks = Vec::new();
    match ss.realization_matrix().filter(|r| r.is_square()) {
        Some(r) => {
            let res = orthogonality_residual(&r);
            checks.push(item("orthogonality", res <= tol, Some(res), "max |R'R - I|"));
        }
        None => {
            let res = row_orthonormality_residual(&ss.input_pair());
            checks.push(item("orthogonality", res <= tol, Some(res), "max |[B,A][B,A]' - I|"));
        }
    }
    let radius = spectral_radius(&ss.a);
    checks.push(item(
        "stability",
        radius < 1.0 - STABILITY_MARGIN,
        Some(radius),
        "spectral radius of A",
    ));
    checks.push(gramian_item("controllability_gramian", controllability_gramian(&ss.a, &ss.b), tol));
    if let Some(c) = &ss.c {
        checks.push(gramian_item("observability_gramian", observability_gramian(c, &ss.a), tol));
    }
    checks.push(chart_item(ss, tol));
    CheckReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

pub fn check(system: &str, tol: f64, format: Format) -> Result<u8, CliError> {
    let ss = read_json::<SystemJson>(system)?.to_state_space()?;
    let report = check_report(&ss, tol);
    match format {
        Format::Json => emit_json(&report, None)?,
        Format::Text | Format::Csv => emit(&output::report_text(&report), None)?,
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_VALIDATION })
}

pub fn random(chart: &str, seed: u64, out: Option<&str>) -> Result<u8, CliError> {
    let chart = load_chart(chart)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = SchurParams::random(&mut rng, chart.m(), chart.n());
    emit_json(&ParamsJson::from(&params), out)?;
    Ok(EXIT_OK)
}
