use friedlander::airy::{airy_zero, AiryTable};
use friedlander::gallery::{gallery_report, GalleryReport};
use friedlander::parametrix::{caustic_times, NWindow, ParametrixModel, PhaseSpec};
use friedlander::spectral::{linspace, GridSpec, ModelParams, SpectralModel};
use friedlander::verify::{
    airy_poisson_check, bump, compare_paths, decay_fit, envelope_report, envelope_stability, log_times, strichartz_from_scan,
    sup_scan, DecayReport, Envelope, EnvelopeGrid, Kernel, PathComparison, ScanOptions, StrichartzScan, SupPoint,
};
use friedlander::Sign;
use serde::{Deserialize, Serialize};

use crate::config::{PathChoice, RunConfig};
use crate::output::{emit, fmt_f64, json_bytes, Table};
use crate::{CliError, Command, GlobalArgs};

pub fn dispatch(cmd: &Command, cfg: &RunConfig, g: &GlobalArgs) -> Result<bool, CliError> {
    let out = g.out.as_deref();
    let secondary = |bytes: Vec<u8>| -> Result<(), CliError> {
        match &g.report {
            Some(p) => emit(Some(p), &bytes),
            None => {
                eprint!("{}", String::from_utf8_lossy(&bytes));
                Ok(())
            }
        }
    };
    match cmd {
        Command::AiryTable { .. } => {
            emit(out, &airy_table(cfg.airy_table.kmax)?.to_bytes())?;
            Ok(true)
        }
        Command::PoissonCheck { .. } => {
            let r = poisson(cfg)?;
            emit(out, &json_bytes(&r))?;
            Ok(r.pass)
        }
        Command::GreenEval { .. } => {
            emit(out, &green_eval(cfg)?.to_bytes())?;
            Ok(true)
        }
        Command::ComparePaths { .. } => {
            let r = compare(cfg)?;
            emit(out, &json_bytes(&r))?;
            Ok(r.pass)
        }
        Command::DispersionScan { .. } => {
            let (scan, rep) = dispersion(cfg)?;
            emit(out, &scan_table(&scan).to_bytes())?;
            secondary(json_bytes(&rep))?;
            Ok(rep.pass)
        }
        Command::EnvelopeReport { .. } => {
            let (rep, dump) = envelope(cfg)?;
            emit(out, &json_bytes(&rep))?;
            if let (Some(path), Some(t)) = (&cfg.envelope.dump, dump) {
                emit(Some(std::path::Path::new(path)), &t.to_bytes())?;
            }
            Ok(rep.report.pass)
        }
        Command::CausticScan { .. } => {
            let (scan, rep) = caustic(cfg)?;
            emit(out, &scan_table(&scan).to_bytes())?;
            secondary(json_bytes(&rep))?;
            Ok(rep.pass)
        }
        Command::StrichartzScan { .. } => {
            let (scan, rep) = strichartz(cfg)?;
            emit(out, &scan_table(&scan).to_bytes())?;
            secondary(json_bytes(&rep))?;
            Ok(true)
        }
        Command::GalleryScan { .. } => {
            let (rows, rep) = gallery(cfg)?;
            emit(out, &gallery_table(&rows).to_bytes())?;
            secondary(json_bytes(&rep))?;
            Ok(rep.pass)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsOut {
    pub h: f64,
    pub gamma: f64,
    pub a: f64,
}

impl From<&ModelParams> for ParamsOut {
    fn from(p: &ModelParams) -> Self {
        Self { h: p.h, gamma: p.gamma, a: p.a }
    }
}

/// JSON report in the shared schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub prop_id: String,
    pub params: ParamsOut,
    pub grid: String,
    pub fitted_slope: f64,
    pub expected_slope: f64,
    pub ci: f64,
    pub max_ratio: f64,
    pub pass: bool,
}

impl From<&DecayReport> for Report {
    fn from(r: &DecayReport) -> Self {
        Self {
            prop_id: r.envelope_name.clone(),
            params: (&r.params).into(),
            grid: r.grid_spec.clone(),
            fitted_slope: r.fitted_slope,
            expected_slope: r.expected_slope,
            ci: r.slope_ci,
            max_ratio: r.max_ratio,
            pass: r.pass,
        }
    }
}

pub fn airy_table(kmax: usize) -> Result<Table, CliError> {
    let t = AiryTable::new(kmax)?;
    let mut out = Table::new(&["k", "omega", "l_prime"]);
    for (i, (w, lp)) in t.zeros().iter().zip(t.l_prime()).enumerate() {
        out.push(vec![(i + 1).to_string(), fmt_f64(*w), fmt_f64(*lp)]);
    }
    Ok(out)
}

/// Parses a table written by [`airy_table`].
pub fn read_airy_table(bytes: &[u8]) -> Result<AiryTable, CliError> {
    let mut r = csv::Reader::from_reader(bytes);
    let (mut zeros, mut lps) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Usage(format!("airy table: {e}")))?;
        let num = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::Usage(format!("airy table: bad field {i} in {rec:?}")))
        };
        zeros.push(num(1)?);
        lps.push(num(2)?);
    }
    Ok(AiryTable::from_parts(zeros, lps)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonReport {
    pub center: usize,
    pub omega_center: f64,
    pub width: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
    pub relative: bool,
    pub n_max: u32,
    pub k_max: usize,
    pub tol: f64,
    pub pass: bool,
}

pub fn poisson(cfg: &RunConfig) -> Result<PoissonReport, CliError> {
    let c = &cfg.poisson;
    let w = airy_zero(c.center)?;
    let phi = bump(w, c.width);
    let r = airy_poisson_check(&phi, (w - 0.5 * c.width, w + 0.5 * c.width), c.nmax, c.kmax)?;
    Ok(PoissonReport {
        center: c.center,
        omega_center: w,
        width: c.width,
        lhs: r.lhs,
        rhs: r.rhs,
        rel_error: r.error,
        relative: r.relative,
        n_max: r.n_max,
        k_max: r.k_max,
        tol: c.tol,
        pass: r.error <= c.tol,
    })
}

pub fn green_eval(cfg: &RunConfig) -> Result<Table, CliError> {
    let c = &cfg.green;
    let p = cfg.model.params()?;
    let spec = match c.path {
        PathChoice::Spectral | PathChoice::Both => Some(SpectralModel::new(p)?.field(c.sign, &c.t, &c.x, &c.y)?),
        PathChoice::Parametrix => None,
    };
    let par = match c.path {
        PathChoice::Parametrix | PathChoice::Both => Some(ParametrixModel::new(p, c.window)?.field(c.sign, &c.t, &c.x, &c.y)?),
        PathChoice::Spectral => None,
    };
    let mut header = vec!["t", "x", "y"];
    match c.path {
        PathChoice::Both => header.extend(["spectral_re", "spectral_im", "parametrix_re", "parametrix_im", "abs_diff"]),
        _ => header.extend(["re", "im"]),
    }
    let mut out = Table::new(&header);
    let mut i = 0;
    for &t in &c.t {
        for &x in &c.x {
            for &y in &c.y {
                let mut row = vec![fmt_f64(t), fmt_f64(x), fmt_f64(y)];
                let vals: Vec<_> = [&spec, &par].iter().filter_map(|f| f.as_ref().map(|f| f.values[i])).collect();
                for v in &vals {
                    row.push(fmt_f64(v.re));
                    row.push(fmt_f64(v.im));
                }
                if vals.len() == 2 {
                    row.push(fmt_f64((vals[0] - vals[1]).norm()));
                }
                out.push(row);
                i += 1;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub params: ParamsOut,
    pub sign: Sign,
    pub grid: String,
    pub window: NWindow,
    #[serde(flatten)]
    pub comparison: PathComparison,
    /// sup|G_spec|·h²/√γ.
    pub normalized_sup: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn compare(cfg: &RunConfig) -> Result<CompareReport, CliError> {
    let c = &cfg.compare;
    let p = cfg.model.params()?;
    let grid = GridSpec::default_for(&p, c.nt, c.nx, c.ny, c.t_max);
    let r = compare_paths(&p, c.sign, &grid, c.window)?;
    Ok(CompareReport {
        params: (&p).into(),
        sign: c.sign,
        grid: format!("{}x{}x{} t in [0, {}]", c.nt, c.nx, c.ny, c.t_max),
        window: c.window,
        normalized_sup: r.sup_spectral * p.h * p.h / p.gamma.sqrt(),
        pass: r.error <= c.tol,
        comparison: r,
        tol: c.tol,
    })
}

fn scan_opts(dx: f64, dy: f64, polish: bool) -> ScanOptions {
    ScanOptions { dx_over_h: dx, dy_over_h: dy, polish }
}

pub fn scan_table(scan: &[SupPoint]) -> Table {
    let mut t = Table::new(&["t", "sup", "x", "y"]);
    for s in scan {
        t.push(vec![fmt_f64(s.t), fmt_f64(s.sup), fmt_f64(s.x), fmt_f64(s.y)]);
    }
    t
}

pub fn dispersion(cfg: &RunConfig) -> Result<(Vec<SupPoint>, Report), CliError> {
    let c = &cfg.dispersion;
    let p = cfg.model.params()?;
    let lo = c.t_min.unwrap_or(p.h / p.gamma);
    let hi = c.t_max.unwrap_or(p.gamma.sqrt());
    if !(lo > 0.0 && hi > lo) {
        return Err(CliError::Usage(format!("dispersion scan needs 0 < t_min < t_max, got [{lo}, {hi}]")));
    }
    let ts = log_times(lo, hi, c.per_decade);
    let scan = sup_scan(&p, c.kernel, &ts, &scan_opts(c.dx_over_h, c.dy_over_h, c.polish))?;
    let range = (c.fit_min.unwrap_or(lo), c.fit_max.unwrap_or(hi));
    let fit = decay_fit(&scan, range, c.expected_slope, c.tol, &p)?;
    Ok((scan, (&fit).into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeOut {
    #[serde(flatten)]
    pub report: Report,
    pub n: i64,
    pub lambda: f64,
    pub drift_h: Option<f64>,
    pub drift_grid: Option<f64>,
    pub max_ratio_half_h: Option<f64>,
    pub max_ratio_fine_grid: Option<f64>,
}

pub fn envelope(cfg: &RunConfig) -> Result<(EnvelopeOut, Option<Table>), CliError> {
    let c = &cfg.envelope;
    let p = cfg.model.params()?;
    let env = Envelope::from_id(&c.prop).ok_or_else(|| CliError::Usage(format!("unknown envelope `{}`", c.prop)))?;
    let spec = PhaseSpec::new(c.n, p, env.regime())?;
    let mut grid = EnvelopeGrid::default_for(env, &spec);
    grid.ts = env.default_times(spec.lambda(), c.n, c.nt.max(2));
    grid.xs = linspace(0.0, 2.0, c.nx.max(2));
    if let Some(dy) = c.dy {
        grid.dy = dy;
    }
    let mut out = if c.stability {
        let s = envelope_stability(env, &p, &grid)?;
        let mut report: Report = (&s.base).into();
        report.pass = s.pass;
        EnvelopeOut {
            report,
            n: c.n,
            lambda: spec.lambda(),
            drift_h: Some(s.drift_h),
            drift_grid: Some(s.drift_grid),
            max_ratio_half_h: Some(s.half_h.max_ratio),
            max_ratio_fine_grid: Some(s.fine_grid.max_ratio),
        }
    } else {
        let r = envelope_report(env, &p, &grid)?;
        EnvelopeOut {
            report: (&r).into(),
            n: c.n,
            lambda: spec.lambda(),
            drift_h: None,
            drift_grid: None,
            max_ratio_half_h: None,
            max_ratio_fine_grid: None,
        }
    };
    out.report.prop_id = String::from(env.id());
    let dump = if c.dump.is_some() { Some(term_dump(env, &spec, &grid)?) } else { None };
    Ok((out, dump))
}

/// Per-N term values on the envelope grid.
pub fn term_dump(env: Envelope, spec: &PhaseSpec, grid: &EnvelopeGrid) -> Result<Table, CliError> {
    let model = ParametrixModel::new(spec.params, NWindow::Fixed(0))?;
    let ns: Vec<i64> = if env == Envelope::Tpp9 { (-2..=2).collect() } else { vec![spec.n] };
    let mut out = Table::new(&["N", "T", "X", "Y", "re", "im", "envelope_name", "envelope_value"]);
    for &tt in &grid.ts {
        let (ylo, yhi) = grid.y_range(tt);
        let ny = (((yhi - ylo) / grid.dy).ceil() as usize + 1).max(2);
        let yys = linspace(ylo, yhi, ny);
        let (t, _, _) = spec.to_physical(tt, 0.0, 0.0);
        let xs: Vec<f64> = grid.xs.iter().map(|&xx| spec.to_physical(tt, xx, 0.0).1).collect();
        let ys: Vec<f64> = yys.iter().map(|&yy| spec.to_physical(tt, 0.0, yy).2).collect();
        let fields = model.terms(Sign::Plus, &[t], &xs, &ys, &ns)?;
        let ev = env.value(spec, tt);
        for (n, f) in ns.iter().zip(&fields) {
            for (ix, xx) in grid.xs.iter().enumerate() {
                for (iy, yy) in yys.iter().enumerate() {
                    let v = f.at(0, ix, iy);
                    out.push(vec![
                        n.to_string(),
                        fmt_f64(tt),
                        fmt_f64(*xx),
                        fmt_f64(*yy),
                        fmt_f64(v.re),
                        fmt_f64(v.im),
                        String::from(env.id()),
                        fmt_f64(ev),
                    ]);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausticHit {
    pub n: i64,
    pub t_caustic: f64,
    /// Nearest interior local maximum of sup|G| in t, if any.
    pub nearest_max: Option<f64>,
    pub distance: Option<f64>,
    pub cell: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausticReport {
    pub params: ParamsOut,
    pub kernel: Kernel,
    pub local_maxima: Vec<f64>,
    pub caustics: Vec<CausticHit>,
    pub pass: bool,
}

/// Interior samples at least as large as both neighbours and strictly larger than one.
pub fn local_maxima(scan: &[SupPoint]) -> Vec<f64> {
    scan.windows(3)
        .filter(|w| w[1].sup >= w[0].sup && w[1].sup >= w[2].sup && (w[1].sup > w[0].sup || w[1].sup > w[2].sup))
        .map(|w| w[1].t)
        .collect()
}

pub fn caustic(cfg: &RunConfig) -> Result<(Vec<SupPoint>, CausticReport), CliError> {
    let c = &cfg.caustic;
    let p = cfg.model.params()?;
    let times: Vec<(i64, f64)> = c.n.iter().map(|&n| caustic_times(p.a, n).map(|t| (n, t))).collect::<Result<_, _>>()?;
    let last = times.iter().map(|x| x.1.abs()).fold(0.0, f64::max);
    let t_max = c.t_max.unwrap_or(1.25 * last);
    if !(t_max > 0.0) || c.nt < 3 {
        return Err(CliError::Usage(String::from("caustic scan needs t_max > 0 and nt >= 3")));
    }
    let ts = linspace(0.0, t_max, c.nt);
    let cell = ts[1] - ts[0];
    let scan = sup_scan(&p, c.kernel, &ts, &scan_opts(c.dx_over_h, c.dy_over_h, true))?;
    let maxima = local_maxima(&scan);
    let caustics: Vec<CausticHit> = times
        .iter()
        .map(|&(n, tc)| {
            let nearest = maxima.iter().copied().min_by(|a, b| (a - tc).abs().total_cmp(&(b - tc).abs()));
            let distance = nearest.map(|m| (m - tc).abs());
            CausticHit { n, t_caustic: tc, nearest_max: nearest, distance, cell, pass: distance.is_some_and(|d| d <= cell) }
        })
        .collect();
    let pass = caustics.iter().all(|h| h.pass);
    Ok((scan, CausticReport { params: (&p).into(), kernel: c.kernel, local_maxima: maxima, caustics, pass }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzOut {
    pub params: ParamsOut,
    pub kernel: Kernel,
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
    #[serde(flatten)]
    pub scan: StrichartzScan,
}

pub fn strichartz(cfg: &RunConfig) -> Result<(Vec<SupPoint>, StrichartzOut), CliError> {
    let c = &cfg.strichartz;
    let p = cfg.model.params()?;
    let t_max = c.t_max.unwrap_or(p.gamma.sqrt());
    if !(t_max > c.t_min) || c.nt < 2 {
        return Err(CliError::Usage(String::from("strichartz scan needs t_max > t_min and nt >= 2")));
    }
    let ts = linspace(c.t_min, t_max, c.nt);
    let scan = sup_scan(&p, c.kernel, &ts, &scan_opts(c.dx_over_h, c.dy_over_h, true))?;
    let s = strichartz_from_scan(&scan, c.q, &p)?;
    Ok((scan, StrichartzOut { params: (&p).into(), kernel: c.kernel, t_min: c.t_min, t_max, nt: c.nt, scan: s }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryOut {
    pub h: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub strichartz_min: f64,
    pub strichartz_max: f64,
    pub spread: f64,
    pub max_spread: f64,
    /// Worst ‖u_k‖_{L⁴L^∞}/(sup‖Γ‖_{L¹}‖w_k‖_{L⁴L^∞}).
    pub chain_max: f64,
    /// argmax_x‖Γ_x‖_{L¹}/(h^{2/3}ω_k), one per k.
    pub saturation: Vec<f64>,
    pub pass: bool,
}

pub fn gallery(cfg: &RunConfig) -> Result<(Vec<GalleryReport>, GalleryOut), CliError> {
    let c = &cfg.gallery;
    let h = c.h.unwrap_or(cfg.model.h);
    if c.k_min == 0 || c.k_max < c.k_min {
        return Err(CliError::Usage(format!("gallery scan needs 1 <= k_min <= k_max, got {}..{}", c.k_min, c.k_max)));
    }
    let ks: Vec<usize> = (c.k_min..=c.k_max).collect();
    let rows = ks.iter().map(|&k| gallery_report(k, h)).collect::<Result<Vec<_>, _>>()?;
    let smin = rows.iter().map(|r| r.strichartz).fold(f64::INFINITY, f64::min);
    let smax = rows.iter().map(|r| r.strichartz).fold(0.0, f64::max);
    let spread = smax / smin;
    Ok((
        rows.clone(),
        GalleryOut {
            h,
            k_min: c.k_min,
            k_max: c.k_max,
            strichartz_min: smin,
            strichartz_max: smax,
            spread,
            max_spread: c.max_spread,
            chain_max: rows.iter().map(|r| r.chain_ratio()).fold(0.0, f64::max),
            saturation: rows.iter().map(|r| r.saturation_ratio()).collect(),
            pass: spread <= c.max_spread,
        },
    ))
}

pub fn gallery_table(rows: &[GalleryReport]) -> Table {
    let mut t = Table::new(&["k", "h", "strichartz_ratio", "gamma_l1_sup", "wk_decay_constant"]);
    for r in rows {
        t.push(vec![r.k.to_string(), fmt_f64(r.h), fmt_f64(r.strichartz), fmt_f64(r.gamma_l1_sup), fmt_f64(r.wk_constant)]);
    }
    t
}
