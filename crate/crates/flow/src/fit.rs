//! Iterated-logarithm exponent fits of trajectory eigenvalues.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::flow::Trajectory;
use crate::staralg::Ambient;
use crate::{Error, Result};

pub const BOOTSTRAP_RESAMPLES: usize = 200;
pub const FIT_SAMPLES: usize = 200;

/// Eigenvalue branches of a trajectory: one column per block eigenvalue in
/// ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenTable {
    pub times: Vec<f64>,
    pub columns: Vec<String>,
    /// Block of each column.
    pub blocks: Vec<usize>,
    /// `series[c][k]`: column c at sample k.
    pub series: Vec<Vec<f64>>,
}

impl EigenTable {
    pub fn from_trajectory(amb: &Ambient, traj: &Trajectory) -> EigenTable {
        let mut columns = Vec::new();
        let mut blocks = Vec::new();
        for (b, (&d, id)) in amb.dims.iter().zip(&amb.ids).enumerate() {
            for k in 0..d {
                columns.push(if d == 1 { format!("h[{id}]") } else { format!("h[{id}]_{k}") });
                blocks.push(b);
            }
        }
        let mut series = vec![Vec::with_capacity(traj.times.len()); columns.len()];
        for h in &traj.states {
            for (c, v) in h.eigenvalues().into_iter().flatten().enumerate() {
                series[c].push(v);
            }
        }
        EigenTable { times: traj.times.clone(), columns, blocks, series }
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W, precision: usize) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend(self.columns.iter().cloned());
        out.write_record(&header).map_err(io_err)?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:.precision$e}")];
            row.extend(self.series.iter().map(|s| format!("{:.precision$e}", s[k])));
            out.write_record(&row).map_err(io_err)?;
        }
        out.flush().map_err(|e| Error::Io(e.to_string()))
    }

    /// Reads a table written by [`EigenTable::write_csv`]; blocks are
    /// recovered from the `h[id]` column names.
    pub fn read_csv<R: std::io::Read>(r: R) -> Result<EigenTable> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
        let header = rdr.headers().map_err(io_err)?.clone();
        if header.get(0) != Some("t") || header.len() < 2 {
            return Err(Error::Parse("first column must be t, followed by eigenvalue columns".into()));
        }
        let columns: Vec<String> = header.iter().skip(1).map(String::from).collect();
        let mut ids: Vec<String> = Vec::new();
        let mut blocks = Vec::new();
        for c in &columns {
            let id = c
                .strip_prefix("h[")
                .and_then(|s| s.rsplit_once(']'))
                .map(|(id, _)| id.to_string())
                .ok_or_else(|| Error::Parse(format!("column {c:?} is not of the form h[id]")))?;
            let b = ids.iter().position(|x| *x == id).unwrap_or_else(|| {
                ids.push(id);
                ids.len() - 1
            });
            blocks.push(b);
        }
        let mut times = Vec::new();
        let mut series = vec![Vec::new(); columns.len()];
        for rec in rdr.records() {
            let rec = rec.map_err(io_err)?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {s:?}")));
            times.push(parse(&rec[0])?);
            for (c, s) in series.iter_mut().enumerate() {
                s.push(parse(&rec[c + 1])?);
            }
        }
        Ok(EigenTable { times, columns, blocks, series })
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Coefficients on {log t, log log t, …, log^{(depth)} t, 1}.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub coefficients: Vec<f64>,
    /// Bootstrap standard errors.
    pub errors: Vec<f64>,
    pub condition: f64,
    pub samples: usize,
}

impl FitResult {
    /// Exponent of log^{(k)} t, k = 1-based.
    pub fn exponent(&self, k: usize) -> f64 {
        self.coefficients[k - 1]
    }
}

/// log^{(k)} t for k = 1..=depth, or `None` when undefined.
pub fn iterated_logs(t: f64, depth: usize) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(depth);
    let mut x = t;
    for _ in 0..depth {
        if !(x > 0.0) {
            return None;
        }
        x = x.ln();
        out.push(x);
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// Indices of the fit window: the last two decades, thinned to about
/// [`FIT_SAMPLES`] geometric points.
pub fn fit_window(times: &[f64], depth: usize) -> Result<Vec<usize>> {
    let (Some(&t_first), Some(&t_max)) = (times.first(), times.last()) else {
        return Err(Error::InsufficientRange("empty trajectory".into()));
    };
    let t_lo = t_max / 100.0;
    if t_max / t_first < 100.0 * (1.0 - 1e-9) {
        return Err(Error::InsufficientRange(format!("t spans [{t_first}, {t_max}], less than two decades")));
    }
    let idx: Vec<usize> = (0..times.len()).filter(|&k| times[k] >= t_lo * (1.0 - 1e-12)).collect();
    if iterated_logs(times[idx[0]], depth).is_none() {
        return Err(Error::InsufficientRange(format!("log^({depth}) t is undefined at t = {}", times[idx[0]])));
    }
    if idx.len() <= depth + 2 {
        return Err(Error::InsufficientRange(format!("only {} samples in the last two decades", idx.len())));
    }
    // Thin to geometric targets.
    let n = FIT_SAMPLES.min(idx.len());
    let mut picked: Vec<usize> = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let target = t_lo.ln() + (t_max / t_lo).ln() * k as f64 / (n - 1).max(1) as f64;
        while j + 1 < idx.len() && (times[idx[j + 1]].ln() - target).abs() <= (times[idx[j]].ln() - target).abs() {
            j += 1;
        }
        if picked.last() != Some(&idx[j]) {
            picked.push(idx[j]);
        }
    }
    Ok(picked)
}

/// Least squares with column-pivoted QR.
fn solve_ls(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let qr = a.clone().col_piv_qr();
    let (q, r, p) = (qr.q(), qr.r(), qr.p());
    let mut z = r
        .solve_upper_triangular(&(q.transpose() * y))
        .ok_or_else(|| Error::InsufficientRange("rank-deficient fit basis".into()))?;
    p.inv_permute_rows(&mut z);
    Ok(z)
}

/// Fits `values` (already logarithms) against the iterated-log basis.
pub fn fit_series(times: &[f64], values: &[f64], depth: usize, seed: u64) -> Result<FitResult> {
    if depth == 0 {
        return Err(Error::Invalid("depth must be at least 1".into()));
    }
    let idx = fit_window(times, depth)?;
    let n = idx.len();
    let k = depth + 1;
    let mut a = DMatrix::<f64>::zeros(n, k);
    let mut y = DVector::<f64>::zeros(n);
    for (row, &i) in idx.iter().enumerate() {
        let logs = iterated_logs(times[i], depth).expect("checked by fit_window");
        for (col, v) in logs.iter().enumerate() {
            a[(row, col)] = *v;
        }
        a[(row, depth)] = 1.0;
        y[row] = values[i];
    }
    let coef = solve_ls(&a, &y)?;
    let sv = a.clone().svd(false, false).singular_values;
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition = smax / smin;
    let fitted = &a * &coef;
    let resid = &y - &fitted;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0; k];
    let mut sum_sq = vec![0.0; k];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let yb = DVector::from_fn(n, |r, _| fitted[r] + resid[rng.gen_range(0..n)]);
        let cb = solve_ls(&a, &yb)?;
        for j in 0..k {
            sum[j] += cb[j];
            sum_sq[j] += cb[j] * cb[j];
        }
    }
    let m = BOOTSTRAP_RESAMPLES as f64;
    let errors = (0..k).map(|j| (sum_sq[j] / m - (sum[j] / m).powi(2)).max(0.0).sqrt()).collect();
    Ok(FitResult { coefficients: coef.iter().copied().collect(), errors, condition, samples: n })
}

/// One fit per eigenvalue branch.
pub fn fit_exponents(table: &EigenTable, depth: usize, seed: u64) -> Result<Vec<(String, FitResult)>> {
    table
        .columns
        .iter()
        .zip(&table.series)
        .enumerate()
        .map(|(c, (name, s))| {
            if let Some(v) = s.iter().find(|v| !(**v > 0.0)) {
                return Err(Error::Invalid(format!("{name}: non-positive eigenvalue {v}")));
            }
            let logs: Vec<f64> = s.iter().map(|v| v.ln()).collect();
            Ok((name.clone(), fit_series(&table.times, &logs, depth, seed.wrapping_add(c as u64))?))
        })
        .collect()
}

/// Fits the weighted mean Σ wᵢ log hᵢ / Σ wᵢ over each group of columns
/// (the τ-weighted normalized log-determinant of a compression).
pub fn fit_groups(
    table: &EigenTable,
    groups: &[(String, Vec<(usize, f64)>)],
    depth: usize,
    seed: u64,
) -> Result<Vec<(String, FitResult)>> {
    groups
        .iter()
        .enumerate()
        .map(|(g, (name, members))| {
            let total: f64 = members.iter().map(|(_, w)| w).sum();
            if members.is_empty() || !(total > 0.0) {
                return Err(Error::Invalid(format!("group {name} is empty")));
            }
            let vals: Vec<f64> = (0..table.times.len())
                .map(|k| members.iter().map(|&(c, w)| w * table.series[c][k].ln()).sum::<f64>() / total)
                .collect();
            Ok((name.clone(), fit_series(&table.times, &vals, depth, seed.wrapping_add(1000 + g as u64))?))
        })
        .collect()
}
