//! Global maximum of the centered field over (-1, 1): a uniform mesh scan
//! followed by bounded Brent refinement of the best candidates.
//!
//! Between two consecutive eigenvalues log|p_N| is a sum of concave terms, and
//! the centering is a parabola, so f_N is strictly concave on every gap of the
//! spectrum. Each candidate is therefore refined over the whole gap that
//! contains it (located by Sturm bisection) rather than only over the adjacent
//! mesh cells; the refinement then always finds that gap's single peak.

use serde::{Deserialize, Serialize};

use crate::charpoly::CharPoly;
use crate::error::{Error, Result};
use crate::sampler::TridiagonalMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchParams {
    /// Mesh density Δ; the mesh is -1 + j/Δ, j = 0..=2Δ. `None` means 2N.
    pub delta: Option<usize>,
    pub top_k: usize,
    pub x_tol: f64,
    pub candidate_window: f64,
    pub max_iter: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self { delta: None, top_k: 16, x_tol: 1e-8, candidate_window: 1.5, max_iter: 200 }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.delta {
            if d < 8 {
                return Err(Error::InvalidParameter(format!("mesh density must be >= 8, got {d}")));
            }
        }
        if self.top_k == 0 {
            return Err(Error::InvalidParameter("top_k must be at least 1".into()));
        }
        if !(self.x_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("x_tol must be positive, got {}", self.x_tol)));
        }
        if !(self.candidate_window >= 0.0) {
            return Err(Error::InvalidParameter("candidate_window must be non-negative".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub fn mesh_density(&self, n: usize) -> usize {
        self.delta.unwrap_or(2 * n).max(8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxRecord {
    pub x_star: f64,
    pub m_star: f64,
    pub n: usize,
    pub seed: u64,
    pub refined_candidates: usize,
}

/// A scalar field on (-1, 1) that the search can maximise.
pub trait Landscape {
    fn value(&self, x: f64) -> f64;

    fn values(&self, xs: &[f64], out: &mut [f64]) {
        for (x, o) in xs.iter().zip(out.iter_mut()) {
            *o = self.value(*x);
        }
    }

    /// Label of the concave piece containing x, if the landscape knows one.
    fn piece_label(&self, _x: f64) -> Option<usize> {
        None
    }

    /// The concave piece containing x, clipped to [lo, hi].
    fn piece(&self, _x: f64, _lo: f64, _hi: f64) -> Option<(f64, f64)> {
        None
    }

    /// Singular points strictly inside (lo, hi), ascending.
    fn singularities(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }
}

/// Width below which eigenvalue bisection stops.
const EIGEN_TOL: f64 = 1e-12;

impl Landscape for CharPoly<'_> {
    fn value(&self, x: f64) -> f64 {
        self.field(x)
    }

    fn values(&self, xs: &[f64], out: &mut [f64]) {
        self.field_many(xs, out)
    }

    fn piece_label(&self, x: f64) -> Option<usize> {
        Some(self.eigenvalues_below(x))
    }

    fn piece(&self, x: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let c = self.eigenvalues_below(x);
        // Left end: the c-th eigenvalue, i.e. where the count drops below c.
        let left = if c == 0 || self.eigenvalues_below(lo) >= c {
            lo
        } else {
            let (mut a, mut b) = (lo, x);
            let mut step = 1.0 / self.n() as f64;
            while x - step > lo && self.eigenvalues_below(x - step) >= c {
                b = x - step;
                step *= 2.0;
            }
            if x - step > lo {
                a = x - step;
            }
            bisect(|t| self.eigenvalues_below(t) >= c, a, b)
        };
        let right = if self.eigenvalues_below(hi) <= c {
            hi
        } else {
            let (mut a, mut b) = (x, hi);
            let mut step = 1.0 / self.n() as f64;
            while x + step < hi && self.eigenvalues_below(x + step) <= c {
                a = x + step;
                step *= 2.0;
            }
            if x + step < hi {
                b = x + step;
            }
            bisect(|t| self.eigenvalues_below(t) > c, a, b)
        };
        Some((left, right))
    }

    fn singularities(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let (c_lo, c_hi) = (self.eigenvalues_below(lo), self.eigenvalues_below(hi));
        let mut a = lo;
        for target in c_lo + 1..=c_hi {
            let t = bisect(|t| self.eigenvalues_below(t) >= target, a, hi);
            if t > lo && t < hi {
                out.push(t);
            }
            a = t;
        }
        out
    }
}

/// Point where a monotone predicate (false at a, true at b) flips.
fn bisect(pred: impl Fn(f64) -> bool, mut a: f64, mut b: f64) -> f64 {
    while b - a > EIGEN_TOL {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if pred(m) {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

/// Bounded scalar minimisation (Brent: golden section with parabolic steps).
/// Returns (x, f(x), iterations).
pub fn brent_minimize(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    x_tol: f64,
    max_iter: usize,
) -> (f64, f64, usize) {
    let golden = 0.5 * (3.0 - 5f64.sqrt());
    let sqrt_eps = f64::EPSILON.sqrt();
    let (mut a, mut b) = (a, b);
    let mut x = a + golden * (b - a);
    let (mut v, mut w) = (x, x);
    let mut fx = f(x);
    let (mut fv, mut fw) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    let mut iter = 0;
    while iter < max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + x_tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        iter += 1;
        let mut golden_step = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x >= xm { a - x } else { b - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 { x + d } else if d > 0.0 { x + tol1 } else { x - tol1 };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx, iter)
}

/// Candidate mesh points of a landscape, best first.
#[derive(Debug, Clone)]
pub struct MeshScan {
    pub delta: usize,
    pub candidates: Vec<(f64, f64)>,
    /// Largest finite mesh value.
    pub best_value: f64,
    /// Median of the finite mesh values.
    pub median_value: f64,
}

pub fn mesh_points(delta: usize) -> Vec<f64> {
    let d = delta as f64;
    let edge = 1.0 - 1.0 / (4.0 * d);
    (0..=2 * delta)
        .map(|j| (-1.0 + j as f64 / d).clamp(-edge, edge))
        .collect()
}

pub fn mesh_scan_landscape<L: Landscape + ?Sized>(
    field: &L,
    delta: usize,
    params: &SearchParams,
) -> Result<MeshScan> {
    params.validate()?;
    let xs = mesh_points(delta);
    let mut fs = vec![0.0; xs.len()];
    field.values(&xs, &mut fs);
    let spacing = 1.0 / delta as f64;
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(xs.len());
    for (x, f) in xs.iter().zip(&fs) {
        let (x, f) = if f.is_finite() {
            (*x, *f)
        } else {
            // Landed on a singular point; nudge and retry once.
            let xp = x + 1e-2 * spacing * if *x > 0.0 { -1.0 } else { 1.0 };
            (xp, field.value(xp))
        };
        if f.is_finite() {
            points.push((x, f));
        }
    }
    if points.is_empty() {
        return Err(Error::SearchFailure("every mesh evaluation was degenerate".into()));
    }
    let mut sorted: Vec<f64> = points.iter().map(|p| p.1).collect();
    sorted.sort_by(f64::total_cmp);
    let median_value = sorted[sorted.len() / 2];
    points.sort_by(|p, q| q.1.total_cmp(&p.1));
    let best_value = points[0].1;
    let cutoff = best_value - params.candidate_window;
    let candidates = points.into_iter().take_while(|p| p.1 >= cutoff).take(params.top_k).collect();
    Ok(MeshScan { delta, candidates, best_value, median_value })
}

pub fn mesh_scan(m: &TridiagonalMatrix, params: &SearchParams) -> Result<MeshScan> {
    mesh_scan_landscape(&CharPoly::new(m), params.mesh_density(m.n()), params)
}

/// Maximise over a bracket, splitting it at singular points first.
pub fn refine_landscape<L: Landscape + ?Sized>(
    field: &L,
    bracket: (f64, f64),
    x_tol: f64,
    max_iter: usize,
) -> Result<(f64, f64)> {
    let (lo, hi) = bracket;
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!("empty bracket ({lo}, {hi})")));
    }
    let mut cuts = vec![lo];
    cuts.extend(field.singularities(lo, hi));
    cuts.push(hi);
    let mut best: Option<(f64, f64)> = None;
    for w in cuts.windows(2) {
        if let Some((x, f)) = maximize_piece(field, w[0], w[1], x_tol, max_iter) {
            if best.is_none_or(|b| f > b.1) {
                best = Some((x, f));
            }
        }
    }
    best.ok_or_else(|| {
        Error::SearchFailure(format!("no finite value of the field inside ({lo}, {hi})"))
    })
}

fn maximize_piece<L: Landscape + ?Sized>(
    field: &L,
    lo: f64,
    hi: f64,
    x_tol: f64,
    max_iter: usize,
) -> Option<(f64, f64)> {
    if !(hi - lo > 0.0) {
        return None;
    }
    let run = |a: f64, b: f64| {
        let (x, negf, _) = brent_minimize(|x| -field.value(x), a, b, x_tol, max_iter);
        let f = -negf;
        f.is_finite().then_some((x, f))
    };
    run(lo, hi).or_else(|| {
        let shrink = 0.25 * (hi - lo);
        run(lo + shrink, hi - shrink)
    })
}

pub fn refine_maximum(
    m: &TridiagonalMatrix,
    bracket: (f64, f64),
    params: &SearchParams,
) -> Result<(f64, f64)> {
    let (lo, hi) = bracket;
    if !(lo > -1.0 && hi < 1.0) {
        return Err(Error::OutOfDomain(format!("bracket ({lo}, {hi}) must lie inside (-1, 1)")));
    }
    refine_landscape(&CharPoly::new(m), bracket, params.x_tol, params.max_iter)
}

/// Mesh scan plus refinement; returns (x*, f*, number of refinements).
pub fn global_maximum_landscape<L: Landscape + ?Sized>(
    field: &L,
    delta: usize,
    params: &SearchParams,
) -> Result<(f64, f64, usize)> {
    let scan = mesh_scan_landscape(field, delta, params)?;
    let spacing = 1.0 / delta as f64;
    let edge = 1.0 - 1.0 / (4.0 * delta as f64);
    let mut seen = Vec::new();
    let (mut best_x, mut best_f) = scan.candidates[0];
    let mut refined = 0;
    for &(x, f) in &scan.candidates {
        let bracket = match field.piece_label(x) {
            Some(label) => {
                if seen.contains(&label) {
                    continue;
                }
                seen.push(label);
                field.piece(x, -edge, edge).unwrap_or((x - spacing, x + spacing))
            }
            None => ((x - spacing).max(-edge), (x + spacing).min(edge)),
        };
        refined += 1;
        let (rx, rf) = match field.piece_label(x) {
            Some(_) => maximize_piece(field, bracket.0, bracket.1, params.x_tol, params.max_iter)
                .ok_or_else(|| Error::SearchFailure(format!("refinement failed near x = {x}")))?,
            None => refine_landscape(field, bracket, params.x_tol, params.max_iter)?,
        };
        let (rx, rf) = if rf >= f { (rx, rf) } else { (x, f) };
        if rf > best_f {
            best_x = rx;
            best_f = rf;
        }
    }
    Ok((best_x, best_f, refined))
}

pub fn global_maximum(m: &TridiagonalMatrix, params: &SearchParams) -> Result<MaxRecord> {
    params.validate()?;
    let cp = CharPoly::new(m);
    let (x_star, m_star, refined) = global_maximum_landscape(&cp, params.mesh_density(m.n()), params)?;
    if !m_star.is_finite() {
        return Err(Error::SearchFailure(format!("non-finite maximum at x = {x_star}")));
    }
    Ok(MaxRecord { x_star, m_star, n: m.n(), seed: m.seed(), refined_candidates: refined })
}
