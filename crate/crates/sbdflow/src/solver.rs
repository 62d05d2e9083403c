//! Monolithic solution of the assembled sparse systems.
//!
//! Two methods: a sparse direct LU (pivoting, fill-reducing ordering) and a
//! restarted GMRES with an incomplete-LU (dual-threshold ILUT) right
//! preconditioner for systems too large to factor comfortably.

use crate::error::{Error, Result};
use crate::system::LinearSystem;
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use std::time::Instant;

/// Default unknown count above which `solve_auto` switches to GMRES.
pub const DIRECT_LU_MAX_DOFS: usize = 500_000;

const DIRECT_RESIDUAL_CHECK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    DirectLu,
    /// Restarted GMRES with ILUT preconditioning.
    Krylov,
}

/// Solution plus the quality and cost of obtaining it.
pub struct SolveReport {
    pub x: Vec<f64>,
    /// `||Ax-b||_2 / ||b||_2`, recomputed from the original matrix.
    pub rel_residual: f64,
    pub wall_s: f64,
    pub cpu_s: f64,
    pub method: &'static str,
    pub iterations: usize,
}

/// Process CPU time (user + system) in seconds.
pub fn cpu_time_s() -> f64 {
    let mut usage = std::mem::MaybeUninit::<libc::rusage>::uninit();
    let rc = unsafe { libc::getrusage(libc::RUSAGE_SELF, usage.as_mut_ptr()) };
    if rc != 0 {
        return 0.0;
    }
    let u = unsafe { usage.assume_init() };
    let tv = |t: libc::timeval| t.tv_sec as f64 + t.tv_usec as f64 * 1e-6;
    tv(u.ru_utime) + tv(u.ru_stime)
}

/// Solve with the requested method. `tol` is the relative-residual target
/// (Krylov stopping criterion; the direct path checks against a fixed
/// `1e-10` default when `tol` is not finite).
pub fn solve(sys: &LinearSystem, method: Method, tol: f64) -> Result<SolveReport> {
    let wall = Instant::now();
    let cpu0 = cpu_time_s();
    let (x, iterations, method_name) = match method {
        Method::DirectLu => (direct_lu(sys)?, 1, "direct-lu"),
        Method::Krylov => {
            if !(tol > 0.0) {
                return Err(Error::Solver("Krylov requires tol > 0".into()));
            }
            let (x, it) = gmres_ilut(sys, tol)?;
            (x, it, "gmres-ilut")
        }
    };
    let rel_residual = sys.relative_residual(&x);
    let check = if method == Method::DirectLu && !(tol > 0.0) { DIRECT_RESIDUAL_CHECK } else { tol };
    if !rel_residual.is_finite() || rel_residual > check.max(1e-30) {
        return Err(Error::Solver(format!(
            "solution rejected: relative residual {rel_residual:.3e} exceeds {check:.3e}"
        )));
    }
    Ok(SolveReport {
        x,
        rel_residual,
        wall_s: wall.elapsed().as_secs_f64(),
        cpu_s: cpu_time_s() - cpu0,
        method: method_name,
        iterations,
    })
}

/// Direct LU below `DIRECT_LU_MAX_DOFS` unknowns, GMRES above.
pub fn solve_auto(sys: &LinearSystem, tol: f64) -> Result<SolveReport> {
    if sys.n <= DIRECT_LU_MAX_DOFS {
        solve(sys, Method::DirectLu, tol)
    } else {
        solve(sys, Method::Krylov, tol)
    }
}

fn direct_lu(sys: &LinearSystem) -> Result<Vec<f64>> {
    let mut trips = Vec::with_capacity(sys.nnz());
    for r in 0..sys.n {
        for k in sys.row_ptr[r]..sys.row_ptr[r + 1] {
            trips.push(Triplet::new(r, sys.col_idx[k] as usize, sys.values[k]));
        }
    }
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(sys.n, sys.n, &trips)
        .map_err(|e| Error::Solver(format!("matrix construction failed: {e:?}")))?;
    let lu = a.sp_lu().map_err(|e| Error::Solver(format!("sparse LU failed (singular matrix?): {e:?}")))?;
    let b = faer::Mat::from_fn(sys.n, 1, |i, _| sys.rhs[i]);
    let x = lu.solve(&b);
    Ok((0..sys.n).map(|i| x[(i, 0)]).collect())
}

// ------------------------------------------------------------------- ILUT

/// Dual-threshold incomplete LU (drop tolerance + fill cap per row),
/// following the classical row-wise IKJ formulation.
struct Ilut {
    n: usize,
    // L strictly lower (unit diagonal implied), U upper including diagonal
    l_ptr: Vec<usize>,
    l_col: Vec<u32>,
    l_val: Vec<f64>,
    u_ptr: Vec<usize>,
    u_col: Vec<u32>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
}

impl Ilut {
    fn factor(sys: &LinearSystem, row_scale: &[f64], tau: f64, max_fill: usize) -> Result<Self> {
        let n = sys.n;
        let mut l_ptr = vec![0usize; n + 1];
        let mut l_col: Vec<u32> = Vec::new();
        let mut l_val: Vec<f64> = Vec::new();
        let mut u_ptr = vec![0usize; n + 1];
        let mut u_col: Vec<u32> = Vec::new();
        let mut u_val: Vec<f64> = Vec::new();
        let mut u_diag = vec![0.0f64; n];
        // first U entry per row is the diagonal for fast pivot lookup
        let mut w = vec![0.0f64; n];
        let mut pattern: Vec<u32> = Vec::new();
        let mut in_pattern = vec![false; n];

        for i in 0..n {
            // load row i
            let mut row_norm = 0.0;
            for k in sys.row_ptr[i]..sys.row_ptr[i + 1] {
                let c = sys.col_idx[k];
                let v = sys.values[k] * row_scale[i];
                w[c as usize] += v;
                if !in_pattern[c as usize] {
                    in_pattern[c as usize] = true;
                    pattern.push(c);
                }
                row_norm += v * v;
            }
            let drop_tol = tau * row_norm.sqrt();
            // eliminate using previous rows in increasing column order
            pattern.sort_unstable();
            let mut kpos = 0;
            while kpos < pattern.len() {
                let kcol = pattern[kpos] as usize;
                if kcol >= i {
                    break;
                }
                let factor = w[kcol] / u_diag[kcol];
                w[kcol] = factor;
                if factor.abs() > drop_tol * 0.1 {
                    // subtract factor * U(kcol, :)
                    for t in u_ptr[kcol] + 1..u_ptr[kcol + 1] {
                        let c = u_col[t];
                        let upd = factor * u_val[t];
                        if in_pattern[c as usize] {
                            w[c as usize] -= upd;
                        } else if upd.abs() > drop_tol {
                            in_pattern[c as usize] = true;
                            w[c as usize] = -upd;
                            // insert keeping sorted order beyond kpos
                            let ins = pattern[kpos + 1..].partition_point(|&pc| pc < c) + kpos + 1;
                            pattern.insert(ins, c);
                        }
                    }
                }
                kpos += 1;
            }
            // gather, drop and cap
            let mut lower: Vec<(u32, f64)> = Vec::new();
            let mut upper: Vec<(u32, f64)> = Vec::new();
            let mut diag = 0.0;
            for &c in &pattern {
                let v = w[c as usize];
                w[c as usize] = 0.0;
                in_pattern[c as usize] = false;
                let cu = c as usize;
                if cu < i {
                    if v.abs() > drop_tol * 0.1 {
                        lower.push((c, v));
                    }
                } else if cu == i {
                    diag = v;
                } else if v.abs() > drop_tol {
                    upper.push((c, v));
                }
            }
            pattern.clear();
            keep_largest(&mut lower, max_fill);
            keep_largest(&mut upper, max_fill);
            lower.sort_unstable_by_key(|e| e.0);
            upper.sort_unstable_by_key(|e| e.0);
            if diag.abs() < 1e-300 {
                // pivot floor keeps the factorization usable as a preconditioner
                diag = if diag >= 0.0 { 1e-300_f64.max(drop_tol) } else { -(1e-300_f64.max(drop_tol)) };
            }
            u_diag[i] = diag;
            for (c, v) in lower {
                l_col.push(c);
                l_val.push(v);
            }
            l_ptr[i + 1] = l_col.len();
            u_col.push(i as u32);
            u_val.push(diag);
            for (c, v) in upper {
                u_col.push(c);
                u_val.push(v);
            }
            u_ptr[i + 1] = u_col.len();
        }
        Ok(Self { n, l_ptr, l_col, l_val, u_ptr, u_col, u_val, u_diag })
    }

    /// Solve `L U z = r` in place.
    fn apply(&self, r: &mut [f64]) {
        for i in 0..self.n {
            let mut s = r[i];
            for k in self.l_ptr[i]..self.l_ptr[i + 1] {
                s -= self.l_val[k] * r[self.l_col[k] as usize];
            }
            r[i] = s;
        }
        for i in (0..self.n).rev() {
            let mut s = r[i];
            for k in self.u_ptr[i] + 1..self.u_ptr[i + 1] {
                s -= self.u_val[k] * r[self.u_col[k] as usize];
            }
            r[i] = s / self.u_diag[i];
        }
    }
}

fn keep_largest(v: &mut Vec<(u32, f64)>, cap: usize) {
    if v.len() > cap {
        v.sort_unstable_by(|a, b| b.1.abs().partial_cmp(&a.1.abs()).unwrap());
        v.truncate(cap);
    }
}

const GMRES_RESTART: usize = 120;
const GMRES_MAX_OUTER: usize = 60;
const ILUT_TAU: f64 = 1e-5;
const ILUT_MAX_FILL: usize = 40;

/// Right-preconditioned restarted GMRES. Rows are equilibrated before
/// factorization; convergence is measured on the original system.
fn gmres_ilut(sys: &LinearSystem, tol: f64) -> Result<(Vec<f64>, usize)> {
    let n = sys.n;
    // row equilibration
    let mut scale = vec![1.0f64; n];
    for i in 0..n {
        let mut m = 0.0f64;
        for k in sys.row_ptr[i]..sys.row_ptr[i + 1] {
            m = m.max(sys.values[k].abs());
        }
        scale[i] = if m > 0.0 { 1.0 / m } else { 1.0 };
    }
    let ilut = Ilut::factor(sys, &scale, ILUT_TAU, ILUT_MAX_FILL)?;
    let scaled_rhs: Vec<f64> = (0..n).map(|i| sys.rhs[i] * scale[i]).collect();
    let bnorm = norm2(&scaled_rhs);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], 0));
    }

    let matvec_scaled = |x: &[f64], y: &mut [f64]| {
        sys.matvec(x, y);
        for i in 0..n {
            y[i] *= scale[i];
        }
    };

    let m = GMRES_RESTART;
    let mut x = vec![0.0f64; n];
    let mut total_iters = 0usize;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _outer in 0..GMRES_MAX_OUTER {
        let mut r = vec![0.0; n];
        matvec_scaled(&x, &mut r);
        for i in 0..n {
            r[i] = scaled_rhs[i] - r[i];
        }
        let beta = norm2(&r);
        let rel = beta / bnorm;
        if rel <= tol {
            return Ok((x, total_iters));
        }
        if best.as_ref().map_or(true, |(b, _)| rel < *b) {
            best = Some((rel, x.clone()));
        }
        // Arnoldi with Householder-free modified Gram-Schmidt
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let mut h = vec![vec![0.0f64; m]; m + 1];
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![0.0f64; m];
        let mut g = vec![0.0f64; m + 1];
        g[0] = beta;
        v.push(scaled(&r, 1.0 / beta));
        let mut k_used = 0;
        for k in 0..m {
            total_iters += 1;
            // w = A M^{-1} v_k
            let mut z = v[k].clone();
            ilut.apply(&mut z);
            let mut w = vec![0.0; n];
            matvec_scaled(&z, &mut w);
            for row in 0..=k {
                let hk = dot(&w, &v[row]);
                h[row][k] = hk;
                axpy(&mut w, -hk, &v[row]);
            }
            let hkk = norm2(&w);
            h[k + 1][k] = hkk;
            // Givens rotations
            for row in 0..k {
                let tmp = cs[row] * h[row][k] + sn[row] * h[row + 1][k];
                h[row + 1][k] = -sn[row] * h[row][k] + cs[row] * h[row + 1][k];
                h[row][k] = tmp;
            }
            let denom = (h[k][k] * h[k][k] + hkk * hkk).sqrt();
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = hkk / denom;
            h[k][k] = denom;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            k_used = k + 1;
            if hkk == 0.0 || (g[k + 1].abs() / bnorm) <= tol {
                break;
            }
            v.push(scaled(&w, 1.0 / hkk));
        }
        // back substitution for y
        let mut y = vec![0.0f64; k_used];
        for row in (0..k_used).rev() {
            let mut s = g[row];
            for col in row + 1..k_used {
                s -= h[row][col] * y[col];
            }
            y[row] = s / h[row][row];
        }
        // x += M^{-1} V y
        let mut update = vec![0.0f64; n];
        for (col, &yc) in y.iter().enumerate() {
            axpy(&mut update, yc, &v[col]);
        }
        ilut.apply(&mut update);
        for i in 0..n {
            x[i] += update[i];
        }
    }
    let mut r = vec![0.0; n];
    matvec_scaled(&x, &mut r);
    for i in 0..n {
        r[i] = scaled_rhs[i] - r[i];
    }
    let rel = norm2(&r) / bnorm;
    let brel = best.map_or(rel, |(b, _)| b.min(rel));
    Err(Error::Solver(format!(
        "GMRES did not reach tol {tol:.1e} within {total_iters} iterations (best relative residual {brel:.3e})"
    )))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::SystemBuilder;

    fn small_system() -> LinearSystem {
        // [[2,1],[1,3]] x = (3,4) -> x = (1,1)
        let mut b = SystemBuilder::new(2);
        b.add(0, 0, 2.0);
        b.add(0, 1, 1.0);
        b.add(1, 0, 1.0);
        b.add(1, 1, 3.0);
        b.add_rhs(0, 3.0);
        b.add_rhs(1, 4.0);
        b.finalize().unwrap()
    }

    #[test]
    fn direct_solves_2x2() {
        let sys = small_system();
        let rep = solve(&sys, Method::DirectLu, f64::NAN).unwrap();
        assert!((rep.x[0] - 1.0).abs() < 1e-12 && (rep.x[1] - 1.0).abs() < 1e-12);
        assert!(rep.rel_residual < 1e-12);
    }

    #[test]
    fn identity_returns_rhs() {
        let n = 17;
        let mut b = SystemBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 1.0);
            b.add_rhs(i, (i as f64).sin());
        }
        let sys = b.finalize().unwrap();
        let rep = solve(&sys, Method::DirectLu, f64::NAN).unwrap();
        for i in 0..n {
            assert_eq!(rep.x[i], (i as f64).sin());
        }
    }

    #[test]
    fn gmres_matches_direct_on_laplacian() {
        // 1D Poisson, 60 unknowns
        let n = 60;
        let mut b = SystemBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 2.0);
            if i > 0 {
                b.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                b.add(i, i + 1, -1.0);
            }
            b.add_rhs(i, 1.0);
        }
        let sys = b.finalize().unwrap();
        let xd = solve(&sys, Method::DirectLu, f64::NAN).unwrap().x;
        let xg = solve(&sys, Method::Krylov, 1e-12).unwrap().x;
        for i in 0..n {
            assert!((xd[i] - xg[i]).abs() < 1e-7, "{} vs {}", xd[i], xg[i]);
        }
    }

    #[test]
    fn direct_is_deterministic() {
        let sys = small_system();
        let a = solve(&sys, Method::DirectLu, f64::NAN).unwrap().x;
        let b = solve(&sys, Method::DirectLu, f64::NAN).unwrap().x;
        assert_eq!(a, b);
    }

    #[test]
    fn singular_matrix_rejected() {
        let mut b = SystemBuilder::new(2);
        b.add(0, 0, 1.0);
        b.add(0, 1, 1.0);
        b.add(1, 0, 1.0);
        b.add(1, 1, 1.0);
        b.add_rhs(0, 1.0);
        b.add_rhs(1, 2.0);
        let sys = b.finalize().unwrap();
        assert!(solve(&sys, Method::DirectLu, f64::NAN).is_err());
    }
}
