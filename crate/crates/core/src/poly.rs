//! Dense complex polynomials (ascending coefficients) and a simultaneous
//! root finder.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// Value and first derivative by Horner's scheme.
pub fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or(ZERO) - b.get(k).copied().unwrap_or(ZERO))
        .collect()
}

pub fn scale(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
    a.iter().map(|&c| c * s).collect()
}

/// Degree after discarding leading coefficients below `rel_tol * max|c|`.
/// Returns `None` for the zero polynomial.
pub fn effective_degree(coeffs: &[Complex64], rel_tol: f64) -> Option<usize> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    coeffs.iter().rposition(|c| c.norm() > rel_tol * scale)
}

/// Outcome of a root solve: the roots and the worst residual `|p(z)| / Σ|a_k||z|^k`.
#[derive(Clone, Debug)]
pub struct RootSolve {
    pub roots: Vec<Complex64>,
    pub worst_residual: f64,
    pub converged: bool,
}

/// Relative backward error of `z` as a root of `coeffs`.
pub fn relative_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let az = z.norm();
    let denom = coeffs.iter().rev().fold(0.0, |acc, c| acc * az + c.norm());
    if denom == 0.0 {
        return 0.0;
    }
    eval(coeffs, z).norm() / denom
}

/// All roots of a polynomial with nonzero leading coefficient, counted with
/// multiplicity. Degrees one and two use closed forms; higher degrees use
/// Aberth–Ehrlich iteration followed by Newton polishing.
pub fn roots(coeffs: &[Complex64]) -> RootSolve {
    let n = coeffs.len().saturating_sub(1);
    match n {
        0 => RootSolve { roots: Vec::new(), worst_residual: 0.0, converged: true },
        1 => {
            let z = -coeffs[0] / coeffs[1];
            RootSolve { roots: vec![z], worst_residual: relative_residual(coeffs, z), converged: true }
        }
        2 => {
            let r = quadratic(coeffs[2], coeffs[1], coeffs[0]);
            let worst = r.iter().map(|&z| relative_residual(coeffs, z)).fold(0.0, f64::max);
            RootSolve { roots: r.to_vec(), worst_residual: worst, converged: true }
        }
        _ => {
            // Symmetric polynomials such as z^n - w can trap the iteration on
            // a symmetric orbit; restart from perturbed guesses when that happens.
            let mut best = aberth(coeffs, 500, 1e-14);
            for attempt in 1..=4 {
                if best.converged && best.worst_residual <= RESTART_RESIDUAL {
                    break;
                }
                let next = aberth_from(coeffs, initial_guesses(coeffs, attempt), 500, 1e-14);
                if next.worst_residual < best.worst_residual {
                    best = next;
                }
            }
            best
        }
    }
}

const RESTART_RESIDUAL: f64 = 1e-10;

/// Roots of `a z^2 + b z + c` (a ≠ 0) avoiding cancellation.
pub fn quadratic(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - a * c * 4.0).sqrt();
    let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) * 0.5 } else { -(b - disc) * 0.5 };
    if q.norm_sqr() == 0.0 {
        // b = 0 and c = 0: double root at the origin
        return [ZERO, ZERO];
    }
    [q / a, c / q]
}

fn initial_guesses(coeffs: &[Complex64], attempt: usize) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    // Fujiwara bound for the root moduli.
    let mut bound: f64 = 0.0;
    for k in 1..=n {
        let c = (coeffs[n - k] / lead).norm();
        let term = if k == n { (c / 2.0).powf(1.0 / k as f64) } else { c.powf(1.0 / k as f64) };
        bound = bound.max(term);
    }
    let radius = bound.max(1e-3);
    let center = -coeffs[n - 1] / (lead * n as f64);
    (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n as f64 + 0.4 + 0.37 * attempt as f64;
            let r = radius * (1.0 + 0.15 * attempt as f64 * (k as f64 + 1.0) / n as f64);
            center + Complex64::from_polar(r, theta)
        })
        .collect()
}

/// Aberth–Ehrlich simultaneous iteration.
pub fn aberth(coeffs: &[Complex64], max_iter: usize, eps: f64) -> RootSolve {
    aberth_from(coeffs, initial_guesses(coeffs, 0), max_iter, eps)
}

fn aberth_from(coeffs: &[Complex64], mut z: Vec<Complex64>, max_iter: usize, eps: f64) -> RootSolve {
    let n = coeffs.len() - 1;
    let dcoeffs = derivative(coeffs);
    let mut done = vec![false; n];
    let mut converged = false;
    for _ in 0..max_iter {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let p = eval(coeffs, z[i]);
            let dp = eval(&dcoeffs, z[i]);
            if p.norm_sqr() == 0.0 {
                done[i] = true;
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = ZERO;
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm_sqr() > 0.0 {
                        repulsion += diff.inv();
                    }
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                // Perturb and retry on the next sweep.
                let bump = Complex64::new(1e-3, 1e-3) * (1.0 + z[i].norm());
                z[i] += bump;
                all_done = false;
                continue;
            }
            z[i] -= step;
            if step.norm() <= eps * (1.0 + z[i].norm()) {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            converged = true;
            break;
        }
    }
    for zi in z.iter_mut() {
        *zi = newton_polish(coeffs, &dcoeffs, *zi, 4);
    }
    let worst = z.iter().map(|&zi| relative_residual(coeffs, zi)).fold(0.0, f64::max);
    RootSolve { roots: z, worst_residual: worst, converged }
}

fn newton_polish(coeffs: &[Complex64], dcoeffs: &[Complex64], mut z: Complex64, steps: usize) -> Complex64 {
    let mut best = z;
    let mut best_res = relative_residual(coeffs, z);
    for _ in 0..steps {
        let dp = eval(dcoeffs, z);
        if dp.norm_sqr() == 0.0 {
            break;
        }
        z -= eval(coeffs, z) / dp;
        let res = relative_residual(coeffs, z);
        if res < best_res {
            best = z;
            best_res = res;
        }
    }
    best
}
