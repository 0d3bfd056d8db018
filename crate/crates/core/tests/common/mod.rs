//! Reference implementations for the integration tests.
//!
//! Nothing here calls into the library's numerics: each oracle takes a
//! different route (extended precision, explicit matrices, quadrature,
//! joint-state enumeration) to the same quantity.

#![allow(dead_code, clippy::needless_range_loop, clippy::too_many_arguments, clippy::type_complexity)]

use std::f64::consts::PI;

// ---------------------------------------------------------------- double-double

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`, about 32 digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::new(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::new(q2)));
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::new(q3))
    }

    pub fn scale(self, s: f64) -> Dd {
        Dd { hi: self.hi * s, lo: self.lo * s }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn ln(self) -> f64 {
        self.hi.ln() + self.lo / self.hi
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            self.neg()
        } else {
            self
        }
    }
}

// ---------------------------------------------------------------- ₂F₁ series

/// `log Σ_j (a)_j/(c)_j z^j` summed directly in double-double with a binary
/// exponent carried alongside, until the tail bound drops below 1e-30.
pub fn log_2f1_series_oracle(a: f64, c: f64, z: f64) -> f64 {
    const SHIFT: i32 = 600;
    let big = 2f64.powi(SHIFT);
    let small = 2f64.powi(-SHIFT);
    let (ad, cd, zd) = (Dd::new(a), Dd::new(c), Dd::new(z));
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut exp2: i64 = 0;
    let mut j = 0u64;
    loop {
        let jd = Dd::new(j as f64);
        term = term.mul(ad.add(jd)).div(cd.add(jd)).mul(zd);
        sum = sum.add(term);
        if sum.hi > big {
            term = term.scale(small);
            sum = sum.scale(small);
            exp2 += i64::from(SHIFT);
        }
        j += 1;
        let next = (a + j as f64) / (c + j as f64) * z;
        let bound = if a >= c { next } else { z };
        if bound < 1.0 && term.hi * bound / (1.0 - bound) < 1e-30 * sum.hi {
            break;
        }
        assert!(j < 50_000_000, "oracle series did not settle");
    }
    sum.ln() + exp2 as f64 * std::f64::consts::LN_2
}

// ---------------------------------------------------------------- log-gamma

/// `ln Γ(x)` for positive integer or half-integer `x` by the factorial
/// recurrence, accumulated in double-double.
pub fn ln_gamma_half_integer(x: f64) -> f64 {
    let twice = (2.0 * x).round();
    assert!((2.0 * x - twice).abs() < 1e-12 && x > 0.0);
    let mut acc = Dd::ZERO;
    let mut addln = |v: f64| {
        acc = acc.add(Dd::new(v.ln()));
    };
    if (twice as u64).is_multiple_of(2) {
        let n = x as u64;
        for i in 2..n {
            addln(i as f64);
        }
        acc.to_f64()
    } else {
        let mut t = 0.5;
        while t < x - 0.25 {
            addln(t);
            t += 1.0;
        }
        acc.to_f64() + 0.5 * PI.ln()
    }
}

// ---------------------------------------------------------------- linear algebra

/// `M × 2K` harmonic design matrix, column-major columns, cosines then sines.
pub fn design_columns(omega: f64, k: usize, m: usize) -> Vec<Vec<f64>> {
    let mut cols = Vec::with_capacity(2 * k);
    for j in 1..=k {
        cols.push((1..=m).map(|t| (j as f64 * omega * t as f64).cos()).collect());
    }
    for j in 1..=k {
        cols.push((1..=m).map(|t| (j as f64 * omega * t as f64).sin()).collect());
    }
    cols
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(Dd::ZERO, |acc, (&x, &y)| acc.add(Dd::new(x).mul(Dd::new(y)))).to_f64()
}

/// `‖P_Z y‖²` by modified Gram-Schmidt with one reorthogonalization pass.
pub fn projection_energy_oracle(y: &[f64], cols: &[Vec<f64>]) -> f64 {
    let mut q: Vec<Vec<f64>> = Vec::new();
    for c in cols {
        let mut v = c.clone();
        for _ in 0..2 {
            for u in &q {
                let r = dot(u, &v);
                v.iter_mut().zip(u).for_each(|(x, &b)| *x -= r * b);
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-9 * dot(c, c).sqrt() {
            q.push(v.iter().map(|x| x / n).collect());
        }
    }
    q.iter().map(|u| dot(u, y).powi(2)).sum()
}

/// Solves `A x = b` in double-double with partial pivoting.
pub fn solve_dd(a: &[Vec<Dd>], b: &[Dd]) -> Vec<Dd> {
    let n = b.len();
    let mut m: Vec<Vec<Dd>> = a.iter().zip(b).map(|(r, &bi)| r.iter().copied().chain([bi]).collect()).collect();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| m[i][col].abs().hi.total_cmp(&m[j][col].abs().hi)).unwrap();
        m.swap(col, p);
        for r in col + 1..n {
            let f = m[r][col].div(m[col][col]);
            for c in col..=n {
                let v = m[col][c];
                m[r][c] = m[r][c].sub(f.mul(v));
            }
        }
    }
    let mut x = vec![Dd::ZERO; n];
    for r in (0..n).rev() {
        let mut s = m[r][n];
        for c in r + 1..n {
            s = s.sub(m[r][c].mul(x[c]));
        }
        x[r] = s.div(m[r][r]);
    }
    x
}

/// Least-squares weights from the normal equations, formed and solved in
/// double-double.
pub fn normal_equation_oracle(y: &[f64], cols: &[Vec<f64>]) -> Vec<f64> {
    let ddot = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(Dd::ZERO, |acc, (&x, &y)| acc.add(Dd::new(x).mul(Dd::new(y))));
    let g: Vec<Vec<Dd>> = cols.iter().map(|ci| cols.iter().map(|cj| ddot(ci, cj)).collect()).collect();
    let b: Vec<Dd> = cols.iter().map(|c| ddot(c, y)).collect();
    solve_dd(&g, &b).into_iter().map(Dd::to_f64).collect()
}

/// `(log det S, yᵀ S⁻¹ y)` for `S = I + g·Z(ZᵀZ)⁻¹Zᵀ`, formed densely.
pub fn dense_gaussian_terms(y: &[f64], cols: &[Vec<f64>], g: f64) -> (f64, f64) {
    let m = y.len();
    let n = cols.len();
    let gram: Vec<Vec<Dd>> = cols.iter().map(|ci| cols.iter().map(|cj| Dd::new(dot(ci, cj))).collect()).collect();
    // X = (ZᵀZ)⁻¹ Zᵀ, one column of Zᵀ at a time
    let mut x = vec![vec![0.0; m]; n];
    for t in 0..m {
        let rhs: Vec<Dd> = cols.iter().map(|c| Dd::new(c[t])).collect();
        for (r, v) in solve_dd(&gram, &rhs).into_iter().enumerate() {
            x[r][t] = v.to_f64();
        }
    }
    let mut s = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            let p: f64 = (0..n).map(|r| cols[r][i] * x[r][j]).sum();
            s[i][j] = g * p + if i == j { 1.0 } else { 0.0 };
        }
    }
    // LU with partial pivoting for the determinant and the solve
    let mut a = s;
    let mut rhs = y.to_vec();
    let mut logdet = 0.0;
    for col in 0..m {
        let p = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        rhs.swap(col, p);
        logdet += a[col][col].abs().ln();
        for r in col + 1..m {
            let f = a[r][col] / a[col][col];
            for c in col..m {
                a[r][c] -= f * a[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut sol = vec![0.0; m];
    for r in (0..m).rev() {
        let mut v = rhs[r];
        for c in r + 1..m {
            v -= a[r][c] * sol[c];
        }
        sol[r] = v / a[r][r];
    }
    (logdet, y.iter().zip(&sol).map(|(a, b)| a * b).sum())
}

// ---------------------------------------------------------------- quadrature

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson on `[a, b]` with absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // split first so narrow peaks are seen
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            simpson(f, x0, x1, f0, fm, f1, whole, tol / pieces as f64, 50)
        })
        .sum()
}

/// `log ∫₀^∞ p(y | g, K) p(g | δ) dg` for the Gaussian linear model with a
/// g-prior on the weights and a Jeffreys prior on the noise variance.
///
/// For fixed `g`, integrating out weights and variance gives
/// `Γ(M/2) (π q(g))^{−M/2} det(S)^{−1/2}` with `q(g) = ‖y‖² − g/(1+g)·‖P y‖²`
/// and `det S = (1+g)^{2K}`; the g-integral is done numerically after the
/// substitution `t = g/(1+g)`.
pub fn log_evidence_quadrature(y: &[f64], omega: f64, k: usize, delta: f64) -> f64 {
    let m = y.len() as f64;
    let e: f64 = dot(y, y);
    let ep = projection_energy_oracle(y, &design_columns(omega, k, y.len()));
    let r2 = ep / e;
    let power = k as f64 + delta / 2.0 - 2.0;
    let log_f = |t: f64| -> f64 {
        if t >= 1.0 {
            return f64::NEG_INFINITY;
        }
        power * (-t).ln_1p() - 0.5 * m * (-t * r2).ln_1p()
    };
    let peak = (0..=4096).map(|i| log_f(i as f64 / 4096.0)).fold(f64::NEG_INFINITY, f64::max);
    let f = |t: f64| (log_f(t) - peak).exp();
    let integral = integrate(&f, 0.0, 1.0, 1e-13);
    ln_gamma_half_integer(m / 2.0) - 0.5 * m * (PI * e).ln() + ((delta - 2.0) / 2.0).ln() + peak + integral.ln()
}

// ---------------------------------------------------------------- forward recursion

/// Joint state enumeration over `{unvoiced} ∪ {(i, k) valid}` with the full
/// joint transition matrix written out entry by entry.
pub struct JointForward {
    pub g: usize,
    pub k_max: usize,
    pub valid: Vec<Vec<bool>>,
    /// `trans[s][s']`, state 0 is unvoiced; memory-driven entries out of
    /// state 0 are filled per frame.
    voiced_kernel: Vec<Vec<f64>>,
    pub p10: f64,
    pub p01: f64,
}

fn gaussian_kernel(points: &[f64], var: f64) -> Vec<Vec<f64>> {
    let reach = 5.0 * var.sqrt();
    points
        .iter()
        .map(|&p| {
            let row: Vec<f64> = points
                .iter()
                .map(|&q| if (q - p).abs() <= reach { (-(q - p).powi(2) / (2.0 * var)).exp() } else { 0.0 })
                .collect();
            let s: f64 = row.iter().sum();
            row.into_iter().map(|v| v / s).collect()
        })
        .collect()
}

impl JointForward {
    pub fn new(omegas: &[f64], valid_order: &[usize], k_max: usize, sigma_omega2: f64, sigma_k2: f64, p10: f64, p01: f64) -> Self {
        let g = omegas.len();
        let valid: Vec<Vec<bool>> = valid_order.iter().map(|&v| (1..=k_max).map(|k| k <= v).collect()).collect();
        let orders: Vec<f64> = (1..=k_max).map(|k| k as f64).collect();
        let aw = gaussian_kernel(omegas, sigma_omega2);
        let ak = gaussian_kernel(&orders, sigma_k2);
        let n = g * k_max;
        let mut kern = vec![vec![0.0; n]; n];
        for i in 0..g {
            for k in 0..k_max {
                if !valid[i][k] {
                    continue;
                }
                let s = i * k_max + k;
                let mut total = 0.0;
                for j in 0..g {
                    for l in 0..k_max {
                        if valid[j][l] {
                            kern[s][j * k_max + l] = aw[i][j] * ak[k][l];
                            total += aw[i][j] * ak[k][l];
                        }
                    }
                }
                kern[s].iter_mut().for_each(|v| *v /= total);
            }
        }
        Self { g, k_max, valid, voiced_kernel: kern, p10, p01 }
    }

    fn valid_count(&self) -> usize {
        self.valid.iter().flatten().filter(|&&v| v).count()
    }

    /// Flattened `[unvoiced, voiced(0,1), voiced(0,2), …]`.
    pub fn initial(&self) -> Vec<f64> {
        let w = 0.5 / self.valid_count() as f64;
        let mut p = vec![0.5];
        p.extend(self.valid.iter().flatten().map(|&v| if v { w } else { 0.0 }));
        p
    }

    pub fn uniform_memory(&self) -> Vec<f64> {
        let w = 1.0 / self.valid_count() as f64;
        self.valid.iter().flatten().map(|&v| if v { w } else { 0.0 }).collect()
    }

    /// Full joint transition matrix given the memory distribution.
    pub fn joint_matrix(&self, memory: &[f64]) -> Vec<Vec<f64>> {
        let n = self.g * self.k_max + 1;
        let mut t = vec![vec![0.0; n]; n];
        t[0][0] = 1.0 - self.p10;
        for s in 1..n {
            t[0][s] = self.p10 * memory[s - 1];
        }
        for s in 1..n {
            if !self.valid[(s - 1) / self.k_max][(s - 1) % self.k_max] {
                continue;
            }
            t[s][0] = self.p01;
            for s2 in 1..n {
                t[s][s2] = (1.0 - self.p01) * self.voiced_kernel[s - 1][s2 - 1];
            }
        }
        t
    }

    pub fn predict(&self, prev: &[f64], memory: &[f64]) -> Vec<f64> {
        let t = self.joint_matrix(memory);
        let n = prev.len();
        (0..n).map(|s2| (0..n).map(|s| prev[s] * t[s][s2]).sum()).collect()
    }

    /// Posterior from a flattened log-likelihood vector (same layout).
    pub fn update(pred: &[f64], loglik: &[f64]) -> Vec<f64> {
        let peak = pred
            .iter()
            .zip(loglik)
            .filter(|(&p, l)| p > 0.0 && l.is_finite())
            .map(|(_, &l)| l)
            .fold(f64::NEG_INFINITY, f64::max);
        if !peak.is_finite() {
            let s: f64 = pred.iter().sum();
            return pred.iter().map(|p| p / s).collect();
        }
        let un: Vec<f64> =
            pred.iter().zip(loglik).map(|(&p, &l)| if p > 0.0 && l.is_finite() { p * (l - peak).exp() } else { 0.0 }).collect();
        let s: f64 = un.iter().sum();
        un.into_iter().map(|v| v / s).collect()
    }

    /// Runs the recursion, returning the flattened posterior of every frame.
    pub fn run(&self, logliks: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut memory = self.uniform_memory();
        let mut prev: Option<Vec<f64>> = None;
        let mut out = Vec::new();
        for ll in logliks {
            let pred = match &prev {
                None => self.initial(),
                Some(p) => self.predict(p, &memory),
            };
            let post = Self::update(&pred, ll);
            if post[0] < 0.5 {
                memory = post[1..].iter().map(|v| v / (1.0 - post[0])).collect();
            }
            out.push(post.clone());
            prev = Some(post);
        }
        out
    }
}

// ---------------------------------------------------------------- signals

/// Deterministic pseudo-random numbers for oracle-side inputs.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.next_f64().max(1e-300);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}
