//! Lead kernels: semi-infinite tight-binding-chain surface Green functions,
//! occupation functions O^s_α(ω), the Hermitian bath term γ^s_{μκ}(ω) and the
//! anti-Hermitian term σ^s_{μκ}(ω) obtained by principal-value integration.
//!
//! The surface Green function of a half-infinite chain with hopping t_B and
//! on-site energy ε_B has the closed form
//!   G^R(ω) = [x − i √(4t_B² − x²)] / (2 t_B²),  x = ω − ε_B, |x| < 2t_B,
//! with the real decaying branch [x − sign(x)√(x² − 4t_B²)]/(2t_B²) outside
//! the band. The branch is fixed by Im G^R ≤ 0.
//!
//! σ^s is evaluated as a principal-value integral over the finite band
//! support; the pole is removed analytically by integrating the symmetrized
//! difference [h(p+x) − h(p−x)]/x on (0, R] with adaptive Gauss–Kronrod.

use std::collections::HashMap;
use std::sync::Mutex;

use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Absolute tolerance target of the principal-value quadrature [eV].
pub const PV_ABS_TOL: f64 = 1e-9;

/// ω values are keyed for memoization after rounding to this granularity [eV].
pub const OMEGA_CACHE_QUANTUM: f64 = 1e-12;

/// One semi-infinite tight-binding lead in asymptotic thermal equilibrium.
#[derive(Debug, Clone)]
pub struct LeadSpec {
    pub id: String,
    /// Chain hopping t_B > 0 [eV]; the band is ε_B ± 2t_B.
    pub t_b: f64,
    /// Chain on-site energy ε_B [eV].
    pub eps_b: f64,
    /// Inverse temperature β [1/eV].
    pub beta: f64,
    /// Chemical potential μ [eV].
    pub mu: f64,
    /// Nonzero couplings (orbital index, V [eV]).
    pub coupling: Vec<(usize, f64)>,
}

impl LeadSpec {
    pub fn validate(&self) -> Result<()> {
        if self.t_b <= 0.0 {
            return Err(CoreError::Validation(format!("lead {}: t_B must be positive", self.id)));
        }
        if self.beta <= 0.0 {
            return Err(CoreError::Validation(format!("lead {}: beta must be positive", self.id)));
        }
        if !self.coupling.iter().any(|&(_, v)| v != 0.0) {
            return Err(CoreError::Validation(format!(
                "lead {}: needs at least one nonzero coupling",
                self.id
            )));
        }
        Ok(())
    }

    /// Retarded surface Green function of the chain.
    pub fn surface_green(&self, omega: f64) -> Complex64 {
        let x = omega - self.eps_b;
        let t2 = 2.0 * self.t_b * self.t_b;
        if x.abs() < 2.0 * self.t_b {
            Complex64::new(x / t2, -(4.0 * self.t_b * self.t_b - x * x).sqrt() / t2)
        } else {
            let root = (x * x - 4.0 * self.t_b * self.t_b).sqrt();
            Complex64::new((x - x.signum() * root) / t2, 0.0)
        }
    }

    /// Spectral density i(G^R − G^A)(ω) = −2 Im G^R(ω); zero outside the band.
    pub fn spectral(&self, omega: f64) -> f64 {
        let x = omega - self.eps_b;
        if x.abs() >= 2.0 * self.t_b {
            0.0
        } else {
            (4.0 * self.t_b * self.t_b - x * x).sqrt() / (self.t_b * self.t_b)
        }
    }

    /// Generalized Fermi function: f^+ for `sbar` = +1, f^- = 1 − f^+ for −1.
    /// Evaluated in a form that cannot overflow for |β(ω−μ)| ≫ 700.
    pub fn fermi(&self, omega: f64, sbar: i8) -> f64 {
        let x = self.beta * (omega - self.mu);
        let fplus = if x > 0.0 {
            let e = (-x).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + x.exp())
        };
        if sbar > 0 {
            fplus
        } else {
            1.0 - fplus
        }
    }

    /// Occupation function O^s(ω) = i(G^R − G^A)(sω) · f^{s̄}(sω); the
    /// golden-rule rate kernel of this lead.
    pub fn occupation(&self, s: i8, omega: f64) -> f64 {
        let sw = s as f64 * omega;
        self.spectral(sw) * self.fermi(sw, -s)
    }

    /// Total coupling weight Σ_κ |V_ακ| used for the averaged chemical potential.
    pub fn coupling_weight(&self) -> f64 {
        self.coupling.iter().map(|&(_, v)| v.abs()).sum()
    }

    /// Scalar principal-value part of σ^s:
    ///   p^s(ω) = (i/π) P∫ A(ω′) f^{s̄}(ω′) / (ω − s ω′) dω′,
    /// purely imaginary for real couplings. Returns Im p.
    pub fn pv_scalar(&self, s: i8, omega: f64) -> Result<f64> {
        let a = self.eps_b - 2.0 * self.t_b;
        let b = self.eps_b + 2.0 * self.t_b;
        let h = |wp: f64| self.spectral(wp) * self.fermi(wp, -s);
        let pole = s as f64 * omega;
        // J = P∫ h/(ω − sω′) dω′ = −s · P∫ h/(ω′ − pole) dω′
        let principal = if pole > a && pole < b {
            let r = (pole - a).min(b - pole);
            let core = adaptive_gk(
                &|x: f64| (h(pole + x) - h(pole - x)) / x,
                0.0,
                r,
                PV_ABS_TOL / 2.0,
            )?;
            let mut rest = 0.0;
            if pole - r - a > 0.0 {
                rest += adaptive_gk(&|w: f64| h(w) / (w - pole), a, pole - r, PV_ABS_TOL / 2.0)?;
            }
            if b - (pole + r) > 0.0 {
                rest += adaptive_gk(&|w: f64| h(w) / (w - pole), pole + r, b, PV_ABS_TOL / 2.0)?;
            }
            core + rest
        } else {
            adaptive_gk(&|w: f64| h(w) / (w - pole), a, b, PV_ABS_TOL)?
        };
        let j = -(s as f64) * principal;
        Ok(j / std::f64::consts::PI)
    }
}

/// Assembled per-lead evaluators with memoization and optional interpolation
/// tables for the principal-value kernel.
pub struct BathKernel {
    pub leads: Vec<LeadSpec>,
    /// memo of Im p^s per lead, keyed (s>0, round(ω))
    pv_cache: Vec<Mutex<HashMap<(bool, i64), f64>>>,
    occ_cache: Vec<Mutex<HashMap<(bool, i64), f64>>>,
    pv_tables: Vec<[Option<PvTable>; 2]>,
}

fn cache_key(s: i8, omega: f64) -> (bool, i64) {
    (s > 0, (omega / OMEGA_CACHE_QUANTUM).round() as i64)
}

impl BathKernel {
    pub fn new(leads: Vec<LeadSpec>) -> Result<Self> {
        for lead in &leads {
            lead.validate()?;
        }
        let n = leads.len();
        Ok(BathKernel {
            leads,
            pv_cache: (0..n).map(|_| Mutex::new(HashMap::new())).collect(),
            occ_cache: (0..n).map(|_| Mutex::new(HashMap::new())).collect(),
            pv_tables: (0..n).map(|_| [None, None]).collect(),
        })
    }

    /// Coupling-weight-averaged chemical potential μ̄ = Σ V_α μ_α / Σ V_α.
    /// Uses V_α = Σ_κ |V_ακ|, the rule for leads with identical densities of
    /// states; recorded as an assumption in run metadata.
    pub fn mu_bar(&self) -> f64 {
        let wsum: f64 = self.leads.iter().map(|l| l.coupling_weight()).sum();
        if wsum == 0.0 {
            return 0.0;
        }
        self.leads.iter().map(|l| l.coupling_weight() * l.mu).sum::<f64>() / wsum
    }

    pub fn occupation(&self, lead: usize, s: i8, omega: f64) -> f64 {
        let key = cache_key(s, omega);
        if let Some(&v) = self.occ_cache[lead].lock().unwrap().get(&key) {
            return v;
        }
        let v = self.leads[lead].occupation(s, omega);
        self.occ_cache[lead].lock().unwrap().insert(key, v);
        v
    }

    /// Hermitian bath term γ^s_{μκ}(ω) = Σ_α V_αμ O^s_α(ω) V_ακ.
    pub fn gamma_hermitian(&self, s: i8, mu: usize, kappa: usize, omega: f64) -> Complex64 {
        let mut acc = 0.0;
        for (i, lead) in self.leads.iter().enumerate() {
            let vmu = coupling_of(lead, mu);
            let vk = coupling_of(lead, kappa);
            if vmu == 0.0 || vk == 0.0 {
                continue;
            }
            acc += vmu * self.occupation(i, s, omega) * vk;
        }
        Complex64::new(acc, 0.0)
    }

    /// Im p^s_α(ω); memoized, served from the interpolation table when one has
    /// been prepared and covers ω.
    pub fn pv_scalar(&self, lead: usize, s: i8, omega: f64) -> Result<f64> {
        let si = if s > 0 { 0 } else { 1 };
        if let Some(table) = &self.pv_tables[lead][si] {
            if let Some(v) = table.eval(omega) {
                return Ok(v);
            }
        }
        let key = cache_key(s, omega);
        if let Some(&v) = self.pv_cache[lead].lock().unwrap().get(&key) {
            return Ok(v);
        }
        let v = self.leads[lead].pv_scalar(s, omega)?;
        self.pv_cache[lead].lock().unwrap().insert(key, v);
        Ok(v)
    }

    /// Anti-Hermitian bath term σ^s_{μκ}(ω) = Σ_α V_αμ p^s_α(ω) V_ακ;
    /// purely imaginary for the real couplings used here.
    pub fn sigma_antihermitian(
        &self,
        s: i8,
        mu: usize,
        kappa: usize,
        omega: f64,
    ) -> Result<Complex64> {
        let mut acc = 0.0;
        for (i, lead) in self.leads.iter().enumerate() {
            let vmu = coupling_of(lead, mu);
            let vk = coupling_of(lead, kappa);
            if vmu == 0.0 || vk == 0.0 {
                continue;
            }
            acc += vmu * self.pv_scalar(i, s, omega)? * vk;
        }
        Ok(Complex64::new(0.0, acc))
    }

    /// Build degree-7 piecewise-Chebyshev tables of Im p^s per lead covering
    /// [lo, hi], so that Lamb-shift assembly over millions of energy
    /// differences costs interpolation instead of quadrature.
    pub fn prepare_pv_tables(&mut self, lo: f64, hi: f64) -> Result<()> {
        for i in 0..self.leads.len() {
            for (si, s) in [(0usize, 1i8), (1, -1)] {
                let lead = self.leads[i].clone();
                let f = |w: f64| lead.pv_scalar(s, w).unwrap_or(f64::NAN);
                // breakpoints at the images of the band edges and of the
                // chemical potential (pole crossing those features)
                let sf = s as f64;
                let mut seeds = vec![
                    lo,
                    hi,
                    sf * (lead.eps_b - 2.0 * lead.t_b),
                    sf * (lead.eps_b + 2.0 * lead.t_b),
                    sf * lead.mu,
                ];
                seeds.retain(|x| x.is_finite() && *x > lo && *x < hi);
                seeds.push(lo);
                seeds.push(hi);
                seeds.sort_by(|a, b| a.partial_cmp(b).unwrap());
                seeds.dedup();
                let table = PvTable::build(&f, &seeds, 5e-10)?;
                self.pv_tables[i][si] = Some(table);
            }
        }
        Ok(())
    }
}

fn coupling_of(lead: &LeadSpec, orbital: usize) -> f64 {
    lead.coupling
        .iter()
        .find(|&&(o, _)| o == orbital)
        .map(|&(_, v)| v)
        .unwrap_or(0.0)
}

// ---------------------------------------------------------------------------
// Gauss–Kronrod 7-15 adaptive quadrature
// ---------------------------------------------------------------------------

const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One GK15 panel; returns (kronrod result, error estimate).
fn qk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    kron *= half;
    gauss *= half;
    ((kron), (kron - gauss).abs().max(1e-300))
}

/// Adaptive bisection on the GK15 panel until the summed error estimate is
/// below `tol`. Errors carry the achieved estimate.
pub fn adaptive_gk(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    // (a, b, result, err)
    let (r, e) = qk15(f, a, b);
    let mut heap: Vec<(f64, f64, f64, f64)> = vec![(a, b, r, e)];
    let mut total_err: f64 = e;
    let mut iterations = 0usize;
    while total_err > tol && iterations < 2000 {
        iterations += 1;
        // split the interval with the largest error
        let (idx, _) = heap
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (ia, ib, _ir, ie) = heap.swap_remove(idx);
        let mid = 0.5 * (ia + ib);
        if mid <= ia || mid >= ib {
            // interval width at rounding limit; keep its estimate
            total_err -= ie;
            heap.push((ia, ib, _ir, 0.0));
            continue;
        }
        let (r1, e1) = qk15(f, ia, mid);
        let (r2, e2) = qk15(f, mid, ib);
        total_err += e1 + e2 - ie;
        heap.push((ia, mid, r1, e1));
        heap.push((mid, ib, r2, e2));
    }
    let result: f64 = heap.iter().map(|x| x.2).sum();
    if total_err > tol * 100.0 {
        return Err(CoreError::Numerical(format!(
            "quadrature stalled: achieved error estimate {total_err:.3e} > tolerance {tol:.3e}"
        )));
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// Piecewise-Chebyshev interpolation table
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct PvTable {
    /// Sorted leaf intervals (lo, hi, Chebyshev coefficients of degree 7).
    leaves: Vec<(f64, f64, [f64; 8])>,
}

impl PvTable {
    fn cheb_fit(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> [f64; 8] {
        let n = 8usize;
        let mut vals = [0.0f64; 8];
        for (k, v) in vals.iter_mut().enumerate() {
            let theta = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            let x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * theta.cos();
            *v = f(x);
        }
        let mut coeff = [0.0f64; 8];
        for (j, c) in coeff.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, v) in vals.iter().enumerate() {
                let theta = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
                acc += v * (j as f64 * theta).cos();
            }
            *c = 2.0 * acc / n as f64;
        }
        coeff[0] *= 0.5;
        coeff
    }

    fn cheb_eval(coeff: &[f64; 8], lo: f64, hi: f64, x: f64) -> f64 {
        let t = (2.0 * x - lo - hi) / (hi - lo);
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in coeff.iter().rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        b1 - t * b2
    }

    pub fn build(f: &dyn Fn(f64) -> f64, seeds: &[f64], tol: f64) -> Result<Self> {
        let mut stack: Vec<(f64, f64)> = seeds.windows(2).map(|w| (w[0], w[1])).collect();
        let mut leaves = Vec::new();
        let mut depth_guard = 0usize;
        while let Some((lo, hi)) = stack.pop() {
            depth_guard += 1;
            if depth_guard > 200_000 {
                return Err(CoreError::Numerical("interpolation table refinement stalled".into()));
            }
            let coeff = Self::cheb_fit(f, lo, hi);
            // validate at off-node points
            let mut worst = 0.0f64;
            for frac in [0.12, 0.37, 0.55, 0.81, 0.94] {
                let x = lo + frac * (hi - lo);
                let err = (Self::cheb_eval(&coeff, lo, hi, x) - f(x)).abs();
                worst = worst.max(err);
            }
            if worst <= tol || (hi - lo) < 1e-9 {
                leaves.push((lo, hi, coeff));
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((lo, mid));
                stack.push((mid, hi));
            }
        }
        leaves.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(PvTable { leaves })
    }

    pub fn eval(&self, x: f64) -> Option<f64> {
        if self.leaves.is_empty() {
            return None;
        }
        if x < self.leaves[0].0 || x > self.leaves.last().unwrap().1 {
            return None;
        }
        let idx = self
            .leaves
            .partition_point(|leaf| leaf.1 < x)
            .min(self.leaves.len() - 1);
        let (lo, hi, coeff) = &self.leaves[idx];
        Some(Self::cheb_eval(coeff, *lo, *hi, x))
    }
}
