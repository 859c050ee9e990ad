//! Cutoff momentum lattice, dispersions, transfer momenta and field configurations.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Dispersion {
    /// `eps_k = -2t sum_i cos(2 pi m_i / L)`
    TightBinding { t: f64 },
    /// `eps_k = |k|^2 / 2`
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub d: usize,
    pub l: f64,
    pub beta: f64,
    pub nu: f64,
    pub mu: f64,
    pub dispersion: Dispersion,
    pub lambda: f64,
    pub energy_window: f64,
}

impl Default for ModelSpec {
    /// Desk lattice with `lambda = 0`; set the coupling with
    /// [`crate::gap::with_coupling_ratio`].
    fn default() -> Self {
        Self {
            d: 1,
            l: 16.0,
            beta: 8.0,
            nu: 20.0,
            mu: 0.0,
            dispersion: Dispersion::TightBinding { t: 1.0 },
            lambda: 0.0,
            energy_window: 1.0,
        }
    }
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if !(1..=3).contains(&self.d) {
            return bad("d must be 1, 2 or 3");
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return bad("L must be positive");
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta must be positive");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be >= 0");
        }
        if !(self.nu >= PI / self.beta) {
            return bad("nu must be >= pi/beta");
        }
        if !(self.energy_window >= 0.0) || !self.mu.is_finite() {
            return bad("energy window must be >= 0 and mu finite");
        }
        if let Dispersion::TightBinding { t } = self.dispersion {
            if !t.is_finite() {
                return bad("hopping must be finite");
            }
        }
        for m in spatial_grid(self.d, grid_half_width(self.l)) {
            let neg = negate_spatial(&m);
            if dispersion(self, &m) != dispersion(self, &neg) {
                return bad("dispersion is not even");
            }
        }
        Ok(())
    }

    /// `kappa = beta L^d`
    pub fn kappa(&self) -> f64 {
        self.beta * self.l.powi(self.d as i32)
    }

    pub fn g(&self) -> f64 {
        self.lambda.sqrt()
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Fermionic,
    Bosonic,
}

/// Integer labels of a momentum. Unused spatial components are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Momentum {
    pub n0: i64,
    pub m: [i64; 3],
    pub flavor: Flavor,
}

impl Momentum {
    pub fn fermionic(n0: i64, m: [i64; 3]) -> Self {
        Self { n0, m, flavor: Flavor::Fermionic }
    }

    pub fn bosonic(n0: i64, m: [i64; 3]) -> Self {
        Self { n0, m, flavor: Flavor::Bosonic }
    }

    pub fn zero() -> Self {
        Self::bosonic(0, [0; 3])
    }

    pub fn k0(&self, beta: f64) -> f64 {
        match self.flavor {
            Flavor::Fermionic => PI / beta * (2 * self.n0 + 1) as f64,
            Flavor::Bosonic => 2.0 * PI / beta * self.n0 as f64,
        }
    }

    pub fn spatial(&self, l: f64) -> [f64; 3] {
        self.m.map(|mi| 2.0 * PI * mi as f64 / l)
    }

    /// `q0^2 + |q|^2`
    pub fn norm_sq(&self, beta: f64, l: f64) -> f64 {
        let k0 = self.k0(beta);
        k0 * k0 + self.spatial(l).iter().map(|x| x * x).sum::<f64>()
    }

    pub fn neg(&self) -> Self {
        let n0 = match self.flavor {
            Flavor::Fermionic => -self.n0 - 1,
            Flavor::Bosonic => -self.n0,
        };
        Self { n0, m: negate_spatial(&self.m), flavor: self.flavor }
    }

    /// `self - other`. Fermion minus fermion and boson minus boson are bosonic;
    /// fermion minus boson is fermionic.
    pub fn sub(&self, other: &Momentum) -> Momentum {
        let flavor = match (self.flavor, other.flavor) {
            (Flavor::Fermionic, Flavor::Bosonic) => Flavor::Fermionic,
            (Flavor::Bosonic, Flavor::Fermionic) => {
                panic!("boson minus fermion is not on either grid")
            }
            _ => Flavor::Bosonic,
        };
        let m = [self.m[0] - other.m[0], self.m[1] - other.m[1], self.m[2] - other.m[2]];
        Momentum { n0: self.n0 - other.n0, m, flavor }
    }

    pub fn label(&self, d: usize) -> String {
        let sp: Vec<String> = self.m[..d].iter().map(|x| x.to_string()).collect();
        format!("({};{})", self.n0, sp.join(","))
    }
}

fn negate_spatial(m: &[i64; 3]) -> [i64; 3] {
    m.map(|x| -x)
}

fn grid_half_width(l: f64) -> i64 {
    (l / 2.0).floor() as i64
}

fn spatial_grid(d: usize, half: i64) -> Vec<[i64; 3]> {
    let mut out = vec![[0i64; 3]];
    for axis in 0..d {
        let mut next = Vec::new();
        for base in &out {
            for v in -half..=half {
                let mut m = *base;
                m[axis] = v;
                next.push(m);
            }
        }
        out = next;
    }
    out
}

/// `e_k = eps_k - mu` at spatial label `m`.
pub fn dispersion(spec: &ModelSpec, m: &[i64; 3]) -> f64 {
    let eps = match spec.dispersion {
        Dispersion::TightBinding { t } => {
            -2.0 * t * m[..spec.d].iter().map(|&mi| (2.0 * PI * mi as f64 / spec.l).cos()).sum::<f64>()
        }
        Dispersion::Quadratic => {
            0.5 * m[..spec.d]
                .iter()
                .map(|&mi| {
                    let k = 2.0 * PI * mi as f64 / spec.l;
                    k * k
                })
                .sum::<f64>()
        }
    };
    eps - spec.mu
}

fn cutoff_half_width(spec: &ModelSpec) -> i64 {
    match spec.dispersion {
        Dispersion::TightBinding { .. } => grid_half_width(spec.l),
        Dispersion::Quadratic => {
            let kmax2 = 2.0 * (spec.energy_window + spec.mu);
            if kmax2 < 0.0 {
                -1
            } else {
                (spec.l * kmax2.sqrt() / (2.0 * PI)).floor() as i64
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct MomentumSet {
    pub momenta: Vec<Momentum>,
    pub index: HashMap<Momentum, usize>,
    pub k0: Vec<f64>,
    pub e: Vec<f64>,
    /// `a_k = i k0 - e_k`
    pub a: Vec<Complex64>,
}

impl MomentumSet {
    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    /// `|a_k|^2 = k0^2 + e_k^2`
    pub fn abs_a_sq(&self, i: usize) -> f64 {
        self.k0[i] * self.k0[i] + self.e[i] * self.e[i]
    }
}

pub fn build_momentum_set(spec: &ModelSpec) -> Result<MomentumSet> {
    spec.validate()?;
    let nmax = (spec.nu * spec.beta / PI).ceil() as i64 + 1;
    let half = cutoff_half_width(spec);
    let grid = if half < 0 { Vec::new() } else { spatial_grid(spec.d, half) };
    let mut momenta = Vec::new();
    for n0 in -nmax..=nmax {
        let k = Momentum::fermionic(n0, [0; 3]);
        if k.k0(spec.beta).abs() > spec.nu {
            continue;
        }
        for m in &grid {
            if dispersion(spec, m).abs() <= spec.energy_window {
                momenta.push(Momentum::fermionic(n0, *m));
            }
        }
    }
    if momenta.is_empty() {
        return Err(Error::EmptyCutoffSet);
    }
    momenta.sort();
    let index = momenta.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let k0: Vec<f64> = momenta.iter().map(|k| k.k0(spec.beta)).collect();
    let e: Vec<f64> = momenta.iter().map(|k| dispersion(spec, &k.m)).collect();
    let a = k0.iter().zip(&e).map(|(&k0, &e)| Complex64::new(-e, k0)).collect();
    Ok(MomentumSet { momenta, index, k0, e, a })
}

#[derive(Debug, Clone)]
pub struct TransferSet {
    pub q: Vec<Momentum>,
    pub index: HashMap<Momentum, usize>,
    /// `neg[i]` is the index of `-q[i]`.
    pub neg: Vec<usize>,
    pub zero: usize,
}

impl TransferSet {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

pub fn build_transfer_set(m: &MomentumSet) -> TransferSet {
    let mut set = BTreeSet::new();
    for k in &m.momenta {
        for p in &m.momenta {
            set.insert(k.sub(p));
        }
    }
    let q: Vec<Momentum> = set.into_iter().collect();
    let index: HashMap<Momentum, usize> = q.iter().enumerate().map(|(i, x)| (*x, i)).collect();
    let neg = q.iter().map(|x| index[&x.neg()]).collect();
    let zero = index[&Momentum::zero()];
    TransferSet { q, index, neg, zero }
}

/// Spatial-degeneracy hypothesis: every nonzero spatial transfer in `Q`
/// changes the dispersion somewhere on the full spatial grid.
pub fn nondegeneracy_check(spec: &ModelSpec, q: &TransferSet) -> bool {
    let grid = spatial_grid(spec.d, grid_half_width(spec.l));
    let scale = grid.iter().map(|m| dispersion(spec, m).abs()).fold(1.0, f64::max);
    let tol = 1e-12 * scale;
    let spatial: BTreeSet<[i64; 3]> = q.q.iter().map(|x| x.m).filter(|m| *m != [0; 3]).collect();
    spatial.iter().all(|dq| {
        grid.iter().any(|k| {
            let kq = [k[0] + dq[0], k[1] + dq[1], k[2] + dq[2]];
            (dispersion(spec, k) - dispersion(spec, &kq)).abs() > tol
        })
    })
}

/// Model, cutoff set, transfer set and the `k - p` index table in one place.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub spec: ModelSpec,
    pub m: MomentumSet,
    pub q: TransferSet,
    /// `diff[i * N + j]` is the transfer index of `k_i - k_j`.
    pub diff: Vec<usize>,
}

impl Lattice {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let m = build_momentum_set(spec)?;
        let q = build_transfer_set(&m);
        let n = m.len();
        let mut diff = Vec::with_capacity(n * n);
        for k in &m.momenta {
            for p in &m.momenta {
                diff.push(q.index[&k.sub(p)]);
            }
        }
        Ok(Self { spec: spec.clone(), m, q, diff })
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn kappa(&self) -> f64 {
        self.spec.kappa()
    }

    pub fn diff(&self, i: usize, j: usize) -> usize {
        self.diff[i * self.n() + j]
    }

    /// Index in `M` of `k_i - q`, if present.
    pub fn shifted(&self, i: usize, qi: usize) -> Option<usize> {
        self.m.index.get(&self.m.momenta[i].sub(&self.q.q[qi])).copied()
    }

    /// Same lattice with a different coupling; the momentum sets do not depend on it.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { spec: self.spec.with_lambda(lambda), ..self.clone() }
    }

    /// Nonzero transfer with the smallest `q0^2 + |q|^2`; ties broken by label order.
    pub fn q_min(&self) -> Option<usize> {
        let (b, l) = (self.spec.beta, self.spec.l);
        (0..self.q.len()).filter(|&i| i != self.q.zero).min_by(|&i, &j| {
            let (a, c) = (self.q.q[i].norm_sq(b, l), self.q.q[j].norm_sq(b, l));
            a.partial_cmp(&c).unwrap().then(self.q.q[i].cmp(&self.q.q[j]))
        })
    }
}

/// Complex field indexed by the transfer set.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    pub amps: Vec<Complex64>,
    pub kappa: f64,
}

impl FieldConfig {
    pub fn zeros(lat: &Lattice) -> Self {
        Self { amps: vec![Complex64::new(0.0, 0.0); lat.q.len()], kappa: lat.kappa() }
    }

    pub fn sum_sq(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `self + t * other`
    pub fn axpy(&self, t: f64, other: &FieldConfig) -> Self {
        let amps = self.amps.iter().zip(&other.amps).map(|(a, b)| a + b * t).collect();
        Self { amps, kappa: self.kappa }
    }

    pub fn rotated(&self, theta: f64) -> Self {
        let w = Complex64::from_polar(1.0, theta);
        Self { amps: self.amps.iter().map(|z| z * w).collect(), kappa: self.kappa }
    }

    /// Euclidean norm over modes, `sqrt(sum |phi_q|^2)`.
    pub fn l2(&self) -> f64 {
        self.sum_sq().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { amps: self.amps.iter().map(|z| z * s).collect(), kappa: self.kappa }
    }
}

/// `||phi||^2 = (1/kappa) sum_q |phi_q|^2`
pub fn field_norm(phi: &FieldConfig) -> f64 {
    phi.sum_sq() / phi.kappa
}

/// `phi_q = delta_{q,0} sqrt(kappa) r0 e^{i theta}`
pub fn bcs_config(lat: &Lattice, r0: f64, theta: f64) -> FieldConfig {
    let mut phi = FieldConfig::zeros(lat);
    phi.amps[lat.q.zero] = Complex64::from_polar(lat.kappa().sqrt() * r0, theta);
    phi
}

/// Independent Gaussian real and imaginary parts with standard deviation `scale`.
pub fn random_config(lat: &Lattice, scale: f64, seed: u64) -> FieldConfig {
    let mut phi = FieldConfig::zeros(lat);
    if scale == 0.0 {
        return phi;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, scale).expect("scale must be finite and >= 0");
    for z in phi.amps.iter_mut() {
        let re = normal.sample(&mut rng);
        let im = normal.sample(&mut rng);
        *z = Complex64::new(re, im);
    }
    phi
}

/// Unit-norm random direction (Euclidean over modes).
pub fn random_direction(lat: &Lattice, seed: u64) -> FieldConfig {
    let phi = random_config(lat, 1.0, seed);
    let n = phi.l2();
    phi.scaled(1.0 / n)
}

/// `sum_p phi_p conj(phi_{p+q})` over `p` with `p, p+q` in `Q`.
pub fn autocorrelation(lat: &Lattice, phi: &FieldConfig, q: usize) -> Complex64 {
    let dq = lat.q.q[q];
    let mut s = Complex64::new(0.0, 0.0);
    for (i, p) in lat.q.q.iter().enumerate() {
        let pq = p.sub(&dq.neg());
        if let Some(&j) = lat.q.index.get(&pq) {
            s += phi.amps[i] * phi.amps[j].conj();
        }
    }
    s
}
