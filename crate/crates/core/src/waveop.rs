//! Wave operators `W± = s-lim_{s→±∞} e^{isH} e^{-isH₀}` assembled from generalized eigenfunctions.
//!
//! With `ĝ(λ) = ∫ e^{-iλy} g(y) dy`, the operator acts as `W g(x) = (1/2π) ∫ ĝ(λ) Ψ(λ, x) dλ`, where
//! `Ψ(λ) = e^{iλ·} - R_V(λ² ∓ i0) V e^{iλ·}` (upper sign for `W₊`). The `λ` integral is split by the
//! cutoffs of [`CutoffSpec`]: the low part uses the Jost-based resolvent, the high part the Born series
//! `Ψ = Σ_n (-1)^n (R₀V)^n e^{iλ·}`. Both are sampled on Gauss–Legendre panels, so `W*` is the exact
//! adjoint of the discrete operator.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScatterError};
use crate::fourier::{dft_one, fft_multiplier};
use crate::grid::Grid;
use crate::interp::lagrange4_complex;
use crate::jost::JostOptions;
use crate::potential::SampledPotential;
use crate::quad::{gl_panels, second_derivative};
use crate::resolvent::{born_column, stationary_column, CutoffSpec, Limit, PerturbedResolvent};
use crate::scalar::{cis, cre, cx, sup_norm, Real, C};
use crate::signal::{lp_norm, ComplexSignal};

/// Which wave operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Asymptotically free as `t → +∞`; eigenfunctions at `λ² - i0`.
    Plus,
    /// Asymptotically free as `t → -∞`; eigenfunctions at `λ² + i0`.
    Minus,
}

impl Direction {
    pub fn limit(self) -> Limit {
        match self {
            Direction::Plus => Limit::MinusI0,
            Direction::Minus => Limit::PlusI0,
        }
    }
}

/// Energy band of a quadrature node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    Low,
    High,
}

/// Restriction of an application to positive or negative frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyHalf {
    Positive,
    Negative,
    Both,
}

impl FrequencyHalf {
    fn admits<T: Real>(self, lambda: T) -> bool {
        match self {
            FrequencyHalf::Positive => lambda > T::zero(),
            FrequencyHalf::Negative => lambda < T::zero(),
            FrequencyHalf::Both => true,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WaveOpConfig<T> {
    pub cutoff: CutoffSpec<T>,
    /// Maximum number of Born terms after the plane wave.
    pub n_series: usize,
    /// Born terms with sup norm below this stop the series early.
    pub stop_tol: T,
    /// Largest admissible bound on the omitted Born tail.
    pub series_tol: T,
    /// Frequencies beyond `±band` are dropped.
    pub band: T,
    pub panel_width: T,
    pub panel_nodes: usize,
    pub jost: JostOptions<T>,
}

impl<T: Real> WaveOpConfig<T> {
    pub fn for_potential(v: &SampledPotential<T>) -> Self {
        Self {
            cutoff: CutoffSpec::for_potential(v),
            n_series: 60,
            stop_tol: T::lit(1e-13),
            series_tol: T::lit(1e-8),
            band: T::lit(10.0),
            panel_width: T::lit(0.25),
            panel_nodes: 16,
            jost: JostOptions::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_series < 2 {
            return Err(ScatterError::input("n_series must be at least 2"));
        }
        if self.cutoff.low_edge() >= self.band {
            return Err(ScatterError::input("band must exceed the low-energy cutoff support"));
        }
        if !(self.panel_width > T::zero()) || self.panel_nodes < 2 {
            return Err(ScatterError::input("invalid quadrature panels"));
        }
        Ok(())
    }

    /// Quadrature nodes with weights `w_GL · cutoff / 2π`.
    pub fn nodes(&self) -> Vec<(T, T, Band)> {
        let two_pi = T::lit(2.0) * T::PI();
        let mut out = Vec::new();
        let w = self.panel_width.as_f64();
        let (lo, lw) = gl_panels(0.0, self.cutoff.low_edge().as_f64(), w, self.panel_nodes);
        let (hi, hw) = gl_panels(self.cutoff.lambda0.as_f64(), self.band.as_f64(), w, self.panel_nodes);
        for s in [-1.0, 1.0] {
            for (l, wt) in lo.iter().zip(&lw) {
                let l = T::lit(s * l);
                let c = self.cutoff.phi_low(l);
                if c > T::zero() {
                    out.push((l, T::lit(*wt) * c / two_pi, Band::Low));
                }
            }
            for (l, wt) in hi.iter().zip(&hw) {
                let l = T::lit(s * l);
                let c = self.cutoff.phi_high(l);
                if c > T::zero() {
                    out.push((l, T::lit(*wt) * c / two_pi, Band::High));
                }
            }
        }
        out
    }
}

/// Assembled wave operator: `W g = Σ_k w_k ĝ(λ_k) Ψ(λ_k, ·)`.
#[derive(Debug, Clone)]
pub struct WaveOperator<T> {
    pub grid: Grid<T>,
    pub direction: Direction,
    pub config: WaveOpConfig<T>,
    pub lambda: Vec<T>,
    pub weights: Vec<T>,
    pub bands: Vec<Band>,
    pub psi: Vec<Vec<C<T>>>,
    /// Largest bound on the omitted Born tail over the high nodes.
    pub series_tail: T,
    /// Most Born terms used at any node.
    pub series_terms: usize,
}

impl<T: Real> WaveOperator<T> {
    pub fn build(v: &SampledPotential<T>, config: &WaveOpConfig<T>, direction: Direction) -> Result<Self> {
        config.validate()?;
        let nodes = config.nodes();
        let limit = direction.limit();
        let cols: Vec<(Vec<C<T>>, T, usize)> = nodes
            .par_iter()
            .map(|&(l, _, band)| match band {
                Band::Low => {
                    let r = PerturbedResolvent::new(v, l, limit, &config.jost)?;
                    Ok((stationary_column(v, &r), T::zero(), 0))
                }
                Band::High => {
                    let b = born_column(v, l, limit, config.n_series, config.stop_tol)?;
                    let used = b.term_sup.len() - 1;
                    Ok((b.phi, b.tail_bound, used))
                }
            })
            .collect::<Result<_>>()?;
        let series_tail = cols.iter().map(|c| c.1).fold(T::zero(), T::max);
        let series_terms = cols.iter().map(|c| c.2).max().unwrap_or(0);
        if series_tail > config.series_tol {
            let r = (v.l1_norm() / (T::lit(2.0) * config.cutoff.lambda0)).min(T::lit(0.999)).as_f64();
            let extra = ((config.series_tol / series_tail).as_f64().ln() / r.ln()).ceil().max(1.0) as usize;
            return Err(ScatterError::Truncation {
                bound: series_tail.as_f64(),
                tol: config.series_tol.as_f64(),
                suggested: config.n_series + extra,
            });
        }
        Ok(Self {
            grid: v.grid,
            direction,
            config: *config,
            lambda: nodes.iter().map(|n| n.0).collect(),
            weights: nodes.iter().map(|n| n.1).collect(),
            bands: nodes.iter().map(|n| n.2).collect(),
            psi: cols.into_iter().map(|c| c.0).collect(),
            series_tail,
            series_terms,
        })
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// `ĝ(λ_k)` at every node.
    pub fn free_coefficients(&self, g: &ComplexSignal<T>) -> Vec<C<T>> {
        self.lambda.par_iter().map(|&l| dft_one(&g.grid, &g.values, l)).collect()
    }

    /// `<Ψ(λ_k), u>` at every node.
    pub fn distorted_coefficients(&self, u: &ComplexSignal<T>) -> Vec<C<T>> {
        self.psi.par_iter().map(|p| crate::signal::inner(p, &u.values, &self.grid)).collect()
    }

    /// `Σ_k c_k w_k Ψ(λ_k)` over the selected nodes.
    pub fn synthesize(&self, coef: &[C<T>], band: Option<Band>, half: FrequencyHalf) -> ComplexSignal<T> {
        let mut out = vec![cre(T::zero()); self.grid.n];
        for k in 0..self.len() {
            if band.is_some_and(|b| b != self.bands[k]) || !half.admits(self.lambda[k]) {
                continue;
            }
            let c = coef[k] * self.weights[k];
            out.iter_mut().zip(&self.psi[k]).for_each(|(o, p)| *o += *p * c);
        }
        ComplexSignal { grid: self.grid, values: out }
    }

    fn check_grid(&self, g: &ComplexSignal<T>) -> Result<()> {
        if g.grid != self.grid {
            return Err(ScatterError::input("signal grid differs from the operator grid"));
        }
        Ok(())
    }

    pub fn apply(&self, g: &ComplexSignal<T>) -> Result<ComplexSignal<T>> {
        self.apply_part(g, None, FrequencyHalf::Both)
    }

    pub fn apply_part(&self, g: &ComplexSignal<T>, band: Option<Band>, half: FrequencyHalf) -> Result<ComplexSignal<T>> {
        self.check_grid(g)?;
        Ok(self.synthesize(&self.free_coefficients(g), band, half))
    }

    /// High-energy part `W Φ_high(H₀) g`, optionally restricted to one frequency half.
    pub fn high_energy_apply(&self, g: &ComplexSignal<T>, half: FrequencyHalf) -> Result<ComplexSignal<T>> {
        self.apply_part(g, Some(Band::High), half)
    }

    /// Low-energy part `W Φ_low(H₀) g`.
    pub fn low_energy_apply(&self, g: &ComplexSignal<T>) -> Result<ComplexSignal<T>> {
        self.apply_part(g, Some(Band::Low), FrequencyHalf::Both)
    }

    /// `W* u(y) = Σ_k w_k e^{iλ_k y} <Ψ(λ_k), u>`.
    pub fn adjoint(&self, u: &ComplexSignal<T>) -> Result<ComplexSignal<T>> {
        self.check_grid(u)?;
        let c = self.distorted_coefficients(u);
        let g = self.grid;
        let values = (0..g.n)
            .into_par_iter()
            .map(|i| {
                let y = g.x(i);
                (0..self.len()).fold(cre(T::zero()), |s, k| s + cis(self.lambda[k] * y) * (c[k] * self.weights[k]))
            })
            .collect();
        Ok(ComplexSignal { grid: g, values })
    }

    /// `W f(H₀) W* u`, evaluated in node space as `Σ_k w_k f(λ_k) <Ψ(λ_k), u> Ψ(λ_k)`.
    pub fn functional_calculus(&self, u: &ComplexSignal<T>, f: impl Fn(T) -> C<T>) -> Result<ComplexSignal<T>> {
        self.check_grid(u)?;
        let c: Vec<C<T>> = self
            .distorted_coefficients(u)
            .into_iter()
            .zip(&self.lambda)
            .map(|(c, &l)| c * f(l))
            .collect();
        Ok(self.synthesize(&c, None, FrequencyHalf::Both))
    }

    /// Row-major dense kernel `K[i][j]` with `(W g)_i = Σ_j K[i][j] g_j`, sampled every `stride` points.
    pub fn dense_kernel(&self, stride: usize) -> DenseKernel {
        let stride = stride.max(1);
        let g = self.grid;
        let idx: Vec<usize> = (0..g.n).step_by(stride).collect();
        let scale = T::from_count(stride);
        let rows: Vec<Vec<C<f64>>> = idx
            .par_iter()
            .map(|&i| {
                idx.iter()
                    .map(|&j| {
                        let y = g.x(j);
                        let h = g.weight(j) * scale;
                        let s = (0..self.len()).fold(cre(T::zero()), |s, k| {
                            s + self.psi[k][i] * cis(-self.lambda[k] * y) * self.weights[k]
                        });
                        let s = s * h;
                        C::new(s.re.as_f64(), s.im.as_f64())
                    })
                    .collect()
            })
            .collect();
        DenseKernel {
            header: KernelHeader {
                x_min: g.x_min.as_f64(),
                x_max: g.x(*idx.last().expect("grid has points")).as_f64(),
                n: idx.len(),
                lambda0: self.config.cutoff.lambda0.as_f64(),
                cutoff_width: self.config.cutoff.width.as_f64(),
                band: self.config.band.as_f64(),
                direction: self.direction,
                prefactor: "1/(2 pi)".into(),
            },
            values: rows.into_iter().flatten().collect(),
        }
    }
}

/// Metadata stored in front of an exported kernel matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelHeader {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub lambda0: f64,
    pub cutoff_width: f64,
    pub band: f64,
    pub direction: Direction,
    /// Constant multiplying the `λ` integral in the stationary representation.
    pub prefactor: String,
}

/// Dense kernel, row-major.
#[derive(Debug, Clone)]
pub struct DenseKernel {
    pub header: KernelHeader,
    pub values: Vec<C<f64>>,
}

impl DenseKernel {
    /// Length-prefixed JSON header followed by little-endian `(re, im)` pairs.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let header = serde_json::to_vec(&self.header)?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(&(header.len() as u64).to_le_bytes())?;
        f.write_all(&header)?;
        for z in &self.values {
            f.write_all(&z.re.to_le_bytes())?;
            f.write_all(&z.im.to_le_bytes())?;
        }
        f.flush()?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut len = [0u8; 8];
        f.read_exact(&mut len)?;
        let mut header = vec![0u8; u64::from_le_bytes(len) as usize];
        f.read_exact(&mut header)?;
        let header: KernelHeader = serde_json::from_slice(&header)?;
        let mut values = Vec::with_capacity(header.n * header.n);
        let mut buf = [0u8; 16];
        for _ in 0..header.n * header.n {
            f.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(buf[8..].try_into().expect("8 bytes"));
            values.push(C::new(re, im));
        }
        Ok(Self { header, values })
    }
}

/// The Born terms `A_n g = Σ_k w_k ĝ(λ_k) (R₀V)^n e^{iλ_k·}` over the high nodes, `n = 0..=n_max`,
/// so that the high-energy part is `Σ_n (-1)^n A_n g`.
pub fn born_terms<T: Real>(
    v: &SampledPotential<T>,
    config: &WaveOpConfig<T>,
    direction: Direction,
    g: &ComplexSignal<T>,
    n_max: usize,
) -> Result<Vec<ComplexSignal<T>>> {
    config.validate()?;
    let grid = v.grid;
    let limit = direction.limit();
    let high: Vec<(T, T)> = config
        .nodes()
        .into_iter()
        .filter(|n| n.2 == Band::High)
        .map(|n| (n.0, n.1))
        .collect();
    let parts: Vec<Vec<Vec<C<T>>>> = high
        .par_iter()
        .map(|&(l, w)| {
            let c = dft_one(&g.grid, &g.values, l) * w;
            let mut term: Vec<C<T>> = (0..grid.n).map(|i| cis(l * grid.x(i))).collect();
            let mut out = vec![term.iter().map(|t| *t * c).collect::<Vec<_>>()];
            for _ in 0..n_max {
                let vt: Vec<C<T>> = term.iter().zip(&v.values).map(|(t, &p)| *t * p).collect();
                term = crate::resolvent::free_resolvent_apply(&grid, &vt, l, limit)?;
                out.push(term.iter().map(|t| *t * c).collect());
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut sums = vec![vec![cre(T::zero()); grid.n]; n_max + 1];
    for p in parts {
        for (s, t) in sums.iter_mut().zip(p) {
            s.iter_mut().zip(t).for_each(|(a, b)| *a += b);
        }
    }
    Ok(sums.into_iter().map(|values| ComplexSignal { grid, values }).collect())
}

/// First Born term by an independent route: Fourier multipliers and a single `z` integral,
/// `A₁g(x) = ∓(i/2) ∫ V(z) [G_±(z - |x-z|) + G_∓(z + |x-z|)] dz` with
/// `G_±(u) = (1/2π) ∫_{±λ>0} χ_high(λ) ĝ(λ) e^{iλu} / |λ| dλ`.
pub fn first_born_term_direct<T: Real>(
    v: &SampledPotential<T>,
    config: &WaveOpConfig<T>,
    direction: Direction,
    g: &ComplexSignal<T>,
) -> Result<ComplexSignal<T>> {
    let grid = v.grid;
    let n = grid.n;
    let span = grid.x_max - grid.x_min;
    // u = z ∓ |x - z| ranges over [x_min - span, x_max + span]
    let ext = Grid::new(grid.x_min - span, grid.x_max + span, 3 * n - 2)?;
    let mut gext = vec![cre(T::zero()); ext.n];
    gext[n - 1..2 * n - 1].copy_from_slice(&g.values);
    let cut = config.cutoff;
    let band = config.band;
    let multiplier = |sign: T| {
        move |k: T| {
            if k * sign > T::zero() && k.abs() <= band {
                cre(cut.phi_high(k) / k.abs())
            } else {
                cre(T::zero())
            }
        }
    };
    let gp = fft_multiplier(&gext, ext.h(), 2, multiplier(T::one()));
    let gm = fft_multiplier(&gext, ext.h(), 2, multiplier(-T::one()));
    let (first, second, pref) = match direction {
        // λ² - i0: e^{-i|λ||x-z|}
        Direction::Plus => (&gp, &gm, cx(T::zero(), -T::lit(0.5))),
        Direction::Minus => (&gm, &gp, cx(T::zero(), T::lit(0.5))),
    };
    let x0 = ext.x_min;
    let hh = ext.h();
    let support: Vec<usize> = (0..n).filter(|&j| v.values[j] != T::zero()).collect();
    let values = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            let mut acc = cre(T::zero());
            for &j in &support {
                let z = grid.x(j);
                let d = (x - z).abs();
                let a = lagrange4_complex(first, x0, hh, z - d).unwrap_or(cre(T::zero()));
                let b = lagrange4_complex(second, x0, hh, z + d).unwrap_or(cre(T::zero()));
                acc += (a + b) * (v.values[j] * grid.weight(j));
            }
            acc * pref
        })
        .collect();
    Ok(ComplexSignal { grid, values })
}

/// Fit of `||A_n g||_∞ ≤ C n² 2^{-n}` with `C` pinned at `n = 2`.
#[derive(Debug, Clone, Serialize)]
pub struct BornEnvelope {
    pub norms: Vec<f64>,
    pub constant: f64,
    /// `||A_n g||_∞ / (C n² 2^{-n})` for `n = 2..`.
    pub ratios: Vec<f64>,
    pub dominated: bool,
}

/// `norms[k]` is `||A_{k+2} g||_∞`.
pub fn born_envelope(norms: &[f64]) -> Result<BornEnvelope> {
    if norms.len() < 2 {
        return Err(ScatterError::Fit("need at least two Born terms".into()));
    }
    let env = |n: usize| (n * n) as f64 * 0.5f64.powi(n as i32);
    let constant = norms[0] / env(2);
    let ratios: Vec<f64> = norms
        .iter()
        .enumerate()
        .map(|(k, &a)| if constant > 0.0 { a / (constant * env(k + 2)) } else { 0.0 })
        .collect();
    let dominated = ratios.iter().all(|r| *r <= 1.0 + 1e-12);
    Ok(BornEnvelope { norms: norms.to_vec(), constant, ratios, dominated })
}

/// Random test functions for the operator-norm probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProbeFamily {
    /// Gaussian wave packets `e^{ik₀x - (x-x₀)²/(2σ²)}`, `|k₀| ≤ 3`, `σ ∈ [1.2, 2.5]`.
    Packet,
    /// Real Gaussian bumps with `σ ∈ [0.8, 2]`.
    Bump,
    /// `cos(kx)` times a Gaussian, `k ∈ [3, 5]`, `σ ∈ [1.5, 2.5]`.
    Oscillatory,
}

pub fn random_probe<T: Real>(rng: &mut ChaCha8Rng, grid: Grid<T>, family: ProbeFamily) -> ComplexSignal<T> {
    let x0: f64 = rng.random_range(-5.0..5.0);
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let amp: f64 = rng.random_range(0.5..2.0);
    let (k0, sigma, cosine) = match family {
        ProbeFamily::Packet => (rng.random_range(-3.0..3.0), rng.random_range(1.2..2.5), false),
        ProbeFamily::Bump => (0.0, rng.random_range(0.8..2.0), false),
        ProbeFamily::Oscillatory => (rng.random_range(3.0..5.0), rng.random_range(1.5..2.5), true),
    };
    let rot = if family == ProbeFamily::Bump { C::new(1.0, 0.0) } else { C::from_polar(1.0, phase) };
    ComplexSignal::from_fn(grid, |x| {
        let x = x.as_f64();
        let env = amp * (-(x - x0).powi(2) / (2.0 * sigma * sigma)).exp();
        let z = if cosine { rot * (k0 * x).cos() * env } else { rot * C::from_polar(env, k0 * x) };
        cx(T::lit(z.re), T::lit(z.im))
    })
}

/// The test suite used by the probes: families cycled in order, one seeded stream.
pub fn probe_suite<T: Real>(grid: Grid<T>, n: usize, seed: u64) -> Vec<ComplexSignal<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fams = [ProbeFamily::Packet, ProbeFamily::Bump, ProbeFamily::Oscillatory];
    (0..n).map(|k| random_probe(&mut rng, grid, fams[k % 3])).collect()
}

/// Empirical operator-norm ratios over a suite and over its first half.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub p: f64,
    pub samples: usize,
    pub max_ratio: f64,
    pub max_ratio_half: f64,
    /// `|max_ratio - max_ratio_half| / max_ratio_half`.
    pub variation: f64,
}

fn finish_report(p: f64, ratios: &[f64]) -> ProbeReport {
    let half = ratios.len() / 2;
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let max_ratio_half = ratios[..half.max(1)].iter().cloned().fold(0.0, f64::max);
    let variation = if max_ratio_half > 0.0 { (max_ratio - max_ratio_half).abs() / max_ratio_half } else { 0.0 };
    ProbeReport { p, samples: ratios.len(), max_ratio, max_ratio_half, variation }
}

/// `max ||W g||_p / ||g||_p` over `n_samples` probes (and over the first half of them).
pub fn lp_bound_probe<T: Real>(op: &WaveOperator<T>, p: T, n_samples: usize, seed: u64) -> Result<ProbeReport> {
    if !(p > T::one()) || !p.is_finite() {
        return Err(ScatterError::input("p must be finite and greater than 1"));
    }
    let suite = probe_suite(op.grid, n_samples.max(2), seed);
    let ratios = suite
        .iter()
        .map(|g| Ok((op.apply(g)?.lp_norm(p) / g.lp_norm(p)).as_f64()))
        .collect::<Result<Vec<_>>>()?;
    Ok(finish_report(p.as_f64(), &ratios))
}

/// `H g = -g'' + V g` by five-point differences.
pub fn apply_hamiltonian<T: Real>(v: &SampledPotential<T>, g: &ComplexSignal<T>) -> ComplexSignal<T> {
    let h = g.grid.h();
    let re: Vec<T> = g.values.iter().map(|z| z.re).collect();
    let im: Vec<T> = g.values.iter().map(|z| z.im).collect();
    let (dr, di) = (second_derivative(&re, h), second_derivative(&im, h));
    let values = (0..g.grid.n).map(|i| cx(-dr[i], -di[i]) + g.values[i] * v.values[i]).collect();
    ComplexSignal { grid: g.grid, values }
}

/// `max ||W g||_∞ / (||g||_∞ + ||H g||_∞)` over `n_samples` probes (and over the first half).
pub fn endpoint_probe<T: Real>(
    op: &WaveOperator<T>,
    v: &SampledPotential<T>,
    n_samples: usize,
    seed: u64,
) -> Result<ProbeReport> {
    let suite = probe_suite(op.grid, n_samples.max(2), seed);
    let ratios = suite
        .iter()
        .map(|g| {
            let hg = apply_hamiltonian(v, g);
            let w = op.apply(g)?;
            Ok((w.sup_norm() / (g.sup_norm() + hg.sup_norm())).as_f64())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish_report(f64::INFINITY, &ratios))
}

/// `||u||_∞` relative to `||g||_∞`; a small helper for the term-decay diagnostics.
pub fn sup_ratio<T: Real>(u: &ComplexSignal<T>, g: &ComplexSignal<T>) -> f64 {
    (sup_norm(&u.values) / sup_norm(&g.values)).as_f64()
}

/// Relative `L²` distance `||a - b||₂ / ||b||₂`.
pub fn relative_l2<T: Real>(a: &ComplexSignal<T>, b: &ComplexSignal<T>) -> f64 {
    let d: Vec<C<T>> = a.values.iter().zip(&b.values).map(|(x, y)| *x - *y).collect();
    let h = a.grid.h();
    (lp_norm(&d, h, T::lit(2.0)) / lp_norm(&b.values, h, T::lit(2.0))).as_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> Grid<f64> {
        Grid::new(-20.0, 20.0, 1025).unwrap()
    }

    #[test]
    fn free_operator_is_identity() {
        let g = small_grid();
        let v = SampledPotential::zero(g);
        let cfg = WaveOpConfig::for_potential(&v);
        let op = WaveOperator::build(&v, &cfg, Direction::Plus).unwrap();
        for f in probe_suite(g, 6, 7) {
            let w = op.apply(&f).unwrap();
            assert!(relative_l2(&w, &f) < 1e-8, "{}", relative_l2(&w, &f));
            let a = op.adjoint(&f).unwrap();
            assert!(relative_l2(&a, &f) < 1e-8);
        }
    }

    #[test]
    fn adjoint_pairing() {
        let g = small_grid();
        let v = SampledPotential::poschl_teller(g, 1.0);
        let cfg = WaveOpConfig::for_potential(&v);
        let op = WaveOperator::build(&v, &cfg, Direction::Plus).unwrap();
        let s = probe_suite(g, 2, 3);
        let lhs = op.apply(&s[0]).unwrap().inner(&s[1]);
        let rhs = s[0].inner(&op.adjoint(&s[1]).unwrap());
        assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()), "{lhs} vs {rhs}");
    }

    #[test]
    fn first_born_term_routes_agree() {
        let g = small_grid();
        let v = SampledPotential::poschl_teller(g, 1.0);
        let cfg = WaveOpConfig::for_potential(&v);
        let f = probe_suite(g, 1, 11).remove(0);
        for dir in [Direction::Plus, Direction::Minus] {
            let terms = born_terms(&v, &cfg, dir, &f, 1).unwrap();
            let direct = first_born_term_direct(&v, &cfg, dir, &f).unwrap();
            let err = sup_norm(&terms[1].sub(&direct).values);
            assert!(err < 1e-4 * (1.0 + terms[1].sup_norm()), "{dir:?}: {err}");
        }
    }

    #[test]
    fn envelope_fit() {
        let norms: Vec<f64> = (2..9).map(|n| 3.0 * 0.3f64.powi(n)).collect();
        assert!(born_envelope(&norms).unwrap().dominated);
        let rising: Vec<f64> = (2..9).map(|n| n as f64).collect();
        assert!(!born_envelope(&rising).unwrap().dominated);
    }

    #[test]
    fn dense_export_round_trip() {
        let g = Grid::new(-6.0, 6.0, 121).unwrap();
        let v = SampledPotential::square_well(g, 0.5, 1.0).unwrap();
        let mut cfg = WaveOpConfig::for_potential(&v);
        cfg.band = 4.0;
        let op = WaveOperator::build(&v, &cfg, Direction::Minus).unwrap();
        let k = op.dense_kernel(1);
        let path = std::env::temp_dir().join("scatter1d_dense_kernel.bin");
        k.write(&path).unwrap();
        let back = DenseKernel::read(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(back.header, k.header);
        assert_eq!(back.values, k.values);
        let f = probe_suite(g, 1, 5).remove(0);
        let w = op.apply(&f).unwrap();
        for i in (0..g.n).step_by(13) {
            let row: C<f64> = (0..g.n).map(|j| k.values[i * g.n + j] * f.values[j]).sum();
            assert!((row - w.values[i]).norm() < 1e-10);
        }
    }
}
