//! Bivariate (complex) empirical mode decomposition and classical EMD.
//!
//! The bivariate variant projects the complex signal on `M` directions
//! `φ_m = 2πm/M`, `m = 1..M`. For each direction the complex samples located at
//! the local maxima of the projection are interpolated by a natural cubic
//! spline, and the mean of the `M` envelopes is the local mean removed during
//! sifting.

pub mod spline;

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interval_ts::ComplexSeries;
use spline::NaturalSpline;

/// Minimum series length accepted by the decompositions.
pub const MIN_DECOMPOSE_LEN: usize = 8;

/// Relative tolerance under which neighbouring samples count as equal when
/// locating extrema. Keeps plateau tie-breaking stable under rounding noise.
const EXTREMUM_REL_TOL: f64 = 1e-12;

/// How maxima are extended past the series ends before spline fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryExtension {
    /// Two maxima mirrored about each endpoint.
    Mirror,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiftConfig {
    /// Number of projection directions; a positive multiple of 4.
    pub num_directions: usize,
    pub max_sift_iterations: usize,
    /// Cauchy-type stopping tolerance on the squared-magnitude ratio.
    pub sd_threshold: f64,
    /// `None` extracts modes until the residual stops oscillating.
    pub max_imfs: Option<usize>,
    pub boundary_extension: BoundaryExtension,
    /// Decomposition stops once `max |residual| <= residual_tolerance * max |input|`.
    pub residual_tolerance: f64,
}

impl Default for SiftConfig {
    fn default() -> Self {
        Self {
            num_directions: 64,
            max_sift_iterations: 100,
            sd_threshold: 0.04,
            max_imfs: None,
            boundary_extension: BoundaryExtension::Mirror,
            residual_tolerance: 1e-10,
        }
    }
}

impl SiftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_directions < 4 || self.num_directions % 4 != 0 {
            return Err(Error::InvalidParameter(format!(
                "number of directions must be a positive multiple of 4, got {}",
                self.num_directions
            )));
        }
        if !(self.sd_threshold > 0.0) {
            return Err(Error::InvalidParameter("sd_threshold must be positive".into()));
        }
        if self.max_sift_iterations == 0 {
            return Err(Error::InvalidParameter("max_sift_iterations must be positive".into()));
        }
        if self.max_imfs == Some(0) {
            return Err(Error::InvalidParameter("max_imfs must be positive".into()));
        }
        Ok(())
    }

    /// `(cos φ_m, sin φ_m)` for `m = 1..M`.
    ///
    /// Values come from one first-quadrant table so that `cos(π/2 - φ)` and
    /// `sin φ` are bit-identical; swapping real and imaginary parts of the
    /// input then permutes the projections exactly.
    pub fn directions(&self) -> Vec<(f64, f64)> {
        let m = self.num_directions;
        let quarter = m / 4;
        let base: Vec<f64> = (0..=quarter)
            .map(|k| {
                if k == quarter {
                    0.0
                } else if k == 0 {
                    1.0
                } else {
                    (2.0 * std::f64::consts::PI * k as f64 / m as f64).cos()
                }
            })
            .collect();
        (1..=m)
            .map(|idx| {
                let idx = idx % m;
                let (q, r) = (idx / quarter, idx % quarter);
                let (c, s) = (base[r], base[quarter - r]);
                match q {
                    0 => (c, s),
                    1 => (-s, c),
                    2 => (-c, -s),
                    _ => (s, -c),
                }
            })
            .collect()
    }
}

/// Components returned by a decomposition. Samples are `Complex64` for the
/// bivariate variant and `f64` for classical EMD.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<T> {
    pub imfs: Vec<Vec<T>>,
    pub residual: Vec<T>,
    /// Sifting iterations used for each IMF.
    pub sift_counts: Vec<usize>,
}

/// Sample types the decompositions operate on.
pub trait Sample: Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> + PartialEq {
    const ZERO: Self;
    fn magnitude(self) -> f64;
}

impl Sample for f64 {
    const ZERO: Self = 0.0;
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Sample for Complex64 {
    const ZERO: Self = Complex64 { re: 0.0, im: 0.0 };
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

impl<T: Sample> Decomposition<T> {
    pub fn num_imfs(&self) -> usize {
        self.imfs.len()
    }

    /// Sum of all IMFs and the residual.
    pub fn reconstruct(&self) -> Vec<T> {
        let mut out = self.residual.clone();
        for imf in &self.imfs {
            for (o, &v) in out.iter_mut().zip(imf) {
                *o = *o + v;
            }
        }
        out
    }

    /// `max_t |input_t - reconstruction_t| / max_t |input_t|`.
    pub fn reconstruction_error(&self, input: &[T]) -> f64 {
        let scale = input.iter().map(|v| v.magnitude()).fold(0.0, f64::max);
        let err = input
            .iter()
            .zip(self.reconstruct())
            .map(|(&a, b)| (a - b).magnitude())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            err
        } else {
            err / scale
        }
    }

    /// All components, IMFs first and the residual last.
    pub fn components(&self) -> impl Iterator<Item = &Vec<T>> {
        self.imfs.iter().chain(std::iter::once(&self.residual))
    }

    /// Inserts all-zero IMFs until there are `count` of them, so that series
    /// decomposed at different times expose the same component layout.
    pub fn padded_to(mut self, count: usize) -> Self {
        let n = self.residual.len();
        while self.imfs.len() < count {
            self.imfs.push(vec![T::ZERO; n]);
            self.sift_counts.push(0);
        }
        self
    }
}

impl Decomposition<Complex64> {
    /// Writes `t,component,part,value` rows.
    pub fn write_dump<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "component", "part", "value"])?;
        for (name, comp) in component_names(self.imfs.len()).iter().zip(self.components()) {
            for (t, v) in comp.iter().enumerate() {
                w.write_record([t.to_string(), name.clone(), "re".into(), v.re.to_string()])?;
                w.write_record([t.to_string(), name.clone(), "im".into(), v.im.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl Decomposition<f64> {
    pub fn write_dump<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "component", "part", "value"])?;
        for (name, comp) in component_names(self.imfs.len()).iter().zip(self.components()) {
            for (t, v) in comp.iter().enumerate() {
                w.write_record([t.to_string(), name.clone(), "re".into(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn component_names(imfs: usize) -> Vec<String> {
    (1..=imfs).map(|i| format!("imf{i}")).chain(std::iter::once("residual".to_string())).collect()
}

/// Projection `Re(e^{-iφ} c_t) = Re(c_t) cos φ + Im(c_t) sin φ`.
pub fn project(c: &[Complex64], phi: f64) -> Vec<f64> {
    project_cs(c, phi.cos(), phi.sin())
}

fn project_cs(c: &[Complex64], cos: f64, sin: f64) -> Vec<f64> {
    c.iter().map(|z| z.re * cos + z.im * sin).collect()
}

fn check_len(len: usize, needed: usize) -> Result<()> {
    if len < needed {
        Err(Error::TooShort { needed, got: len })
    } else {
        Ok(())
    }
}

fn equality_tolerance(p: &[f64]) -> f64 {
    EXTREMUM_REL_TOL * p.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Interior local maxima: a strict rise into `t` followed by no rise out of it.
/// A flat top reports its first index; endpoints are never reported.
pub fn find_local_maxima(p: &[f64]) -> Result<Vec<usize>> {
    check_len(p.len(), 3)?;
    let tol = equality_tolerance(p);
    Ok((1..p.len() - 1).filter(|&t| p[t] - p[t - 1] > tol && p[t + 1] - p[t] <= tol).collect())
}

/// Interior local minima, mirror image of [`find_local_maxima`].
pub fn find_local_minima(p: &[f64]) -> Result<Vec<usize>> {
    check_len(p.len(), 3)?;
    let tol = equality_tolerance(p);
    Ok((1..p.len() - 1).filter(|&t| p[t - 1] - p[t] > tol && p[t] - p[t + 1] <= tol).collect())
}

/// Adds an endpoint to the knot set when it lies beyond the nearest extremum
/// (above it for maxima, `sign = 1`; below it for minima, `sign = -1`), so the
/// envelope does not cut through a trend running off the end of the sample.
fn with_endpoints(p: &[f64], mut idx: Vec<usize>, sign: f64) -> Vec<usize> {
    if idx.len() < 2 {
        return idx;
    }
    let tol = equality_tolerance(p);
    let last = p.len() - 1;
    if sign * (p[last] - p[idx[idx.len() - 1]]) > tol {
        idx.push(last);
    }
    if sign * (p[0] - p[idx[0]]) > tol {
        idx.insert(0, 0);
    }
    idx
}

/// Knot times and sample indices after mirroring two knots about each end.
/// A knot sitting on the endpoint is the mirror axis and is not duplicated.
fn mirrored_knots(idx: &[usize], n: usize) -> Vec<(f64, usize)> {
    let last = n - 1;
    let mut knots = Vec::with_capacity(idx.len() + 4);
    let head: Vec<usize> = idx.iter().copied().filter(|&i| i != 0).take(2).collect();
    knots.extend(head.iter().rev().map(|&i| (-(i as f64), i)));
    knots.extend(idx.iter().map(|&i| (i as f64, i)));
    let tail: Vec<usize> = idx.iter().rev().copied().filter(|&i| i != last).take(2).collect();
    knots.extend(tail.iter().map(|&i| (2.0 * last as f64 - i as f64, i)));
    knots
}

fn complex_spline_through(c: &[Complex64], idx: &[usize]) -> Result<Vec<Complex64>> {
    if idx.len() < 2 {
        return Err(Error::InsufficientExtrema);
    }
    let (knots, values): (Vec<f64>, Vec<[f64; 2]>) =
        mirrored_knots(idx, c.len()).into_iter().map(|(t, i)| (t, [c[i].re, c[i].im])).unzip();
    let spline = NaturalSpline::fit(knots, values);
    Ok(spline.eval_grid(c.len()).into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
}

fn real_spline_through(x: &[f64], idx: &[usize]) -> Result<Vec<f64>> {
    if idx.len() < 2 {
        return Err(Error::InsufficientExtrema);
    }
    let (knots, values): (Vec<f64>, Vec<[f64; 1]>) =
        mirrored_knots(idx, x.len()).into_iter().map(|(t, i)| (t, [x[i]])).unzip();
    Ok(NaturalSpline::fit(knots, values).eval_grid(x.len()).into_iter().map(|[v]| v).collect())
}

/// Envelope of `c` along direction `φ`: a spline through the complex samples
/// at the maxima of the projection.
pub fn envelope(c: &[Complex64], phi: f64) -> Result<Vec<Complex64>> {
    envelope_cs(c, phi.cos(), phi.sin())
}

fn envelope_cs(c: &[Complex64], cos: f64, sin: f64) -> Result<Vec<Complex64>> {
    let p = project_cs(c, cos, sin);
    let maxima = find_local_maxima(&p)?;
    complex_spline_through(c, &with_endpoints(&p, maxima, 1.0))
}

/// Mean of the envelopes over all configured directions.
pub fn mean_envelope(c: &[Complex64], cfg: &SiftConfig) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    let dirs = cfg.directions();
    let envelopes = dirs
        .iter()
        .map(|&(cos, sin)| envelope_cs(c, cos, sin))
        .collect::<Result<Vec<_>>>()?;
    let m = dirs.len() as f64;
    let mut re = vec![0.0; dirs.len()];
    let mut im = vec![0.0; dirs.len()];
    Ok((0..c.len())
        .map(|t| {
            for (k, e) in envelopes.iter().enumerate() {
                re[k] = e[t].re;
                im[k] = e[t].im;
            }
            Complex64::new(ordered_sum(&mut re) / m, ordered_sum(&mut im) / m)
        })
        .collect())
}

/// Sum taken in ascending order, so the result depends only on the multiset
/// of values and not on the direction ordering.
fn ordered_sum(v: &mut [f64]) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    v.iter().sum()
}

fn sd_ratio<T: Sample>(mean: &[T], h: &[T]) -> f64 {
    let num: f64 = mean.iter().map(|v| v.magnitude().powi(2)).sum();
    let den: f64 = h.iter().map(|v| v.magnitude().powi(2)).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn sift_with<T: Sample>(
    x: &[T],
    cfg: &SiftConfig,
    mean_of: impl Fn(&[T]) -> Result<Vec<T>>,
) -> Result<(Vec<T>, usize)> {
    let mut h = x.to_vec();
    let mut iterations = 0;
    loop {
        let mean = match mean_of(&h) {
            Ok(m) => m,
            Err(Error::InsufficientExtrema) if iterations > 0 => break,
            Err(e) => return Err(e),
        };
        let sd = sd_ratio(&mean, &h);
        for (v, &m) in h.iter_mut().zip(&mean) {
            *v = *v - m;
        }
        iterations += 1;
        if sd < cfg.sd_threshold || iterations >= cfg.max_sift_iterations {
            break;
        }
    }
    Ok((h, iterations))
}

/// Extracts one bivariate IMF by repeated mean-envelope subtraction.
pub fn sift(c: &[Complex64], cfg: &SiftConfig) -> Result<(Vec<Complex64>, usize)> {
    cfg.validate()?;
    sift_with(c, cfg, |h| mean_envelope(h, cfg))
}

/// True when no projection of `c` has two or more interior maxima.
fn bivariate_exhausted(c: &[Complex64], cfg: &SiftConfig) -> Result<bool> {
    for (cos, sin) in cfg.directions() {
        if find_local_maxima(&project_cs(c, cos, sin))?.len() >= 2 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn decompose_with<T: Sample>(
    x: &[T],
    cfg: &SiftConfig,
    exhausted: impl Fn(&[T]) -> Result<bool>,
    sift_one: impl Fn(&[T]) -> Result<(Vec<T>, usize)>,
) -> Result<Decomposition<T>> {
    check_len(x.len(), MIN_DECOMPOSE_LEN)?;
    cfg.validate()?;
    let scale = x.iter().map(|v| v.magnitude()).fold(0.0, f64::max);
    let mut residual = x.to_vec();
    let mut imfs = Vec::new();
    let mut sift_counts = Vec::new();
    while cfg.max_imfs.is_none_or(|m| imfs.len() < m) {
        let size = residual.iter().map(|v| v.magnitude()).fold(0.0, f64::max);
        if size <= cfg.residual_tolerance * scale || exhausted(&residual)? {
            break;
        }
        let (imf, iterations) = match sift_one(&residual) {
            Ok(r) => r,
            Err(Error::InsufficientExtrema) => break,
            Err(e) => return Err(e),
        };
        for (r, &v) in residual.iter_mut().zip(&imf) {
            *r = *r - v;
        }
        imfs.push(imf);
        sift_counts.push(iterations);
    }
    Ok(Decomposition { imfs, residual, sift_counts })
}

/// Bivariate EMD of a complex sample vector.
pub fn bemd_decompose_samples(c: &[Complex64], cfg: &SiftConfig) -> Result<Decomposition<Complex64>> {
    decompose_with(c, cfg, |r| bivariate_exhausted(r, cfg), |r| sift(r, cfg))
}

/// Bivariate EMD of a complex series.
pub fn bemd_decompose(c: &ComplexSeries, cfg: &SiftConfig) -> Result<Decomposition<Complex64>> {
    bemd_decompose_samples(c.samples(), cfg)
}

/// Mean of the upper (maxima) and lower (minima) spline envelopes.
pub fn real_mean_envelope(x: &[f64]) -> Result<Vec<f64>> {
    let upper = real_spline_through(x, &with_endpoints(x, find_local_maxima(x)?, 1.0))?;
    let lower = real_spline_through(x, &with_endpoints(x, find_local_minima(x)?, -1.0))?;
    Ok(upper.iter().zip(&lower).map(|(u, l)| (u + l) / 2.0).collect())
}

/// Classical univariate EMD.
pub fn emd_decompose(x: &[f64], cfg: &SiftConfig) -> Result<Decomposition<f64>> {
    decompose_with(
        x,
        cfg,
        |r| Ok(find_local_maxima(r)?.len() < 2 || find_local_minima(r)?.len() < 2),
        |r| sift_with(r, cfg, real_mean_envelope),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tone(period: f64, n: usize) -> Vec<Complex64> {
        (0..n).map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / period)).collect()
    }

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn projection_examples() {
        let z = [c(1.0, 1.0)];
        assert!((project(&z, 0.0)[0] - 1.0).abs() < 1e-15);
        assert!((project(&z, PI / 2.0)[0] - 1.0).abs() < 1e-15);
        assert!((project(&z, PI)[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn maxima_examples() {
        assert_eq!(find_local_maxima(&[0.0, 1.0, 0.0, 1.0, 0.0]).unwrap(), vec![1, 3]);
        assert_eq!(find_local_maxima(&[0.0, 2.0, 1.0, 3.0, 0.0]).unwrap(), vec![1, 3]);
        assert!(find_local_maxima(&[5.0; 4]).unwrap().is_empty());
        assert_eq!(find_local_maxima(&[0.0, 1.0, 1.0, 1.0, 0.0]).unwrap(), vec![1]);
        assert!(matches!(find_local_maxima(&[1.0, 2.0]), Err(Error::TooShort { .. })));
        assert_eq!(find_local_minima(&[1.0, 0.0, 1.0, 0.0, 1.0]).unwrap(), vec![1, 3]);
    }

    #[test]
    fn direction_table_matches_trig_and_is_symmetric() {
        let cfg = SiftConfig { num_directions: 64, ..Default::default() };
        let d = cfg.directions();
        for (m, &(cs, sn)) in d.iter().enumerate() {
            let phi = 2.0 * PI * (m + 1) as f64 / 64.0;
            assert!((cs - phi.cos()).abs() < 1e-15 && (sn - phi.sin()).abs() < 1e-15);
            // φ' = π/2 - φ lives at index (16 - (m+1)) mod 64.
            let mirror = (16 + 64 - (m + 1)) % 64;
            let (cs2, sn2) = d[(mirror + 63) % 64];
            assert_eq!(cs2.abs(), sn.abs());
            assert_eq!(sn2, cs);
        }
    }

    #[test]
    fn constant_knots_give_constant_envelope() {
        // Maxima of the projection at t = 2 and 4 carry the same complex value.
        let x = vec![c(0.0, 0.0), c(0.5, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)];
        let e = envelope(&x, 0.0).unwrap();
        for v in e {
            assert_eq!(v, c(1.0, 0.0));
        }
    }

    #[test]
    fn envelope_needs_two_maxima() {
        let x: Vec<_> = (0..10).map(|t| c(t as f64, 0.0)).collect();
        assert!(matches!(envelope(&x, 0.0), Err(Error::InsufficientExtrema)));
    }

    #[test]
    fn constant_signal_mean_envelope_and_sift() {
        // Constant signals have no maxima, so the mean envelope is undefined.
        let x = vec![c(2.0, 3.0); 16];
        assert!(matches!(mean_envelope(&x, &SiftConfig::default()), Err(Error::InsufficientExtrema)));
    }

    #[test]
    fn fast_tone_mean_envelope_is_small() {
        let x = tone(8.0, 120);
        let o = mean_envelope(&x, &SiftConfig::default()).unwrap();
        let peak = o.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(peak <= 0.05, "peak {peak}");
    }

    #[test]
    fn mean_envelope_ignores_direction_order() {
        let x: Vec<_> = (0..64)
            .map(|t| {
                let t = t as f64;
                Complex64::from_polar(1.0, 2.0 * PI * t / 9.0) + c((t / 5.0).sin(), (t / 7.0).cos())
            })
            .collect();
        let cfg = SiftConfig { num_directions: 4, ..Default::default() };
        let a = mean_envelope(&x, &cfg).unwrap();
        let dirs = cfg.directions();
        let mut rev: Vec<Vec<Complex64>> = dirs.iter().rev().map(|&(cs, sn)| envelope_cs(&x, cs, sn).unwrap()).collect();
        rev.reverse();
        for t in 0..x.len() {
            let s: Complex64 = rev.iter().map(|e| e[t]).sum::<Complex64>() / 4.0;
            assert!((s - a[t]).norm() < 1e-12);
        }
    }

    #[test]
    fn infinite_threshold_sifts_once() {
        let x = tone(8.0, 64);
        let cfg = SiftConfig { sd_threshold: f64::INFINITY, ..Default::default() };
        let (h, k) = sift(&x, &cfg).unwrap();
        assert_eq!(k, 1);
        let o = mean_envelope(&x, &cfg).unwrap();
        for t in 0..x.len() {
            assert_eq!(h[t], x[t] - o[t]);
        }
    }

    #[test]
    fn imf_is_a_sift_fixed_point() {
        let x = tone(8.0, 120);
        let cfg = SiftConfig::default();
        let (h, k) = sift(&x, &cfg).unwrap();
        assert_eq!(k, 1);
        for (a, b) in h.iter().zip(&x) {
            assert!((a - b).norm() < 0.05);
        }
    }

    #[test]
    fn two_tone_first_imf_tracks_fast_tone() {
        let fast = tone(8.0, 512);
        let slow = tone(64.0, 512);
        let x: Vec<_> = fast.iter().zip(&slow).map(|(a, b)| a + b).collect();
        let (h, _) = sift(&x, &SiftConfig::default()).unwrap();
        let re: Vec<f64> = h.iter().map(|v| v.re).collect();
        let im: Vec<f64> = h.iter().map(|v| v.im).collect();
        let fre: Vec<f64> = fast.iter().map(|v| v.re).collect();
        let fim: Vec<f64> = fast.iter().map(|v| v.im).collect();
        assert!(corr(&re, &fre) >= 0.95, "re corr {}", corr(&re, &fre));
        assert!(corr(&im, &fim) >= 0.95, "im corr {}", corr(&im, &fim));
    }

    #[test]
    fn single_tone_gives_one_imf() {
        let x = tone(8.0, 120);
        let d = bemd_decompose_samples(&x, &SiftConfig::default()).unwrap();
        assert_eq!(d.num_imfs(), 1);
        let re: Vec<f64> = d.imfs[0].iter().map(|v| v.re).collect();
        let xr: Vec<f64> = x.iter().map(|v| v.re).collect();
        assert!(corr(&re, &xr) >= 0.99);
        assert!(d.residual.iter().all(|v| v.norm() <= 0.05));
        assert!(d.reconstruction_error(&x) <= 1e-8);
    }

    #[test]
    fn ramp_has_no_imfs() {
        let x: Vec<_> = (0..40).map(|t| c(t as f64, t as f64)).collect();
        let d = bemd_decompose_samples(&x, &SiftConfig::default()).unwrap();
        assert_eq!(d.num_imfs(), 0);
        assert_eq!(d.residual, x);
        let r: Vec<f64> = (0..40).map(|t| t as f64 * 0.5).collect();
        let d = emd_decompose(&r, &SiftConfig::default()).unwrap();
        assert_eq!(d.num_imfs(), 0);
        assert_eq!(d.residual, r);
    }

    #[test]
    fn short_series_rejected() {
        let x = vec![c(0.0, 1.0); 7];
        assert!(matches!(bemd_decompose_samples(&x, &SiftConfig::default()), Err(Error::TooShort { .. })));
        assert!(matches!(emd_decompose(&[0.0; 5], &SiftConfig::default()), Err(Error::TooShort { .. })));
    }

    #[test]
    fn emd_sine_is_dominant_imf() {
        let x: Vec<f64> = (0..256).map(|t| (2.0 * PI * t as f64 / 16.0).sin()).collect();
        let d = emd_decompose(&x, &SiftConfig::default()).unwrap();
        assert!(d.num_imfs() >= 1);
        assert!(corr(&d.imfs[0], &x) >= 0.99);
        assert!(d.reconstruction_error(&x) <= 1e-8);
    }

    #[test]
    fn config_validation() {
        assert!(SiftConfig { num_directions: 6, ..Default::default() }.validate().is_err());
        assert!(SiftConfig { sd_threshold: 0.0, ..Default::default() }.validate().is_err());
        assert!(SiftConfig::default().validate().is_ok());
    }

    #[test]
    fn padding_keeps_reconstruction() {
        let x = tone(8.0, 60);
        let d = bemd_decompose_samples(&x, &SiftConfig::default()).unwrap().padded_to(3);
        assert_eq!(d.num_imfs(), 3);
        assert!(d.reconstruction_error(&x) <= 1e-8);
    }
}
