//! FFT-based operators on the periodic grid: Biot–Savart, sharp low-pass
//! filtering, derivatives, Poisson solves and shell spectra.
//!
//! Spectra are normalised so that a coefficient is the Fourier-series
//! amplitude, `f(x) = Σ f̂_k e^{i k·x}`; Parseval then reads
//! `mean(|f|²) = Σ |f̂_k|²`.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{CmmError, Result};
use crate::grid::{GridSpec, HermiteField};
use crate::real::Real;

pub type Spectrum<T> = Vec<Complex<T>>;

/// FFT plans and wavenumber tables for one grid.
///
/// Operators take `&self` and allocate their own buffers, so a workspace can
/// be shared between threads.
pub struct SpectralWorkspace<T: Real> {
    grid: GridSpec<T>,
    fwd_x: Arc<dyn Fft<T>>,
    inv_x: Arc<dyn Fft<T>>,
    fwd_y: Arc<dyn Fft<T>>,
    inv_y: Arc<dyn Fft<T>>,
    /// integer mode numbers in FFT order
    mx: Vec<i64>,
    my: Vec<i64>,
    /// 2π / l per axis, converts mode numbers to wavenumbers
    sx: T,
    sy: T,
}

impl<T: Real> std::fmt::Debug for SpectralWorkspace<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralWorkspace").field("grid", &self.grid).finish()
    }
}

fn mode_numbers(n: usize) -> Vec<i64> {
    (0..n)
        .map(|i| if i <= n / 2 { i as i64 } else { i as i64 - n as i64 })
        .collect()
}

fn check_cutoff<T: Real>(cutoff: T) -> Result<()> {
    if cutoff > T::zero() && cutoff <= T::one() {
        Ok(())
    } else {
        Err(CmmError::InvalidArgument(format!(
            "cutoff fraction {cutoff} outside (0, 1]"
        )))
    }
}

fn check_finite<T: Real>(what: &str, v: &[T]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(CmmError::NonFinite(what.to_string()))
    }
}

impl<T: Real> SpectralWorkspace<T> {
    pub fn new(grid: GridSpec<T>) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            fwd_x: planner.plan_fft_forward(grid.nx),
            inv_x: planner.plan_fft_inverse(grid.nx),
            fwd_y: planner.plan_fft_forward(grid.ny),
            inv_y: planner.plan_fft_inverse(grid.ny),
            mx: mode_numbers(grid.nx),
            my: mode_numbers(grid.ny),
            sx: T::TAU() / grid.lx,
            sy: T::TAU() / grid.ly,
            grid,
        }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    /// Largest resolved mode number per axis (`n / 2`).
    pub fn kmax(&self) -> usize {
        self.grid.nx.min(self.grid.ny) / 2
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.grid.len() && len > 0 {
            Ok(())
        } else {
            Err(CmmError::GridMismatch {
                expected: self.grid.describe(),
                got: format!("{len} values"),
            })
        }
    }

    fn fft2(&self, buf: &mut [Complex<T>], inverse: bool) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let (fx, fy) = if inverse {
            (&self.inv_x, &self.inv_y)
        } else {
            (&self.fwd_x, &self.fwd_y)
        };
        buf.par_chunks_mut(nx).for_each(|row| fx.process(row));
        let mut t = vec![Complex::default(); nx * ny];
        t.par_chunks_mut(ny).enumerate().for_each(|(i, col)| {
            for (j, c) in col.iter_mut().enumerate() {
                *c = buf[j * nx + i];
            }
            fy.process(col);
        });
        buf.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
            for (i, c) in row.iter_mut().enumerate() {
                *c = t[i * ny + j];
            }
        });
    }

    /// Forward transform of a real field, normalised by `1 / (nx ny)`.
    pub fn forward(&self, values: &[T]) -> Result<Spectrum<T>> {
        self.check_len(values.len())?;
        let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.fft2(&mut buf, false);
        let norm = T::one() / T::of_usize(self.grid.len());
        buf.iter_mut().for_each(|c| *c = *c * norm);
        Ok(buf)
    }

    /// Index of the mode `-k` for storage index `k`.
    #[inline]
    fn conj_index(&self, k: usize) -> usize {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let i = k % nx;
        let j = k / nx;
        ((ny - j) % ny) * nx + (nx - i) % nx
    }

    /// Forward transforms of two real fields with one complex FFT.
    pub fn forward_pair(&self, a: &[T], b: &[T]) -> Result<(Spectrum<T>, Spectrum<T>)> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        let mut z: Vec<Complex<T>> = a.iter().zip(b).map(|(&x, &y)| Complex::new(x, y)).collect();
        self.fft2(&mut z, false);
        let norm = T::of(0.5) / T::of_usize(self.grid.len());
        let n = z.len();
        let mut ah = vec![Complex::default(); n];
        let mut bh = vec![Complex::default(); n];
        for k in 0..n {
            let zk = z[k];
            let zc = z[self.conj_index(k)].conj();
            ah[k] = (zk + zc) * norm;
            let d = (zk - zc) * norm;
            // divide by i
            bh[k] = Complex::new(d.im, -d.re);
        }
        Ok((ah, bh))
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse_real(&self, spec: &[Complex<T>]) -> Result<Vec<T>> {
        self.check_len(spec.len())?;
        let mut buf = spec.to_vec();
        self.fft2(&mut buf, true);
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    /// Inverse transforms of two Hermitian spectra with one complex FFT.
    pub fn inverse_pair(&self, a: &[Complex<T>], b: &[Complex<T>]) -> Result<(Vec<T>, Vec<T>)> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        let mut buf: Vec<Complex<T>> = a
            .iter()
            .zip(b)
            .map(|(x, y)| Complex::new(x.re - y.im, x.im + y.re))
            .collect();
        self.fft2(&mut buf, true);
        Ok(buf.into_iter().map(|c| (c.re, c.im)).unzip())
    }

    #[inline]
    fn modes(&self, k: usize) -> (i64, i64) {
        (self.mx[k % self.grid.nx], self.my[k / self.grid.nx])
    }

    /// Physical wavenumbers of storage index `k`.
    #[inline]
    pub fn wavenumber(&self, k: usize) -> (T, T) {
        let (a, b) = self.modes(k);
        (T::of(a as f64) * self.sx, T::of(b as f64) * self.sy)
    }

    /// Wavenumbers used for odd derivatives: the Nyquist mode is dropped so
    /// real fields stay real.
    #[inline]
    fn deriv_wavenumber(&self, k: usize) -> (T, T) {
        let (a, b) = self.modes(k);
        let (nx, ny) = (self.grid.nx as i64, self.grid.ny as i64);
        let kx = if 2 * a.abs() == nx { T::zero() } else { T::of(a as f64) * self.sx };
        let ky = if 2 * b.abs() == ny { T::zero() } else { T::of(b as f64) * self.sy };
        (kx, ky)
    }

    /// Sharp square cutoff: keeps modes with `|m_x| ≤ c nx/2` and `|m_y| ≤ c ny/2`.
    #[inline]
    fn keep(&self, k: usize, cutoff: T) -> bool {
        let (a, b) = self.modes(k);
        let half = T::of(0.5);
        T::of(a.unsigned_abs() as f64) <= cutoff * T::of_usize(self.grid.nx) * half
            && T::of(b.unsigned_abs() as f64) <= cutoff * T::of_usize(self.grid.ny) * half
    }

    pub fn lowpass_spectrum(&self, spec: &mut [Complex<T>], cutoff: T) -> Result<()> {
        check_cutoff(cutoff)?;
        for (k, c) in spec.iter_mut().enumerate() {
            if !self.keep(k, cutoff) {
                *c = Complex::default();
            }
        }
        Ok(())
    }

    /// Sharp spectral low-pass filter of a real field.
    pub fn lowpass(&self, f: &[T], cutoff: T) -> Result<Vec<T>> {
        let mut s = self.forward(f)?;
        self.lowpass_spectrum(&mut s, cutoff)?;
        self.inverse_real(&s)
    }

    fn mul_i(c: Complex<T>, k: T) -> Complex<T> {
        Complex::new(-c.im * k, c.re * k)
    }

    /// Velocity spectra `û = (i k_y, -i k_x) ω̂ / |k|²` for kept, nonzero modes.
    pub fn biot_savart_spectrum(&self, omega_hat: &[Complex<T>], cutoff: T) -> Result<(Spectrum<T>, Spectrum<T>)> {
        check_cutoff(cutoff)?;
        self.check_len(omega_hat.len())?;
        let n = omega_hat.len();
        let mut ux = vec![Complex::default(); n];
        let mut uy = vec![Complex::default(); n];
        for k in 0..n {
            if k == 0 || !self.keep(k, cutoff) {
                continue;
            }
            let (kx, ky) = self.wavenumber(k);
            let (dx, dy) = self.deriv_wavenumber(k);
            let psi = omega_hat[k] / (kx * kx + ky * ky);
            ux[k] = Self::mul_i(psi, dy);
            uy[k] = Self::mul_i(psi, -dx);
        }
        Ok((ux, uy))
    }

    /// Divergence-free velocity from vorticity with a sharp cutoff; the
    /// mean mode is removed.
    pub fn biot_savart(&self, omega: &[T], cutoff: T) -> Result<(Vec<T>, Vec<T>)> {
        check_finite("vorticity", omega)?;
        let w = self.forward(omega)?;
        let (ux, uy) = self.biot_savart_spectrum(&w, cutoff)?;
        self.inverse_pair(&ux, &uy)
    }

    /// Biot–Savart returning Hermite node data for both components, with all
    /// derivatives taken spectrally.
    pub fn biot_savart_hermite(&self, omega: &[T], cutoff: T) -> Result<[HermiteField<T>; 2]> {
        check_finite("vorticity", omega)?;
        let w = self.forward(omega)?;
        let (ux, uy) = self.biot_savart_spectrum(&w, cutoff)?;
        Ok([self.hermite_from_spectrum(&ux)?, self.hermite_from_spectrum(&uy)?])
    }

    /// Hermite node data (value, ∂x, ∂y, ∂x∂y) of a band-limited field.
    pub fn hermite_from_spectrum(&self, spec: &[Complex<T>]) -> Result<HermiteField<T>> {
        self.check_len(spec.len())?;
        let n = spec.len();
        let mut dx = vec![Complex::default(); n];
        let mut dy = vec![Complex::default(); n];
        let mut dxy = vec![Complex::default(); n];
        for k in 0..n {
            let (kx, ky) = self.deriv_wavenumber(k);
            dx[k] = Self::mul_i(spec[k], kx);
            dy[k] = Self::mul_i(spec[k], ky);
            dxy[k] = spec[k] * (-(kx * ky));
        }
        let (f, fx) = self.inverse_pair(spec, &dx)?;
        let (fy, fxy) = self.inverse_pair(&dy, &dxy)?;
        HermiteField::from_parts(self.grid, f, fx, fy, fxy)
    }

    /// Hermite node data from node values, derivatives by spectral
    /// differentiation. Node values are kept bit-for-bit.
    pub fn hermite_from_values(&self, values: Vec<T>) -> Result<HermiteField<T>> {
        let s = self.forward(&values)?;
        let mut h = self.hermite_from_spectrum(&s)?;
        h.f = values;
        Ok(h)
    }

    pub fn grad(&self, f: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let s = self.forward(f)?;
        let mut gx = vec![Complex::default(); s.len()];
        let mut gy = vec![Complex::default(); s.len()];
        for k in 0..s.len() {
            let (kx, ky) = self.deriv_wavenumber(k);
            gx[k] = Self::mul_i(s[k], kx);
            gy[k] = Self::mul_i(s[k], ky);
        }
        self.inverse_pair(&gx, &gy)
    }

    /// `∂x v_y - ∂y v_x`.
    pub fn curl2d(&self, vx: &[T], vy: &[T]) -> Result<Vec<T>> {
        let (a, b) = self.forward_pair(vx, vy)?;
        let out: Spectrum<T> = (0..a.len())
            .map(|k| {
                let (kx, ky) = self.deriv_wavenumber(k);
                Self::mul_i(b[k], kx) - Self::mul_i(a[k], ky)
            })
            .collect();
        self.inverse_real(&out)
    }

    /// `∂x v_x + ∂y v_y`.
    pub fn div2d(&self, vx: &[T], vy: &[T]) -> Result<Vec<T>> {
        let (a, b) = self.forward_pair(vx, vy)?;
        let out: Spectrum<T> = (0..a.len())
            .map(|k| {
                let (kx, ky) = self.deriv_wavenumber(k);
                Self::mul_i(a[k], kx) + Self::mul_i(b[k], ky)
            })
            .collect();
        self.inverse_real(&out)
    }

    /// Spectral Laplacian, `-|k|² f̂`.
    pub fn laplacian(&self, f: &[T]) -> Result<Vec<T>> {
        let mut s = self.forward(f)?;
        for (k, c) in s.iter_mut().enumerate() {
            let (kx, ky) = self.wavenumber(k);
            *c = *c * (-(kx * kx + ky * ky));
        }
        self.inverse_real(&s)
    }

    /// Solves `∇²a = f` for mean-zero `a`. The mean of `f` is projected out
    /// and returned alongside the solution.
    pub fn inv_laplace(&self, f: &[T]) -> Result<(Vec<T>, T)> {
        let mut s = self.forward(f)?;
        let mean = s[0].re;
        s[0] = Complex::default();
        for (k, c) in s.iter_mut().enumerate().skip(1) {
            let (kx, ky) = self.wavenumber(k);
            *c = *c / (-(kx * kx + ky * ky));
        }
        Ok((self.inverse_real(&s)?, mean))
    }

    /// Leray projection onto divergence-free fields, in place on spectra.
    pub fn leray_project(&self, bx: &mut [Complex<T>], by: &mut [Complex<T>]) {
        for k in 1..bx.len() {
            let (kx, ky) = self.wavenumber(k);
            let k2 = kx * kx + ky * ky;
            let kb = bx[k] * kx + by[k] * ky;
            bx[k] = bx[k] - kb * (kx / k2);
            by[k] = by[k] - kb * (ky / k2);
        }
    }

    /// Shell spectrum `E(k) = ½ Σ_{k-½ < |k| ≤ k+½} |v̂_k|²`, one entry per
    /// integer shell up to the grid corner so that `Σ E = ½ mean(|v|²)`.
    pub fn shell_spectrum(&self, vx: &[T], vy: &[T]) -> Result<Vec<T>> {
        let (a, b) = self.forward_pair(vx, vy)?;
        let kmax_corner = {
            let hx = (self.grid.nx / 2) as f64 * self.sx.as_f64();
            let hy = (self.grid.ny / 2) as f64 * self.sy.as_f64();
            (hx * hx + hy * hy).sqrt().round() as usize
        };
        let mut e = vec![T::zero(); kmax_corner + 1];
        let half = T::of(0.5);
        for k in 0..a.len() {
            let (kx, ky) = self.wavenumber(k);
            let shell = (kx * kx + ky * ky).sqrt().round().to_usize().unwrap_or(0);
            e[shell] = e[shell] + half * (a[k].norm_sqr() + b[k].norm_sqr());
        }
        Ok(e)
    }

    /// Fraction of the (non-mean) spectral energy of `f` in modes with
    /// `max(|m_x| / (nx/2), |m_y| / (ny/2)) > frac`.
    pub fn tail_energy_fraction(&self, f: &[T], frac: T) -> Result<T> {
        let s = self.forward(f)?;
        let (mut total, mut tail) = (T::zero(), T::zero());
        for (k, c) in s.iter().enumerate().skip(1) {
            let e = c.norm_sqr();
            total = total + e;
            let (a, b) = self.modes(k);
            let rx = T::of(2.0 * a.unsigned_abs() as f64) / T::of_usize(self.grid.nx);
            let ry = T::of(2.0 * b.unsigned_abs() as f64) / T::of_usize(self.grid.ny);
            if rx.max(ry) > frac {
                tail = tail + e;
            }
        }
        Ok(if total > T::zero() { tail / total } else { T::zero() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws(n: usize) -> SpectralWorkspace<f64> {
        SpectralWorkspace::new(GridSpec::square(n).unwrap())
    }

    fn sample(ws: &SpectralWorkspace<f64>, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> Vec<f64> {
        ws.grid().par_map_nodes(|p| f(p[0], p[1]))
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    /// Band-limited pseudo-random field built from a few fixed modes.
    fn band_limited(ws: &SpectralWorkspace<f64>, seed: u64, kmax: i64) -> Vec<f64> {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut modes = Vec::new();
        for _ in 0..12 {
            let kx = (next() * 2.0 * kmax as f64).round() as i64;
            let ky = (next() * 2.0 * kmax as f64).round() as i64;
            modes.push((kx as f64, ky as f64, next(), next()));
        }
        sample(ws, move |x, y| {
            modes
                .iter()
                .map(|(kx, ky, a, b)| a * (kx * x + ky * y).cos() + b * (kx * x + ky * y).sin())
                .sum()
        })
    }

    #[test]
    fn round_trip() {
        let w = ws(32);
        let f = band_limited(&w, 3, 10);
        let back = w.inverse_real(&w.forward(&f).unwrap()).unwrap();
        assert!(max_diff(&f, &back) < 1e-12);
        let g = band_limited(&w, 5, 10);
        let (a, b) = w.forward_pair(&f, &g).unwrap();
        let (fa, gb) = w.inverse_pair(&a, &b).unwrap();
        assert!(max_diff(&f, &fa) < 1e-12);
        assert!(max_diff(&g, &gb) < 1e-12);
    }

    #[test]
    fn lowpass_identity_and_cutoff() {
        let w = ws(64);
        let f = band_limited(&w, 7, 31);
        assert!(max_diff(&f, &w.lowpass(&f, 1.0).unwrap()) < 1e-13);
        let c = sample(&w, |x, _| (30.0 * x).cos());
        assert!(w.lowpass(&c, 0.5).unwrap().iter().all(|v| v.abs() < 1e-13));
        assert!(w.lowpass(&c, 0.0).is_err());
        assert!(w.lowpass(&c, 1.5).is_err());
    }

    #[test]
    fn biot_savart_zero() {
        let w = ws(16);
        let (ux, uy) = w.biot_savart(&vec![0.0; 256], 1.0).unwrap();
        assert!(ux.iter().chain(&uy).all(|v| *v == 0.0));
        assert!(w.biot_savart(&vec![f64::NAN; 256], 1.0).is_err());
    }

    #[test]
    fn biot_savart_curl_round_trip_ot() {
        let w = ws(64);
        let omega = sample(&w, |x, y| 2.0 * ((2.0 * x).cos() + (2.0 * y).cos()));
        let (ux, uy) = w.biot_savart(&omega, 0.9).unwrap();
        let curl = w.curl2d(&ux, &uy).unwrap();
        assert!(max_diff(&curl, &w.lowpass(&omega, 0.9).unwrap()) < 1e-10);
        // hand Fourier solve: u = (-sin 2y, sin 2x)
        let ex = sample(&w, |_, y| -(2.0 * y).sin());
        let ey = sample(&w, |x, _| (2.0 * x).sin());
        assert!(max_diff(&ux, &ex) < 1e-12);
        assert!(max_diff(&uy, &ey) < 1e-12);
    }

    #[test]
    fn biot_savart_sin_x() {
        let w = ws(32);
        let omega = sample(&w, |x, _| x.sin());
        let (ux, uy) = w.biot_savart(&omega, 1.0).unwrap();
        assert!(w.div2d(&ux, &uy).unwrap().iter().all(|v| v.abs() < 1e-12));
        assert!(max_diff(&w.curl2d(&ux, &uy).unwrap(), &omega) < 1e-10);
        // ψ = sin x, u = (0, -cos x)
        assert!(max_diff(&uy, &sample(&w, |x, _| -x.cos())) < 1e-12);
    }

    #[test]
    fn ot_current_density() {
        let w = ws(32);
        let bx = sample(&w, |_, y| -2.0 * (2.0 * y).sin());
        let by = sample(&w, |x, _| 4.0 * x.sin());
        let j = w.curl2d(&bx, &by).unwrap();
        let exact = sample(&w, |x, y| 4.0 * x.cos() + 4.0 * (2.0 * y).cos());
        assert!(max_diff(&j, &exact) < 1e-12);
    }

    #[test]
    fn div_grad_is_laplacian() {
        let w = ws(32);
        let f = band_limited(&w, 11, 12);
        let (gx, gy) = w.grad(&f).unwrap();
        let lap = w.laplacian(&f).unwrap();
        assert!(max_diff(&w.div2d(&gx, &gy).unwrap(), &lap) < 1e-12);
    }

    #[test]
    fn potential_round_trip() {
        let w = ws(32);
        let bx = sample(&w, |_, y| -2.0 * (2.0 * y).sin());
        let by = sample(&w, |x, _| 4.0 * x.sin());
        let j = w.curl2d(&bx, &by).unwrap();
        let (a, mean) = w.inv_laplace(&j).unwrap();
        assert!(mean.abs() < 1e-14);
        // ∇²a = j gives B = curl(-a e_z) = (-∂y a, ∂x a)
        let (ax, ay) = w.grad(&a).unwrap();
        let rx: Vec<f64> = ay.iter().map(|v| -v).collect();
        assert!(max_diff(&rx, &w.lowpass(&bx, 1.0).unwrap()) < 1e-10);
        assert!(max_diff(&ax, &by) < 1e-10);
    }

    #[test]
    fn shell_spectrum_sin_x() {
        let w = ws(16);
        let vx = sample(&w, |x, _| x.sin());
        let e = w.shell_spectrum(&vx, &vec![0.0; 256]).unwrap();
        assert!((e[1] - 0.25).abs() < 1e-14);
        let rest: f64 = e.iter().enumerate().filter(|(k, _)| *k != 1).map(|(_, v)| v).sum();
        assert!(rest < 1e-28);
        let z = w.shell_spectrum(&vec![0.0; 256], &vec![0.0; 256]).unwrap();
        assert!(z.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn shell_spectrum_matches_brute_force_dft() {
        let w = ws(8);
        let vx = band_limited(&w, 1, 4);
        let vy = band_limited(&w, 2, 4);
        let e = w.shell_spectrum(&vx, &vy).unwrap();
        let n = 8usize;
        let mut brute = vec![0.0; e.len()];
        for my in -3i64..=4 {
            for mx in -3i64..=4 {
                let (mut sx, mut sy) = (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0));
                for j in 0..n {
                    for i in 0..n {
                        let ph = -std::f64::consts::TAU * (mx as f64 * i as f64 + my as f64 * j as f64) / n as f64;
                        let e = Complex::new(ph.cos(), ph.sin());
                        sx += e * vx[j * n + i];
                        sy += e * vy[j * n + i];
                    }
                }
                let norm = 1.0 / (n * n) as f64;
                let shell = ((mx * mx + my * my) as f64).sqrt().round() as usize;
                brute[shell] += 0.5 * (sx.norm_sqr() + sy.norm_sqr()) * norm * norm;
            }
        }
        assert!(max_diff(&e, &brute) < 1e-13);
    }

    #[test]
    fn tail_fraction() {
        let w = ws(64);
        let f = sample(&w, |x, _| (29.0 * x).cos());
        assert!(w.tail_energy_fraction(&f, 2.0 / 3.0).unwrap() > 0.99);
        let g = sample(&w, |x, _| (3.0 * x).cos());
        assert!(w.tail_energy_fraction(&g, 2.0 / 3.0).unwrap() < 1e-25);
    }

    #[test]
    fn hermite_from_values_exact_for_band_limited() {
        let w = ws(32);
        let h = w
            .hermite_from_values(sample(&w, |x, y| (2.0 * x).sin() * y.cos()))
            .unwrap();
        let k = w.grid().index(5, 7);
        let p = w.grid().node(5, 7);
        assert!((h.fx[k] - 2.0 * (2.0 * p[0]).cos() * p[1].cos()).abs() < 1e-12);
        assert!((h.fxy[k] + 2.0 * (2.0 * p[0]).cos() * p[1].sin()).abs() < 1e-12);
    }
}
