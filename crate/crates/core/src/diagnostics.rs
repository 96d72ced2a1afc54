//! Conserved quantities, error norms, convergence orders and spectral fits.
//!
//! Norms use the domain average `⟨f, g⟩ = (1/|Ω|) ∫ f g`, evaluated by the
//! rectangle rule on the periodic grid.

use crate::error::{CmmError, Result};
use crate::real::Real;
use crate::spectral::SpectralWorkspace;

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b || a == 0 {
        return Err(CmmError::GridMismatch {
            expected: format!("{a} values"),
            got: format!("{b} values"),
        });
    }
    Ok(())
}

/// Domain-averaged inner product of two vector fields.
pub fn inner<T: Real>(ax: &[T], ay: &[T], bx: &[T], by: &[T]) -> Result<T> {
    check_len(ax.len(), ay.len())?;
    check_len(ax.len(), bx.len())?;
    check_len(ax.len(), by.len())?;
    let s: T = (0..ax.len()).map(|k| ax[k] * bx[k] + ay[k] * by[k]).sum();
    Ok(s / T::of_usize(ax.len()))
}

/// `½ ‖v‖²`.
pub fn half_norm_sq<T: Real>(vx: &[T], vy: &[T]) -> Result<T> {
    Ok(T::of(0.5) * inner(vx, vy, vx, vy)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Energies<T> {
    pub kinetic: T,
    pub potential: T,
    pub total: T,
}

/// Kinetic `½‖u‖²`, magnetic `½‖B‖²` and their sum. The two fields may
/// live on different grids.
pub fn energies<T: Real>(ux: &[T], uy: &[T], bx: &[T], by: &[T]) -> Result<Energies<T>> {
    let kinetic = half_norm_sq(ux, uy)?;
    let potential = half_norm_sq(bx, by)?;
    Ok(Energies {
        kinetic,
        potential,
        total: kinetic + potential,
    })
}

/// `H_c = ⟨u, B⟩`.
pub fn cross_helicity<T: Real>(ux: &[T], uy: &[T], bx: &[T], by: &[T]) -> Result<T> {
    inner(ux, uy, bx, by)
}

/// `½‖a‖²` with `∇²a = j` and `j = ∂x By - ∂y Bx`.
pub fn squared_potential<T: Real>(bx: &[T], by: &[T], ws: &SpectralWorkspace<T>) -> Result<T> {
    let j = ws.curl2d(bx, by)?;
    let (a, _) = ws.inv_laplace(&j)?;
    let s: T = a.iter().map(|v| *v * *v).sum();
    Ok(T::of(0.5) * s / T::of_usize(a.len()))
}

pub fn linf_error<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    check_len(a.len(), b.len())?;
    Ok(a.iter().zip(b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs())))
}

pub fn linf_norm<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// `log2(e_i / e_{i+1})` for errors listed from coarse to fine.
pub fn eoc<T: Real>(errors: &[T]) -> Result<Vec<T>> {
    if errors.len() < 2 {
        return Err(CmmError::InvalidArgument("need at least two errors".into()));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > T::zero()) || !e.is_finite()) {
        return Err(CmmError::InvalidArgument(format!("error {e} must be positive and finite")));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// Least-squares slope of `log E(k)` against `log k` over the shells
/// `k_lo..=k_hi`, skipping empty shells.
pub fn spectrum_fit<T: Real>(e: &[T], k_lo: usize, k_hi: usize) -> Result<T> {
    if k_lo < 1 || k_hi <= k_lo {
        return Err(CmmError::InvalidArgument(format!("bad fit range [{k_lo}, {k_hi}]")));
    }
    let pts: Vec<(f64, f64)> = (k_lo..=k_hi.min(e.len().saturating_sub(1)))
        .filter(|&k| e[k] > T::zero())
        .map(|k| ((k as f64).ln(), e[k].as_f64().ln()))
        .collect();
    if pts.len() < 2 {
        return Err(CmmError::InvalidArgument(format!(
            "fewer than two nonempty shells in [{k_lo}, {k_hi}]"
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(T::of(sxy / sxx))
}

/// Fraction of the spectral energy of an `n × n` window patch of width
/// `width` (Hann-tapered, mean removed) in wavenumbers with
/// `max(|kx|, |ky|) > k_cut`, wavenumbers in units of the full domain.
pub fn patch_fraction_above<T: Real>(patch: &[T], n: usize, width: T, k_cut: T) -> Result<T> {
    let g = crate::grid::GridSpec::new(n, n, width, width)?;
    check_len(g.len(), patch.len())?;
    let hann: Vec<T> = (0..n)
        .map(|i| T::of(0.5) * (T::one() - (T::TAU() * T::of_usize(i) / T::of_usize(n)).cos()))
        .collect();
    let tapered: Vec<T> = (0..g.len()).map(|k| patch[k] * hann[k % n] * hann[k / n]).collect();
    let ws = SpectralWorkspace::new(g);
    let s = ws.forward(&tapered)?;
    let (mut total, mut above) = (T::zero(), T::zero());
    for (k, c) in s.iter().enumerate().skip(1) {
        let e = c.norm_sqr();
        total = total + e;
        let (kx, ky) = ws.wavenumber(k);
        if kx.abs().max(ky.abs()) > k_cut {
            above = above + e;
        }
    }
    Ok(if total > T::zero() { above / total } else { T::zero() })
}

/// One row of the MHD time series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeSeriesRecord<T> {
    pub t: T,
    pub e_kin: T,
    pub e_pot: T,
    pub e_tot: T,
    pub h_c: T,
    pub a_sq: T,
    pub max_u: T,
    pub max_j: T,
    pub n_submaps: usize,
    pub dt: T,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn sine_kinetic_energy() {
        let g = GridSpec::<f64>::square(32).unwrap();
        let ux = g.par_map_nodes(|p| p[0].sin());
        let z = vec![0.0; g.len()];
        let e = energies(&ux, &z, &z, &z).unwrap();
        assert!((e.kinetic - 0.25).abs() < 1e-15);
        assert_eq!(e.potential, 0.0);
        assert_eq!(e.total, e.kinetic + e.potential);
    }

    #[test]
    fn potential_of_shear_field() {
        let g = GridSpec::<f64>::square(32).unwrap();
        let ws = SpectralWorkspace::new(g);
        let bx = g.par_map_nodes(|p| -p[1].sin());
        let by = vec![0.0; g.len()];
        let a = squared_potential(&bx, &by, &ws).unwrap();
        // brute-force quadrature of ½ mean(cos² y)
        let q: f64 = (0..g.len()).map(|k| g.node_at(k)[1].cos().powi(2)).sum::<f64>() / g.len() as f64;
        assert!((a - 0.25).abs() < 1e-14);
        assert!((a - 0.5 * q).abs() < 1e-14);
    }

    #[test]
    fn orthogonal_fields_have_no_helicity() {
        let g = GridSpec::<f64>::square(16).unwrap();
        let ux = g.par_map_nodes(|p| p[0].sin());
        let by = g.par_map_nodes(|p| p[1].cos());
        let z = vec![0.0; g.len()];
        assert_eq!(cross_helicity(&ux, &z, &z, &by).unwrap(), 0.0);
    }

    #[test]
    fn eoc_values() {
        assert_eq!(eoc(&[8.0, 1.0]).unwrap(), vec![3.0]);
        assert_eq!(eoc(&[4.0, 2.0, 1.0]).unwrap(), vec![1.0, 1.0]);
        assert!(eoc(&[1.0]).is_err());
        assert!(eoc(&[1.0, 0.0]).is_err());
        assert!(eoc(&[-1.0, 0.5]).is_err());
    }

    #[test]
    fn linf() {
        let a = vec![0.5f64; 10];
        let mut b = a.clone();
        assert_eq!(linf_error(&a, &b).unwrap(), 0.0);
        b[3] += 1e-3;
        let brute = (0..10).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max);
        assert_eq!(linf_error(&a, &b).unwrap(), brute);
        assert!((brute - 1e-3).abs() < 1e-15);
        assert!(linf_error(&a, &b[..4]).is_err());
    }

    #[test]
    fn patch_fractions() {
        let w = std::f64::consts::PI / 4.0;
        let n = 64;
        // the window spans w, so mode m of the patch is domain wavenumber 8 m
        let g = GridSpec::<f64>::new(n, n, w, w).unwrap();
        let low = g.par_map_nodes(|p| (8.0 * p[0]).sin());
        assert!(patch_fraction_above(&low, n, w, 100.0).unwrap() < 1e-3);
        let high = g.par_map_nodes(|p| (8.0 * 20.0 * p[1]).cos());
        assert!(patch_fraction_above(&high, n, w, 100.0).unwrap() > 0.99);
        assert!(patch_fraction_above(&vec![1.0; n * n], n, w, 100.0).unwrap() < 1e-20);
    }

    #[test]
    fn fits() {
        let e: Vec<f64> = (0..40).map(|k| if k == 0 { 0.0 } else { (k as f64).powi(-2) }).collect();
        assert!((spectrum_fit(&e, 1, 14).unwrap() + 2.0).abs() < 1e-12);
        let c = vec![3.0f64; 20];
        assert!(spectrum_fit(&c, 1, 14).unwrap().abs() < 1e-12);
        assert!(spectrum_fit(&c, 3, 3).is_err());
        assert!(spectrum_fit(&vec![0.0f64; 20], 1, 14).is_err());
    }
}
