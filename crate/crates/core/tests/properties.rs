use proptest::prelude::*;

use cmm::diagnostics::{energies, half_norm_sq};
use cmm::history::lagrange_weights;
use cmm::io::{FieldSnapshot, Problem, RunConfig};
use cmm::mhd::{lorentz_source, lorentz_source_curl};
use cmm::{GridSpec64, HermiteField64, SpectralWorkspace64};

fn band_limited(g: &GridSpec64, c: &[f64; 6]) -> Vec<f64> {
    g.par_map_nodes(|p| {
        c[0] * p[0].sin() + c[1] * (2.0 * p[1]).cos() + c[2] * (p[0] + 3.0 * p[1]).sin()
            + c[3] * (2.0 * p[0] - p[1]).cos()
            + c[4] * (4.0 * p[0]).sin() * p[1].cos()
            + c[5]
    })
}

fn config_strategy() -> impl Strategy<Value = RunConfig> {
    (
        prop_oneof![Just(Problem::AdvectSwirl), Just(Problem::MhdOt)],
        (2usize..9, 2usize..9, 0usize..3),
        proptest::option::of(1e-5f64..1.0),
        (0.01f64..4.0, 0.0f64..10.0, 1usize..6),
        (1e-4f64..1.0, 1e-6f64..1.0, 1e-3f64..=1.0, 1e-3f64..=1.0, 1e-3f64..1.0),
        (any::<bool>(), "[a-z][a-z0-9_/]{0,12}", 0usize..100),
    )
        .prop_map(|(problem, (lm, la, dv), dt, (cfl, t_end, gamma), (dd, tail, cm, cs, eps), (remap, dir, stride))| {
            let n_map = 1 << lm;
            RunConfig {
                problem,
                n_map,
                n_source: 1 << la,
                n_velocity: n_map << dv,
                dt,
                cfl,
                t_end,
                gamma,
                delta_det: dd,
                tail_threshold: tail,
                cutoff_map: cm,
                cutoff_source: cs,
                eps,
                remap,
                output_dir: dir.into(),
                snapshot_stride: stride,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trip(c in config_strategy()) {
        let text = c.serialize();
        let back = RunConfig::parse_str(&text, None).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.serialize(), text);
    }

    #[test]
    fn snapshot_round_trip_bitwise(n in 1usize..12, seed in any::<u64>(), t in -1e3f64..1e3, vector in any::<bool>()) {
        let comps = if vector { 2 } else { 1 };
        let mut x = seed;
        let data: Vec<f64> = (0..comps * n * n)
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                f64::from_bits(x >> 2) - 0.5
            })
            .collect();
        let s = if vector {
            FieldSnapshot::vector("mhd-ot", "b", t, n, &data[..n * n], &data[n * n..]).unwrap()
        } else {
            FieldSnapshot::scalar("mhd-ot", "omega", t, n, data.clone()).unwrap()
        };
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        let r = FieldSnapshot::read_from(&buf[..]).unwrap();
        prop_assert_eq!(r.t.to_bits(), t.to_bits());
        prop_assert!(r.data.iter().zip(&data).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn hermite_reproduces_bicubics(c in proptest::array::uniform16(-2.0f64..2.0), px in 0.0f64..1.0, py in 0.0f64..1.0) {
        // a bicubic on one cell of a coarse grid, sampled with exact node data
        let g = GridSpec64::new(4, 4, 4.0, 4.0).unwrap();
        let poly = |x: f64, y: f64| -> [f64; 4] {
            let (mut f, mut fx, mut fy, mut fxy) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    let a = c[4 * i + j];
                    let xi = x.powi(i as i32);
                    let yj = y.powi(j as i32);
                    f += a * xi * yj;
                    if i > 0 { fx += a * i as f64 * x.powi(i as i32 - 1) * yj; }
                    if j > 0 { fy += a * j as f64 * xi * y.powi(j as i32 - 1); }
                    if i > 0 && j > 0 { fxy += a * (i * j) as f64 * x.powi(i as i32 - 1) * y.powi(j as i32 - 1); }
                }
            }
            [f, fx, fy, fxy]
        };
        let h = HermiteField64::project(g, |x, y| poly(x, y));
        let p = [1.0 + px, 2.0 + py];
        let (v, grad) = h.eval_grad(p);
        let e = poly(p[0], p[1]);
        prop_assert!((v - e[0]).abs() <= 1e-12 * (1.0 + e[0].abs()));
        prop_assert!((grad[0] - e[1]).abs() <= 1e-11 * (1.0 + e[1].abs()));
        prop_assert!((grad[1] - e[2]).abs() <= 1e-11 * (1.0 + e[2].abs()));
    }

    #[test]
    fn lagrange_weights_partition_unity(ts in proptest::collection::btree_set(-200i32..200, 1..6), t in -5.0f64..5.0) {
        let times: Vec<f64> = ts.iter().map(|&k| k as f64 * 0.01).collect();
        let w = lagrange_weights(&times, t);
        let s: f64 = w.iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-6 * (1.0 + w.iter().map(|x| x.abs()).sum::<f64>()));
        // exact on the linear function when at least two nodes exist
        if times.len() > 1 {
            let lin: f64 = w.iter().zip(&times).map(|(a, b)| a * b).sum();
            prop_assert!((lin - t).abs() < 1e-6 * (1.0 + w.iter().map(|x| x.abs()).sum::<f64>()));
        }
    }

    #[test]
    fn dual_lorentz_source(c in proptest::array::uniform6(-2.0f64..2.0), d in proptest::array::uniform6(-2.0f64..2.0)) {
        let g = GridSpec64::square(32).unwrap();
        let ws = SpectralWorkspace64::new(g);
        let (mut sx, mut sy) = ws.forward_pair(&band_limited(&g, &c), &band_limited(&g, &d)).unwrap();
        ws.leray_project(&mut sx, &mut sy);
        let (bx, by) = ws.inverse_pair(&sx, &sy).unwrap();
        let a = lorentz_source(&bx, &by, &ws).unwrap();
        let b = lorentz_source_curl(&bx, &by, &ws).unwrap();
        let scale = 1.0 + a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-10 * scale));
        let div = ws.div2d(&bx, &by).unwrap();
        prop_assert!(div.iter().all(|v| v.abs() < 1e-12 * scale));
    }

    #[test]
    fn parseval_and_energy_sum(c in proptest::array::uniform6(-2.0f64..2.0), d in proptest::array::uniform6(-2.0f64..2.0)) {
        let g = GridSpec64::square(32).unwrap();
        let ws = SpectralWorkspace64::new(g);
        let ux = band_limited(&g, &c);
        let uy = band_limited(&g, &d);
        let e = ws.shell_spectrum(&ux, &uy).unwrap();
        let quad = half_norm_sq(&ux, &uy).unwrap();
        let sum: f64 = e.iter().sum();
        prop_assert!((sum - quad).abs() <= 1e-10 * quad.max(1e-300));
        let en = energies(&ux, &uy, &uy, &ux).unwrap();
        prop_assert!((en.total - en.kinetic - en.potential).abs() <= 1e-14 * en.total.max(1.0));
    }

    #[test]
    fn biot_savart_curl_round_trip(c in proptest::array::uniform6(-2.0f64..2.0)) {
        let g = GridSpec64::square(32).unwrap();
        let ws = SpectralWorkspace64::new(g);
        let w = band_limited(&g, &c);
        let (ux, uy) = ws.biot_savart(&w, 1.0).unwrap();
        let back = ws.curl2d(&ux, &uy).unwrap();
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        prop_assert!(w.iter().zip(&back).all(|(a, b)| (a - mean - b).abs() < 1e-10));
    }
}
