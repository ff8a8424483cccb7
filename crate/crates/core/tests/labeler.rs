mod common;

use common::oracle_hamming;
use lossyfield::fields::gradient_vector;
use lossyfield::labeler::*;
use lossyfield::synth::{flame_field, CANONICAL_SEED, FLAME_DIMS};
use lossyfield::{Dims, Field3D};
use proptest::prelude::*;

/// Independent derivative: loops over (i, j, k) explicitly.
fn oracle_grad(f: &Field3D) -> [Vec<f64>; 3] {
    let d = f.dims();
    let mut g = [vec![0.0; d.len()], vec![0.0; d.len()], vec![0.0; d.len()]];
    let ext = [d.nx, d.ny, d.nz];
    for k in 0..d.nz {
        for j in 0..d.ny {
            for i in 0..d.nx {
                let p = [i, j, k];
                for a in 0..3 {
                    let n = ext[a];
                    if n < 2 {
                        continue;
                    }
                    let (lo, hi) = match p[a] {
                        0 => (0, 1),
                        x if x == n - 1 => (n - 2, n - 1),
                        x => (x - 1, x + 1),
                    };
                    let mut pl = p;
                    let mut ph = p;
                    pl[a] = lo;
                    ph[a] = hi;
                    let c = &f.all_coords()[a];
                    let fl = f.get(pl[0], pl[1], pl[2]) as f64;
                    let fh = f.get(ph[0], ph[1], ph[2]) as f64;
                    g[a][d.index(i, j, k)] = (fh - fl) / (c[hi] - c[lo]);
                }
            }
        }
    }
    g
}

fn oracle_labels(c: &FlameChannels, t: &LabelThresholds) -> Vec<u8> {
    let gf = oracle_grad(&c.y_h2);
    let go = oracle_grad(&c.y_o2);
    let gp = oracle_grad(&c.y_h2o);
    let n = c.z.values().len();
    let prod_max = c.y_h2o.values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v as f64));
    let mut mag: Vec<f64> = (0..n)
        .map(|i| (gp[0][i].powi(2) + gp[1][i].powi(2) + gp[2][i].powi(2)).sqrt())
        .collect();
    let mag_cells = mag.clone();
    mag.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((0.99 * n as f64).ceil() as usize).max(1);
    let p99 = mag[rank - 1];
    let floor = |f: Floor, r: f64| match f {
        Floor::Absolute(v) => v,
        Floor::Relative(v) => v * r,
    };
    let y_min = floor(t.y_prod_min, prod_max);
    let g_min = floor(t.g_min, p99);
    (0..n)
        .map(|i| {
            let z = c.z.values()[i] as f64;
            if z <= t.z_air {
                3
            } else if z >= t.z_fuel {
                2
            } else if c.y_h2o.values()[i] as f64 >= y_min && mag_cells[i] >= g_min {
                let fi = gf[0][i] * go[0][i] + gf[1][i] * go[1][i] + gf[2][i] * go[2][i];
                if fi >= 0.0 {
                    0
                } else {
                    1
                }
            } else {
                4
            }
        })
        .collect()
}

fn opposed_flame(nx: usize) -> FlameChannels {
    let d = Dims::new(nx, 1, 1);
    let z_st = 0.233 / (0.8 + 0.233);
    let z: Vec<f32> = (0..nx)
        .map(|i| (0.5 * (1.0 + ((i as f64 - nx as f64 / 2.0) / (nx as f64 / 10.0)).tanh())) as f32)
        .collect();
    let mk = |v: Vec<f32>| Field3D::new(d, v).unwrap();
    FlameChannels {
        y_h2: mk(z.iter().map(|&z| 0.1 * z).collect()),
        y_o2: mk(z.iter().map(|&z| 0.233 * (1.0 - z)).collect()),
        y_h2o: mk(z
            .iter()
            .map(|&z| (0.25 * (-((z as f64 - z_st) / 0.1).powi(2)).exp()) as f32)
            .collect()),
        z: mk(z),
    }
}

#[test]
fn opposed_diffusion_flame_profile() {
    let c = opposed_flame(64);
    let t = LabelThresholds::default();
    let labels = classify(&c, &t).unwrap();
    assert_eq!(labels.codes(), oracle_labels(&c, &t).as_slice());
    let h = class_histogram(&labels);
    assert!(h.count(Regime::NonPremixedFlame) > 0);
    assert_eq!(h.count(Regime::PremixedFlame), 0);
    assert!(h.count(Regime::Air) > 0 && h.count(Regime::Fuel) > 0 && h.count(Regime::Mixture) > 0);
    // flanks: air on the left, fuel on the right
    assert_eq!(labels.get(0, 0, 0), Regime::Air);
    assert_eq!(labels.get(63, 0, 0), Regime::Fuel);
    // flame cells sit strictly between the last air cell and the first fuel
    // cell (the product peak itself may fail the gradient gate)
    let labels = &labels;
    let of = |r: Regime| (0..64).filter(move |&i| labels.get(i, 0, 0) == r);
    let last_air = of(Regime::Air).max().unwrap();
    let first_fuel = of(Regime::Fuel).min().unwrap();
    assert!(of(Regime::NonPremixedFlame).all(|i| last_air < i && i < first_fuel));
}

#[test]
fn synthetic_flame_matches_oracle_cell_by_cell() {
    let c = flame_field(FLAME_DIMS, CANONICAL_SEED);
    let t = LabelThresholds::default();
    let labels = classify(&c, &t).unwrap();
    let oracle = oracle_labels(&c, &t);
    assert_eq!(labels.codes(), oracle.as_slice());
    let h = class_histogram(&labels);
    let mut counts = [0usize; 5];
    for &o in &oracle {
        counts[o as usize] += 1;
    }
    assert_eq!(h.0, counts);
    assert!(counts.iter().all(|&n| n > 0), "all five classes present: {counts:?}");
    assert_eq!(h.total(), FLAME_DIMS.len());
}

#[test]
fn thresholds_are_configurable() {
    let c = flame_field(Dims::new(32, 32, 4), 5);
    let t = LabelThresholds {
        z_air: 0.1,
        z_fuel: 0.8,
        y_prod_min: Floor::Absolute(0.02),
        g_min: Floor::Relative(0.2),
    };
    assert_eq!(classify(&c, &t).unwrap().codes(), oracle_labels(&c, &t).as_slice());
}

fn blob(d: Dims, c: [f64; 3], s: f64, coords: &[Vec<f64>; 3]) -> Field3D {
    let mut v = Vec::with_capacity(d.len());
    for k in 0..d.nz {
        for j in 0..d.ny {
            for i in 0..d.nx {
                let r2 = (coords[0][i] - c[0]).powi(2) + (coords[1][j] - c[1]).powi(2) + (coords[2][k] - c[2]).powi(2);
                v.push((-r2 / (s * s)).exp() as f32);
            }
        }
    }
    Field3D::with_coords(d, v, coords.clone()).unwrap()
}

#[test]
fn gaussian_blob_flame_index_oracle() {
    let d = Dims::new(32, 32, 32);
    // mildly stretched grid
    let axis = |n: usize, s: f64| {
        (0..n)
            .map(|i| i as f64 + s * (i as f64).powi(2) / n as f64)
            .collect::<Vec<_>>()
    };
    let coords = [axis(32, 0.0), axis(32, 0.3), axis(32, 0.7)];
    let fuel = blob(d, [10.0, 12.0, 15.0], 6.0, &coords);
    let ox = blob(d, [20.0, 18.0, 14.0], 8.0, &coords);
    let fi = flame_index(&gradient_vector(&fuel), &gradient_vector(&ox)).unwrap();
    let (gf, go) = (oracle_grad(&fuel), oracle_grad(&ox));
    let mut worst: f64 = 0.0;
    for i in 0..d.len() {
        let want = gf[0][i] * go[0][i] + gf[1][i] * go[1][i] + gf[2][i] * go[2][i];
        worst = worst.max((fi[i] - want).abs());
    }
    assert!(worst <= 1e-9, "{worst}");
    assert!(fi.iter().any(|&v| v > 0.0) && fi.iter().any(|&v| v < 0.0));
}

#[test]
fn aligned_and_opposed_gradients() {
    let d = Dims::new(8, 1, 1);
    let up = Field3D::from_fn(d, |i, _, _| i as f32).unwrap();
    let down = Field3D::from_fn(d, |i, _, _| -(i as f32)).unwrap();
    let fi = flame_index(&gradient_vector(&up), &gradient_vector(&up)).unwrap();
    assert!(fi.iter().all(|&v| v > 0.0));
    let fi = flame_index(&gradient_vector(&up), &gradient_vector(&down)).unwrap();
    assert!(fi.iter().all(|&v| v < 0.0));
    let other = gradient_vector(&Field3D::constant(Dims::new(4, 1, 1), 1.0).unwrap());
    assert!(flame_index(&gradient_vector(&up), &other).is_err());
}

fn labels_strategy() -> impl Strategy<Value = (Vec<u8>, Vec<u8>, Vec<u8>)> {
    (1usize..200).prop_flat_map(|n| {
        (
            prop::collection::vec(0u8..5, n),
            prop::collection::vec(0u8..5, n),
            prop::collection::vec(0u8..5, n),
        )
    })
}

proptest! {
    #[test]
    fn label_error_is_a_metric((a, b, c) in labels_strategy()) {
        let d = Dims::new(a.len(), 1, 1);
        let (la, lb, lc) = (LabelField::new(d, a.clone()).unwrap(), LabelField::new(d, b.clone()).unwrap(), LabelField::new(d, c).unwrap());
        let ab = label_error(&la, &lb).unwrap();
        prop_assert_eq!(ab, oracle_hamming(&a, &b));
        prop_assert_eq!(ab, label_error(&lb, &la).unwrap());
        prop_assert_eq!(ab == 0.0, a == b);
        prop_assert_eq!(label_error(&la, &la).unwrap(), 0.0);
        prop_assert!(label_error(&la, &lc).unwrap() <= ab + label_error(&lb, &lc).unwrap() + 1e-15);
        prop_assert_eq!(class_histogram(&la).total(), a.len());
    }

    #[test]
    fn flame_index_sign_is_scale_covariant(seed in any::<u64>(), s1 in 1e-3f64..1e3, s2 in 1e-3f64..1e3) {
        let c = flame_field(Dims::new(16, 16, 3), seed);
        let gf = gradient_vector(&c.y_h2);
        let go = gradient_vector(&c.y_o2);
        let base = flame_index(&gf, &go).unwrap();
        let scale = |g: &lossyfield::fields::GradientField, s: f64| lossyfield::fields::GradientField {
            dims: g.dims,
            components: g.components.clone().map(|v| v.into_iter().map(|x| x * s).collect()),
        };
        let scaled = flame_index(&scale(&gf, s1), &scale(&go, s2)).unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert_eq!(*a >= 0.0, *b >= 0.0);
        }
    }
}

#[test]
fn label_files_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let labels = classify(&flame_field(Dims::new(16, 16, 2), 1), &LabelThresholds::default()).unwrap();
    let p = dir.path().join("labels.u8");
    save_labels(&p, &labels).unwrap();
    assert_eq!(load_labels(&p).unwrap(), labels);
    std::fs::write(&p, vec![9u8; 512]).unwrap();
    assert!(load_labels(&p).is_err());
}
