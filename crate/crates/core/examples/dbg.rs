use ermea_core as _;
use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO, SVD};
use num_complex::Complex64 as C64;
fn main() {
    for n in [150usize, 400] {
        let mut h = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let v = ((i * 31 + j * 17) % 13) as f64 - 6.0 + if i == j { 3.0 } else { 0.0 };
                let w = if i == j { 0.0 } else { ((i * 5 + j * 29) % 7) as f64 - 3.0 };
                h[[i, j]] = C64::new(v, -w);
                h[[j, i]] = C64::new(v, w);
            }
        }
        let (vals, vecs): (ndarray::Array1<f64>, Array2<C64>) = h.eigh(UPLO::Lower).unwrap();
        let hv = h.dot(&vecs);
        let mut worst = 0.0f64;
        for k in 0..n {
            let mut res = 0.0f64;
            for r in 0..n {
                res += (hv[[r, k]] - C64::new(vals[k], 0.0) * vecs[[r, k]]).norm_sqr();
            }
            worst = worst.max(res.sqrt());
        }
        println!("zheev n={n}: residual {worst:.3e}");
    }
    // zgesdd at 300: check U S V^H reconstruction
    let n = 300;
    let a = Array2::from_shape_fn((n, n), |(i, j)| {
        C64::new(((i * 13 + j * 7) % 17) as f64 - 8.0, ((i + 3 * j) % 5) as f64 - 2.0)
    });
    let (u, s, vt) = a.svd(true, true).unwrap();
    let (u, vt) = (u.unwrap(), vt.unwrap());
    let mut rec = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += u[[i, k]] * C64::new(s[k], 0.0) * vt[[k, j]];
            }
            rec[[i, j]] = acc;
        }
    }
    let err = (&rec - &a).iter().fold(0.0f64, |m, x| m.max(x.norm()));
    println!("zgesdd n={n}: reconstruction err {err:.3e}");
}
