//! Exact squared Euclidean distance transform on a square node grid
//! (Felzenszwalb–Huttenlocher lower envelope of parabolas).

const FAR: f64 = 1e30;

/// For a `side × side` row-major mask, the squared distance (in node units)
/// from every node to the nearest masked node; `FAR` when the mask is empty.
pub(crate) fn squared_distance(mask: &[bool], side: usize) -> Vec<f64> {
    let mut d: Vec<f64> = mask.iter().map(|&m| if m { 0.0 } else { FAR }).collect();
    let mut f = vec![0.0; side];
    let mut out = vec![0.0; side];
    let mut v = vec![0usize; side];
    let mut z = vec![0.0; side + 1];
    for i in 0..side {
        for j in 0..side {
            f[j] = d[j * side + i];
        }
        transform_1d(&f, &mut out, &mut v, &mut z);
        for j in 0..side {
            d[j * side + i] = out[j];
        }
    }
    for j in 0..side {
        let row = &mut d[j * side..(j + 1) * side];
        f.copy_from_slice(row);
        transform_1d(&f, &mut out, &mut v, &mut z);
        row.copy_from_slice(&out);
    }
    d
}

fn transform_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let Some(first) = (0..n).find(|&q| f[q] < FAR) else {
        out.fill(FAR);
        return;
    };
    let parabola_cut =
        |p: usize, q: usize| ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
    let mut k = 0;
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if f[q] >= FAR {
            continue;
        }
        let mut s = parabola_cut(v[k], q);
        // z[0] = −∞ stops the pop loop at k = 0.
        while s <= z[k] {
            k -= 1;
            s = parabola_cut(v[k], q);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *o = dq * dq + f[p];
    }
}
