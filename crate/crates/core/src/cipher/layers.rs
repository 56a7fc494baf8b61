use super::state::StateMatrix;
use crate::error::{Error, Result};
use crate::zq::Modulus;

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

/// `x + k * rc` elementwise.
pub fn ark(x: &StateMatrix, k: &[u64], rc: &[u64]) -> Result<StateMatrix> {
    check_len(x.len(), k.len())?;
    check_len(x.len(), rc.len())?;
    ark_prefix(x, k, rc)
}

/// ARK restricted to the first `rc.len()` positions; the rest pass through.
pub fn ark_prefix(x: &StateMatrix, k: &[u64], rc: &[u64]) -> Result<StateMatrix> {
    if rc.len() > x.len() {
        return Err(Error::LengthMismatch { expected: x.len(), got: rc.len() });
    }
    check_len(x.len(), k.len())?;
    let q = x.modulus();
    let mut out = x.values().to_vec();
    for (i, &c) in rc.iter().enumerate() {
        if k[i] >= q.value() || c >= q.value() {
            return Err(Error::NonCanonical { value: k[i].max(c), q: q.value() });
        }
        out[i] = q.add(out[i], q.mul(k[i], c));
    }
    Ok(x.with_values(out))
}

pub fn cube(x: &StateMatrix) -> StateMatrix {
    let q = x.modulus();
    x.with_values(x.values().iter().map(|&a| q.cube(a)).collect())
}

/// `y_1 = x_1`, `y_i = x_i + x_{i-1}^2` over the row-major flattening.
pub fn feistel(x: &StateMatrix) -> StateMatrix {
    let q = x.modulus();
    let xs = x.values();
    let mut out = Vec::with_capacity(xs.len());
    out.push(xs[0]);
    for i in 1..xs.len() {
        out.push(q.add(xs[i], q.square(xs[i - 1])));
    }
    x.with_values(out)
}

pub fn feistel_inverse(y: &StateMatrix) -> StateMatrix {
    let q = y.modulus();
    let ys = y.values();
    let mut out: Vec<u64> = Vec::with_capacity(ys.len());
    out.push(ys[0]);
    for i in 1..ys.len() {
        let prev = out[i - 1];
        out.push(q.sub(ys[i], q.square(prev)));
    }
    y.with_values(out)
}

/// First `l` elements in row-major order.
pub fn truncate(x: &StateMatrix, l: usize) -> Result<Vec<u64>> {
    if l == 0 || l > x.len() {
        return Err(Error::InvalidParameter(format!("truncation length {l} outside [1, {}]", x.len())));
    }
    Ok(x.values()[..l].to_vec())
}

/// `x_i + e_i mod q` with signed noise.
pub fn agn(x: &[u64], e: &[i64], q: Modulus) -> Result<Vec<u64>> {
    check_len(x.len(), e.len())?;
    Ok(x.iter().zip(e).map(|(&a, &ei)| q.add(a, q.reduce_i64(ei))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::state::Order;

    fn q17() -> Modulus {
        Modulus::new(17).unwrap()
    }

    fn st(values: Vec<u64>) -> StateMatrix {
        StateMatrix::new(values, q17(), Order::Row).unwrap()
    }

    #[test]
    fn ark_examples() {
        let x = st((0..16).collect());
        let k: Vec<u64> = (0..16).map(|i| (i * 3) % 17).collect();
        assert_eq!(ark(&x, &k, &[1; 16]).unwrap().values(), &k.iter().zip(x.values()).map(|(a, b)| (a + b) % 17).collect::<Vec<_>>()[..]);
        assert_eq!(ark(&x, &[0; 16], &k).unwrap(), x);
        // two-element slice: (1,2) + (5,6)*(3,4)
        let mut vals = vec![0; 16];
        vals[0] = 1;
        vals[1] = 2;
        let mut key = vec![0; 16];
        key[0] = 5;
        key[1] = 6;
        let y = ark_prefix(&st(vals), &key, &[3, 4]).unwrap();
        assert_eq!(&y.values()[..2], &[16, 9]);
        assert!(ark(&x, &[0; 15], &[1; 16]).is_err());
    }

    #[test]
    fn ark_keeps_order() {
        let mut x = st(vec![1; 16]);
        x.set_order(Order::Col);
        assert_eq!(ark(&x, &[1; 16], &[1; 16]).unwrap().order(), Order::Col);
    }

    #[test]
    fn cube_examples() {
        assert_eq!(cube(&st(vec![0; 16])).values(), &[0; 16]);
        assert_eq!(cube(&st(vec![1; 16])).values(), &[1; 16]);
        let x = st((0..16).collect());
        let q = q17();
        let expect: Vec<u64> = x.values().iter().map(|&a| q.cube(a)).collect();
        assert_eq!(cube(&x).values(), &expect[..]);
    }

    #[test]
    fn feistel_examples() {
        assert_eq!(feistel(&st(vec![0; 16])).values(), &[0; 16]);
        let y = feistel(&st(vec![1; 16]));
        assert_eq!(y.values()[0], 1);
        assert!(y.values()[1..].iter().all(|&v| v == 2));
        let x = st((0..16).map(|i| (i * 5 + 2) % 17).collect());
        assert_eq!(feistel_inverse(&feistel(&x)), x);
    }

    #[test]
    fn truncate_and_agn() {
        let x = st((0..16).collect());
        assert_eq!(truncate(&x, 16).unwrap(), x.values());
        assert_eq!(truncate(&x, 1).unwrap(), vec![0]);
        assert!(truncate(&x, 0).is_err());
        assert!(truncate(&x, 17).is_err());
        assert_eq!(agn(&[4], &[-1], q17()).unwrap(), vec![3]);
        assert_eq!(agn(&[4, 5], &[0, 0], q17()).unwrap(), vec![4, 5]);
        assert_eq!(agn(&[0], &[-16], q17()).unwrap(), vec![1]);
        assert!(agn(&[4], &[1, 2], q17()).is_err());
    }
}
