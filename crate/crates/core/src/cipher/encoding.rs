use super::keystream::{Cipher, Key};
use crate::error::{Error, Result};

/// `c_i = round(delta * m_i) + z_i mod q`.
pub fn encrypt(
    cipher: &Cipher,
    key: &Key,
    nonce: &[u8],
    block_index: u64,
    m: &[f64],
    delta: f64,
) -> Result<Vec<u64>> {
    let z = cipher.keystream(key, nonce, block_index)?.values;
    encrypt_with_keystream(&z, m, delta, cipher.params().q.value())
}

pub fn decrypt(
    cipher: &Cipher,
    key: &Key,
    nonce: &[u8],
    block_index: u64,
    c: &[u64],
    delta: f64,
) -> Result<Vec<f64>> {
    let z = cipher.keystream(key, nonce, block_index)?.values;
    decrypt_with_keystream(&z, c, delta, cipher.params().q.value())
}

pub fn encrypt_with_keystream(z: &[u64], m: &[f64], delta: f64, q: u64) -> Result<Vec<u64>> {
    if m.len() != z.len() {
        return Err(Error::LengthMismatch { expected: z.len(), got: m.len() });
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let qi = q as i128;
    m.iter()
        .zip(z)
        .enumerate()
        .map(|(index, (&mi, &zi))| {
            let scaled = (delta * mi).round();
            if !scaled.is_finite() || scaled.abs() >= (qi / 2) as f64 {
                return Err(Error::EncodingOverflow { index, encoded: scaled as i128 });
            }
            let enc = (scaled as i128).rem_euclid(qi);
            Ok(((enc + zi as i128) % qi) as u64)
        })
        .collect()
}

pub fn decrypt_with_keystream(z: &[u64], c: &[u64], delta: f64, q: u64) -> Result<Vec<f64>> {
    if c.len() != z.len() {
        return Err(Error::LengthMismatch { expected: z.len(), got: c.len() });
    }
    let qi = q as i128;
    Ok(c
        .iter()
        .zip(z)
        .map(|(&ci, &zi)| {
            let d = (ci as i128 - zi as i128).rem_euclid(qi);
            let centered = if d > qi / 2 { d - qi } else { d };
            centered as f64 / delta
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::params::CipherParams;

    #[test]
    fn zero_message_gives_keystream() {
        let z = vec![5, 9, 0];
        assert_eq!(encrypt_with_keystream(&z, &[0.0; 3], 1024.0, 17).unwrap(), z);
    }

    #[test]
    fn scaled_residue() {
        let q = 33_292_289;
        let c = encrypt_with_keystream(&[0], &[1.5], 1024.0, q).unwrap();
        assert_eq!(c, vec![1536]);
        let c = encrypt_with_keystream(&[0], &[-1.5], 1024.0, q).unwrap();
        assert_eq!(c, vec![q - 1536]);
    }

    #[test]
    fn overflow_detected() {
        let err = encrypt_with_keystream(&[0], &[20.0], 1.0, 17).unwrap_err();
        assert!(matches!(err, Error::EncodingOverflow { index: 0, .. }));
    }

    #[test]
    fn round_trip() {
        let p = CipherParams::rubato_par128l();
        let c = Cipher::new(p.clone()).unwrap();
        let key = Key::derive(b"rt", &p).unwrap();
        let delta = 1024.0;
        let m: Vec<f64> = (0..60).map(|i| (i as f64 - 30.0) * 0.37).collect();
        let ct = encrypt(&c, &key, b"n", 4, &m, delta).unwrap();
        let back = decrypt(&c, &key, b"n", 4, &ct, delta).unwrap();
        for (a, b) in m.iter().zip(&back) {
            assert!((a - b).abs() <= 0.5 / delta + 1e-12);
        }
    }
}
