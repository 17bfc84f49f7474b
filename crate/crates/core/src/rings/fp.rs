//! Polynomials over `F_p`, coefficients low-to-high. Only what the Witt
//! ring needs: irreducibility testing and inversion in `F_p[t]/(M)`.

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn inv_mod(a: u64, p: u64) -> Option<u64> {
    // p prime: Fermat
    if a % p == 0 {
        return None;
    }
    let mut acc = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, base, p);
        }
        base = mulmod(base, base, p);
        e >>= 1;
    }
    Some(acc)
}

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulmod(x, y, p)) % p;
        }
    }
    trim(out)
}

/// Quotient and remainder of `a / b`, `b` nonzero.
fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let b = trim(b.to_vec());
    let lead_inv = inv_mod(*b.last().expect("division by zero polynomial"), p)
        .expect("leading coefficient is a unit");
    let mut rem = trim(a.to_vec());
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let mut quot = vec![0u64; rem.len() - b.len() + 1];
    while rem.len() >= b.len() {
        let shift = rem.len() - b.len();
        let c = mulmod(*rem.last().unwrap(), lead_inv, p);
        quot[shift] = c;
        for (i, &bi) in b.iter().enumerate() {
            let t = mulmod(c, bi, p);
            rem[shift + i] = (rem[shift + i] + p - t) % p;
        }
        rem = trim(rem);
    }
    (trim(quot), rem)
}

fn mulmod_poly(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    divrem(&mul(a, b, p), m, p).1
}

fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = divrem(&a, &b, p).1;
        a = b;
        b = r;
    }
    a
}

/// `t^(p^k) mod m`.
fn frobenius_power_of_t(k: u32, m: &[u64], p: u64) -> Vec<u64> {
    let mut x = divrem(&[0, 1], m, p).1;
    for _ in 0..k {
        // x <- x^p
        let mut acc = vec![1u64];
        let mut base = x.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod_poly(&acc, &base, m, p);
            }
            base = mulmod_poly(&base, &base, m, p);
            e >>= 1;
        }
        x = acc;
    }
    x
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's test for a monic `m` of degree `>= 1` over `F_p`.
pub(crate) fn is_irreducible(m: &[u64], p: u64) -> bool {
    let m = trim(m.to_vec());
    let deg = match m.len() {
        0 | 1 => return false,
        l => (l - 1) as u32,
    };
    if deg == 1 {
        return true;
    }
    let t = vec![0u64, 1];
    for q in prime_factors(deg) {
        let h = sub(&frobenius_power_of_t(deg / q, &m, p), &t, p);
        if gcd(&h, &m, p).len() != 1 {
            return false;
        }
    }
    let h = sub(&frobenius_power_of_t(deg, &m, p), &t, p);
    divrem(&h, &m, p).1.is_empty()
}

/// Inverse of `a` in `F_p[t]/(m)`, `m` irreducible; `None` when `a ≡ 0`.
pub(crate) fn inverse_mod_poly(a: &[u64], m: &[u64], p: u64) -> Option<Vec<u64>> {
    let a = divrem(a, m, p).1;
    if a.is_empty() {
        return None;
    }
    // extended Euclid tracking the coefficient of `a`
    let (mut r0, mut r1) = (trim(m.to_vec()), a);
    let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s = sub(&s0, &mul(&q, &s1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    // r0 is a nonzero constant
    let c = inv_mod(r0[0], p)?;
    let inv: Vec<u64> = s0.iter().map(|&x| mulmod(x, c, p)).collect();
    Some(divrem(&inv, m, p).1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn irreducibility_small_cases() {
        // t^2 + 3 over F_5: 2 is a non-residue
        assert!(is_irreducible(&[3, 0, 1], 5));
        // t^2 - 1 splits
        assert!(!is_irreducible(&[4, 0, 1], 5));
        // t^2 + 1 over F_3 is irreducible, over F_5 it is not
        assert!(is_irreducible(&[1, 0, 1], 3));
        assert!(!is_irreducible(&[1, 0, 1], 5));
        // t^3 + 2t + 1 over F_3
        assert!(is_irreducible(&[1, 2, 0, 1], 3));
        // (t^2+1)^2 over F_3 has no roots but is reducible
        assert!(!is_irreducible(&[1, 0, 2, 0, 1], 3));
    }

    #[test]
    fn inverse_in_f9() {
        let m = [1, 0, 1];
        for a0 in 0..3 {
            for a1 in 0..3 {
                let a = [a0, a1];
                match inverse_mod_poly(&a, &m, 3) {
                    None => assert_eq!((a0, a1), (0, 0)),
                    Some(inv) => {
                        assert_eq!(mulmod_poly(&a, &inv, &m, 3), vec![1]);
                    }
                }
            }
        }
    }
}
