use crate::error::{Error, Result};

/// Primitive moduli, indexed by `m`.
const MODULI: [u16; 9] = [0, 0, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D];

/// GF(2^m) for `2 <= m <= 8`, elements as polynomial bit patterns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf {
    m: u32,
    exp: Vec<u8>,
    log: Vec<u8>,
}

impl Gf {
    pub fn new(m: u32) -> Result<Self> {
        if !(2..=8).contains(&m) {
            return Err(Error::InvalidParameter(format!("GF(2^{m}) unsupported; need 2 <= m <= 8")));
        }
        let size = 1usize << m;
        let modulus = MODULI[m as usize];
        let mut exp = vec![0u8; 2 * size];
        let mut log = vec![0u8; size];
        let mut v: u16 = 1;
        for i in 0..size - 1 {
            exp[i] = v as u8;
            log[v as usize] = i as u8;
            v <<= 1;
            if v & (1 << m) != 0 {
                v ^= modulus;
            }
        }
        for i in size - 1..2 * size {
            exp[i] = exp[i - (size - 1)];
        }
        Ok(Self { m, exp, log })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn size(&self) -> usize {
        1 << self.m
    }

    pub fn modulus(&self) -> u16 {
        MODULI[self.m as usize]
    }

    pub fn add(&self, a: u8, b: u8) -> u8 {
        a ^ b
    }

    pub fn mul(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    pub fn inv(&self, a: u8) -> u8 {
        assert!(a != 0, "zero has no inverse");
        self.exp[(self.size() - 1) - self.log[a as usize] as usize]
    }

    pub fn div(&self, a: u8, b: u8) -> u8 {
        self.mul(a, self.inv(b))
    }

    /// `alpha^i` for the primitive element `alpha = x`.
    pub fn alpha_pow(&self, i: usize) -> u8 {
        self.exp[i % (self.size() - 1)]
    }

    pub fn pow(&self, a: u8, k: usize) -> u8 {
        if k == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] as usize * k) % (self.size() - 1)]
    }

    /// Horner evaluation of `sum c_j x^j`.
    pub fn eval(&self, coeffs: &[u8], x: u8) -> u8 {
        coeffs.iter().rev().fold(0, |acc, &c| self.mul(acc, x) ^ c)
    }
}
