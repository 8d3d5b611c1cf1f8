use crate::error::{check_budget, saturating_pow, Error, Result, DEFAULT_BUDGET};

use super::{Codebook, Gf};

/// Reed–Solomon evaluation code: the message `(m_0, .., m_{k-1})` is the
/// polynomial `p(x) = sum m_j x^j`, sent as `(p(alpha^0), .., p(alpha^{n-1}))`.
#[derive(Clone, Debug)]
pub struct ReedSolomon {
    gf: Gf,
    n: usize,
    k: usize,
    points: Vec<u8>,
}

/// Result of bounded-distance decoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeOutcome {
    Decoded { codeword: Vec<u8>, message: Vec<u8>, errors_corrected: usize },
    Failure,
}

impl ReedSolomon {
    pub fn new(m: u32, n: usize, k: usize) -> Result<Self> {
        let gf = Gf::new(m)?;
        if k == 0 || k > n || n > gf.size() - 1 {
            return Err(Error::InvalidParameter(format!(
                "Reed-Solomon needs 1 <= k <= n <= 2^m - 1; got n = {n}, k = {k}, m = {m}"
            )));
        }
        let points = (0..n).map(|i| gf.alpha_pow(i)).collect();
        Ok(Self { gf, n, k, points })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> usize {
        self.gf.size()
    }

    pub fn field(&self) -> &Gf {
        &self.gf
    }

    pub fn min_distance(&self) -> usize {
        self.n - self.k + 1
    }

    pub fn message_count(&self) -> u128 {
        saturating_pow(self.q(), self.k)
    }

    pub fn encode(&self, message: &[u8]) -> Vec<u8> {
        assert_eq!(message.len(), self.k);
        self.points.iter().map(|&x| self.gf.eval(message, x)).collect()
    }

    /// Message with index `i` (first coefficient most significant digit).
    pub fn message(&self, mut i: usize) -> Vec<u8> {
        let q = self.q();
        let mut msg = vec![0u8; self.k];
        for slot in msg.iter_mut().rev() {
            *slot = (i % q) as u8;
            i /= q;
        }
        msg
    }

    /// All `q^k` codewords, message index order.
    pub fn codebook(&self) -> Result<Codebook> {
        check_budget("Reed-Solomon codebook", self.message_count(), DEFAULT_BUDGET)?;
        let words = (0..self.message_count() as usize).map(|i| self.encode(&self.message(i))).collect();
        Codebook::new(self.n, self.q(), words)
    }

    /// Errors-and-erasures bounded-distance decoding of `received`
    /// (`None` marks an erasure). Succeeds whenever
    /// `2 * errors + erasures <= n - k`; otherwise either fails or returns a
    /// codeword within the decoding radius of the unerased positions.
    pub fn decode(&self, received: &[Option<u8>]) -> DecodeOutcome {
        assert_eq!(received.len(), self.n);
        let kept: Vec<(u8, u8)> =
            received.iter().zip(&self.points).filter_map(|(r, &x)| r.map(|v| (x, v))).collect();
        if kept.len() < self.k {
            return DecodeOutcome::Failure;
        }
        let t = (kept.len() - self.k) / 2;
        let Some(message) = self.berlekamp_welch(&kept, t) else {
            return DecodeOutcome::Failure;
        };
        let errors = kept.iter().filter(|&&(x, v)| self.gf.eval(&message, x) != v).count();
        if errors > t {
            return DecodeOutcome::Failure;
        }
        DecodeOutcome::Decoded { codeword: self.encode(&message), message, errors_corrected: errors }
    }

    /// Finds `p` with `deg p < k` through the key equation
    /// `N(x_i) = y_i E(x_i)`, `E` monic of degree `t`, `deg N < k + t`.
    fn berlekamp_welch(&self, kept: &[(u8, u8)], t: usize) -> Option<Vec<u8>> {
        let gf = &self.gf;
        let n_unknowns = self.k + t;
        let cols = n_unknowns + t;
        let mut rows: Vec<Vec<u8>> = kept
            .iter()
            .map(|&(x, y)| {
                let mut row = Vec::with_capacity(cols + 1);
                row.extend((0..n_unknowns).map(|j| gf.pow(x, j)));
                // -y E_l x^l, and minus is plus in characteristic 2
                row.extend((0..t).map(|l| gf.mul(y, gf.pow(x, l))));
                row.push(gf.mul(y, gf.pow(x, t)));
                row
            })
            .collect();
        let solution = solve(gf, &mut rows, cols)?;
        let numer = &solution[..n_unknowns];
        let mut denom: Vec<u8> = solution[n_unknowns..].to_vec();
        denom.push(1);
        let (quot, rem) = poly_divmod(gf, numer, &denom);
        if rem.iter().any(|&c| c != 0) {
            return None;
        }
        let mut message = quot;
        message.resize(self.k.max(message.len()), 0);
        if message[self.k..].iter().any(|&c| c != 0) {
            return None;
        }
        message.truncate(self.k);
        Some(message)
    }
}

/// Gaussian elimination on an augmented matrix; free variables are set to 0.
fn solve(gf: &Gf, rows: &mut [Vec<u8>], cols: usize) -> Option<Vec<u8>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, p);
        let inv = gf.inv(rows[r][c]);
        for v in rows[r].iter_mut() {
            *v = gf.mul(*v, inv);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let f = rows[i][c];
                for j in 0..=cols {
                    let sub = gf.mul(f, rows[r][j]);
                    rows[i][j] ^= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    if rows[r..].iter().any(|row| row[cols] != 0) {
        return None;
    }
    let mut x = vec![0u8; cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rows[i][cols];
    }
    Some(x)
}

/// Division of polynomials given low-degree-first.
fn poly_divmod(gf: &Gf, num: &[u8], den: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let dd = den.iter().rposition(|&c| c != 0).expect("nonzero divisor");
    let mut rem = num.to_vec();
    if rem.len() <= dd {
        return (vec![0], rem);
    }
    let mut quot = vec![0u8; rem.len() - dd];
    let lead_inv = gf.inv(den[dd]);
    for i in (dd..rem.len()).rev() {
        let coef = gf.mul(rem[i], lead_inv);
        if coef == 0 {
            continue;
        }
        quot[i - dd] = coef;
        for j in 0..=dd {
            rem[i - dd + j] ^= gf.mul(coef, den[j]);
        }
    }
    rem.truncate(dd);
    (quot, rem)
}
