use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::channel::{decode_index, encode_index, DiscreteChannel};
use crate::error::{check_budget, Error, Result, DEFAULT_BUDGET};
use crate::scalar::Scalar;

/// Ordered list of distinct length-`n` words over `{0, .., q-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    n: usize,
    q: usize,
    words: Vec<Vec<u8>>,
}

impl Codebook {
    pub fn new(n: usize, q: usize, words: Vec<Vec<u8>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Codebook("block length must be positive".into()));
        }
        if !(2..=256).contains(&q) {
            return Err(Error::Codebook(format!("alphabet size {q} outside 2..=256")));
        }
        if words.is_empty() {
            return Err(Error::Codebook("codebook is empty".into()));
        }
        let mut seen = HashSet::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if w.len() != n {
                return Err(Error::Codebook(format!("word {i} has length {}, expected {n}", w.len())));
            }
            if let Some(&s) = w.iter().find(|&&s| s as usize >= q) {
                return Err(Error::Codebook(format!("word {i} uses symbol {s} outside the alphabet")));
            }
            if !seen.insert(w.as_slice()) {
                return Err(Error::Codebook(format!("word {i} is a duplicate")));
            }
        }
        Ok(Self { n, q, words })
    }

    /// Code made of the given block indices (first symbol most significant).
    pub fn from_indices(n: usize, q: usize, indices: &[usize]) -> Result<Self> {
        Self::new(n, q, indices.iter().map(|&i| decode_index(i, q, n).into_iter().map(|d| d as u8).collect()).collect())
    }

    /// All `q^n` words in index order.
    pub fn full_space(n: usize, q: usize) -> Result<Self> {
        let size = crate::error::saturating_pow(q, n);
        check_budget("full codebook", size, DEFAULT_BUDGET)?;
        Self::from_indices(n, q, &(0..size as usize).collect::<Vec<_>>())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Vec<u8>] {
        &self.words
    }

    pub fn index_of(word: &[u8], q: usize) -> usize {
        encode_index(&word.iter().map(|&s| s as usize).collect::<Vec<_>>(), q)
    }

    /// Input index of every codeword in the `n`-fold product alphabet.
    pub fn input_indices(&self) -> Vec<usize> {
        self.words.iter().map(|w| Self::index_of(w, self.q)).collect()
    }

    /// Minimum pairwise Hamming distance; `None` for a single word.
    pub fn min_distance(&self) -> Option<usize> {
        if self.words.len() < 2 {
            return None;
        }
        (0..self.words.len())
            .into_par_iter()
            .map(|i| {
                (i + 1..self.words.len())
                    .map(|j| hamming(&self.words[i], &self.words[j]))
                    .min()
                    .unwrap_or(usize::MAX)
            })
            .min()
    }

    /// `log_q M` when it is an integer.
    pub fn dimension(&self) -> Option<usize> {
        let mut size = 1usize;
        for k in 0..=self.n {
            if size == self.words.len() {
                return Some(k);
            }
            size = size.checked_mul(self.q)?;
        }
        None
    }

    /// `(n - log_q M + 1) - d_min` when `log_q M` is an integer.
    pub fn singleton_defect(&self) -> Option<i64> {
        let k = self.dimension()?;
        let d = self.min_distance()?;
        Some((self.n as i64 - k as i64 + 1) - d as i64)
    }

    pub fn is_mds(&self) -> bool {
        self.singleton_defect() == Some(0)
    }

    /// Text form: a `# n=<n> q=<q>` header and one word per line as base-36
    /// digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("# n={} q={}\n", self.n, self.q);
        for w in &self.words {
            for &s in w {
                out.push(std::char::from_digit(s as u32, 36).expect("q <= 36 for text form"));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut q = None;
        let mut words = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("n=") {
                        n = Some(v.parse::<usize>().map_err(|_| Error::Parse(format!("bad n in header: {v}")))?);
                    } else if let Some(v) = tok.strip_prefix("q=") {
                        q = Some(v.parse::<usize>().map_err(|_| Error::Parse(format!("bad q in header: {v}")))?);
                    }
                }
                continue;
            }
            let word: Option<Vec<u8>> = line
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| c.to_digit(36).map(|d| d as u8))
                .collect();
            let word = word.ok_or_else(|| Error::Parse(format!("line {}: non-alphanumeric symbol", lineno + 1)))?;
            words.push(word);
        }
        let q = q.ok_or_else(|| Error::Parse("missing `# n=<n> q=<q>` header".into()))?;
        if q > 36 {
            return Err(Error::Parse(format!("q = {q} exceeds the base-36 text form")));
        }
        let n = n.or_else(|| words.first().map(Vec::len)).ok_or_else(|| Error::Parse("no codewords".into()))?;
        Self::new(n, q, words)
    }

    pub fn render_words(&self) -> String {
        let mut out = String::new();
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            for &s in w {
                let _ = write!(out, "{}", std::char::from_digit(s as u32, 36).unwrap_or('?'));
            }
        }
        out
    }
}

pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Outputs are summed in fixed-size blocks so that float results do not
/// depend on the number of worker threads.
pub(crate) const SUM_BLOCK: usize = 4096;

pub(crate) fn blocked_sum<S: Scalar>(len: usize, f: impl Fn(usize) -> S + Sync) -> S {
    let blocks: Vec<S> = (0..len.div_ceil(SUM_BLOCK))
        .into_par_iter()
        .map(|b| S::total((b * SUM_BLOCK..((b + 1) * SUM_BLOCK).min(len)).map(&f)))
        .collect();
    S::total(blocks)
}

/// `Pe = 1 - (1/M) sum_y max_{x in C} W(y|x)` for equiprobable messages.
pub fn ml_error_probability<S: Scalar, C: DiscreteChannel<S> + ?Sized>(code: &Codebook, ch: &C) -> Result<S> {
    check_inputs(code, ch)?;
    let idx = code.input_indices();
    let m = S::from_i64(code.len() as i64);
    let correct = blocked_sum(ch.output_count(), |y| {
        idx.iter().map(|&x| ch.prob(x, y)).reduce(S::max_of).unwrap_or_else(S::zero)
    });
    Ok(S::one() - correct / m)
}

/// `Pe = 1 - sum_y max_v P_V(v) W(y|x_v)` for a MAP decoder. `encoder[v]` is
/// the input index sent for message `v`; repeats are allowed.
pub fn map_error_probability<S: Scalar, C: DiscreteChannel<S> + ?Sized>(
    encoder: &[usize],
    source: &[S],
    ch: &C,
) -> Result<S> {
    if encoder.len() != source.len() {
        return Err(Error::AlphabetMismatch { left: encoder.len(), right: source.len() });
    }
    if let Some(&x) = encoder.iter().find(|&&x| x >= ch.input_count()) {
        return Err(Error::Codebook(format!("encoder input {x} outside the channel input alphabet")));
    }
    check_budget("output space", ch.output_count() as u128, DEFAULT_BUDGET)?;
    let correct = blocked_sum(ch.output_count(), |y| {
        encoder
            .iter()
            .zip(source)
            .map(|(&x, p)| p.clone() * ch.prob(x, y))
            .reduce(S::max_of)
            .unwrap_or_else(S::zero)
    });
    Ok(S::one() - correct)
}

/// Maximum-likelihood decision for one output: the first codeword (lowest
/// index) among those with the largest likelihood.
pub fn exhaustive_ml_decode<S: Scalar, C: DiscreteChannel<S> + ?Sized>(code: &Codebook, ch: &C, y: usize) -> usize {
    let mut best = 0;
    let mut best_w = None::<S>;
    for (m, x) in code.input_indices().into_iter().enumerate() {
        let w = ch.prob(x, y);
        if best_w.as_ref().is_none_or(|b| w > *b) {
            best = m;
            best_w = Some(w);
        }
    }
    best
}

fn check_inputs<S: Scalar, C: DiscreteChannel<S> + ?Sized>(code: &Codebook, ch: &C) -> Result<()> {
    let expected = crate::error::saturating_pow(code.q(), code.n());
    if expected != ch.input_count() as u128 {
        return Err(Error::AlphabetMismatch { left: ch.input_count(), right: expected.min(usize::MAX as u128) as usize });
    }
    check_budget("output space", ch.output_count() as u128, DEFAULT_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{erasure_error_channel, product_channel, Channel, ErasureErrorParams};
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    fn code(n: usize, words: &[&str]) -> Codebook {
        Codebook::parse(&format!("# n={n} q=2\n{}", words.join("\n"))).unwrap()
    }

    #[test]
    fn validation() {
        assert!(Codebook::new(2, 2, vec![vec![0, 1], vec![0, 1]]).is_err());
        assert!(Codebook::new(2, 2, vec![vec![0, 1], vec![0]]).is_err());
        assert!(Codebook::new(2, 2, vec![vec![0, 2]]).is_err());
        assert!(Codebook::parse("0101\n").is_err());
    }

    #[test]
    fn text_round_trip() {
        let c = Codebook::new(3, 12, vec![vec![0, 11, 3], vec![10, 1, 2]]).unwrap();
        assert_eq!(c.to_text(), "# n=3 q=12\n0b3\na12\n");
        assert_eq!(Codebook::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn distances_and_singleton() {
        let rep = code(3, &["000", "111"]);
        assert_eq!(rep.min_distance(), Some(3));
        assert!(rep.is_mds());
        let spc = code(3, &["000", "011", "101", "110"]);
        assert_eq!(spc.min_distance(), Some(2));
        assert_eq!(spc.singleton_defect(), Some(0));
        let odd = code(3, &["000", "011", "111"]);
        assert_eq!(odd.dimension(), None);
        assert_eq!(odd.singleton_defect(), None);
        assert_eq!(Codebook::full_space(2, 2).unwrap().min_distance(), Some(1));
    }

    #[test]
    fn exact_ml_error_probabilities() {
        let bsc = Channel::bsc(q(1, 4)).unwrap();
        let one = product_channel(&bsc, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(ml_error_probability(&code(1, &["0", "1"]), &one).unwrap(), q(1, 4));

        let three = product_channel(&bsc, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(ml_error_probability(&code(3, &["000", "111"]), &three).unwrap(), q(5, 32));

        let bec = erasure_error_channel(&ErasureErrorParams::new(2, q(0, 1), q(1, 4)).unwrap());
        let two = product_channel(&bec, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(ml_error_probability(&Codebook::full_space(2, 2).unwrap(), &two).unwrap(), q(15, 64));

        let three = product_channel(&bec, 3, DEFAULT_BUDGET).unwrap();
        let spc = code(3, &["000", "011", "101", "110"]);
        assert_eq!(ml_error_probability(&spc, &three).unwrap(), q(21, 256));
    }

    #[test]
    fn map_error_on_noiseless_channel() {
        let ch = Channel::<Rational>::noiseless(2).unwrap();
        let pv = vec![q(1, 2), q(3, 10), q(1, 5)];
        let mut best = q(1, 1);
        for enc in 0..8usize {
            let e: Vec<usize> = (0..3).map(|v| enc >> v & 1).collect();
            let pe = map_error_probability(&e, &pv, &ch).unwrap();
            if pe < best {
                best = pe;
            }
        }
        assert_eq!(best, q(1, 5));
        assert_eq!(map_error_probability(&[0, 1, 1], &pv, &ch).unwrap(), q(1, 5));
        assert_eq!(map_error_probability(&[0, 1], &[q(1, 1), q(0, 1)], &ch).unwrap(), q(0, 1));
        assert!(map_error_probability(&[0, 1], &pv, &ch).is_err());
    }

    #[test]
    fn equiprobable_map_is_ml() {
        let bsc = Channel::bsc(q(1, 10)).unwrap();
        let ch = product_channel(&bsc, 3, DEFAULT_BUDGET).unwrap();
        let c = code(3, &["001", "110", "111"]);
        let third = vec![q(1, 3); 3];
        assert_eq!(
            map_error_probability(&c.input_indices(), &third, &ch).unwrap(),
            ml_error_probability(&c, &ch).unwrap()
        );
    }

    #[test]
    fn ml_decisions() {
        let bsc = Channel::bsc(q(1, 4)).unwrap();
        let ch = product_channel(&bsc, 3, DEFAULT_BUDGET).unwrap();
        let c = code(3, &["000", "111"]);
        assert_eq!(exhaustive_ml_decode(&c, &ch, 7), 1);
        assert_eq!(exhaustive_ml_decode(&c, &ch, 1), 0);
        let tie = code(3, &["011", "101"]);
        // 001 is at distance 1 from both
        assert_eq!(exhaustive_ml_decode(&tie, &ch, 1), 0);
        let bec = erasure_error_channel(&ErasureErrorParams::new(2, q(0, 1), q(1, 4)).unwrap());
        let ch = product_channel(&bec, 3, DEFAULT_BUDGET).unwrap();
        let spc = code(3, &["000", "011", "101", "110"]);
        // (e, 1, 1): only 011 is compatible
        let y = encode_index(&[2, 1, 1], 3);
        assert_eq!(exhaustive_ml_decode(&spc, &ch, y), 1);
    }

    fn random_code(n: usize) -> impl Strategy<Value = Codebook> {
        prop::collection::btree_set(0usize..(1 << n), 2..=4)
            .prop_map(move |s| Codebook::from_indices(n, 2, &s.into_iter().collect::<Vec<_>>()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn pe_invariant_under_permutation_and_relabeling(c in random_code(4), perm_seed in 0usize..24, flip in 0u8..16) {
            let bsc = Channel::bsc(q(1, 5)).unwrap();
            let ch = product_channel(&bsc, 4, DEFAULT_BUDGET).unwrap();
            let mut perm: Vec<usize> = (0..4).collect();
            let mut s = perm_seed;
            for i in (1..4).rev() {
                perm.swap(i, s % (i + 1));
                s /= i + 1;
            }
            let moved = Codebook::new(4, 2, c.words().iter().map(|w| {
                (0..4).map(|i| w[perm[i]] ^ (flip >> i & 1)).collect()
            }).collect()).unwrap();
            prop_assert_eq!(ml_error_probability(&c, &ch).unwrap(), ml_error_probability(&moved, &ch).unwrap());
        }
    }
}
