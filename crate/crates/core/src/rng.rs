//! Seeded 64-bit generator used by every sampling routine.
//!
//! SplitMix64 (Steele, Lea, Flood 2014): state advances by the golden-ratio
//! increment `0x9E37_79B9_7F4A_7C15`, and each output is mixed with
//! `z ^= z >> 30; z *= 0xBF58_476D_1CE4_E5B9; z ^= z >> 27; z *= 0x94D0_49BB_1331_11EB; z ^= z >> 31`.
//! Reports are reproducible bit-for-bit across implementations that follow
//! these constants and the derivations below.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1]; safe as a logarithm argument.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via Box-Muller (one draw per pair of uniforms).
    pub fn normal(&mut self) -> f64 {
        let u1 = self.next_open01();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Point drawn uniformly from the probability simplex with `k` vertices.
    pub fn simplex_point(&mut self, k: usize) -> Vec<f64> {
        let mut w: Vec<f64> = (0..k).map(|_| -self.next_open01().ln()).collect();
        let s: f64 = w.iter().sum();
        for v in &mut w {
            *v /= s;
        }
        w
    }

    /// Uniform direction on the unit sphere in `k` dimensions.
    pub fn unit_vector(&mut self, k: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..k).map(|_| self.normal()).collect();
            let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if nrm > 1e-12 {
                return v.into_iter().map(|a| a / nrm).collect();
            }
        }
    }

    /// Seed for an independent child stream; trial `i` of a probe uses the
    /// `i`-th value drawn from the parent.
    pub fn derive(&mut self) -> u64 {
        self.next_u64()
    }
}
