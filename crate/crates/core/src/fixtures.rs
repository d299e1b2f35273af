//! Named tensors used throughout tests, the acceptance suite and the CLI.
//!
//! `E1`, `E2` and `E4` are order-3 tensors in two variables and `E3` is a
//! singular 2x2 matrix; `example3_member(l)` is a matrix sequence converging
//! to `E3`.
//! Random generators are seeded through [`SplitMix64`].

use crate::rng::SplitMix64;
use crate::tensor::Tensor;

fn t3(entries: &[([usize; 3], f64)]) -> Tensor {
    Tensor::new(
        3,
        2,
        entries
            .iter()
            .map(|(idx, v)| (idx.iter().map(|i| i - 1).collect(), *v)),
    )
    .expect("fixture entries are valid")
}

/// Symmetric, copositive, nonsingular, not strictly copositive.
/// `A x^2 = (x2^2 + 2 x1 x2, x1^2 + 2 x1 x2)`.
pub fn e1() -> Tensor {
    t3(&[
        ([1, 2, 2], 1.0),
        ([2, 1, 2], 1.0),
        ([2, 2, 1], 1.0),
        ([2, 1, 1], 1.0),
        ([1, 2, 1], 1.0),
        ([1, 1, 2], 1.0),
    ])
}

/// Orthant-singular with a closed image: `A x^2 = 2 x1 x2 (1, 1)`.
pub fn e2() -> Tensor {
    t3(&[
        ([1, 1, 2], 1.0),
        ([1, 2, 1], 1.0),
        ([2, 2, 1], 1.0),
        ([2, 1, 2], 1.0),
    ])
}

/// The singular matrix `[[1, -2], [1, -2]]`.
pub fn e3_bar() -> Tensor {
    Tensor::from_matrix(&[vec![1.0, -2.0], vec![1.0, -2.0]]).expect("valid matrix")
}

/// Member `l >= 1` of the sequence `[[1, -2 - 1/l], [1, -2]]` converging to [`e3_bar`].
pub fn example3_member(l: u32) -> Tensor {
    let l = l.max(1) as f64;
    Tensor::from_matrix(&[vec![1.0, -2.0 - 1.0 / l], vec![1.0, -2.0]]).expect("valid matrix")
}

/// The point `(2 + 2l, l)` mapped by [`example3_member`] onto `(1, 2)`.
pub fn example3_point(l: u32) -> Vec<f64> {
    let l = l.max(1) as f64;
    vec![2.0 + 2.0 * l, l]
}

/// Copositive, not strictly, every principal sub-tensor nonsingular, not
/// sub-symmetric. `A x^3 = (x1 + x2)(x1 - x2)^2`.
pub fn e4() -> Tensor {
    t3(&[
        ([1, 1, 1], 1.0),
        ([2, 2, 2], 1.0),
        ([1, 1, 2], -1.0),
        ([1, 2, 2], -1.0),
    ])
}

pub fn identity(order: usize, dim: usize) -> Tensor {
    Tensor::unit(order, dim).expect("valid shape")
}

/// `-I`: every principal sub-tensor nonsingular, yet `q < 0` has no solution.
pub fn neg_identity(order: usize, dim: usize) -> Tensor {
    identity(order, dim).scaled(-1.0)
}

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &[
    "E1",
    "E2",
    "E3",
    "E4",
    "identity<m><n>",
    "negidentity<m><n>",
    "example3_l<l>",
];

/// Resolves a fixture name. `identity32` is the unit tensor with m = 3, n = 2.
pub fn by_name(name: &str) -> Option<Tensor> {
    let digits = |s: &str| -> Option<(usize, usize)> {
        let b = s.as_bytes();
        if b.len() != 2 || !b.iter().all(u8::is_ascii_digit) {
            return None;
        }
        let (m, n) = ((b[0] - b'0') as usize, (b[1] - b'0') as usize);
        (m >= 2 && n >= 1).then_some((m, n))
    };
    match name {
        "E1" | "e1" => Some(e1()),
        "E2" | "e2" => Some(e2()),
        "E3" | "e3" => Some(e3_bar()),
        "E4" | "e4" => Some(e4()),
        _ => {
            if let Some(rest) = name.strip_prefix("negidentity") {
                digits(rest).map(|(m, n)| neg_identity(m, n))
            } else if let Some(rest) = name.strip_prefix("identity") {
                digits(rest).map(|(m, n)| identity(m, n))
            } else if let Some(rest) = name.strip_prefix("example3_l") {
                rest.parse::<u32>()
                    .ok()
                    .filter(|&l| l >= 1)
                    .map(example3_member)
            } else {
                None
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomKind {
    /// Dense, entries uniform in [-1, 1].
    General,
    /// General tensor averaged over index permutations.
    Symmetric,
    /// General tensor averaged over trailing-index permutations.
    SubSymmetric,
    /// General tensor plus a multiple of the unit tensor large enough to make
    /// it strictly copositive.
    CopositiveShifted,
}

/// Dense random tensor with entries uniform in `[lo, hi]`.
pub fn random_uniform(order: usize, dim: usize, lo: f64, hi: f64, seed: u64) -> Tensor {
    let mut rng = SplitMix64::new(seed);
    let data: Vec<f64> = (0..dim.pow(order as u32))
        .map(|_| rng.uniform(lo, hi))
        .collect();
    Tensor::from_dense(order, dim, &data).expect("valid shape")
}

pub fn random_tensor(kind: RandomKind, order: usize, dim: usize, seed: u64) -> Tensor {
    let base = random_uniform(order, dim, -1.0, 1.0, seed);
    match kind {
        RandomKind::General => base,
        RandomKind::Symmetric => base.symmetrized(),
        RandomKind::SubSymmetric => base.subsymmetrized(),
        RandomKind::CopositiveShifted => {
            // on the unit sphere |A x^m| <= sum|a| while sum x_i^m >= n^{1 - m/2}
            let l1: f64 = base.entries().map(|(_, v)| v.abs()).sum();
            let shift = l1 * (dim as f64).powf(order as f64 / 2.0 - 1.0) + 0.1;
            base.add(&identity(order, dim).scaled(shift))
                .expect("same shape")
        }
    }
}
