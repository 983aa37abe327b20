//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (orders 3, 5, 7, 9 and 13), after Higham's 2005 variant.

use nalgebra::DMatrix;

use crate::system::C64;

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068e0;
const THETA_13: f64 = 5.371_920_351_148_152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled(a: &DMatrix<C64>, s: f64) -> DMatrix<C64> {
    a * C64::new(s, 0.0)
}

/// Numerator/denominator odd and even parts `(U, V)` for orders up to 9.
fn pade_low(a: &DMatrix<C64>, b: &[f64]) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = a.nrows();
    let ident = DMatrix::<C64>::identity(n, n);
    let a2 = a * a;
    let mut power = ident.clone();
    let mut u = scaled(&ident, b[1]);
    let mut v = scaled(&ident, b[0]);
    for k in 1..b.len() / 2 {
        power = &power * &a2;
        u += scaled(&power, b[2 * k + 1]);
        v += scaled(&power, b[2 * k]);
    }
    (a * u, v)
}

fn pade_13(a: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let b = &B13;
    let n = a.nrows();
    let ident = DMatrix::<C64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u = a * (&a6 * inner_u
        + scaled(&a6, b[7])
        + scaled(&a4, b[5])
        + scaled(&a2, b[3])
        + scaled(&ident, b[1]));
    let inner_v = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v = &a6 * inner_v
        + scaled(&a6, b[6])
        + scaled(&a4, b[4])
        + scaled(&a2, b[2])
        + scaled(&ident, b[0]);
    (u, v)
}

fn solve_pade(u: DMatrix<C64>, v: DMatrix<C64>) -> DMatrix<C64> {
    let p = &v + &u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular inside the scaling bound")
}

/// `exp(A)` for a square complex matrix.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    assert_eq!(a.nrows(), a.ncols(), "expm needs a square matrix");
    let n1 = norm1(a);
    if n1 == 0.0 {
        return DMatrix::identity(a.nrows(), a.ncols());
    }
    for (theta, b) in [
        (THETA_3, &B3[..]),
        (THETA_5, &B5[..]),
        (THETA_7, &B7[..]),
        (THETA_9, &B9[..]),
    ] {
        if n1 <= theta {
            let (u, v) = pade_low(a, b);
            return solve_pade(u, v);
        }
    }
    let s = (n1 / THETA_13).log2().ceil().max(0.0) as i32;
    let a_scaled = scaled(a, 2f64.powi(-s));
    let (u, v) = pade_13(&a_scaled);
    let mut x = solve_pade(u, v);
    for _ in 0..s {
        x = &x * &x;
    }
    x
}
