//! Synthetic mixed-space objectives: Ackley-53, the categorical/continuous
//! Func2C/Func3C family, and a 51x51 ordinal discretization of Branin.
//!
//! Continuous coordinates arrive normalized to [0,1] and are mapped to each
//! problem's native domain internally. Values are returned on the natural
//! scale of each function; the registry layer records which problems are
//! minimized.

use std::f64::consts::{E, PI};

use crate::error::BenchmarkError;
use crate::scalar::Real;
use crate::space::{MixedPoint, SearchSpace};

fn check_shape<T: Real>(
    z: &MixedPoint<T>,
    expected_h: usize,
    expected_x: usize,
) -> Result<(), BenchmarkError> {
    if z.cats.len() != expected_h || z.conts.len() != expected_x {
        return Err(BenchmarkError::Shape {
            expected_h,
            expected_x,
            got_h: z.cats.len(),
            got_x: z.conts.len(),
        });
    }
    Ok(())
}

fn check_levels<T: Real>(z: &MixedPoint<T>, cards: &[usize]) -> Result<(), BenchmarkError> {
    for (dim, (&level, &card)) in z.cats.iter().zip(cards).enumerate() {
        if level >= card {
            return Err(BenchmarkError::LevelOutOfRange { dim, level, card });
        }
    }
    Ok(())
}

/// Map a normalized coordinate in [0,1] onto [-1,1].
fn to_unit_interval<T: Real>(u: T) -> T {
    T::of(2.0) * u - T::one()
}

/// 53-dimensional Ackley: 50 binary coordinates plus 3 continuous in [-1,1].
///
/// Categorical levels contribute their literal values {0,1}. The global
/// minimum 0 sits at the all-zeros point; the function is nonnegative.
pub fn ackley53<T: Real>(z: &MixedPoint<T>) -> Result<T, BenchmarkError> {
    check_shape(z, 50, 3)?;
    check_levels(z, &[2; 50])?;
    let a = T::of(20.0);
    let b = T::of(0.2);
    let c = T::of(2.0 * PI);
    let d = T::of(53.0);
    let mut sum_sq = T::zero();
    let mut sum_cos = T::zero();
    let mut add = |v: T| {
        sum_sq = sum_sq + v * v;
        sum_cos = sum_cos + (c * v).cos();
    };
    for &h in &z.cats {
        add(T::of(h as f64));
    }
    for &u in &z.conts {
        add(to_unit_interval(u));
    }
    Ok(-a * (-b * (sum_sq / d).sqrt()).exp() - (sum_cos / d).exp() + a + T::of(E))
}

pub fn ackley53_space<T: Real>() -> SearchSpace<T> {
    let bounds = vec![(T::of(-1.0), T::one()); 3];
    SearchSpace::new(vec![2; 50], vec![None; 50], bounds)
        .expect("ackley53 space construction cannot fail")
}

/// Beale function.
pub fn bea<T: Real>(x1: T, x2: T) -> T {
    let t1 = T::of(1.5) - x1 + x1 * x2;
    let t2 = T::of(2.25) - x1 + x1 * x2 * x2;
    let t3 = T::of(2.625) - x1 + x1 * x2 * x2 * x2;
    t1 * t1 + t2 * t2 + t3 * t3
}

/// Six-hump camel function, with the leading constant 5.
pub fn cam<T: Real>(x1: T, x2: T) -> T {
    let x1sq = x1 * x1;
    let x2sq = x2 * x2;
    (T::of(5.0) - T::of(2.1) * x1sq + x1sq * x1sq / T::of(3.0)) * x1sq
        + x1 * x2
        + (T::of(-4.0) + T::of(4.0) * x2sq) * x2sq
}

/// Rosenbrock function.
pub fn ros<T: Real>(x1: T, x2: T) -> T {
    let t1 = T::one() - x1;
    let t2 = x2 - x1 * x1;
    t1 * t1 + T::of(100.0) * t2 * t2
}

const FUNC2C_CARDS: [usize; 2] = [3, 5];
const FUNC3C_CARDS: [usize; 3] = [3, 5, 4];

fn base_term<T: Real>(h: usize, x1: T, x2: T) -> T {
    match h {
        0 => ros(x1, x2),
        1 => cam(x1, x2),
        _ => bea(x1, x2),
    }
}

fn second_term<T: Real>(h: usize, x1: T, x2: T) -> T {
    // Five arms, three distinct functions: the bea arm repeats thrice.
    match h {
        0 => ros(x1, x2),
        1 => cam(x1, x2),
        _ => bea(x1, x2),
    }
}

fn third_term<T: Real>(h: usize, x1: T, x2: T) -> T {
    match h {
        0 => T::of(5.0) * ros(x1, x2),
        1 => T::of(2.0) * cam(x1, x2),
        2 => T::of(2.0) * bea(x1, x2),
        _ => T::of(3.0) * bea(x1, x2),
    }
}

/// Two-categorical test function: h_1 picks the base among {ros, cam, bea},
/// h_2 adds one of {ros, cam, bea, bea, bea}; the sum is negated so larger
/// is better.
pub fn func2c<T: Real>(z: &MixedPoint<T>) -> Result<T, BenchmarkError> {
    check_shape(z, 2, 2)?;
    check_levels(z, &FUNC2C_CARDS)?;
    let x1 = to_unit_interval(z.conts[0]);
    let x2 = to_unit_interval(z.conts[1]);
    Ok(-(base_term(z.cats[0], x1, x2) + second_term(z.cats[1], x1, x2)))
}

/// Three-categorical extension of [`func2c`]: h_3 adds one of
/// {5 ros, 2 cam, 2 bea, 3 bea}.
pub fn func3c<T: Real>(z: &MixedPoint<T>) -> Result<T, BenchmarkError> {
    check_shape(z, 3, 2)?;
    check_levels(z, &FUNC3C_CARDS)?;
    let x1 = to_unit_interval(z.conts[0]);
    let x2 = to_unit_interval(z.conts[1]);
    Ok(-(base_term(z.cats[0], x1, x2)
        + second_term(z.cats[1], x1, x2)
        + third_term(z.cats[2], x1, x2)))
}

pub fn func2c_space<T: Real>() -> SearchSpace<T> {
    let bounds = vec![(T::of(-1.0), T::one()); 2];
    SearchSpace::new(FUNC2C_CARDS.to_vec(), vec![None; 2], bounds)
        .expect("func2c space construction cannot fail")
}

pub fn func3c_space<T: Real>() -> SearchSpace<T> {
    let bounds = vec![(T::of(-1.0), T::one()); 2];
    SearchSpace::new(FUNC3C_CARDS.to_vec(), vec![None; 3], bounds)
        .expect("func3c space construction cannot fail")
}

const BRANIN_LEVELS: usize = 51;

/// Standard Branin on its native domain x1 in [-5,10], x2 in [0,15].
fn branin_native<T: Real>(x1: T, x2: T) -> T {
    let a = T::one();
    let b = T::of(5.1 / (4.0 * PI * PI));
    let c = T::of(5.0 / PI);
    let r = T::of(6.0);
    let s = T::of(10.0);
    let t = T::of(1.0 / (8.0 * PI));
    let q = x2 - b * x1 * x1 + c * x1 - r;
    a * q * q + s * (T::one() - t) * x1.cos() + s
}

/// Branin discretized onto a 51x51 ordinal grid: level i maps affinely onto
/// [-1,1] and then onto the native Branin domain.
pub fn branin_discretized<T: Real>(z: &MixedPoint<T>) -> Result<T, BenchmarkError> {
    check_shape(z, 2, 0)?;
    check_levels(z, &[BRANIN_LEVELS; 2])?;
    let grid = |level: usize| {
        T::of(-1.0) + T::of(2.0) * T::of(level as f64) / T::of((BRANIN_LEVELS - 1) as f64)
    };
    let x1 = T::of(2.5) + T::of(7.5) * grid(z.cats[0]);
    let x2 = T::of(7.5) + T::of(7.5) * grid(z.cats[1]);
    Ok(branin_native(x1, x2))
}

pub fn branin51_space<T: Real>() -> SearchSpace<T> {
    SearchSpace::ordinal(vec![BRANIN_LEVELS; 2])
        .expect("branin51 space construction cannot fail")
}
