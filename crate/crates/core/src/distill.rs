//! Closed-form CHSH figures of merit for entanglement distillation (ED)
//! versus nonlocality distillation (ND) on `n` copies of `|Ψ(p)⟩` or `ρ(p)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::states::{schmidt_product, single_copy_amplitudes, tensor_power_spectrum, NoiseParameter, SchmidtSpectrum};

/// Spacing of the scan grid used to bracket crossover roots.
pub const CROSSOVER_GRID_STEP: f64 = 1e-3;
/// Default bisection width for crossover roots.
pub const CROSSOVER_TOLERANCE: f64 = 1e-6;

/// Optimal probability of converting a pure state with this spectrum into
/// one Bell pair by LOCC: `min{1, 2(1 − σ₁²)}`.
pub fn entanglement_success_probability<T: Real>(spectrum: &SchmidtSpectrum<T>) -> T {
    (T::two() * (T::one() - spectrum.largest_probability())).min(T::one()).max(T::zero())
}

/// CHSH value when success yields a Bell pair (`2√2`) and failure a product
/// state (`2`).
pub fn chsh_from_success<T: Real>(p_succ: T) -> T {
    T::tsirelson() * p_succ + T::two() * (T::one() - p_succ)
}

/// `V_ED` for `n ∈ 1..=4` copies of the pure state.
pub fn v_ed<T: Real>(p: NoiseParameter<T>, n: usize) -> Result<T> {
    let spectrum = tensor_power_spectrum(p, n)?;
    Ok(chsh_from_success(entanglement_success_probability(&spectrum)))
}

/// `2 Σ_k √((σ²_{2k−1} + σ²_{2k})² + 4σ²_{2k−1}σ²_{2k})` over consecutive
/// descending pairs of amplitudes (an odd count is padded with a zero).
pub fn v_nd_pure<T: Real>(spectrum: &SchmidtSpectrum<T>) -> T {
    let sq: Vec<T> = spectrum.probabilities();
    let pair_value = |x: T, y: T| ((x + y) * (x + y) + T::of(4.0) * x * y).sqrt();
    T::two()
        * sq.chunks(2)
            .map(|pair| match *pair {
                [x, y] => pair_value(x, y),
                [x] => pair_value(x, T::zero()),
                _ => unreachable!(),
            })
            .sum::<T>()
}

/// `V_ND` in closed form for `n ∈ {1, 2, 3}`: with `t = a²b²` and
/// `r = a⁴ + b⁴`, `2√(1+4t)` for one and two copies and
/// `4√2·t + 2√(1+4t)·r` for three.
pub fn v_nd_closed<T: Real>(p: NoiseParameter<T>, n: usize) -> Result<T> {
    let t = schmidt_product(p);
    let root = (T::one() + T::of(4.0) * t).sqrt();
    match n {
        1 | 2 => Ok(T::two() * root),
        3 => {
            let (a, b) = single_copy_amplitudes(p);
            let r = a.powi(4) + b.powi(4);
            Ok(T::of(4.0) * T::SQRT_2() * t + T::two() * root * r)
        }
        _ => Err(Error::CopyCount { n, min: 1, max: 3 }),
    }
}

/// `V_ND` for `n ∈ 1..=4`: the closed form where one exists, otherwise the
/// spectrum sum.
pub fn v_nd<T: Real>(p: NoiseParameter<T>, n: usize) -> Result<T> {
    match n {
        1..=3 => v_nd_closed(p, n),
        _ => Ok(v_nd_pure(&tensor_power_spectrum(p, n)?)),
    }
}

/// `1 − 24p² + 80p³ − 120p⁴ + 96p⁵ − 32p⁶`.
pub fn three_copy_mixed_polynomial<T: Real>(p: NoiseParameter<T>) -> T {
    let x = p.value();
    let coeffs = [1.0, 0.0, -24.0, 80.0, -120.0, 96.0, -32.0];
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + T::of(c))
}

/// Upper bound on the CHSH value from `n ∈ {1, 2, 3}` copies of `ρ(p)`.
pub fn v_nd_mixed_bound<T: Real>(p: NoiseParameter<T>, n: usize) -> Result<T> {
    let excess = match n {
        1 | 2 => {
            let s = T::one() - T::two() * p.value();
            s * s
        }
        3 => three_copy_mixed_polynomial(p),
        _ => return Err(Error::CopyCount { n, min: 1, max: 3 }),
    };
    Ok(T::two() * (T::one() + excess).sqrt())
}

/// One point of a p-sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRecord<T> {
    pub p: T,
    pub n: usize,
    pub v_ed: T,
    pub v_nd: T,
    pub p_succ: T,
    pub delta: T,
}

impl<T: Real> SweepRecord<T> {
    /// Pure-state comparison at `n ∈ 1..=4`.
    pub fn pure(p: NoiseParameter<T>, n: usize) -> Result<Self> {
        let spectrum = tensor_power_spectrum(p, n)?;
        let p_succ = entanglement_success_probability(&spectrum);
        Ok(Self::assemble(p, n, chsh_from_success(p_succ), v_nd(p, n)?, p_succ))
    }

    /// Mixed-state ND bound at `n ∈ 1..=3`, against the pure-state ED value
    /// at the same `p`.
    pub fn mixed(p: NoiseParameter<T>, n: usize) -> Result<Self> {
        let bound = v_nd_mixed_bound(p, n)?;
        let spectrum = tensor_power_spectrum(p, n)?;
        let p_succ = entanglement_success_probability(&spectrum);
        Ok(Self::assemble(p, n, chsh_from_success(p_succ), bound, p_succ))
    }

    fn assemble(p: NoiseParameter<T>, n: usize, v_ed: T, v_nd: T, p_succ: T) -> Self {
        Self { p: p.value(), n, v_ed, v_nd, p_succ, delta: v_nd - v_ed }
    }
}

/// Sign information of `delta = V_ND − V_ED` over a sub-interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalProbe<T> {
    pub lo: T,
    pub hi: T,
    pub min_delta: T,
    pub max_delta: T,
    /// `delta > 0` at every interior grid point (endpoints may touch zero).
    pub nd_advantage_throughout: bool,
}

/// Where nonlocality distillation beats entanglement distillation on [1/2, 1].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossoverReport<T> {
    pub n: usize,
    /// Maximal intervals with `delta > 0`, sorted and disjoint.
    pub intervals: Vec<(T, T)>,
    /// Interior sign changes of `delta`, bisected to `tolerance`.
    pub roots: Vec<T>,
    pub grid_step: T,
    pub tolerance: T,
    pub probes: Vec<IntervalProbe<T>>,
}

fn delta<T: Real>(p: T, n: usize) -> T {
    let p = NoiseParameter::new(p).expect("scan stays inside [0, 1]");
    v_nd(p, n).expect("copy count checked") - v_ed(p, n).expect("copy count checked")
}

fn zero_band<T: Real>() -> T {
    T::tol(1e-12)
}

fn scan_grid<T: Real>(lo: T, hi: T) -> Vec<T> {
    let step = T::of(CROSSOVER_GRID_STEP);
    let count = ((hi - lo) / step).round().to_usize().unwrap_or(0);
    let mut points: Vec<T> = (0..=count).map(|i| (lo + step * T::from_usize(i).unwrap()).min(hi)).collect();
    if points.last().is_none_or(|&last| last < hi) {
        points.push(hi);
    }
    points
}

/// Bisects between `inside` (delta > 0) and `outside` until the bracket is
/// narrower than `tol`.
fn bisect_boundary<T: Real>(mut inside: T, mut outside: T, n: usize, tol: T) -> T {
    let band = zero_band::<T>();
    while (inside - outside).abs() > tol {
        let mid = (inside + outside) * T::half();
        if delta(mid, n) > band {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    (inside + outside) * T::half()
}

fn check_crossover_copies(n: usize) -> Result<()> {
    if (2..=4).contains(&n) {
        Ok(())
    } else {
        Err(Error::CopyCount { n, min: 2, max: 4 })
    }
}

/// Scans `delta` on a `10⁻³` grid over [1/2, 1] and bisects each sign change.
pub fn crossover<T: Real>(n: usize, tol: T) -> Result<CrossoverReport<T>> {
    crossover_with_probes(n, tol, &[])
}

/// [`crossover`], additionally probing the sign of `delta` on given intervals.
pub fn crossover_with_probes<T: Real>(n: usize, tol: T, probes: &[(T, T)]) -> Result<CrossoverReport<T>> {
    check_crossover_copies(n)?;
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("crossover tolerance must be positive".into()));
    }
    let band = zero_band::<T>();
    let grid = scan_grid(T::half(), T::one());
    let values: Vec<T> = grid.iter().map(|&p| delta(p, n)).collect();
    let positive: Vec<bool> = values.iter().map(|&d| d > band).collect();
    let last = grid.len() - 1;

    let mut intervals = Vec::new();
    let mut roots = Vec::new();
    let mut start = if positive[0] { Some(grid[0]) } else { None };
    for i in 0..last {
        match (positive[i], positive[i + 1]) {
            (false, true) => {
                let boundary =
                    if values[i].abs() <= band { grid[i] } else { bisect_boundary(grid[i + 1], grid[i], n, tol) };
                if i > 0 || values[i].abs() > band {
                    roots.push(boundary);
                }
                start = Some(boundary);
            }
            (true, false) => {
                let boundary = if values[i + 1].abs() <= band {
                    grid[i + 1]
                } else {
                    bisect_boundary(grid[i], grid[i + 1], n, tol)
                };
                if i + 1 < last || values[i + 1].abs() > band {
                    roots.push(boundary);
                }
                intervals.push((start.take().expect("interval opened"), boundary));
            }
            _ => {}
        }
    }
    if let Some(lo) = start {
        intervals.push((lo, grid[last]));
    }

    let probes = probes.iter().map(|&(lo, hi)| probe_interval(n, lo, hi)).collect::<Result<_>>()?;
    Ok(CrossoverReport { n, intervals, roots, grid_step: T::of(CROSSOVER_GRID_STEP), tolerance: tol, probes })
}

/// Samples `delta` on `[lo, hi]` at the crossover grid spacing.
pub fn probe_interval<T: Real>(n: usize, lo: T, hi: T) -> Result<IntervalProbe<T>> {
    check_crossover_copies(n)?;
    NoiseParameter::new(lo)?;
    NoiseParameter::new(hi)?;
    if !(lo < hi) {
        return Err(Error::InvalidArgument("probe interval must have lo < hi".into()));
    }
    let band = zero_band::<T>();
    let grid = scan_grid(lo, hi);
    let values: Vec<T> = grid.iter().map(|&p| delta(p, n)).collect();
    let interior_positive = values[1..values.len() - 1].iter().all(|&d| d > band);
    let ends_ok = values[0] >= -band && values[values.len() - 1] >= -band;
    Ok(IntervalProbe {
        lo,
        hi,
        min_delta: values.iter().copied().fold(T::infinity(), T::min),
        max_delta: values.iter().copied().fold(T::neg_infinity(), T::max),
        nd_advantage_throughout: interior_positive && ends_ok,
    })
}
