//! CHSH operator algebra on `n` copies: observable quadruples, the
//! operators `M` and `N`, the K/L weight kernels, the decomposition of `N²`
//! and a see-saw optimizer over arbitrary dichotomic observables.
//!
//! Operators use the qubit ordering of [`crate::states`]: Alice's `2ⁿ`
//! dimensional factor first.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matkernel::{
    hermitian_eig, kron, pauli, sign_observable, sign_observable_lenient, spectral_norm, ComplexMatrix,
};
use crate::scalar::{Complex, Real};
use crate::states::{mixed_weights, pure_state_vector, NoiseParameter, MAX_DENSE_COPIES};

fn check_copies(n: usize) -> Result<()> {
    if (1..=MAX_DENSE_COPIES).contains(&n) {
        Ok(())
    } else {
        Err(Error::CopyCount { n, min: 1, max: MAX_DENSE_COPIES })
    }
}

fn side_dimension(dim: usize) -> Option<usize> {
    let copies = dim.checked_ilog2()? as usize;
    (dim.is_power_of_two() && copies >= 1).then_some(copies)
}

/// Alice's `A₀, A₁` and Bob's `B₀, B₁`, each a `±1` observable on `2ⁿ`
/// dimensions.
#[derive(Clone, Debug)]
pub struct ObservableQuad<T> {
    copies: usize,
    pub a0: ComplexMatrix<T>,
    pub a1: ComplexMatrix<T>,
    pub b0: ComplexMatrix<T>,
    pub b1: ComplexMatrix<T>,
}

impl<T: Real> ObservableQuad<T> {
    /// Checks shapes, hermiticity and `O² = 𝟙` (within `1e-10`).
    pub fn new(a0: ComplexMatrix<T>, a1: ComplexMatrix<T>, b0: ComplexMatrix<T>, b1: ComplexMatrix<T>) -> Result<Self> {
        let dim = a0.rows();
        let copies =
            side_dimension(dim).ok_or_else(|| Error::InvalidArgument(format!("side dimension {dim} is not 2ⁿ")))?;
        let tol = T::tol(1e-10);
        let identity = ComplexMatrix::identity(dim);
        for o in [&a0, &a1, &b0, &b1] {
            if !o.is_square() {
                return Err(Error::NotSquare { rows: o.rows(), cols: o.cols() });
            }
            if o.rows() != dim {
                return Err(Error::Dimension { expected: dim, actual: o.rows() });
            }
            let defect = o.hermitian_defect();
            if defect > tol {
                return Err(Error::NotHermitian(defect.to_f64().unwrap_or(f64::NAN)));
            }
            let square = o.matmul(o).max_abs_diff(&identity);
            if square > tol {
                return Err(Error::InvalidArgument(format!(
                    "observable squares to identity only within {:e}",
                    square.to_f64().unwrap_or(f64::NAN)
                )));
            }
        }
        Ok(Self { copies, a0, a1, b0, b1 })
    }

    /// Number of copies `n` (each side has dimension `2ⁿ`).
    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn side_dim(&self) -> usize {
        self.a0.rows()
    }

    /// Each observable replaced by its `k`-fold tensor power.
    pub fn tensor_power(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("tensor power needs k >= 1".into()));
        }
        let power = |o: &ComplexMatrix<T>| (1..k).fold(o.clone(), |acc, _| kron(&acc, o));
        Self::new(power(&self.a0), power(&self.a1), power(&self.b0), power(&self.b1))
    }
}

/// The single-copy observables attaining `2√(1+(1−2p)²)` on `|Ψ(p)⟩`:
/// `A₀ = Z`, `A₁ = X`, `B₀,₁ = ((2p−1)Z ± X)/√(1+(1−2p)²)`.
pub fn meas_observables<T: Real>(p: NoiseParameter<T>) -> ObservableQuad<T> {
    let s = T::two() * p.value() - T::one();
    let norm = (T::one() + s * s).sqrt();
    let z = pauli::z::<T>();
    let x = pauli::x::<T>();
    let sz = z.scale_real(s / norm);
    let xn = x.scale_real(T::one() / norm);
    ObservableQuad::new(z, x, &sz + &xn, &sz - &xn).expect("unit Bloch vectors give valid observables")
}

/// `meas_observables(p)` tensored over `n` copies.
pub fn meas_family<T: Real>(p: NoiseParameter<T>, n: usize) -> Result<ObservableQuad<T>> {
    check_copies(n)?;
    meas_observables(p).tensor_power(n)
}

/// `M = A₀⊗B₀ + A₀⊗B₁ + A₁⊗B₀ − A₁⊗B₁`.
pub fn chsh_operator<T: Real>(quad: &ObservableQuad<T>) -> ComplexMatrix<T> {
    kron(&quad.a0, &(&quad.b0 + &quad.b1)) + kron(&quad.a1, &(&quad.b0 - &quad.b1))
}

fn check_density<T: Real>(rho: &ComplexMatrix<T>, expected: usize) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::NotSquare { rows: rho.rows(), cols: rho.cols() });
    }
    if rho.rows() != expected {
        return Err(Error::Dimension { expected, actual: rho.rows() });
    }
    Ok(())
}

/// `Re Tr(M ρ)`.
pub fn chsh_value<T: Real>(rho: &ComplexMatrix<T>, quad: &ObservableQuad<T>) -> Result<T> {
    let d = quad.side_dim();
    check_density(rho, d * d)?;
    Ok(trace_product(&chsh_operator(quad), rho))
}

fn trace_product<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> T {
    let n = a.rows();
    let mut acc = T::zero();
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// `X^x = ⊗ᵢ X^{xᵢ}` on `n` qubits, copy 1 most significant.
pub fn x_power<T: Real>(x: usize, n: usize) -> ComplexMatrix<T> {
    let dim = 1usize << n;
    ComplexMatrix::from_fn(dim, dim, |i, j| {
        if i ^ j == x {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

/// `X^x O X^x` as a permutation of entries.
fn conjugate_by_x<T: Real>(o: &ComplexMatrix<T>, x: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(o.rows(), o.cols(), |i, j| o[(i ^ x, j ^ x)])
}

fn check_quad_copies<T: Real>(quad: &ObservableQuad<T>, n: usize) -> Result<()> {
    check_copies(n)?;
    if quad.copies() != n {
        return Err(Error::Dimension { expected: 1 << n, actual: quad.side_dim() });
    }
    Ok(())
}

/// `N = Σ_x w_x (𝟙⊗X^x) M (𝟙⊗X^x)`, so that `⟨ψ|^⊗n N |ψ⟩^⊗n = Tr(M ρ^⊗n)`.
pub fn build_n<T: Real>(p: NoiseParameter<T>, n: usize, quad: &ObservableQuad<T>) -> Result<ComplexMatrix<T>> {
    check_quad_copies(quad, n)?;
    let w = mixed_weights(p, n)?;
    let (p_sum, q_sum) = weighted_bob_sums(quad, &w.weights);
    Ok(kron(&quad.a0, &p_sum) + kron(&quad.a1, &q_sum))
}

/// `(Σ_x w_x (B₀^x + B₁^x), Σ_x w_x (B₀^x − B₁^x))`.
fn weighted_bob_sums<T: Real>(quad: &ObservableQuad<T>, weights: &[T]) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
    let d = quad.side_dim();
    let plus = &quad.b0 + &quad.b1;
    let minus = &quad.b0 - &quad.b1;
    let mut p_sum = ComplexMatrix::zeros(d, d);
    let mut q_sum = ComplexMatrix::zeros(d, d);
    for (x, &w) in weights.iter().enumerate() {
        p_sum = p_sum + conjugate_by_x(&plus, x).scale_real(w);
        q_sum = q_sum + conjugate_by_x(&minus, x).scale_real(w);
    }
    (p_sum, q_sum)
}

/// Real `2ⁿ × 2ⁿ` kernel with entries depending only on `x ⊕ y`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KlMatrix<T> {
    pub n: usize,
    /// Row-major entries.
    pub entries: Vec<T>,
}

impl<T: Real> KlMatrix<T> {
    /// `K[x, y] = 2⁻ⁿ Σ_z w_{x⊕z} w_{y⊕z}`.
    pub fn from_convolution(weights: &[T]) -> Result<Self> {
        let dim = weights.len();
        let n = side_dimension(dim).ok_or_else(|| Error::InvalidArgument(format!("{dim} weights is not 2ⁿ")))?;
        let scale = T::one() / T::from_usize(dim).unwrap();
        // the kernel is XOR-circulant, so one row determines it
        let row: Vec<T> = (0..dim).map(|y| (0..dim).map(|z| weights[z] * weights[y ^ z]).sum::<T>() * scale).collect();
        let entries = (0..dim * dim).map(|idx| row[(idx / dim) ^ (idx % dim)]).collect();
        Ok(Self { n, entries })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entry(&self, x: usize, y: usize) -> T {
        self.entries[x * self.dim() + y]
    }

    /// Entry value at XOR-weight `k` for `k = 0..=n`: the scalars `a, b, c, d`.
    pub fn by_xor_weight(&self) -> Vec<T> {
        (0..=self.n).map(|k| self.entry(0, (1 << k) - 1)).collect()
    }

    pub fn row_sums(&self) -> Vec<T> {
        self.entries.chunks(self.dim()).map(|row| row.iter().copied().sum()).collect()
    }

    /// Largest `|K[x,y] − K[x',y']|` over pairs with `x⊕y = x'⊕y'`.
    pub fn circulant_defect(&self) -> T {
        let d = self.dim();
        (0..d * d).fold(T::zero(), |m, idx| {
            let (x, y) = (idx / d, idx % d);
            m.max((self.entry(x, y) - self.entry(0, x ^ y)).abs())
        })
    }

    /// Largest `|K[x,y] − K[y,x]|`.
    pub fn symmetry_defect(&self) -> T {
        let d = self.dim();
        (0..d * d).fold(T::zero(), |m, idx| {
            let (x, y) = (idx / d, idx % d);
            m.max((self.entry(x, y) - self.entry(y, x)).abs())
        })
    }

    /// Eigenvalues from the Walsh–Hadamard transform of the first row,
    /// sorted descending.
    pub fn walsh_hadamard_eigenvalues(&self) -> Vec<T> {
        let mut v: Vec<T> = (0..self.dim()).map(|y| self.entry(0, y)).collect();
        let mut h = 1;
        while h < v.len() {
            for block in (0..v.len()).step_by(2 * h) {
                for i in block..block + h {
                    let (u, w) = (v[i], v[i + h]);
                    v[i] = u + w;
                    v[i + h] = u - w;
                }
            }
            h *= 2;
        }
        v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        v
    }

    pub fn to_matrix(&self) -> ComplexMatrix<T> {
        let d = self.dim();
        ComplexMatrix::from_fn(d, d, |x, y| Complex::new(self.entry(x, y), T::zero()))
    }
}

/// The K (= L) kernel of `ρ^⊗n` for `n ∈ {1, 2, 3}`.
pub fn kl_matrix<T: Real>(p: NoiseParameter<T>, n: usize) -> Result<KlMatrix<T>> {
    check_copies(n)?;
    KlMatrix::from_convolution(&mixed_weights(p, n)?.weights)
}

/// Row-major `w_x w_y`, the kernel that `N²` actually carries.
pub fn weight_outer_kernel<T: Real>(p: NoiseParameter<T>, n: usize) -> Result<Vec<T>> {
    check_copies(n)?;
    let w = mixed_weights(p, n)?.weights;
    Ok(w.iter().flat_map(|&wx| w.iter().map(move |&wy| wx * wy)).collect())
}

/// Triangle-inequality bound on `‖L̃‖` from the kernel entries `a, b, c, d`
/// grouped by XOR weight. At three copies it is `8|a−b|+24|c−b|+8|d−b|`.
pub fn ltilde_norm_bound<T: Real>(p: NoiseParameter<T>, n: usize) -> Result<T> {
    let e = kl_matrix(p, n)?.by_xor_weight();
    let gap = |i: usize| (e[i] - e[1]).abs();
    Ok(match n {
        1 => T::two() * gap(0),
        2 => T::of(4.0) * (gap(0) + gap(2)),
        _ => T::of(8.0) * gap(0) + T::of(24.0) * gap(2) + T::of(8.0) * gap(3),
    })
}

/// Every operator in the decomposition `N² = 4𝟙⊗K̃ + 2A⊗L̃`.
#[derive(Clone, Debug)]
pub struct BellBundle<T> {
    pub copies: usize,
    pub quad: ObservableQuad<T>,
    pub m: ComplexMatrix<T>,
    pub n: ComplexMatrix<T>,
    pub k: KlMatrix<T>,
    pub k_tilde: ComplexMatrix<T>,
    pub l_tilde: ComplexMatrix<T>,
    /// `A = A₁A₀ − A₀A₁`.
    pub a_comm: ComplexMatrix<T>,
}

/// `(K̃, L̃)` for an arbitrary row-major kernel (`L = K`).
fn tilde_operators<T: Real>(quad: &ObservableQuad<T>, kernel: &[T]) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
    let d = quad.side_dim();
    let b0: Vec<_> = (0..d).map(|x| conjugate_by_x(&quad.b0, x)).collect();
    let b1: Vec<_> = (0..d).map(|x| conjugate_by_x(&quad.b1, x)).collect();
    let mut k_tilde = ComplexMatrix::zeros(d, d);
    let mut l_tilde = ComplexMatrix::zeros(d, d);
    for x in 0..d {
        for y in 0..d {
            let weight = kernel[x * d + y] * T::half();
            k_tilde = k_tilde + (b0[x].matmul(&b0[y]) + b1[x].matmul(&b1[y])).scale_real(weight);
            l_tilde = l_tilde + c_operator(&b0, &b1, x, y).scale_real(weight);
        }
    }
    (k_tilde, l_tilde)
}

fn c_operator<T: Real>(b0: &[ComplexMatrix<T>], b1: &[ComplexMatrix<T>], x: usize, y: usize) -> ComplexMatrix<T> {
    b0[x].matmul(&b1[y]) - b1[y].matmul(&b0[x])
}

impl<T: Real> BellBundle<T> {
    /// `C_xy = B₀^x B₁^y − B₁^y B₀^x`.
    pub fn c_xy(&self, x: usize, y: usize) -> ComplexMatrix<T> {
        let b0x = conjugate_by_x(&self.quad.b0, x);
        let b1y = conjugate_by_x(&self.quad.b1, y);
        b0x.matmul(&b1y) - b1y.matmul(&b0x)
    }

    /// `4𝟙⊗K̃ + 2A⊗L̃`.
    pub fn decomposition(&self) -> ComplexMatrix<T> {
        decomposition_from(&self.a_comm, &self.k_tilde, &self.l_tilde)
    }

    /// `‖N² − (4𝟙⊗K̃ + 2A⊗L̃)‖_max`.
    pub fn n_square_deviation(&self) -> T {
        self.n.matmul(&self.n).max_abs_diff(&self.decomposition())
    }
}

fn decomposition_from<T: Real>(
    a_comm: &ComplexMatrix<T>,
    k_tilde: &ComplexMatrix<T>,
    l_tilde: &ComplexMatrix<T>,
) -> ComplexMatrix<T> {
    let d = k_tilde.rows();
    kron(&ComplexMatrix::identity(d), k_tilde).scale_real(T::of(4.0)) + kron(a_comm, l_tilde).scale_real(T::two())
}

pub fn build_decomposition<T: Real>(p: NoiseParameter<T>, n: usize, quad: &ObservableQuad<T>) -> Result<BellBundle<T>> {
    check_quad_copies(quad, n)?;
    let k = kl_matrix(p, n)?;
    let (k_tilde, l_tilde) = tilde_operators(quad, &k.entries);
    Ok(BellBundle {
        copies: n,
        quad: quad.clone(),
        m: chsh_operator(quad),
        n: build_n(p, n, quad)?,
        k,
        k_tilde,
        l_tilde,
        a_comm: quad.a1.matmul(&quad.a0) - quad.a0.matmul(&quad.a1),
    })
}

/// `‖N² − (4𝟙⊗K̃ + 2A⊗L̃)‖_max` with the K = L kernel of [`kl_matrix`].
pub fn verify_nsquare<T: Real>(p: NoiseParameter<T>, n: usize, quad: &ObservableQuad<T>) -> Result<T> {
    Ok(build_decomposition(p, n, quad)?.n_square_deviation())
}

/// The same deviation with a caller-supplied row-major kernel in place of K.
pub fn verify_nsquare_with_kernel<T: Real>(
    p: NoiseParameter<T>,
    n: usize,
    quad: &ObservableQuad<T>,
    kernel: &[T],
) -> Result<T> {
    check_quad_copies(quad, n)?;
    let d = quad.side_dim();
    if kernel.len() != d * d {
        return Err(Error::Dimension { expected: d * d, actual: kernel.len() });
    }
    let n_op = build_n(p, n, quad)?;
    let (k_tilde, l_tilde) = tilde_operators(quad, kernel);
    let a_comm = quad.a1.matmul(&quad.a0) - quad.a0.matmul(&quad.a1);
    Ok(n_op.matmul(&n_op).max_abs_diff(&decomposition_from(&a_comm, &k_tilde, &l_tilde)))
}

/// `sign(H)` for a Gaussian Hermitian `H`, resampled while degenerate.
pub fn random_dichotomic<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix<T> {
    loop {
        let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(T::of(re), T::of(im))
        });
        if let Ok(o) = sign_observable(&g.hermitian_part()) {
            return o;
        }
    }
}

pub fn random_quad<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ObservableQuad<T>> {
    check_copies(n)?;
    let d = 1 << n;
    ObservableQuad::new(
        random_dichotomic(d, rng),
        random_dichotomic(d, rng),
        random_dichotomic(d, rng),
        random_dichotomic(d, rng),
    )
}

/// See-saw search settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeesawConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once one full update improves the value by less than this.
    pub tolerance: f64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self { restarts: 20, max_iters: 500, tolerance: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct SeesawResult<T> {
    pub value: T,
    pub quad: ObservableQuad<T>,
    /// Restart that produced `value` (lowest index on ties).
    pub best_restart: usize,
    /// Whether the best restart met the tolerance before `max_iters`.
    pub converged: bool,
    /// Whether every restart's value sequence was non-decreasing.
    pub monotone: bool,
    /// Value after each iteration, one sequence per restart.
    pub traces: Vec<Vec<T>>,
}

/// `Tr_B[ρ(𝟙⊗B)]`, so that `Tr(ρ(A⊗B)) = Tr(A·E)`.
fn alice_effective<T: Real>(rho: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let d = b.rows();
    let e = ComplexMatrix::from_fn(d, d, |a, c| {
        let mut s = Complex::new(T::zero(), T::zero());
        for j in 0..d {
            for k in 0..d {
                s += rho[(a * d + j, c * d + k)] * b[(k, j)];
            }
        }
        s
    });
    e.hermitian_part()
}

/// `Tr_A[ρ(A⊗𝟙)]`, so that `Tr(ρ(A⊗B)) = Tr(B·E)`.
fn bob_effective<T: Real>(rho: &ComplexMatrix<T>, a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let d = a.rows();
    let e = ComplexMatrix::from_fn(d, d, |j, k| {
        let mut s = Complex::new(T::zero(), T::zero());
        for x in 0..d {
            for y in 0..d {
                s += rho[(x * d + j, y * d + k)] * a[(y, x)];
            }
        }
        s
    });
    e.hermitian_part()
}

/// Maximizes `Tr(M ρ)` by alternately setting each party's observables to
/// the sign of their effective operators.
pub fn seesaw_optimize<T: Real>(rho: &ComplexMatrix<T>, seed: u64, config: SeesawConfig) -> Result<SeesawResult<T>> {
    if config.restarts == 0 || config.max_iters == 0 {
        return Err(Error::InvalidArgument("see-saw needs at least one restart and one iteration".into()));
    }
    let d = (rho.rows() as f64).sqrt().round() as usize;
    check_density(rho, d * d)?;
    if side_dimension(d).is_none() {
        return Err(Error::InvalidArgument(format!("density dimension {} is not 4ⁿ", rho.rows())));
    }
    let defect = rho.hermitian_defect();
    if defect > T::tol(1e-10) {
        return Err(Error::NotHermitian(defect.to_f64().unwrap_or(f64::NAN)));
    }
    let trace = rho.trace();
    if (trace.re - T::one()).abs() > T::tol(1e-9) || trace.im.abs() > T::tol(1e-9) {
        return Err(Error::InvalidArgument(format!("density trace {trace} is not 1")));
    }
    if hermitian_eig(rho)?.values.last().is_some_and(|&e| e < -T::tol(1e-9)) {
        return Err(Error::InvalidArgument("density matrix is not positive semidefinite".into()));
    }

    let tolerance = T::of(config.tolerance);
    let slack = T::tol(1e-12);
    let mut best: Option<(T, ObservableQuad<T>, usize, bool)> = None;
    let mut traces = Vec::with_capacity(config.restarts);
    let mut monotone = true;

    for restart in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let mut b0 = random_dichotomic::<T, _>(d, &mut rng);
        let mut b1 = random_dichotomic::<T, _>(d, &mut rng);
        let mut a0 = ComplexMatrix::identity(d);
        let mut a1 = ComplexMatrix::identity(d);
        let mut trace_values = Vec::new();
        let mut converged = false;
        for _ in 0..config.max_iters {
            a0 = sign_observable_lenient(&alice_effective(rho, &(&b0 + &b1)))?;
            a1 = sign_observable_lenient(&alice_effective(rho, &(&b0 - &b1)))?;
            b0 = sign_observable_lenient(&bob_effective(rho, &(&a0 + &a1)))?;
            b1 = sign_observable_lenient(&bob_effective(rho, &(&a0 - &a1)))?;
            let m = kron(&a0, &(&b0 + &b1)) + kron(&a1, &(&b0 - &b1));
            let value = trace_product(&m, rho);
            let previous = trace_values.last().copied();
            trace_values.push(value);
            if let Some(prev) = previous {
                if value < prev - slack {
                    monotone = false;
                }
                if value - prev < tolerance {
                    converged = true;
                    break;
                }
            }
        }
        let value = *trace_values.last().expect("at least one iteration");
        if best.as_ref().is_none_or(|(v, ..)| value > *v) {
            let quad = ObservableQuad::new(a0, a1, b0, b1)?;
            best = Some((value, quad, restart, converged));
        }
        traces.push(trace_values);
    }

    let (value, quad, best_restart, converged) = best.expect("at least one restart");
    Ok(SeesawResult { value, quad, best_restart, converged, monotone, traces })
}

/// `|ψ⟩⟨ψ|^⊗n` with `|ψ⟩ = (|00⟩+|11⟩)/√2`.
pub fn bell_density<T: Real>(n: usize) -> Result<ComplexMatrix<T>> {
    Ok(pure_state_vector(NoiseParameter::new(T::one())?, n)?.density())
}

/// Spectral norms of `K̃` and `L̃` for the bundle.
pub fn tilde_norms<T: Real>(bundle: &BellBundle<T>) -> (T, T) {
    (spectral_norm(&bundle.k_tilde), spectral_norm(&bundle.l_tilde))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::mixed_density;
    use proptest::prelude::*;

    const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

    fn p(x: f64) -> NoiseParameter<f64> {
        NoiseParameter::new(x).unwrap()
    }

    fn pure_density(x: f64, n: usize) -> ComplexMatrix<f64> {
        pure_state_vector(p(x), n).unwrap().density()
    }

    fn bound(x: f64) -> f64 {
        2.0 * (1.0 + (1.0 - 2.0 * x).powi(2)).sqrt()
    }

    /// The explicit kernels, entry by XOR-weight.
    fn explicit_entries(x: f64, n: usize) -> Vec<f64> {
        let q = x * x + (1.0 - x) * (1.0 - x);
        let r = x * (1.0 - x);
        match n {
            1 => vec![q / 2.0, r],
            2 => vec![q * q / 4.0, r * q / 2.0, r * r],
            _ => vec![q.powi(3) / 8.0, r * q * q / 4.0, r * r * q / 2.0, r.powi(3)],
        }
    }

    #[test]
    fn meas_observables_are_dichotomic() {
        for x in [0.0, 0.3, 0.5, 0.75, 1.0] {
            let q = meas_observables(p(x));
            assert_eq!(q.copies(), 1);
            // X B₁ X = −B₀ for this family
            let flipped = conjugate_by_x(&q.b1, 1);
            assert!((flipped + q.b0.clone()).max_abs() < 1e-15);
        }
    }

    #[test]
    fn meas_correlators() {
        for x in [0.55, 0.75, 0.9] {
            let q = meas_observables(p(x));
            let psi = pure_state_vector(p(x), 1).unwrap();
            let norm = (2.0 - 4.0 * x + 4.0 * x * x).sqrt();
            let a0b0 = psi.expectation(&kron(&q.a0, &q.b0)).re;
            let a1b0 = psi.expectation(&kron(&q.a1, &q.b0)).re;
            assert!((a0b0 - (1.0 - 2.0 * x).powi(2) / norm).abs() < 1e-14);
            assert!((a1b0 - 1.0 / norm).abs() < 1e-14);
        }
    }

    #[test]
    fn tsirelson_point() {
        let q = meas_observables(p(1.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let want0 = (&pauli::z() + &pauli::x()).scale_real(h);
        assert!(q.b0.max_abs_diff(&want0) < 1e-15);
        let v = chsh_value(&bell_density(1).unwrap(), &q).unwrap();
        assert!((v - TSIRELSON).abs() < 1e-10);
    }

    #[test]
    fn chsh_value_examples() {
        for x in [0.5, 0.6, 0.75, 0.9, 1.0] {
            let q = meas_observables(p(x));
            let pure = chsh_value(&pure_density(x, 1), &q).unwrap();
            let mixed = chsh_value(&mixed_density(p(x), 1).unwrap(), &q).unwrap();
            assert!((pure - bound(x)).abs() < 1e-12);
            assert!((mixed - bound(x)).abs() < 1e-12);
        }
        let q = meas_observables(p(0.7));
        let maximally_mixed = ComplexMatrix::identity(4).scale_real(0.25);
        assert!(chsh_value(&maximally_mixed, &q).unwrap().abs() < 1e-15);
        assert!(matches!(chsh_value(&ComplexMatrix::identity(16), &q), Err(Error::Dimension { .. })));
    }

    #[test]
    fn commuting_bob_is_classical() {
        let z = pauli::z::<f64>();
        let q = ObservableQuad::new(z.clone(), pauli::x(), z.clone(), z).unwrap();
        assert!((spectral_norm(&chsh_operator(&q)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quad_validation() {
        let z = pauli::z::<f64>();
        let twice = z.scale_real(2.0);
        assert!(ObservableQuad::new(z.clone(), z.clone(), z.clone(), twice).is_err());
        let lopsided = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, -1.0]).unwrap();
        assert!(matches!(ObservableQuad::new(z.clone(), z.clone(), z.clone(), lopsided), Err(Error::NotHermitian(_))));
        assert!(matches!(
            ObservableQuad::new(z.clone(), z.clone(), z, ComplexMatrix::identity(4)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn n_matches_mixture_for_one_copy() {
        let x = 0.7;
        let q = meas_observables(p(x));
        let m = chsh_operator(&q);
        let flip = kron(&pauli::identity(), &pauli::x());
        let m_prime = flip.matmul(&m).matmul(&flip);
        let want = m.scale_real(x) + m_prime.scale_real(1.0 - x);
        assert!(build_n(p(x), 1, &q).unwrap().max_abs_diff(&want) < 1e-15);
        assert!(build_n(p(1.0), 1, &q).unwrap().max_abs_diff(&m) < 1e-15);
    }

    #[test]
    fn n_duality_with_mixed_density() {
        for n in 1..=2 {
            let psi = pure_state_vector(p(1.0), n).unwrap();
            for x in [0.5, 0.6, 0.75, 0.9, 1.0] {
                let q = meas_family(p(x), n).unwrap();
                let via_n = psi.expectation(&build_n(p(x), n, &q).unwrap()).re;
                let via_rho = chsh_value(&mixed_density(p(x), n).unwrap(), &q).unwrap();
                assert!((via_n - via_rho).abs() < 1e-10, "n={n} p={x}");
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let k = kl_matrix(p(0.75), 2).unwrap();
        for (got, want) in k.by_xor_weight().iter().zip([0.09765625, 0.05859375, 0.03515625]) {
            assert!((got - want).abs() < 1e-15);
        }
        let k = kl_matrix(p(0.5), 2).unwrap();
        assert!(k.entries.iter().all(|e| (e - 1.0 / 16.0).abs() < 1e-15));
        assert!(matches!(kl_matrix(p(0.5), 4), Err(Error::CopyCount { .. })));
    }

    #[test]
    fn kernel_matches_explicit_forms() {
        for n in 1..=3 {
            for step in 0..=20 {
                let x = 0.5 + step as f64 * 0.025;
                let k = kl_matrix(p(x), n).unwrap();
                let want = explicit_entries(x, n);
                for row in 0..k.dim() {
                    for col in 0..k.dim() {
                        let weight = (row ^ col).count_ones() as usize;
                        assert!((k.entry(row, col) - want[weight]).abs() < 1e-14);
                    }
                }
                for s in k.row_sums() {
                    assert!((s - 1.0 / k.dim() as f64).abs() < 1e-12);
                }
                assert_eq!(k.circulant_defect(), 0.0);
                assert_eq!(k.symmetry_defect(), 0.0);
            }
        }
    }

    #[test]
    fn walsh_hadamard_diagonalizes_kernel() {
        for n in 1..=3 {
            let k = kl_matrix(p(0.8), n).unwrap();
            let dense = hermitian_eig(&k.to_matrix()).unwrap().values;
            for (a, b) in k.walsh_hadamard_eigenvalues().iter().zip(&dense) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ltilde_bound_examples() {
        assert!((ltilde_norm_bound(p(0.75), 2).unwrap() - 0.25).abs() < 1e-15);
        assert!((ltilde_norm_bound(p(0.75), 3).unwrap() - 0.3671875).abs() < 1e-14);
        assert!((ltilde_norm_bound(p(1.0), 1).unwrap() - 1.0).abs() < 1e-15);
        assert!(ltilde_norm_bound(p(0.5), 3).unwrap().abs() < 1e-15);
    }

    #[test]
    fn decomposition_examples() {
        let x = 0.75;
        let b = build_decomposition(p(x), 1, &meas_observables(p(x))).unwrap();
        assert!(b.c_xy(0, 1).max_abs() < 1e-15);
        assert!(b.c_xy(1, 0).max_abs() < 1e-15);
        let (k_norm, _) = tilde_norms(&b);
        assert!(k_norm <= 1.0 + 1e-9);
        assert!(b.m.is_hermitian(1e-12) && b.n.is_hermitian(1e-12));
        assert!(spectral_norm(&b.a_comm.scale_real(2.0)) <= 4.0 + 1e-9);

        let b = build_decomposition(p(0.5), 2, &meas_family(p(0.5), 2).unwrap()).unwrap();
        assert!(spectral_norm(&b.l_tilde) < 1e-12);
    }

    #[test]
    fn weight_outer_kernel_carries_anticommuting_quads() {
        // With w·wᵀ in place of K the identity holds whenever A₀, A₁ anticommute.
        let x = 0.75;
        let q = meas_observables(p(x));
        let kernel = weight_outer_kernel(p(x), 1).unwrap();
        assert!(verify_nsquare_with_kernel(p(x), 1, &q, &kernel).unwrap() < 1e-12);
        assert!(matches!(verify_nsquare_with_kernel(p(x), 1, &q, &kernel[..2]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn seesaw_single_copy() {
        let config = SeesawConfig { restarts: 5, ..SeesawConfig::default() };
        let rho = mixed_density(p(0.75), 1).unwrap();
        let r = seesaw_optimize(&rho, 7, config).unwrap();
        assert!((r.value - 2.0 * 1.25f64.sqrt()).abs() < 1e-6, "{}", r.value);
        assert!(r.monotone && r.converged);

        let r = seesaw_optimize(&bell_density::<f64>(1).unwrap(), 7, config).unwrap();
        assert!((r.value - TSIRELSON).abs() < 1e-6);
    }

    #[test]
    fn seesaw_is_deterministic() {
        let config = SeesawConfig { restarts: 3, ..SeesawConfig::default() };
        let rho = mixed_density(p(0.6), 1).unwrap();
        let a = seesaw_optimize(&rho, 11, config).unwrap();
        let b = seesaw_optimize(&rho, 11, config).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.traces, b.traces);
    }

    #[test]
    fn seesaw_rejects_bad_density() {
        let config = SeesawConfig::default();
        assert!(seesaw_optimize(&ComplexMatrix::<f64>::identity(4), 1, config).is_err());
        assert!(seesaw_optimize(&ComplexMatrix::<f64>::identity(3).scale_real(1.0 / 3.0), 1, config).is_err());
        let bad = ComplexMatrix::diagonal(&[1.5, -0.5, 0.0, 0.0]);
        assert!(seesaw_optimize(&bad, 1, config).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn random_quads_obey_tsirelson(seed in any::<u64>(), n in 1usize..=2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q: ObservableQuad<f64> = random_quad(n, &mut rng).unwrap();
            let m = chsh_operator(&q);
            prop_assert!(m.is_hermitian(1e-10));
            prop_assert!(spectral_norm(&m) <= TSIRELSON + 1e-9);
        }

        #[test]
        fn meas_family_norm_certificates(x in 0.5..=1.0f64, n in 1usize..=3) {
            let q = meas_family(p(x), n).unwrap();
            let b = build_decomposition(p(x), n, &q).unwrap();
            let (k_norm, l_norm) = tilde_norms(&b);
            prop_assert!(k_norm <= 1.0 + 1e-9);
            prop_assert!(l_norm <= ltilde_norm_bound(p(x), n).unwrap() + 1e-9);
        }

        #[test]
        fn seesaw_values_monotone_and_bounded(seed in any::<u64>(), x in 0.5..=1.0f64) {
            let config = SeesawConfig { restarts: 2, ..SeesawConfig::default() };
            let r = seesaw_optimize(&mixed_density(p(x), 1).unwrap(), seed, config).unwrap();
            prop_assert!(r.monotone);
            for trace in &r.traces {
                for v in trace {
                    prop_assert!(*v <= TSIRELSON + 1e-6);
                }
            }
        }
    }
}
