//! Algebraic content of the linear E×ε Jahn-Teller Hamiltonian: diabatic
//! potential matrix, adiabatic surfaces and frames, position-representation
//! gauge potentials with their field tensor and loop holonomy, and the
//! constant dual-gauge (momentum-picture) structures.
//!
//! Conventions: the two diabatic channels |1⟩, |2⟩ are the spinor components
//! (c1, c2); the Pauli matrices are the standard ones in that ordering, so
//! channel |1⟩ is spin-up (⟨σz⟩ = +1). All operations here are pure functions.

use nalgebra::{Matrix2, Vector2, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Point2 = Vector2<f64>;
pub type Spinor = Vector2<C64>;
pub type Mat2 = Matrix2<C64>;

const I: C64 = C64::new(0.0, 1.0);

pub fn sigma_x() -> Mat2 {
    Mat2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0))
}

pub fn sigma_y() -> Mat2 {
    Mat2::new(C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0))
}

pub fn sigma_z() -> Mat2 {
    Mat2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0))
}

/// Physical constants of the model: vibrational frequency and vibronic
/// coupling strength, both in atomic units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega: f64,
    pub k: f64,
}

impl ModelParams {
    pub fn new(omega: f64, k: f64) -> Result<Self> {
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::InvalidInput(format!("omega must be positive and finite, got {omega}")));
        }
        if !k.is_finite() || k < 0.0 {
            return Err(Error::InvalidInput(format!("k must be non-negative and finite, got {k}")));
        }
        Ok(Self { omega, k })
    }
}

/// A Hermitian 2×2 matrix written as a·I + b·σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliDecomposition {
    pub a: f64,
    pub b: Vector3<f64>,
}

impl PauliDecomposition {
    pub fn to_matrix(&self) -> Mat2 {
        let (bx, by, bz) = (self.b.x, self.b.y, self.b.z);
        Mat2::new(
            C64::new(self.a + bz, 0.0),
            C64::new(bx, -by),
            C64::new(bx, by),
            C64::new(self.a - bz, 0.0),
        )
    }

    /// Inverse of `to_matrix`; assumes `m` is Hermitian.
    pub fn from_matrix(m: &Mat2) -> Self {
        let a = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
        let bz = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
        let bx = m[(1, 0)].re;
        let by = m[(1, 0)].im;
        Self { a, b: Vector3::new(bx, by, bz) }
    }
}

/// Position-representation gauge potential components and scalar potential
/// sampled at one point.
#[derive(Debug, Clone)]
pub struct GaugeSample {
    pub ax: Mat2,
    pub ay: Mat2,
    pub phi: f64,
}

/// The constant momentum-picture gauge structures.
#[derive(Debug, Clone)]
pub struct DualGauge {
    pub atilde_x: Mat2,
    pub atilde_y: Mat2,
    pub phi_tilde: f64,
    pub bz_coefficient: f64,
}

/// Potential matrix at a point: a = ω(qx²+qy²)/2, b = (k·qx, k·qy, 0).
pub fn diabatic_potential(q: Point2, params: &ModelParams) -> PauliDecomposition {
    let a = 0.5 * params.omega * (q.x * q.x + q.y * q.y);
    PauliDecomposition { a, b: Vector3::new(params.k * q.x, params.k * q.y, 0.0) }
}

/// Adiabatic surfaces (V−, V+) = ωρ²/2 ∓ kρ.
pub fn adiabatic_energies(q: Point2, params: &ModelParams) -> (f64, f64) {
    let rho = q.x.hypot(q.y);
    let a = 0.5 * params.omega * rho * rho;
    (a - params.k * rho, a + params.k * rho)
}

/// Adiabatic frame at azimuthal angle φ (half-angle convention), returned as
/// (ψ−, ψ+) with b·σ eigenvalues ∓kρ. Continuous in φ; antiperiodic over 2π.
pub fn adiabatic_states_at_angle(phi: f64) -> (Spinor, Spinor) {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let em = C64::from_polar(inv_sqrt2, -0.5 * phi);
    let ep = C64::from_polar(inv_sqrt2, 0.5 * phi);
    let psi_plus = Spinor::new(em, ep);
    let psi_minus = Spinor::new(em, -ep);
    (psi_minus, psi_plus)
}

/// Adiabatic states at a point, φ = atan2(qy, qx) on the principal branch.
pub fn adiabatic_states(q: Point2) -> Result<(Spinor, Spinor)> {
    let rho = q.x.hypot(q.y);
    if rho == 0.0 {
        return Err(Error::SingularPoint { rho });
    }
    Ok(adiabatic_states_at_angle(q.y.atan2(q.x)))
}

/// Gauge potential components Ax = qy/ρ²·σy, Ay = −qx/ρ²·σy and scalar
/// potential Φ = 1/(8ρ²).
pub fn gauge_potential(q: Point2) -> Result<GaugeSample> {
    let rho2 = q.x * q.x + q.y * q.y;
    if rho2 == 0.0 {
        return Err(Error::SingularPoint { rho: 0.0 });
    }
    let sy = sigma_y();
    Ok(GaugeSample {
        ax: sy * C64::new(q.y / rho2, 0.0),
        ay: sy * C64::new(-q.x / rho2, 0.0),
        phi: 1.0 / (8.0 * rho2),
    })
}

/// Field tensor F_xy = ∂x Ay − ∂y Ax − i[Ax, Ay] by central differences of
/// `gauge_potential` plus the commutator at the point itself.
pub fn field_tensor(q: Point2, step: f64) -> Result<Mat2> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidInput(format!("step must be positive and finite, got {step}")));
    }
    let rho = q.x.hypot(q.y);
    if rho < 2.0 * step {
        return Err(Error::SingularPoint { rho });
    }
    let h = step;
    let ay_xp = gauge_potential(Point2::new(q.x + h, q.y))?.ay;
    let ay_xm = gauge_potential(Point2::new(q.x - h, q.y))?.ay;
    let ax_yp = gauge_potential(Point2::new(q.x, q.y + h))?.ax;
    let ax_ym = gauge_potential(Point2::new(q.x, q.y - h))?.ax;
    let here = gauge_potential(q)?;
    let inv_2h = C64::new(1.0 / (2.0 * h), 0.0);
    let d_ay_dx = (ay_xp - ay_xm) * inv_2h;
    let d_ax_dy = (ax_yp - ax_ym) * inv_2h;
    let comm = here.ax * here.ay - here.ay * here.ax;
    Ok(d_ay_dx - d_ax_dy - comm * I)
}

/// Frobenius norm of a 2×2 complex matrix.
pub fn frobenius_norm(m: &Mat2) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn validate_loop(radius: f64, n_points: usize) -> Result<()> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::InvalidInput(format!("loop radius must be positive, got {radius}")));
    }
    if n_points < 16 {
        return Err(Error::InvalidInput(format!("loop needs at least 16 points, got {n_points}")));
    }
    Ok(())
}

/// Ordered product of unit-modulus overlap links ⟨ψ−(q_{j+1})|ψ−(q_j)⟩ around
/// a circle of the given radius, with each state on the principal branch.
/// Encircling the intersection gives exactly −1 regardless of per-point
/// phase choices.
pub fn wilson_loop_product(radius: f64, n_points: usize) -> Result<C64> {
    validate_loop(radius, n_points)?;
    let states: Vec<Spinor> = (0..n_points)
        .map(|j| {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_points as f64;
            let q = Point2::new(radius * phi.cos(), radius * phi.sin());
            adiabatic_states(q).map(|(minus, _)| minus)
        })
        .collect::<Result<_>>()?;
    let mut product = C64::new(1.0, 0.0);
    for j in 0..n_points {
        let link = states[(j + 1) % n_points].dotc(&states[j]);
        let m = link.norm();
        if m < 1e-12 {
            return Err(Error::InvalidInput("loop discretization too coarse: vanishing overlap".into()));
        }
        product *= link / m;
    }
    Ok(product)
}

/// Geometric phase of the lower adiabatic state around a loop encircling the
/// intersection: the argument of the ordered closed product of unit-modulus
/// overlap links. Closure reuses the starting state vector itself, so the
/// sign the state picks up over one circuit lands in the wrap link. Returns a
/// value in (−π, π]; equals π for every radius.
pub fn berry_phase_loop(radius: f64, n_points: usize) -> Result<f64> {
    validate_loop(radius, n_points)?;
    let states: Vec<Spinor> = (0..n_points)
        .map(|j| {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_points as f64;
            adiabatic_states_at_angle(phi).0
        })
        .collect();
    let mut product = C64::new(1.0, 0.0);
    for j in 0..n_points {
        let link = states[(j + 1) % n_points].dotc(&states[j]);
        let m = link.norm();
        if m < 1e-12 {
            return Err(Error::InvalidInput("loop discretization too coarse: vanishing overlap".into()));
        }
        product *= link / m;
    }
    let a = product.arg();
    // A holonomy of −1 sits exactly on the principal-branch boundary; rounding
    // noise in the link product can land infinitesimally below −π, so fold the
    // boundary neighborhood onto the canonical representative +π.
    Ok(if (a.abs() - std::f64::consts::PI).abs() < 1e-9 { std::f64::consts::PI } else { a })
}

/// Constant dual gauge structures: Ãx,y = −(k/ω)σx,y, Φ̃ = −k²/ω (sign fixed
/// so that expanding the minimally coupled form reproduces the Hamiltonian
/// exactly), and the σz coefficient 2k²/ω² of the dual magnetic field.
pub fn dual_gauge(params: &ModelParams) -> DualGauge {
    let r = params.k / params.omega;
    let scale = C64::new(-r, 0.0);
    DualGauge {
        atilde_x: sigma_x() * scale,
        atilde_y: sigma_y() * scale,
        phi_tilde: -params.k * params.k / params.omega,
        bz_coefficient: 2.0 * r * r,
    }
}

/// Dual Lorentz force 2(k²/ω²)·spin_z·(−qy, qx).
pub fn dual_lorentz_force(q: Point2, spin_z: f64, params: &ModelParams) -> Vector2<f64> {
    let r = params.k / params.omega;
    let c = 2.0 * r * r * spin_z;
    Vector2::new(-c * q.y, c * q.x)
}
