//! Dense density matrices and POVMs, the trace formula for behaviors, and
//! two-qubit entanglement oracles.

use std::path::Path;

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::gamma;
use crate::scenario::{Behavior, Scenario};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Largest total Hilbert-space dimension accepted.
pub const MAX_DIMENSION: usize = 1 << 10;

const STATE_TOL: f64 = 1e-10;
const STATE_EIG_TOL: f64 = 1e-9;
const POVM_TOL: f64 = 1e-9;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)],
    )
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Square root of a positive semidefinite matrix, negative eigenvalues
/// clamped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let eig = m.clone().symmetric_eigen();
    let d = m.nrows();
    let mut scaled = eig.eigenvectors.clone();
    for j in 0..d {
        let s = eig.eigenvalues[j].max(0.0).sqrt();
        for i in 0..d {
            scaled[(i, j)] *= s;
        }
    }
    &scaled * eig.eigenvectors.adjoint()
}

fn check_dims(dims: &[usize], size: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Quantum(format!("invalid party dimensions {dims:?}")));
    }
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    match total {
        Some(t) if t > MAX_DIMENSION => Err(Error::Capacity {
            what: "Hilbert-space dimension",
            count: t as u128,
            cap: MAX_DIMENSION as u128,
        }),
        Some(t) if t == size => Ok(()),
        Some(t) => Err(Error::Quantum(format!(
            "party dimensions {dims:?} give {t}, matrix has size {size}"
        ))),
        None => Err(Error::Capacity {
            what: "Hilbert-space dimension",
            count: u128::MAX,
            cap: MAX_DIMENSION as u128,
        }),
    }
}

/// A validated multipartite density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Quantum("density matrix is not square".into()));
        }
        check_dims(&dims, matrix.nrows())?;
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Quantum(
                "density matrix has non-finite entries".into(),
            ));
        }
        let herm = hermiticity_defect(&matrix);
        if herm > STATE_TOL {
            return Err(Error::Quantum(format!(
                "density matrix is not Hermitian (defect {herm:e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(Error::Quantum(format!("density matrix has trace {trace}")));
        }
        let min = hermitian_eigenvalues(&matrix)[0];
        if min < -STATE_EIG_TOL {
            return Err(Error::Quantum(format!(
                "density matrix has eigenvalue {min:e}"
            )));
        }
        Ok(DensityMatrix { dims, matrix })
    }

    /// `|ψ⟩⟨ψ|` for a nonzero vector, normalized first.
    pub fn pure(dims: Vec<usize>, psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Quantum(
                "state vector has zero or non-finite norm".into(),
            ));
        }
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|z| z / norm));
        DensityMatrix::new(dims, &v * v.adjoint())
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d = dims.iter().product::<usize>();
        DensityMatrix::new(dims, identity(d) / c(d as f64))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(dims: Vec<usize>, index: usize) -> Result<Self> {
        let d = dims.iter().product::<usize>();
        if index >= d {
            return Err(Error::Index(format!(
                "basis index {index} out of range for dimension {d}"
            )));
        }
        let mut psi = vec![c(0.0); d];
        psi[index] = c(1.0);
        DensityMatrix::pure(dims, &psi)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// `p·self + (1-p)·other`.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::Quantum(
                "cannot mix states of different dimensions".into(),
            ));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "mixing weight {p} outside [0, 1]"
            )));
        }
        DensityMatrix::new(
            self.dims.clone(),
            &self.matrix * c(p) + &other.matrix * c(1.0 - p),
        )
    }
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn phi_plus() -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::pure(vec![2, 2], &[c(h), c(0.0), c(0.0), c(h)]).expect("static state")
}

/// `p·Φ⁺ + (1-p)·I/4`.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    phi_plus().mix(&DensityMatrix::maximally_mixed(vec![2, 2])?, p)
}

/// `2^{-n/2} Σ_x (-1)^{Γ(x)} |x⟩`, which is local-unitarily a GHZ state and
/// reaches `2^{n-1}` on the MABK functional with `Z` for setting 0 and `X`
/// for setting 1.
pub fn ghz_graph_state(n: usize) -> Result<DensityMatrix> {
    if n == 0 || n > 10 {
        return Err(Error::InvalidArgument(format!(
            "GHZ state needs 1..=10 qubits, got {n}"
        )));
    }
    let d = 1usize << n;
    let psi: Vec<C64> = (0..d)
        .map(|x| {
            let bits: Vec<usize> = (0..n).map(|k| (x >> (n - 1 - k)) & 1).collect();
            c(if gamma(&bits) % 2 == 0 { 1.0 } else { -1.0 })
        })
        .collect();
    DensityMatrix::pure(vec![2; n], &psi)
}

/// Per-party, per-setting lists of POVM elements.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementAssemblage {
    parties: Vec<Vec<Vec<CMatrix>>>,
}

impl MeasurementAssemblage {
    /// Checks positivity and completeness of every setting.
    pub fn new(parties: Vec<Vec<Vec<CMatrix>>>) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::Quantum("assemblage has no parties".into()));
        }
        for (i, settings) in parties.iter().enumerate() {
            if settings.is_empty() {
                return Err(Error::Quantum(format!("party {i} has no settings")));
            }
            let d = settings[0].first().map_or(0, |op| op.nrows());
            if d == 0 {
                return Err(Error::Quantum(format!(
                    "party {i} setting 0 has no outcomes"
                )));
            }
            for (m, ops) in settings.iter().enumerate() {
                if ops.is_empty() {
                    return Err(Error::Quantum(format!(
                        "party {i} setting {m} has no outcomes"
                    )));
                }
                let mut sum = CMatrix::zeros(d, d);
                for (a, op) in ops.iter().enumerate() {
                    if op.nrows() != d || op.ncols() != d {
                        return Err(Error::Quantum(format!(
                            "party {i} setting {m} outcome {a} is not {d}x{d}"
                        )));
                    }
                    if hermiticity_defect(op) > POVM_TOL {
                        return Err(Error::Quantum(format!(
                            "party {i} setting {m} outcome {a} is not Hermitian"
                        )));
                    }
                    let min = hermitian_eigenvalues(op)[0];
                    if min < -POVM_TOL {
                        return Err(Error::Quantum(format!(
                            "party {i} setting {m} outcome {a} has eigenvalue {min:e}"
                        )));
                    }
                    sum += op;
                }
                let defect = (sum - identity(d))
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                if defect > POVM_TOL {
                    return Err(Error::Quantum(format!(
                        "party {i} setting {m} does not sum to the identity (defect {defect:e})"
                    )));
                }
            }
        }
        Ok(MeasurementAssemblage { parties })
    }

    /// Two-outcome projective measurements `(I ± O)/2` from `±1`-valued
    /// observables; outcome 0 is the `+1` eigenspace.
    pub fn from_observables(observables: Vec<Vec<CMatrix>>) -> Result<Self> {
        let parties = observables
            .into_iter()
            .map(|settings| {
                settings
                    .into_iter()
                    .map(|o| {
                        let id = identity(o.nrows());
                        vec![(&id + &o) * c(0.5), (&id - &o) * c(0.5)]
                    })
                    .collect()
            })
            .collect();
        MeasurementAssemblage::new(parties)
    }

    /// `A₀ = Z, A₁ = X, B₀ = (Z+X)/√2, B₁ = (Z-X)/√2`.
    pub fn chsh_optimal() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (x, z) = (pauli_x(), pauli_z());
        MeasurementAssemblage::from_observables(vec![
            vec![z.clone(), x.clone()],
            vec![(&z + &x) * c(h), (&z - &x) * c(h)],
        ])
        .expect("static assemblage")
    }

    /// `Z` for setting 0 and `X` for setting 1 on each of `n` qubits.
    pub fn mabk_optimal(n: usize) -> Result<Self> {
        MeasurementAssemblage::from_observables(vec![vec![pauli_z(), pauli_x()]; n])
    }

    pub fn parties(&self) -> usize {
        self.parties.len()
    }

    /// Local Hilbert-space dimension of each party.
    pub fn dims(&self) -> Vec<usize> {
        self.parties.iter().map(|s| s[0][0].nrows()).collect()
    }

    pub fn operator(&self, party: usize, setting: usize, outcome: usize) -> &CMatrix {
        &self.parties[party][setting][outcome]
    }

    /// The scenario whose shape this assemblage measures.
    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::new(
            self.parties.iter().map(Vec::len).collect(),
            self.parties
                .iter()
                .map(|s| s.iter().map(Vec::len).collect())
                .collect(),
        )
    }
}

/// `p(a|m) = Tr(ρ ⊗_i Π_{a_i|m_i})`.
pub fn behavior_from_quantum(
    rho: &DensityMatrix,
    assemblage: &MeasurementAssemblage,
    scenario: &Scenario,
) -> Result<Behavior> {
    if rho.dims() != assemblage.dims().as_slice() {
        return Err(Error::Quantum(format!(
            "state has party dimensions {:?}, assemblage {:?}",
            rho.dims(),
            assemblage.dims()
        )));
    }
    if &assemblage.scenario()? != scenario {
        return Err(Error::ScenarioMismatch(
            "assemblage shape does not match the scenario".into(),
        ));
    }
    let dims = rho.dims();
    let d = rho.dim();
    // digits of every basis index, party 0 most significant
    let digits: Vec<Vec<usize>> = (0..d)
        .map(|mut x| {
            let mut out = vec![0; dims.len()];
            for k in (0..dims.len()).rev() {
                out[k] = x % dims[k];
                x /= dims[k];
            }
            out
        })
        .collect();
    let r = rho.matrix();

    let tau = scenario.joint_settings();
    let blocks: Vec<Vec<f64>> = (0..tau)
        .into_par_iter()
        .map(|s| {
            let m = scenario.setting_tuple(s);
            (0..scenario.outcome_count(s))
                .map(|j| {
                    let a = scenario.outcome_tuple(s, j);
                    let ops: Vec<&CMatrix> = (0..dims.len())
                        .map(|k| assemblage.operator(k, m[k], a[k]))
                        .collect();
                    // Tr(ρ K) = Σ_{r,c} ρ[r,c] K[c,r] with K a tensor product
                    let mut total = C64::new(0.0, 0.0);
                    for (row, dr) in digits.iter().enumerate() {
                        for (col, dc) in digits.iter().enumerate() {
                            let rv = r[(row, col)];
                            if rv == C64::new(0.0, 0.0) {
                                continue;
                            }
                            let mut k = C64::new(1.0, 0.0);
                            for (p, op) in ops.iter().enumerate() {
                                k *= op[(dc[p], dr[p])];
                                if k == C64::new(0.0, 0.0) {
                                    break;
                                }
                            }
                            total += rv * k;
                        }
                    }
                    total.re
                })
                .collect()
        })
        .collect();
    let behavior = Behavior::new(scenario.clone(), blocks.concat())?;
    if let Some(v) = behavior.validate().first() {
        return Err(Error::InvalidBehavior(v.to_string()));
    }
    Ok(behavior)
}

/// Closed form `p(a|m) = (1 + ½(1 - (-1)^{Σm}) (-1)^{Σa + Γ(m)}) / 2^n` of
/// the GHZ behavior that maximally violates MABK.
pub fn ghz_mabk_behavior(n: usize) -> Result<Behavior> {
    if n % 2 == 0 || n > 9 {
        return Err(Error::InvalidArgument(format!(
            "GHZ behavior needs odd n <= 9, got {n}"
        )));
    }
    let scenario = Scenario::homogeneous(n, 2, 2)?;
    let norm = (1u64 << n) as f64;
    Behavior::from_fn(scenario, |m, a| {
        let sm: usize = m.iter().sum();
        if sm % 2 == 0 {
            return 1.0 / norm;
        }
        let sign = if (a.iter().sum::<usize>() + gamma(m)) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        (1.0 + sign) / norm
    })
}

/// Wootters concurrence of a two-qubit state.
pub fn wootters_concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dims() != [2, 2] {
        return Err(Error::Quantum(format!(
            "concurrence needs a two-qubit state, got dimensions {:?}",
            rho.dims()
        )));
    }
    // √ρ ρ̃ √ρ = A A† with A = √ρ (σy⊗σy) √ρ*, so the λ are singular values
    // of A; this avoids square roots of rounding noise for pure states
    let yy = pauli_y().kronecker(&pauli_y());
    let s = psd_sqrt(rho.matrix());
    let a = &s * yy * s.map(|z| z.conj());
    let mut lambda: Vec<f64> = a.singular_values().iter().copied().collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0))
}

fn same_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Quantum(format!(
            "states have dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(())
}

/// `Tr √(√σ ρ √σ)`.
pub fn state_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dims(rho, sigma)?;
    let s = psd_sqrt(sigma.matrix());
    let inner = &s * rho.matrix() * &s;
    let inner = (&inner + inner.adjoint()) * c(0.5);
    let f: f64 = hermitian_eigenvalues(&inner)
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .sum();
    Ok(f.clamp(0.0, 1.0))
}

/// `½ Tr |ρ - σ|`.
pub fn state_trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dims(rho, sigma)?;
    let diff = rho.matrix() - sigma.matrix();
    let t: f64 = hermitian_eigenvalues(&diff).iter().map(|v| v.abs()).sum();
    Ok((0.5 * t).clamp(0.0, 1.0))
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Random mixed state `G G† / Tr(G G†)` with a square Ginibre matrix `G`.
pub fn random_state<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Result<DensityMatrix> {
    let d = dims.iter().product::<usize>();
    let g = ginibre(d, d, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let m = m / c(tr);
    DensityMatrix::new(dims, (&m + m.adjoint()) * c(0.5))
}

/// Random POVM `S^{-1/2} G_a G_a† S^{-1/2}` with `S = Σ_a G_a G_a†`.
pub fn random_povm<R: Rng + ?Sized>(d: usize, outcomes: usize, rng: &mut R) -> Vec<CMatrix> {
    let raw: Vec<CMatrix> = (0..outcomes)
        .map(|_| {
            let g = ginibre(d, d, rng);
            &g * g.adjoint()
        })
        .collect();
    let sum = raw.iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m);
    let eig = sum.symmetric_eigen();
    let mut inv_sqrt = eig.eigenvectors.clone();
    for j in 0..d {
        let s = 1.0 / eig.eigenvalues[j].sqrt();
        for i in 0..d {
            inv_sqrt[(i, j)] *= s;
        }
    }
    let inv_sqrt = &inv_sqrt * eig.eigenvectors.adjoint();
    raw.iter()
        .map(|m| {
            let op = &inv_sqrt * m * &inv_sqrt;
            (&op + op.adjoint()) * c(0.5)
        })
        .collect()
}

type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize)]
struct QuantumFile {
    dims: Vec<usize>,
    state: JsonMatrix,
    /// party → setting → outcome → operator
    measurements: Vec<Vec<Vec<JsonMatrix>>>,
}

fn matrix_from_json(m: &JsonMatrix, what: &str) -> Result<CMatrix> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::Format(format!("{what} is not a square matrix")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        C64::new(m[i][j][0], m[i][j][1])
    }))
}

fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// A state together with the measurements applied to it.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumSetup {
    pub state: DensityMatrix,
    pub assemblage: MeasurementAssemblage,
}

impl QuantumSetup {
    pub fn behavior(&self) -> Result<Behavior> {
        behavior_from_quantum(&self.state, &self.assemblage, &self.assemblage.scenario()?)
    }
}

pub fn quantum_from_json(text: &str) -> Result<QuantumSetup> {
    let file: QuantumFile = serde_json::from_str(text)?;
    let state = DensityMatrix::new(file.dims, matrix_from_json(&file.state, "state")?)?;
    let parties = file
        .measurements
        .iter()
        .enumerate()
        .map(|(i, settings)| {
            settings
                .iter()
                .enumerate()
                .map(|(m, ops)| {
                    ops.iter()
                        .enumerate()
                        .map(|(a, op)| matrix_from_json(op, &format!("operator ({i}, {m}, {a})")))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let assemblage = MeasurementAssemblage::new(parties)?;
    if state.dims() != assemblage.dims().as_slice() {
        return Err(Error::Quantum(format!(
            "state has party dimensions {:?}, measurements act on {:?}",
            state.dims(),
            assemblage.dims()
        )));
    }
    Ok(QuantumSetup { state, assemblage })
}

pub fn quantum_to_json(setup: &QuantumSetup) -> Result<String> {
    let file = QuantumFile {
        dims: setup.state.dims().to_vec(),
        state: matrix_to_json(setup.state.matrix()),
        measurements: setup
            .assemblage
            .parties
            .iter()
            .map(|s| {
                s.iter()
                    .map(|ops| ops.iter().map(matrix_to_json).collect())
                    .collect()
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn load_quantum(path: impl AsRef<Path>) -> Result<QuantumSetup> {
    quantum_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_quantum(setup: &QuantumSetup, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, quantum_to_json(setup)?)?;
    Ok(())
}
