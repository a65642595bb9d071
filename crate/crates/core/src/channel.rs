//! Reference simulator of the literal measurement circuits.
//!
//! Three views of the same circuit family, all dense and small:
//!
//! * density-matrix evolution of the live register (ancilla, physical qubit,
//!   bond qubits) with a reset-to-zero Kraus channel on the physical qubit
//!   after every block;
//! * the equivalent pure-state circuit, where each reset is replaced by a
//!   SWAP into a fresh redundant qubit;
//! * Hadamard tests built on either, optionally sampled with a finite number
//!   of shots.
//!
//! Live register layout: qubit 0 is the ancilla, qubit 1 the physical qubit,
//! qubits `2..2 + n_virtual` the bond register.
//!
//! For imaginary parts the ancilla gets `S^dagger = diag(1, -i)` right after
//! its first Hadamard, which makes `P(anc=0) - P(anc=1) = Im <u|v>` for the
//! anc-0 branch `u` and anc-1 branch `v`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::circuit::{apply_gate, AnsatzSpec, ParamVector};
use crate::error::{Error, Result};
use crate::guard;
use crate::pauli::{CMatrix, PauliAxis, PauliString, C64};
use crate::statevec::{self, Gate1};

const ANC: usize = 0;
const PHYS: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Part {
    Real,
    Imaginary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotPlan {
    pub shots: u64,
    pub seed: u64,
}

impl ShotPlan {
    pub fn new(shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::invalid("a shot plan needs at least one shot"));
        }
        Ok(ShotPlan { shots, seed })
    }

    /// Derived plan for an independent sub-measurement.
    pub fn fork(&self, stream: u64) -> ShotPlan {
        // splitmix64 finalizer
        let mut z = self.seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        ShotPlan {
            shots: self.shots,
            seed: z ^ (z >> 31),
        }
    }
}

/// `rho` over `n_qubits` stored row-major as a `2n`-qubit vector: ket qubits
/// first, then bra qubits. Gates act as `U` on ket indices and `conj(U)` on
/// bra indices.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    /// `|0...0><0...0|`.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        guard::check(n_qubits, guard::channel_limit())?;
        let mut data = vec![C64::new(0.0, 0.0); 1 << (2 * n_qubits)];
        data[0] = C64::new(1.0, 0.0);
        Ok(DensityMatrix { n_qubits, data })
    }

    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        let dim = m.nrows();
        if dim == 0 || m.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::dims(
                "density matrix must be square with power-of-two size",
            ));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        guard::check(n_qubits, guard::channel_limit())?;
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(m[(i, j)]);
            }
        }
        Ok(DensityMatrix { n_qubits, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn to_matrix(&self) -> CMatrix {
        let dim = self.dim();
        CMatrix::from_fn(dim, dim, |i, j| self.data[i * dim + j])
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::IndexOutOfRange {
                index: q,
                limit: self.n_qubits,
            });
        }
        Ok(())
    }

    pub fn apply_1q(&mut self, q: usize, g: &Gate1) {
        let n2 = 2 * self.n_qubits;
        statevec::apply_1q(&mut self.data, n2, q, g);
        statevec::apply_1q(
            &mut self.data,
            n2,
            self.n_qubits + q,
            &statevec::conj_gate(g),
        );
    }

    pub fn apply_controlled_1q(&mut self, control: usize, value: bool, target: usize, g: &Gate1) {
        let (n, n2) = (self.n_qubits, 2 * self.n_qubits);
        statevec::apply_controlled_1q(&mut self.data, n2, control, value, target, g);
        statevec::apply_controlled_1q(
            &mut self.data,
            n2,
            n + control,
            value,
            n + target,
            &statevec::conj_gate(g),
        );
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let (n, n2) = (self.n_qubits, 2 * self.n_qubits);
        statevec::apply_cnot(&mut self.data, n2, control, target);
        statevec::apply_cnot(&mut self.data, n2, n + control, n + target);
    }

    /// Reset-to-zero channel `rho -> M0 rho M0^dag + M1 rho M1^dag` with
    /// `M0 = |0><0|`, `M1 = |0><1|` on `qubit`.
    pub fn reset(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let dim = self.dim();
        let b = 1usize << (self.n_qubits - 1 - qubit);
        let old = std::mem::replace(&mut self.data, vec![C64::new(0.0, 0.0); dim * dim]);
        for i in (0..dim).filter(|i| i & b == 0) {
            for j in (0..dim).filter(|j| j & b == 0) {
                self.data[i * dim + j] = old[i * dim + j] + old[(i | b) * dim + (j | b)];
            }
        }
        Ok(())
    }

    pub fn trace(&self) -> C64 {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i]).sum()
    }

    /// Probability that `qubit` reads 0.
    pub fn prob_zero(&self, qubit: usize) -> f64 {
        let dim = self.dim();
        let b = 1usize << (self.n_qubits - 1 - qubit);
        (0..dim)
            .filter(|i| i & b == 0)
            .map(|i| self.data[i * dim + i].re)
            .sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let m = self.to_matrix();
        (&m - m.adjoint()).camax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.to_matrix();
        let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigen().eigenvalues.min()
    }

    /// Reduced state of `qubit` as a 2x2 matrix.
    pub fn reduced_qubit(&self, qubit: usize) -> CMatrix {
        let dim = self.dim();
        let b = 1usize << (self.n_qubits - 1 - qubit);
        let mut r = CMatrix::zeros(2, 2);
        for i in 0..dim {
            for j in 0..dim {
                if (i & !b) == (j & !b) {
                    let (x, y) = (usize::from(i & b != 0), usize::from(j & b != 0));
                    r[(x, y)] += self.data[i * dim + j];
                }
            }
        }
        r
    }
}

pub fn apply_reset(rho: &DensityMatrix, qubit: usize) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    out.reset(qubit)?;
    Ok(out)
}

/// What one ancilla branch of a Hadamard test carries on top of the ansatz.
#[derive(Clone, Copy, Debug, Default)]
pub struct Branch<'a> {
    /// Generator inserted after this parameter's rotation.
    pub insertion: Option<usize>,
    /// Pauli string applied factor by factor right after each block.
    pub string: Option<&'a PauliString>,
}

fn check_string(spec: &AnsatzSpec, p: Option<&PauliString>) -> Result<()> {
    if let Some(p) = p {
        if p.n_qubits() != spec.n_blocks() {
            return Err(Error::dims(format!(
                "{}-qubit Pauli string for {} blocks",
                p.n_qubits(),
                spec.n_blocks()
            )));
        }
    }
    Ok(())
}

/// Exact `P(anc=0) - P(anc=1)` of the reset-channel Hadamard test with
/// anc-0 branch `u` and anc-1 branch `v`; this equals `Re <u|v>` or
/// `Im <u|v>` of the traced-out bond states.
pub fn hadamard_test_value(
    spec: &AnsatzSpec,
    params: &ParamVector,
    u: Branch<'_>,
    v: Branch<'_>,
    part: Part,
) -> Result<f64> {
    spec.check_params(params)?;
    check_string(spec, u.string)?;
    check_string(spec, v.string)?;
    let sites = [u, v]
        .iter()
        .map(|b| b.insertion.map(|i| spec.resolve_param(i)).transpose())
        .collect::<Result<Vec<_>>>()?;

    let m = 2 + spec.n_virtual();
    let mut rho = DensityMatrix::zero_state(m)?;
    rho.apply_1q(ANC, &statevec::hadamard());
    if part == Part::Imaginary {
        rho.apply_1q(ANC, &statevec::s_dagger());
    }
    let line = |q: usize| PHYS + q;
    for block in 0..spec.n_blocks() {
        for (pos, gate) in spec.program(block)?.iter().enumerate() {
            apply_channel_gate(&mut rho, gate, params, line);
            for (branch, site) in sites.iter().enumerate() {
                if let Some(site) = site {
                    if site.block == block && site.position == pos {
                        rho.apply_controlled_1q(
                            ANC,
                            branch == 1,
                            line(site.qubit),
                            &site.generator.matrix(),
                        );
                    }
                }
            }
        }
        for (branch, b) in [u, v].iter().enumerate() {
            if let Some(p) = b.string {
                let axis = p.axis(block);
                if axis != PauliAxis::I {
                    rho.apply_controlled_1q(ANC, branch == 1, PHYS, &axis.matrix());
                }
            }
        }
        rho.reset(PHYS)?;
    }
    rho.apply_1q(ANC, &statevec::hadamard());
    Ok(2.0 * rho.prob_zero(ANC) - 1.0)
}

fn apply_channel_gate(
    rho: &mut DensityMatrix,
    gate: &crate::circuit::GateSpec,
    params: &ParamVector,
    line: impl Fn(usize) -> usize,
) {
    use crate::circuit::{rotation, GateSpec};
    match *gate {
        GateSpec::Rotation { axis, qubit, param } => {
            rho.apply_1q(line(qubit), &rotation(axis, params[param]))
        }
        GateSpec::Cnot { control, target } => rho.apply_cnot(line(control), line(target)),
    }
}

/// Frequency estimate of `P(0) - P(1)` for an ancilla with exact value `exact`.
pub fn sample_ancilla(exact: f64, plan: &ShotPlan) -> f64 {
    let p0 = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let n0 = Binomial::new(plan.shots, p0)
        .expect("p0 is a probability")
        .sample(&mut rng);
    (2.0 * n0 as f64 - plan.shots as f64) / plan.shots as f64
}

/// Re or Im of `<psi|P|psi>` from a Hadamard test with controlled-`P_i`
/// inserted after block `i`, before its reset.
pub fn hadamard_test_expectation(
    spec: &AnsatzSpec,
    params: &ParamVector,
    p: &PauliString,
    part: Part,
    shots: Option<&ShotPlan>,
) -> Result<f64> {
    let exact = hadamard_test_value(
        spec,
        params,
        Branch::default(),
        Branch {
            insertion: None,
            string: Some(p),
        },
        part,
    )?;
    Ok(match shots {
        Some(plan) => sample_ancilla(exact, plan),
        None => exact,
    })
}

#[derive(Clone, Copy, Debug)]
pub enum OverlapTarget<'a> {
    /// `<xi_i|xi_j>`
    Param(usize),
    /// `<xi_i|P|psi>`
    String(&'a PauliString),
}

/// Re or Im of `<xi_i|xi_j>` or `<xi_i|P|psi>` from the VarQITE measurement
/// circuits. `C-Q_i` (or the controlled string) sits on the anc-1 branch.
pub fn varqite_test_overlaps(
    spec: &AnsatzSpec,
    params: &ParamVector,
    i: usize,
    target: OverlapTarget<'_>,
    part: Part,
    shots: Option<&ShotPlan>,
) -> Result<f64> {
    let xi_i = Branch {
        insertion: Some(i),
        string: None,
    };
    let (value, conjugate) = match target {
        OverlapTarget::Param(j) => {
            // anc-0 carries xi_j, anc-1 xi_i: the test reads <xi_j|xi_i>
            let xi_j = Branch {
                insertion: Some(j),
                string: None,
            };
            (hadamard_test_value(spec, params, xi_j, xi_i, part)?, true)
        }
        OverlapTarget::String(p) => {
            let pc = Branch {
                insertion: None,
                string: Some(p),
            };
            (hadamard_test_value(spec, params, xi_i, pc, part)?, false)
        }
    };
    let value = match shots {
        Some(plan) => sample_ancilla(value, plan),
        None => value,
    };
    Ok(if conjugate && part == Part::Imaginary {
        -value
    } else {
        value
    })
}

/// Outcome distribution `P(anc, red)` of the equivalent pure circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    pub n_redundant: usize,
    /// `probs[anc][f]`, `f` read with redundant qubit 0 most significant.
    pub probs: [Vec<f64>; 2],
}

impl JointTable {
    pub fn total(&self) -> f64 {
        self.probs[0].iter().chain(&self.probs[1]).sum()
    }

    /// `sum_f P(0,f) - P(1,f)`: the reset-channel value.
    pub fn marginal_value(&self) -> f64 {
        self.probs[0]
            .iter()
            .zip(&self.probs[1])
            .map(|(a, b)| a - b)
            .sum()
    }

    /// `P(0, red=0) - P(1, red=0)`.
    pub fn conditioned_value(&self) -> f64 {
        self.probs[0][0] - self.probs[1][0]
    }
}

/// Amplitudes of the equivalent pure circuit just before the final ancilla
/// Hadamard, split by ancilla value. Each branch is over (physical, bond,
/// redundant) qubits in that order and carries a `1/sqrt(2)` factor.
pub fn equivalent_pure_branches(
    spec: &AnsatzSpec,
    params: &ParamVector,
    p: &PauliString,
    part: Part,
) -> Result<[Vec<C64>; 2]> {
    let state = run_equivalent_pure(spec, params, p, part, false)?;
    let half = state.len() / 2;
    Ok([state[..half].to_vec(), state[half..].to_vec()])
}

fn run_equivalent_pure(
    spec: &AnsatzSpec,
    params: &ParamVector,
    p: &PauliString,
    part: Part,
    final_hadamard: bool,
) -> Result<Vec<C64>> {
    spec.check_params(params)?;
    check_string(spec, Some(p))?;
    let n_red = spec.n_blocks() - 1;
    let red0 = 2 + spec.n_virtual();
    let n = red0 + n_red;
    guard::check(n, guard::dense_limit())?;

    let mut psi = vec![C64::new(0.0, 0.0); 1 << n];
    psi[0] = C64::new(1.0, 0.0);
    statevec::apply_1q(&mut psi, n, ANC, &statevec::hadamard());
    if part == Part::Imaginary {
        statevec::apply_1q(&mut psi, n, ANC, &statevec::s_dagger());
    }
    for block in 0..spec.n_blocks() {
        for gate in spec.program(block)? {
            apply_gate(&mut psi, n, gate, params, |q| PHYS + q);
        }
        let axis = p.axis(block);
        if axis != PauliAxis::I {
            statevec::apply_controlled_1q(&mut psi, n, ANC, true, PHYS, &axis.matrix());
        }
        if block < n_red {
            statevec::apply_swap(&mut psi, n, PHYS, red0 + block);
        }
    }
    if final_hadamard {
        statevec::apply_1q(&mut psi, n, ANC, &statevec::hadamard());
    }
    Ok(psi)
}

/// Joint ancilla / redundant-register probabilities of the pure-state
/// Hadamard test for `<psi|P|psi>`.
pub fn simulate_equivalent_pure(
    spec: &AnsatzSpec,
    params: &ParamVector,
    p: &PauliString,
    part: Part,
) -> Result<JointTable> {
    let psi = run_equivalent_pure(spec, params, p, part, true)?;
    let n_red = spec.n_blocks() - 1;
    let n = 2 + spec.n_virtual() + n_red;
    let red_mask = (1usize << n_red) - 1;
    let mut probs = [vec![0.0; 1 << n_red], vec![0.0; 1 << n_red]];
    for (idx, amp) in psi.iter().enumerate() {
        let anc = (idx >> (n - 1)) & 1;
        probs[anc][idx & red_mask] += amp.norm_sqr();
    }
    Ok(JointTable {
        n_redundant: n_red,
        probs,
    })
}

/// The ansatz as a plain pure state on `n_blocks` physical qubits followed by
/// the bond register, built gate by gate. Block `i` acts on physical qubit
/// `i` and the shared bond qubits.
pub fn pure_ansatz_state(spec: &AnsatzSpec, params: &ParamVector) -> Result<Vec<C64>> {
    spec.check_params(params)?;
    let nb = spec.n_blocks();
    let n = nb + spec.n_virtual();
    guard::check(n, guard::dense_limit())?;
    let mut psi = vec![C64::new(0.0, 0.0); 1 << n];
    psi[0] = C64::new(1.0, 0.0);
    for block in 0..nb {
        let line = |q: usize| if q == 0 { block } else { nb + q - 1 };
        for gate in spec.program(block)? {
            apply_gate(&mut psi, n, gate, params, line);
        }
    }
    Ok(psi)
}

/// Live-register state (physical + bond) after the whole reset circuit,
/// without any ancilla.
pub fn ansatz_density(spec: &AnsatzSpec, params: &ParamVector) -> Result<DensityMatrix> {
    spec.check_params(params)?;
    let m = 1 + spec.n_virtual();
    let mut rho = DensityMatrix::zero_state(m)?;
    for block in 0..spec.n_blocks() {
        if block > 0 {
            rho.reset(0)?;
        }
        for gate in spec.program(block)? {
            apply_channel_gate(&mut rho, gate, params, |q| q);
        }
    }
    Ok(rho)
}

/// Dense Gram check helper: `min eig` of a Hermitian matrix.
pub fn min_hermitian_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    herm.symmetric_eigen().eigenvalues.min()
}
