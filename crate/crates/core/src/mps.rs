//! Exact MPS evaluation of the ansatz.
//!
//! Block `i` with the physical input fixed to `|0>` is the component tensor
//! `T[s, a, b] = <s, a| U_i |0, b>`: an isometry from the incoming bond `b` to
//! (physical output `s`, outgoing bond `a`). The state starts from the bond
//! register in `|0...0>`; the final outgoing bond is left open and traced,
//! so every quantity here is an expectation of `H (x) Id_bond`.
//!
//! Contractions run left to right on a `D x D` "density" environment
//! `rho' = sum_{s,s'} P[s,s'] T_ket[s'] rho T_bra[s]^dagger`. Without an
//! operator this is exactly the reset channel acting on the bond register.
//! No truncation happens anywhere.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::circuit::{block_unitary, block_unitary_with_insertion, AnsatzSpec, ParamVector};
use crate::error::{Error, Result};
use crate::pauli::{CMatrix, PauliAxis, PauliString, PauliSum, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// `T[s]` as `D x D` matrices indexed `(outgoing, incoming)` for `s = 0, 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentTensor {
    slices: [CMatrix; 2],
}

impl ComponentTensor {
    /// Extracts the tensor from a `2D x 2D` block unitary (physical line most
    /// significant) by fixing the physical input to `|0>`.
    pub fn from_block_unitary(u: &CMatrix) -> Result<Self> {
        let two_d = u.nrows();
        if u.ncols() != two_d || two_d < 2 || two_d % 2 != 0 {
            return Err(Error::dims("block unitary must be square with even size"));
        }
        let d = two_d / 2;
        let slice = |s: usize| CMatrix::from_fn(d, d, |a, b| u[(s * d + a, b)]);
        Ok(ComponentTensor {
            slices: [slice(0), slice(1)],
        })
    }

    pub fn from_slices(s0: CMatrix, s1: CMatrix) -> Result<Self> {
        if s0.shape() != s1.shape() || s0.nrows() != s0.ncols() {
            return Err(Error::dims("tensor slices must be equal square matrices"));
        }
        Ok(ComponentTensor { slices: [s0, s1] })
    }

    pub fn bond_dim(&self) -> usize {
        self.slices[0].nrows()
    }

    /// `T[s, a, b]`.
    pub fn get(&self, s: usize, a: usize, b: usize) -> C64 {
        self.slices[s][(a, b)]
    }

    pub fn slice(&self, s: usize) -> &CMatrix {
        &self.slices[s]
    }

    pub(crate) fn slice_mut(&mut self, s: usize) -> &mut CMatrix {
        &mut self.slices[s]
    }

    /// `max |sum_{s,a} conj(T[s,a,b]) T[s,a,b'] - delta(b,b')|`.
    pub fn isometry_residual(&self) -> f64 {
        let d = self.bond_dim();
        let gram =
            self.slices[0].adjoint() * &self.slices[0] + self.slices[1].adjoint() * &self.slices[1];
        (gram - CMatrix::identity(d, d)).camax()
    }
}

/// Anything that looks like a chain of component tensors.
pub trait MpsChain {
    fn n_sites(&self) -> usize;
    fn bond_dim(&self) -> usize;
    fn site(&self, i: usize) -> &ComponentTensor;
}

#[derive(Clone, Debug, PartialEq)]
pub struct QcmpsState {
    tensors: Vec<ComponentTensor>,
}

impl QcmpsState {
    pub fn new(tensors: Vec<ComponentTensor>) -> Result<Self> {
        let d = tensors
            .first()
            .ok_or_else(|| Error::invalid("a state needs at least one tensor"))?
            .bond_dim();
        if tensors.iter().any(|t| t.bond_dim() != d) {
            return Err(Error::dims("all tensors must share one bond dimension"));
        }
        Ok(QcmpsState { tensors })
    }

    pub fn tensors(&self) -> &[ComponentTensor] {
        &self.tensors
    }

    pub(crate) fn tensors_mut(&mut self) -> &mut [ComponentTensor] {
        &mut self.tensors
    }

    /// Dense amplitudes over (physical qubits 0..N, then bond qubits), qubit 0
    /// most significant. Exponential in `N`; intended for oracles.
    pub fn to_statevector(&self) -> Vec<C64> {
        chain_statevector(self)
    }
}

impl MpsChain for QcmpsState {
    fn n_sites(&self) -> usize {
        self.tensors.len()
    }
    fn bond_dim(&self) -> usize {
        self.tensors[0].bond_dim()
    }
    fn site(&self, i: usize) -> &ComponentTensor {
        &self.tensors[i]
    }
}

/// The ansatz state with a generator Pauli inserted after one rotation.
/// Carries no `-i/2` prefactor.
#[derive(Clone, Debug)]
pub struct XiState {
    base: Arc<QcmpsState>,
    block: usize,
    param: usize,
    tensor: ComponentTensor,
}

impl XiState {
    pub fn from_base(
        base: Arc<QcmpsState>,
        spec: &AnsatzSpec,
        params: &ParamVector,
        param: usize,
    ) -> Result<Self> {
        let site = spec.resolve_param(param)?;
        if base.n_sites() != spec.n_blocks() || base.bond_dim() != spec.bond_dim() {
            return Err(Error::dims("base state does not match the ansatz"));
        }
        let u = block_unitary_with_insertion(spec, site.block, params, &site)?;
        Ok(XiState {
            base,
            block: site.block,
            param,
            tensor: ComponentTensor::from_block_unitary(&u)?,
        })
    }

    pub fn replaced_block(&self) -> usize {
        self.block
    }

    pub fn param(&self) -> usize {
        self.param
    }

    pub fn replaced_tensor(&self) -> &ComponentTensor {
        &self.tensor
    }

    pub fn base(&self) -> &QcmpsState {
        &self.base
    }

    pub fn to_statevector(&self) -> Vec<C64> {
        chain_statevector(self)
    }
}

impl MpsChain for XiState {
    fn n_sites(&self) -> usize {
        self.base.n_sites()
    }
    fn bond_dim(&self) -> usize {
        self.base.bond_dim()
    }
    fn site(&self, i: usize) -> &ComponentTensor {
        if i == self.block {
            &self.tensor
        } else {
            self.base.site(i)
        }
    }
}

fn chain_statevector<M: MpsChain + ?Sized>(m: &M) -> Vec<C64> {
    let d = m.bond_dim();
    // amplitudes indexed (prefix, bond)
    let mut v = vec![ZERO; d];
    v[0] = C64::new(1.0, 0.0);
    for i in 0..m.n_sites() {
        let t = m.site(i);
        let prefixes = v.len() / d;
        let mut next = vec![ZERO; prefixes * 2 * d];
        for p in 0..prefixes {
            for s in 0..2 {
                let sl = t.slice(s);
                for a in 0..d {
                    let mut acc = ZERO;
                    for b in 0..d {
                        acc += sl[(a, b)] * v[p * d + b];
                    }
                    next[(p * 2 + s) * d + a] = acc;
                }
            }
        }
        v = next;
    }
    v
}

pub fn tensors_from_params(spec: &AnsatzSpec, params: &ParamVector) -> Result<QcmpsState> {
    spec.check_params(params)?;
    let tensors = (0..spec.n_blocks())
        .map(|b| ComponentTensor::from_block_unitary(&block_unitary(spec, b, params)?))
        .collect::<Result<Vec<_>>>()?;
    QcmpsState::new(tensors)
}

pub fn xi_state(spec: &AnsatzSpec, params: &ParamVector, param: usize) -> Result<XiState> {
    let base = Arc::new(tensors_from_params(spec, params)?);
    XiState::from_base(base, spec, params, param)
}

fn initial_env(d: usize) -> CMatrix {
    let mut rho = CMatrix::zeros(d, d);
    rho[(0, 0)] = C64::new(1.0, 0.0);
    rho
}

/// `sum_{s,s'} P[s,s'] ket[s'] rho bra[s]^dagger`.
fn transfer(rho: &CMatrix, bra: &ComponentTensor, ket: &ComponentTensor, op: PauliAxis) -> CMatrix {
    let p = op.matrix();
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for s_ket in 0..2 {
        let kr = ket.slice(s_ket) * rho;
        for (s_bra, row) in p.iter().enumerate() {
            let w = row[s_ket];
            if w != ZERO {
                out += (&kr * bra.slice(s_bra).adjoint()) * w;
            }
        }
    }
    out
}

/// Heisenberg-picture transfer, `sum P[s,s'] bra[s]^dagger r ket[s']`.
fn transfer_right(
    r: &CMatrix,
    bra: &ComponentTensor,
    ket: &ComponentTensor,
    op: PauliAxis,
) -> CMatrix {
    let p = op.matrix();
    let mut out = CMatrix::zeros(r.nrows(), r.ncols());
    for (s_bra, row) in p.iter().enumerate() {
        let br = bra.slice(s_bra).adjoint() * r;
        for (s_ket, &w) in row.iter().enumerate() {
            if w != ZERO {
                out += (&br * ket.slice(s_ket)) * w;
            }
        }
    }
    out
}

/// `<a| (insert (x) Id_bond) |b>` with the outgoing bonds contracted pairwise.
pub fn overlap<A, B>(a: &A, b: &B, insert: Option<&PauliString>) -> Result<C64>
where
    A: MpsChain + ?Sized,
    B: MpsChain + ?Sized,
{
    if a.n_sites() != b.n_sites() || a.bond_dim() != b.bond_dim() {
        return Err(Error::dims("overlap between states of different shapes"));
    }
    if let Some(p) = insert {
        if p.n_qubits() != a.n_sites() {
            return Err(Error::dims(format!(
                "{}-qubit Pauli string on a {}-site state",
                p.n_qubits(),
                a.n_sites()
            )));
        }
    }
    let mut rho = initial_env(a.bond_dim());
    for i in 0..a.n_sites() {
        let op = insert.map(|p| p.axis(i)).unwrap_or(PauliAxis::I);
        rho = transfer(&rho, a.site(i), b.site(i), op);
    }
    Ok(rho.trace())
}

pub(crate) fn maybe_par_map<T, F>(parallel: bool, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// `<psi'| H (x) Id |psi'>`. Terms are summed in their canonical order, so
/// the result does not depend on `parallel`.
pub fn expectation_with(state: &QcmpsState, h: &PauliSum, parallel: bool) -> Result<C64> {
    if h.n_qubits() != state.n_sites() {
        return Err(Error::dims(format!(
            "{}-qubit Hamiltonian on a {}-site state",
            h.n_qubits(),
            state.n_sites()
        )));
    }
    let terms = h.terms();
    let values = maybe_par_map(parallel, terms.len(), |k| {
        let (c, s) = &terms[k];
        overlap(state, state, Some(s)).map(|v| c * v)
    });
    let mut acc = ZERO;
    for v in values {
        acc += v?;
    }
    Ok(acc)
}

pub fn expectation(state: &QcmpsState, h: &PauliSum) -> Result<C64> {
    expectation_with(state, h, false)
}

/// The inserted tensors for every parameter, in parameter order.
pub fn xi_tensors(
    spec: &AnsatzSpec,
    params: &ParamVector,
    parallel: bool,
) -> Result<Vec<ComponentTensor>> {
    spec.check_params(params)?;
    maybe_par_map(parallel, spec.n_params(), |i| {
        let site = spec.resolve_param(i)?;
        ComponentTensor::from_block_unitary(&block_unitary_with_insertion(
            spec, site.block, params, &site,
        )?)
    })
    .into_iter()
    .collect()
}

fn left_envs(state: &QcmpsState) -> Vec<CMatrix> {
    let mut envs = Vec::with_capacity(state.n_sites() + 1);
    envs.push(initial_env(state.bond_dim()));
    for t in state.tensors() {
        let next = transfer(envs.last().unwrap(), t, t, PauliAxis::I);
        envs.push(next);
    }
    envs
}

/// Gram matrix `G[i][j] = <xi_i|xi_j>` of the inserted states.
///
/// Uses the right-orthogonality of the untouched tensors: everything to the
/// right of the last modified block contracts to the identity.
pub fn xi_gram(
    state: &QcmpsState,
    xis: &[ComponentTensor],
    blocks: &[usize],
    parallel: bool,
) -> Result<DMatrix<C64>> {
    let p = xis.len();
    if blocks.len() != p {
        return Err(Error::dims("one block index per inserted tensor"));
    }
    let n = state.n_sites();
    let lefts = left_envs(state);
    let tensors = state.tensors();
    // W_j = sum_s T_s^dagger X_j,s, so that <.. T | X_j ..> = Tr[W_j M]
    let w: Vec<CMatrix> = (0..p)
        .map(|j| {
            let t = &tensors[blocks[j]];
            t.slice(0).adjoint() * xis[j].slice(0) + t.slice(1).adjoint() * xis[j].slice(1)
        })
        .collect();

    let rows: Vec<Vec<C64>> = maybe_par_map(parallel, p, |i| {
        let bi = blocks[i];
        let xi = &xis[i];
        let rho = &lefts[bi];
        // env after block bi with bra = X_i, ket = T, then carried right
        let mut carried: Vec<CMatrix> = Vec::with_capacity(n - bi);
        let mut m = transfer(rho, xi, &tensors[bi], PauliAxis::I);
        for t in &tensors[bi + 1..n] {
            carried.push(m.clone());
            m = transfer(&m, t, t, PauliAxis::I);
        }
        let mut row = vec![ZERO; p];
        for j in i..p {
            let bj = blocks[j];
            row[j] = if bj == bi {
                let xj = &xis[j];
                let mut acc = ZERO;
                for s in 0..2 {
                    acc += (xi.slice(s).adjoint() * xj.slice(s) * rho).trace();
                }
                acc
            } else if bj > bi {
                (&w[j] * &carried[bj - bi - 1]).trace()
            } else {
                // parameters are ordered by block, so j > i implies bj >= bi
                unreachable!("parameter blocks must be non-decreasing")
            };
        }
        row
    });

    let mut g = DMatrix::from_element(p, p, ZERO);
    for (i, row) in rows.iter().enumerate() {
        for j in i..p {
            g[(i, j)] = row[j];
            g[(j, i)] = row[j].conj();
        }
    }
    Ok(g)
}

/// Returns `(<psi|H|psi>, [<xi_j|H|psi>]_j)`.
///
/// Builds, per block, the environment tensor `G_b = d<psi|H|psi>/d conj(T_b)`
/// from per-term left and right environments; each derivative overlap is then
/// a single Frobenius product.
pub fn energy_and_xi_overlaps(
    state: &QcmpsState,
    h: &PauliSum,
    xis: &[ComponentTensor],
    blocks: &[usize],
    parallel: bool,
) -> Result<(C64, Vec<C64>)> {
    let n = state.n_sites();
    if h.n_qubits() != n {
        return Err(Error::dims(
            "Hamiltonian and state disagree on the number of sites",
        ));
    }
    if blocks.len() != xis.len() {
        return Err(Error::dims("one block index per inserted tensor"));
    }
    let d = state.bond_dim();
    let tensors = state.tensors();
    let terms = h.terms();

    let per_term: Vec<(C64, Vec<[CMatrix; 2]>)> = maybe_par_map(parallel, terms.len(), |k| {
        let (c, s) = &terms[k];
        let axes = s.axes();
        let mut lefts = Vec::with_capacity(n + 1);
        lefts.push(initial_env(d));
        for (i, t) in tensors.iter().enumerate() {
            let next = transfer(lefts.last().unwrap(), t, t, axes[i]);
            lefts.push(next);
        }
        let mut rights = vec![CMatrix::identity(d, d); n + 1];
        for i in (0..n).rev() {
            rights[i] = transfer_right(&rights[i + 1], &tensors[i], &tensors[i], axes[i]);
        }
        let envs = (0..n)
            .map(|b| {
                let pm = axes[b].matrix();
                let t = &tensors[b];
                let mut g = [CMatrix::zeros(d, d), CMatrix::zeros(d, d)];
                for s_ket in 0..2 {
                    let core = &rights[b + 1] * t.slice(s_ket) * &lefts[b];
                    for (s_bra, row) in pm.iter().enumerate() {
                        let w = row[s_ket];
                        if w != ZERO {
                            g[s_bra] += &core * (w * c);
                        }
                    }
                }
                g
            })
            .collect();
        (c * lefts[n].trace(), envs)
    });

    let mut energy = ZERO;
    let mut env = vec![[CMatrix::zeros(d, d), CMatrix::zeros(d, d)]; n];
    for (e, g) in per_term {
        energy += e;
        for (acc, gb) in env.iter_mut().zip(g) {
            acc[0] += &gb[0];
            acc[1] += &gb[1];
        }
    }
    let overlaps = xis
        .iter()
        .zip(blocks)
        .map(|(x, &b)| x.slice(0).dotc(&env[b][0]) + x.slice(1).dotc(&env[b][1]))
        .collect();
    Ok((energy, overlaps))
}
