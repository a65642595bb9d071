//! The staircase ansatz circuit.
//!
//! Each of the `n_blocks` blocks acts on `n_virtual + 1` qubit lines: local
//! line 0 is the (reused) physical qubit, lines `1..=n_virtual` hold the bond
//! register. A block is `n_layers` staircase layers; one layer applies the
//! 15-parameter two-qubit template to `(0,1), (1,2), ..., (n_virtual-1, n_virtual)`
//! in that order.
//!
//! Two-qubit template on `(a, b)`:
//!
//! ```text
//! Rz Ry Rz (a), Rz Ry Rz (b)      6 params
//! CNOT b->a
//! Rz (a), Ry (b)                  2 params
//! CNOT a->b
//! Ry (b)                          1 param
//! CNOT b->a
//! Rz Ry Rz (a), Rz Ry Rz (b)      6 params
//! ```
//!
//! With all angles zero the three CNOTs compose to SWAP(a, b).
//! Rotations are `R_q(theta) = exp(-i theta Q / 2)` with no phase normalization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pauli::{CMatrix, PauliAxis, C64};
use crate::statevec::{self, Gate1};

pub const TEMPLATE_PARAMS: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateSpec {
    Rotation {
        axis: PauliAxis,
        qubit: usize,
        param: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

/// Where a parameter lives inside the circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamSite {
    pub block: usize,
    /// Gate index within the block program.
    pub position: usize,
    pub generator: PauliAxis,
    /// Local line within the block (0 = physical).
    pub qubit: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzSpec {
    n_virtual: usize,
    n_blocks: usize,
    n_layers: usize,
    blocks: Vec<Vec<GateSpec>>,
    sites: Vec<ParamSite>,
}

/// Gate angles in radians.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("parameter {k} is not finite")));
        }
        Ok(ParamVector(values))
    }

    pub fn zeros(n: usize) -> Self {
        ParamVector(vec![0.0; n])
    }

    /// Uniform on `[0, 2pi)` from a seeded ChaCha stream.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ParamVector(
            (0..n)
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `self + scale * direction`
    pub fn displaced(&self, direction: &[f64], scale: f64) -> ParamVector {
        ParamVector(
            self.0
                .iter()
                .zip(direction)
                .map(|(t, d)| t + scale * d)
                .collect(),
        )
    }

    pub fn with_entry(&self, index: usize, value: f64) -> ParamVector {
        let mut v = self.0.clone();
        v[index] = value;
        ParamVector(v)
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn push_template(prog: &mut Vec<GateSpec>, next: &mut usize, a: usize, b: usize) {
    use PauliAxis::{Y, Z};
    let mut rot = |prog: &mut Vec<GateSpec>, axis, qubit| {
        prog.push(GateSpec::Rotation {
            axis,
            qubit,
            param: *next,
        });
        *next += 1;
    };
    for q in [a, b] {
        for axis in [Z, Y, Z] {
            rot(prog, axis, q);
        }
    }
    prog.push(GateSpec::Cnot {
        control: b,
        target: a,
    });
    rot(prog, Z, a);
    rot(prog, Y, b);
    prog.push(GateSpec::Cnot {
        control: a,
        target: b,
    });
    rot(prog, Y, b);
    prog.push(GateSpec::Cnot {
        control: b,
        target: a,
    });
    for q in [a, b] {
        for axis in [Z, Y, Z] {
            rot(prog, axis, q);
        }
    }
}

pub fn build_ansatz(n_virtual: usize, n_blocks: usize, n_layers: usize) -> Result<AnsatzSpec> {
    if n_virtual == 0 || n_blocks == 0 || n_layers == 0 {
        return Err(Error::invalid(format!(
            "ansatz dimensions must be positive (n_virtual={n_virtual}, n_blocks={n_blocks}, n_layers={n_layers})"
        )));
    }
    let mut next = 0;
    let mut blocks = Vec::with_capacity(n_blocks);
    for _ in 0..n_blocks {
        let mut prog = Vec::new();
        for _ in 0..n_layers {
            for a in 0..n_virtual {
                push_template(&mut prog, &mut next, a, a + 1);
            }
        }
        blocks.push(prog);
    }
    let mut sites = Vec::with_capacity(next);
    for (block, prog) in blocks.iter().enumerate() {
        for (position, gate) in prog.iter().enumerate() {
            if let GateSpec::Rotation { axis, qubit, param } = *gate {
                debug_assert_eq!(param, sites.len());
                sites.push(ParamSite {
                    block,
                    position,
                    generator: axis,
                    qubit,
                });
            }
        }
    }
    Ok(AnsatzSpec {
        n_virtual,
        n_blocks,
        n_layers,
        blocks,
        sites,
    })
}

impl AnsatzSpec {
    pub fn n_virtual(&self) -> usize {
        self.n_virtual
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn n_params(&self) -> usize {
        self.sites.len()
    }

    /// Bond dimension `D = 2^n_virtual`.
    pub fn bond_dim(&self) -> usize {
        1 << self.n_virtual
    }

    /// Qubit lines per block, `n_virtual + 1`.
    pub fn block_width(&self) -> usize {
        self.n_virtual + 1
    }

    pub fn program(&self, block: usize) -> Result<&[GateSpec]> {
        self.blocks
            .get(block)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index: block,
                limit: self.n_blocks,
            })
    }

    pub fn resolve_param(&self, index: usize) -> Result<ParamSite> {
        self.sites
            .get(index)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index,
                limit: self.n_params(),
            })
    }

    /// Inverse of [`resolve_param`](Self::resolve_param).
    pub fn param_index(&self, site: &ParamSite) -> Result<usize> {
        match self.program(site.block)?.get(site.position) {
            Some(GateSpec::Rotation { param, axis, qubit })
                if *axis == site.generator && *qubit == site.qubit =>
            {
                Ok(*param)
            }
            _ => Err(Error::invalid(format!("no rotation at {site:?}"))),
        }
    }

    /// Parameter indices owned by `block`, contiguous and ascending.
    pub fn block_params(&self, block: usize) -> std::ops::Range<usize> {
        let per_block = self.n_params() / self.n_blocks;
        block * per_block..(block + 1) * per_block
    }

    pub(crate) fn check_params(&self, params: &ParamVector) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::dims(format!(
                "{} parameters for an ansatz with {}",
                params.len(),
                self.n_params()
            )));
        }
        Ok(())
    }
}

pub fn rotation(axis: PauliAxis, theta: f64) -> Gate1 {
    let (s, c) = (theta / 2.0).sin_cos();
    let z = C64::new(0.0, 0.0);
    match axis {
        PauliAxis::X => [
            [C64::new(c, 0.0), C64::new(0.0, -s)],
            [C64::new(0.0, -s), C64::new(c, 0.0)],
        ],
        PauliAxis::Y => [
            [C64::new(c, 0.0), C64::new(-s, 0.0)],
            [C64::new(s, 0.0), C64::new(c, 0.0)],
        ],
        PauliAxis::Z => [[C64::new(c, -s), z], [z, C64::new(c, s)]],
        PauliAxis::I => panic!("rotation about the identity is not a gate"),
    }
}

/// A gate of a block program realized on some register. `line` maps the
/// block's local qubit lines onto register qubits.
pub(crate) fn apply_gate(
    state: &mut [C64],
    n_qubits: usize,
    gate: &GateSpec,
    params: &ParamVector,
    line: impl Fn(usize) -> usize,
) {
    match *gate {
        GateSpec::Rotation { axis, qubit, param } => {
            statevec::apply_1q(state, n_qubits, line(qubit), &rotation(axis, params[param]));
        }
        GateSpec::Cnot { control, target } => {
            statevec::apply_cnot(state, n_qubits, line(control), line(target));
        }
    }
}

fn synthesize(
    spec: &AnsatzSpec,
    block: usize,
    params: &ParamVector,
    insert_after: Option<usize>,
) -> Result<CMatrix> {
    spec.check_params(params)?;
    let prog = spec.program(block)?;
    let width = spec.block_width();
    let dim = 1 << width;
    let mut u = CMatrix::identity(dim, dim);
    // columns are contiguous in nalgebra's column-major storage
    for col in u.as_mut_slice().chunks_mut(dim) {
        for (pos, gate) in prog.iter().enumerate() {
            apply_gate(col, width, gate, params, |q| q);
            if insert_after == Some(pos) {
                if let GateSpec::Rotation { axis, qubit, .. } = *gate {
                    statevec::apply_1q(col, width, qubit, &axis.matrix());
                }
            }
        }
    }
    Ok(u)
}

/// The `2D x 2D` unitary of one block, local line 0 most significant.
pub fn block_unitary(spec: &AnsatzSpec, block: usize, params: &ParamVector) -> Result<CMatrix> {
    synthesize(spec, block, params, None)
}

/// Block unitary with the generator Pauli of `site` applied right after its
/// rotation. Equals `2i` times the derivative of the block unitary with
/// respect to that parameter.
pub fn block_unitary_with_insertion(
    spec: &AnsatzSpec,
    block: usize,
    params: &ParamVector,
    site: &ParamSite,
) -> Result<CMatrix> {
    if site.block != block {
        return Err(Error::invalid(format!(
            "parameter site lives in block {}, not block {block}",
            site.block
        )));
    }
    spec.param_index(site)?;
    synthesize(spec, block, params, Some(site.position))
}

/// `max |U U^dagger - I|`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u * u.adjoint() - CMatrix::identity(n, n)).camax()
}
