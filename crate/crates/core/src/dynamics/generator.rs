//! Compiled Lindblad generator acting on column-major matrices.
//!
//! Every operator in a model is a polynomial in ladder operators and has
//! only O(dim) nonzeros, so the generator stores the union sparsity pattern
//! once and evaluates `H_eff = H(t) - i/2 sum L^dag L` as a value vector on
//! it. Applying the generator to a dense `X` then costs O(nnz * dim).

use num_complex::Complex64 as C64;

use super::control::{ComplexControl, ControlFunction};
use super::model::LindbladModel;
use crate::quantum::Operator;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Several operators sharing one sparsity pattern.
#[derive(Clone, Debug)]
struct PatternTerms {
    rows: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Vec<C64>>,
}

impl PatternTerms {
    fn new(dim: usize, ops: &[&Operator]) -> Self {
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        for c in 0..dim {
            for r in 0..dim {
                if ops.iter().any(|op| op.matrix()[(r, c)] != ZERO) {
                    rows.push(r);
                    cols.push(c);
                }
            }
        }
        let values = ops
            .iter()
            .map(|op| {
                rows.iter()
                    .zip(&cols)
                    .map(|(&r, &c)| op.matrix()[(r, c)])
                    .collect()
            })
            .collect();
        Self { rows, cols, values }
    }

    fn nnz(&self) -> usize {
        self.rows.len()
    }

    fn combine(&self, coeffs: &[C64], out: &mut Vec<C64>) {
        out.clear();
        out.resize(self.nnz(), ZERO);
        for (vals, &k) in self.values.iter().zip(coeffs) {
            if k == ZERO {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(vals) {
                *o += k * v;
            }
        }
    }
}

#[derive(Clone, Debug)]
enum EffCoeff {
    Hamiltonian(ControlFunction),
    /// `-i/2 conj(c_k) c_l` for the `L_k^dag L_l` product of one jump.
    Dissipative { jump: usize, k: usize, l: usize },
}

#[derive(Clone, Debug)]
struct Jump {
    terms: PatternTerms,
    coeffs: Vec<ComplexControl>,
}

/// Scratch buffers for one thread of generator evaluation.
#[derive(Clone, Debug, Default)]
pub struct Workspace {
    heff: Vec<C64>,
    jump_vals: Vec<C64>,
    coeffs: Vec<C64>,
    jump_coeffs: Vec<Vec<C64>>,
    tmp: Vec<C64>,
}

#[derive(Clone, Debug)]
pub struct Generator {
    dim: usize,
    heff: PatternTerms,
    heff_coeffs: Vec<EffCoeff>,
    jumps: Vec<Jump>,
}

impl Generator {
    pub fn new(model: &LindbladModel) -> Self {
        let dim = model.space().total_dim();
        let mut eff_ops: Vec<Operator> = Vec::new();
        let mut heff_coeffs = Vec::new();
        for (op, f) in model.hamiltonian_terms() {
            eff_ops.push(op.clone());
            heff_coeffs.push(EffCoeff::Hamiltonian(f.clone()));
        }
        let mut jumps = Vec::new();
        for (j, l) in model.collapse_ops().iter().enumerate() {
            let parts = l.parts();
            for k in 0..parts.len() {
                for m in 0..parts.len() {
                    eff_ops.push(&parts[k].0.adjoint() * &parts[m].0);
                    heff_coeffs.push(EffCoeff::Dissipative { jump: j, k, l: m });
                }
            }
            let ops: Vec<&Operator> = parts.iter().map(|(op, _)| op).collect();
            jumps.push(Jump {
                terms: PatternTerms::new(dim, &ops),
                coeffs: parts.iter().map(|(_, c)| c.clone()).collect(),
            });
        }
        let refs: Vec<&Operator> = eff_ops.iter().collect();
        Self {
            dim,
            heff: PatternTerms::new(dim, &refs),
            heff_coeffs,
            jumps,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes `L_t[x]` into `out`; both are column-major `dim x dim`.
    pub fn apply(&self, t: f64, x: &[C64], out: &mut [C64], ws: &mut Workspace) {
        let d = self.dim;
        debug_assert_eq!(x.len(), d * d);
        debug_assert_eq!(out.len(), d * d);

        ws.jump_coeffs.resize(self.jumps.len(), Vec::new());
        for (jc, jump) in ws.jump_coeffs.iter_mut().zip(&self.jumps) {
            jc.clear();
            jc.extend(jump.coeffs.iter().map(|c| c.eval(t)));
        }
        ws.coeffs.clear();
        let minus_half_i = C64::new(0.0, -0.5);
        for c in &self.heff_coeffs {
            ws.coeffs.push(match c {
                EffCoeff::Hamiltonian(f) => C64::new(f.eval(t), 0.0),
                EffCoeff::Dissipative { jump, k, l } => {
                    let jc = &ws.jump_coeffs[*jump];
                    minus_half_i * jc[*k].conj() * jc[*l]
                }
            });
        }
        self.heff.combine(&ws.coeffs, &mut ws.heff);

        out.fill(ZERO);
        let (rows, cols) = (&self.heff.rows, &self.heff.cols);
        // -i H_eff X
        for j in 0..d {
            let xc = &x[j * d..(j + 1) * d];
            let oc = &mut out[j * d..(j + 1) * d];
            for ((&r, &c), &v) in rows.iter().zip(cols).zip(&ws.heff) {
                oc[r] += C64::new(v.im, -v.re) * xc[c];
            }
        }
        // + i X H_eff^dag, column r of the product gathers conj(v) X[:, c]
        right_multiply_adjoint(rows, cols, &ws.heff, x, out, d, C64::new(0.0, 1.0));

        // + L X L^dag
        for (jump, jc) in self.jumps.iter().zip(&ws.jump_coeffs) {
            jump.terms.combine(jc, &mut ws.jump_vals);
            ws.tmp.clear();
            ws.tmp.resize(d * d, ZERO);
            let (jr, jcols) = (&jump.terms.rows, &jump.terms.cols);
            for j in 0..d {
                let xc = &x[j * d..(j + 1) * d];
                let tc = &mut ws.tmp[j * d..(j + 1) * d];
                for ((&r, &c), &v) in jr.iter().zip(jcols).zip(&ws.jump_vals) {
                    tc[r] += v * xc[c];
                }
            }
            right_multiply_adjoint(jr, jcols, &ws.jump_vals, &ws.tmp, out, d, C64::new(1.0, 0.0));
        }
    }
}

/// `out += scale * Y A^dag` for sparse `A` given by (rows, cols, vals).
fn right_multiply_adjoint(
    rows: &[usize],
    cols: &[usize],
    vals: &[C64],
    y: &[C64],
    out: &mut [C64],
    d: usize,
    scale: C64,
) {
    for ((&r, &c), &v) in rows.iter().zip(cols).zip(vals) {
        let s = scale * v.conj();
        let src = &y[c * d..(c + 1) * d];
        let dst = &mut out[r * d..(r + 1) * d];
        for (o, &yv) in dst.iter_mut().zip(src) {
            *o += s * yv;
        }
    }
}
