use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut, DVector};
use serde::Serialize;

use super::spectrum::min_eigenvalue_dense;
use super::{ArealawError, ExpanderModel, Result, DIMENSION_CAP};

/// Which part of the Hamiltonian a term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Component {
    Left,
    Middle,
    Right,
    DeltaLeft,
    DeltaRight,
}

/// Operator on sites `first` and `first + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTerm {
    pub component: Component,
    pub first: usize,
    pub op: DMatrix<f64>,
}

/// `H` on sites with dimensions `(d, m, m, d)`, stored as nearest-neighbour terms.
#[derive(Debug, Clone, PartialEq)]
pub struct FourSiteHamiltonian {
    dims: [usize; 4],
    terms: Vec<LocalTerm>,
}

impl FourSiteHamiltonian {
    pub fn new(dims: [usize; 4], terms: Vec<LocalTerm>) -> Result<Self> {
        let h = Self { dims, terms };
        if h.dim() > DIMENSION_CAP {
            return Err(ArealawError::DimensionCap { dim: h.dim(), cap: DIMENSION_CAP });
        }
        h.check_support()?;
        Ok(h)
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    /// Every term acts on two neighbouring sites with matching local dimensions.
    pub fn check_support(&self) -> Result<()> {
        for t in &self.terms {
            let ok = t.first < 3 && {
                let ab = self.dims[t.first] * self.dims[t.first + 1];
                t.op.nrows() == ab && t.op.ncols() == ab
            };
            if !ok {
                return Err(ArealawError::ShapeMismatch);
            }
        }
        Ok(())
    }

    /// Largest `|H − Hᵀ|` entry over the local terms.
    pub fn hermiticity_residual(&self) -> f64 {
        self.terms.iter().map(|t| (&t.op - t.op.transpose()).amax()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of any single term; `H` is PSD if this is non-negative.
    pub fn min_term_eigenvalue(&self) -> f64 {
        self.terms.iter().map(|t| min_eigenvalue_dense(&t.op)).fold(f64::INFINITY, f64::min)
    }

    /// Sum of the terms tagged `c`, as a new Hamiltonian.
    pub fn component(&self, c: Component) -> FourSiteHamiltonian {
        Self { dims: self.dims, terms: self.terms.iter().filter(|t| t.component == c).cloned().collect() }
    }

    /// `y += H x`.
    pub fn apply_add(&self, x: &[f64], y: &mut [f64]) {
        for t in &self.terms {
            apply_local(self.dims, t.first, &t.op, x, y);
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply_add(x, &mut y);
        y
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::zeros(n, n);
        self.for_each_entry(|r, c, v| h[(r, c)] += v);
        h
    }

    pub(crate) fn for_each_entry(&self, mut f: impl FnMut(usize, usize, f64)) {
        for t in &self.terms {
            let left: usize = self.dims[..t.first].iter().product();
            let ab = self.dims[t.first] * self.dims[t.first + 1];
            let right: usize = self.dims[t.first + 2..].iter().product();
            for p in 0..ab {
                for q in 0..ab {
                    let v = t.op[(p, q)];
                    if v == 0.0 {
                        continue;
                    }
                    for l in 0..left {
                        for r in 0..right {
                            f((l * ab + p) * right + r, (l * ab + q) * right + r, v);
                        }
                    }
                }
            }
        }
    }
}

fn apply_local(dims: [usize; 4], first: usize, op: &DMatrix<f64>, x: &[f64], y: &mut [f64]) {
    let left: usize = dims[..first].iter().product();
    let ab = dims[first] * dims[first + 1];
    let right: usize = dims[first + 2..].iter().product();
    let block = ab * right;
    for l in 0..left {
        let xs = DMatrixView::from_slice(&x[l * block..(l + 1) * block], right, ab);
        let mut ys = DMatrixViewMut::from_slice(&mut y[l * block..(l + 1) * block], right, ab);
        ys.gemm(1.0, &xs, &op.transpose(), 1.0);
    }
}

/// Labels on the middle sites: `0..k` for `|1⟩..|k⟩`, then `A`, `B`.
fn label_a(model: &ExpanderModel) -> usize {
    model.k()
}

fn label_b(model: &ExpanderModel) -> usize {
    model.k() + 1
}

/// `1 − W Wᵀ` on `(end, middle)` with `W = Σ_i P_i ⊗ |i⟩ / √k`.
fn left_term(model: &ExpanderModel, m: usize) -> DMatrix<f64> {
    let (d, k) = (model.d(), model.k());
    let w = 1.0 / (k as f64).sqrt();
    let mut wm = DMatrix::zeros(d * m, d);
    for (i, p) in model.perms().iter().enumerate() {
        for z in 0..d {
            wm[(p[z] * m + i, z)] = w;
        }
    }
    DMatrix::identity(d * m, d * m) - &wm * wm.transpose()
}

/// Mirror of [`left_term`] on `(middle, end)`.
fn right_term(model: &ExpanderModel, m: usize) -> DMatrix<f64> {
    let (d, k) = (model.d(), model.k());
    let w = 1.0 / (k as f64).sqrt();
    let mut wm = DMatrix::zeros(m * d, d);
    for (i, p) in model.perms().iter().enumerate() {
        for z in 0..d {
            wm[(i * d + p[z], z)] = w;
        }
    }
    DMatrix::identity(m * d, m * d) - &wm * wm.transpose()
}

/// `Σ_{a≥2} (|11⟩ − |aa⟩)(⟨11| − ⟨aa|)` on the middle pair.
fn middle_term(model: &ExpanderModel, m: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(m * m, m * m);
    for a in 1..model.k() {
        let mut v = DVector::zeros(m * m);
        v[0] = 1.0;
        v[a * m + a] = -1.0;
        h += &v * v.transpose();
    }
    h
}

fn rank_one(v: &DVector<f64>) -> DMatrix<f64> {
    v * v.transpose()
}

fn one_minus(m: usize, other: usize) -> DVector<f64> {
    let mut v = DVector::zeros(m);
    v[0] = 1.0;
    v[other] = -1.0;
    v
}

fn pi_diag(model: &ExpanderModel, inside: bool) -> DMatrix<f64> {
    let d = model.d();
    DMatrix::from_fn(d, d, |i, j| if i == j && model.in_pi(i) == inside { 1.0 } else { 0.0 })
}

/// `Π ⊗ (|1⟩−|A⟩)(⟨1|−⟨A|) + (1−Π) ⊗ (|1⟩−|B⟩)(⟨1|−⟨B|)`, mirrored when `right`.
fn delta_term(model: &ExpanderModel, m: usize, right: bool) -> DMatrix<f64> {
    let pa = rank_one(&one_minus(m, label_a(model)));
    let pb = rank_one(&one_minus(m, label_b(model)));
    let (pi, pi_c) = (pi_diag(model, true), pi_diag(model, false));
    if right {
        pa.kronecker(&pi) + pb.kronecker(&pi_c)
    } else {
        pi.kronecker(&pa) + pi_c.kronecker(&pb)
    }
}

fn base_terms(model: &ExpanderModel, m: usize) -> Vec<LocalTerm> {
    vec![
        LocalTerm { component: Component::Left, first: 0, op: left_term(model, m) },
        LocalTerm { component: Component::Middle, first: 1, op: middle_term(model, m) },
        LocalTerm { component: Component::Right, first: 2, op: right_term(model, m) },
    ]
}

/// `H_L + H_M + H_R` with `k` states on each middle site.
pub fn build_base_hamiltonian(model: &ExpanderModel) -> Result<FourSiteHamiltonian> {
    let (d, k) = (model.d(), model.k());
    FourSiteHamiltonian::new([d, k, k, d], base_terms(model, k))
}

/// `H_L + H_M + H_R` on the enlarged middle space, without the `Δ` terms.
fn enlarged_base(model: &ExpanderModel) -> Result<FourSiteHamiltonian> {
    let (d, m) = (model.d(), model.k() + 2);
    FourSiteHamiltonian::new([d, m, m, d], base_terms(model, m))
}

/// `H'_L + H'_M + H'_R` with middle labels `1..k, A, B`.
pub fn build_primed_hamiltonian(model: &ExpanderModel) -> Result<FourSiteHamiltonian> {
    let (d, m) = (model.d(), model.k() + 2);
    let mut terms = base_terms(model, m);
    let (a, b) = (label_a(model), label_b(model));
    let mut extra = DMatrix::zeros(m * m, m * m);
    extra[(a * m + b, a * m + b)] = 1.0;
    extra[(b * m + a, b * m + a)] = 1.0;
    terms[1].op += extra;
    terms.push(LocalTerm { component: Component::DeltaLeft, first: 0, op: delta_term(model, m, false) });
    terms.push(LocalTerm { component: Component::DeltaRight, first: 2, op: delta_term(model, m, true) });
    FourSiteHamiltonian::new([d, m, m, d], terms)
}

/// `V₁` on `(end, middle)`: keeps labels `2..k`, sends `|1⟩` to `(|1⟩+|A⟩)/√2` under `Π`
/// and to `(|1⟩+|B⟩)/√2` under `1−Π`. Returns a `(d·(k+2)) × (d·k)` matrix.
fn isometry_left(model: &ExpanderModel) -> DMatrix<f64> {
    let (d, k) = (model.d(), model.k());
    let m = k + 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = DMatrix::zeros(d * m, d * k);
    for x in 0..d {
        for i in 1..k {
            v[(x * m + i, x * k + i)] = 1.0;
        }
        let other = if model.in_pi(x) { label_a(model) } else { label_b(model) };
        v[(x * m, x * k)] = s;
        v[(x * m + other, x * k)] = s;
    }
    v
}

/// Mirror of [`isometry_left`] on `(middle, end)`.
fn isometry_right(model: &ExpanderModel) -> DMatrix<f64> {
    let (d, k) = (model.d(), model.k());
    let m = k + 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = DMatrix::zeros(m * d, k * d);
    for x in 0..d {
        for i in 1..k {
            v[(i * d + x, i * d + x)] = 1.0;
        }
        let other = if model.in_pi(x) { label_a(model) } else { label_b(model) };
        v[(x, x)] = s;
        v[(other * d + x, x)] = s;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsometryCheck {
    /// `max |V†V − I|`.
    pub isometry_residual: f64,
    /// Smallest eigenvalue of `V†(H_L+H_M+H_R)V − ½(H_L+H_M+H_R)`.
    pub min_eigenvalue: f64,
}

impl IsometryCheck {
    pub fn holds(&self) -> bool {
        self.isometry_residual < 1e-10 && self.min_eigenvalue >= -1e-8
    }
}

/// Checks `V†(H_L+H_M+H_R)V ≥ ½(H_L+H_M+H_R)` with `V = V₁ ⊗ V₂`.
pub fn isometry_reduction_check(model: &ExpanderModel) -> Result<IsometryCheck> {
    let base = build_base_hamiltonian(model)?;
    let big = enlarged_base(model)?;
    let (v1, v2) = (isometry_left(model), isometry_right(model));
    let res1 = (v1.transpose() * &v1 - DMatrix::identity(v1.ncols(), v1.ncols())).amax();
    let res2 = (v2.transpose() * &v2 - DMatrix::identity(v2.ncols(), v2.ncols())).amax();
    let n = base.dim();
    let (rows_small, cols_small) = (v1.ncols(), v2.ncols());
    let (rows_big, cols_big) = (v1.nrows(), v2.nrows());
    let mut reduced = base.dense() * -0.5;
    let mut x = vec![0.0; n];
    for c in 0..n {
        x.iter_mut().for_each(|e| *e = 0.0);
        x[c] = 1.0;
        // V x = V₁ X V₂ᵀ with X the (d·k) × (k·d) reshaping of x.
        let xm = DMatrix::from_row_slice(rows_small, cols_small, &x);
        let vx = &v1 * xm * v2.transpose();
        let flat: Vec<f64> =
            (0..rows_big).flat_map(|r| (0..cols_big).map(move |s| (r, s))).map(|(r, s)| vx[(r, s)]).collect();
        let hx = big.apply(&flat);
        let hm = DMatrix::from_row_slice(rows_big, cols_big, &hx);
        let back = v1.transpose() * hm * &v2;
        for r in 0..rows_small {
            for s in 0..cols_small {
                reduced[(r * cols_small + s, c)] += back[(r, s)];
            }
        }
    }
    let sym = (&reduced + reduced.transpose()) * 0.5;
    Ok(IsometryCheck { isometry_residual: res1.max(res2), min_eigenvalue: min_eigenvalue_dense(&sym) })
}
