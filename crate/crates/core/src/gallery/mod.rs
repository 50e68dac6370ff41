//! Exact gallery inclusions with declared ground truth.
//!
//! Finite-dimensional backends host neither factors nor outer actions; each
//! item lists in `notes` which hypotheses are relaxed. The formulas for
//! expectations, indices and bases are checked as stated.

mod tlj;

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{AlgRef, Algebra, CondExp, Elem, GramBasis, MatrixAlgebra};
use crate::backend::{parse_entry, BackendFile};
use crate::basic::ConcreteM1;
use crate::matrix::{BlockMat, QMat};
use crate::presentation::{Presentation, Provenance};
use crate::scalar::{Gauss, Rational};
use crate::subfactor::Inclusion;
use crate::term::{parse_term, Term};
use crate::{Error, Result};

pub use tlj::{catalan, tlj, verify_markov, verify_markov_with, Diagram, MarkovReport, RelationReport, TLAlgebra, Tlj, TLJ_WIDTH_CAP};

/// A gallery inclusion with its declared data.
#[derive(Clone, Debug)]
pub struct GalleryItem {
    pub name: String,
    pub inclusion: Inclusion,
    pub concrete: Option<ConcreteM1>,
    pub notes: Vec<String>,
}

pub fn pauli_x() -> QMat {
    QMat::from_rows(vec![vec![Gauss::zero(), Gauss::one()], vec![Gauss::one(), Gauss::zero()]])
}

pub fn pauli_z() -> QMat {
    QMat::from_rows(vec![vec![Gauss::one(), Gauss::zero()], vec![Gauss::zero(), -Gauss::one()]])
}

/// `M₂` with generators `X, Z`.
pub fn m2_pauli() -> MatrixAlgebra {
    MatrixAlgebra::full(2, vec![pauli_x(), pauli_z()]).expect("contractions").with_label("M2")
}

/// Two generators of `M_m`: `X, Z` for `m = 2`, otherwise the cyclic shift
/// and `e₁₁`.
fn mm_gens(m: usize) -> Vec<QMat> {
    if m == 2 {
        return vec![pauli_x(), pauli_z()];
    }
    let mut s = QMat::zeros(m, m);
    for i in 0..m {
        s[((i + 1) % m, i)] = Gauss::one();
    }
    vec![s, QMat::unit(m, 0, 0)]
}

fn presentation(alg: MatrixAlgebra, unit_special: bool) -> Presentation {
    Presentation::new(Arc::new(alg), unit_special, Provenance::MatrixBackend)
}

fn block(x: &QMat, r0: usize, c0: usize, n: usize) -> QMat {
    let mut out = QMat::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(r, c)] = x[(r0 + r, c0 + c)].clone();
        }
    }
    out
}

fn block_diag(parts: &[QMat]) -> QMat {
    let n: usize = parts.iter().map(|p| p.rows).sum();
    let mut out = QMat::zeros(n, n);
    let mut o = 0;
    for p in parts {
        for r in 0..p.rows {
            for c in 0..p.cols {
                out[(o + r, o + c)] = p[(r, c)].clone();
            }
        }
        o += p.rows;
    }
    out
}

fn mat(x: &Elem) -> &BlockMat {
    x.as_mat().expect("matrix element expected")
}

/// `x ↦ (id ⊗ tr_m)(x) ⊗ 1_m` blockwise.
#[derive(Debug)]
pub struct PartialTraceE {
    pub m: usize,
}

impl CondExp for PartialTraceE {
    fn apply(&self, x: &Elem) -> Elem {
        let m = self.m;
        let inv = Gauss::ratio(1, m as i64);
        let blocks = mat(x)
            .blocks
            .iter()
            .map(|b| {
                let d = b.rows / m;
                let mut a = QMat::zeros(d, d);
                for i in 0..d {
                    for j in 0..d {
                        let mut s = Gauss::zero();
                        for k in 0..m {
                            s += &b[(i * m + k, j * m + k)];
                        }
                        a[(i, j)] = &s * &inv;
                    }
                }
                a.kron(&QMat::identity(m))
            })
            .collect();
        Elem::Mat(BlockMat { blocks })
    }
}

/// `N ⊂ N ⊗ M_m`. The generators of `N` come first, then two generators of
/// `M_m`. A concrete `M₁ = M ⊗ M_m` with `e = 1 ⊗ P_ω` is attached when `N`
/// is a single block.
pub fn amplification(base: &MatrixAlgebra, m: usize) -> Result<GalleryItem> {
    if m < 2 {
        return Err(Error::Invalid("amplification needs m >= 2".into()));
    }
    let im = QMat::identity(m);
    let mut gens: Vec<BlockMat> = base
        .gens
        .iter()
        .map(|g| BlockMat { blocks: g.blocks.iter().map(|b| b.kron(&im)).collect() })
        .collect();
    for h in mm_gens(m) {
        gens.push(BlockMat { blocks: base.dims.iter().map(|&d| QMat::identity(d).kron(&h)).collect() });
    }
    let dims = base.dims.iter().map(|d| d * m).collect();
    let alg = MatrixAlgebra::new(dims, base.weights.clone(), gens)?.with_label(&format!("{} (x) M{m}", base.label));
    let n = alg.arity();
    let sub = (0..base.arity()).map(|i| Term::gen(n, i)).collect();
    let mm = Rational::from_integer(((m * m) as i64).into());
    let inc = Inclusion::new(presentation(alg, true), sub)?
        .with_declared(Arc::new(PartialTraceE { m }))
        .with_index(mm)
        .with_label(&format!("amplification m={m}"));
    let concrete = (base.dims.len() == 1).then(|| {
        let d = base.dims[0];
        let mut w = QMat::zeros(m * m, m * m);
        let c = Gauss::ratio(1, m as i64);
        for a in 0..m {
            for b in 0..m {
                w[(a * m + a, b * m + b)] = c.clone();
            }
        }
        ConcreteM1 { m, e: QMat::identity(d).kron(&w) }
    });
    Ok(GalleryItem {
        name: "amplification".into(),
        inclusion: inc,
        concrete,
        notes: vec!["factoriality holds only when N is a single block".into()],
    })
}

/// The acceptance configuration `M₂ ⊂ M₂ ⊗ M₂` with generators
/// `X⊗1, Z⊗1, 1⊗X, 1⊗Z`.
pub fn amplification_m2() -> GalleryItem {
    amplification(&m2_pauli(), 2).expect("valid amplification")
}

/// Inner action of a finite group on a single-block `N`, `α_g = Ad(v_g)`.
#[derive(Clone, Debug)]
pub struct InnerAction {
    /// `table[g][h] = gh`; element 0 is the identity.
    pub table: Vec<Vec<usize>>,
    pub unitaries: Vec<QMat>,
}

impl InnerAction {
    /// Cyclic group of order `n` acting by powers of `v`.
    pub fn cyclic(v: QMat, n: usize) -> Self {
        let table = (0..n).map(|g| (0..n).map(|h| (g + h) % n).collect()).collect();
        let mut unitaries = vec![QMat::identity(v.rows)];
        for g in 1..n {
            unitaries.push(unitaries[g - 1].mul(&v));
        }
        Self { table, unitaries }
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn apply(&self, g: usize, x: &QMat) -> QMat {
        let v = &self.unitaries[g];
        v.mul(x).mul(&v.adjoint())
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.table[g].iter().position(|&h| h == 0).expect("group inverse")
    }

    /// Unitarity, group axioms and `α_g α_h = α_gh` on the generators.
    pub fn check(&self, gens: &[QMat]) -> Result<()> {
        let n = self.order();
        if self.unitaries.len() != n || self.table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(Error::Invalid("malformed group table".into()));
        }
        for v in &self.unitaries {
            if v.mul(&v.adjoint()) != QMat::identity(v.rows) {
                return Err(Error::Invalid("action unitary is not unitary".into()));
            }
        }
        for g in 0..n {
            if self.table[0][g] != g || self.table[g][0] != g {
                return Err(Error::Invalid("element 0 is not the identity".into()));
            }
            for h in 0..n {
                for k in 0..n {
                    if self.table[self.table[g][h]][k] != self.table[g][self.table[h][k]] {
                        return Err(Error::Invalid("group table is not associative".into()));
                    }
                }
                for x in gens {
                    if self.apply(g, &self.apply(h, x)) != self.apply(self.table[g][h], x) {
                        return Err(Error::Invalid("action is not a homomorphism".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `Σ_g x_g u_g ↦ x_e` in the regular model on `ℂ^d ⊗ ℓ²(G)`.
#[derive(Debug)]
pub struct CrossedE {
    pub d: usize,
    pub action: InnerAction,
}

impl CondExp for CrossedE {
    fn apply(&self, x: &Elem) -> Elem {
        let y = &mat(x).blocks[0];
        let a = block(y, 0, 0, self.d);
        let parts: Vec<QMat> =
            (0..self.action.order()).map(|h| self.action.apply(self.action.inverse(h), &a)).collect();
        Elem::Mat(BlockMat::single(block_diag(&parts)))
    }
}

/// `N ⊂ N ⋊ G` with `N = M_d` acting by `π(x) = ⊕_h α_{h⁻¹}(x)` and
/// `u_g` the left regular shifts. Generators: those of `N`, then `u_g` for
/// `g ≠ e`.
pub fn crossed_product(base: &MatrixAlgebra, action: InnerAction) -> Result<GalleryItem> {
    if base.dims.len() != 1 {
        return Err(Error::Invalid("crossed product needs a single-block N".into()));
    }
    let d = base.dims[0];
    let bg: Vec<QMat> = base.gens.iter().map(|g| g.blocks[0].clone()).collect();
    action.check(&bg)?;
    let n = action.order();
    let mut gens = Vec::new();
    for x in &bg {
        let parts: Vec<QMat> = (0..n).map(|h| action.apply(action.inverse(h), x)).collect();
        gens.push(block_diag(&parts));
    }
    for g in 1..n {
        let mut p = QMat::zeros(n, n);
        for h in 0..n {
            p[(action.table[g][h], h)] = Gauss::one();
        }
        gens.push(p.kron(&QMat::identity(d)));
    }
    let alg = MatrixAlgebra::full(d * n, gens)?.with_label(&format!("{} x| G", base.label));
    let ar = alg.arity();
    let sub = (0..bg.len()).map(|i| Term::gen(ar, i)).collect();
    let inc = Inclusion::new(presentation(alg, true), sub)?
        .with_declared(Arc::new(CrossedE { d, action }))
        .with_index(Rational::from_integer((n as i64).into()))
        .with_label(&format!("crossed product |G|={n}"));
    Ok(GalleryItem {
        name: "crossed-product".into(),
        inclusion: inc,
        concrete: None,
        notes: vec!["the action is inner, so it is not outer and the crossed product is not a factor".into()],
    })
}

/// `M₂ ⋊ ℤ₂` with `α = Ad(Z)`; generators `π(X), π(Z), u`.
pub fn crossed_product_z2() -> GalleryItem {
    crossed_product(&m2_pauli(), InnerAction::cyclic(pauli_z(), 2)).expect("valid action")
}

/// An automorphism of a multi-matrix algebra: block `b` goes to block
/// `perm[b]` conjugated by `unitaries[b]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockAction {
    pub perm: Vec<usize>,
    pub unitaries: Vec<QMat>,
}

impl BlockAction {
    pub fn identity(dims: &[usize]) -> Self {
        Self { perm: (0..dims.len()).collect(), unitaries: dims.iter().map(|&d| QMat::identity(d)).collect() }
    }

    pub fn apply(&self, x: &BlockMat) -> BlockMat {
        let mut blocks = x.blocks.clone();
        for (b, xb) in x.blocks.iter().enumerate() {
            let u = &self.unitaries[b];
            blocks[self.perm[b]] = u.mul(xb).mul(&u.adjoint());
        }
        BlockMat { blocks }
    }

    pub fn compose(&self, other: &BlockAction) -> BlockAction {
        // (self ∘ other)(x): block b → other.perm[b] → self.perm[other.perm[b]]
        let perm = (0..self.perm.len()).map(|b| self.perm[other.perm[b]]).collect();
        let unitaries =
            (0..self.perm.len()).map(|b| self.unitaries[other.perm[b]].mul(&other.unitaries[b])).collect();
        BlockAction { perm, unitaries }
    }
}

/// `E(x) = |G|⁻¹ Σ_g α_g(x)`.
#[derive(Debug)]
pub struct AverageE {
    pub group: Vec<BlockAction>,
}

impl CondExp for AverageE {
    fn apply(&self, x: &Elem) -> Elem {
        let x = mat(x);
        let mut acc = BlockMat::zeros(&x.dims());
        for g in &self.group {
            acc = acc.add(&g.apply(x));
        }
        Elem::Mat(acc.scale(&Gauss::ratio(1, self.group.len() as i64)))
    }
}

/// The cyclic group generated by `a`, checked trace-preserving.
pub fn cyclic_group(alg: &MatrixAlgebra, a: &BlockAction) -> Result<Vec<BlockAction>> {
    let units = alg.matrix_units();
    for (b, &p) in a.perm.iter().enumerate() {
        if p >= alg.dims.len() || alg.dims[p] != alg.dims[b] || alg.weights[p] != alg.weights[b] {
            return Err(Error::Invalid("block permutation does not preserve the trace".into()));
        }
        let u = &a.unitaries[b];
        if u.mul(&u.adjoint()) != QMat::identity(u.rows) {
            return Err(Error::Invalid("action unitary is not unitary".into()));
        }
    }
    let id = BlockAction::identity(&alg.dims);
    let acts = |g: &BlockAction, h: &BlockAction| units.iter().all(|x| g.apply(mat(x)) == h.apply(mat(x)));
    let mut group = vec![id.clone()];
    let mut g = a.clone();
    while !acts(&g, &id) {
        if group.len() >= 64 {
            return Err(Error::Resource("action order exceeds 64".into()));
        }
        group.push(g.clone());
        g = a.compose(&g);
    }
    Ok(group)
}

/// `M^G ⊆ M` for a finite cyclic group; the fixed algebra is spanned by
/// averages of matrix units, and its generators are terms of `M`.
pub fn fixed_point(alg: MatrixAlgebra, generator: &BlockAction, unit_special: bool) -> Result<GalleryItem> {
    let group = cyclic_group(&alg, generator)?;
    let e = AverageE { group };
    let pres = presentation(alg.clone(), unit_special);
    let a: &dyn Algebra = &alg;
    let mut gram = GramBasis::new();
    let mut sub = Vec::new();
    for u in alg.matrix_units() {
        let f = e.apply(&u);
        if gram.try_add(a, f.clone()) {
            sub.push(pres.express(&f));
        }
    }
    let n = e.group.len();
    let inc = Inclusion::new(pres, sub)?
        .with_declared(Arc::new(e))
        .with_index(Rational::from_integer((n as i64).into()))
        .with_label(&format!("fixed point |G|={n}"));
    Ok(GalleryItem {
        name: "fixed-point".into(),
        inclusion: inc,
        concrete: None,
        notes: vec!["M is not a factor and the action need not be outer".into()],
    })
}

/// `M₂ ⊕ M₂` with generators `(e₁₂,0), (0,e₁₂)`.
fn m2_plus_m2() -> MatrixAlgebra {
    let z = QMat::zeros(2, 2);
    let e12 = QMat::unit(2, 0, 1);
    let gens = vec![BlockMat { blocks: vec![e12.clone(), z.clone()] }, BlockMat { blocks: vec![z, e12] }];
    let half = Rational::new(1.into(), 2.into());
    MatrixAlgebra::new(vec![2, 2], vec![half.clone(), half], gens).expect("valid").with_label("M2+M2")
}

/// `M₂ ⊕ M₂` and the flip.
pub fn fixed_point_flip() -> GalleryItem {
    let alg = m2_plus_m2();
    let flip = BlockAction { perm: vec![1, 0], unitaries: vec![QMat::identity(2), QMat::identity(2)] };
    fixed_point(alg, &flip, true).expect("valid flip")
}

/// `M_{2^L}`, the level-`L` truncation of the hyperfinite factor, with
/// generators `e₁₂` in each tensor slot.
pub fn truncated_r(level: usize) -> Result<Presentation> {
    if level == 0 || level > 6 {
        return Err(Error::Invalid("truncated R level must be in 1..=6".into()));
    }
    let i2 = QMat::identity(2);
    let e12 = QMat::unit(2, 0, 1);
    let mut gens = Vec::new();
    for j in 0..level {
        let mut g = QMat::identity(1);
        for s in 0..level {
            g = g.kron(if s == j { &e12 } else { &i2 });
        }
        gens.push(g);
    }
    let alg = MatrixAlgebra::full(1 << level, gens)?.with_label(&format!("R level {level}"));
    Ok(presentation(alg, true))
}

/// A gallery entry read from the `gallery` section of a backend file.
#[derive(Clone, Debug)]
pub enum Built {
    Inclusion(GalleryItem),
    Tlj(Box<Tlj>),
}

impl Built {
    pub fn item(&self) -> GalleryItem {
        match self {
            Built::Inclusion(g) => g.clone(),
            Built::Tlj(t) => t.item.clone(),
        }
    }
}

fn param<'a>(g: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    g.get(key).map(String::as_str).ok_or_else(|| Error::Format(format!("gallery section lacks `{key}`")))
}

fn param_usize(g: &BTreeMap<String, String>, key: &str) -> Result<usize> {
    param(g, key)?.parse().map_err(|_| Error::Format(format!("gallery `{key}` must be an integer")))
}

/// Rows separated by `;`, entries `(a/b+c/d i)`.
pub fn parse_matrix(s: &str) -> Result<QMat> {
    let mut rows = Vec::new();
    for r in s.split(';') {
        let row: Option<Vec<Gauss>> = crate::backend::split_entries(r.trim()).into_iter().map(parse_entry).collect();
        rows.push(row.ok_or_else(|| Error::Format(format!("bad matrix row `{}`", r.trim())))?);
    }
    let m = QMat::from_rows(rows);
    if m.rows == 0 || m.data.len() != m.rows * m.rows {
        return Err(Error::Format("matrix must be square".into()));
    }
    Ok(m)
}

/// Builds the construction named in the gallery section. Without a
/// `construction` key, the file is a plain backend and `sub` lists the
/// generators of `N` as comma-separated terms.
pub fn build_from_file(f: &BackendFile) -> Result<Built> {
    let g = &f.gallery;
    let construction = g.get("construction").map(String::as_str).unwrap_or("backend");
    let item = match construction {
        "amplification" => amplification(&f.algebra, param_usize(g, "m")?)?,
        "crossed-product" => {
            let v = parse_matrix(param(g, "unitary")?)?;
            crossed_product(&f.algebra, InnerAction::cyclic(v, param_usize(g, "order")?))?
        }
        "fixed-point" => {
            let perm: std::result::Result<Vec<usize>, _> = param(g, "perm")?.split_whitespace().map(str::parse).collect();
            let perm = perm.map_err(|_| Error::Format("bad `perm`".into()))?;
            let unitaries = match g.get("unitaries") {
                Some(s) => s.split('|').map(parse_matrix).collect::<Result<Vec<_>>>()?,
                None => f.algebra.dims.iter().map(|&d| QMat::identity(d)).collect(),
            };
            if perm.len() != f.algebra.dims.len() || unitaries.len() != perm.len() {
                return Err(Error::Format("`perm` and `unitaries` must have one entry per block".into()));
            }
            fixed_point(f.algebra.clone(), &BlockAction { perm, unitaries }, f.unit_special)?
        }
        "tlj" => {
            let delta = crate::backend::parse_rational(param(g, "delta")?)
                .ok_or_else(|| Error::Format("bad `delta`".into()))?;
            return Ok(Built::Tlj(Box::new(tlj(param_usize(g, "width")?, delta)?)));
        }
        "backend" => {
            let pres = presentation(f.algebra.clone(), f.unit_special);
            let n = pres.arity();
            let sub = match g.get("sub") {
                Some(s) if !s.trim().is_empty() => {
                    s.split(',').map(|t| parse_term(t.trim(), n)).collect::<Result<Vec<_>>>()?
                }
                _ => (0..n).map(|i| Term::gen(n, i)).collect(),
            };
            let mut inc = Inclusion::new(pres, sub)?.with_label("backend");
            if let Some(i) = g.get("index") {
                inc = inc.with_index(crate::backend::parse_rational(i).ok_or_else(|| Error::Format("bad `index`".into()))?);
            }
            GalleryItem { name: "backend".into(), inclusion: inc, concrete: None, notes: Vec::new() }
        }
        other => return Err(Error::Format(format!("unknown construction `{other}`"))),
    };
    Ok(Built::Inclusion(item))
}

pub const BUILTIN: [&str; 4] = ["amplification", "crossed-product-z2", "fixed-point-flip", "tlj"];

/// Backend files for the built-in gallery entries.
pub fn builtin_backend(name: &str) -> Result<BackendFile> {
    let mut gallery = BTreeMap::new();
    let mut put = |k: &str, v: &str| {
        gallery.insert(k.to_string(), v.to_string());
    };
    let algebra = match name {
        "amplification" => {
            put("construction", "amplification");
            put("m", "2");
            m2_pauli()
        }
        "crossed-product-z2" => {
            put("construction", "crossed-product");
            put("unitary", "(1/1+0/1 i) (0/1+0/1 i); (0/1+0/1 i) (-1/1+0/1 i)");
            put("order", "2");
            m2_pauli()
        }
        "fixed-point-flip" => {
            put("construction", "fixed-point");
            put("perm", "1 0");
            m2_plus_m2()
        }
        "tlj" => {
            put("construction", "tlj");
            put("width", "6");
            put("delta", "2");
            MatrixAlgebra::full(1, Vec::new())?
        }
        other => {
            return Err(Error::Invalid(format!("unknown gallery entry `{other}` (known: {})", BUILTIN.join(", "))))
        }
    };
    Ok(BackendFile { algebra, unit_special: true, gallery })
}

/// Reference algebra handle of a gallery inclusion.
pub fn ambient_alg(item: &GalleryItem) -> AlgRef {
    item.inclusion.ambient.alg.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic::{induce_m1, jones_trace};
    use crate::scalar::rat;
    use crate::subfactor::CondExpSource;

    fn axioms(inc: &Inclusion) {
        let a = inc.ambient.alg.as_ref();
        let p = &inc.ambient;
        let n = p.arity();
        let span: Vec<Elem> = p
            .word_basis()
            .words
            .iter()
            .map(|w| p.eval(&Term::monomial(n, w.clone(), Gauss::one())).unwrap())
            .collect();
        let subs = inc.sub_elems().unwrap();
        for x in span.iter().take(16) {
            let ex = inc.cond_exp(x).unwrap();
            // idempotent, agrees with least squares, trace preserving
            assert_eq!(inc.cond_exp(&ex).unwrap(), ex);
            assert_eq!(a.trace(&ex), a.trace(x));
            assert!(a.elem_eq(&ex, &inc.cond_exp_via(CondExpSource::Backend, x).unwrap()));
            assert!(a.elem_eq(&inc.cond_exp(&a.adjoint(x)).unwrap(), &a.adjoint(&ex)));
            for n in &subs {
                assert!(a.elem_eq(&inc.cond_exp(&a.mul(n, x)).unwrap(), &a.mul(n, &ex)));
                assert!(a.elem_eq(&inc.cond_exp(&a.mul(x, n)).unwrap(), &a.mul(&ex, n)));
            }
        }
    }

    #[test]
    fn amplification_declared_e() {
        let g = amplification_m2();
        axioms(&g.inclusion);
        assert_eq!(g.inclusion.sub_dim().unwrap(), 4);
        let m1 = induce_m1(&g.inclusion, g.concrete.clone()).unwrap();
        assert_eq!(jones_trace(&m1.presentation).unwrap(), rat(1, 4));
    }

    #[test]
    fn amplification_of_scalars() {
        let c = MatrixAlgebra::full(1, vec![]).unwrap();
        let g = amplification(&c, 2).unwrap();
        axioms(&g.inclusion);
        assert_eq!(g.inclusion.sub_dim().unwrap(), 1);
    }

    #[test]
    fn crossed_product_z2_expectation() {
        let g = crossed_product_z2();
        axioms(&g.inclusion);
        let p = &g.inclusion.ambient;
        let u = p.eval(&Term::gen(3, 2)).unwrap();
        assert!(p.alg.is_zero_elem(&g.inclusion.cond_exp(&u).unwrap()));
        assert_eq!(p.alg.mul(&u, &u), p.alg.unit());
        assert_eq!(p.word_basis().words.len(), 8);
    }

    #[test]
    fn fixed_point_is_diagonal() {
        let g = fixed_point_flip();
        axioms(&g.inclusion);
        assert_eq!(g.inclusion.sub_dim().unwrap(), 4);
        assert_eq!(g.inclusion.index, Some(rat(2, 1)));
    }

    #[test]
    fn non_homomorphic_action_rejected() {
        let a = InnerAction { table: vec![vec![0, 1], vec![1, 0]], unitaries: vec![QMat::identity(2), QMat::identity(2).scale(&Gauss::from_i64(2))] };
        assert!(crossed_product(&m2_pauli(), a).is_err());
    }

    #[test]
    fn truncated_r_generates_m8() {
        let p = truncated_r(3).unwrap();
        assert_eq!(p.word_basis().words.len(), 64);
    }
}
