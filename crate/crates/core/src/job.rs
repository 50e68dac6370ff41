//! Batch jobs: each command produces a text report and a certificate, and
//! every certificate can be re-checked by [`verify`].

use std::fmt::Write as _;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::backend::{parse_backend, parse_rational, write_backend, BackendFile};
use crate::basic::{
    cond_exp_jump_search, index_jump_estimate, induce_m1, jones_trace, jones_tower, m1_norm_sqr, m1_trace, strip_e,
    to_normal_form, InducedM1, JumpSource, ZSet,
};
use crate::cert::{Certificate, Status};
use crate::gallery::{build_from_file, verify_markov, Built, GalleryItem};
use crate::point::ComputablePoint;
use crate::scalar::{pow2_neg, sqrt_floor_dyadic, to_f64, Rational};
use crate::search::SearchConfig;
use crate::subfactor::{
    construct_pp_basis, cond_exp_from_basis, index_from_basis, index_pp_inf, pp_ratio, verify_pp_basis, CondExpSource,
    IndexEstimate, Inclusion, PPBasis, PositiveCandidates,
};
use crate::term::{parse_with, FlatMode, Signature, Term};
use crate::{Error, Result};

/// Default candidate budget for `index --method jump`.
pub const JUMP_INDEX_BUDGET: u64 = 3_000_000;

pub const MAX_PRECISION: u32 = 60;
/// Residual tolerance for basis clauses.
pub const BASIS_TOLERANCE: (i64, i64) = (1, 1_000_000);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Backend,
    Basis,
    Declared,
    Jump,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Backend => "backend",
            Method::Basis => "basis",
            Method::Declared => "declared",
            Method::Jump => "jump",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "backend" => Ok(Method::Backend),
            "basis" => Ok(Method::Basis),
            "declared" => Ok(Method::Declared),
            "jump" => Ok(Method::Jump),
            _ => Err(Error::Invalid(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Build,
    Norm(String),
    Trace(String),
    Expect(String),
    Index,
    PpBasis,
    NormalForm(String),
    Stripe(String),
    Tower,
    Markov,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::Norm(_) => "norm",
            Command::Trace(_) => "trace",
            Command::Expect(_) => "expect",
            Command::Index => "index",
            Command::PpBasis => "ppbasis",
            Command::NormalForm(_) => "normalform",
            Command::Stripe(_) => "stripe",
            Command::Tower => "tower",
            Command::Markov => "markov",
        }
    }

    fn term(&self) -> Option<&str> {
        match self {
            Command::Norm(t) | Command::Trace(t) | Command::Expect(t) | Command::NormalForm(t) | Command::Stripe(t) => {
                Some(t)
            }
            _ => None,
        }
    }

    fn from_parts(name: &str, term: Option<String>) -> Result<Self> {
        let need = || term.clone().ok_or_else(|| Error::Format(format!("`{name}` certificate lacks `term`")));
        Ok(match name {
            "build" => Command::Build,
            "norm" => Command::Norm(need()?),
            "trace" => Command::Trace(need()?),
            "expect" => Command::Expect(need()?),
            "index" => Command::Index,
            "ppbasis" => Command::PpBasis,
            "normalform" => Command::NormalForm(need()?),
            "stripe" => Command::Stripe(need()?),
            "tower" => Command::Tower,
            "markov" => Command::Markov,
            other => return Err(Error::Format(format!("unknown certificate kind `{other}`"))),
        })
    }
}

#[derive(Clone, Debug)]
pub struct JobConfig {
    pub backend: BackendFile,
    pub precision: u32,
    /// Enumeration budget; `None` selects the per-command default.
    pub budget: Option<u64>,
    pub workers: usize,
    pub method: Option<Method>,
    /// Tower depth.
    pub depth: usize,
    /// Markov: generator index (`None` for the last) and word length.
    pub markov_i: Option<usize>,
    pub markov_len: usize,
    /// Jump expectation: test against the first `n` words of `N` only.
    pub z_words: Option<usize>,
}

impl JobConfig {
    pub fn new(backend: BackendFile) -> Self {
        Self {
            backend,
            precision: 20,
            budget: None,
            workers: 1,
            method: None,
            depth: 2,
            markov_i: None,
            markov_len: 6,
            z_words: None,
        }
    }

    fn check(&self) -> Result<()> {
        if self.precision == 0 || self.precision > MAX_PRECISION {
            return Err(Error::Invalid(format!("precision must be in 1..={MAX_PRECISION}")));
        }
        if self.budget == Some(0) {
            return Err(Error::Invalid("budget must be positive".into()));
        }
        if self.depth == 0 || self.depth > 4 {
            return Err(Error::Invalid("tower depth must be in 1..=4".into()));
        }
        if self.z_words == Some(0) {
            return Err(Error::Invalid("z-set must be nonempty".into()));
        }
        Ok(())
    }

    fn budget_for(&self, cmd: &Command, method: Method) -> u64 {
        self.budget.unwrap_or(match (cmd, method) {
            (Command::PpBasis, _) | (_, Method::Basis) => 2_000_000,
            (Command::Stripe(_), _) => 1,
            (Command::Index, Method::Jump) => JUMP_INDEX_BUDGET,
            _ => 20_000,
        })
    }

    fn search(&self, budget: u64) -> SearchConfig {
        SearchConfig::new(budget, self.workers)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    /// A stated check failed.
    Failed,
    /// Budget exhausted; the certificate is partial.
    Exhausted,
}

#[derive(Clone, Debug)]
pub struct JobOutput {
    pub report: String,
    pub certificate: Certificate,
    pub outcome: Outcome,
}

/// Aligned `key value` lines.
#[derive(Default)]
struct Report(String);

impl Report {
    fn row(&mut self, key: &str, value: impl std::fmt::Display) {
        writeln!(self.0, "{key:<16}{value}").ok();
    }
}

fn decimal(q: &Rational) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        format!("{:.12}", to_f64(q))
    }
}

fn residual(x: f64) -> String {
    format!("{x:.3e}")
}

fn tolerance() -> Rational {
    Rational::new(BASIS_TOLERANCE.0.into(), BASIS_TOLERANCE.1.into())
}

struct Ctx {
    backend_text: String,
    built: Built,
    item: GalleryItem,
}

impl Ctx {
    fn new(file: &BackendFile) -> Result<Self> {
        // everything downstream depends on the text alone
        let backend_text = write_backend(file);
        let built = build_from_file(&parse_backend(&backend_text)?)?;
        let item = built.item();
        Ok(Self { backend_text, built, item })
    }

    fn inc(&self) -> &Inclusion {
        &self.item.inclusion
    }

    fn base(&self) -> usize {
        self.inc().ambient.arity()
    }

    fn sig(&self) -> Signature {
        Signature::extended(self.base())
    }

    fn m1(&self) -> Result<InducedM1> {
        induce_m1(self.inc(), self.item.concrete.clone())
    }

    fn tau(&self) -> Result<Rational> {
        Ok(Rational::one() / self.inc().index.clone().ok_or(Error::NoIndex)?)
    }

    /// A term of `M`, or of `M₁` when it mentions `e`.
    fn parse(&self, text: &str) -> Result<(Term, bool)> {
        let t = parse_with(text, self.sig())?;
        if t.uses_generator(self.base()) {
            Ok((t, true))
        } else {
            Ok((t.restrict(self.base())?, false))
        }
    }

    fn text(&self, t: &Term) -> String {
        t.to_canonical_text(self.sig())
    }

    fn show(&self, t: &Term) -> String {
        t.display(self.sig())
    }
}

fn default_method(inc: &Inclusion) -> Method {
    if inc.declared.is_some() {
        Method::Declared
    } else {
        Method::Backend
    }
}

fn default_index_method(inc: &Inclusion) -> Method {
    if inc.index.is_some() {
        Method::Declared
    } else {
        Method::Backend
    }
}

/// Runs a command. Errors are configuration errors; budget exhaustion
/// yields a partial certificate.
pub fn run(cmd: &Command, cfg: &JobConfig) -> Result<JobOutput> {
    cfg.check()?;
    let ctx = Ctx::new(&cfg.backend)?;
    let method = cfg.method.unwrap_or(match cmd {
        Command::Index => default_index_method(ctx.inc()),
        _ => default_method(ctx.inc()),
    });
    let budget = cfg.budget_for(cmd, method);
    let mut cert = Certificate::new(cmd.name(), ctx.backend_text.clone());
    cert.push("construction", &ctx.item.name);
    cert.push("precision", cfg.precision);
    cert.push("budget", budget);
    if let Some(t) = cmd.term() {
        let (term, _) = ctx.parse(t)?;
        cert.push("term", ctx.text(&term));
    }
    if matches!(cmd, Command::Expect(_) | Command::Index) {
        cert.push("method", method.as_str());
    }
    let mut rep = Report::default();
    rep.row("command", cmd.name());
    rep.row("inclusion", &ctx.inc().label);
    let res = match cmd {
        Command::Build => run_build(&ctx, &mut cert, &mut rep),
        Command::Norm(t) => run_norm(&ctx, t, cfg, &mut cert, &mut rep),
        Command::Trace(t) => run_trace(&ctx, t, &mut cert, &mut rep),
        Command::Expect(t) => run_expect(&ctx, t, method, cfg, budget, &mut cert, &mut rep),
        Command::Index => run_index(&ctx, method, cfg, budget, &mut cert, &mut rep),
        Command::PpBasis => run_ppbasis(&ctx, cfg, budget, &mut cert, &mut rep),
        Command::NormalForm(t) => run_normal_form(&ctx, t, &mut cert, &mut rep),
        Command::Stripe(t) => run_stripe(&ctx, t, cfg, &mut cert, &mut rep),
        Command::Tower => run_tower(&ctx, cfg, &mut cert, &mut rep),
        Command::Markov => run_markov(&ctx, cfg, &mut cert, &mut rep),
    };
    let outcome = match res {
        Ok(true) => Outcome::Passed,
        Ok(false) => Outcome::Failed,
        Err(e @ (Error::BudgetExhausted { .. } | Error::PrecisionExhausted { .. })) => {
            cert.status = Status::Partial;
            cert.push("error", &e);
            rep.row("status", format!("partial: {e}"));
            Outcome::Exhausted
        }
        Err(e) => return Err(e),
    };
    if outcome == Outcome::Failed {
        rep.row("status", "FAILED");
    }
    Ok(JobOutput { report: rep.0, certificate: cert, outcome })
}

fn run_build(ctx: &Ctx, cert: &mut Certificate, rep: &mut Report) -> Result<bool> {
    let inc = ctx.inc();
    let alg = inc.ambient.alg.as_ref();
    let sub_dim = inc.sub_dim()?;
    let dim = inc.ambient.word_basis().words.len();
    cert.push("ambient", alg.name());
    cert.push("arity", inc.ambient.arity());
    cert.push("dim", dim);
    cert.push("sub-gens", inc.sub_gens.len());
    cert.push("sub-dim", sub_dim);
    let index = inc.index.as_ref().map_or("none".to_string(), |i| i.to_string());
    cert.push("index", &index);
    cert.push("declared-expectation", inc.declared.is_some());
    cert.push("concrete-m1", ctx.item.concrete.is_some());
    rep.row("ambient", alg.name());
    rep.row("generators", inc.ambient.arity());
    rep.row("dim M", dim);
    rep.row("dim N", sub_dim);
    rep.row("index", &index);
    for n in &ctx.item.notes {
        rep.row("note", n);
    }
    let mut ok = true;
    if let Built::Tlj(t) = &ctx.built {
        let r = t.check_relations();
        cert.push("relations-checked", r.checked);
        cert.push("relations-failed", r.failures.len());
        rep.row("relations", format!("{} checked, {} failed", r.checked, r.failures.len()));
        ok = r.passed();
    }
    Ok(ok)
}

fn run_norm(ctx: &Ctx, text: &str, cfg: &JobConfig, cert: &mut Certificate, rep: &mut Report) -> Result<bool> {
    let (t, in_m1) = ctx.parse(text)?;
    let k = cfg.precision;
    let (sq, flat) = if in_m1 {
        (m1_norm_sqr(ctx.inc(), &ctx.tau()?, &t)?, t.l1_bound())
    } else {
        let p = &ctx.inc().ambient;
        let mode = if p.numeric().is_some() { FlatMode::Model } else { FlatMode::Universal };
        (p.norm_sqr(&t)?, p.flat_bound(&t, mode, k)?.value)
    };
    let lo = sqrt_floor_dyadic(&sq, k);
    cert.push("algebra", if in_m1 { "m1" } else { "m" });
    cert.push("two-norm-sqr", &sq);
    cert.push("two-norm-floor", &lo);
    cert.push("op-norm-upper", &flat);
    rep.row("term", ctx.show(&t));
    rep.row("|t|_2^2", format!("{sq} = {}", decimal(&sq)));
    rep.row("|t|_2", format!("[{}, {}]", decimal(&lo), decimal(&(&lo + pow2_neg(k)))));
    rep.row("|t| <=", decimal(&flat));
    Ok(true)
}

fn run_trace(ctx: &Ctx, text: &str, cert: &mut Certificate, rep: &mut Report) -> Result<bool> {
    let (t, in_m1) = ctx.parse(text)?;
    let v = if in_m1 { m1_trace(ctx.inc(), &ctx.tau()?, &t)? } else { ctx.inc().ambient.trace_exact(&t)? };
    cert.push("algebra", if in_m1 { "m1" } else { "m" });
    cert.push("value", v.literal());
    rep.row("term", ctx.show(&t));
    rep.row("tr", &v);
    Ok(true)
}

fn basis(ctx: &Ctx, cfg: &JobConfig, budget: u64) -> Result<(PPBasis, InducedM1)> {
    let m1 = ctx.m1()?;
    let b = construct_pp_basis(ctx.inc(), &m1.presentation, cfg.search(budget))?;
    Ok((b, m1))
}

fn push_basis(ctx: &Ctx, cert: &mut Certificate, b: &PPBasis, k: u32) -> Result<()> {
    let (m, e, last) = b.resolve(k)?;
    let base = Signature::plain(ctx.base());
    for t in &m {
        cert.push("m", t.to_canonical_text(base));
    }
    for t in &e {
        cert.push("e-m", t.to_canonical_text(base));
    }
    cert.push("e-last", last.to_canonical_text(base));
    Ok(())
}

fn stored_basis(ctx: &Ctx, cert: &Certificate) -> Result<PPBasis> {
    let n = ctx.base();
    let terms = |key: &str| cert.all(key).map(|s| parse_with(s, Signature::plain(n))).collect::<Result<Vec<_>>>();
    let last = parse_with(cert.require("e-last")?, Signature::plain(n))?;
    PPBasis::from_stored(ctx.inc(), terms("m")?, terms("e-m")?, last)
}

fn run_expect(
    ctx: &Ctx,
    text: &str,
    method: Method,
    cfg: &JobConfig,
    budget: u64,
    cert: &mut Certificate,
    rep: &mut Report,
) -> Result<bool> {
    let (t, in_m1) = ctx.parse(text)?;
    if in_m1 {
        return Err(Error::Invalid("expect takes a term of M".into()));
    }
    let inc = ctx.inc();
    let k = cfg.precision;
    rep.row("term", ctx.show(&t));
    rep.row("method", method.as_str());
    let y = match method {
        Method::Backend | Method::Declared => {
            let src = if method == Method::Backend { CondExpSource::Backend } else { CondExpSource::Declared };
            if !inc.available(src) {
                return Err(Error::Invalid(format!("no {} expectation for this inclusion", method.as_str())));
            }
            let x = inc.ambient.eval(&t)?;
            inc.ambient.express(&inc.cond_exp_via(src, &x)?)
        }
        Method::Basis => {
            let (b, _) = basis(ctx, cfg, budget)?;
            push_basis(ctx, cert, &b, k)?;
            cond_exp_from_basis(inc, &b, &t, k)?
        }
        Method::Jump => {
            let z = cfg.z_words.map_or(ZSet::Spanning, ZSet::Words);
            let j = cond_exp_jump_search(inc, &t, k, z, cfg.search(budget))?;
            let src = match j.source {
                JumpSource::Enumerated(i) => format!("enumerated {i}"),
                JumpSource::Gram => "gram".into(),
            };
            cert.push("z-count", j.z_count);
            cert.push("spanning", j.spanning);
            cert.push("source", &src);
            rep.row("source", &src);
            rep.row("z-set", format!("{} words{}", j.z_count, if j.spanning { ", spanning" } else { "" }));
            if !j.spanning {
                cert.push("flag", "unsound-below-spanning-budget");
                rep.row("warning", "z-set does not span N; the result may be wrong");
            }
            j.term
        }
    };
    cert.push("result", ctx.text(&y));
    rep.row("E_N(t)", ctx.show(&y));
    Ok(true)
}

fn push_estimate(ctx: &Ctx, cert: &mut Certificate, rep: &mut Report, est: &IndexEstimate) {
    cert.push("inv-upper", &est.inv_upper);
    cert.push("lower", &est.lower);
    cert.push("candidates", est.candidates);
    if let Some((c, i, j, t)) = &est.witness {
        cert.push("witness-candidate", c);
        cert.push("witness-index", i);
        cert.push("witness-power", j);
        cert.push("witness", ctx.text(t));
    }
    for (c, r) in &est.history {
        cert.push("history", format!("{c} {r}"));
    }
    rep.row("1/index <=", format!("{} = {}", est.inv_upper, decimal(&est.inv_upper)));
    rep.row("index >=", decimal(&est.lower));
    rep.row("improvements", est.history.len());
}

fn run_index(
    ctx: &Ctx,
    method: Method,
    cfg: &JobConfig,
    budget: u64,
    cert: &mut Certificate,
    rep: &mut Report,
) -> Result<bool> {
    let inc = ctx.inc();
    rep.row("method", method.as_str());
    match method {
        Method::Declared => {
            let i = inc.index.clone().ok_or(Error::NoIndex)?;
            cert.push("value", &i);
            rep.row("index", decimal(&i));
            Ok(true)
        }
        Method::Basis => {
            let (b, m1) = basis(ctx, cfg, budget)?;
            let k = cfg.precision;
            let tol = tolerance();
            let c = verify_pp_basis(inc, &b, &tol, k, Some(&m1.presentation))?;
            let v = index_from_basis(inc, &b, k)?;
            push_basis(ctx, cert, &b, k)?;
            cert.push("value", &v);
            cert.push("tolerance", &tol);
            cert.push("verified", c.passed());
            rep.row("index", format!("{} ± {:.0e}", decimal(&v), to_f64(&tol)));
            rep.row("basis size", b.m.len());
            Ok(c.passed())
        }
        Method::Backend | Method::Jump => {
            let est = if method == Method::Jump {
                index_jump_estimate(inc, cfg.search(budget))?
            } else {
                index_pp_inf(inc, cfg.search(budget))?
            };
            push_estimate(ctx, cert, rep, &est);
            Ok(true)
        }
    }
}

fn run_ppbasis(ctx: &Ctx, cfg: &JobConfig, budget: u64, cert: &mut Certificate, rep: &mut Report) -> Result<bool> {
    let inc = ctx.inc();
    let (b, m1) = basis(ctx, cfg, budget)?;
    let k = cfg.precision;
    let tol = tolerance();
    let c = verify_pp_basis(inc, &b, &tol, k, Some(&m1.presentation))?;
    push_basis(ctx, cert, &b, k)?;
    cert.push("n", b.n);
    cert.push("index", &c.index);
    cert.push("tolerance", &tol);
    for cl in &c.clauses {
        cert.push("clause", format!("{} {} {}", if cl.passed { "pass" } else { "fail" }, residual(cl.residual), cl.name));
    }
    let base = Signature::plain(ctx.base());
    for (j, t) in c.terms.iter().enumerate() {
        rep.row(&format!("m{}", j + 1), t.display(base));
    }
    rep.row("index", decimal(&c.index));
    rep.row("clauses", format!("{} ({} failed)", c.clauses.len(), c.clauses.iter().filter(|c| !c.passed).count()));
    rep.row("max residual", residual(c.max_residual()));
    Ok(c.passed())
}

fn run_normal_form(ctx: &Ctx, text: &str, cert: &mut Certificate, rep: &mut Report) -> Result<bool> {
    let (t, _) = ctx.parse(text)?;
    let t = t.with_arity(ctx.base() + 1);
    let nf = to_normal_form(&t, ctx.base())?;
    let shown = nf.display(ctx.sig()).to_string();
    let decreasing = nf.e_counts.iter().all(|c| c.windows(2).all(|w| w[1] < w[0]));
    cert.push("normal-form", &shown);
    cert.push("summands", nf.summands.len());
    cert.push("e-decreasing", decreasing);
    rep.row("term", ctx.show(&t));
    rep.row("normal form", &shown);
    let mut ok = decreasing;
    if ctx.inc().index.is_some() {
        let m1 = ctx.m1()?;
        let p = &m1.presentation;
        let d = p.alg.sub(&p.eval(&t)?, &p.eval(&nf.to_term(ctx.inc())?)?);
        let agrees = p.alg.is_zero_elem(&d);
        cert.push("agrees-in-m1", agrees);
        rep.row("check in M1", if agrees { "exact" } else { "MISMATCH" });
        ok &= agrees;
    }
    Ok(ok)
}

/// `m·e = v·e` in `M₁`.
fn stripe_holds(ctx: &Ctx, m1: &InducedM1, v: &Term, m: &Term) -> Result<bool> {
    let p = &m1.presentation;
    let n = ctx.base() + 1;
    let e = Term::gen(n, n - 1);
    let d = p.eval(&m.with_arity(n).mul(&e).sub(&v.mul(&e)))?;
    Ok(p.alg.is_zero_elem(&d))
}

fn run_stripe(ctx: &Ctx, text: &str, cfg: &JobConfig, cert: &mut Certificate, rep: &mut Report) -> Result<bool> {
    let (v, _) = ctx.parse(text)?;
    let v = v.with_arity(ctx.base() + 1);
    let m1 = ctx.m1()?;
    let x = m1.presentation.eval(&v)?;
    let m = strip_e(ctx.inc(), &m1.presentation, &ComputablePoint::from_term(v.clone(), Some(x)), cfg.precision)?;
    let ok = stripe_holds(ctx, &m1, &v, &m)?;
    cert.push("result", ctx.text(&m));
    cert.push("holds", ok);
    rep.row("v", ctx.show(&v));
    rep.row("m", ctx.show(&m));
    rep.row("m*e = v*e", if ok { "exact" } else { "FAILED" });
    Ok(ok)
}

fn run_tower(ctx: &Ctx, cfg: &JobConfig, cert: &mut Certificate, rep: &mut Report) -> Result<bool> {
    let levels = jones_tower(ctx.inc(), cfg.depth, ctx.item.concrete.clone())?;
    cert.push("depth", cfg.depth);
    let mut ok = true;
    for l in &levels {
        let tr_e = jones_trace(&l.presentation)?;
        let good = &tr_e * &l.index == Rational::one();
        ok &= good;
        cert.push("level", format!("{} index {} tr-e {} {}", l.level, l.index, tr_e, if good { "ok" } else { "bad" }));
        rep.row(&format!("M{} in M{}", l.level - 1, l.level), format!("index {}  tr(e{}) = {}", l.index, l.level, tr_e));
    }
    Ok(ok)
}

fn run_markov(ctx: &Ctx, cfg: &JobConfig, cert: &mut Certificate, rep: &mut Report) -> Result<bool> {
    let Built::Tlj(t) = &ctx.built else {
        return Err(Error::Invalid("markov needs a tlj gallery entry".into()));
    };
    let i = cfg.markov_i.unwrap_or(t.alg.k - 1);
    let r = verify_markov(&t.alg, i, cfg.markov_len)?;
    cert.push("width", t.alg.k);
    cert.push("delta", &t.alg.delta);
    cert.push("i", i);
    cert.push("max-len", cfg.markov_len);
    cert.push("t", &r.t);
    cert.push("words", r.words);
    let fail = r.failure.as_ref().map_or("none".to_string(), |w| {
        w.iter().map(|g| format!("e{g}")).collect::<Vec<_>>().join("*")
    });
    cert.push("failure", &fail);
    rep.row("generator", format!("e{i}"));
    rep.row("t", &r.t);
    rep.row("words", r.words);
    rep.row("failure", &fail);
    Ok(r.passed())
}

/// Job configuration recorded in a certificate.
fn recorded(cert: &Certificate, file: BackendFile) -> Result<(Command, JobConfig)> {
    let cmd = Command::from_parts(&cert.kind, cert.get("term").map(str::to_string))?;
    let mut cfg = JobConfig::new(file);
    cfg.precision = cert.parse_field("precision")?;
    cfg.budget = Some(cert.parse_field("budget")?);
    cfg.method = cert.get("method").map(str::parse).transpose()?;
    if let Some(d) = cert.get("depth") {
        cfg.depth = d.parse().map_err(|_| Error::Format("bad `depth`".into()))?;
    }
    if cmd == Command::Markov {
        cfg.markov_i = Some(cert.parse_field("i")?);
        cfg.markov_len = cert.parse_field("max-len")?;
    }
    if cert.get("spanning") == Some("false") {
        cfg.z_words = Some(cert.parse_field("z-count")?);
    }
    Ok((cmd, cfg))
}

fn rational_field(cert: &Certificate, key: &str) -> Result<Rational> {
    parse_rational(cert.require(key)?).ok_or_else(|| Error::Format(format!("bad rational for `{key}`")))
}

/// Re-checks a certificate. The report lists each check; the outcome is
/// `Failed` when any check fails.
pub fn verify(cert: &Certificate, workers: usize) -> Result<JobOutput> {
    let file = parse_backend(&cert.backend)?;
    let (cmd, mut cfg) = recorded(cert, file)?;
    cfg.workers = workers;
    let ctx = Ctx::new(&cfg.backend)?;
    let mut rep = Report::default();
    rep.row("certificate", &cert.kind);
    rep.row("inclusion", &ctx.inc().label);
    let mut checks: Vec<(String, bool)> = Vec::new();
    if cert.status == Status::Partial {
        rep.row("status", format!("partial: {}", cert.get("error").unwrap_or("budget exhausted")));
        checks.push(("backend rebuilds".into(), true));
    } else {
        match &cmd {
            Command::Expect(t) => verify_expect(&ctx, cert, &cfg, t, &mut checks)?,
            Command::Index => verify_index(&ctx, cert, &cfg, &mut checks)?,
            Command::PpBasis => verify_ppbasis(&ctx, cert, &cfg, &mut checks)?,
            Command::Stripe(t) => {
                let (v, _) = ctx.parse(t)?;
                let (m, _) = ctx.parse(cert.require("result")?)?;
                let ok = stripe_holds(&ctx, &ctx.m1()?, &v.with_arity(ctx.base() + 1), &m.with_arity(ctx.base()))?;
                checks.push(("m*e = v*e in M1".into(), ok));
            }
            _ => {
                // deterministic recomputation of every field
                let again = run(&cmd, &cfg)?;
                checks.push(("recomputed fields agree".into(), again.certificate.fields == cert.fields));
                checks.push(("recomputed checks pass".into(), again.outcome == Outcome::Passed));
            }
        }
    }
    for (name, ok) in &checks {
        rep.row(if *ok { "ok" } else { "FAIL" }, name);
    }
    let outcome = if checks.iter().all(|c| c.1) { Outcome::Passed } else { Outcome::Failed };
    Ok(JobOutput { report: rep.0, certificate: cert.clone(), outcome })
}

fn verify_expect(
    ctx: &Ctx,
    cert: &Certificate,
    cfg: &JobConfig,
    text: &str,
    checks: &mut Vec<(String, bool)>,
) -> Result<()> {
    let inc = ctx.inc();
    let p = &inc.ambient;
    let alg = p.alg.as_ref();
    let (t, _) = ctx.parse(text)?;
    let (y, _) = ctx.parse(cert.require("result")?)?;
    let (t, y) = (t.with_arity(ctx.base()), y.with_arity(ctx.base()));
    let x = p.eval(&t)?;
    let ye = p.eval(&y)?;
    let k = cfg.precision;
    let bound = pow2_neg(2 * k);
    if cert.get("spanning") == Some("false") {
        // only the recorded z-set is checked
        let n: usize = cert.parse_field("z-count")?;
        let d = alg.sub(&x, &ye);
        let words = inc.sub_words()?;
        let ok = words.iter().take(n).all(|(_, z)| alg.trace(&alg.mul(&d, z)).norm_sqr() < bound);
        checks.push((format!("|tr((t - y) z)| < 2^-{k} on {n} z-words"), ok));
        checks.push(("flagged unsound below spanning budget".into(), cert.get("flag").is_some()));
    } else {
        let e = inc.cond_exp_backend(&x)?;
        let r = alg.two_norm_sqr(&alg.sub(&e, &ye));
        checks.push((format!("|E_N(t) - result|_2 < 2^-{k} against the backend"), r < bound));
        let in_n = inc.backend()?.basis.project(alg, &ye);
        checks.push(("result lies in N".into(), alg.is_zero_elem(&alg.sub(&in_n, &ye))));
    }
    Ok(())
}

fn verify_ppbasis(ctx: &Ctx, cert: &Certificate, cfg: &JobConfig, checks: &mut Vec<(String, bool)>) -> Result<()> {
    let b = stored_basis(ctx, cert)?;
    let tol = rational_field(cert, "tolerance")?;
    let m1 = ctx.m1()?;
    let c = verify_pp_basis(ctx.inc(), &b, &tol, cfg.precision, Some(&m1.presentation))?;
    for cl in &c.clauses {
        checks.push((format!("{} (residual {})", cl.name, residual(cl.residual)), cl.passed));
    }
    if let Some(i) = cert.get("index") {
        checks.push(("recorded index".into(), parse_rational(i) == Some(c.index.clone())));
    }
    Ok(())
}

fn verify_index(ctx: &Ctx, cert: &Certificate, cfg: &JobConfig, checks: &mut Vec<(String, bool)>) -> Result<()> {
    let inc = ctx.inc();
    match cfg.method.unwrap_or(Method::Declared) {
        Method::Declared => {
            let v = rational_field(cert, "value")?;
            checks.push(("declared index".into(), inc.index.as_ref() == Some(&v)));
        }
        Method::Basis => {
            verify_ppbasis(ctx, cert, cfg, checks)?;
            let b = stored_basis(ctx, cert)?;
            let v = rational_field(cert, "value")?;
            let again = index_from_basis(inc, &b, cfg.precision)?;
            checks.push(("tr(sum mj mj*) equals the recorded value".into(), again == v));
        }
        Method::Backend | Method::Jump => {
            let inv = rational_field(cert, "inv-upper")?;
            let lower = rational_field(cert, "lower")?;
            checks.push(("lower bound is 1/inv-upper".into(), !inv.is_zero() && lower == Rational::one() / &inv));
            match cert.get("witness") {
                Some(w) => {
                    let (y, _) = ctx.parse(w)?;
                    let j: u32 = cert.parse_field("witness-power")?;
                    let i: u64 = cert.parse_field("witness-index")?;
                    let x = PositiveCandidates::default().exact(inc, &y.with_arity(ctx.base()), j)?;
                    let r = pp_ratio(inc, &x)?;
                    checks.push(("witness ratio equals inv-upper".into(), r == inv));
                    let en = inc.ambient.enumerator();
                    checks.push(("witness sits at its enumeration index".into(), en.term_at(i)? == y.with_arity(ctx.base())));
                }
                None => checks.push(("no witness: inv-upper is 1".into(), inv == Rational::one())),
            }
            let hist: Vec<Rational> = cert
                .all("history")
                .map(|h| h.split_once(' ').and_then(|(_, r)| parse_rational(r)))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::Format("bad `history`".into()))?;
            checks.push(("history is decreasing".into(), hist.windows(2).all(|w| w[1] < w[0])));
            checks.push(("estimate is positive".into(), inv.is_positive()));
        }
    }
    Ok(())
}
