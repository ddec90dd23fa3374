use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_rational::BigRational;
use serde_json::Value;

use super::progression::RatProgression;
use crate::algebra::{Element, MonoidCtx};
use crate::error::{Error, Result};
use crate::finset::FinSubset;

/// Largest set a sequence will materialize unless told otherwise.
pub const DEFAULT_SIZE_CAP: usize = 4_000_000;

/// Properties a sequence claims; each is independently checkable.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Flags {
    pub folner: bool,
    pub locally_monotileable: bool,
    pub congruent: bool,
    pub exhaustive: bool,
}

impl Flags {
    pub const NONE: Flags = Flags { folner: false, locally_monotileable: false, congruent: false, exhaustive: false };

    pub fn new(folner: bool, locally_monotileable: bool, congruent: bool, exhaustive: bool) -> Self {
        Flags { folner, locally_monotileable, congruent, exhaustive }
    }
}

/// Builder name and parameters a sequence came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub builder: String,
    pub params: Value,
}

impl Provenance {
    pub fn new(builder: &str, params: Value) -> Self {
        Provenance { builder: builder.to_string(), params }
    }
}

type LevelFn = dyn Fn(usize) -> Result<FinSubset> + Send + Sync;
type SizeFn = dyn Fn(usize) -> Option<BigUint> + Send + Sync;
type ProgFn = dyn Fn(usize) -> Option<RatProgression> + Send + Sync;

/// A lazily generated, memoized sequence `n ↦ F_n` of finite subsets.
#[derive(Clone)]
pub struct FolnerSeq {
    ctx: MonoidCtx,
    level: Arc<LevelFn>,
    size: Option<Arc<SizeFn>>,
    progression: Option<Arc<ProgFn>>,
    depth: Option<usize>,
    flags: Flags,
    provenance: Provenance,
    size_cap: usize,
    memo: Arc<Mutex<HashMap<usize, Arc<FinSubset>>>>,
}

impl fmt::Debug for FolnerSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FolnerSeq")
            .field("ctx", &self.ctx)
            .field("builder", &self.provenance.builder)
            .field("params", &self.provenance.params)
            .field("flags", &self.flags)
            .finish()
    }
}

impl FolnerSeq {
    pub fn from_fn<F>(ctx: &MonoidCtx, flags: Flags, provenance: Provenance, level: F) -> Self
    where
        F: Fn(usize) -> Result<FinSubset> + Send + Sync + 'static,
    {
        FolnerSeq {
            ctx: ctx.clone(),
            level: Arc::new(level),
            size: None,
            progression: None,
            depth: None,
            flags,
            provenance,
            size_cap: DEFAULT_SIZE_CAP,
            memo: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    /// A finite list of levels; asking beyond the list is a budget error.
    pub fn listed(ctx: &MonoidCtx, levels: Vec<FinSubset>, flags: Flags, provenance: Provenance) -> Result<Self> {
        for (n, l) in levels.iter().enumerate() {
            if l.ctx() != ctx {
                return Err(Error::ContextMismatch(format!("level {n} lives in {}", l.ctx())));
            }
            if l.is_empty() {
                return Err(Error::Invalid(format!("level {n} is empty")));
            }
        }
        let depth = levels.len();
        let levels = Arc::new(levels);
        let mut s = Self::from_fn(ctx, flags, provenance, move |n| {
            levels
                .get(n)
                .cloned()
                .ok_or_else(|| Error::Budget(format!("sequence only has {depth} recorded levels")))
        });
        s.depth = Some(depth);
        Ok(s)
    }

    pub fn with_size<F>(mut self, f: F) -> Self
    where
        F: Fn(usize) -> Option<BigUint> + Send + Sync + 'static,
    {
        self.size = Some(Arc::new(f));
        self
    }

    pub fn with_progression<F>(mut self, f: F) -> Self
    where
        F: Fn(usize) -> Option<RatProgression> + Send + Sync + 'static,
    {
        self.progression = Some(Arc::new(f));
        self
    }

    pub fn with_size_cap(mut self, cap: usize) -> Self {
        self.size_cap = cap;
        self.memo = Arc::new(Mutex::new(HashMap::new()));
        self
    }

    pub fn with_flags(mut self, flags: Flags) -> Self {
        self.flags = flags;
        self
    }

    pub fn ctx(&self) -> &MonoidCtx {
        &self.ctx
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn size_cap(&self) -> usize {
        self.size_cap
    }

    /// Number of available levels for listed sequences.
    pub fn depth(&self) -> Option<usize> {
        self.depth
    }

    /// `|F_n|`, without materializing when a closed form is known.
    pub fn size(&self, n: usize) -> Result<BigUint> {
        if let Some(s) = self.size.as_ref().and_then(|f| f(n)) {
            return Ok(s);
        }
        Ok(BigUint::from(self.gen(n)?.len()))
    }

    /// The symbolic form of `F_n` for rational sequences.
    pub fn progression(&self, n: usize) -> Option<RatProgression> {
        self.progression.as_ref().and_then(|f| f(n))
    }

    /// `F_n`, materialized and cached.
    pub fn gen(&self, n: usize) -> Result<Arc<FinSubset>> {
        if let Some(f) = self.memo.lock().unwrap().get(&n) {
            return Ok(f.clone());
        }
        if let Some(s) = self.size.as_ref().and_then(|f| f(n)) {
            if s > BigUint::from(self.size_cap) {
                return Err(Error::Budget(format!(
                    "{} level {n} has {s} elements, materialization cap is {}",
                    self.provenance.builder, self.size_cap
                )));
            }
        }
        let f = (self.level)(n)?;
        if f.is_empty() {
            return Err(Error::Invalid(format!("{} level {n} is empty", self.provenance.builder)));
        }
        if f.len() > self.size_cap {
            return Err(Error::Budget(format!(
                "{} level {n} has {} elements, materialization cap is {}",
                self.provenance.builder,
                f.len(),
                self.size_cap
            )));
        }
        let f = Arc::new(f);
        // concurrent fills compute the same value, so either insert wins
        self.memo.lock().unwrap().entry(n).or_insert_with(|| f.clone());
        Ok(f)
    }

    /// `(F_{k_n})_n`.
    pub fn subsequence(&self, k: Vec<usize>) -> FolnerSeq {
        let base = self.clone();
        let k = Arc::new(k);
        let k2 = k.clone();
        let base2 = self.clone();
        let base3 = self.clone();
        let k3 = k.clone();
        let prov = Provenance::new(
            &format!("{}[subsequence]", self.provenance.builder),
            serde_json::json!({"base": self.provenance.params, "indices": *k}),
        );
        let mut s = FolnerSeq::from_fn(&self.ctx, self.flags, prov, move |n| {
            let kn = *k.get(n).ok_or_else(|| Error::Budget(format!("subsequence has {} indices", k.len())))?;
            Ok((*base.gen(kn)?).clone())
        })
        .with_size(move |n| k2.get(n).and_then(|&kn| base2.size(kn).ok()))
        .with_progression(move |n| k3.get(n).and_then(|&kn| base3.progression(kn)));
        s.size_cap = self.size_cap;
        s.depth = Some(s_len(&s.provenance));
        s
    }

    /// `|F_n s ∖ F_n| / |F_n|`, symbolically when possible.
    pub fn defect_at(&self, n: usize, s: &Element) -> Result<BigRational> {
        if let (Some(p), Element::Rational(x)) = (self.progression(n), s) {
            return Ok(p.defect(x));
        }
        let f = self.gen(n)?;
        super::defect(&f, s)
    }
}

fn s_len(p: &Provenance) -> usize {
    p.params["indices"].as_array().map_or(0, |a| a.len())
}
