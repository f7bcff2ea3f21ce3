//! Wire coefficient groups (trivial, finite cyclic, free) and graph-product
//! words over them.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::presentation::{Letter, SemigroupPresentation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("group mismatch: {0}")]
    Mismatch(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("malformed element token `{0}`")]
    Malformed(String),
    #[error("malformed group spec `{0}`")]
    BadSpec(String),
    #[error("vertex {0} is not in the graph")]
    MissingVertex(usize),
    #[error("letter `{0}` has no coefficient spec")]
    MissingLetter(String),
}

/// Kind of group attached to one letter (or one graph vertex).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupSpec {
    Trivial,
    Cyclic(u32),
    /// Free group on the named generators.
    Free(Vec<String>),
}

/// One letter of a reduced free word: generator index and whether it is inverted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeLetter {
    pub generator: u32,
    pub inverse: bool,
}

impl FreeLetter {
    pub fn inv(self) -> Self {
        FreeLetter { generator: self.generator, inverse: !self.inverse }
    }
}

/// Element of a coefficient group, always kept in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Unit,
    Residue { modulus: u32, value: u32 },
    Free(Vec<FreeLetter>),
}

const CYCLIC_GENERATOR: &str = "c";

impl GroupSpec {
    /// `R1..Rr`, the free group used for relation labels.
    pub fn free_rank(rank: usize) -> Self {
        GroupSpec::Free((1..=rank).map(|i| format!("R{i}")).collect())
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupSpec::Trivial => GroupElement::Unit,
            GroupSpec::Cyclic(k) => GroupElement::Residue { modulus: *k, value: 0 },
            GroupSpec::Free(_) => GroupElement::Free(Vec::new()),
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, GroupSpec::Trivial)
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, GroupSpec::Free(g) if !g.is_empty())
    }

    /// Group order, `None` for nontrivial free groups.
    pub fn order(&self) -> Option<usize> {
        match self {
            GroupSpec::Trivial => Some(1),
            GroupSpec::Cyclic(k) => Some(*k as usize),
            GroupSpec::Free(g) if g.is_empty() => Some(1),
            GroupSpec::Free(_) => None,
        }
    }

    /// All elements of a finite group, identity first.
    pub fn elements(&self) -> Option<Vec<GroupElement>> {
        match self {
            GroupSpec::Trivial => Some(vec![GroupElement::Unit]),
            GroupSpec::Cyclic(k) => {
                Some((0..*k).map(|value| GroupElement::Residue { modulus: *k, value }).collect())
            }
            GroupSpec::Free(g) if g.is_empty() => Some(vec![GroupElement::Free(Vec::new())]),
            GroupSpec::Free(_) => None,
        }
    }

    pub fn contains(&self, e: &GroupElement) -> bool {
        match (self, e) {
            (GroupSpec::Trivial, GroupElement::Unit) => true,
            (GroupSpec::Cyclic(k), GroupElement::Residue { modulus, value }) => modulus == k && value < k,
            (GroupSpec::Free(g), GroupElement::Free(w)) => {
                w.iter().all(|l| (l.generator as usize) < g.len()) && w.windows(2).all(|p| p[0] != p[1].inv())
            }
            _ => false,
        }
    }

    /// Generator element `R{i}` (0-based index) of a free group.
    pub fn free_generator(&self, i: usize, inverse: bool) -> Result<GroupElement, CoeffError> {
        match self {
            GroupSpec::Free(g) if i < g.len() => {
                Ok(GroupElement::Free(vec![FreeLetter { generator: i as u32, inverse }]))
            }
            _ => Err(CoeffError::UnknownGenerator(format!("#{i}"))),
        }
    }

    /// Uniform element for finite groups; for free groups a random reduced
    /// word of length at most `max_len`.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, max_len: usize) -> GroupElement {
        match self {
            GroupSpec::Trivial => GroupElement::Unit,
            GroupSpec::Cyclic(k) => GroupElement::Residue { modulus: *k, value: rng.gen_range(0..*k) },
            GroupSpec::Free(g) => {
                if g.is_empty() {
                    return GroupElement::Free(Vec::new());
                }
                let len = rng.gen_range(0..=max_len);
                let mut w: Vec<FreeLetter> = Vec::with_capacity(len);
                while w.len() < len {
                    let l = FreeLetter { generator: rng.gen_range(0..g.len() as u32), inverse: rng.gen() };
                    if w.last() != Some(&l.inv()) {
                        w.push(l);
                    }
                }
                GroupElement::Free(w)
            }
        }
    }

    pub fn format_element(&self, e: &GroupElement) -> String {
        match e {
            GroupElement::Unit => "1".into(),
            GroupElement::Residue { value: 0, .. } => "1".into(),
            GroupElement::Residue { value, .. } => vec![CYCLIC_GENERATOR; *value as usize].join("."),
            GroupElement::Free(w) if w.is_empty() => "1".into(),
            GroupElement::Free(w) => {
                let names: &[String] = match self {
                    GroupSpec::Free(g) => g,
                    _ => &[],
                };
                w.iter()
                    .map(|l| {
                        let name = names
                            .get(l.generator as usize)
                            .cloned()
                            .unwrap_or_else(|| format!("R{}", l.generator + 1));
                        if l.inverse {
                            format!("{name}^-1")
                        } else {
                            name
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(".")
            }
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Trivial => write!(f, "trivial"),
            GroupSpec::Cyclic(k) => write!(f, "cyclic:{k}"),
            GroupSpec::Free(g) => {
                if *self == GroupSpec::free_rank(g.len()) {
                    write!(f, "free:{}", g.len())
                } else {
                    write!(f, "free:{}", g.join(","))
                }
            }
        }
    }
}

impl std::str::FromStr for GroupSpec {
    type Err = CoeffError;

    /// `trivial`, `cyclic:k` (k ≥ 2), `free:r` (generators R1..Rr) or
    /// `free:a,b,...` (named generators).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CoeffError::BadSpec(s.to_string());
        let s = s.trim();
        if s == "trivial" {
            return Ok(GroupSpec::Trivial);
        }
        if let Some(k) = s.strip_prefix("cyclic:") {
            let k: u32 = k.trim().parse().map_err(|_| bad())?;
            if k < 2 {
                return Err(bad());
            }
            return Ok(GroupSpec::Cyclic(k));
        }
        if let Some(rest) = s.strip_prefix("free:") {
            let rest = rest.trim();
            if let Ok(r) = rest.parse::<usize>() {
                return Ok(GroupSpec::free_rank(r));
            }
            let names: Vec<String> = rest.split(',').map(|t| t.trim().to_string()).collect();
            if names.iter().any(|n| !crate::presentation::is_identifier(n) || n == "1") {
                return Err(bad());
            }
            let unique: BTreeSet<_> = names.iter().collect();
            if unique.len() != names.len() {
                return Err(bad());
            }
            return Ok(GroupSpec::Free(names));
        }
        Err(bad())
    }
}

impl GroupElement {
    pub fn is_identity(&self) -> bool {
        match self {
            GroupElement::Unit => true,
            GroupElement::Residue { value, .. } => *value == 0,
            GroupElement::Free(w) => w.is_empty(),
        }
    }

    /// Identity of the same group as `self`.
    pub fn identity_like(&self) -> GroupElement {
        match self {
            GroupElement::Unit => GroupElement::Unit,
            GroupElement::Residue { modulus, .. } => GroupElement::Residue { modulus: *modulus, value: 0 },
            GroupElement::Free(_) => GroupElement::Free(Vec::new()),
        }
    }

    /// Number of letters in the normal form (free length, residue, or 0).
    pub fn word_length(&self) -> usize {
        match self {
            GroupElement::Unit => 0,
            GroupElement::Residue { value, .. } => *value as usize,
            GroupElement::Free(w) => w.len(),
        }
    }
}

pub fn coeff_multiply(a: &GroupElement, b: &GroupElement) -> Result<GroupElement, CoeffError> {
    match (a, b) {
        (GroupElement::Unit, GroupElement::Unit) => Ok(GroupElement::Unit),
        (GroupElement::Residue { modulus: m, value: x }, GroupElement::Residue { modulus: n, value: y }) if m == n => {
            Ok(GroupElement::Residue { modulus: *m, value: (x + y) % m })
        }
        (GroupElement::Free(x), GroupElement::Free(y)) => {
            let mut out = x.clone();
            for &l in y {
                if out.last() == Some(&l.inv()) {
                    out.pop();
                } else {
                    out.push(l);
                }
            }
            Ok(GroupElement::Free(out))
        }
        _ => Err(CoeffError::Mismatch(format!("{a:?} vs {b:?}"))),
    }
}

pub fn coeff_invert(a: &GroupElement) -> GroupElement {
    match a {
        GroupElement::Unit => GroupElement::Unit,
        GroupElement::Residue { modulus, value } => {
            GroupElement::Residue { modulus: *modulus, value: (modulus - value) % modulus }
        }
        GroupElement::Free(w) => GroupElement::Free(w.iter().rev().map(|l| l.inv()).collect()),
    }
}

/// Parses `1` or `.`-joined tokens `gen`, `gen^-1`, `gen^n`. Cyclic groups use
/// the single generator `c`.
pub fn coeff_parse(spec: &GroupSpec, text: &str) -> Result<GroupElement, CoeffError> {
    let text = text.trim();
    let mut acc = spec.identity();
    if text == "1" {
        return Ok(acc);
    }
    for token in text.split('.') {
        let token = token.trim();
        let (name, power) = match token.split_once('^') {
            Some((n, p)) => (n.trim(), p.trim().parse::<i64>().map_err(|_| CoeffError::Malformed(token.into()))?),
            None => (token, 1),
        };
        if name.is_empty() {
            return Err(CoeffError::Malformed(token.into()));
        }
        let step = match spec {
            GroupSpec::Trivial => return Err(CoeffError::UnknownGenerator(name.into())),
            GroupSpec::Cyclic(k) => {
                if name != CYCLIC_GENERATOR {
                    return Err(CoeffError::UnknownGenerator(name.into()));
                }
                GroupElement::Residue { modulus: *k, value: power.rem_euclid(*k as i64) as u32 }
            }
            GroupSpec::Free(g) => {
                let i = g.iter().position(|s| s == name).ok_or_else(|| CoeffError::UnknownGenerator(name.into()))?;
                let l = FreeLetter { generator: i as u32, inverse: power < 0 };
                GroupElement::Free(vec![l; power.unsigned_abs() as usize])
            }
        };
        acc = coeff_multiply(&acc, &step)?;
    }
    Ok(acc)
}

/// The family of coefficient groups, one per alphabet letter.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoefficientSystem {
    specs: Vec<GroupSpec>,
}

impl CoefficientSystem {
    pub fn trivial(p: &SemigroupPresentation) -> Self {
        CoefficientSystem { specs: vec![GroupSpec::Trivial; p.alphabet().len()] }
    }

    pub fn uniform(p: &SemigroupPresentation, spec: GroupSpec) -> Self {
        CoefficientSystem { specs: vec![spec; p.alphabet().len()] }
    }

    pub fn new(p: &SemigroupPresentation, specs: Vec<GroupSpec>) -> Result<Self, CoeffError> {
        if specs.len() != p.alphabet().len() {
            return Err(CoeffError::Mismatch(format!(
                "{} specs for {} letters",
                specs.len(),
                p.alphabet().len()
            )));
        }
        Ok(CoefficientSystem { specs })
    }

    /// Applies `letter=spec` assignments on top of the trivial system.
    pub fn from_assignments(p: &SemigroupPresentation, assignments: &[(String, GroupSpec)]) -> Result<Self, CoeffError> {
        let mut sys = Self::trivial(p);
        for (name, spec) in assignments {
            let l = p.letter(name).ok_or_else(|| CoeffError::MissingLetter(name.clone()))?;
            sys.specs[l.index()] = spec.clone();
        }
        Ok(sys)
    }

    pub fn spec(&self, l: Letter) -> &GroupSpec {
        &self.specs[l.index()]
    }

    pub fn specs(&self) -> &[GroupSpec] {
        &self.specs
    }

    pub fn all_trivial(&self) -> bool {
        self.specs.iter().all(|s| s.order() == Some(1))
    }

    pub fn all_finite(&self) -> bool {
        self.specs.iter().all(|s| s.is_finite())
    }

    pub fn identity(&self, l: Letter) -> GroupElement {
        self.specs[l.index()].identity()
    }
}

/// Simplicial graph with a group at each vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphProduct {
    vertices: Vec<GroupSpec>,
    adjacent: Vec<Vec<bool>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub vertex: usize,
    pub element: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GraphProductWord {
    pub syllables: Vec<Syllable>,
}

impl GraphProductWord {
    pub fn new(syllables: Vec<Syllable>) -> Self {
        GraphProductWord { syllables }
    }

    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }
}

impl GraphProduct {
    /// Edges are unordered pairs of distinct vertices; loops are rejected.
    pub fn new(vertices: Vec<GroupSpec>, edges: &[(usize, usize)]) -> Result<Self, CoeffError> {
        let n = vertices.len();
        let mut adjacent = vec![vec![false; n]; n];
        for &(a, b) in edges {
            if a >= n {
                return Err(CoeffError::MissingVertex(a));
            }
            if b >= n {
                return Err(CoeffError::MissingVertex(b));
            }
            if a == b {
                return Err(CoeffError::Mismatch(format!("loop at vertex {a}")));
            }
            adjacent[a][b] = true;
            adjacent[b][a] = true;
        }
        Ok(GraphProduct { vertices, adjacent })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn spec(&self, v: usize) -> &GroupSpec {
        &self.vertices[v]
    }

    pub fn commute(&self, a: usize, b: usize) -> bool {
        self.adjacent[a][b]
    }

    fn check(&self, w: &GraphProductWord) -> Result<(), CoeffError> {
        for s in &w.syllables {
            let spec = self.vertices.get(s.vertex).ok_or(CoeffError::MissingVertex(s.vertex))?;
            if !spec.contains(&s.element) {
                return Err(CoeffError::Mismatch(format!("syllable {s:?} not in vertex group")));
            }
        }
        Ok(())
    }

    /// Sort key for syllables: vertex order, then element serialization.
    pub fn syllable_key(&self, s: &Syllable) -> (usize, String) {
        (s.vertex, self.vertices[s.vertex].format_element(&s.element))
    }

    pub fn format_word(&self, w: &GraphProductWord) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.syllables
            .iter()
            .map(|s| format!("({},{})", s.vertex, self.vertices[s.vertex].format_element(&s.element)))
            .collect::<Vec<_>>()
            .join("")
    }
}

fn push_syllable(gp: &GraphProduct, out: &mut Vec<Syllable>, s: Syllable) {
    if s.element.is_identity() {
        return;
    }
    for j in (0..out.len()).rev() {
        let v = out[j].vertex;
        if v == s.vertex {
            let merged = coeff_multiply(&out[j].element, &s.element).expect("same vertex group");
            if merged.is_identity() {
                out.remove(j);
            } else {
                out[j].element = merged;
            }
            return;
        }
        if !gp.commute(v, s.vertex) {
            break;
        }
    }
    out.push(s);
}

/// Reduced form (in the canonical shuffle order).
pub fn gp_reduce(gp: &GraphProduct, w: &GraphProductWord) -> Result<GraphProductWord, CoeffError> {
    gp.check(w)?;
    let mut out = Vec::with_capacity(w.len());
    for s in &w.syllables {
        push_syllable(gp, &mut out, s.clone());
    }
    Ok(canonical_shuffle(gp, &GraphProductWord::new(out)))
}

/// Indices of syllables that some sequence of shuffles brings to the front.
fn available(gp: &GraphProduct, syllables: &[Syllable]) -> Vec<usize> {
    (0..syllables.len())
        .filter(|&i| syllables[..i].iter().all(|t| gp.commute(t.vertex, syllables[i].vertex)))
        .collect()
}

/// Lexicographically least shuffle of an already reduced word.
pub fn canonical_shuffle(gp: &GraphProduct, w: &GraphProductWord) -> GraphProductWord {
    let mut rest = w.syllables.clone();
    let mut out = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let best = available(gp, &rest)
            .into_iter()
            .min_by_key(|&i| gp.syllable_key(&rest[i]))
            .expect("nonempty word has an available syllable");
        out.push(rest.remove(best));
    }
    GraphProductWord::new(out)
}

pub fn gp_equal(gp: &GraphProduct, a: &GraphProductWord, b: &GraphProductWord) -> Result<bool, CoeffError> {
    Ok(gp_reduce(gp, a)? == gp_reduce(gp, b)?)
}

pub fn gp_multiply(gp: &GraphProduct, a: &GraphProductWord, b: &GraphProductWord) -> Result<GraphProductWord, CoeffError> {
    let mut all = a.syllables.clone();
    all.extend(b.syllables.iter().cloned());
    gp_reduce(gp, &GraphProductWord::new(all))
}

pub fn gp_invert(w: &GraphProductWord) -> GraphProductWord {
    GraphProductWord::new(
        w.syllables
            .iter()
            .rev()
            .map(|s| Syllable { vertex: s.vertex, element: coeff_invert(&s.element) })
            .collect(),
    )
}

/// Head syllables and support of the element represented by `w`.
pub fn gp_head_support(
    gp: &GraphProduct,
    w: &GraphProductWord,
) -> Result<(BTreeSet<Syllable>, BTreeSet<usize>), CoeffError> {
    let r = gp_reduce(gp, w)?;
    let head = available(gp, &r.syllables).into_iter().map(|i| r.syllables[i].clone()).collect();
    let support = r.syllables.iter().map(|s| s.vertex).collect();
    Ok((head, support))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn naive_free_reduce(mut w: Vec<FreeLetter>) -> Vec<FreeLetter> {
        loop {
            let pos = w.windows(2).position(|p| p[0] == p[1].inv());
            match pos {
                Some(i) => {
                    w.drain(i..i + 2);
                }
                None => return w,
            }
        }
    }

    fn free2() -> GroupSpec {
        GroupSpec::free_rank(2)
    }

    #[test]
    fn free_inverse_cancels() {
        let g = coeff_parse(&free2(), "R1").unwrap();
        let p = coeff_multiply(&g, &coeff_invert(&g)).unwrap();
        assert!(p.is_identity());
        assert!(coeff_parse(&free2(), "R1.R1^-1").unwrap().is_identity());
        assert!(coeff_parse(&free2(), "1").unwrap().is_identity());
    }

    #[test]
    fn free_parse_reduced() {
        let spec = free2();
        let e = coeff_parse(&spec, "R2.R2.R1^-1").unwrap();
        let raw = vec![
            FreeLetter { generator: 1, inverse: false },
            FreeLetter { generator: 1, inverse: false },
            FreeLetter { generator: 0, inverse: true },
        ];
        assert_eq!(e, GroupElement::Free(naive_free_reduce(raw)));
        assert_eq!(spec.format_element(&e), "R2.R2.R1^-1");
        let g12 = coeff_parse(&spec, "R1.R2").unwrap();
        assert_eq!(spec.format_element(&coeff_invert(&g12)), "R2^-1.R1^-1");
    }

    #[test]
    fn cyclic_arithmetic() {
        let c2 = GroupSpec::Cyclic(2);
        let one = coeff_parse(&c2, "c").unwrap();
        assert!(coeff_multiply(&one, &one).unwrap().is_identity());
        let c5 = GroupSpec::Cyclic(5);
        let two = coeff_parse(&c5, "c.c").unwrap();
        assert_eq!(coeff_invert(&two), GroupElement::Residue { modulus: 5, value: 3 });
        assert_eq!(coeff_parse(&c5, "c^-1").unwrap(), GroupElement::Residue { modulus: 5, value: 4 });
        assert_eq!(c5.format_element(&two), "c.c");
        assert!(coeff_invert(&GroupElement::Unit).is_identity());
    }

    #[test]
    fn mismatch_and_parse_errors() {
        let a = GroupElement::Residue { modulus: 2, value: 1 };
        let b = GroupElement::Residue { modulus: 3, value: 1 };
        assert!(coeff_multiply(&a, &b).is_err());
        assert!(coeff_multiply(&a, &GroupElement::Unit).is_err());
        assert!(matches!(coeff_parse(&free2(), "R3"), Err(CoeffError::UnknownGenerator(_))));
        assert!(matches!(coeff_parse(&free2(), "R1^x"), Err(CoeffError::Malformed(_))));
        assert!(matches!(coeff_parse(&free2(), "R1..R2"), Err(CoeffError::Malformed(_))));
    }

    #[test]
    fn free_associativity_against_naive() {
        let spec = GroupSpec::free_rank(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let a = spec.random_element(&mut rng, 6);
            let b = spec.random_element(&mut rng, 6);
            let c = spec.random_element(&mut rng, 6);
            let left = coeff_multiply(&coeff_multiply(&a, &b).unwrap(), &c).unwrap();
            let right = coeff_multiply(&a, &coeff_multiply(&b, &c).unwrap()).unwrap();
            assert_eq!(left, right);
            let (GroupElement::Free(x), GroupElement::Free(y), GroupElement::Free(z)) = (&a, &b, &c) else {
                unreachable!()
            };
            let naive = naive_free_reduce([x.clone(), y.clone(), z.clone()].concat());
            assert_eq!(left, GroupElement::Free(naive));
        }
    }

    #[test]
    fn spec_round_trip() {
        for s in ["trivial", "cyclic:3", "free:2", "free:a,b"] {
            let spec: GroupSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("cyclic:1".parse::<GroupSpec>().is_err());
        assert!("free:a,a".parse::<GroupSpec>().is_err());
        assert!("dihedral:3".parse::<GroupSpec>().is_err());
    }

    fn path_graph() -> GraphProduct {
        GraphProduct::new(vec![GroupSpec::free_rank(1), GroupSpec::free_rank(1)], &[(0, 1)]).unwrap()
    }

    fn syl(gp: &GraphProduct, v: usize, text: &str) -> Syllable {
        Syllable { vertex: v, element: coeff_parse(gp.spec(v), text).unwrap() }
    }

    #[test]
    fn gp_cancellation_and_shuffle() {
        let gp = GraphProduct::new(vec![GroupSpec::free_rank(1); 3], &[(0, 1)]).unwrap();
        let w = GraphProductWord::new(vec![syl(&gp, 0, "R1"), syl(&gp, 0, "R1^-1")]);
        assert!(gp_reduce(&gp, &w).unwrap().is_empty());

        let w = GraphProductWord::new(vec![syl(&gp, 0, "R1"), syl(&gp, 1, "R1"), syl(&gp, 0, "R1^-1")]);
        assert_eq!(gp_reduce(&gp, &w).unwrap().syllables, vec![syl(&gp, 1, "R1")]);

        // Vertices 0 and 2 are not adjacent: nothing cancels.
        let w = GraphProductWord::new(vec![syl(&gp, 0, "R1"), syl(&gp, 2, "R1"), syl(&gp, 0, "R1^-1")]);
        assert_eq!(gp_reduce(&gp, &w).unwrap().len(), 3);

        let bad = GraphProductWord::new(vec![Syllable { vertex: 5, element: GroupElement::Unit }]);
        assert!(matches!(gp_reduce(&gp, &bad), Err(CoeffError::MissingVertex(5))));
    }

    #[test]
    fn gp_equality_up_to_shuffle() {
        let gp = path_graph();
        let a = GraphProductWord::new(vec![syl(&gp, 0, "R1"), syl(&gp, 1, "R1")]);
        let b = GraphProductWord::new(vec![syl(&gp, 1, "R1"), syl(&gp, 0, "R1")]);
        assert!(gp_equal(&gp, &a, &b).unwrap());
        let c = GraphProductWord::new(vec![syl(&gp, 0, "R1")]);
        let d = GraphProductWord::new(vec![syl(&gp, 1, "R1")]);
        assert!(!gp_equal(&gp, &c, &d).unwrap());
    }

    #[test]
    fn head_and_support() {
        let gp = GraphProduct::new(vec![GroupSpec::free_rank(1); 2], &[]).unwrap();
        let w = GraphProductWord::new(vec![syl(&gp, 0, "R1"), syl(&gp, 1, "R1")]);
        let (head, support) = gp_head_support(&gp, &w).unwrap();
        assert_eq!(head.into_iter().collect::<Vec<_>>(), vec![syl(&gp, 0, "R1")]);
        assert_eq!(support.into_iter().collect::<Vec<_>>(), vec![0, 1]);

        let gp = path_graph();
        let (head, _) = gp_head_support(&gp, &w).unwrap();
        assert_eq!(head.len(), 2);
    }

    #[test]
    fn edgeless_graph_is_free_product() {
        let gp = GraphProduct::new(vec![GroupSpec::Cyclic(2), GroupSpec::Cyclic(3)], &[]).unwrap();
        let w = GraphProductWord::new(vec![
            syl(&gp, 0, "c"),
            syl(&gp, 1, "c"),
            syl(&gp, 1, "c.c"),
            syl(&gp, 0, "c"),
            syl(&gp, 1, "c"),
        ]);
        // c1 (c2 c2^2) c1 c2 -> c1 c1 c2 -> c2
        assert_eq!(gp_reduce(&gp, &w).unwrap().syllables, vec![syl(&gp, 1, "c")]);
    }

    #[test]
    fn complete_graph_is_direct_sum() {
        let gp = GraphProduct::new(vec![GroupSpec::Cyclic(2), GroupSpec::Cyclic(3)], &[(0, 1)]).unwrap();
        let w = GraphProductWord::new(vec![
            syl(&gp, 1, "c"),
            syl(&gp, 0, "c"),
            syl(&gp, 1, "c"),
            syl(&gp, 0, "c"),
            syl(&gp, 1, "c"),
            syl(&gp, 1, "c"),
        ]);
        // Exponent sums: vertex 0 gets 2 ≡ 0, vertex 1 gets 4 ≡ 1.
        assert_eq!(gp_reduce(&gp, &w).unwrap().syllables, vec![syl(&gp, 1, "c")]);
    }

    #[test]
    fn reduce_is_idempotent() {
        let gp = GraphProduct::new(
            vec![GroupSpec::Cyclic(2), GroupSpec::free_rank(1), GroupSpec::Cyclic(2), GroupSpec::free_rank(1)],
            &[(0, 1), (1, 2), (2, 3), (3, 0)],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let len = rng.gen_range(0..8);
            let syllables = (0..len)
                .map(|_| {
                    let v = rng.gen_range(0..4);
                    Syllable { vertex: v, element: gp.spec(v).random_element(&mut rng, 2) }
                })
                .collect();
            let r = gp_reduce(&gp, &GraphProductWord::new(syllables)).unwrap();
            assert_eq!(gp_reduce(&gp, &r).unwrap(), r);
            let inv = gp_invert(&r);
            assert!(gp_multiply(&gp, &r, &inv).unwrap().is_empty());
        }
    }
}
