//! Right-angled Artin groups with exact ShortLex normal forms.
//!
//! A [`Raag`] is built from a [`DefiningGraph`]: one generator per vertex,
//! two generators commute iff their vertices are joined by an edge. Inside a
//! `Raag`, vertices are re-indexed so that vertex `i` is the `i`-th vertex of
//! the letter order; a [`Letter`] therefore compares in letter order directly
//! (vertex first, then `+` before `-`).
//!
//! Every [`Element`] stores the ShortLex-least geodesic word spelling it,
//! so equality, hashing and word length are exact.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Largest supported number of vertices (commutation rows are `u64` masks).
pub const MAX_VERTICES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

/// A generator or its inverse, packed as `2 * vertex + (sign == Neg)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter(u8);

impl Letter {
    pub fn new(vertex: usize, sign: Sign) -> Letter {
        assert!(vertex < MAX_VERTICES, "vertex index {vertex} out of range");
        Letter((vertex as u8) << 1 | (sign == Sign::Neg) as u8)
    }

    pub fn pos(vertex: usize) -> Letter {
        Letter::new(vertex, Sign::Pos)
    }

    pub fn neg(vertex: usize) -> Letter {
        Letter::new(vertex, Sign::Neg)
    }

    pub fn from_code(code: u8) -> Letter {
        assert!((code as usize) < 2 * MAX_VERTICES);
        Letter(code)
    }

    #[inline]
    pub fn code(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn vertex(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn sign(self) -> Sign {
        if self.0 & 1 == 0 {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    #[inline]
    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign() {
            Sign::Pos => write!(f, "v{}", self.vertex()),
            Sign::Neg => write!(f, "v{}^-1", self.vertex()),
        }
    }
}

/// A finite sequence of letters; not necessarily geodesic.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Word {
        Word(letters)
    }

    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn into_inner(self) -> Vec<Letter> {
        self.0
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l)
    }

    /// The formal inverse: reversed, every letter inverted.
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl Deref for Word {
    type Target = [Letter];
    fn deref(&self) -> &[Letter] {
        &self.0
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Word {
        Word(v)
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Word {
        Word(iter.into_iter().collect())
    }
}

/// Commutation graph of a RAAG together with a total order on its vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefiningGraph {
    vertex_count: usize,
    edges: BTreeSet<(usize, usize)>,
    letter_order: Vec<usize>,
}

impl DefiningGraph {
    /// `letter_order[k]` is the vertex that comes `k`-th in the letter order.
    pub fn new(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        letter_order: Vec<usize>,
    ) -> Result<DefiningGraph> {
        if vertex_count == 0 {
            return Err(Error::input("a defining graph needs at least one vertex"));
        }
        if vertex_count > MAX_VERTICES {
            return Err(Error::input(format!(
                "{vertex_count} vertices exceeds the supported maximum of {MAX_VERTICES}"
            )));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::input(format!("edge ({u}, {v}) has an invalid endpoint")));
            }
            if u == v {
                return Err(Error::input(format!("self-loop at vertex {u}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::input(format!("duplicate edge ({u}, {v})")));
            }
        }
        let mut seen = vec![false; vertex_count];
        if letter_order.len() != vertex_count {
            return Err(Error::input("letter order must list every vertex exactly once"));
        }
        for &v in &letter_order {
            if v >= vertex_count || std::mem::replace(&mut seen[v], true) {
                return Err(Error::input("letter order must be a permutation of the vertices"));
            }
        }
        Ok(DefiningGraph {
            vertex_count,
            edges: set,
            letter_order,
        })
    }

    /// Graph whose letter order is the vertex numbering.
    pub fn natural(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<DefiningGraph> {
        DefiningGraph::new(vertex_count, edges, (0..vertex_count).collect())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn letter_order(&self) -> &[usize] {
        &self.letter_order
    }
}

/// Identity of a group model; derived from the group digest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupId(u64);

/// A group element, stored as its canonical (ShortLex-least geodesic) word.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Element {
    group: GroupId,
    word: Word,
}

impl Element {
    pub fn normal_form(&self) -> &Word {
        &self.word
    }

    pub fn letters(&self) -> &[Letter] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    pub fn group(&self) -> GroupId {
        self.group
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element{:?}", &self.word[..])
    }
}

/// ShortLex order: shorter first, then lexicographic in letter order.
impl Ord for Element {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.word.len(), &self.word[..]).cmp(&(other.word.len(), &other.word[..]))
    }
}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A right-angled Artin group with its standard generating set.
#[derive(Clone, Debug)]
pub struct Raag {
    names: Vec<String>,
    commute: Vec<u64>,
    id: GroupId,
    digest: String,
}

impl Raag {
    /// Build the group of `graph`, naming vertices `a, b, c, ...` by their
    /// original index (or `v0, v1, ...` past 26 vertices).
    pub fn from_graph(graph: &DefiningGraph) -> Raag {
        let names = (0..graph.vertex_count)
            .map(|i| {
                if graph.vertex_count <= 26 {
                    ((b'a' + i as u8) as char).to_string()
                } else {
                    format!("v{i}")
                }
            })
            .collect();
        Raag::with_names(graph, names).expect("generated names are valid")
    }

    /// `names[i]` names original vertex `i` of `graph`.
    pub fn with_names(graph: &DefiningGraph, names: Vec<String>) -> Result<Raag> {
        let n = graph.vertex_count;
        if names.len() != n {
            return Err(Error::input("one name per vertex is required"));
        }
        let mut rank = vec![0usize; n];
        for (k, &v) in graph.letter_order.iter().enumerate() {
            rank[v] = k;
        }
        let ordered: Vec<String> = graph.letter_order.iter().map(|&v| names[v].clone()).collect();
        let edges = graph.edges.iter().map(|&(u, v)| (rank[u], rank[v]));
        Raag::from_ordered(ordered, edges)
    }

    /// Vertices are given in letter order; edges refer to those positions.
    fn from_ordered(names: Vec<String>, edges: impl Iterator<Item = (usize, usize)>) -> Result<Raag> {
        let mut seen = BTreeSet::new();
        for name in &names {
            if !valid_name(name) {
                return Err(Error::input(format!("invalid vertex name {name:?}")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::input(format!("duplicate vertex name {name:?}")));
            }
        }
        let n = names.len();
        let mut commute = vec![0u64; n];
        let mut canon_edges = BTreeSet::new();
        for (u, v) in edges {
            commute[u] |= 1 << v;
            commute[v] |= 1 << u;
            canon_edges.insert((u.min(v), u.max(v)));
        }
        let mut canon = format!("vertices: {}\n", names.join(" "));
        for (u, v) in &canon_edges {
            canon.push_str(&format!("edge: {} {}\n", names[*u], names[*v]));
        }
        let hash = Sha256::digest(canon.as_bytes());
        let id = GroupId(u64::from_be_bytes(hash[..8].try_into().unwrap()));
        Ok(Raag {
            names,
            commute,
            id,
            digest: hex::encode(hash),
        })
    }

    /// Group from vertex names (in letter order) and edges between names.
    pub fn from_edges(names: &[&str], edges: &[(&str, &str)]) -> Result<Raag> {
        let idx = |s: &str| {
            names
                .iter()
                .position(|n| *n == s)
                .ok_or_else(|| Error::input(format!("unknown vertex {s:?}")))
        };
        let mut pairs = Vec::new();
        for (u, v) in edges {
            pairs.push((idx(u)?, idx(v)?));
        }
        let graph = DefiningGraph::natural(names.len(), pairs)?;
        Raag::with_names(&graph, names.iter().map(|s| s.to_string()).collect())
    }

    /// Free group on `n` generators.
    pub fn free(n: usize) -> Raag {
        Raag::from_graph(&DefiningGraph::natural(n, []).unwrap())
    }

    /// Free abelian group of rank `n`.
    pub fn free_abelian(n: usize) -> Raag {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Raag::from_graph(&DefiningGraph::natural(n, edges).unwrap())
    }

    /// `Z^2 * Z`: vertices `a < b < c`, single edge `{a, b}`.
    pub fn z2_free_z() -> Raag {
        Raag::from_graph(&DefiningGraph::natural(3, [(0, 1)]).unwrap())
    }

    /// Parse the plain-text group definition format:
    ///
    /// ```text
    /// vertices: a b c
    /// edge: a b
    /// ```
    ///
    /// `#` starts a comment. Names are case-sensitive.
    pub fn parse(text: &str) -> Result<Raag> {
        let mut names: Option<Vec<String>> = None;
        let mut edges = Vec::new();
        let mut seen_edges = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| Error::input(format!("line {}: {m}", lineno + 1));
            let (key, rest) = line.split_once(':').ok_or_else(|| err("expected `key: value`"))?;
            match (key.trim(), names.as_ref()) {
                ("vertices", None) => {
                    let list: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                    if list.is_empty() {
                        return Err(err("empty vertex list"));
                    }
                    if list.len() > MAX_VERTICES {
                        return Err(err("too many vertices"));
                    }
                    names = Some(list);
                }
                ("vertices", Some(_)) => return Err(err("vertices declared twice")),
                ("edge", None) => return Err(err("`vertices:` must come before edges")),
                ("edge", Some(list)) => {
                    let ends: Vec<&str> = rest.split_whitespace().collect();
                    if ends.len() != 2 {
                        return Err(err("an edge names exactly two vertices"));
                    }
                    let find = |s: &str| {
                        list.iter().position(|n| n == s).ok_or_else(|| err(&format!("unknown vertex {s:?}")))
                    };
                    let (u, v) = (find(ends[0])?, find(ends[1])?);
                    if u == v {
                        return Err(err("self-loop"));
                    }
                    if !seen_edges.insert((u.min(v), u.max(v))) {
                        return Err(err("duplicate edge"));
                    }
                    edges.push((u, v));
                }
                (other, _) => return Err(err(&format!("unknown key {other:?}"))),
            }
        }
        let names = names.ok_or_else(|| Error::input("missing `vertices:` line"))?;
        Raag::from_ordered(names, edges.into_iter())
    }

    pub fn load(path: &Path) -> Result<Raag> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::input(format!("cannot read group file {}: {e}", path.display())))?;
        Raag::parse(&text)
    }

    /// Canonical text form; parsing it yields the same group and digest.
    pub fn to_definition(&self) -> String {
        let mut out = format!("vertices: {}\n", self.names.join(" "));
        for u in 0..self.rank() {
            for v in u + 1..self.rank() {
                if self.commutes(u, v) {
                    out.push_str(&format!("edge: {} {}\n", self.names[u], self.names[v]));
                }
            }
        }
        out
    }

    pub fn id(&self) -> GroupId {
        self.id
    }

    /// Hex SHA-256 of the canonical definition.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// Number of vertices (generators).
    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, vertex: usize) -> &str {
        &self.names[vertex]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// All `2 * rank` letters in letter order.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + Clone {
        (0..2 * self.rank() as u8).map(Letter)
    }

    pub fn letter_count(&self) -> usize {
        2 * self.rank()
    }

    /// Whether distinct vertices `u` and `v` are joined by an edge.
    #[inline]
    pub fn commutes(&self, u: usize, v: usize) -> bool {
        self.commute[u] >> v & 1 == 1
    }

    /// Bit `u` is set iff `u` is adjacent to `v`.
    #[inline]
    pub fn commute_mask(&self, v: usize) -> u64 {
        self.commute[v]
    }

    pub fn edge_count(&self) -> usize {
        self.commute.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2
    }

    /// Complete defining graph, i.e. the group is free abelian.
    pub fn is_abelian(&self) -> bool {
        let n = self.rank();
        (0..n).all(|v| self.commute[v].count_ones() as usize == n - 1)
    }

    pub fn identity(&self) -> Element {
        Element {
            group: self.id,
            word: Word::empty(),
        }
    }

    pub fn generator(&self, l: Letter) -> Element {
        assert!(l.vertex() < self.rank());
        Element {
            group: self.id,
            word: Word(vec![l]),
        }
    }

    pub fn check_letters(&self, w: &[Letter]) -> Result<()> {
        match w.iter().find(|l| l.vertex() >= self.rank()) {
            Some(l) => Err(Error::input(format!(
                "letter with vertex {} is not valid for a group on {} vertices",
                l.vertex(),
                self.rank()
            ))),
            None => Ok(()),
        }
    }

    pub fn check_element(&self, x: &Element) -> Result<()> {
        if x.group != self.id {
            return Err(Error::usage("element belongs to a different group model"));
        }
        Ok(())
    }

    /// Canonical representative of the element spelled by `w`, computed by
    /// piling: one stack per vertex, where a letter either cancels against
    /// the top of its own stack or is pushed while every non-commuting stack
    /// receives a blocking marker. The ShortLex-least word is then read off
    /// by repeatedly taking the least letter sitting at the bottom of a stack.
    pub fn normalize(&self, w: &Word) -> Result<Element> {
        self.check_letters(w)?;
        Ok(Element {
            group: self.id,
            word: Word(self.pile(w)),
        })
    }

    /// Element whose normal form is already known to be `w`.
    pub(crate) fn element_unchecked(&self, w: Vec<Letter>) -> Element {
        debug_assert!(self.is_normal_form(&w));
        Element {
            group: self.id,
            word: Word(w),
        }
    }

    fn pile(&self, w: &[Letter]) -> Vec<Letter> {
        #[derive(Clone, Copy, PartialEq)]
        enum Entry {
            Letter(Letter),
            Marker,
        }
        let n = self.rank();
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let blocked: Vec<u64> = (0..n).map(|v| full & !self.commute[v] & !(1 << v)).collect();
        let mut stacks: Vec<VecDeque<Entry>> = vec![VecDeque::new(); n];
        for &l in w {
            let v = l.vertex();
            if stacks[v].back() == Some(&Entry::Letter(l.inverse())) {
                stacks[v].pop_back();
                for u in bits(blocked[v]) {
                    let popped = stacks[u].pop_back();
                    debug_assert!(popped == Some(Entry::Marker));
                }
            } else {
                stacks[v].push_back(Entry::Letter(l));
                for u in bits(blocked[v]) {
                    stacks[u].push_back(Entry::Marker);
                }
            }
        }
        let mut out = Vec::with_capacity(w.len());
        loop {
            let next = stacks
                .iter()
                .filter_map(|s| match s.front() {
                    Some(Entry::Letter(l)) => Some(*l),
                    _ => None,
                })
                .min();
            let Some(l) = next else { break };
            let v = l.vertex();
            stacks[v].pop_front();
            for u in bits(blocked[v]) {
                let popped = stacks[u].pop_front();
                debug_assert!(popped == Some(Entry::Marker));
            }
            out.push(l);
        }
        debug_assert!(stacks.iter().all(|s| s.is_empty()));
        out
    }

    /// Right-multiply a normal form by one letter, in place.
    ///
    /// Let `q` be the last position whose letter does not commute with `s`.
    /// If that letter is `s^-1` it is deleted; otherwise `s` is inserted before
    /// the first letter after `q` that is larger than `s`. Both moves keep the
    /// word ShortLex-least.
    #[inline]
    pub fn push_letter(&self, w: &mut Vec<Letter>, s: Letter) {
        let comm = self.commute[s.vertex()];
        let q = w.iter().rposition(|l| comm >> l.vertex() & 1 == 0);
        if let Some(k) = q {
            if w[k] == s.inverse() {
                w.remove(k);
                return;
            }
        }
        let start = q.map_or(0, |k| k + 1);
        let pos = w[start..].iter().position(|&l| l > s).map_or(w.len(), |p| start + p);
        w.insert(pos, s);
    }

    pub fn mul_letter(&self, x: &Element, s: Letter) -> Element {
        let mut w = x.word.0.clone();
        self.push_letter(&mut w, s);
        Element { group: self.id, word: Word(w) }
    }

    pub fn multiply(&self, x: &Element, y: &Element) -> Result<Element> {
        self.check_element(x)?;
        self.check_element(y)?;
        Ok(self.mul(x, y))
    }

    /// `multiply` without the group-model check.
    pub(crate) fn mul(&self, x: &Element, y: &Element) -> Element {
        let mut w = x.word.0.clone();
        for &l in y.word.iter() {
            self.push_letter(&mut w, l);
        }
        Element { group: self.id, word: Word(w) }
    }

    pub fn invert(&self, x: &Element) -> Element {
        let mut w = Vec::with_capacity(x.len());
        for l in x.word.iter().rev() {
            self.push_letter(&mut w, l.inverse());
        }
        Element { group: self.id, word: Word(w) }
    }

    /// Word length `|x|`.
    pub fn length(&self, x: &Element) -> usize {
        x.len()
    }

    /// Word metric `d(x, y) = |x^-1 y|`.
    pub fn distance(&self, x: &Element, y: &Element) -> Result<usize> {
        self.check_element(x)?;
        self.check_element(y)?;
        Ok(self.dist(x, y))
    }

    pub(crate) fn dist(&self, x: &Element, y: &Element) -> usize {
        self.dist_words(&x.word, &y.word)
    }

    /// Distance between the elements spelled by two normal forms.
    pub(crate) fn dist_words(&self, x: &[Letter], y: &[Letter]) -> usize {
        // skip a common prefix: it cancels in x^-1 y
        let common = x.iter().zip(y).take_while(|(a, b)| a == b).count();
        let mut w = Vec::with_capacity(x.len() + y.len() - 2 * common);
        for l in x[common..].iter().rev() {
            self.push_letter(&mut w, l.inverse());
        }
        for &l in &y[common..] {
            self.push_letter(&mut w, l);
        }
        w.len()
    }

    pub fn pow(&self, g: &Element, k: i64) -> Element {
        let base = if k < 0 { self.invert(g) } else { g.clone() };
        let mut out = Vec::new();
        for _ in 0..k.unsigned_abs() {
            for &l in base.word.iter() {
                self.push_letter(&mut out, l);
            }
        }
        Element { group: self.id, word: Word(out) }
    }

    pub fn is_normal_form(&self, w: &[Letter]) -> bool {
        w.iter().all(|l| l.vertex() < self.rank()) && self.pile(w) == w
    }

    /// Parse a word such as `c a^2 b^-1` (separators: whitespace, `*`, `.`;
    /// `1` or the empty string is the identity).
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut out = Vec::new();
        for tok in text.split(|c: char| c.is_whitespace() || c == '*' || c == '.') {
            if tok.is_empty() || tok == "1" {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => {
                    let e: i64 = e
                        .trim_start_matches('(')
                        .trim_end_matches(')')
                        .parse()
                        .map_err(|_| Error::input(format!("bad exponent in {tok:?}")))?;
                    (n, e)
                }
                None => (tok, 1),
            };
            let v = self
                .names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::input(format!("unknown generator {name:?}")))?;
            let l = Letter::new(v, if exp < 0 { Sign::Neg } else { Sign::Pos });
            out.extend(std::iter::repeat(l).take(exp.unsigned_abs() as usize));
        }
        Ok(Word(out))
    }

    /// Parse and normalize.
    pub fn element(&self, text: &str) -> Result<Element> {
        self.normalize(&self.parse_word(text)?)
    }

    /// Render a word with run-length exponents, e.g. `c a^2 b^-1`; the empty
    /// word renders as `1`.
    pub fn format_word(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        let mut i = 0;
        while i < w.len() {
            let mut j = i;
            while j < w.len() && w[j] == w[i] {
                j += 1;
            }
            let run = (j - i) as i64;
            let exp = if w[i].sign() == Sign::Neg { -run } else { run };
            let name = &self.names[w[i].vertex()];
            parts.push(if exp == 1 { name.clone() } else { format!("{name}^{exp}") });
            i = j;
        }
        parts.join(" ")
    }

    pub fn format(&self, x: &Element) -> String {
        self.format_word(&x.word)
    }
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Indices of set bits, ascending.
pub(crate) fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeSet, HashSet};

    /// Exhaustive rewriting closure: swap adjacent commuting letters and
    /// cancel adjacent inverse pairs until nothing new appears; the canonical
    /// form is the ShortLex-least word in the closure.
    fn rewriting_oracle(g: &Raag, w: &[Letter]) -> Vec<Letter> {
        let mut seen: HashSet<Vec<Letter>> = HashSet::new();
        let mut todo = vec![w.to_vec()];
        seen.insert(w.to_vec());
        while let Some(cur) = todo.pop() {
            for i in 0..cur.len().saturating_sub(1) {
                let (x, y) = (cur[i], cur[i + 1]);
                let mut next = None;
                if x == y.inverse() {
                    let mut v = cur.clone();
                    v.drain(i..i + 2);
                    next = Some(v);
                }
                for cand in next.into_iter().chain(
                    (x.vertex() != y.vertex() && g.commutes(x.vertex(), y.vertex())).then(|| {
                        let mut v = cur.clone();
                        v.swap(i, i + 1);
                        v
                    }),
                ) {
                    if seen.insert(cand.clone()) {
                        todo.push(cand);
                    }
                }
            }
        }
        seen.into_iter().min_by(|a, b| (a.len(), a).cmp(&(b.len(), b))).unwrap()
    }

    fn all_words(g: &Raag, len: usize) -> Vec<Vec<Letter>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| {
                    g.letters().map(move |l| {
                        let mut v = w.clone();
                        v.push(l);
                        v
                    })
                })
                .collect();
        }
        out
    }

    fn test_groups() -> Vec<Raag> {
        vec![
            Raag::free(2),
            Raag::free_abelian(2),
            Raag::z2_free_z(),
            Raag::free_abelian(3),
            // path a - b - c
            Raag::from_edges(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap(),
        ]
    }

    #[test]
    fn normalize_matches_rewriting_oracle() {
        for g in test_groups() {
            let max = if g.rank() == 2 { 6 } else { 5 };
            for len in 0..=max {
                for w in all_words(&g, len) {
                    let expect = rewriting_oracle(&g, &w);
                    let got = g.normalize(&Word::new(w.clone())).unwrap();
                    assert_eq!(got.letters(), &expect[..], "{}", g.format_word(&w));
                }
            }
        }
    }

    #[test]
    fn incremental_multiplication_agrees_with_piling() {
        for g in test_groups() {
            for w in all_words(&g, 6) {
                let mut inc = Vec::new();
                for &l in &w {
                    g.push_letter(&mut inc, l);
                }
                assert_eq!(inc, g.pile(&w));
            }
        }
    }

    #[test]
    fn normalize_examples() {
        let f2 = Raag::free(2);
        assert_eq!(f2.format(&f2.element("a a^-1 b").unwrap()), "b");
        let z2 = Raag::free_abelian(2);
        assert_eq!(z2.format(&z2.element("b a").unwrap()), "a b");
        let g = Raag::z2_free_z();
        assert_eq!(g.format(&g.element("a c c^-1 b a^-1").unwrap()), "b");
    }

    #[test]
    fn multiply_invert_length_examples() {
        let f2 = Raag::free(2);
        let a = f2.element("a").unwrap();
        let a_inv = f2.element("a^-1").unwrap();
        assert!(f2.multiply(&a, &a_inv).unwrap().is_identity());
        let x = f2.element("a b").unwrap();
        let y = f2.element("b^-1 a").unwrap();
        assert_eq!(f2.format(&f2.multiply(&x, &y).unwrap()), "a^2");
        assert_eq!(f2.format(&f2.invert(&x)), "b^-1 a^-1");
        assert_eq!(f2.length(&f2.element("a b a b a b").unwrap()), 6);

        let z2 = Raag::free_abelian(2);
        let p = z2.multiply(&z2.element("a^3").unwrap(), &z2.element("b^-5").unwrap()).unwrap();
        assert_eq!(z2.format(&p), "a^3 b^-5");
        assert_eq!(p.len(), 8);
        assert_eq!(z2.format(&z2.invert(&z2.element("a b").unwrap())), "a^-1 b^-1");
        assert_eq!(z2.length(&z2.element("a b a b a b").unwrap()), 6);
        assert!(f2.invert(&f2.identity()).is_identity());
    }

    #[test]
    fn mixed_models_rejected() {
        let f2 = Raag::free(2);
        let z2 = Raag::free_abelian(2);
        let x = f2.element("a").unwrap();
        let y = z2.element("a").unwrap();
        assert!(matches!(f2.multiply(&x, &y), Err(Error::Usage(_))));
        assert!(matches!(z2.distance(&y, &x), Err(Error::Usage(_))));
    }

    #[test]
    fn invalid_letter_rejected() {
        let f2 = Raag::free(2);
        let w = Word::new(vec![Letter::pos(5)]);
        assert!(matches!(f2.normalize(&w), Err(Error::Input(_))));
    }

    #[test]
    fn length_is_bfs_distance() {
        // BFS over the Cayley graph with a brute-force multiplication (the
        // rewriting oracle) on balls of radius 4.
        for g in [Raag::free(2), Raag::free_abelian(2), Raag::z2_free_z()] {
            let mut dist = std::collections::HashMap::new();
            dist.insert(Vec::<Letter>::new(), 0usize);
            let mut frontier = vec![Vec::new()];
            for r in 1..=4 {
                let mut next = Vec::new();
                for w in &frontier {
                    for l in g.letters() {
                        let mut v: Vec<Letter> = w.clone();
                        v.push(l);
                        let nf = rewriting_oracle(&g, &v);
                        if !dist.contains_key(&nf) {
                            dist.insert(nf.clone(), r);
                            next.push(nf);
                        }
                    }
                }
                frontier = next;
            }
            for (w, d) in dist {
                assert_eq!(g.normalize(&Word::new(w)).unwrap().len(), d);
            }
        }
    }

    #[test]
    fn free_and_abelian_special_cases() {
        let f3 = Raag::free(3);
        let z3 = Raag::free_abelian(3);
        for w in all_words(&f3, 5) {
            // free reduction
            let mut red: Vec<Letter> = Vec::new();
            for &l in &w {
                if red.last() == Some(&l.inverse()) {
                    red.pop();
                } else {
                    red.push(l);
                }
            }
            assert_eq!(f3.normalize(&Word::new(w.clone())).unwrap().letters(), &red[..]);
            // sorted exponent vector
            let mut exps = [0i64; 3];
            for l in &w {
                exps[l.vertex()] += if l.sign() == Sign::Pos { 1 } else { -1 };
            }
            let mut sorted = Vec::new();
            for (v, &e) in exps.iter().enumerate() {
                let l = if e >= 0 { Letter::pos(v) } else { Letter::neg(v) };
                sorted.extend(std::iter::repeat(l).take(e.unsigned_abs() as usize));
            }
            assert_eq!(z3.normalize(&Word::new(w)).unwrap().letters(), &sorted[..]);
        }
    }

    #[test]
    fn triangle_inequality_on_ball() {
        let g = Raag::z2_free_z();
        let mut ball: BTreeSet<Element> = BTreeSet::new();
        ball.insert(g.identity());
        for _ in 0..4 {
            let cur: Vec<_> = ball.iter().cloned().collect();
            for x in cur {
                for l in g.letters() {
                    ball.insert(g.mul_letter(&x, l));
                }
            }
        }
        for x in &ball {
            for y in &ball {
                assert!(g.mul(x, y).len() <= x.len() + y.len());
            }
        }
    }

    #[test]
    fn letter_order_relabels_vertices() {
        // order b < a: the word a b normalizes to b a
        let graph = DefiningGraph::new(2, [(0, 1)], vec![1, 0]).unwrap();
        let g = Raag::with_names(&graph, vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(g.names(), &["b".to_string(), "a".to_string()]);
        assert_eq!(g.format(&g.element("a b").unwrap()), "b a");
    }

    #[test]
    fn defining_graph_validation() {
        assert!(DefiningGraph::natural(2, [(0, 0)]).is_err());
        assert!(DefiningGraph::natural(2, [(0, 1), (1, 0)]).is_err());
        assert!(DefiningGraph::natural(2, [(0, 2)]).is_err());
        assert!(DefiningGraph::new(2, [], vec![0, 0]).is_err());
        assert!(DefiningGraph::new(2, [], vec![1]).is_err());
    }

    #[test]
    fn group_file_parsing() {
        let g = Raag::parse("# Z^2 * Z\nvertices: a b c\nedge: a b\n").unwrap();
        assert_eq!(g.digest(), Raag::z2_free_z().digest());
        assert_eq!(Raag::parse(&g.to_definition()).unwrap().digest(), g.digest());
        assert!(Raag::parse("vertices: a b\nedge: a b\nedge: b a\n").is_err());
        assert!(Raag::parse("vertices: a b\nedge: a a\n").is_err());
        assert!(Raag::parse("vertices: a b\nedge: a B\n").is_err());
        assert!(Raag::parse("edge: a b\nvertices: a b\n").is_err());
        assert!(Raag::parse("vertices: a a\n").is_err());
        assert!(Raag::parse("").is_err());
        // case-sensitive names
        let h = Raag::parse("vertices: a A\nedge: a A\n").unwrap();
        assert_eq!(h.rank(), 2);
        assert!(h.is_abelian());
    }

    #[test]
    fn word_round_trip() {
        let g = Raag::z2_free_z();
        let x = g.element("c a^2 b^-3 c^-1").unwrap();
        assert_eq!(g.element(&g.format(&x)).unwrap(), x);
        assert_eq!(g.format(&g.identity()), "1");
    }

    proptest::proptest! {
        #[test]
        fn normalize_idempotent_and_shortening(codes in proptest::collection::vec(0u8..6, 0..=10)) {
            let g = Raag::z2_free_z();
            let w = Word::new(codes.into_iter().map(Letter::from_code).collect());
            let once = g.normalize(&w).unwrap();
            let twice = g.normalize(once.normal_form()).unwrap();
            proptest::prop_assert_eq!(&once, &twice);
            proptest::prop_assert!(once.len() <= w.len());
        }

        #[test]
        fn multiplication_associative(a in proptest::collection::vec(0u8..6, 0..8),
                                      b in proptest::collection::vec(0u8..6, 0..8),
                                      c in proptest::collection::vec(0u8..6, 0..8)) {
            let g = Raag::z2_free_z();
            let el = |v: Vec<u8>| g.normalize(&v.into_iter().map(Letter::from_code).collect()).unwrap();
            let (x, y, z) = (el(a), el(b), el(c));
            proptest::prop_assert_eq!(g.mul(&g.mul(&x, &y), &z), g.mul(&x, &g.mul(&y, &z)));
            let xi = g.invert(&x);
            proptest::prop_assert!(g.mul(&x, &xi).is_identity());
            proptest::prop_assert_eq!(xi.len(), x.len());
        }
    }
}
