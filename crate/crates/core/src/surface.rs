//! Closed 1-forms on surfaces built as trees of linear torus forms
//! `p dθ + q dφ` joined by connected-sum tubes.
//!
//! Each tube introduces two index-1 critical points `x`, `y`. The tube kind
//! records how their levels compare: A has `f(x) < f(y)`, B has
//! `f(x) > f(y)`, C puts both at the same level. Disks at either end are
//! small round disks or thin ribbons winding around the torus.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::scalar::{integer_relation, qrank, ExactScalar, ScalarError, Symbol, SymbolTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TubeKind {
    A,
    B,
    C,
}

impl fmt::Display for TubeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TubeKind::A => "A",
            TubeKind::B => "B",
            TubeKind::C => "C",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Disk {
    Small,
    /// A thin ribbon winding the given number of times around the torus.
    Ribbon(u32),
}

impl fmt::Display for Disk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Disk::Small => f.write_str("small"),
            Disk::Ribbon(w) => write!(f, "ribbon({w})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summand {
    pub id: String,
    pub p: ExactScalar,
    pub q: ExactScalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tube {
    pub id: String,
    pub left: String,
    pub right: String,
    pub kind: TubeKind,
    pub left_disk: Disk,
    pub right_disk: Disk,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("summand `{0}` has the zero form")]
    ZeroForm(String),
    #[error("unknown summand `{0}`")]
    UnknownSummand(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("tube `{0}` would close a cycle")]
    Cycle(String),
    #[error("summands are not all joined by tubes")]
    Disconnected,
    #[error("model has no summands")]
    Empty,
    #[error("ribbon disks need winding >= 1")]
    ZeroRibbon,
    #[error("no example {0}; examples are numbered 1 to 4")]
    NoSuchExample(u32),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceModel {
    name: String,
    table: Arc<SymbolTable>,
    summands: Vec<Summand>,
    tubes: Vec<Tube>,
}

/// Compactness of leaves, as far as the construction determines it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeafReport {
    pub has_compact_regular_leaf: bool,
    pub all_regular_leaves_noncompact: bool,
    /// Some regular leaf is non-compact (the complement of "all compact").
    pub has_noncompact_regular_leaf: bool,
    pub compact_singular_components: usize,
    pub generic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassReport {
    pub periods: Vec<ExactScalar>,
    pub rank: usize,
    pub completely_irrational: bool,
    pub split: bool,
    /// Number of index-1 critical points.
    pub m1: usize,
    pub genus: usize,
}

fn table_of(values: &[&ExactScalar]) -> Result<Arc<SymbolTable>, ScalarError> {
    let mut found: Option<&Arc<SymbolTable>> = None;
    for v in values {
        if let Some(t) = v.table() {
            if let Some(f) = found {
                if !Arc::ptr_eq(f, t) {
                    return Err(ScalarError::TableMismatch);
                }
            }
            found = Some(t);
        }
    }
    Ok(found.cloned().unwrap_or_else(SymbolTable::empty))
}

fn same_table(a: &Arc<SymbolTable>, b: &Arc<SymbolTable>) -> bool {
    Arc::ptr_eq(a, b)
}

impl SurfaceModel {
    /// A model from parts, checking ids, forms, tables and the tree shape.
    pub fn new(
        name: impl Into<String>,
        table: Arc<SymbolTable>,
        summands: Vec<Summand>,
        tubes: Vec<Tube>,
    ) -> Result<Self, SurfaceError> {
        let m = SurfaceModel {
            name: name.into(),
            table,
            summands,
            tubes,
        };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<(), SurfaceError> {
        if self.summands.is_empty() {
            return Err(SurfaceError::Empty);
        }
        let mut ids = BTreeSet::new();
        for s in &self.summands {
            if !ids.insert(s.id.as_str()) {
                return Err(SurfaceError::DuplicateId(s.id.clone()));
            }
            if s.p.is_zero() && s.q.is_zero() {
                return Err(SurfaceError::ZeroForm(s.id.clone()));
            }
            for v in [&s.p, &s.q] {
                if v.table().is_some_and(|t| !same_table(t, &self.table)) {
                    return Err(ScalarError::TableMismatch.into());
                }
            }
        }
        // Union-find over summand indices to detect cycles.
        let mut parent: Vec<usize> = (0..self.summands.len()).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for t in &self.tubes {
            if !ids.insert(t.id.as_str()) {
                return Err(SurfaceError::DuplicateId(t.id.clone()));
            }
            if matches!(t.left_disk, Disk::Ribbon(0)) || matches!(t.right_disk, Disk::Ribbon(0)) {
                return Err(SurfaceError::ZeroRibbon);
            }
            let l = self.summand_index(&t.left)?;
            let r = self.summand_index(&t.right)?;
            let (rl, rr) = (root(&mut parent, l), root(&mut parent, r));
            if rl == rr {
                return Err(SurfaceError::Cycle(t.id.clone()));
            }
            parent[rl] = rr;
        }
        if self.tubes.len() + 1 != self.summands.len() {
            return Err(SurfaceError::Disconnected);
        }
        Ok(())
    }

    fn summand_index(&self, id: &str) -> Result<usize, SurfaceError> {
        self.summands
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| SurfaceError::UnknownSummand(id.to_string()))
    }

    /// A single torus carrying `p dθ + q dφ`.
    pub fn torus(p: ExactScalar, q: ExactScalar) -> Result<Self, SurfaceError> {
        let table = table_of(&[&p, &q])?;
        Self::torus_in(&table, p, q)
    }

    pub fn torus_in(
        table: &Arc<SymbolTable>,
        p: ExactScalar,
        q: ExactScalar,
    ) -> Result<Self, SurfaceError> {
        SurfaceModel::new(
            "T",
            Arc::clone(table),
            vec![Summand {
                id: "T1".into(),
                p,
                q,
            }],
            Vec::new(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn table(&self) -> &Arc<SymbolTable> {
        &self.table
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn tubes(&self) -> &[Tube] {
        &self.tubes
    }

    pub fn genus(&self) -> usize {
        self.summands.len()
    }

    /// Adds a tube between two summands already in the model.
    pub fn add_tube(&self, tube: Tube) -> Result<Self, SurfaceError> {
        let mut m = self.clone();
        m.tubes.push(tube);
        m.check()?;
        Ok(m)
    }

    /// Connected sum of `self` and `other` along a new tube joining summand
    /// `at_left` of `self` to summand `at_right` of `other`. Ids of `other`
    /// that clash with ids of `self` get a `'` appended until unique.
    pub fn connect_sum(
        &self,
        other: &SurfaceModel,
        kind: TubeKind,
        left_disk: Disk,
        right_disk: Disk,
        at_left: &str,
        at_right: &str,
    ) -> Result<Self, SurfaceError> {
        self.summand_index(at_left)?;
        other.summand_index(at_right)?;
        let table = match (self.table.is_empty(), other.table.is_empty()) {
            (_, true) => Arc::clone(&self.table),
            (true, false) => Arc::clone(&other.table),
            (false, false) if same_table(&self.table, &other.table) => Arc::clone(&self.table),
            _ => return Err(ScalarError::TableMismatch.into()),
        };
        let mut taken: BTreeSet<String> = self
            .summands
            .iter()
            .map(|s| s.id.clone())
            .chain(self.tubes.iter().map(|t| t.id.clone()))
            .collect();
        let mut fresh = |id: &str| {
            let mut id = id.to_string();
            while taken.contains(&id) {
                id.push('\'');
            }
            taken.insert(id.clone());
            id
        };
        let renamed: Vec<(String, String)> = other
            .summands
            .iter()
            .map(|s| (s.id.clone(), fresh(&s.id)))
            .collect();
        let rename = |id: &str| {
            renamed
                .iter()
                .find(|(a, _)| a == id)
                .map(|(_, b)| b.clone())
                .expect("known id")
        };
        let mut summands = self.summands.clone();
        summands.extend(other.summands.iter().map(|s| Summand {
            id: rename(&s.id),
            ..s.clone()
        }));
        let mut tubes = self.tubes.clone();
        for t in &other.tubes {
            tubes.push(Tube {
                id: fresh(&t.id),
                left: rename(&t.left),
                right: rename(&t.right),
                ..t.clone()
            });
        }
        let new_id = fresh(&format!("t{}", tubes.len() + 1));
        tubes.push(Tube {
            id: new_id,
            left: at_left.to_string(),
            right: rename(at_right),
            kind,
            left_disk,
            right_disk,
        });
        SurfaceModel::new(self.name.clone(), table, summands, tubes)
    }

    fn summand_rank(&self, s: &Summand) -> usize {
        qrank(&[s.p.clone(), s.q.clone()]).expect("summands share the model table")
    }

    /// Every tube is of kind A. A single torus with a nonzero linear form is
    /// non-singular and hence Calabi.
    pub fn calabi_status(&self) -> bool {
        self.tubes.iter().all(|t| t.kind == TubeKind::A)
    }

    /// Leaf compactness by a finite decision table over summands and tubes.
    ///
    /// * A summand of rank 1 has all leaves compact; one of rank 2 has every
    ///   regular leaf non-compact and dense, so every leaf meets every disk.
    /// * A compact summand whose disks are all small keeps compact leaves
    ///   that avoid the disks.
    /// * Across an A tube the joined leaves are compact iff both sides are
    ///   compact and either both disks are small (each leaf meets a disk at
    ///   most once) or the two period groups are commensurable (ribbons then
    ///   return leaves to themselves after finitely many passes).
    /// * A B tube creates new compact leaves.
    /// * A C tube adds one compact singular leaf component and puts two
    ///   critical points on one level, so the form is not generic.
    pub fn classify_leaves(&self) -> LeafReport {
        let ranks: Vec<usize> = self.summands.iter().map(|s| self.summand_rank(s)).collect();
        let compact = |id: &str| ranks[self.summand_index(id).expect("checked")] == 1;
        let mut has_compact = false;
        let mut has_noncompact = ranks.contains(&2);
        let mut singular = 0;
        let mut generic = true;

        for (s, &rank) in self.summands.iter().zip(&ranks) {
            let disks_small = self.tubes.iter().all(|t| {
                (t.left != s.id || t.left_disk == Disk::Small)
                    && (t.right != s.id || t.right_disk == Disk::Small)
            });
            if rank == 1 && disks_small {
                has_compact = true;
            }
        }
        for t in &self.tubes {
            match t.kind {
                TubeKind::A => {
                    let both_small = t.left_disk == Disk::Small && t.right_disk == Disk::Small;
                    let joined_compact = compact(&t.left)
                        && compact(&t.right)
                        && (both_small || {
                            let l = &self.summands[self.summand_index(&t.left).expect("checked")];
                            let r = &self.summands[self.summand_index(&t.right).expect("checked")];
                            qrank(&[l.p.clone(), l.q.clone(), r.p.clone(), r.q.clone()])
                                .expect("one table")
                                == 1
                        });
                    if joined_compact {
                        has_compact = true;
                    } else {
                        has_noncompact = true;
                    }
                }
                TubeKind::B => has_compact = true,
                TubeKind::C => {
                    singular += 1;
                    generic = false;
                }
            }
        }
        LeafReport {
            has_compact_regular_leaf: has_compact,
            all_regular_leaves_noncompact: !has_compact,
            has_noncompact_regular_leaf: has_noncompact,
            compact_singular_components: singular,
            generic,
        }
    }

    /// Periods `(p1, q1, p2, q2, ...)` on the standard symplectic basis.
    pub fn periods(&self) -> Vec<ExactScalar> {
        self.summands
            .iter()
            .flat_map(|s| [s.p.clone(), s.q.clone()])
            .collect()
    }

    /// Rank, splitness and critical-point count of the class.
    ///
    /// Splitness: a connected sum of tori has free-product fundamental group,
    /// and a homomorphism from `Z^2` to a free group has cyclic image, so the
    /// class factors through a free group exactly when every summand's period
    /// pair spans a rank-≤1 group.
    pub fn class_report(&self) -> ClassReport {
        let periods = self.periods();
        let rank = qrank(&periods).expect("one table");
        let genus = self.genus();
        ClassReport {
            rank,
            completely_irrational: rank == 2 * genus,
            split: self.summands.iter().all(|s| self.summand_rank(s) <= 1),
            m1: 2 * self.tubes.len(),
            genus,
            periods,
        }
    }

    /// A nonzero integral class `θ = (a1, b1, a2, b2, ...)` with
    /// `θ ∪ [ω] = Σ (ai·qi − bi·pi) = 0`, if one exists.
    pub fn cup_vanisher(&self) -> Option<Vec<BigInt>> {
        let pairing: Vec<ExactScalar> = self
            .summands
            .iter()
            .flat_map(|s| [s.q.clone(), s.p.negate()])
            .collect();
        integer_relation(&pairing).expect("one table")
    }

    /// `Σ (ai·qi − bi·pi)` for a candidate θ.
    pub fn cup_product(&self, theta: &[BigInt]) -> Result<ExactScalar, ScalarError> {
        let pairing: Vec<ExactScalar> = self
            .summands
            .iter()
            .flat_map(|s| [s.q.clone(), s.p.negate()])
            .collect();
        crate::scalar::substitute(theta, &pairing)
    }

    pub fn consistency_check(&self) -> ConsistencyReport {
        let leaves = self.classify_leaves();
        let class = self.class_report();
        let calabi = self.calabi_status();
        let vanisher = self.cup_vanisher().is_some();
        let mut checks = Vec::new();
        let mut push = |code, statement, premise: bool, conclusion: bool| {
            checks.push(Implication {
                code,
                statement,
                premise,
                holds: !premise || conclusion,
            })
        };
        push(
            "I1",
            "rank 1 => every regular leaf compact",
            class.rank == 1,
            !leaves.has_noncompact_regular_leaf,
        );
        push(
            "I2",
            "generic, no compact leaves => Calabi",
            leaves.generic
                && leaves.all_regular_leaves_noncompact
                && leaves.compact_singular_components == 0,
            calabi,
        );
        push(
            "I3",
            "Calabi with a compact leaf => some integral class cups to zero",
            calabi && leaves.has_compact_regular_leaf,
            vanisher,
        );
        push(
            "I4",
            "completely irrational => no cup vanisher, and if Calabi no compact leaf",
            class.completely_irrational,
            !vanisher && !(calabi && leaves.has_compact_regular_leaf),
        );
        push("I5", "m1 = 2g - 2", true, class.m1 + 2 == 2 * class.genus);
        // Rank <= 1 for a pair means the two periods satisfy an integer relation.
        let summand_ranks_ok = self.summands.iter().all(|s| {
            integer_relation(&[s.p.clone(), s.q.clone()])
                .expect("one table")
                .is_some()
        });
        push(
            "I6",
            "split <=> every summand has rank <= 1",
            true,
            class.split == summand_ranks_ok,
        );
        ConsistencyReport { checks }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Implication {
    pub code: &'static str,
    pub statement: &'static str,
    pub premise: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub checks: Vec<Implication>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &Implication> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

/// Table with `lambda = sqrt 2`, `mu = sqrt 3`, `nu = sqrt 5`.
pub fn example_table() -> Arc<SymbolTable> {
    SymbolTable::new(vec![
        Symbol::sqrt("lambda", 2, "1.414", "1.415").expect("valid"),
        Symbol::sqrt("mu", 3, "1.732", "1.733").expect("valid"),
        Symbol::sqrt("nu", 5, "2.236", "2.237").expect("valid"),
    ])
    .expect("valid table")
}

/// The four genus-2 examples:
///
/// 1. `T(1,0) +A(small,small)+ T(λ,μ)`: Calabi, rank 2g−1, some compact leaves.
/// 2. `T(1,0) +A(ribbon 3,ribbon 2)+ T(λ,0)`: Calabi, split of rank 2, no compact leaves.
/// 3. `T(1,λ) +B(small,small)+ T(μ,ν)`: not Calabi, completely irrational, compact leaves.
/// 4. `T(1,λ) +C(small,small)+ T(1,μ)`: not Calabi, not generic, no compact regular leaves.
pub fn surface_example(n: u32) -> Result<SurfaceModel, SurfaceError> {
    let t = example_table();
    let s = |text: &str| t.parse_scalar(text).expect("example scalar");
    let (p1, q1, p2, q2, kind, d1, d2) = match n {
        1 => (
            "1",
            "0",
            "lambda",
            "mu",
            TubeKind::A,
            Disk::Small,
            Disk::Small,
        ),
        2 => (
            "1",
            "0",
            "lambda",
            "0",
            TubeKind::A,
            Disk::Ribbon(3),
            Disk::Ribbon(2),
        ),
        3 => (
            "1",
            "lambda",
            "mu",
            "nu",
            TubeKind::B,
            Disk::Small,
            Disk::Small,
        ),
        4 => (
            "1",
            "lambda",
            "1",
            "mu",
            TubeKind::C,
            Disk::Small,
            Disk::Small,
        ),
        _ => return Err(SurfaceError::NoSuchExample(n)),
    };
    let left = SurfaceModel::torus_in(&t, s(p1), s(q1))?;
    let right = SurfaceModel::torus_in(&t, s(p2), s(q2))?;
    Ok(left
        .connect_sum(&right, kind, d1, d2, "T1", "T1")?
        .with_name(format!("example{n}")))
}
