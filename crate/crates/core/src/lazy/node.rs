use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::approx::{ApproxElement, ApproxPoly, ApproxRing, ExtMode, Family};
use crate::error::{Error, Result, Val};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum TypeTag {
    ExactRing,
    ExactElement,
    ExactPolyRing,
    ExactPoly,
}

impl TypeTag {
    pub fn is_structure(self) -> bool {
        matches!(self, TypeTag::ExactRing | TypeTag::ExactPolyRing)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct KindId(pub(crate) u32);

/// An approximation of any exact object at one epoch.
#[derive(Clone, Debug)]
pub enum Approx {
    Ring(ApproxRing),
    Elt(ApproxElement),
    /// A polynomial ring, approximated by its coefficient ring.
    PolyRing(ApproxRing),
    Poly(ApproxPoly),
}

impl Approx {
    pub fn tag(&self) -> TypeTag {
        match self {
            Approx::Ring(_) => TypeTag::ExactRing,
            Approx::Elt(_) => TypeTag::ExactElement,
            Approx::PolyRing(_) => TypeTag::ExactPolyRing,
            Approx::Poly(_) => TypeTag::ExactPoly,
        }
    }

    pub fn as_ring(&self) -> Result<&ApproxRing> {
        match self {
            Approx::Ring(r) | Approx::PolyRing(r) => Ok(r),
            other => Err(Error::DependencyMismatch(format!("expected a structure, got {:?}", other.tag()))),
        }
    }

    pub fn as_elt(&self) -> Result<&ApproxElement> {
        match self {
            Approx::Elt(x) => Ok(x),
            other => Err(Error::DependencyMismatch(format!("expected an element, got {:?}", other.tag()))),
        }
    }

    pub fn as_poly(&self) -> Result<&ApproxPoly> {
        match self {
            Approx::Poly(f) => Ok(f),
            other => Err(Error::DependencyMismatch(format!("expected a polynomial, got {:?}", other.tag()))),
        }
    }

    /// The ring this approximation lives in (itself for structures).
    pub fn home_ring(&self) -> &ApproxRing {
        match self {
            Approx::Ring(r) | Approx::PolyRing(r) => r,
            Approx::Elt(x) => x.ring(),
            Approx::Poly(f) => f.ring(),
        }
    }

    /// Absolute precision: the ring precision for structures, the minimum
    /// over coefficients for polynomials.
    pub fn abs_precision(&self) -> Val {
        match self {
            Approx::Ring(r) | Approx::PolyRing(r) => Val::Finite(r.precision()),
            Approx::Elt(x) => x.abs_precision(),
            Approx::Poly(f) => f.abs_precision(),
        }
    }

    pub fn weakly_equals(&self, other: &Approx) -> Result<bool> {
        match (self, other) {
            (Approx::Ring(a), Approx::Ring(b)) | (Approx::PolyRing(a), Approx::PolyRing(b)) => {
                Ok(a.family() == b.family())
            }
            (Approx::Elt(a), Approx::Elt(b)) => a.weakly_equals(b),
            (Approx::Poly(a), Approx::Poly(b)) => Ok(a.len() == b.len() && a.weakly_equals(b)?),
            _ => Ok(false),
        }
    }
}

impl fmt::Display for Approx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Approx::Ring(r) => write!(f, "{r}"),
            Approx::PolyRing(r) => write!(f, "({r})[x]"),
            Approx::Elt(x) => write!(f, "{x}"),
            Approx::Poly(p) => write!(f, "{p}"),
        }
    }
}

pub type UserFn = Arc<dyn Fn(u32, &[DepRef<'_>]) -> Result<Approx> + Send + Sync>;
pub type GetApproxFn = UserFn;

/// A constant dependency, passed to get-approx unchanged.
#[derive(Clone)]
pub enum Payload {
    Int(BigInt),
    Rat(BigRational),
    Index(i64),
    Bool(bool),
    Mode(ExtMode),
    Family(Family),
    Func(UserFn),
    Program(Arc<Program>),
}

impl fmt::Debug for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Int(n) => write!(f, "Int({n})"),
            Payload::Rat(q) => write!(f, "Rat({q})"),
            Payload::Index(i) => write!(f, "Index({i})"),
            Payload::Bool(b) => write!(f, "Bool({b})"),
            Payload::Mode(m) => write!(f, "Mode({m:?})"),
            Payload::Family(fam) => write!(f, "Family({})", fam.id()),
            Payload::Func(_) => write!(f, "Func"),
            Payload::Program(p) => write!(f, "Program({} instructions)", p.instructions.len()),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Dep {
    Node(NodeId),
    Const(Payload),
}

/// A dependency value at one epoch.
#[derive(Clone, Copy, Debug)]
pub enum DepRef<'a> {
    Approx(&'a Approx),
    Const(&'a Payload),
}

fn mismatch(what: &str, got: &DepRef<'_>) -> Error {
    Error::DependencyMismatch(format!("expected {what}, got {got:?}"))
}

impl<'a> DepRef<'a> {
    pub fn approx(&self) -> Result<&'a Approx> {
        match self {
            DepRef::Approx(a) => Ok(a),
            other => Err(mismatch("an approximation", other)),
        }
    }

    pub fn ring(&self) -> Result<&'a ApproxRing> {
        self.approx()?.as_ring()
    }

    pub fn elt(&self) -> Result<&'a ApproxElement> {
        self.approx()?.as_elt()
    }

    pub fn poly(&self) -> Result<&'a ApproxPoly> {
        self.approx()?.as_poly()
    }

    pub fn int(&self) -> Result<&'a BigInt> {
        match self {
            DepRef::Const(Payload::Int(n)) => Ok(n),
            other => Err(mismatch("an integer", other)),
        }
    }

    pub fn rat(&self) -> Result<&'a BigRational> {
        match self {
            DepRef::Const(Payload::Rat(q)) => Ok(q),
            other => Err(mismatch("a rational", other)),
        }
    }

    pub fn index(&self) -> Result<i64> {
        match self {
            DepRef::Const(Payload::Index(i)) => Ok(*i),
            other => Err(mismatch("an index", other)),
        }
    }

    pub fn bool(&self) -> Result<bool> {
        match self {
            DepRef::Const(Payload::Bool(b)) => Ok(*b),
            other => Err(mismatch("a flag", other)),
        }
    }

    pub fn mode(&self) -> Result<ExtMode> {
        match self {
            DepRef::Const(Payload::Mode(m)) => Ok(*m),
            other => Err(mismatch("an extension mode", other)),
        }
    }

    pub fn family(&self) -> Result<Family> {
        match self {
            DepRef::Const(Payload::Family(f)) => Ok(*f),
            other => Err(mismatch("a family", other)),
        }
    }

    pub fn func(&self) -> Result<&'a UserFn> {
        match self {
            DepRef::Const(Payload::Func(f)) => Ok(f),
            other => Err(mismatch("a function", other)),
        }
    }
}

/// One straight-line program step: run `kind` on the listed value slots.
#[derive(Clone, Debug)]
pub struct Instruction {
    pub tag: TypeTag,
    pub kind: KindId,
    pub operands: Vec<usize>,
}

/// Value slots `0..constants` hold constant payloads, the next `inputs` slots
/// the lazy inputs, and each instruction appends one slot.
#[derive(Clone, Debug)]
pub struct Program {
    pub constants: usize,
    pub inputs: usize,
    pub instructions: Vec<Instruction>,
}

#[derive(Clone)]
pub struct KindSpec {
    pub name: String,
    pub tag: TypeTag,
    /// `None` accepts any number of dependencies.
    pub arity: Option<usize>,
    /// Expected tag per dependency position; `None` marks a constant.
    pub dep_tags: Option<Vec<Option<TypeTag>>>,
    pub get_approx: GetApproxFn,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub tag: TypeTag,
    pub kind: KindId,
    pub deps: Vec<Dep>,
    pub min_epoch: u32,
    pub parent: Option<NodeId>,
    pub(crate) cache: Vec<Approx>,
}

impl Node {
    pub fn cache(&self) -> &[Approx] {
        &self.cache
    }

    pub fn node_deps(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.deps.iter().filter_map(|d| match d {
            Dep::Node(id) => Some(*id),
            Dep::Const(_) => None,
        })
    }
}
