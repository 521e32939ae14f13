use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use super::node::*;
use crate::approx::ApproxRing;
use crate::error::{Error, Result, Val};

pub const DEFAULT_MAX_EPOCH: u32 = 31;
pub const MAX_EPOCH_ENV: &str = "XPADIC_MAX_EPOCH";

pub const USER_KIND: KindId = KindId(0);
pub const PROGRAM_KIND: KindId = KindId(1);

/// Base precision `2^n` of epoch `n`.
pub fn epoch_precision(n: u32) -> i64 {
    assert!((1..63).contains(&n), "epoch out of range");
    1i64 << n
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    pub validate: bool,
    pub max_epoch: u32,
}

impl Default for Config {
    /// Validation on; the budget comes from `XPADIC_MAX_EPOCH` when set.
    fn default() -> Self {
        let max_epoch = std::env::var(MAX_EPOCH_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .filter(|&n: &u32| (1..63).contains(&n))
            .unwrap_or(DEFAULT_MAX_EPOCH);
        Config { validate: true, max_epoch }
    }
}

pub type Hook = Box<dyn FnMut(NodeId, u32) + Send>;

/// The arena of exact objects and their approximation caches.
pub struct Graph {
    nodes: Vec<Node>,
    kinds: Vec<KindSpec>,
    config: Config,
    hook: Option<Hook>,
    calls: u64,
}

impl Default for Graph {
    fn default() -> Self {
        Self::new(Config::default())
    }
}

impl Graph {
    pub fn new(config: Config) -> Self {
        let user: GetApproxFn = Arc::new(|n, deps| {
            let ga = deps.first().ok_or(Error::DependencyMismatch("missing user function".into()))?.func()?;
            ga(n, &deps[1..])
        });
        let program: GetApproxFn =
            Arc::new(|_, _| Err(Error::InvalidArgument("programs run inside the engine".into())));
        let mut g = Graph { nodes: Vec::new(), kinds: Vec::new(), config, hook: None, calls: 0 };
        g.kinds.push(KindSpec { name: "user".into(), tag: TypeTag::ExactElement, arity: None, dep_tags: None, get_approx: user });
        g.kinds.push(KindSpec { name: "program".into(), tag: TypeTag::ExactElement, arity: None, dep_tags: None, get_approx: program });
        g
    }

    pub fn config(&self) -> Config {
        self.config
    }

    pub fn set_validate(&mut self, on: bool) {
        self.config.validate = on;
    }

    pub fn set_max_epoch(&mut self, n: u32) {
        self.config.max_epoch = n.clamp(1, 62);
    }

    /// Installs a callback run after every get-approx invocation.
    pub fn set_hook(&mut self, hook: Option<Hook>) {
        self.hook = hook;
    }

    /// Total get-approx invocations so far.
    pub fn get_approx_calls(&self) -> u64 {
        self.calls
    }

    pub fn register_kind(&mut self, spec: KindSpec) -> KindId {
        self.kinds.push(spec);
        KindId(self.kinds.len() as u32 - 1)
    }

    pub fn kind(&self, id: KindId) -> &KindSpec {
        &self.kinds[id.0 as usize]
    }

    pub fn find_kind(&self, name: &str) -> Option<KindId> {
        self.kinds.iter().position(|k| k.name == name).map(|i| KindId(i as u32))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn cached(&self, id: NodeId) -> &[Approx] {
        &self.nodes[id.index()].cache
    }

    pub fn add_node(
        &mut self,
        tag: TypeTag,
        kind: KindId,
        deps: Vec<Dep>,
        min_epoch: u32,
        parent: Option<NodeId>,
    ) -> Result<NodeId> {
        let spec = self.kinds.get(kind.0 as usize).ok_or(Error::DependencyMismatch("unknown kind".into()))?;
        if let Some(a) = spec.arity {
            if a != deps.len() {
                return Err(Error::DependencyMismatch(format!(
                    "kind {} expects {a} dependencies, got {}",
                    spec.name,
                    deps.len()
                )));
            }
        }
        for (i, d) in deps.iter().enumerate() {
            let expected = spec.dep_tags.as_ref().and_then(|t| t.get(i).copied());
            match d {
                Dep::Node(x) => {
                    let got = self
                        .nodes
                        .get(x.index())
                        .ok_or(Error::DependencyMismatch(format!("unknown node {x}")))?
                        .tag;
                    if let Some(exp) = expected {
                        if exp != Some(got) {
                            return Err(Error::DependencyMismatch(format!(
                                "kind {} dependency {i}: expected {exp:?}, got {got:?}",
                                spec.name
                            )));
                        }
                    }
                }
                Dep::Const(_) => {
                    if let Some(Some(exp)) = expected {
                        return Err(Error::DependencyMismatch(format!(
                            "kind {} dependency {i}: expected {exp:?}, got a constant",
                            spec.name
                        )));
                    }
                }
            }
        }
        if let Some(p) = parent {
            let ptag = self.nodes.get(p.index()).ok_or(Error::ParentMismatch(format!("unknown node {p}")))?.tag;
            if !ptag.is_structure() {
                return Err(Error::ParentMismatch(format!("{p} is not a structure")));
            }
        }
        self.nodes.push(Node { tag, kind, deps, min_epoch: min_epoch.max(1), parent, cache: Vec::new() });
        Ok(NodeId(self.nodes.len() as u32 - 1))
    }

    /// A node of the shared user kind: dependencies `[ga, deps...]`.
    pub fn make_user_node(
        &mut self,
        parent: NodeId,
        tag: TypeTag,
        ga: UserFn,
        deps: Vec<Dep>,
        min_epoch: u32,
    ) -> Result<NodeId> {
        if !self.node(parent).tag.is_structure() {
            return Err(Error::ParentMismatch(format!("{parent} is not a structure")));
        }
        let mut all = vec![Dep::Const(Payload::Func(ga))];
        all.extend(deps);
        self.add_node(tag, USER_KIND, all, min_epoch, Some(parent))
    }

    pub fn set_min_epoch(&mut self, id: NodeId, m: u32) {
        self.nodes[id.index()].min_epoch = m.max(1);
    }

    fn check_epoch(&self, n: u32) -> Result<()> {
        if n == 0 {
            return Err(Error::ZeroEpoch);
        }
        if n > self.config.max_epoch {
            return Err(Error::BudgetExhausted { epoch: self.config.max_epoch, last_weak_valuation: None });
        }
        Ok(())
    }

    /// The approximation of `id` at epoch `n`, filling caches as needed.
    pub fn approximation(&mut self, id: NodeId, n: u32) -> Result<&Approx> {
        self.check_epoch(n)?;
        self.ensure(id, n)?;
        Ok(&self.nodes[id.index()].cache[n as usize - 1])
    }

    fn ensure(&mut self, root: NodeId, n: u32) -> Result<()> {
        let mut stack = vec![(root, n)];
        while let Some(&(id, n)) = stack.last() {
            let node = &self.nodes[id.index()];
            let len = node.cache.len() as u32;
            if len >= n {
                stack.pop();
                continue;
            }
            let m = node.min_epoch;
            if m > self.config.max_epoch {
                return Err(Error::BudgetExhausted { epoch: self.config.max_epoch, last_weak_valuation: None });
            }
            let i = (len + 1).max(m);
            let backfill = i > len + 1;
            let before = stack.len();
            for d in node.node_deps() {
                if (self.nodes[d.index()].cache.len() as u32) < i {
                    stack.push((d, i));
                }
            }
            if let Some(p) = node.parent {
                let need = if self.config.validate { i } else if backfill { i - 1 } else { 0 };
                if (self.nodes[p.index()].cache.len() as u32) < need {
                    stack.push((p, need));
                }
            }
            if stack.len() > before {
                continue;
            }
            self.compute_epoch(id, i)?;
        }
        Ok(())
    }

    fn compute_epoch(&mut self, id: NodeId, i: u32) -> Result<()> {
        let node = &self.nodes[id.index()];
        let refs: Vec<DepRef<'_>> = node
            .deps
            .iter()
            .map(|d| match d {
                Dep::Node(x) => DepRef::Approx(&self.nodes[x.index()].cache[i as usize - 1]),
                Dep::Const(p) => DepRef::Const(p),
            })
            .collect();
        let result = if node.kind == PROGRAM_KIND {
            self.run_program(i, &refs)
        } else {
            (self.kinds[node.kind.0 as usize].get_approx)(i, &refs)
        };
        let x = result.map_err(|e| Error::GetApprox {
            node: id,
            kind: self.kinds[node.kind.0 as usize].name.clone(),
            epoch: i,
            source: Box::new(e),
        })?;
        drop(refs);
        self.calls += 1;
        if let Some(h) = self.hook.as_mut() {
            h(id, i);
        }
        if x.tag() != self.nodes[id.index()].tag {
            return Err(Error::Validation {
                node: id,
                epoch: i,
                reason: format!("get-approx produced {:?}", x.tag()),
            });
        }
        if self.config.validate {
            self.validate(&x, id, i)?;
        }
        let len = self.nodes[id.index()].cache.len() as u32;
        for j in len + 1..i {
            let y = self.limit_to_epoch(id, &x, i, j)?;
            if self.config.validate {
                self.validate(&y, id, j)?;
            }
            self.nodes[id.index()].cache.push(y);
        }
        self.nodes[id.index()].cache.push(x);
        Ok(())
    }

    /// The approximation at epoch `j` below the minimum epoch `i`, obtained
    /// from the epoch-`i` approximation `x`.
    fn limit_to_epoch(&self, id: NodeId, x: &Approx, i: u32, j: u32) -> Result<Approx> {
        let node = &self.nodes[id.index()];
        let parent_ring = |p: NodeId| -> Result<&ApproxRing> { self.nodes[p.index()].cache[j as usize - 1].as_ring() };
        Ok(match (x, node.parent) {
            (Approx::Elt(e), Some(p)) => Approx::Elt(e.coerce_into(parent_ring(p)?)?),
            (Approx::Poly(f), Some(p)) => Approx::Poly(f.coerce_into(parent_ring(p)?)?),
            (Approx::Ring(r), _) => Approx::Ring(r.change_precision((r.precision() >> (i - j)).max(1))?),
            (Approx::PolyRing(r), _) => Approx::PolyRing(r.change_precision((r.precision() >> (i - j)).max(1))?),
            _ => return Err(Error::ParentMismatch(format!("{id} has no parent to coerce into"))),
        })
    }

    /// Why `x` is not a valid epoch-`n` approximation of `id`, if it is not.
    /// Requires the cache of `id` through `n - 1` when present and the
    /// parent's approximation at `n`.
    pub fn validation_failure(&self, x: &Approx, id: NodeId, n: u32) -> Option<String> {
        let node = &self.nodes[id.index()];
        if x.tag() != node.tag {
            return Some(format!("expected {:?}, got {:?}", node.tag, x.tag()));
        }
        if n >= 2 {
            if let Some(prev) = node.cache.get(n as usize - 2) {
                match x.weakly_equals(prev) {
                    Ok(true) => {}
                    Ok(false) => return Some(format!("not weakly equal to the epoch {} approximation", n - 1)),
                    Err(e) => return Some(format!("cannot compare with epoch {}: {e}", n - 1)),
                }
                if x.abs_precision() < prev.abs_precision() {
                    return Some(format!(
                        "precision lost: {} < {}",
                        x.abs_precision(),
                        prev.abs_precision()
                    ));
                }
            }
        }
        if let Some(p) = node.parent {
            if let Some(pa) = self.nodes[p.index()].cache.get(n as usize - 1) {
                let want = pa.home_ring();
                if !x.home_ring().same_as(want) {
                    return Some(format!("parent mismatch: got {}, expected {}", x.home_ring(), want));
                }
            }
        }
        None
    }

    pub fn is_valid_approximation(&self, x: &Approx, id: NodeId, n: u32) -> bool {
        self.validation_failure(x, id, n).is_none()
    }

    fn validate(&self, x: &Approx, id: NodeId, n: u32) -> Result<()> {
        match self.validation_failure(x, id, n) {
            None => Ok(()),
            Some(reason) => Err(Error::Validation { node: id, epoch: n, reason }),
        }
    }

    fn run_program(&self, n: u32, deps: &[DepRef<'_>]) -> Result<Approx> {
        let prog = match deps.first() {
            Some(DepRef::Const(Payload::Program(p))) => p.clone(),
            _ => return Err(Error::DependencyMismatch("missing program".into())),
        };
        let base = &deps[1..];
        if base.len() != prog.constants + prog.inputs {
            return Err(Error::DependencyMismatch("program input arity".into()));
        }
        let mut computed: Vec<Approx> = Vec::with_capacity(prog.instructions.len());
        for ins in &prog.instructions {
            let args: Vec<DepRef<'_>> = ins
                .operands
                .iter()
                .map(|&j| if j < base.len() { base[j] } else { DepRef::Approx(&computed[j - base.len()]) })
                .collect();
            let v = (self.kinds[ins.kind.0 as usize].get_approx)(n, &args)?;
            computed.push(v);
        }
        computed.pop().ok_or(Error::InvalidArgument("empty program".into()))
    }

    /// A node equal to `z` whose dependencies are `[program, constants...,
    /// inputs...]`, eliminating the intermediate nodes between `z` and
    /// `inputs`. Structures reached along the way join the inputs.
    pub fn optimize(&mut self, z: NodeId, inputs: &[NodeId]) -> Result<NodeId> {
        let mut inputs: Vec<NodeId> = inputs.to_vec();
        let mut input_set: HashSet<NodeId> = inputs.iter().copied().collect();
        if input_set.contains(&z) {
            return Err(Error::InvalidArgument("the optimized node is one of the inputs".into()));
        }
        let mut order: Vec<NodeId> = Vec::new();
        let mut done: HashSet<NodeId> = HashSet::new();
        let mut stack: Vec<(NodeId, usize)> = vec![(z, 0)];
        while let Some((id, next)) = stack.pop() {
            let node = &self.nodes[id.index()];
            if next == 0 {
                let lazy_deps = node.node_deps().filter(|d| !self.nodes[d.index()].tag.is_structure()).count();
                if lazy_deps == 0 {
                    return Err(Error::UncoveredSink(id));
                }
            }
            let mut pushed = false;
            for (k, d) in node.deps.iter().enumerate().skip(next) {
                let Dep::Node(d) = d else { continue };
                if input_set.contains(d) || done.contains(d) {
                    continue;
                }
                if self.nodes[d.index()].tag.is_structure() {
                    input_set.insert(*d);
                    inputs.push(*d);
                    continue;
                }
                stack.push((id, k + 1));
                stack.push((*d, 0));
                pushed = true;
                break;
            }
            if !pushed && done.insert(id) {
                order.push(id);
            }
        }

        let mut constants: Vec<Payload> = Vec::new();
        for &id in &order {
            for d in &self.nodes[id.index()].deps {
                if let Dep::Const(p) = d {
                    constants.push(p.clone());
                }
            }
        }
        let r = constants.len();
        let mut slot: HashMap<NodeId, usize> = HashMap::new();
        for (i, x) in inputs.iter().enumerate() {
            slot.insert(*x, r + i);
        }
        let mut instructions = Vec::with_capacity(order.len());
        let mut next_const = 0;
        let mut min_epoch = 1;
        for (k, &id) in order.iter().enumerate() {
            let node = &self.nodes[id.index()];
            if node.kind == PROGRAM_KIND {
                return Err(Error::InvalidArgument(format!("{id} is already optimized")));
            }
            let operands = node
                .deps
                .iter()
                .map(|d| match d {
                    Dep::Const(_) => {
                        next_const += 1;
                        next_const - 1
                    }
                    Dep::Node(x) => slot[x],
                })
                .collect();
            instructions.push(Instruction { tag: node.tag, kind: node.kind, operands });
            slot.insert(id, r + inputs.len() + k);
            min_epoch = min_epoch.max(node.min_epoch);
        }
        let program = Program { constants: r, inputs: inputs.len(), instructions };
        let mut deps = vec![Dep::Const(Payload::Program(Arc::new(program)))];
        deps.extend(constants.into_iter().map(Dep::Const));
        deps.extend(inputs.iter().map(|x| Dep::Node(*x)));
        let zn = &self.nodes[z.index()];
        let (tag, parent) = (zn.tag, zn.parent);
        self.add_node(tag, PROGRAM_KIND, deps, min_epoch, parent)
    }

    /// Checks cache monotonicity, cross-epoch weak equality and the parent
    /// relation over everything cached for `id`.
    pub fn audit(&self, id: NodeId) -> Result<()> {
        let node = &self.nodes[id.index()];
        for (k, x) in node.cache.iter().enumerate() {
            let n = k as u32 + 1;
            if k > 0 {
                let prev = &node.cache[k - 1];
                if !x.weakly_equals(prev)? || x.abs_precision() < prev.abs_precision() {
                    return Err(Error::Validation { node: id, epoch: n, reason: "cache not monotone".into() });
                }
            }
            if let Some(p) = node.parent {
                if let Some(pa) = self.nodes[p.index()].cache.get(k) {
                    if !x.home_ring().same_as(pa.home_ring()) {
                        return Err(Error::Validation { node: id, epoch: n, reason: "parent mismatch".into() });
                    }
                }
            }
        }
        Ok(())
    }

    /// The weak valuation of the latest cached approximation of an element.
    pub fn last_weak_valuation(&self, id: NodeId) -> Option<Val> {
        match self.nodes[id.index()].cache.last() {
            Some(Approx::Elt(x)) => Some(x.weak_valuation()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::ApproxElement;
    use num_bigint::BigInt;
    use std::sync::Mutex;

    /// A tiny kind set over `Q_p`: prime field, integer coercion, addition,
    /// division and a deliberately faulty kind.
    struct Fixture {
        g: Graph,
        field: NodeId,
        coerce: KindId,
        add: KindId,
        div: KindId,
    }

    fn fixture(p: i64) -> Fixture {
        let mut g = Graph::new(Config { validate: true, max_epoch: 12 });
        let prime = g.register_kind(KindSpec {
            name: "prime".into(),
            tag: TypeTag::ExactRing,
            arity: Some(2),
            dep_tags: Some(vec![None, None]),
            get_approx: Arc::new(|n, d| {
                Ok(Approx::Ring(ApproxRing::prime_in_family(d[0].int()?.clone(), epoch_precision(n), true, d[1].family()?)?))
            }),
        });
        let coerce = g.register_kind(KindSpec {
            name: "coerce".into(),
            tag: TypeTag::ExactElement,
            arity: Some(2),
            dep_tags: Some(vec![Some(TypeTag::ExactRing), None]),
            get_approx: Arc::new(|_, d| {
                let r = d[0].ring()?;
                Ok(Approx::Elt(r.coerce_int(d[1].int()?.clone())?.truncate_abs(r.precision())))
            }),
        });
        let add = g.register_kind(KindSpec {
            name: "add".into(),
            tag: TypeTag::ExactElement,
            arity: Some(2),
            dep_tags: None,
            get_approx: Arc::new(|_, d| Ok(Approx::Elt(d[0].elt()?.add(d[1].elt()?)?))),
        });
        let div = g.register_kind(KindSpec {
            name: "div".into(),
            tag: TypeTag::ExactElement,
            arity: Some(2),
            dep_tags: None,
            get_approx: Arc::new(|_, d| Ok(Approx::Elt(d[0].elt()?.div(d[1].elt()?)?))),
        });
        let field = g
            .add_node(
                TypeTag::ExactRing,
                prime,
                vec![Dep::Const(Payload::Int(BigInt::from(p))), Dep::Const(Payload::Family(crate::approx::Family::fresh()))],
                1,
                None,
            )
            .unwrap();
        Fixture { g, field, coerce, add, div }
    }

    impl Fixture {
        fn int(&mut self, n: i64) -> NodeId {
            self.g
                .add_node(TypeTag::ExactElement, self.coerce, vec![Dep::Node(self.field), Dep::Const(Payload::Int(n.into()))], 1, Some(self.field))
                .unwrap()
        }

        fn op(&mut self, kind: KindId, a: NodeId, b: NodeId, min_epoch: u32) -> NodeId {
            self.g
                .add_node(TypeTag::ExactElement, kind, vec![Dep::Node(a), Dep::Node(b)], min_epoch, Some(self.field))
                .unwrap()
        }

        fn elt(&mut self, id: NodeId, n: u32) -> ApproxElement {
            self.g.approximation(id, n).unwrap().as_elt().unwrap().clone()
        }
    }

    #[test]
    fn epoch_precision_values() {
        assert_eq!(epoch_precision(1), 2);
        assert_eq!(epoch_precision(4), 16);
        assert_eq!(epoch_precision(16), 65536);
    }

    #[test]
    fn coerce_sequence_in_z3() {
        let mut f = fixture(3);
        let x = f.int(1);
        let shown: Vec<String> = (1..=3).map(|n| f.elt(x, n).to_string()).collect();
        assert_eq!(shown, ["1 + O(3^2)", "1 + O(3^4)", "1 + O(3^8)"]);
    }

    #[test]
    fn cache_hits_do_not_call_get_approx() {
        let mut f = fixture(2);
        let x = f.int(5);
        f.g.approximation(x, 4).unwrap();
        let before = f.g.get_approx_calls();
        f.g.approximation(x, 4).unwrap();
        f.g.approximation(x, 2).unwrap();
        assert_eq!(f.g.get_approx_calls(), before);
    }

    #[test]
    fn min_epoch_backfills_by_coercion() {
        let mut f = fixture(2);
        let x = f.int(1);
        let y = f.int(4);
        // 4 = 2^2 is weakly zero at precision 2 and nonzero at 4
        assert!(f.elt(y, 1).is_weakly_zero());
        assert!(!f.elt(y, 2).is_weakly_zero());
        let z = f.op(f.div, x, y, 2);
        let z1 = f.elt(z, 1);
        let z2 = f.elt(z, 2);
        assert_eq!(z1, z2.coerce_into(z1.ring()).unwrap());
        assert_eq!(z1.ring().precision(), 2);
        assert!(z1.weakly_equals(&z2).unwrap());
        // without min_epoch the division fails at epoch 1
        let bad = f.op(f.div, x, y, 1);
        let err = f.g.approximation(bad, 1).unwrap_err();
        assert!(matches!(err.root_cause(), Error::WeaklyZeroDivisor));
    }

    #[test]
    fn validation_predicate() {
        let mut f = fixture(2);
        let x = f.int(1);
        f.g.approximation(x, 1).unwrap();
        let r4 = f.g.approximation(f.field, 2).unwrap().as_ring().unwrap().clone();
        let one = Approx::Elt(r4.coerce_int(1).unwrap());
        let three = Approx::Elt(r4.coerce_int(3).unwrap());
        assert!(f.g.is_valid_approximation(&one, x, 2));
        assert!(!f.g.is_valid_approximation(&three, x, 2));
        // 1 + O(2^2) after 1 + O(2^4)
        let y = f.int(1);
        f.g.approximation(y, 2).unwrap();
        let r2 = f.g.approximation(f.field, 1).unwrap().as_ring().unwrap().clone();
        let low = Approx::Elt(r2.coerce_int(1).unwrap());
        let reason = f.g.validation_failure(&low, y, 3).unwrap();
        assert!(reason.contains("precision lost") || reason.contains("parent"), "{reason}");
    }

    #[test]
    fn user_kinds() {
        let mut f = fixture(2);
        let x = f.int(7);
        let id: UserFn = Arc::new(|_, d| Ok(d[0].approx()?.clone()));
        let u = f.g.make_user_node(f.field, TypeTag::ExactElement, id, vec![Dep::Node(x)], 1).unwrap();
        for n in 1..=5 {
            let (a, b) = (f.elt(u, n), f.elt(x, n));
            assert!(a.weakly_equals(&b).unwrap());
        }
        let wrong: UserFn = Arc::new(|n, _| Ok(Approx::Elt(ApproxRing::prime_field(2, epoch_precision(n))?.one())));
        let w = f.g.make_user_node(f.field, TypeTag::ExactElement, wrong, vec![], 1).unwrap();
        assert!(f.g.approximation(w, 1).unwrap_err().is_validation());
    }

    #[test]
    fn faulty_kind_is_caught() {
        let mut f = fixture(2);
        let field = f.field;
        let faulty: UserFn = Arc::new(move |n, d| {
            let r = d[0].ring()?;
            Ok(Approx::Elt(r.coerce_int(if n >= 3 { 3 } else { 1 })?))
        });
        let x = f.g.make_user_node(field, TypeTag::ExactElement, faulty, vec![Dep::Node(field)], 1).unwrap();
        f.g.approximation(x, 2).unwrap();
        let err = f.g.approximation(x, 3).unwrap_err();
        assert!(err.is_validation(), "{err}");
        f.g.set_validate(false);
        assert!(f.g.approximation(x, 3).is_ok());
    }

    #[test]
    fn one_call_per_node_and_epoch() {
        let mut f = fixture(3);
        let counts: Arc<Mutex<HashMap<(NodeId, u32), u32>>> = Arc::default();
        let c = counts.clone();
        f.g.set_hook(Some(Box::new(move |id, n| *c.lock().unwrap().entry((id, n)).or_default() += 1)));
        let a = f.int(2);
        let b = f.int(5);
        let s = f.op(f.add, a, b, 1);
        let t = f.op(f.add, s, a, 1);
        let u = f.op(f.add, t, s, 1);
        for n in [2, 5, 3, 6] {
            f.g.approximation(u, n).unwrap();
        }
        assert!(counts.lock().unwrap().values().all(|&k| k == 1));
        for id in [a, b, s, t, u] {
            f.g.audit(id).unwrap();
        }
    }

    #[test]
    fn optimizer_program_shape() {
        let mut f = fixture(2);
        let x = f.int(3);
        let y = f.int(5);
        let s = f.op(f.add, x, y, 1);
        let z = f.op(f.add, s, x, 1);
        let zo = f.g.optimize(z, &[x, y]).unwrap();
        let node = f.g.node(zo);
        assert_eq!(node.deps.len(), 3);
        match &node.deps[0] {
            Dep::Const(Payload::Program(p)) => assert_eq!(p.instructions.len(), 2),
            other => panic!("{other:?}"),
        }
        for n in 1..=10 {
            let a = f.elt(z, n);
            let b = f.elt(zo, n);
            assert!(a.weakly_equals(&b).unwrap());
        }
        let w = f.int(4);
        let q = f.op(f.div, x, w, 2);
        assert!(matches!(f.g.optimize(q, &[x]), Err(Error::UncoveredSink(id)) if id == w));
        let q2 = f.op(f.add, q, y, 1);
        let qo = f.g.optimize(q2, &[x, w, y]).unwrap();
        assert_eq!(f.g.node(qo).min_epoch, 2);
    }

    #[test]
    fn budget() {
        let mut f = fixture(2);
        let x = f.int(1);
        assert!(matches!(f.g.approximation(x, 13), Err(Error::BudgetExhausted { .. })));
        assert!(matches!(f.g.approximation(x, 0), Err(Error::ZeroEpoch)));
    }
}
