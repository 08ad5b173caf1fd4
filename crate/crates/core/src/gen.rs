//! Seeded random generators for terms, contexts, pomsets, PLTSs and prime
//! event structures, shared by the sampling harnesses and the CLI.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::logic::{Formula, Fragment, Var};
use crate::plts::{Plts, PrimeEventStructure};
use crate::pomset::{ActionLabel, Pomset};
use crate::term::{hole_name, sym, Context, Signature, Term};

pub struct Gen {
    rng: ChaCha8Rng,
}

/// Shape of random PLTSs.
#[derive(Debug, Clone)]
pub struct PltsShape {
    pub max_states: usize,
    pub max_transitions: usize,
    pub predicates: Vec<String>,
    pub actions: Vec<String>,
    /// Chance that a label is a two-event pomset instead of an action.
    pub compound: f64,
}

impl Default for PltsShape {
    fn default() -> Self {
        PltsShape {
            max_states: 6,
            max_transitions: 8,
            predicates: vec!["sqrt".into(), "p".into()],
            actions: vec!["a".into(), "b".into()],
            compound: 0.25,
        }
    }
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n.max(1))
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p.clamp(0.0, 1.0))
    }

    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        xs.choose(&mut self.rng).expect("nonempty choice")
    }

    /// A closed term of depth at most `depth` over the signature, with
    /// action constants from `actions`. Binders are not generated.
    pub fn term(&mut self, sig: &Signature, depth: usize, actions: &[&str]) -> Term {
        let leaves: Vec<Term> = self.leaves(sig, actions);
        let funs: Vec<(&String, usize)> =
            sig.functions.iter().filter(|(_, &n)| n > 0).map(|(f, &n)| (f, n)).collect();
        if depth == 0 || funs.is_empty() || self.chance(0.3) {
            return self.pick(&leaves).clone();
        }
        let (f, n) = *self.pick(&funs);
        let args = (0..n).map(|_| self.term(sig, depth - 1, actions)).collect();
        Term::fun(f, args)
    }

    fn leaves(&mut self, sig: &Signature, actions: &[&str]) -> Vec<Term> {
        let mut leaves: Vec<Term> =
            sig.functions.iter().filter(|(_, &n)| n == 0).map(|(f, _)| Term::fun(f, vec![])).collect();
        if sig.pomset_constants {
            leaves.extend(actions.iter().map(|a| Term::action(a)));
        }
        if leaves.is_empty() {
            leaves.push(Term::eps());
        }
        leaves
    }

    /// A context with exactly one hole, nested at most `depth` deep;
    /// the other arguments are random terms of depth at most 1.
    pub fn context(&mut self, sig: &Signature, depth: usize, actions: &[&str]) -> Context {
        let h = hole_name(0);
        let mut t = Term::var(&h);
        let funs: Vec<(&String, usize)> =
            sig.functions.iter().filter(|(_, &n)| n > 0).map(|(f, &n)| (f, n)).collect();
        let levels = if funs.is_empty() { 0 } else { 1 + self.below(depth.max(1)) };
        for _ in 0..levels {
            let (f, n) = *self.pick(&funs);
            let k = self.below(n);
            let args = (0..n).map(|i| if i == k { t.clone() } else { self.term(sig, 1, actions) }).collect();
            t = Term::fun(f, args);
        }
        Context::new(t, vec![h])
    }

    /// A pomset of 1..=max_events events with random order pairs.
    pub fn pomset(&mut self, max_events: usize, actions: &[&str]) -> Pomset {
        let n = 1 + self.below(max_events.max(1));
        let labels: Vec<ActionLabel> =
            (0..n).map(|_| ActionLabel::new(*self.pick(actions)).expect("valid action")).collect();
        let density = self.rng.gen_range(0.0..0.6);
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.chance(density) {
                    pairs.push((i, j));
                }
            }
        }
        // shuffle positions so the input order carries no information
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut self.rng);
        let labels2 = (0..n).map(|k| labels[perm[k]].clone()).collect();
        let mut inv = vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        let pairs2: Vec<(usize, usize)> = pairs.iter().map(|&(i, j)| (inv[i], inv[j])).collect();
        Pomset::from_parts(labels2, pairs2).expect("forward pairs are acyclic")
    }

    fn label(&mut self, shape: &PltsShape) -> Pomset {
        let a = self.pick(&shape.actions).clone();
        if !self.chance(shape.compound) {
            return Pomset::action(&a);
        }
        let b = self.pick(&shape.actions).clone();
        if self.chance(0.5) {
            Pomset::action(&a).par(&Pomset::action(&b))
        } else {
            Pomset::action(&a).seq(&Pomset::action(&b))
        }
    }

    pub fn plts(&mut self, shape: &PltsShape) -> Plts {
        let n = 1 + self.below(shape.max_states);
        let mut p = Plts::new(n, 0).expect("initial state");
        let m = self.below(shape.max_transitions + 1);
        for _ in 0..m {
            let (s, t) = (self.below(n), self.below(n));
            let u = self.label(shape);
            p.add_transition(s, u, t).expect("declared");
        }
        for q in &shape.predicates {
            for s in 0..n {
                if self.chance(0.25) {
                    p.add_predicate(s, q).expect("declared");
                }
            }
        }
        p
    }

    /// An acyclic PLTS: transitions only go from lower to higher states.
    pub fn acyclic_plts(&mut self, shape: &PltsShape) -> Plts {
        let n = 1 + self.below(shape.max_states);
        let mut p = Plts::new(n, 0).expect("initial state");
        if n > 1 {
            for _ in 0..self.below(shape.max_transitions + 1) {
                let s = self.below(n - 1);
                let t = s + 1 + self.below(n - 1 - s);
                let u = self.label(shape);
                p.add_transition(s, u, t).expect("declared");
            }
        }
        for q in &shape.predicates {
            for s in 0..n {
                if self.chance(0.25) {
                    p.add_predicate(s, q).expect("declared");
                }
            }
        }
        p
    }

    /// A prime event structure with at most `max_events` events.
    pub fn event_structure(&mut self, max_events: usize, actions: &[&str]) -> PrimeEventStructure {
        let n = 1 + self.below(max_events.max(1));
        let labels: Vec<ActionLabel> =
            (0..n).map(|_| ActionLabel::new(*self.pick(actions)).expect("valid action")).collect();
        let mut causality = Vec::new();
        let mut conflict = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                match self.below(5) {
                    0 => causality.push((i, j)),
                    1 => conflict.push((i, j)),
                    _ => {}
                }
            }
        }
        // inherited conflict may make an event conflict with itself; drop
        // conflicts until the structure is valid
        loop {
            match PrimeEventStructure::new(labels.clone(), &causality, &conflict) {
                Ok(es) => return es,
                Err(_) => {
                    conflict.pop();
                }
            }
        }
    }
}

/// Random formulas of one fragment, for soundness sampling.
pub struct FormulaGen<'g> {
    g: &'g mut Gen,
    frag: Fragment,
    actions: Vec<ActionLabel>,
    preds: Vec<String>,
    fresh: usize,
}

impl<'g> FormulaGen<'g> {
    pub fn new(g: &'g mut Gen, frag: Fragment, actions: &[&str], preds: &[&str]) -> Self {
        let actions = actions.iter().map(|a| ActionLabel::new(*a).expect("valid action")).collect();
        FormulaGen { g, frag, actions, preds: preds.iter().map(|p| p.to_string()).collect(), fresh: 0 }
    }

    /// A closed formula with at most `depth` nested binders.
    pub fn closed(&mut self, depth: usize) -> Formula {
        self.formula(depth, &mut Vec::new())
    }

    fn var(&mut self) -> Var {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn action(&mut self) -> ActionLabel {
        self.g.pick(&self.actions).clone()
    }

    fn subset(&mut self, scope: &[Var]) -> (Vec<Var>, Vec<Var>) {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for v in scope {
            match self.g.below(3) {
                0 => xs.push(v.clone()),
                1 => ys.push(v.clone()),
                _ => {}
            }
        }
        (xs, ys)
    }

    /// Leaves and boolean structure shared by all fragments; `None` asks
    /// the caller for a modal formula.
    fn propositional(&mut self, depth: usize, scope: &mut Vec<Var>, open_ok: bool) -> Option<Formula> {
        let denial = self.frag.is_denial();
        let modal = if depth > 0 { 4 } else { 0 };
        match self.g.below(4 + modal) {
            0 => Some(Formula::True),
            1 | 2 if (denial || self.preds.is_empty()) && depth == 0 => Some(Formula::True),
            1 if denial || self.preds.is_empty() => Some(Formula::denial(self.action())),
            1 => Some(Formula::Pred(self.g.pick(&self.preds).clone())),
            2 if denial => Some(Formula::denial(self.action())),
            2 => {
                let f = if open_ok { self.formula(depth, scope) } else { self.formula(depth, &mut Vec::new()) };
                Some(Formula::not(f))
            }
            3 => {
                let (f, g) = if open_ok {
                    (self.formula(depth / 2, scope), self.formula(depth, scope))
                } else {
                    (self.formula(depth / 2, &mut Vec::new()), self.formula(depth, &mut Vec::new()))
                };
                Some(Formula::and(f, g))
            }
            _ => None,
        }
    }

    fn formula(&mut self, depth: usize, scope: &mut Vec<Var>) -> Formula {
        match self.frag.host() {
            Fragment::Bcl => {
                if let Some(f) = self.propositional(depth, scope, true) {
                    return f;
                }
                if !scope.is_empty() && self.g.chance(0.4) {
                    let z = self.g.pick(scope).clone();
                    return Formula::exec(z, self.formula(depth, scope));
                }
                let (xs, ys) = self.subset(scope);
                let (a, z) = (self.action(), self.var());
                scope.push(z.clone());
                let body = self.formula(depth - 1, scope);
                scope.pop();
                Formula::bind(xs, ys, a, z, body)
            }
            Fragment::Hpl => {
                if let Some(f) = self.propositional(depth, scope, true) {
                    return f;
                }
                let (xs, ys) = self.subset(scope);
                let (a, z) = (self.action(), self.var());
                scope.push(z.clone());
                let body = self.formula(depth - 1, scope);
                scope.pop();
                Formula::diamond(xs, ys, a, z, body)
            }
            Fragment::Pl => {
                if let Some(f) = self.propositional(depth, scope, false) {
                    return f;
                }
                self.block(depth, &mut Vec::new())
            }
            Fragment::Sl => {
                if let Some(f) = self.propositional(depth, scope, false) {
                    return f;
                }
                let n = 1 + self.g.below(depth.min(3));
                let items: Vec<(ActionLabel, Var)> = (0..n).map(|_| (self.action(), self.var())).collect();
                let body = self.formula(depth - n, &mut Vec::new());
                Formula::step(items, body)
            }
            _ => unreachable!("hosts are the four logics"),
        }
    }

    // a chain of diamonds over block-local variables, closed at the end
    fn block(&mut self, depth: usize, scope: &mut Vec<Var>) -> Formula {
        let (xs, ys) = self.subset(scope);
        let (a, z) = (self.action(), self.var());
        scope.push(z.clone());
        let body = if depth > 1 && self.g.chance(0.5) {
            self.block(depth - 1, scope)
        } else {
            self.formula(depth - 1, &mut Vec::new())
        };
        scope.pop();
        Formula::diamond(xs, ys, a, z, body)
    }
}

/// Rewrites that preserve strong bisimilarity in the basic algebras; used
/// to produce equivalent pairs for congruence sampling.
pub fn equivalent_variant(g: &mut Gen, t: &Term, sig: &Signature) -> Term {
    let has = |f: &str| sig.functions.contains_key(f);
    let mut out = t.clone();
    for _ in 0..1 + g.below(3) {
        let positions = subterm_paths(&out);
        let path = g.pick(&positions).clone();
        let sub = subterm(&out, &path).clone();
        let r = match (&sub, g.below(6)) {
            (Term::Fun(f, a), 0) if f == sym::ALT => Some(Term::alt(a[1].clone(), a[0].clone())),
            (Term::Fun(f, a), 1) if f == sym::PAR => Some(Term::par(a[1].clone(), a[0].clone())),
            (Term::Fun(f, a), 2) if f == sym::SEQ => match &a[0] {
                Term::Fun(h, b) if h == sym::SEQ => {
                    Some(Term::seq(b[0].clone(), Term::seq(b[1].clone(), a[1].clone())))
                }
                _ => None,
            },
            (_, 3) if has(sym::ALT) => Some(Term::alt(sub.clone(), sub.clone())),
            (_, 4) if has(sym::SEQ) && has(sym::EPS) => Some(Term::seq(Term::eps(), sub.clone())),
            (Term::Fun(f, a), 5) if f == sym::ALT => match &a[0] {
                Term::Fun(h, b) if h == sym::ALT => {
                    Some(Term::alt(b[0].clone(), Term::alt(b[1].clone(), a[1].clone())))
                }
                _ => None,
            },
            _ => None,
        };
        if let Some(r) = r {
            out = replace_at(&out, &path, r);
        }
    }
    out
}

fn subterm_paths(t: &Term) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    if let Term::Fun(_, args) = t {
        for (i, a) in args.iter().enumerate() {
            for mut p in subterm_paths(a) {
                p.insert(0, i);
                out.push(p);
            }
        }
    }
    out
}

fn subterm<'a>(t: &'a Term, path: &[usize]) -> &'a Term {
    match (t, path.split_first()) {
        (_, None) => t,
        (Term::Fun(_, args), Some((&i, rest))) => subterm(&args[i], rest),
        _ => t,
    }
}

fn replace_at(t: &Term, path: &[usize], r: Term) -> Term {
    match (t, path.split_first()) {
        (_, None) => r,
        (Term::Fun(f, args), Some((&i, rest))) => {
            let mut a = args.clone();
            a[i] = replace_at(&args[i], rest, r);
            Term::Fun(f.clone(), a)
        }
        _ => t.clone(),
    }
}
