use crate::checker::{Case, Goal, Step};
use crate::kernel::{Formula, Ident};
use std::collections::HashMap;
use std::rc::Rc;

#[derive(Clone, Debug)]
pub struct OpenGoal {
    pub id: usize,
    pub goal: Goal,
}

#[derive(Debug)]
enum Entry {
    Steps(usize, Vec<Step>),
    Induct {
        id: usize,
        var: Ident,
        generalize: Vec<Ident>,
        cases: Vec<(Ident, Vec<Ident>, usize)>,
    },
}

#[derive(Debug)]
struct LogNode {
    entry: Entry,
    prev: Option<Rc<LogNode>>,
}

/// Open goals plus the steps taken so far. The log is persistent, so
/// states forked during search share their common history.
#[derive(Clone, Debug)]
pub struct ProofState {
    pub goals: Vec<OpenGoal>,
    log: Option<Rc<LogNode>>,
    next_id: usize,
}

impl ProofState {
    pub fn new(statement: &Formula) -> Self {
        ProofState {
            goals: vec![OpenGoal {
                id: 0,
                goal: Goal::from_formula(statement),
            }],
            log: None,
            next_id: 1,
        }
    }

    pub fn is_solved(&self) -> bool {
        self.goals.is_empty()
    }

    fn push(&mut self, entry: Entry) {
        self.log = Some(Rc::new(LogNode {
            entry,
            prev: self.log.take(),
        }));
    }

    /// Records `steps` on goal `i`, whose result is `goal`.
    pub fn with_steps(&self, i: usize, steps: Vec<Step>, goal: Goal) -> ProofState {
        let mut st = self.clone();
        let id = st.goals[i].id;
        if !steps.is_empty() {
            st.push(Entry::Steps(id, steps));
        }
        if goal.is_closed() {
            st.goals.remove(i);
        } else {
            st.goals[i].goal = goal;
        }
        st
    }

    /// Replaces goal `i` by induction cases, in constructor order.
    pub fn with_induction(
        &self,
        i: usize,
        var: Ident,
        generalize: Vec<Ident>,
        cases: Vec<(Ident, Vec<Ident>, Goal)>,
    ) -> ProofState {
        let mut st = self.clone();
        let id = st.goals[i].id;
        let mut children = Vec::new();
        let mut open = Vec::new();
        for (ctor, fresh, goal) in cases {
            let cid = st.next_id;
            st.next_id += 1;
            children.push((ctor, fresh, cid));
            if !goal.is_closed() {
                open.push(OpenGoal { id: cid, goal });
            }
        }
        st.push(Entry::Induct {
            id,
            var,
            generalize,
            cases: children,
        });
        st.goals.splice(i..i + 1, open);
        st
    }

    /// A state holding only the first goal, sharing this state's history.
    pub fn focus(&self) -> Option<(ProofState, Vec<OpenGoal>)> {
        let (first, rest) = self.goals.split_first()?;
        let st = ProofState {
            goals: vec![first.clone()],
            log: self.log.clone(),
            next_id: self.next_id,
        };
        Some((st, rest.to_vec()))
    }

    /// Puts back the goals hidden by [`ProofState::focus`].
    pub fn unfocus(mut self, rest: Vec<OpenGoal>) -> ProofState {
        self.goals.extend(rest);
        self
    }

    pub fn same_goals(&self, other: &ProofState) -> bool {
        self.goals.len() == other.goals.len() && self.goals.iter().zip(&other.goals).all(|(a, b)| a.goal == b.goal)
    }

    /// The proof of the root goal as a step tree. Open goals end in empty
    /// step lists.
    pub fn script(&self) -> Vec<Step> {
        let mut entries = Vec::new();
        let mut cur = self.log.as_ref();
        while let Some(n) = cur {
            entries.push(&n.entry);
            cur = n.prev.as_ref();
        }
        entries.reverse();
        let mut steps: HashMap<usize, Vec<Step>> = HashMap::new();
        let mut inducts = HashMap::new();
        for e in entries {
            match e {
                Entry::Steps(id, s) => steps.entry(*id).or_default().extend(s.iter().cloned()),
                Entry::Induct { id, .. } => {
                    inducts.insert(*id, e);
                }
            }
        }
        fn build(id: usize, steps: &HashMap<usize, Vec<Step>>, inducts: &HashMap<usize, &Entry>) -> Vec<Step> {
            let mut out = steps.get(&id).cloned().unwrap_or_default();
            if let Some(Entry::Induct {
                var,
                generalize,
                cases,
                ..
            }) = inducts.get(&id)
            {
                out.push(Step::Induction {
                    var: var.clone(),
                    generalize: generalize.clone(),
                    cases: cases
                        .iter()
                        .map(|(ctor, fresh, cid)| Case {
                            ctor: ctor.clone(),
                            fresh: fresh.clone(),
                            proof: build(*cid, steps, inducts),
                        })
                        .collect(),
                });
            }
            out
        }
        build(0, &steps, &inducts)
    }
}
