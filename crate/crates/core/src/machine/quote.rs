//! Object-level programs that compute program codes.
//!
//! A [`Template`] describes a program some of whose subterms are only known
//! at run time, as codes produced by other programs. [`Template::quote`]
//! turns it into a single program that, on input `n`, outputs the code of
//! the described program for that `n`. Fully literal subtrees fold into
//! constants.

use super::numbering::{encode, offset, RADIX};
use super::program::{build::*, Prog, Program, Tag};

#[derive(Debug, Clone)]
pub enum Template {
    /// A fixed subprogram.
    Lit(Prog),
    /// A subprogram whose code is computed by the given program.
    Hole(Prog),
    /// `Const(v)` where `v` is computed by the given program.
    ConstOf(Prog),
    Node(Tag, Vec<Template>),
}

impl Template {
    pub fn lit(p: Prog) -> Self {
        Template::Lit(p)
    }

    pub fn hole(code: Prog) -> Self {
        Template::Hole(code)
    }

    pub fn node(tag: Tag, kids: Vec<Template>) -> Self {
        assert_eq!(tag.arity(), kids.len(), "arity of {tag:?}");
        Template::Node(tag, kids)
    }

    /// The program computing the code of the described program.
    pub fn quote(&self) -> Prog {
        match self.fold() {
            Template::Lit(p) => konst(encode(&p)),
            Template::Hole(code) => code,
            Template::ConstOf(value) => build_code(offset(Tag::Const), value),
            Template::Node(tag, kids) => {
                let kids: Vec<Prog> = kids.iter().map(Template::quote).collect();
                build_code(offset(tag), payload(kids))
            }
        }
    }

    /// Collapses literal-only nodes into `Lit`.
    fn fold(&self) -> Template {
        match self {
            Template::Node(tag, kids) => {
                let kids: Vec<Template> = kids.iter().map(Template::fold).collect();
                if kids.iter().all(|k| matches!(k, Template::Lit(_))) {
                    let progs = kids
                        .into_iter()
                        .map(|k| match k {
                            Template::Lit(p) => p,
                            _ => unreachable!(),
                        })
                        .collect();
                    Template::Lit(std::sync::Arc::new(Program::from_parts(*tag, progs)))
                } else {
                    Template::Node(*tag, kids)
                }
            }
            other => other.clone(),
        }
    }
}

fn payload(mut kids: Vec<Prog>) -> Prog {
    match kids.len() {
        1 => kids.pop().expect("one"),
        2 => {
            let q = kids.pop().expect("two");
            pair(kids.pop().expect("two"), q)
        }
        3 => {
            let e = kids.pop().expect("three");
            let t = kids.pop().expect("three");
            pair(kids.pop().expect("three"), pair(t, e))
        }
        _ => unreachable!("payload arity"),
    }
}

fn build_code(offset: u64, payload: Prog) -> Prog {
    add(comp(times(RADIX), payload), konst(offset))
}

/// Shorthand for `Template::node(Tag::WithOracle, [body, lens])`.
pub fn with_oracle_t(body: Template, lens: Template) -> Template {
    Template::node(Tag::WithOracle, vec![body, lens])
}

/// `Query(Add(Id, Const(shift)))` with `shift` computed at run time.
pub fn shifted_query_t(shift: Prog) -> Template {
    Template::node(
        Tag::Query,
        vec![Template::node(
            Tag::Add,
            vec![Template::lit(id()), Template::ConstOf(shift)],
        )],
    )
}
