//! UI encodings to widget trees.
//!
//! The UI program is solved together with the domain state facts; the
//! `elem/3`, `attr/3` and `when/4` atoms of its (single) stable model are
//! assembled into a validated tree and serialized to the wire JSON.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::program::{external_calls, ProgramBundle};
use crate::solver::{
    render_diagnostics, Diagnostic, Severity, SolveMode, SolveRequest, SolveStatus, Solver,
    SolverError,
};
use crate::term::{parse_term, Term};

/// Keys whose values accumulate instead of overriding each other.
const ACCUMULATING_KEYS: [&str; 1] = ["class"];

/// Name the `@concat` calls are rewritten to before solving.
const CONCAT_TERM: &str = "_aspui_concat";

/// Declarations for the reified domain state, so UI encodings can use
/// any of these predicates without the solver warning about them.
const DOMAIN_STATE_PRELUDE: &str = "\
#defined _all/1.
#defined _any/1.
#defined _clinguin_assume/2.
#defined _clinguin_browsing/0.
#defined _clinguin_unsat/0.
#defined _clinguin_mus/1.
";

#[derive(Debug, Error)]
pub enum UiError {
    #[error("the UI encoding has no stable model")]
    NoUiModel,
    #[error("UI grounding failed:\n{}", render_diagnostics(.0))]
    Grounding(Vec<Diagnostic>),
    #[error(transparent)]
    Solver(SolverError),
    #[error("solver stopped without a result while evaluating the UI")]
    SolverStopped,
    #[error("cycle in element hierarchy: {}", .0.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" -> "))]
    Cycle(Vec<Term>),
    #[error("element id {0} is declared more than once")]
    DuplicateId(Term),
    #[error("unknown widget type {0}")]
    UnknownWidgetType(Term),
    #[error("element {id} has unknown parent {parent}")]
    UnknownParent { id: Term, parent: Term },
    #[error("element {id} of type {widget} cannot be placed inside {parent}")]
    InvalidParent {
        id: Term,
        widget: WidgetType,
        parent: Term,
    },
    #[error("invalid handler on {element}: {reason}")]
    InvalidHandler { element: Term, reason: String },
    #[error("malformed UI JSON: {0}")]
    Json(String),
}

impl From<SolverError> for UiError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Grounding(d) => UiError::Grounding(d),
            other => UiError::Solver(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WidgetType {
    Window,
    Container,
    MenuBar,
    Label,
    Button,
    DropdownMenu,
    DropdownMenuItem,
    Textfield,
    Modal,
    Message,
}

impl WidgetType {
    pub const ALL: [WidgetType; 10] = [
        WidgetType::Window,
        WidgetType::Container,
        WidgetType::MenuBar,
        WidgetType::Label,
        WidgetType::Button,
        WidgetType::DropdownMenu,
        WidgetType::DropdownMenuItem,
        WidgetType::Textfield,
        WidgetType::Modal,
        WidgetType::Message,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WidgetType::Window => "window",
            WidgetType::Container => "container",
            WidgetType::MenuBar => "menu_bar",
            WidgetType::Label => "label",
            WidgetType::Button => "button",
            WidgetType::DropdownMenu => "dropdown_menu",
            WidgetType::DropdownMenuItem => "dropdown_menu_item",
            WidgetType::Textfield => "textfield",
            WidgetType::Modal => "modal",
            WidgetType::Message => "message",
        }
    }

    pub fn from_name(name: &str) -> Option<WidgetType> {
        Self::ALL.into_iter().find(|w| w.as_str() == name)
    }
}

impl fmt::Display for WidgetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Call,
    Update,
    Context,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Call => "call",
            Action::Update => "update",
            Action::Context => "context",
        }
    }

    pub fn from_name(name: &str) -> Option<Action> {
        match name {
            "call" => Some(Action::Call),
            "update" => Some(Action::Update),
            "context" => Some(Action::Context),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WhenHandler {
    pub event: Term,
    pub action: Action,
    /// Operation term(s) for `call`, `(target,key,value)` for `update`,
    /// `(key,value)` for `context`.
    pub operand: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UiNode {
    pub id: Term,
    pub widget: WidgetType,
    /// (key, value) pairs sorted by key, then value.
    pub attributes: Vec<(Term, Term)>,
    pub handlers: Vec<WhenHandler>,
    pub children: Vec<UiNode>,
}

impl UiNode {
    pub fn attribute(&self, key: &str) -> Option<&Term> {
        self.attributes
            .iter()
            .find(|(k, _)| k.name() == Some(key) && k.arity() == 0)
            .map(|(_, v)| v)
    }

    pub fn attribute_values<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Term> + 'a {
        self.attributes
            .iter()
            .filter(move |(k, _)| k.name() == Some(key) && k.arity() == 0)
            .map(|(_, v)| v)
    }
}

/// The widget tree below the implicit `root`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UiTree {
    pub children: Vec<UiNode>,
}

impl UiTree {
    /// Depth-first search by element id.
    pub fn find(&self, id: &Term) -> Option<&UiNode> {
        fn go<'a>(nodes: &'a [UiNode], id: &Term) -> Option<&'a UiNode> {
            nodes
                .iter()
                .find_map(|n| if &n.id == id { Some(n) } else { go(&n.children, id) })
        }
        go(&self.children, id)
    }

    /// All nodes, depth first.
    pub fn nodes(&self) -> Vec<&UiNode> {
        fn go<'a>(nodes: &'a [UiNode], out: &mut Vec<&'a UiNode>) {
            for n in nodes {
                out.push(n);
                go(&n.children, out);
            }
        }
        let mut out = Vec::new();
        go(&self.children, &mut out);
        out
    }
}

/// A tree together with the problems that were tolerated while building it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assembled {
    pub tree: UiTree,
    pub warnings: Vec<String>,
}

/// `elem/3`, `attr/3`, `when/4` atoms of the UI model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UiAtoms {
    pub atoms: BTreeSet<Term>,
    pub warnings: Vec<String>,
}

/// The `@concat` external: concatenation of the arguments' unquoted text.
pub fn evaluate_external_concat(args: &[Term]) -> Term {
    Term::Str(args.iter().map(Term::unquoted).collect())
}

/// Replaces every rewritten `@concat` call inside `t` by its value.
fn fold_externals(t: Term) -> Term {
    match t {
        Term::Function(name, args) => {
            let args: Vec<Term> = args.into_iter().map(fold_externals).collect();
            if name == CONCAT_TERM {
                evaluate_external_concat(&args)
            } else {
                Term::Function(name, args)
            }
        }
        Term::Tuple(args) => Term::Tuple(args.into_iter().map(fold_externals).collect()),
        other => other,
    }
}

/// Rewrites registered `@name(` calls; unregistered ones are errors.
fn prepare_ui_source(origin: &str, text: &str) -> Result<String, Vec<Diagnostic>> {
    let calls = external_calls(text);
    let unknown: Vec<Diagnostic> = calls
        .iter()
        .filter(|c| c.name != "concat")
        .map(|c| {
            let line = text[..c.at].matches('\n').count() + 1;
            Diagnostic {
                severity: Severity::Error,
                origin: Some(origin.to_string()),
                line: Some(line),
                column: Some(c.at - text[..c.at].rfind('\n').map_or(0, |i| i + 1) + 1),
                message: format!("unknown external function @{}", c.name),
            }
        })
        .collect();
    if !unknown.is_empty() {
        return Err(unknown);
    }
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for c in calls {
        out.push_str(&text[cursor..c.at]);
        out.push_str(CONCAT_TERM);
        cursor = c.at + 1 + c.name.len();
    }
    out.push_str(&text[cursor..]);
    Ok(out)
}

/// Evaluates UI encodings against domain state facts.
#[derive(Debug, Clone)]
pub struct UiEngine {
    ui_files: ProgramBundle,
    solver: Solver,
}

impl UiEngine {
    /// Checks external function use and prepares the encodings.
    pub fn new(ui_files: ProgramBundle, solver: Solver) -> Result<Self, UiError> {
        let mut prepared = ProgramBundle::new();
        for part in ui_files.parts() {
            let text = prepare_ui_source(&part.origin, &part.text).map_err(UiError::Grounding)?;
            prepared
                .push(part.origin.clone(), text)
                .expect("labels already unique");
        }
        Ok(UiEngine {
            ui_files: prepared,
            solver,
        })
    }

    pub fn from_files(paths: &[std::path::PathBuf], solver: Solver) -> Result<Self, UiError> {
        let mut bundle = ProgramBundle::new();
        for p in paths {
            let text = std::fs::read_to_string(p).map_err(|e| {
                UiError::Grounding(vec![Diagnostic {
                    severity: Severity::Error,
                    origin: Some(p.display().to_string()),
                    line: None,
                    column: None,
                    message: e.to_string(),
                }])
            })?;
            bundle
                .push(p.display().to_string(), text)
                .map_err(|e| UiError::Json(e.to_string()))?;
        }
        Self::new(bundle, solver)
    }

    /// Solves the UI program with the domain state; the UI program is
    /// evaluated from scratch every time.
    pub fn build_ui_atoms(&self, domain_facts: &str) -> Result<UiAtoms, UiError> {
        let mut warnings = Vec::new();
        if self.ui_files.is_empty() {
            return Ok(UiAtoms {
                atoms: BTreeSet::new(),
                warnings,
            });
        }
        let mut program = ProgramBundle::from_text("<domain-state-prelude>", DOMAIN_STATE_PRELUDE);
        program
            .extend(&self.ui_files)
            .map_err(|e| UiError::Json(e.to_string()))?;
        program
            .push("<domain-state>", domain_facts)
            .map_err(|e| UiError::Json(e.to_string()))?;
        let out = self
            .solver
            .solve(&SolveRequest::new(program, SolveMode::Models(2)))?;
        match out.status {
            SolveStatus::Unsat => return Err(UiError::NoUiModel),
            SolveStatus::Error => return Err(UiError::SolverStopped),
            SolveStatus::Sat => {}
        }
        if out.models.len() > 1 {
            let w = "UI encoding has more than one stable model; using the first".to_string();
            log::warn!("{w}");
            warnings.push(w);
        }
        let atoms = out
            .models
            .into_iter()
            .next()
            .unwrap_or_default()
            .into_iter()
            .filter(|a| {
                matches!(
                    (a.name(), a.arity()),
                    (Some("elem"), 3) | (Some("attr"), 3) | (Some("when"), 4)
                )
            })
            .map(fold_externals)
            .collect();
        Ok(UiAtoms { atoms, warnings })
    }

    /// Full pipeline: atoms, tree, JSON.
    pub fn render(&self, domain_facts: &str) -> Result<String, UiError> {
        let atoms = self.build_ui_atoms(domain_facts)?;
        let assembled = assemble_tree(&atoms.atoms)?;
        for w in &assembled.warnings {
            log::warn!("{w}");
        }
        Ok(serialize_tree(&assembled.tree))
    }
}

struct ElementInfo {
    widget: WidgetType,
    parent: Term,
}

/// Builds and validates the tree. Attributes and handlers of unknown
/// elements are dropped with a warning.
pub fn assemble_tree(atoms: &BTreeSet<Term>) -> Result<Assembled, UiError> {
    let root = Term::constant("root");
    let mut warnings = Vec::new();
    let mut elements: BTreeMap<Term, ElementInfo> = BTreeMap::new();
    let mut attrs: BTreeMap<Term, BTreeMap<Term, Vec<Term>>> = BTreeMap::new();
    let mut whens: BTreeMap<Term, Vec<(Term, Term, Term)>> = BTreeMap::new();

    for atom in atoms {
        let a = atom.args();
        match (atom.name(), a.len()) {
            (Some("elem"), 3) => {
                let widget = a[1]
                    .name()
                    .filter(|_| a[1].arity() == 0)
                    .and_then(WidgetType::from_name)
                    .ok_or_else(|| UiError::UnknownWidgetType(a[1].clone()))?;
                if a[0] == root || elements.contains_key(&a[0]) {
                    return Err(UiError::DuplicateId(a[0].clone()));
                }
                elements.insert(
                    a[0].clone(),
                    ElementInfo {
                        widget,
                        parent: a[2].clone(),
                    },
                );
            }
            (Some("attr"), 3) => attrs
                .entry(a[0].clone())
                .or_default()
                .entry(a[1].clone())
                .or_default()
                .push(a[2].clone()),
            (Some("when"), 4) => whens
                .entry(a[0].clone())
                .or_default()
                .push((a[1].clone(), a[2].clone(), a[3].clone())),
            _ => {}
        }
    }

    for (id, info) in &elements {
        if info.parent != root {
            let Some(parent) = elements.get(&info.parent) else {
                return Err(UiError::UnknownParent {
                    id: id.clone(),
                    parent: info.parent.clone(),
                });
            };
            if info.widget == WidgetType::DropdownMenuItem
                && parent.widget != WidgetType::DropdownMenu
            {
                return Err(UiError::InvalidParent {
                    id: id.clone(),
                    widget: info.widget,
                    parent: info.parent.clone(),
                });
            }
        } else if info.widget == WidgetType::DropdownMenuItem {
            return Err(UiError::InvalidParent {
                id: id.clone(),
                widget: info.widget,
                parent: root.clone(),
            });
        }
        let mut path = vec![id.clone()];
        let mut cur = &info.parent;
        while *cur != root {
            if path.contains(cur) {
                path.push(cur.clone());
                return Err(UiError::Cycle(path));
            }
            path.push(cur.clone());
            cur = &elements[cur].parent;
        }
    }

    let mut nodes: BTreeMap<Term, UiNode> = BTreeMap::new();
    for (id, info) in &elements {
        let mut attributes = Vec::new();
        if let Some(by_key) = attrs.remove(id) {
            for (key, mut values) in by_key {
                values.sort();
                values.dedup();
                let accumulate = key
                    .name()
                    .is_some_and(|k| key.arity() == 0 && ACCUMULATING_KEYS.contains(&k));
                if !accumulate && values.len() > 1 {
                    warnings.push(format!(
                        "element {id} has {} values for attribute {key}; using {}",
                        values.len(),
                        values.last().unwrap()
                    ));
                    values.drain(..values.len() - 1);
                }
                attributes.extend(values.into_iter().map(|v| (key.clone(), v)));
            }
        }
        let mut handlers = Vec::new();
        for (event, action, operand) in whens.remove(id).unwrap_or_default() {
            let invalid = |reason: String| UiError::InvalidHandler {
                element: id.clone(),
                reason,
            };
            let action = action
                .name()
                .filter(|_| action.arity() == 0)
                .and_then(Action::from_name)
                .ok_or_else(|| invalid(format!("unknown action {action}")))?;
            match action {
                Action::Update => {
                    let ok = matches!(&operand, Term::Tuple(p) if p.len() == 3);
                    if !ok {
                        return Err(invalid(format!(
                            "update expects (element,key,value), got {operand}"
                        )));
                    }
                    let target = &operand.args()[0];
                    if !elements.contains_key(target) {
                        return Err(invalid(format!("update target {target} does not exist")));
                    }
                }
                Action::Context => {
                    if !matches!(&operand, Term::Tuple(p) if p.len() == 2) {
                        return Err(invalid(format!("context expects (key,value), got {operand}")));
                    }
                }
                Action::Call => {}
            }
            handlers.push(WhenHandler {
                event,
                action,
                operand,
            });
        }
        handlers.sort();
        nodes.insert(
            id.clone(),
            UiNode {
                id: id.clone(),
                widget: info.widget,
                attributes,
                handlers,
                children: Vec::new(),
            },
        );
    }
    for id in attrs.keys().chain(whens.keys()) {
        warnings.push(format!("dropping attributes or handlers of unknown element {id}"));
    }

    // attach deepest elements first so every child is complete when moved
    let depth = |id: &Term| {
        let mut d = 0;
        let mut cur = &elements[id].parent;
        while *cur != root {
            d += 1;
            cur = &elements[cur].parent;
        }
        d
    };
    let mut order: Vec<(usize, Term)> = elements.keys().map(|id| (depth(id), id.clone())).collect();
    order.sort_by(|a, b| b.cmp(a));
    let mut top = Vec::new();
    for (_, id) in order {
        let node = nodes.remove(&id).expect("each node attached once");
        let parent = &elements[&id].parent;
        if *parent == root {
            top.push(node);
        } else {
            nodes
                .get_mut(parent)
                .expect("parents are shallower")
                .children
                .push(node);
        }
    }
    sort_siblings(&mut top);
    Ok(Assembled {
        tree: UiTree { children: top },
        warnings,
    })
}

fn sort_siblings(nodes: &mut [UiNode]) {
    nodes.sort_by(|a, b| {
        let key = |n: &UiNode| (n.attribute("order").is_none(), n.attribute("order").cloned());
        key(a).cmp(&key(b)).then_with(|| a.id.cmp(&b.id))
    });
    for n in nodes {
        sort_siblings(&mut n.children);
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct WireNode {
    id: String,
    #[serde(rename = "type")]
    kind: String,
    attributes: Vec<WireAttribute>,
    when: Vec<WireHandler>,
    children: Vec<WireNode>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireAttribute {
    key: String,
    value: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireHandler {
    event: String,
    action: String,
    operand: String,
}

fn to_wire(n: &UiNode) -> WireNode {
    WireNode {
        id: n.id.to_string(),
        kind: n.widget.as_str().to_string(),
        attributes: n
            .attributes
            .iter()
            .map(|(k, v)| WireAttribute {
                key: k.to_string(),
                value: v.to_string(),
            })
            .collect(),
        when: n
            .handlers
            .iter()
            .map(|h| WireHandler {
                event: h.event.to_string(),
                action: h.action.as_str().to_string(),
                operand: h.operand.to_string(),
            })
            .collect(),
        children: n.children.iter().map(to_wire).collect(),
    }
}

/// Compact JSON with the synthetic root on top.
pub fn serialize_tree(tree: &UiTree) -> String {
    let root = WireNode {
        id: "root".into(),
        kind: "root".into(),
        attributes: Vec::new(),
        when: Vec::new(),
        children: tree.children.iter().map(to_wire).collect(),
    };
    serde_json::to_string(&root).expect("wire nodes always serialize")
}

fn from_wire(w: WireNode) -> Result<UiNode, UiError> {
    let term = |s: &str| parse_term(s).map_err(|e| UiError::Json(format!("`{s}`: {e}")));
    let widget = WidgetType::from_name(&w.kind)
        .ok_or_else(|| UiError::Json(format!("unknown widget type `{}`", w.kind)))?;
    Ok(UiNode {
        id: term(&w.id)?,
        widget,
        attributes: w
            .attributes
            .iter()
            .map(|a| Ok((term(&a.key)?, term(&a.value)?)))
            .collect::<Result<_, UiError>>()?,
        handlers: w
            .when
            .iter()
            .map(|h| {
                Ok(WhenHandler {
                    event: term(&h.event)?,
                    action: Action::from_name(&h.action)
                        .ok_or_else(|| UiError::Json(format!("unknown action `{}`", h.action)))?,
                    operand: term(&h.operand)?,
                })
            })
            .collect::<Result<_, UiError>>()?,
        children: w
            .children
            .into_iter()
            .map(from_wire)
            .collect::<Result<_, _>>()?,
    })
}

/// Parses wire JSON back into a tree.
pub fn parse_tree_json(text: &str) -> Result<UiTree, UiError> {
    let root: WireNode = serde_json::from_str(text).map_err(|e| UiError::Json(e.to_string()))?;
    if root.kind != "root" || root.id != "root" {
        return Err(UiError::Json("top node must be the root".into()));
    }
    Ok(UiTree {
        children: root
            .children
            .into_iter()
            .map(from_wire)
            .collect::<Result<_, _>>()?,
    })
}
