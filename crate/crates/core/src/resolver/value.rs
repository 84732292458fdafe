use std::collections::HashMap;

use super::graph::ValueId;
use crate::frontend::ast::NodeId;

/// Index into [`super::Program::defs`].
pub type DefId = u32;
/// Index into [`super::Program::modules`].
pub type ModuleId = u32;

/// A program point: an expression node, plus a tag when one expression
/// needs several auxiliary values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub module: ModuleId,
    pub node: NodeId,
    pub tag: u8,
}

impl Site {
    pub fn new(module: ModuleId, node: NodeId) -> Self {
        Site { module, node, tag: 0 }
    }

    pub fn with_tag(self, tag: u8) -> Self {
        Site { tag, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContainerKind {
    /// List, tuple, set, or anything iterable over one pool of elements.
    Sequence,
    Dict,
}

/// Object a method is bound to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Receiver {
    Instance(DefId),
    Class(DefId),
}

impl Receiver {
    pub fn class(self) -> DefId {
        match self {
            Receiver::Instance(c) | Receiver::Class(c) => c,
        }
    }

    pub fn value(self) -> AbstractValue {
        match self {
            Receiver::Instance(c) => AbstractValue::Instance(c),
            Receiver::Class(c) => AbstractValue::Class(c),
        }
    }
}

/// What an expression may evaluate to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AbstractValue {
    /// A function or lambda defined in the project.
    Function(DefId),
    Class(DefId),
    Instance(DefId),
    Module(ModuleId),
    /// Anything outside the project, by dotted name.
    External(String),
    BoundMethod {
        func: DefId,
        receiver: Receiver,
    },
    /// `super()` inside class `after`, bound to `of`.
    Super {
        after: DefId,
        of: Receiver,
    },
    /// A list, tuple, set or dict created at `site`.
    Container {
        site: Site,
        kind: ContainerKind,
    },
    /// A method of a container, e.g. `d.get`.
    ContainerMethod {
        site: Site,
        kind: ContainerKind,
        method: String,
    },
    /// The result of calling a generator function.
    Generator(DefId),
    Unknown,
}

/// Interns abstract values as [`ValueId`]s.
#[derive(Debug, Clone, Default)]
pub struct ValueTable {
    values: Vec<AbstractValue>,
    index: HashMap<AbstractValue, ValueId>,
}

impl ValueTable {
    pub fn intern(&mut self, value: AbstractValue) -> ValueId {
        if let Some(&id) = self.index.get(&value) {
            return id;
        }
        let id = self.values.len() as ValueId;
        self.values.push(value.clone());
        self.index.insert(value, id);
        id
    }

    pub fn get(&self, id: ValueId) -> &AbstractValue {
        &self.values[id as usize]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }
}
