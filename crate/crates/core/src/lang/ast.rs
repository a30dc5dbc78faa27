use super::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Negate,
    /// `desc(x)`; only meaningful as an `arrange` key.
    Desc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    In,
    And,
    Or,
    Add,
    Sub,
    Mul,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Lt => "<",
            BinaryOp::Gt => ">",
            BinaryOp::Le => "<=",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::In => "%in%",
            BinaryOp::And => "&",
            BinaryOp::Or => "|",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Lt => "lt",
            BinaryOp::Gt => "gt",
            BinaryOp::Le => "le",
            BinaryOp::Ge => "ge",
            BinaryOp::Eq => "eq",
            BinaryOp::Ne => "ne",
            BinaryOp::In => "in",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mul",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Lt
            | BinaryOp::Gt
            | BinaryOp::Le
            | BinaryOp::Ge
            | BinaryOp::Eq
            | BinaryOp::Ne
            | BinaryOp::In => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }
}

pub const UNARY_PRECEDENCE: u8 = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    /// Always non-negative as produced by the parser; `-3` is `Negate(3)`.
    Number(f64),
    Na,
    Bool(bool),
    Column(String),
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        name: String,
        args: Vec<Expr>,
        named_args: Vec<(String, Expr)>,
    },
}

/// An expression node. Equality is structural: spans are ignored.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }

    /// Builds a node with an empty span; handy for tests and generated code.
    pub fn bare(kind: ExprKind) -> Expr {
        Expr::new(kind, Span::default())
    }

    pub fn number(v: f64) -> Expr {
        Expr::bare(ExprKind::Number(v))
    }

    pub fn column(name: &str) -> Expr {
        Expr::bare(ExprKind::Column(name.to_string()))
    }

    pub fn unary(op: UnaryOp, operand: Expr) -> Expr {
        Expr::bare(ExprKind::Unary {
            op,
            operand: Box::new(operand),
        })
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::bare(ExprKind::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        })
    }

    pub fn call(name: &str, args: Vec<Expr>) -> Expr {
        Expr::bare(ExprKind::Call {
            name: name.to_string(),
            args,
            named_args: Vec::new(),
        })
    }

    pub fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary { op, .. } => op.precedence(),
            ExprKind::Unary {
                op: UnaryOp::Not | UnaryOp::Negate,
                ..
            } => UNARY_PRECEDENCE,
            _ => u8::MAX,
        }
    }

    /// Pre-order walk over this node and its children.
    pub fn walk<'a>(&'a self, visit: &mut dyn FnMut(&'a Expr)) {
        visit(self);
        match &self.kind {
            ExprKind::Unary { operand, .. } => operand.walk(visit),
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.walk(visit);
                rhs.walk(visit);
            }
            ExprKind::Call {
                args, named_args, ..
            } => {
                args.iter().for_each(|a| a.walk(visit));
                named_args.iter().for_each(|(_, a)| a.walk(visit));
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerbKind {
    Filter,
    Select,
    Mutate,
    Arrange,
    GroupBy,
    Summarize,
}

impl VerbKind {
    pub const ALL: [VerbKind; 6] = [
        VerbKind::Filter,
        VerbKind::Select,
        VerbKind::Mutate,
        VerbKind::Arrange,
        VerbKind::GroupBy,
        VerbKind::Summarize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VerbKind::Filter => "filter",
            VerbKind::Select => "select",
            VerbKind::Mutate => "mutate",
            VerbKind::Arrange => "arrange",
            VerbKind::GroupBy => "group_by",
            VerbKind::Summarize => "summarize",
        }
    }

    pub fn from_name(name: &str) -> Option<VerbKind> {
        VerbKind::ALL.into_iter().find(|v| v.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectMode {
    Include,
    Exclude,
}

#[derive(Debug, Clone)]
pub struct SelectItem {
    pub name: String,
    pub span: Span,
}

impl PartialEq for SelectItem {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

#[derive(Debug, Clone)]
pub struct Assignment {
    pub target: String,
    pub target_span: Span,
    pub value: Expr,
}

impl PartialEq for Assignment {
    fn eq(&self, other: &Self) -> bool {
        self.target == other.target && self.value == other.value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verb {
    Filter(Vec<Expr>),
    Select {
        mode: SelectMode,
        items: Vec<SelectItem>,
    },
    Mutate(Vec<Assignment>),
    Arrange(Vec<Expr>),
    GroupBy(Vec<Expr>),
    Summarize(Vec<Expr>),
}

impl Verb {
    pub fn kind(&self) -> VerbKind {
        match self {
            Verb::Filter(_) => VerbKind::Filter,
            Verb::Select { .. } => VerbKind::Select,
            Verb::Mutate(_) => VerbKind::Mutate,
            Verb::Arrange(_) => VerbKind::Arrange,
            Verb::GroupBy(_) => VerbKind::GroupBy,
            Verb::Summarize(_) => VerbKind::Summarize,
        }
    }

    /// Every expression argument, including mutate right-hand sides.
    pub fn exprs(&self) -> Vec<&Expr> {
        match self {
            Verb::Filter(e) | Verb::Arrange(e) | Verb::GroupBy(e) | Verb::Summarize(e) => {
                e.iter().collect()
            }
            Verb::Mutate(assignments) => assignments.iter().map(|a| &a.value).collect(),
            Verb::Select { .. } => Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub verb: Verb,
    /// Covers the verb name through its closing parenthesis.
    pub span: Span,
    pub name_span: Span,
}

impl PartialEq for Stage {
    fn eq(&self, other: &Self) -> bool {
        self.verb == other.verb
    }
}

impl Stage {
    pub fn bare(verb: Verb) -> Stage {
        Stage {
            verb,
            span: Span::default(),
            name_span: Span::default(),
        }
    }
}

/// `data |> verb(...) |> ...`. The source is always `data`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Pipeline {
    pub stages: Vec<Stage>,
}
