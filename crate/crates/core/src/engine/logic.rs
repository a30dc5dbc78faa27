//! Three-valued (Kleene) logic over TRUE / FALSE / NA.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Logical {
    True,
    False,
    Na,
}

impl Logical {
    pub fn from_bool(b: bool) -> Logical {
        if b {
            Logical::True
        } else {
            Logical::False
        }
    }

    pub fn and(self, other: Logical) -> Logical {
        use Logical::*;
        match (self, other) {
            (False, _) | (_, False) => False,
            (True, True) => True,
            _ => Na,
        }
    }

    pub fn or(self, other: Logical) -> Logical {
        use Logical::*;
        match (self, other) {
            (True, _) | (_, True) => True,
            (False, False) => False,
            _ => Na,
        }
    }

    pub fn not(self) -> Logical {
        match self {
            Logical::True => Logical::False,
            Logical::False => Logical::True,
            Logical::Na => Logical::Na,
        }
    }

    /// Only a definite TRUE keeps a row.
    pub fn is_true(self) -> bool {
        self == Logical::True
    }
}

impl fmt::Display for Logical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Logical::True => "TRUE",
            Logical::False => "FALSE",
            Logical::Na => "NA",
        })
    }
}
