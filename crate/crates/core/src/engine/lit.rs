use std::fmt;
use std::ops::Not;

/// A Boolean variable. Stored zero-based; [`Var::id`] gives the one-based
/// DIMACS number.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(u32);

impl Var {
    pub(crate) fn from_index(index: usize) -> Var {
        Var(index as u32)
    }

    /// Variable with the given one-based DIMACS id.
    pub fn from_id(id: u32) -> Var {
        assert!(id > 0, "variable ids start at 1");
        Var(id - 1)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn id(self) -> u32 {
        self.0 + 1
    }

    #[inline]
    pub fn lit(self, positive: bool) -> Lit {
        Lit::new(self, positive)
    }

    #[inline]
    pub fn pos(self) -> Lit {
        Lit::new(self, true)
    }
}

/// A literal: a variable together with a polarity.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | u32::from(!positive))
    }

    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense index usable for per-literal tables.
    #[inline]
    pub(crate) fn code(self) -> usize {
        self.0 as usize
    }

    pub fn from_dimacs(value: i32) -> Lit {
        assert!(value != 0, "0 is not a literal");
        Lit::new(Var::from_id(value.unsigned_abs()), value > 0)
    }

    pub fn to_dimacs(self) -> i32 {
        let id = self.var().id() as i32;
        if self.is_positive() {
            id
        } else {
            -id
        }
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}
