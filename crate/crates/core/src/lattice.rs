//! Index arithmetic for the helical lattice.
//!
//! Data blocks are nodes `d_i` (1-based, in write order) and parity blocks are
//! edges `p_{i,j}` with `j > i`. Every node sits on one strand of each class in
//! use; the class rules below give the neighbouring edge indices. Nothing in
//! this module touches payloads.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Errors raised when validating code parameters.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("invalid alpha {0}: only 1, 2 and 3 are supported")]
    InvalidAlpha(u32),
    #[error("deformed lattice: alpha > 1 requires p >= s >= 1 (got s={s}, p={p})")]
    DeformedLattice { s: u32, p: u32 },
    #[error("single entanglement requires s = 1 and p = 0 (got s={s}, p={p})")]
    BadSingle { s: u32, p: u32 },
    #[error("cannot parse code parameters from {0:?}")]
    Parse(String),
}

/// Strand class. `H` is horizontal, `RH`/`LH` are the right- and left-handed helices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StrandClass {
    H,
    RH,
    LH,
}

impl StrandClass {
    pub const ALL: [StrandClass; 3] = [StrandClass::H, StrandClass::RH, StrandClass::LH];

    /// Position of the class in the fixed H, RH, LH order.
    pub fn index(self) -> usize {
        match self {
            StrandClass::H => 0,
            StrandClass::RH => 1,
            StrandClass::LH => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StrandClass::H => "h",
            StrandClass::RH => "rh",
            StrandClass::LH => "lh",
        }
    }
}

impl fmt::Display for StrandClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrandClass::H => f.write_str("H"),
            StrandClass::RH => f.write_str("RH"),
            StrandClass::LH => f.write_str("LH"),
        }
    }
}

/// Row category of a node, which selects the rule used at the lattice rim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeCategory {
    Top,
    Central,
    Bottom,
    /// Only for `s = 1`: the single row is both the top and the bottom row.
    TopAndBottom,
}

impl NodeCategory {
    pub fn is_top(self) -> bool {
        matches!(self, NodeCategory::Top | NodeCategory::TopAndBottom)
    }

    pub fn is_bottom(self) -> bool {
        matches!(self, NodeCategory::Bottom | NodeCategory::TopAndBottom)
    }
}

/// The `(alpha, s, p)` triple of an alpha entanglement code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeParams {
    alpha: u32,
    s: u32,
    p: u32,
}

impl CodeParams {
    pub fn new(alpha: u32, s: u32, p: u32) -> Result<Self, ParamError> {
        match alpha {
            1 if s != 1 || p != 0 => Err(ParamError::BadSingle { s, p }),
            1 => Ok(Self { alpha, s, p }),
            2 | 3 if s == 0 || p < s => Err(ParamError::DeformedLattice { s, p }),
            2 | 3 => Ok(Self { alpha, s, p }),
            _ => Err(ParamError::InvalidAlpha(alpha)),
        }
    }

    /// The single-chain code AE(1,-,-).
    pub fn single() -> Self {
        Self { alpha: 1, s: 1, p: 0 }
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Total number of strands, `s + (alpha - 1) * p`.
    pub fn strand_count(&self) -> u32 {
        self.s + (self.alpha - 1) * self.p
    }

    /// Strand classes in use. Double entanglements use the right-handed helix.
    pub fn classes(&self) -> &'static [StrandClass] {
        &StrandClass::ALL[..self.alpha as usize]
    }

    /// Blocks stored per data block: the node plus its `alpha` parities.
    pub fn blocks_per_node(&self) -> usize {
        self.alpha as usize + 1
    }

    /// Additional storage in percent of the data size.
    pub fn overhead_percent(&self) -> u32 {
        self.alpha * 100
    }
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alpha == 1 {
            write!(f, "AE(1,-,-)")
        } else {
            write!(f, "AE({},{},{})", self.alpha, self.s, self.p)
        }
    }
}

impl FromStr for CodeParams {
    type Err = ParamError;

    /// Accepts `3,2,5`, `AE(3,2,5)`, `1` and `AE(1,-,-)`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = || ParamError::Parse(text.to_string());
        let trimmed = text.trim();
        let inner = trimmed
            .strip_prefix("AE(")
            .or_else(|| trimmed.strip_prefix("ae("))
            .and_then(|rest| rest.strip_suffix(')'))
            .unwrap_or(trimmed);
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        let alpha: u32 = parts[0].parse().map_err(|_| err())?;
        if alpha == 1 && parts[1..].iter().all(|p| *p == "-") {
            return Ok(Self::single());
        }
        if parts.len() != 3 {
            return Err(err());
        }
        let s = parts[1].parse().map_err(|_| err())?;
        let p = parts[2].parse().map_err(|_| err())?;
        Self::new(alpha, s, p)
    }
}

/// Identifier of a block in the lattice.
///
/// Edges carry their strand class because `s = 1` lattices have parallel
/// edges (for AE(3,1,p) both helices join `d_i` and `d_{i+p}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockId {
    Node(u64),
    Edge { from: u64, to: u64, class: StrandClass },
}

impl BlockId {
    /// The edge created when `d_from` is entangled on `class`.
    pub fn edge(from: u64, class: StrandClass, params: &CodeParams) -> Self {
        BlockId::Edge {
            from,
            to: output_parity_index(from, class, params),
            class,
        }
    }

    pub fn is_node(&self) -> bool {
        matches!(self, BlockId::Node(_))
    }

    /// Smallest lattice index the block touches.
    pub fn min_index(&self) -> u64 {
        match *self {
            BlockId::Node(i) => i,
            BlockId::Edge { from, .. } => from,
        }
    }

    /// Largest lattice index the block touches.
    pub fn max_index(&self) -> u64 {
        match *self {
            BlockId::Node(i) => i,
            BlockId::Edge { to, .. } => to,
        }
    }

    /// Shift the block along the lattice. Only shifts by multiples of `s`
    /// preserve the lattice structure.
    pub fn translate(&self, delta: i64) -> Self {
        let shift = |i: u64| (i as i64 + delta) as u64;
        match *self {
            BlockId::Node(i) => BlockId::Node(shift(i)),
            BlockId::Edge { from, to, class } => BlockId::Edge {
                from: shift(from),
                to: shift(to),
                class,
            },
        }
    }

    /// Canonical key, `d<i>` or `p<i>-<j>`. Parallel edges get a `.<class>`
    /// suffix so every block of a lattice has a distinct key.
    pub fn key(&self, params: &CodeParams) -> String {
        match *self {
            BlockId::Node(i) => format!("d{i}"),
            BlockId::Edge { from, to, class } => {
                let parallel = params
                    .classes()
                    .iter()
                    .any(|&c| c != class && output_parity_index(from, c, params) == to);
                if parallel {
                    format!("p{from}-{to}.{}", class.as_str())
                } else {
                    format!("p{from}-{to}")
                }
            }
        }
    }

    /// Inverse of [`BlockId::key`].
    pub fn parse_key(key: &str, params: &CodeParams) -> Option<Self> {
        if let Some(rest) = key.strip_prefix('d') {
            let i: u64 = rest.parse().ok()?;
            return (i >= 1).then_some(BlockId::Node(i));
        }
        let rest = key.strip_prefix('p')?;
        let (pair, class) = match rest.split_once('.') {
            Some((pair, suffix)) => {
                let class = StrandClass::ALL.into_iter().find(|c| c.as_str() == suffix)?;
                (pair, Some(class))
            }
            None => (rest, None),
        };
        let (from, to) = pair.split_once('-')?;
        let from: u64 = from.parse().ok()?;
        let to: u64 = to.parse().ok()?;
        if from == 0 {
            return None;
        }
        let class = match class {
            Some(c) => c,
            None => *params
                .classes()
                .iter()
                .find(|&&c| output_parity_index(from, c, params) == to)?,
        };
        let id = BlockId::edge(from, class, params);
        (id.key(params) == key).then_some(id)
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockId::Node(i) => write!(f, "d{i}"),
            BlockId::Edge { from, to, .. } => write!(f, "p{from}-{to}"),
        }
    }
}

/// The computed input index fell before the first node: the parity is the
/// virtual head of its strand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("input parity of d{node} on {class} lies before the lattice head")]
pub struct OutOfLattice {
    pub node: u64,
    pub class: StrandClass,
}

pub fn node_category(i: u64, params: &CodeParams) -> NodeCategory {
    let s = params.s as u64;
    if s == 1 {
        return NodeCategory::TopAndBottom;
    }
    match i % s {
        1 => NodeCategory::Top,
        0 => NodeCategory::Bottom,
        _ => NodeCategory::Central,
    }
}

/// Signed input index `h` such that `d_i` is tangled with `p_{h,i}`. Values
/// below 1 denote the strand head.
pub(crate) fn raw_input_index(i: u64, class: StrandClass, params: &CodeParams) -> i64 {
    let (i, s, p) = (i as i64, params.s as i64, params.p as i64);
    let category = node_category(i as u64, params);
    match class {
        StrandClass::H => i - s,
        StrandClass::RH if category.is_top() => i - s * p + (s * s - 1),
        StrandClass::RH => i - (s + 1),
        StrandClass::LH if category.is_bottom() => i - s * p + (s - 1) * (s - 1),
        StrandClass::LH => i - (s - 1),
    }
}

/// Index `h` of the parity `p_{h,i}` that `d_i` is tangled with on `class`.
pub fn input_parity_index(i: u64, class: StrandClass, params: &CodeParams) -> Result<u64, OutOfLattice> {
    let h = raw_input_index(i, class, params);
    if h >= 1 {
        Ok(h as u64)
    } else {
        Err(OutOfLattice { node: i, class })
    }
}

/// Index `j` of the parity `p_{i,j}` created when `d_i` is entangled on `class`.
pub fn output_parity_index(i: u64, class: StrandClass, params: &CodeParams) -> u64 {
    let (s, p) = (params.s as u64, params.p as u64);
    let category = node_category(i, params);
    match class {
        StrandClass::H => i + s,
        StrandClass::RH if category.is_bottom() => i + s * p - (s * s - 1),
        StrandClass::RH => i + s + 1,
        StrandClass::LH if category.is_top() => i + s * p - (s - 1) * (s - 1),
        StrandClass::LH => i + s - 1,
    }
}

/// The input edge of `d_i` on `class`, or `None` at the strand head.
pub fn input_edge(i: u64, class: StrandClass, params: &CodeParams) -> Option<BlockId> {
    input_parity_index(i, class, params)
        .ok()
        .map(|h| BlockId::Edge { from: h, to: i, class })
}

/// The output edge of `d_i` on `class`.
pub fn output_edge(i: u64, class: StrandClass, params: &CodeParams) -> BlockId {
    BlockId::edge(i, class, params)
}

/// The two edges adjacent to a node on one strand (a pp-tuple).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrandTuple {
    pub class: StrandClass,
    /// `None` when the node is the head of the strand.
    pub input: Option<BlockId>,
    pub output: BlockId,
}

impl StrandTuple {
    pub fn is_head(&self) -> bool {
        self.input.is_none()
    }
}

/// One pp-tuple per strand class, in H, RH, LH order.
pub fn incident_tuples(i: u64, params: &CodeParams) -> Vec<StrandTuple> {
    params
        .classes()
        .iter()
        .map(|&class| StrandTuple {
            class,
            input: input_edge(i, class, params),
            output: output_edge(i, class, params),
        })
        .collect()
}

/// 1-based number of the strand of `class` that passes through `d_i`.
///
/// Horizontal strands are numbered by row. Helical strands keep
/// `column - row` (RH) or `column + row` (LH) constant modulo `p` across the
/// wrap-around, which gives the numbering.
pub fn strand_id_of(i: u64, class: StrandClass, params: &CodeParams) -> u32 {
    let s = params.s as i64;
    let p = params.p as i64;
    let column = (i as i64 - 1) / s + 1;
    let row = (i as i64 - 1) % s + 1;
    match class {
        StrandClass::H => row as u32,
        StrandClass::RH => ((column - row).rem_euclid(p) + 1) as u32,
        StrandClass::LH => ((column + row - 1).rem_euclid(p) + 1) as u32,
    }
}
