//! Clock-tree netlist: parsing, validation, canonical serialization, and
//! elaboration into a flat simulation network.
//!
//! The format is line-oriented structured text (see `netlists/` for shipped
//! examples):
//!
//! ```text
//! format_version 1
//! tree paper_tree
//! vdd 0.8
//! source_freq 2.5G
//! pulse_gen {
//!   l1 1.013n
//!   c1 1p
//!   booster { ... }
//! }
//! branch b0 {
//!   inductance 247.4p
//!   resistance 2.59
//!   gaters 512
//!   buffers 1024
//!   ffs PRFF 4096
//!   cap_multiplier 1.0
//! }
//! ```
//!
//! Numeric values accept engineering suffixes on input. The canonical
//! serializer emits a stable key order with shortest round-trip floats, so
//! `parse(serialize(spec)) == spec` and golden files are byte-stable.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::calib::UnitCaps;
use crate::elements::{BoosterSpec, FlipFlopKind, PulseGenSpec};
use crate::error::{CoreError, Result};
use crate::rlc::RlcTank;
use crate::units::{format_canonical, parse_eng};

pub const NETLIST_FORMAT_VERSION: u32 = 1;

/// Declarative clock-tree description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub name: String,
    /// Supply voltage, volts.
    pub vdd: f64,
    /// Source clock frequency, hertz. Pulses fire on both edges, so the
    /// effective register clock rate is twice this.
    pub source_freq: f64,
    pub pulse_gen: PulseGenSpec,
    pub branches: Vec<BranchSpec>,
    pub variation: Option<VariationSpec>,
}

/// One clock-tree branch: a driver tank plus its lumped load chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub name: String,
    /// Driver inductance, henries.
    pub inductance: f64,
    /// Lumped series resistance, ohms.
    pub resistance: f64,
    pub gater_count: u64,
    pub buffer_count: u64,
    pub ff_groups: Vec<(FlipFlopKind, u64)>,
    /// Optional override of the aggregated load capacitance, farads.
    pub explicit_cap: Option<f64>,
    /// On-chip-variation factor applied to the branch load.
    pub cap_multiplier: f64,
}

/// Monte-Carlo variation setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationSpec {
    /// Fractional length-variation bound (0.10 means +/-10%).
    pub length_variation: f64,
    pub distribution: Distribution,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Distribution {
    /// Zero-mean Gaussian with 3 sigma at the bound, truncated at the bound.
    GaussianTruncated,
    Uniform,
}

impl Distribution {
    fn keyword(&self) -> &'static str {
        match self {
            Distribution::GaussianTruncated => "gaussian_truncated",
            Distribution::Uniform => "uniform",
        }
    }
}

/// Dense node identifier within a [`NodeTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

/// Name <-> id table; ids are dense and unique by construction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeTable {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl NodeTable {
    pub fn intern(&mut self, name: String) -> NodeId {
        if let Some(&id) = self.index.get(&name) {
            return id;
        }
        let id = NodeId(self.names.len() as u32);
        self.index.insert(name.clone(), id);
        self.names.push(name);
        id
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Load-chain stage kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    Gater,
    Buffer,
    FlipFlop(FlipFlopKind),
}

/// One lumped stage group of a branch load chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageRecord {
    pub kind: StageKind,
    pub count: u64,
    /// Gate-load capacitance per cell, farads.
    pub unit_cap: f64,
}

/// Flattened branch: driver tank plus load chain and its node ids.
#[derive(Debug, Clone, PartialEq)]
pub struct SimBranch {
    pub name: String,
    pub tank: RlcTank,
    pub stages: Vec<StageRecord>,
    pub cap_multiplier: f64,
    pub rclk: NodeId,
    pub pclk: NodeId,
    pub leaf: NodeId,
}

/// Flat switched-RLC elaboration of a [`TreeSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimNetwork {
    pub name: String,
    pub vdd: f64,
    pub source_freq: f64,
    pub pulse_gen: PulseGenSpec,
    pub branches: Vec<SimBranch>,
    pub nodes: NodeTable,
}

impl SimNetwork {
    /// Total network capacitance: sum of branch tank capacitances, computed
    /// over the same values elaboration stored.
    pub fn total_capacitance(&self) -> f64 {
        self.branches.iter().map(|b| b.tank.c).sum()
    }

    /// Engine-only network wrapping a single driver tank, used by
    /// standalone driver runs and tests. Carries no load chain.
    pub fn single_tank(name: &str, tank: RlcTank) -> SimNetwork {
        let mut nodes = NodeTable::default();
        nodes.intern("V_SR".to_string());
        let rclk = nodes.intern(format!("{name}.R_CLK"));
        let pclk = nodes.intern(format!("{name}.Pclk"));
        let leaf = nodes.intern(format!("{name}.leaf"));
        SimNetwork {
            name: name.to_string(),
            vdd: 0.0,
            source_freq: 0.0,
            pulse_gen: PulseGenSpec {
                l1: tank.l,
                c1: tank.c,
                booster: BoosterSpec {
                    l2: tank.l,
                    c2: tank.c,
                    boost_gain: 1.0,
                },
            },
            branches: vec![SimBranch {
                name: name.to_string(),
                tank,
                stages: Vec::new(),
                cap_multiplier: 1.0,
                rclk,
                pclk,
                leaf,
            }],
            nodes,
        }
    }
}

impl TreeSpec {
    /// Structural validation; the parser additionally reports positions.
    pub fn validate(&self) -> Result<()> {
        check_identifier("tree name", &self.name)?;
        if !(self.vdd > 0.0) {
            return Err(CoreError::validation("vdd", "must be > 0"));
        }
        if !(self.source_freq > 0.0) {
            return Err(CoreError::validation("source_freq", "must be > 0"));
        }
        self.pulse_gen.validate()?;
        if self.branches.is_empty() {
            return Err(CoreError::validation("branches", "at least one branch required"));
        }
        let mut seen = HashSet::new();
        for b in &self.branches {
            check_identifier("branch name", &b.name)?;
            if !seen.insert(b.name.as_str()) {
                return Err(CoreError::validation(
                    "branch name",
                    format!("duplicate branch '{}'", b.name),
                ));
            }
            b.validate()?;
        }
        if let Some(v) = &self.variation {
            v.validate()?;
        }
        Ok(())
    }

    /// Canonical serialization: stable key order, shortest round-trip
    /// floats. `parse_tree_spec(&spec.canonical())` yields an equal value.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let e = format_canonical;
        writeln!(out, "format_version {NETLIST_FORMAT_VERSION}").unwrap();
        writeln!(out, "tree {}", self.name).unwrap();
        writeln!(out, "vdd {}", e(self.vdd)).unwrap();
        writeln!(out, "source_freq {}", e(self.source_freq)).unwrap();
        writeln!(out, "pulse_gen {{").unwrap();
        writeln!(out, "  l1 {}", e(self.pulse_gen.l1)).unwrap();
        writeln!(out, "  c1 {}", e(self.pulse_gen.c1)).unwrap();
        writeln!(out, "  booster {{").unwrap();
        writeln!(out, "    l2 {}", e(self.pulse_gen.booster.l2)).unwrap();
        writeln!(out, "    c2 {}", e(self.pulse_gen.booster.c2)).unwrap();
        writeln!(out, "    gain {}", e(self.pulse_gen.booster.boost_gain)).unwrap();
        writeln!(out, "  }}").unwrap();
        writeln!(out, "}}").unwrap();
        for b in &self.branches {
            writeln!(out, "branch {} {{", b.name).unwrap();
            writeln!(out, "  inductance {}", e(b.inductance)).unwrap();
            writeln!(out, "  resistance {}", e(b.resistance)).unwrap();
            writeln!(out, "  gaters {}", b.gater_count).unwrap();
            writeln!(out, "  buffers {}", b.buffer_count).unwrap();
            for (kind, count) in &b.ff_groups {
                writeln!(out, "  ffs {kind} {count}").unwrap();
            }
            if let Some(cap) = b.explicit_cap {
                writeln!(out, "  explicit_cap {}", e(cap)).unwrap();
            }
            writeln!(out, "  cap_multiplier {}", e(b.cap_multiplier)).unwrap();
            writeln!(out, "}}").unwrap();
        }
        if let Some(v) = &self.variation {
            writeln!(out, "variation {{").unwrap();
            writeln!(out, "  length_variation {}", e(v.length_variation)).unwrap();
            writeln!(out, "  distribution {}", v.distribution.keyword()).unwrap();
            writeln!(out, "  samples {}", v.samples).unwrap();
            writeln!(out, "  seed {}", v.seed).unwrap();
            writeln!(out, "}}").unwrap();
        }
        out
    }
}

impl BranchSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.inductance > 0.0) {
            return Err(CoreError::validation("inductance", "non-positive inductance"));
        }
        if !(self.resistance >= 0.0) {
            return Err(CoreError::validation("resistance", "must be >= 0"));
        }
        if !(self.cap_multiplier > 0.0) {
            return Err(CoreError::validation("cap_multiplier", "must be > 0"));
        }
        if let Some(c) = self.explicit_cap {
            if !(c > 0.0) {
                return Err(CoreError::validation("explicit_cap", "must be > 0"));
            }
        }
        Ok(())
    }
}

impl VariationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.length_variation) {
            return Err(CoreError::validation(
                "length_variation",
                "must satisfy 0 <= value < 1",
            ));
        }
        if self.samples < 1 {
            return Err(CoreError::validation("samples", "must be >= 1"));
        }
        Ok(())
    }
}

fn check_identifier(field: &str, name: &str) -> Result<()> {
    let mut chars = name.chars();
    let ok = match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {
            chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(CoreError::validation(
            field,
            format!("'{name}' is not a valid identifier"),
        ))
    }
}

/// Aggregated branch load capacitance: the explicit override when present,
/// else the sum of per-stage loads; either way scaled by the branch
/// cap_multiplier.
pub fn aggregate_branch_capacitance(branch: &BranchSpec, unit_caps: &UnitCaps) -> Result<f64> {
    if let Some(cap) = branch.explicit_cap {
        return Ok(cap * branch.cap_multiplier);
    }
    let ff_total: u64 = branch.ff_groups.iter().map(|(_, n)| n).sum();
    if branch.gater_count == 0 && branch.buffer_count == 0 && ff_total == 0 {
        return Err(CoreError::validation(
            "branch load",
            format!("empty branch load in '{}'", branch.name),
        ));
    }
    let mut sum = branch.gater_count as f64 * unit_caps.gater
        + branch.buffer_count as f64 * unit_caps.buffer;
    for &(kind, count) in &branch.ff_groups {
        sum += count as f64 * unit_caps.flip_flop(kind);
    }
    Ok(branch.cap_multiplier * sum)
}

/// Elaborate a validated spec into the flat simulation network: one RLC tank
/// per branch with C from [`aggregate_branch_capacitance`].
pub fn elaborate(spec: &TreeSpec, unit_caps: &UnitCaps) -> Result<SimNetwork> {
    spec.validate()?;
    let mut nodes = NodeTable::default();
    nodes.intern("V_SR".to_string());
    let mut branches = Vec::with_capacity(spec.branches.len());
    for b in &spec.branches {
        let cap = aggregate_branch_capacitance(b, unit_caps)?;
        let tank = RlcTank::new(b.inductance, cap, b.resistance)?;
        let mut stages = Vec::new();
        if b.gater_count > 0 {
            stages.push(StageRecord {
                kind: StageKind::Gater,
                count: b.gater_count,
                unit_cap: unit_caps.gater,
            });
        }
        if b.buffer_count > 0 {
            stages.push(StageRecord {
                kind: StageKind::Buffer,
                count: b.buffer_count,
                unit_cap: unit_caps.buffer,
            });
        }
        for &(kind, count) in &b.ff_groups {
            if count > 0 {
                stages.push(StageRecord {
                    kind: StageKind::FlipFlop(kind),
                    count,
                    unit_cap: unit_caps.flip_flop(kind),
                });
            }
        }
        let rclk = nodes.intern(format!("{}.R_CLK", b.name));
        let pclk = nodes.intern(format!("{}.Pclk", b.name));
        let leaf = nodes.intern(format!("{}.leaf", b.name));
        branches.push(SimBranch {
            name: b.name.clone(),
            tank,
            stages,
            cap_multiplier: b.cap_multiplier,
            rclk,
            pclk,
            leaf,
        });
    }
    Ok(SimNetwork {
        name: spec.name.clone(),
        vdd: spec.vdd,
        source_freq: spec.source_freq,
        pulse_gen: spec.pulse_gen,
        branches,
        nodes,
    })
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Token<'a> {
    text: &'a str,
    col: usize,
}

struct Cursor<'a> {
    lines: Vec<(usize, Vec<Token<'a>>)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        let mut lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let mut tokens = Vec::new();
            let mut rest = line;
            let mut offset = 0;
            while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
                let after = &rest[start..];
                let len = after
                    .find(|c: char| c.is_whitespace())
                    .unwrap_or(after.len());
                tokens.push(Token {
                    text: &after[..len],
                    col: offset + start + 1,
                });
                offset += start + len;
                rest = &rest[start + len..];
            }
            if !tokens.is_empty() {
                lines.push((idx + 1, tokens));
            }
        }
        Cursor { lines, pos: 0 }
    }

    fn next(&mut self) -> Option<&(usize, Vec<Token<'a>>)> {
        let item = self.lines.get(self.pos);
        if item.is_some() {
            self.pos += 1;
        }
        item
    }

    fn last_line(&self) -> usize {
        self.lines.last().map(|(n, _)| *n).unwrap_or(1)
    }
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> CoreError {
    CoreError::syntax(line, col, msg.into())
}

fn expect_tokens<'l, 'a>(
    line: usize,
    tokens: &'l [Token<'a>],
    n: usize,
) -> std::result::Result<&'l [Token<'a>], CoreError> {
    if tokens.len() != n {
        let col = tokens
            .get(n.min(tokens.len().saturating_sub(1)))
            .map(|t| t.col)
            .unwrap_or(1);
        return Err(err(
            line,
            col,
            format!("expected {n} token(s), found {}", tokens.len()),
        ));
    }
    Ok(tokens)
}

fn parse_number(line: usize, tok: &Token) -> Result<f64> {
    parse_eng(tok.text)
        .ok_or_else(|| err(line, tok.col, format!("invalid number '{}'", tok.text)))
}

fn parse_count(line: usize, tok: &Token) -> Result<u64> {
    tok.text
        .parse::<u64>()
        .map_err(|_| err(line, tok.col, format!("invalid count '{}'", tok.text)))
}

fn positive(line: usize, tok: &Token, field: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(err(line, tok.col, format!("non-positive {field}")))
    }
}

/// Parse the textual tree description. Diagnostics carry 1-based line and
/// column and name the offending field; nothing is silently clamped.
pub fn parse_tree_spec(text: &str) -> Result<TreeSpec> {
    let mut cur = Cursor::new(text);

    let mut name = None;
    let mut vdd = None;
    let mut source_freq = None;
    let mut format_version = None;
    let mut pulse_gen = None;
    let mut branches: Vec<BranchSpec> = Vec::new();
    let mut branch_lines: HashMap<String, usize> = HashMap::new();
    let mut variation = None;

    while let Some((line, tokens)) = cur.next() {
        let line = *line;
        let key = tokens[0].text;
        let key_col = tokens[0].col;
        match key {
            "format_version" => {
                let t = expect_tokens(line, tokens, 2)?;
                let v = parse_count(line, &t[1])?;
                if v as u32 != NETLIST_FORMAT_VERSION {
                    return Err(err(
                        line,
                        t[1].col,
                        format!(
                            "unsupported format_version {v} (expected {NETLIST_FORMAT_VERSION})"
                        ),
                    ));
                }
                format_version = Some(v);
            }
            "tree" => {
                let t = expect_tokens(line, tokens, 2)?;
                name = Some(t[1].text.to_string());
            }
            "vdd" => {
                let t = expect_tokens(line, tokens, 2)?;
                let v = parse_number(line, &t[1])?;
                vdd = Some(positive(line, &t[1], "vdd", v)?);
            }
            "source_freq" => {
                let t = expect_tokens(line, tokens, 2)?;
                let v = parse_number(line, &t[1])?;
                source_freq = Some(positive(line, &t[1], "source_freq", v)?);
            }
            "pulse_gen" => {
                expect_block_open(line, tokens, 2)?;
                pulse_gen = Some(parse_pulse_gen(&mut cur, line)?);
            }
            "branch" => {
                expect_block_open(line, tokens, 3)?;
                let bname = tokens[1].text.to_string();
                check_identifier("branch name", &bname)
                    .map_err(|e| err(line, tokens[1].col, e.to_string()))?;
                if let Some(prev) = branch_lines.get(&bname) {
                    return Err(err(
                        line,
                        tokens[1].col,
                        format!("duplicate branch name '{bname}' (first defined on line {prev})"),
                    ));
                }
                branch_lines.insert(bname.clone(), line);
                branches.push(parse_branch(&mut cur, line, bname)?);
            }
            "variation" => {
                expect_block_open(line, tokens, 2)?;
                variation = Some(parse_variation(&mut cur, line)?);
            }
            _ => {
                return Err(err(line, key_col, format!("unknown key '{key}'")));
            }
        }
    }

    let last = cur.last_line();
    if format_version.is_none() {
        return Err(err(last, 1, "missing format_version"));
    }
    let spec = TreeSpec {
        name: name.ok_or_else(|| err(last, 1, "missing tree name"))?,
        vdd: vdd.ok_or_else(|| err(last, 1, "missing vdd"))?,
        source_freq: source_freq.ok_or_else(|| err(last, 1, "missing source_freq"))?,
        pulse_gen: pulse_gen.ok_or_else(|| err(last, 1, "missing pulse_gen block"))?,
        branches,
        variation,
    };
    spec.validate()?;
    Ok(spec)
}

fn expect_block_open(line: usize, tokens: &[Token], n: usize) -> Result<()> {
    if tokens.len() != n || tokens[n - 1].text != "{" {
        return Err(err(
            line,
            tokens.last().map(|t| t.col).unwrap_or(1),
            "expected '{' opening a block",
        ));
    }
    Ok(())
}

fn is_block_close(tokens: &[Token]) -> bool {
    tokens.len() == 1 && tokens[0].text == "}"
}

fn parse_pulse_gen(cur: &mut Cursor, open_line: usize) -> Result<PulseGenSpec> {
    let mut l1 = None;
    let mut c1 = None;
    let mut booster = None;
    loop {
        let (line, tokens) = match cur.next() {
            Some(item) => (item.0, &item.1),
            None => return Err(err(open_line, 1, "unterminated pulse_gen block")),
        };
        if is_block_close(tokens) {
            break;
        }
        match tokens[0].text {
            "l1" => {
                let t = expect_tokens(line, tokens, 2)?;
                let v = parse_number(line, &t[1])?;
                l1 = Some(positive(line, &t[1], "pulse_gen l1", v)?);
            }
            "c1" => {
                let t = expect_tokens(line, tokens, 2)?;
                let v = parse_number(line, &t[1])?;
                c1 = Some(positive(line, &t[1], "pulse_gen c1", v)?);
            }
            "booster" => {
                expect_block_open(line, tokens, 2)?;
                booster = Some(parse_booster(cur, line)?);
            }
            other => return Err(err(line, tokens[0].col, format!("unknown pulse_gen key '{other}'"))),
        }
    }
    Ok(PulseGenSpec {
        l1: l1.ok_or_else(|| err(open_line, 1, "pulse_gen missing l1"))?,
        c1: c1.ok_or_else(|| err(open_line, 1, "pulse_gen missing c1"))?,
        booster: booster.ok_or_else(|| err(open_line, 1, "pulse_gen missing booster block"))?,
    })
}

fn parse_booster(cur: &mut Cursor, open_line: usize) -> Result<BoosterSpec> {
    let mut l2 = None;
    let mut c2 = None;
    let mut gain = None;
    loop {
        let (line, tokens) = match cur.next() {
            Some(item) => (item.0, &item.1),
            None => return Err(err(open_line, 1, "unterminated booster block")),
        };
        if is_block_close(tokens) {
            break;
        }
        let t = expect_tokens(line, tokens, 2)?;
        let v = parse_number(line, &t[1])?;
        match t[0].text {
            "l2" => l2 = Some(positive(line, &t[1], "booster l2", v)?),
            "c2" => c2 = Some(positive(line, &t[1], "booster c2", v)?),
            "gain" => {
                if v < 1.0 {
                    return Err(err(line, t[1].col, "booster gain must be >= 1"));
                }
                gain = Some(v);
            }
            other => return Err(err(line, t[0].col, format!("unknown booster key '{other}'"))),
        }
    }
    Ok(BoosterSpec {
        l2: l2.ok_or_else(|| err(open_line, 1, "booster missing l2"))?,
        c2: c2.ok_or_else(|| err(open_line, 1, "booster missing c2"))?,
        boost_gain: gain.ok_or_else(|| err(open_line, 1, "booster missing gain"))?,
    })
}

fn parse_branch(cur: &mut Cursor, open_line: usize, name: String) -> Result<BranchSpec> {
    let mut inductance = None;
    let mut resistance = None;
    let mut gaters = 0;
    let mut buffers = 0;
    let mut ff_groups = Vec::new();
    let mut explicit_cap = None;
    let mut cap_multiplier = 1.0;
    loop {
        let (line, tokens) = match cur.next() {
            Some(item) => (item.0, &item.1),
            None => return Err(err(open_line, 1, format!("unterminated branch block '{name}'"))),
        };
        if is_block_close(tokens) {
            break;
        }
        match tokens[0].text {
            "inductance" => {
                let t = expect_tokens(line, tokens, 2)?;
                let v = parse_number(line, &t[1])?;
                inductance = Some(positive(line, &t[1], "inductance", v)?);
            }
            "resistance" => {
                let t = expect_tokens(line, tokens, 2)?;
                let v = parse_number(line, &t[1])?;
                if v < 0.0 {
                    return Err(err(line, t[1].col, "negative resistance"));
                }
                resistance = Some(v);
            }
            "gaters" => {
                let t = expect_tokens(line, tokens, 2)?;
                gaters = parse_count(line, &t[1])?;
            }
            "buffers" => {
                let t = expect_tokens(line, tokens, 2)?;
                buffers = parse_count(line, &t[1])?;
            }
            "ffs" => {
                let t = expect_tokens(line, tokens, 3)?;
                let kind: FlipFlopKind = t[1]
                    .text
                    .parse()
                    .map_err(|e: CoreError| err(line, t[1].col, e.to_string()))?;
                let count = parse_count(line, &t[2])?;
                ff_groups.push((kind, count));
            }
            "explicit_cap" => {
                let t = expect_tokens(line, tokens, 2)?;
                let v = parse_number(line, &t[1])?;
                explicit_cap = Some(positive(line, &t[1], "explicit_cap", v)?);
            }
            "cap_multiplier" => {
                let t = expect_tokens(line, tokens, 2)?;
                let v = parse_number(line, &t[1])?;
                cap_multiplier = positive(line, &t[1], "cap_multiplier", v)?;
            }
            other => return Err(err(line, tokens[0].col, format!("unknown branch key '{other}'"))),
        }
    }
    Ok(BranchSpec {
        inductance: inductance
            .ok_or_else(|| err(open_line, 1, format!("branch '{name}' missing inductance")))?,
        resistance: resistance
            .ok_or_else(|| err(open_line, 1, format!("branch '{name}' missing resistance")))?,
        name,
        gater_count: gaters,
        buffer_count: buffers,
        ff_groups,
        explicit_cap,
        cap_multiplier,
    })
}

fn parse_variation(cur: &mut Cursor, open_line: usize) -> Result<VariationSpec> {
    let mut length_variation = None;
    let mut distribution = Distribution::GaussianTruncated;
    let mut samples = None;
    let mut seed = 0;
    loop {
        let (line, tokens) = match cur.next() {
            Some(item) => (item.0, &item.1),
            None => return Err(err(open_line, 1, "unterminated variation block")),
        };
        if is_block_close(tokens) {
            break;
        }
        let t = expect_tokens(line, tokens, 2)?;
        match t[0].text {
            "length_variation" => {
                let v = parse_number(line, &t[1])?;
                if !(0.0..1.0).contains(&v) {
                    return Err(err(line, t[1].col, "length_variation must satisfy 0 <= value < 1"));
                }
                length_variation = Some(v);
            }
            "distribution" => {
                distribution = match t[1].text {
                    "gaussian_truncated" => Distribution::GaussianTruncated,
                    "uniform" => Distribution::Uniform,
                    other => {
                        return Err(err(
                            line,
                            t[1].col,
                            format!("unknown distribution '{other}'"),
                        ))
                    }
                };
            }
            "samples" => {
                let v = parse_count(line, &t[1])?;
                if v < 1 {
                    return Err(err(line, t[1].col, "samples must be >= 1"));
                }
                samples = Some(v);
            }
            "seed" => seed = parse_count(line, &t[1])?,
            other => return Err(err(line, t[0].col, format!("unknown variation key '{other}'"))),
        }
    }
    Ok(VariationSpec {
        length_variation: length_variation
            .ok_or_else(|| err(open_line, 1, "variation missing length_variation"))?,
        distribution,
        samples: samples.ok_or_else(|| err(open_line, 1, "variation missing samples"))?,
        seed,
    })
}
