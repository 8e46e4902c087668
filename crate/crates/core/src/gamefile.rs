//! JSON game files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "players": ["A", "B"],
//!   "strategy_sets": [["C", "D"], ["C", "D"]],
//!   "payoffs": [[[-1, -5], [0, -3]], [[-1, 0], [-5, -3]]],
//!   "quantum": {
//!     "initial_state": "ewl_entangled",
//!     "basis": "ewl_eta",
//!     "family": {"kind": "two_param"}
//!   }
//! }
//! ```
//!
//! `payoffs[i]` is player i's tensor nested in player order. Complex entries
//! are `[re, im]` pairs; reals may be written as `"pi"`, `"-pi/2"`,
//! `"3pi/4"` and so on. States are `"ewl_entangled"`, `"phi_plus"`,
//! `"computational:<play>"` or an explicit density matrix; bases are
//! `"computational"`, `"ewl_eta"`, `"bell"` or a list of
//! `{"label", "projector"}` objects. An optional `sequential` section
//! describes a turn-based game on one shared system.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::catalog::{CatalogEntry, QuantumEntry};
use crate::classical::ClassicalGame;
use crate::error::{Error, Result};
use crate::quantum::{c, ComplexMatrix, DensityMatrix, MeasurementBasis, UnitaryOperator, C64};
use crate::quantumizer::{
    bell_basis, build_ewl, build_sequential, computational_basis, computational_state, ewl_entangled_state,
    ewl_eta_basis, phi_plus_state, QuantumGame, SequentialQuantumGame,
};
use crate::strategy::{named_operator, FamilyKind, StrategyFamily};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Named(String),
    Matrix(ComplexMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisSpec {
    Named(String),
    Explicit(Vec<(String, ComplexMatrix)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    Named(String),
    Matrix(ComplexMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    Param(FamilyKind),
    Finite(Vec<(String, OperatorSpec)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSection {
    pub initial_state: StateSpec,
    pub basis: BasisSpec,
    pub family: Option<FamilySpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialSection {
    pub players: Vec<String>,
    pub state_labels: Vec<String>,
    pub initial_state: StateSpec,
    /// `(name, perm)`: the move sends state j to state `perm[j]`.
    pub moves: Vec<(String, Vec<usize>)>,
    /// Player names in turn order.
    pub schedule: Vec<String>,
    /// `payoffs[i][j]`: player i's payoff when the system ends in state j.
    pub payoffs: Vec<Vec<f64>>,
}

/// A parsed and fully validated game file.
#[derive(Debug, Clone, PartialEq)]
pub struct GameFile {
    pub schema_version: u64,
    pub name: Option<String>,
    pub parameters: BTreeMap<String, f64>,
    pub classical: ClassicalGame,
    pub quantum: Option<QuantumSection>,
    pub sequential: Option<SequentialSection>,
    quantum_game: Option<QuantumGame>,
    family: Option<StrategyFamily>,
    sequential_game: Option<SequentialQuantumGame>,
}

impl GameFile {
    pub fn quantum_game(&self) -> Option<&QuantumGame> {
        self.quantum_game.as_ref()
    }

    pub fn family(&self) -> Option<&StrategyFamily> {
        self.family.as_ref()
    }

    pub fn sequential_game(&self) -> Option<&SequentialQuantumGame> {
        self.sequential_game.as_ref()
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema_version".into(), json!(self.schema_version));
        if let Some(n) = &self.name {
            m.insert("name".into(), json!(n));
        }
        if !self.parameters.is_empty() {
            m.insert("parameters".into(), json!(self.parameters));
        }
        let g = &self.classical;
        m.insert("players".into(), json!(g.player_names()));
        m.insert("strategy_sets".into(), json!(g.strategy_sets()));
        let shape = g.shape();
        m.insert(
            "payoffs".into(),
            Value::Array(g.payoff_tensors().iter().map(|t| nest(t, &shape)).collect()),
        );
        if let Some(q) = &self.quantum {
            let mut qm = Map::new();
            qm.insert("initial_state".into(), state_json(&q.initial_state));
            qm.insert(
                "basis".into(),
                match &q.basis {
                    BasisSpec::Named(n) => json!(n),
                    BasisSpec::Explicit(items) => Value::Array(
                        items
                            .iter()
                            .map(|(l, p)| json!({"label": l, "projector": matrix_json(p)}))
                            .collect(),
                    ),
                },
            );
            if let Some(f) = &q.family {
                qm.insert("family".into(), family_json(f));
            }
            m.insert("quantum".into(), Value::Object(qm));
        }
        if let Some(s) = &self.sequential {
            m.insert(
                "sequential".into(),
                json!({
                    "players": s.players,
                    "state_labels": s.state_labels,
                    "initial_state": state_json(&s.initial_state),
                    "moves": s.moves.iter().map(|(n, p)| json!({"name": n, "permutation": p})).collect::<Vec<_>>(),
                    "schedule": s.schedule,
                    "payoffs": s.payoffs,
                }),
            );
        }
        Value::Object(m)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable") + "\n"
    }
}

fn nest(flat: &[f64], shape: &[usize]) -> Value {
    if shape.len() <= 1 {
        return json!(flat);
    }
    let chunk = flat.len() / shape[0];
    Value::Array(flat.chunks(chunk).map(|c| nest(c, &shape[1..])).collect())
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|r| {
                Value::Array(
                    (0..m.cols())
                        .map(|col| {
                            let z = m.get(r, col);
                            json!([z.re, z.im])
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

fn state_json(s: &StateSpec) -> Value {
    match s {
        StateSpec::Named(n) => json!(n),
        StateSpec::Matrix(m) => matrix_json(m),
    }
}

fn family_json(f: &FamilySpec) -> Value {
    match f {
        FamilySpec::Param(k) => json!({ "kind": k }),
        FamilySpec::Finite(ops) => json!({
            "kind": "finite_set",
            "operators": ops.iter().map(|(l, o)| json!({
                "label": l,
                "operator": match o {
                    OperatorSpec::Named(n) => json!(n),
                    OperatorSpec::Matrix(m) => matrix_json(m),
                }
            })).collect::<Vec<_>>()
        }),
    }
}

/// Parses a real given as a number, a fraction or a multiple of pi:
/// `"pi"`, `"-pi/2"`, `"3pi/4"`, `"2*pi"`, `"0.25"`, `"5/3"`.
pub fn parse_real(text: &str) -> Result<f64> {
    let bad = || Error::Parameter(format!("cannot read {text:?} as a real number"));
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, t),
    };
    let v = if let Some(pos) = body.find("pi") {
        let coef = body[..pos].trim().trim_end_matches('*').trim();
        let coef = if coef.is_empty() {
            1.0
        } else {
            coef.parse::<f64>().map_err(|_| bad())?
        };
        let rest = body[pos + 2..].trim();
        let den = match rest.strip_prefix('/') {
            Some(d) => d.trim().parse::<f64>().map_err(|_| bad())?,
            None if rest.is_empty() => 1.0,
            None => return Err(bad()),
        };
        if den == 0.0 {
            return Err(bad());
        }
        coef * PI / den
    } else if let Some((num, den)) = body.split_once('/') {
        let num = num.trim().parse::<f64>().map_err(|_| bad())?;
        let den = den.trim().parse::<f64>().map_err(|_| bad())?;
        if den == 0.0 {
            return Err(bad());
        }
        num / den
    } else {
        body.parse::<f64>().map_err(|_| bad())?
    };
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(if neg { -v } else { v })
}

/// Collects every problem found with its field path.
struct Walker {
    errors: Vec<String>,
}

impl Walker {
    fn err(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.errors.push(format!("{path}: {msg}"));
    }

    fn obj<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        let o = v.as_object();
        if o.is_none() {
            self.err(path, "expected an object");
        }
        o
    }

    fn arr<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Vec<Value>> {
        let a = v.as_array();
        if a.is_none() {
            self.err(path, "expected an array");
        }
        a
    }

    fn string(&mut self, v: &Value, path: &str) -> Option<String> {
        let s = v.as_str().map(str::to_string);
        if s.is_none() {
            self.err(path, "expected a string");
        }
        s
    }

    fn real(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => match parse_real(s) {
                Ok(x) => Some(x),
                Err(e) => {
                    self.err(path, e);
                    None
                }
            },
            _ => {
                self.err(path, "expected a number");
                None
            }
        }
    }

    fn strings(&mut self, v: &Value, path: &str) -> Option<Vec<String>> {
        let a = self.arr(v, path)?;
        let out: Vec<Option<String>> = a
            .iter()
            .enumerate()
            .map(|(k, x)| self.string(x, &format!("{path}[{k}]")))
            .collect();
        out.into_iter().collect()
    }

    fn reals(&mut self, v: &Value, path: &str) -> Option<Vec<f64>> {
        let a = self.arr(v, path)?;
        let out: Vec<Option<f64>> = a
            .iter()
            .enumerate()
            .map(|(k, x)| self.real(x, &format!("{path}[{k}]")))
            .collect();
        out.into_iter().collect()
    }

    fn complex(&mut self, v: &Value, path: &str) -> Option<C64> {
        match v.as_array() {
            Some(p) if p.len() == 2 => {
                let re = self.real(&p[0], &format!("{path}[0]"))?;
                let im = self.real(&p[1], &format!("{path}[1]"))?;
                Some(c(re, im))
            }
            _ => {
                self.err(path, "expected a complex number as an [re, im] pair");
                None
            }
        }
    }

    fn matrix(&mut self, v: &Value, path: &str) -> Option<ComplexMatrix> {
        let rows = self.arr(v, path)?;
        let mut out = Vec::with_capacity(rows.len());
        let mut ok = true;
        for (r, row) in rows.iter().enumerate() {
            let rp = format!("{path}[{r}]");
            let Some(entries) = self.arr(row, &rp) else {
                ok = false;
                continue;
            };
            let parsed: Vec<Option<C64>> = entries
                .iter()
                .enumerate()
                .map(|(k, z)| self.complex(z, &format!("{rp}[{k}]")))
                .collect();
            match parsed.into_iter().collect::<Option<Vec<_>>>() {
                Some(row) => out.push(row),
                None => ok = false,
            }
        }
        if !ok {
            return None;
        }
        match ComplexMatrix::from_rows(&out) {
            Ok(m) => Some(m),
            Err(e) => {
                self.err(path, e);
                None
            }
        }
    }

    /// Flattens a nested tensor of the given shape (first axis slowest).
    fn tensor(&mut self, v: &Value, shape: &[usize], path: &str, out: &mut Vec<f64>) -> bool {
        if shape.is_empty() {
            return match self.real(v, path) {
                Some(x) => {
                    out.push(x);
                    true
                }
                None => false,
            };
        }
        let Some(items) = self.arr(v, path) else {
            return false;
        };
        if items.len() != shape[0] {
            self.err(
                path,
                format!("expected {} entries, found {}", shape[0], items.len()),
            );
            return false;
        }
        let mut ok = true;
        for (k, item) in items.iter().enumerate() {
            ok &= self.tensor(item, &shape[1..], &format!("{path}[{k}]"), out);
        }
        ok
    }

    fn unknown_keys(&mut self, o: &Map<String, Value>, allowed: &[&str], path: &str) {
        for k in o.keys() {
            if !allowed.contains(&k.as_str()) {
                self.err(&format!("{path}.{k}"), "unknown field");
            }
        }
    }

    fn required<'v>(&mut self, o: &'v Map<String, Value>, key: &str, path: &str) -> Option<&'v Value> {
        let v = o.get(key);
        if v.is_none() {
            self.err(&format!("{path}.{key}"), "missing field");
        }
        v
    }

    fn state_spec(&mut self, v: &Value, path: &str) -> Option<StateSpec> {
        match v {
            Value::String(s) => Some(StateSpec::Named(s.clone())),
            _ => self.matrix(v, path).map(StateSpec::Matrix),
        }
    }

    fn operator_spec(&mut self, v: &Value, path: &str) -> Option<OperatorSpec> {
        match v {
            Value::String(s) => Some(OperatorSpec::Named(s.clone())),
            _ => self.matrix(v, path).map(OperatorSpec::Matrix),
        }
    }

    fn basis_spec(&mut self, v: &Value, path: &str) -> Option<BasisSpec> {
        if let Value::String(s) = v {
            return Some(BasisSpec::Named(s.clone()));
        }
        let items = self.arr(v, path)?;
        let mut out = Vec::new();
        let mut ok = true;
        for (k, item) in items.iter().enumerate() {
            let ip = format!("{path}[{k}]");
            let Some(o) = self.obj(item, &ip) else {
                ok = false;
                continue;
            };
            self.unknown_keys(o, &["label", "projector"], &ip);
            let label = self
                .required(o, "label", &ip)
                .and_then(|l| self.string(l, &format!("{ip}.label")));
            let proj = self
                .required(o, "projector", &ip)
                .and_then(|p| self.matrix(p, &format!("{ip}.projector")));
            match (label, proj) {
                (Some(l), Some(p)) => out.push((l, p)),
                _ => ok = false,
            }
        }
        ok.then_some(BasisSpec::Explicit(out))
    }

    fn family_spec(&mut self, v: &Value, path: &str) -> Option<FamilySpec> {
        let o = self.obj(v, path)?;
        self.unknown_keys(o, &["kind", "operators"], path);
        let kind = self
            .required(o, "kind", path)
            .and_then(|k| self.string(k, &format!("{path}.kind")))?;
        if kind != "finite_set" {
            if o.contains_key("operators") {
                self.err(
                    &format!("{path}.operators"),
                    "only finite_set families list operators",
                );
            }
            return match kind.as_str() {
                "one_param" => Some(FamilySpec::Param(FamilyKind::OneParam)),
                "two_param" => Some(FamilySpec::Param(FamilyKind::TwoParam)),
                "three_param" => Some(FamilySpec::Param(FamilyKind::ThreeParam)),
                other => {
                    self.err(&format!("{path}.kind"), format!("unknown family {other:?}"));
                    None
                }
            };
        }
        let op = format!("{path}.operators");
        let items = self
            .required(o, "operators", path)
            .and_then(|a| self.arr(a, &op))?;
        let mut out = Vec::new();
        let mut ok = true;
        for (k, item) in items.iter().enumerate() {
            let ip = format!("{op}[{k}]");
            let Some(o) = self.obj(item, &ip) else {
                ok = false;
                continue;
            };
            self.unknown_keys(o, &["label", "operator"], &ip);
            let label = self
                .required(o, "label", &ip)
                .and_then(|l| self.string(l, &format!("{ip}.label")));
            let spec = match o.get("operator") {
                Some(x) => self.operator_spec(x, &format!("{ip}.operator")),
                // a bare label names a built-in operator
                None => label.clone().map(OperatorSpec::Named),
            };
            match (label, spec) {
                (Some(l), Some(s)) => out.push((l, s)),
                _ => ok = false,
            }
        }
        ok.then_some(FamilySpec::Finite(out))
    }
}

fn build_state(
    spec: &StateSpec,
    game: Option<&ClassicalGame>,
    labels: Option<&[String]>,
) -> Result<DensityMatrix> {
    match spec {
        StateSpec::Matrix(m) => DensityMatrix::new(m.clone()),
        StateSpec::Named(n) => match (n.as_str(), n.strip_prefix("computational:")) {
            ("ewl_entangled", _) => Ok(ewl_entangled_state()),
            ("phi_plus", _) => Ok(phi_plus_state()),
            (_, Some(label)) => match (game, labels) {
                (Some(g), _) => computational_state(g, &g.parse_play_label(label)?),
                (None, Some(ls)) => {
                    let k = ls
                        .iter()
                        .position(|l| l == label)
                        .ok_or_else(|| Error::UnknownName(format!("state label {label:?}")))?;
                    Ok(crate::quantum::PureState::basis(ls.len(), k)?.to_density())
                }
                _ => Err(Error::UnknownName(n.clone())),
            },
            _ => Err(Error::UnknownName(format!(
                "state {n:?} (expected ewl_entangled, phi_plus or computational:<label>)"
            ))),
        },
    }
}

fn build_basis(spec: &BasisSpec, game: &ClassicalGame) -> Result<MeasurementBasis> {
    match spec {
        BasisSpec::Named(n) => match n.as_str() {
            "computational" => computational_basis(game),
            "ewl_eta" => ewl_eta_basis(game),
            "bell" => bell_basis(game),
            other => Err(Error::UnknownName(format!(
                "basis {other:?} (expected computational, ewl_eta or bell)"
            ))),
        },
        BasisSpec::Explicit(items) => MeasurementBasis::new(
            items.iter().map(|(_, p)| p.clone()).collect(),
            items.iter().map(|(l, _)| l.clone()).collect(),
        ),
    }
}

pub fn build_family(spec: &FamilySpec) -> Result<StrategyFamily> {
    match spec {
        FamilySpec::Param(FamilyKind::OneParam) => Ok(StrategyFamily::OneParam),
        FamilySpec::Param(FamilyKind::TwoParam) => Ok(StrategyFamily::TwoParam),
        FamilySpec::Param(FamilyKind::ThreeParam) => Ok(StrategyFamily::ThreeParam),
        FamilySpec::Param(FamilyKind::FiniteSet) => {
            Err(Error::Parameter("finite_set family needs operators".into()))
        }
        FamilySpec::Finite(ops) => StrategyFamily::finite_set(
            ops.iter().map(|(l, _)| l.clone()).collect(),
            ops.iter()
                .map(|(_, o)| match o {
                    OperatorSpec::Named(n) => named_operator(n),
                    OperatorSpec::Matrix(m) => UnitaryOperator::new(m.clone()),
                })
                .collect::<Result<_>>()?,
        ),
    }
}

fn permutation_matrix(perm: &[usize]) -> Result<UnitaryOperator> {
    let k = perm.len();
    let mut seen = vec![false; k];
    for &p in perm {
        if p >= k || seen[p] {
            return Err(Error::InvalidGame(format!(
                "{perm:?} is not a permutation of 0..{k}"
            )));
        }
        seen[p] = true;
    }
    let mut rows = vec![vec![c(0.0, 0.0); k]; k];
    for (j, &p) in perm.iter().enumerate() {
        rows[p][j] = c(1.0, 0.0);
    }
    UnitaryOperator::from_rows(&rows)
}

pub fn parse_game_file(path: &Path) -> Result<GameFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::GameFile {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_game_str(&text)
}

pub fn parse_game_str(text: &str) -> Result<GameFile> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::GameFile {
        path: "$".into(),
        message: format!("malformed JSON: {e}"),
    })?;
    let mut w = Walker { errors: Vec::new() };
    let parsed = parse_root(&mut w, &root);
    match parsed {
        Some(g) if w.errors.is_empty() => Ok(g),
        _ => {
            if w.errors.is_empty() {
                w.errors.push("$: invalid game file".into());
            }
            Err(Error::Schema(w.errors))
        }
    }
}

fn parse_root(w: &mut Walker, root: &Value) -> Option<GameFile> {
    let o = w.obj(root, "$")?;
    w.unknown_keys(
        o,
        &[
            "schema_version",
            "name",
            "parameters",
            "players",
            "strategy_sets",
            "payoffs",
            "quantum",
            "sequential",
        ],
        "$",
    );
    let version = w.required(o, "schema_version", "$").and_then(|v| {
        let n = v.as_u64();
        if n.is_none() {
            w.err("$.schema_version", "expected a non-negative integer");
        }
        n
    });
    if let Some(v) = version {
        if v != SCHEMA_VERSION {
            w.err(
                "$.schema_version",
                format!("unsupported version {v} (expected {SCHEMA_VERSION})"),
            );
        }
    }
    let name = o.get("name").and_then(|v| w.string(v, "$.name"));
    let mut parameters = BTreeMap::new();
    if let Some(p) = o.get("parameters").and_then(|v| w.obj(v, "$.parameters")) {
        for (k, v) in p {
            if let Some(x) = w.real(v, &format!("$.parameters.{k}")) {
                parameters.insert(k.clone(), x);
            }
        }
    }
    let players = w
        .required(o, "players", "$")
        .and_then(|v| w.strings(v, "$.players"));
    let sets = w.required(o, "strategy_sets", "$").and_then(|v| {
        let a = w.arr(v, "$.strategy_sets")?;
        let out: Vec<Option<Vec<String>>> = a
            .iter()
            .enumerate()
            .map(|(k, s)| w.strings(s, &format!("$.strategy_sets[{k}]")))
            .collect();
        out.into_iter().collect::<Option<Vec<_>>>()
    });
    let payoffs_v = w.required(o, "payoffs", "$").and_then(|v| w.arr(v, "$.payoffs"));
    let (players, sets, payoffs_v) = (players?, sets?, payoffs_v?);
    if players.len() != sets.len() {
        w.err(
            "$.strategy_sets",
            format!("{} strategy sets for {} players", sets.len(), players.len()),
        );
        return None;
    }
    if payoffs_v.len() != players.len() {
        w.err(
            "$.payoffs",
            format!("{} payoff tensors for {} players", payoffs_v.len(), players.len()),
        );
        return None;
    }
    let shape: Vec<usize> = sets.iter().map(Vec::len).collect();
    let mut tensors = Vec::new();
    let mut ok = true;
    for (i, t) in payoffs_v.iter().enumerate() {
        let mut flat = Vec::new();
        let path = format!("$.payoffs[{i}]");
        if w.tensor(t, &shape, &path, &mut flat) {
            tensors.push(flat);
        } else {
            w.err(
                &path,
                format!("payoff tensor of player {i} does not match the strategy sets"),
            );
            ok = false;
        }
    }
    if !ok {
        return None;
    }
    let classical = match ClassicalGame::new(players, sets, tensors) {
        Ok(g) => g,
        Err(e) => {
            w.err("$.payoffs", e);
            return None;
        }
    };

    let mut quantum = None;
    let mut quantum_game = None;
    let mut family = None;
    if let Some(qv) = o.get("quantum") {
        if let Some(q) = parse_quantum(w, qv) {
            match build_state(&q.initial_state, Some(&classical), None)
                .map_err(|e| ("$.quantum.initial_state", e))
                .and_then(|rho| {
                    build_basis(&q.basis, &classical)
                        .map_err(|e| ("$.quantum.basis", e))
                        .map(|b| (rho, b))
                })
                .and_then(|(rho, b)| build_ewl(classical.clone(), rho, b).map_err(|e| ("$.quantum", e)))
            {
                Ok(g) => quantum_game = Some(g),
                Err((p, e)) => w.err(p, e),
            }
            if let Some(f) = &q.family {
                match build_family(f) {
                    Ok(f) => family = Some(f),
                    Err(e) => w.err("$.quantum.family", e),
                }
            }
            quantum = Some(q);
        }
    }

    let mut sequential = None;
    let mut sequential_game = None;
    if let Some(sv) = o.get("sequential") {
        if let Some(s) = parse_sequential(w, sv) {
            match build_sequential_section(&s) {
                Ok(g) => sequential_game = Some(g),
                Err(e) => w.err("$.sequential", e),
            }
            sequential = Some(s);
        }
    }

    Some(GameFile {
        schema_version: version.unwrap_or(SCHEMA_VERSION),
        name,
        parameters,
        classical,
        quantum,
        sequential,
        quantum_game,
        family,
        sequential_game,
    })
}

fn parse_quantum(w: &mut Walker, v: &Value) -> Option<QuantumSection> {
    let p = "$.quantum";
    let o = w.obj(v, p)?;
    w.unknown_keys(o, &["initial_state", "basis", "family"], p);
    let state = w
        .required(o, "initial_state", p)
        .and_then(|s| w.state_spec(s, "$.quantum.initial_state"));
    let basis = match o.get("basis") {
        Some(b) => w.basis_spec(b, "$.quantum.basis"),
        None => Some(BasisSpec::Named("computational".into())),
    };
    let family = match o.get("family") {
        Some(f) => Some(w.family_spec(f, "$.quantum.family")?),
        None => None,
    };
    Some(QuantumSection {
        initial_state: state?,
        basis: basis?,
        family,
    })
}

fn parse_sequential(w: &mut Walker, v: &Value) -> Option<SequentialSection> {
    let p = "$.sequential";
    let o = w.obj(v, p)?;
    w.unknown_keys(
        o,
        &[
            "players",
            "state_labels",
            "initial_state",
            "moves",
            "schedule",
            "payoffs",
        ],
        p,
    );
    let players = w
        .required(o, "players", p)
        .and_then(|x| w.strings(x, "$.sequential.players"));
    let labels = w
        .required(o, "state_labels", p)
        .and_then(|x| w.strings(x, "$.sequential.state_labels"));
    let state = w
        .required(o, "initial_state", p)
        .and_then(|x| w.state_spec(x, "$.sequential.initial_state"));
    let schedule = w
        .required(o, "schedule", p)
        .and_then(|x| w.strings(x, "$.sequential.schedule"));
    let payoffs = w.required(o, "payoffs", p).and_then(|x| {
        let a = w.arr(x, "$.sequential.payoffs")?;
        let out: Vec<Option<Vec<f64>>> = a
            .iter()
            .enumerate()
            .map(|(k, r)| w.reals(r, &format!("$.sequential.payoffs[{k}]")))
            .collect();
        out.into_iter().collect::<Option<Vec<_>>>()
    });
    let moves = w.required(o, "moves", p).and_then(|x| {
        let a = w.arr(x, "$.sequential.moves")?;
        let mut out = Vec::new();
        let mut ok = true;
        for (k, m) in a.iter().enumerate() {
            let mp = format!("$.sequential.moves[{k}]");
            let Some(mo) = w.obj(m, &mp) else {
                ok = false;
                continue;
            };
            w.unknown_keys(mo, &["name", "permutation"], &mp);
            let name = w
                .required(mo, "name", &mp)
                .and_then(|n| w.string(n, &format!("{mp}.name")));
            let perm = w.required(mo, "permutation", &mp).and_then(|pv| {
                let arr = w.arr(pv, &format!("{mp}.permutation"))?;
                let idx: Option<Vec<usize>> = arr.iter().map(|e| e.as_u64().map(|u| u as usize)).collect();
                if idx.is_none() {
                    w.err(&format!("{mp}.permutation"), "expected state indices");
                }
                idx
            });
            match (name, perm) {
                (Some(n), Some(pm)) => out.push((n, pm)),
                _ => ok = false,
            }
        }
        ok.then_some(out)
    });
    Some(SequentialSection {
        players: players?,
        state_labels: labels?,
        initial_state: state?,
        moves: moves?,
        schedule: schedule?,
        payoffs: payoffs?,
    })
}

fn build_sequential_section(s: &SequentialSection) -> Result<SequentialQuantumGame> {
    let rho = build_state(&s.initial_state, None, Some(&s.state_labels))?;
    let schedule = s
        .schedule
        .iter()
        .map(|n| {
            s.players
                .iter()
                .position(|p| p == n)
                .ok_or_else(|| Error::InvalidGame(format!("schedule names unknown player {n:?}")))
        })
        .collect::<Result<_>>()?;
    let moves = s
        .moves
        .iter()
        .map(|(n, p)| {
            if p.len() != s.state_labels.len() {
                return Err(Error::InvalidGame(format!(
                    "move {n} permutes {} states, expected {}",
                    p.len(),
                    s.state_labels.len()
                )));
            }
            Ok((n.clone(), permutation_matrix(p)?))
        })
        .collect::<Result<_>>()?;
    build_sequential(
        s.players.clone(),
        s.state_labels.clone(),
        rho,
        schedule,
        moves,
        s.payoffs.clone(),
    )
}

fn operator_spec_for(label: &str, u: &UnitaryOperator) -> OperatorSpec {
    match named_operator(label) {
        Ok(n) if n == *u => OperatorSpec::Named(label.to_string()),
        _ => OperatorSpec::Matrix(u.matrix().clone()),
    }
}

pub fn family_spec_of(f: &StrategyFamily) -> FamilySpec {
    match f {
        StrategyFamily::FiniteSet { labels, operators } => FamilySpec::Finite(
            labels
                .iter()
                .zip(operators)
                .map(|(l, u)| (l.clone(), operator_spec_for(l, u)))
                .collect(),
        ),
        other => FamilySpec::Param(other.kind()),
    }
}

/// Game file for a catalog entry.
pub fn export(entry: &CatalogEntry) -> Result<GameFile> {
    let (quantum, sequential) = match &entry.quantum {
        QuantumEntry::Parallel(_) => (
            Some(QuantumSection {
                initial_state: StateSpec::Named(entry.initial_state_name.clone()),
                basis: BasisSpec::Named(entry.basis_name.clone().unwrap_or_else(|| "computational".into())),
                family: Some(family_spec_of(&entry.family)),
            }),
            None,
        ),
        QuantumEntry::Sequential(sg) => {
            let moves = sg
                .classical_moves()
                .iter()
                .map(|(n, _)| {
                    let perm = (0..sg.dim())
                        .map(|j| sg.transition(n, j).expect("validated permutation"))
                        .collect();
                    (n.clone(), perm)
                })
                .collect();
            (
                None,
                Some(SequentialSection {
                    players: sg.player_names().to_vec(),
                    state_labels: sg.state_labels().to_vec(),
                    initial_state: StateSpec::Named(entry.initial_state_name.clone()),
                    moves,
                    schedule: sg
                        .schedule()
                        .iter()
                        .map(|&i| sg.player_names()[i].clone())
                        .collect(),
                    payoffs: sg.payoffs().to_vec(),
                }),
            )
        }
    };
    let text = serde_json::to_string(
        &GameFile {
            schema_version: SCHEMA_VERSION,
            name: Some(entry.name.clone()),
            parameters: entry.parameters.clone(),
            classical: entry.classical.clone(),
            quantum,
            sequential,
            quantum_game: None,
            family: None,
            sequential_game: None,
        }
        .to_json(),
    )
    .expect("serializable");
    // re-parse so the returned value carries the built games
    parse_game_str(&text)
}
