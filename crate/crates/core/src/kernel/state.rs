// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::config::mask;
use super::constants::{PAGE_TYPES, PROC_STATES};
use super::{KernelConfig, KernelError};

/// A state field. Per-process and per-page fields take one index, the
/// `offs` and `data` sub-maps take two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Current,
    PagesPtrToInt,
    ProcState,
    ProcPpid,
    ProcIpcFrom,
    ProcIpcVal,
    ProcNrPages,
    ProcOffs,
    PageType,
    PageOwner,
    PageRefcnt,
    PageData,
}

/// Which top-level map a field belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapKind {
    Procs,
    Pages,
}

const PROC_SCALARS: [Field; 5] =
    [Field::ProcState, Field::ProcPpid, Field::ProcIpcFrom, Field::ProcIpcVal, Field::ProcNrPages];
const PAGE_SCALARS: [Field; 3] = [Field::PageType, Field::PageOwner, Field::PageRefcnt];

impl Field {
    pub const ALL: [Field; 12] = [
        Field::Current,
        Field::PagesPtrToInt,
        Field::ProcState,
        Field::ProcPpid,
        Field::ProcIpcFrom,
        Field::ProcIpcVal,
        Field::ProcNrPages,
        Field::ProcOffs,
        Field::PageType,
        Field::PageOwner,
        Field::PageRefcnt,
        Field::PageData,
    ];

    pub fn map(self) -> Option<MapKind> {
        match self {
            Field::Current | Field::PagesPtrToInt => None,
            Field::ProcState
            | Field::ProcPpid
            | Field::ProcIpcFrom
            | Field::ProcIpcVal
            | Field::ProcNrPages
            | Field::ProcOffs => Some(MapKind::Procs),
            _ => Some(MapKind::Pages),
        }
    }

    /// True for the inner maps read with `(i)` and written with `[i]`.
    pub fn is_submap(self) -> bool {
        matches!(self, Field::ProcOffs | Field::PageData)
    }

    pub fn arity(self) -> usize {
        match (self.map(), self.is_submap()) {
            (None, _) => 0,
            (Some(_), false) => 1,
            (Some(_), true) => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::Current => "current",
            Field::PagesPtrToInt => "pages_ptr_to_int",
            Field::ProcState => "state",
            Field::ProcPpid => "ppid",
            Field::ProcIpcFrom => "ipc_from",
            Field::ProcIpcVal => "ipc_val",
            Field::ProcNrPages => "nr_pages",
            Field::ProcOffs => "offs",
            Field::PageType => "type",
            Field::PageOwner => "owner",
            Field::PageRefcnt => "refcnt",
            Field::PageData => "data",
        }
    }

    /// Looks a field up by its surface name, optionally inside a map.
    pub fn lookup(map: Option<MapKind>, name: &str) -> Option<Field> {
        Field::ALL.into_iter().find(|f| f.map() == map && f.name() == name)
    }

    pub fn is_top_level_name(name: &str) -> bool {
        matches!(name, "procs" | "pages") || Field::lookup(None, name).is_some()
    }
}

impl MapKind {
    pub fn name(self) -> &'static str {
        match self {
            MapKind::Procs => "procs",
            MapKind::Pages => "pages",
        }
    }

    pub fn from_name(name: &str) -> Option<MapKind> {
        match name {
            "procs" => Some(MapKind::Procs),
            "pages" => Some(MapKind::Pages),
            _ => None,
        }
    }
}

/// A field together with its index values, e.g. `pages[1].data[3]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldPath<I = u64> {
    pub field: Field,
    pub indices: Vec<I>,
}

impl<I> FieldPath<I> {
    pub fn new(field: Field, indices: Vec<I>) -> Self {
        FieldPath { field, indices }
    }
}

impl<I: fmt::Display> fmt::Display for FieldPath<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = self.field;
        match (field.map(), self.indices.as_slice()) {
            (None, _) => write!(f, "{}", field.name()),
            (Some(m), [i]) => write!(f, "{}[{i}].{}", m.name(), field.name()),
            (Some(m), [i, j]) => write!(f, "{}[{i}].{}[{j}]", m.name(), field.name()),
            (Some(m), _) => write!(f, "{}[?].{}", m.name(), field.name()),
        }
    }
}

/// Map sizes and word width; decides where every cell lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schema {
    pub width: u32,
    pub nproc: u64,
    pub npage: u64,
    pub nofile: u64,
    pub page_words: u64,
}

impl From<&KernelConfig> for Schema {
    fn from(c: &KernelConfig) -> Self {
        Schema { width: c.word_width, nproc: c.nproc, npage: c.npage, nofile: c.nofile, page_words: c.page_words }
    }
}

impl Schema {
    fn proc_stride(&self) -> usize {
        PROC_SCALARS.len() + self.nofile as usize
    }

    fn page_stride(&self) -> usize {
        PAGE_SCALARS.len() + self.page_words as usize
    }

    fn procs_base(&self) -> usize {
        2
    }

    fn pages_base(&self) -> usize {
        self.procs_base() + self.nproc as usize * self.proc_stride()
    }

    pub fn num_cells(&self) -> usize {
        self.pages_base() + self.npage as usize * self.page_stride()
    }

    pub fn mask(&self) -> u64 {
        mask(self.width)
    }

    /// Domain sizes of each index position of `field`.
    pub fn dims(&self, field: Field) -> Vec<u64> {
        match field {
            Field::Current | Field::PagesPtrToInt => vec![],
            Field::ProcOffs => vec![self.nproc, self.nofile],
            Field::PageData => vec![self.npage, self.page_words],
            f if f.map() == Some(MapKind::Procs) => vec![self.nproc],
            _ => vec![self.npage],
        }
    }

    /// Flat cell index of `field[indices]`, or `None` when out of domain.
    pub fn offset(&self, field: Field, indices: &[u64]) -> Option<usize> {
        let dims = self.dims(field);
        if dims.len() != indices.len() || indices.iter().zip(&dims).any(|(i, d)| i >= d) {
            return None;
        }
        let off = match field {
            Field::Current => 0,
            Field::PagesPtrToInt => 1,
            Field::ProcOffs => {
                self.procs_base() + indices[0] as usize * self.proc_stride() + PROC_SCALARS.len() + indices[1] as usize
            }
            Field::PageData => {
                self.pages_base() + indices[0] as usize * self.page_stride() + PAGE_SCALARS.len() + indices[1] as usize
            }
            f if f.map() == Some(MapKind::Procs) => {
                let k = PROC_SCALARS.iter().position(|p| *p == f).unwrap();
                self.procs_base() + indices[0] as usize * self.proc_stride() + k
            }
            f => {
                let k = PAGE_SCALARS.iter().position(|p| *p == f).unwrap();
                self.pages_base() + indices[0] as usize * self.page_stride() + k
            }
        };
        Some(off)
    }

    /// Every in-domain index tuple of `field`, in cell order.
    pub fn index_tuples(&self, field: Field) -> Vec<Vec<u64>> {
        let dims = self.dims(field);
        let mut out = vec![vec![]];
        for d in dims {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..d).map(move |i| {
                        let mut p = prefix.clone();
                        p.push(i);
                        p
                    })
                })
                .collect();
        }
        out
    }

    /// All cells in flat order.
    pub fn cells(&self) -> Vec<FieldPath> {
        let mut cells: Vec<(usize, FieldPath)> = Field::ALL
            .into_iter()
            .flat_map(|f| {
                self.index_tuples(f).into_iter().map(move |idx| (self.offset(f, &idx).unwrap(), FieldPath::new(f, idx)))
            })
            .collect();
        cells.sort_by_key(|(o, _)| *o);
        debug_assert!(cells.iter().enumerate().all(|(i, (o, _))| i == *o));
        cells.into_iter().map(|(_, c)| c).collect()
    }

    /// SMT-friendly symbol for a cell, e.g. `procs_2_state` or `pages_1_data_3`.
    pub fn cell_symbol(path: &FieldPath) -> String {
        let f = path.field;
        match (f.map(), path.indices.as_slice()) {
            (None, _) => f.name().to_string(),
            (Some(m), [i]) => format!("{}_{i}_{}", m.name(), f.name()),
            (Some(m), [i, j]) => format!("{}_{i}_{}_{j}", m.name(), f.name()),
            _ => unreachable!("malformed cell path"),
        }
    }
}

/// The kernel state: every cell of the unrolled maps as a word.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct KernelState {
    schema: Schema,
    cells: Vec<u64>,
}

impl KernelState {
    pub fn zeroed(schema: Schema) -> Self {
        KernelState { schema, cells: vec![0; schema.num_cells()] }
    }

    /// The shipped fixture `S0`.
    pub fn canonical(config: &KernelConfig) -> Self {
        let schema = Schema::from(config);
        let mut s = KernelState::zeroed(schema);
        let embryo = PROC_STATES.iter().find(|(n, _)| *n == "PROC_EMBRYO").unwrap().1;
        debug_assert_eq!(PAGE_TYPES[0], ("PAGE_TYPE_FREE", 0));
        s.set(Field::Current, &[], 1);
        s.set(Field::PagesPtrToInt, &[], 0x1000);
        s.set(Field::ProcState, &[2], embryo);
        s.set(Field::ProcPpid, &[2], 1);
        s
    }

    pub fn from_cells(schema: Schema, cells: Vec<u64>) -> Result<Self, KernelError> {
        if cells.len() != schema.num_cells() {
            return Err(KernelError::Shape(format!("expected {} cells, got {}", schema.num_cells(), cells.len())));
        }
        let m = schema.mask();
        if cells.iter().any(|c| c & !m != 0) {
            return Err(KernelError::Shape(format!("cell value exceeds {} bits", schema.width)));
        }
        Ok(KernelState { schema, cells })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn cells(&self) -> &[u64] {
        &self.cells
    }

    pub fn read(&self, field: Field, indices: &[u64]) -> Result<u64, KernelError> {
        self.schema
            .offset(field, indices)
            .map(|o| self.cells[o])
            .ok_or_else(|| KernelError::Domain(FieldPath::new(field, indices.to_vec()).to_string()))
    }

    /// Out-of-domain reads yield zero.
    pub fn read_or_zero(&self, field: Field, indices: &[u64]) -> u64 {
        self.read(field, indices).unwrap_or(0)
    }

    pub fn write(&self, field: Field, indices: &[u64], value: u64) -> Result<KernelState, KernelError> {
        let mut next = self.clone();
        next.try_set(field, indices, value)?;
        Ok(next)
    }

    pub fn try_set(&mut self, field: Field, indices: &[u64], value: u64) -> Result<(), KernelError> {
        if value & !self.schema.mask() != 0 {
            return Err(KernelError::Width { value, width: self.schema.width });
        }
        let off = self
            .schema
            .offset(field, indices)
            .ok_or_else(|| KernelError::Domain(FieldPath::new(field, indices.to_vec()).to_string()))?;
        self.cells[off] = value;
        Ok(())
    }

    /// In-place write; out-of-domain writes are dropped and reported as `false`.
    pub fn set(&mut self, field: Field, indices: &[u64], value: u64) -> bool {
        match self.schema.offset(field, indices) {
            Some(o) => {
                self.cells[o] = value & self.schema.mask();
                true
            }
            None => false,
        }
    }

    pub fn set_cell(&mut self, cell: usize, value: u64) {
        self.cells[cell] = value & self.schema.mask();
    }

    /// Cells whose values differ, as paths.
    pub fn diff(&self, other: &KernelState) -> Vec<FieldPath> {
        let cells = self.schema.cells();
        self.cells
            .iter()
            .zip(&other.cells)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| cells[i].clone())
            .collect()
    }

    /// Canonical JSON with sorted keys.
    pub fn to_json(&self) -> Value {
        let s = &self.schema;
        let row = |fields: &[Field], sub: Field, i: u64, n: u64| {
            let mut m = Map::new();
            for f in fields {
                m.insert(f.name().into(), json!(self.read_or_zero(*f, &[i])));
            }
            let inner: Vec<u64> = (0..n).map(|j| self.read_or_zero(sub, &[i, j])).collect();
            m.insert(sub.name().into(), json!(inner));
            Value::Object(m)
        };
        let procs: Vec<Value> = (0..s.nproc).map(|i| row(&PROC_SCALARS, Field::ProcOffs, i, s.nofile)).collect();
        let pages: Vec<Value> = (0..s.npage).map(|i| row(&PAGE_SCALARS, Field::PageData, i, s.page_words)).collect();
        let mut top = Map::new();
        top.insert("current".into(), json!(self.read_or_zero(Field::Current, &[])));
        top.insert("pages".into(), Value::Array(pages));
        top.insert("pages_ptr_to_int".into(), json!(self.read_or_zero(Field::PagesPtrToInt, &[])));
        top.insert("procs".into(), Value::Array(procs));
        Value::Object(top)
    }

    pub fn from_json(schema: Schema, v: &Value) -> Result<Self, KernelError> {
        let bad = |m: &str| KernelError::Shape(m.to_string());
        let word = |v: Option<&Value>, what: &str| v.and_then(Value::as_u64).ok_or_else(|| bad(what));
        let mut s = KernelState::zeroed(schema);
        s.try_set(Field::Current, &[], word(v.get("current"), "current")?)?;
        s.try_set(Field::PagesPtrToInt, &[], word(v.get("pages_ptr_to_int"), "pages_ptr_to_int")?)?;
        for (map, scalars, sub) in [
            (MapKind::Procs, &PROC_SCALARS[..], Field::ProcOffs),
            (MapKind::Pages, &PAGE_SCALARS[..], Field::PageData),
        ] {
            let rows = v.get(map.name()).and_then(Value::as_array).ok_or_else(|| bad(map.name()))?;
            let dims = schema.dims(sub);
            if rows.len() as u64 != dims[0] {
                return Err(bad(map.name()));
            }
            for (i, row) in rows.iter().enumerate() {
                for f in scalars {
                    s.try_set(*f, &[i as u64], word(row.get(f.name()), f.name())?)?;
                }
                let inner = row.get(sub.name()).and_then(Value::as_array).ok_or_else(|| bad(sub.name()))?;
                if inner.len() as u64 != dims[1] {
                    return Err(bad(sub.name()));
                }
                for (j, x) in inner.iter().enumerate() {
                    s.try_set(sub, &[i as u64, j as u64], word(Some(x), sub.name())?)?;
                }
            }
        }
        Ok(s)
    }
}

impl fmt::Debug for KernelState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KernelState({})", self.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s0() -> KernelState {
        KernelState::canonical(&KernelConfig::default())
    }

    #[test]
    fn fixture_values() {
        let s = s0();
        assert_eq!(s.read(Field::Current, &[]).unwrap(), 1);
        assert_eq!(s.read(Field::ProcState, &[2]).unwrap(), 1);
        assert_eq!(s.read(Field::ProcPpid, &[2]).unwrap(), 1);
        assert_eq!(s.read(Field::PageType, &[0]).unwrap(), 0);
        assert_eq!(s.read(Field::PagesPtrToInt, &[]).unwrap(), 0x1000);
        assert_eq!(s, s0());
    }

    #[test]
    fn out_of_domain_read() {
        assert!(matches!(s0().read(Field::ProcState, &[7]), Err(KernelError::Domain(_))));
        assert!(matches!(s0().read(Field::PageData, &[0, 4]), Err(KernelError::Domain(_))));
    }

    #[test]
    fn write_touches_one_cell() {
        let s = s0();
        let t = s.write(Field::PageData, &[1, 3], 0xFF).unwrap();
        assert_eq!(t.read(Field::PageData, &[1, 3]).unwrap(), 0xFF);
        assert_eq!(t.read(Field::PageData, &[1, 2]).unwrap(), 0);
        assert_eq!(s.diff(&t), vec![FieldPath::new(Field::PageData, vec![1, 3])]);
        assert_eq!(s.read(Field::PageData, &[1, 3]).unwrap(), 0);
    }

    #[test]
    fn write_rejects_wide_values() {
        let cfg = KernelConfig { word_width: 8, ..Default::default() };
        let s = KernelState::canonical(&cfg);
        assert!(matches!(s.write(Field::Current, &[], 256), Err(KernelError::Width { .. })));
    }

    #[test]
    fn cell_layout_is_dense() {
        let schema = Schema::from(&KernelConfig::default());
        let cells = schema.cells();
        assert_eq!(cells.len(), schema.num_cells());
        // 2 globals + 4 procs * (5 + 4) + 4 pages * (3 + 4)
        assert_eq!(cells.len(), 2 + 36 + 28);
        assert_eq!(Schema::cell_symbol(&cells[0]), "current");
        assert_eq!(Schema::cell_symbol(&FieldPath::new(Field::ProcState, vec![2])), "procs_2_state");
        assert_eq!(Schema::cell_symbol(&FieldPath::new(Field::PageData, vec![1, 3])), "pages_1_data_3");
    }

    #[test]
    fn json_has_sorted_keys_and_round_trips() {
        let s = s0().write(Field::ProcOffs, &[3, 1], 77).unwrap();
        let text = serde_json::to_string(&s.to_json()).unwrap();
        assert!(text.starts_with("{\"current\":1,\"pages\":[{\"data\":[0,0,0,0],\"owner\":0"));
        let back = KernelState::from_json(*s.schema(), &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn field_lookup() {
        assert_eq!(Field::lookup(Some(MapKind::Procs), "ppid"), Some(Field::ProcPpid));
        assert_eq!(Field::lookup(None, "current"), Some(Field::Current));
        assert_eq!(Field::lookup(Some(MapKind::Pages), "ppid"), None);
    }
}
