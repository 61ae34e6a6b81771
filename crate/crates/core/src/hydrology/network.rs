use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AccumGrid, Direction, FlowDirGrid};
use crate::error::{Error, Result};
use crate::raster::{CellIndex, GridFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Source,
    Junction,
    Outlet,
}

/// A run of channel cells between two nodes, listed downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamLink {
    pub id: usize,
    pub cells: Vec<CellIndex>,
    pub head_accumulation: f64,
    pub tail_accumulation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamNode {
    pub cell: CellIndex,
    pub kind: NodeKind,
    pub incoming: Vec<usize>,
    pub outgoing: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamNetwork {
    pub frame: GridFrame,
    pub links: Vec<StreamLink>,
    pub nodes: Vec<StreamNode>,
}

impl StreamNetwork {
    pub fn junctions(&self) -> impl Iterator<Item = &StreamNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Junction)
    }

    /// Cell-centre polyline of a link in world coordinates.
    pub fn link_coords(&self, link: &StreamLink) -> Vec<(f64, f64)> {
        link.cells
            .iter()
            .map(|c| self.frame.cell_center(c.row, c.col))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = NetworkDoc {
            width: self.frame.width,
            height: self.frame.height,
            transform: self.frame.transform,
            links: self
                .links
                .iter()
                .map(|l| LinkDoc {
                    id: l.id,
                    cells: l.cells.iter().map(|c| [c.row, c.col]).collect(),
                    coords: self.link_coords(l).into_iter().map(|(x, y)| [x, y]).collect(),
                    head_accumulation: l.head_accumulation,
                    tail_accumulation: l.tail_accumulation,
                })
                .collect(),
            nodes: self
                .nodes
                .iter()
                .map(|n| {
                    let (x, y) = self.frame.cell_center(n.cell.row, n.cell.col);
                    NodeDoc {
                        row: n.cell.row,
                        col: n.cell.col,
                        x,
                        y,
                        kind: n.kind,
                        incoming: n.incoming.clone(),
                        outgoing: n.outgoing,
                    }
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses a document written by [`StreamNetwork::to_json`]; world
    /// coordinates in the document are ignored in favour of the cells.
    pub fn from_json(text: &str) -> Result<StreamNetwork> {
        let doc: NetworkDoc = serde_json::from_str(text)?;
        doc.transform.validate()?;
        let frame = GridFrame {
            width: doc.width,
            height: doc.height,
            transform: doc.transform,
        };
        let in_frame = |[r, c]: [usize; 2]| -> Result<CellIndex> {
            if r < frame.height && c < frame.width {
                Ok(CellIndex::new(r, c))
            } else {
                Err(Error::Config(format!("cell ({r}, {c}) outside the network grid")))
            }
        };
        let links = doc
            .links
            .into_iter()
            .map(|l| {
                Ok(StreamLink {
                    id: l.id,
                    cells: l.cells.into_iter().map(in_frame).collect::<Result<_>>()?,
                    head_accumulation: l.head_accumulation,
                    tail_accumulation: l.tail_accumulation,
                })
            })
            .collect::<Result<_>>()?;
        let nodes = doc
            .nodes
            .into_iter()
            .map(|n| {
                Ok(StreamNode {
                    cell: in_frame([n.row, n.col])?,
                    kind: n.kind,
                    incoming: n.incoming,
                    outgoing: n.outgoing,
                })
            })
            .collect::<Result<_>>()?;
        Ok(StreamNetwork { frame, links, nodes })
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<StreamNetwork> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    width: usize,
    height: usize,
    transform: crate::raster::GeoTransform,
    links: Vec<LinkDoc>,
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
struct LinkDoc {
    id: usize,
    cells: Vec<[usize; 2]>,
    #[serde(default)]
    coords: Vec<[f64; 2]>,
    head_accumulation: f64,
    tail_accumulation: f64,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    row: usize,
    col: usize,
    #[serde(default)]
    x: f64,
    #[serde(default)]
    y: f64,
    kind: NodeKind,
    incoming: Vec<usize>,
    outgoing: Option<usize>,
}

/// Traces channel cells (accumulation ≥ `channel_threshold`) into links.
///
/// Links start at sources (channel cells with no channel inflow) and below
/// junctions (channel cells fed by two or more channel cells). A link ends
/// at the next junction or where the channel leaves the grid. Junction cells
/// are shared by the links meeting there and the link leaving.
pub fn vectorize_network(
    accum: &AccumGrid,
    flowdir: &FlowDirGrid,
    channel_threshold: f64,
) -> Result<StreamNetwork> {
    if !(channel_threshold >= 1.0) {
        return Err(Error::Config(format!(
            "channel threshold must be ≥ 1, got {channel_threshold}"
        )));
    }
    if accum.frame() != flowdir.frame {
        return Err(Error::DimensionMismatch("accumulation vs flow direction".into()));
    }
    let w = accum.width;
    let n = accum.len();
    let channel: Vec<bool> = (0..n)
        .map(|i| {
            flowdir.directions[i] != Direction::Nodata
                && accum.is_valid_at(i)
                && accum.values[i] >= channel_threshold
        })
        .collect();
    let channel_down = |i: usize| flowdir.downstream(i).filter(|&j| channel[j]);

    let mut inflow = vec![0u8; n];
    for i in (0..n).filter(|&i| channel[i]) {
        if let Some(j) = channel_down(i) {
            inflow[j] += 1;
        }
    }
    let cell = |i: usize| CellIndex::new(i / w, i % w);

    let mut links = Vec::new();
    let mut nodes: BTreeMap<CellIndex, StreamNode> = BTreeMap::new();
    for start in 0..n {
        if !channel[start] {
            continue;
        }
        let is_source = inflow[start] == 0;
        let is_junction = inflow[start] >= 2;
        if !is_source && !(is_junction && channel_down(start).is_some()) {
            continue;
        }
        let id = links.len();
        let mut path = vec![start];
        let mut cur = start;
        while let Some(next) = channel_down(cur) {
            path.push(next);
            if inflow[next] >= 2 {
                break;
            }
            cur = next;
        }
        let end = *path.last().unwrap();

        if path.len() == 1 {
            // A lone channel cell that is both source and terminus.
            nodes.insert(
                cell(start),
                StreamNode {
                    cell: cell(start),
                    kind: NodeKind::Outlet,
                    incoming: vec![id],
                    outgoing: None,
                },
            );
        } else {
            let kind = if is_source { NodeKind::Source } else { NodeKind::Junction };
            nodes
                .entry(cell(start))
                .or_insert_with(|| StreamNode {
                    cell: cell(start),
                    kind,
                    incoming: Vec::new(),
                    outgoing: None,
                })
                .outgoing = Some(id);
            let end_kind = if inflow[end] >= 2 {
                NodeKind::Junction
            } else {
                NodeKind::Outlet
            };
            nodes
                .entry(cell(end))
                .or_insert_with(|| StreamNode {
                    cell: cell(end),
                    kind: end_kind,
                    incoming: Vec::new(),
                    outgoing: None,
                })
                .incoming
                .push(id);
        }
        links.push(StreamLink {
            id,
            head_accumulation: accum.values[start],
            tail_accumulation: accum.values[end],
            cells: path.into_iter().map(cell).collect(),
        });
    }
    // Junction cells that are also grid outlets only collect incoming links.
    for i in 0..n {
        if channel[i] && inflow[i] >= 2 {
            nodes.entry(cell(i)).or_insert_with(|| StreamNode {
                cell: cell(i),
                kind: NodeKind::Junction,
                incoming: Vec::new(),
                outgoing: None,
            });
        }
    }
    Ok(StreamNetwork {
        frame: accum.frame(),
        links,
        nodes: nodes.into_values().collect(),
    })
}
