use std::collections::HashSet;

use crate::roadgraph::DirectedRoadGraph;

use super::DataError;

/// A road between two junctions, as found in a road table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Road {
    pub id: String,
    pub from_junction: String,
    pub to_junction: String,
    pub two_way: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `from_junction` to `to_junction`.
    Forward,
    Backward,
}

/// One unidirectional segment and the road it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentInfo {
    pub segment_id: String,
    pub road_id: String,
    pub direction: Direction,
    pub from_junction: String,
    pub to_junction: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadSplit {
    pub graph: DirectedRoadGraph,
    /// Indexed by graph node.
    pub segments: Vec<SegmentInfo>,
}

impl RoadSplit {
    pub fn segment_ids(&self) -> Vec<String> {
        self.segments.iter().map(|s| s.segment_id.clone()).collect()
    }

    /// `node,segment_id,road_id,direction` table.
    pub fn mapping_csv(&self) -> String {
        let mut out = String::from("node,segment_id,road_id,direction\n");
        for (i, s) in self.segments.iter().enumerate() {
            let dir = match s.direction {
                Direction::Forward => "forward",
                Direction::Backward => "backward",
            };
            out.push_str(&format!("{i},{},{},{dir}\n", s.segment_id, s.road_id));
        }
        out
    }
}

fn parse_direction(flag: &str) -> Option<bool> {
    match flag.to_ascii_lowercase().as_str() {
        "oneway" | "one_way" | "1" => Some(false),
        "twoway" | "two_way" | "2" => Some(true),
        _ => None,
    }
}

/// Parses `road_id,from_junction,to_junction,direction` rows, where the
/// direction flag is `oneway` or `twoway` (`1` and `2` are accepted too).
/// A header row starting with `road_id` is skipped.
pub fn parse_roads(text: &str) -> Result<Vec<Road>, DataError> {
    let mut roads = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() || (roads.is_empty() && content.starts_with("road_id")) {
            continue;
        }
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        let err = |message: String| DataError::Parse { line, message };
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        if fields[..3].iter().any(|f| f.is_empty()) {
            return Err(err("empty road or junction id".into()));
        }
        if fields[1] == fields[2] {
            return Err(err(format!("road {} starts and ends at junction {}", fields[0], fields[1])));
        }
        let two_way = parse_direction(fields[3]).ok_or_else(|| err(format!("bad direction flag {:?}", fields[3])))?;
        roads.push(Road {
            id: fields[0].to_string(),
            from_junction: fields[1].to_string(),
            to_junction: fields[2].to_string(),
            two_way,
        });
    }
    Ok(roads)
}

/// Turns roads into unidirectional segments. One-way roads keep their id;
/// a two-way road `r` becomes `r+` (forward) and `r-` (backward). Segment `a`
/// feeds segment `b` when `a` ends at the junction where `b` starts, except
/// for U-turns onto the reverse of `a`.
pub fn split_bidirectional(roads: &[Road]) -> Result<RoadSplit, DataError> {
    let mut seen = HashSet::new();
    let mut segments = Vec::new();
    for road in roads {
        if !seen.insert(road.id.as_str()) {
            return Err(DataError::Shape(format!("duplicate road id {}", road.id)));
        }
        let info = |suffix: &str, direction, from: &String, to: &String| SegmentInfo {
            segment_id: format!("{}{suffix}", road.id),
            road_id: road.id.clone(),
            direction,
            from_junction: from.clone(),
            to_junction: to.clone(),
        };
        if road.two_way {
            segments.push(info("+", Direction::Forward, &road.from_junction, &road.to_junction));
            segments.push(info("-", Direction::Backward, &road.to_junction, &road.from_junction));
        } else {
            segments.push(info("", Direction::Forward, &road.from_junction, &road.to_junction));
        }
    }
    let mut graph = DirectedRoadGraph::new(segments.len());
    for (a, sa) in segments.iter().enumerate() {
        for (b, sb) in segments.iter().enumerate() {
            let u_turn = sb.to_junction == sa.from_junction;
            if a != b && sa.to_junction == sb.from_junction && !u_turn {
                graph
                    .add_edge(a, b)
                    .expect("indices are in range and distinct");
            }
        }
    }
    Ok(RoadSplit { graph, segments })
}
