//! Triangulated meridional sections of the reference configuration.
//!
//! A [`MeridionalMesh`] holds P1 triangles in the `(r, z)` half plane together
//! with every boundary edge, each carrying two independent tags: one for the
//! electromagnetic problem ([`EmTag`]) and one for the thermal problem
//! ([`ThermalTag`]). Boundary edges are stored oriented counter-clockwise
//! around the domain, so the interior always lies to the left of `a -> b`.
//!
//! The plain-text exchange format is
//!
//! ```text
//! axisim-mesh v1
//! <n_nodes>
//! r z              (one line per node)
//! <n_triangles>
//! i j k            (0-based, counter-clockwise)
//! <n_boundary>
//! a b em_tag thermal_tag
//! ```
//!
//! with `em_tag` one of `axis`, `portJ:<k>`, `portE`, `insulated` and
//! `thermal_tag` one of `dirichlet`, `convrad`, `none`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{KinematicsError, MeshError};
use crate::kinematics::DisplacementField;

/// A point of the meridional half plane, `[r, z]` in metres.
pub type Point = [f64; 2];

/// Electromagnetic role of a boundary edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EmTag {
    /// Symmetry axis `r = 0`; the weighted field vanishes there.
    Axis,
    /// Electric port number `k` (1-based) driven by a current or a voltage.
    PortJ(usize),
    /// Ground port.
    PortE,
    /// Insulated boundary, no current crosses it.
    Insulated,
}

/// Thermal role of a boundary edge. Axis edges carry [`ThermalTag::None`]
/// (zero flux by symmetry).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThermalTag {
    Dirichlet,
    ConvRad,
    None,
}

/// Either kind of tag, used to query boundary runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Em(EmTag),
    Thermal(ThermalTag),
}

impl fmt::Display for EmTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmTag::Axis => write!(f, "axis"),
            EmTag::PortJ(k) => write!(f, "portJ:{k}"),
            EmTag::PortE => write!(f, "portE"),
            EmTag::Insulated => write!(f, "insulated"),
        }
    }
}

impl FromStr for EmTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "axis" => Ok(EmTag::Axis),
            "portE" => Ok(EmTag::PortE),
            "insulated" => Ok(EmTag::Insulated),
            _ => {
                let k = s
                    .strip_prefix("portJ:")
                    .ok_or_else(|| format!("unknown EM tag `{s}`"))?;
                let k: usize = k.parse().map_err(|_| format!("bad port index in `{s}`"))?;
                if k == 0 {
                    return Err("port indices start at 1".into());
                }
                Ok(EmTag::PortJ(k))
            }
        }
    }
}

impl fmt::Display for ThermalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ThermalTag::Dirichlet => "dirichlet",
            ThermalTag::ConvRad => "convrad",
            ThermalTag::None => "none",
        };
        f.write_str(s)
    }
}

impl FromStr for ThermalTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dirichlet" => Ok(ThermalTag::Dirichlet),
            "convrad" => Ok(ThermalTag::ConvRad),
            "none" => Ok(ThermalTag::None),
            _ => Err(format!("unknown thermal tag `{s}`")),
        }
    }
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryTag::Em(t) => t.fmt(f),
            BoundaryTag::Thermal(t) => t.fmt(f),
        }
    }
}

/// A boundary edge oriented counter-clockwise around the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub em: EmTag,
    pub thermal: ThermalTag,
}

impl BoundaryEdge {
    pub fn has_tag(&self, tag: BoundaryTag) -> bool {
        match tag {
            BoundaryTag::Em(t) => self.em == t,
            BoundaryTag::Thermal(t) => self.thermal == t,
        }
    }
}

/// Immutable triangulation of the meridional section.
#[derive(Clone, Debug, PartialEq)]
pub struct MeridionalMesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    /// Triangle owning each boundary edge.
    edge_owner: Vec<usize>,
}

/// Signed area of the triangle `p0 p1 p2` (positive when counter-clockwise).
pub fn signed_area(p0: Point, p1: Point, p2: Point) -> f64 {
    0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
}

impl MeridionalMesh {
    /// Validates and builds a mesh.
    ///
    /// Checks radii, triangle orientation, that the boundary edges are exactly
    /// the edges owned by a single triangle (each once, oriented like their
    /// triangle), and the axis rules: an axis edge has both ends on `r = 0`,
    /// an edge with both ends on `r = 0` is an axis edge, and every node on
    /// `r = 0` touches an axis edge.
    pub fn new(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<BoundaryEdge>,
    ) -> Result<Self, MeshError> {
        for (i, p) in nodes.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(MeshError::InvalidArgument(format!("node {i} is not finite")));
            }
            if p[0] < 0.0 {
                return Err(MeshError::NegativeRadius { node: i, r: p[0] });
            }
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nodes.len() {
                    return Err(MeshError::BadConnectivity {
                        triangle: t,
                        node: v,
                        n_nodes: nodes.len(),
                    });
                }
            }
            let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if area <= 0.0 {
                return Err(MeshError::InvertedTriangle { triangle: t, area });
            }
            for e in 0..3 {
                let key = (tri[e], tri[(e + 1) % 3]);
                if directed.insert(key, t).is_some() {
                    return Err(MeshError::Tagging(format!(
                        "directed edge {:?} appears in two triangles",
                        key
                    )));
                }
            }
        }
        // Boundary of the triangulation: directed edges without a twin.
        let mut free: HashMap<(usize, usize), usize> = directed
            .iter()
            .filter(|(&(a, b), _)| !directed.contains_key(&(b, a)))
            .map(|(&k, &t)| (k, t))
            .collect();
        let mut edge_owner = Vec::with_capacity(boundary.len());
        for e in &boundary {
            match free.remove(&(e.a, e.b)) {
                Some(t) => edge_owner.push(t),
                None => {
                    let reason = if free.contains_key(&(e.b, e.a)) || directed.contains_key(&(e.b, e.a)) {
                        "is oriented clockwise"
                    } else {
                        "is not a free triangle edge (or is listed twice)"
                    };
                    return Err(MeshError::Tagging(format!(
                        "boundary edge {} -> {} {reason}",
                        e.a, e.b
                    )));
                }
            }
        }
        if let Some((&(a, b), _)) = free.iter().next() {
            return Err(MeshError::Tagging(format!(
                "{} boundary edges are untagged (e.g. {a} -> {b})",
                free.len()
            )));
        }
        let mut on_axis_edge = vec![false; nodes.len()];
        for e in &boundary {
            let both_on_axis = nodes[e.a][0] == 0.0 && nodes[e.b][0] == 0.0;
            match (e.em == EmTag::Axis, both_on_axis) {
                (true, false) => {
                    return Err(MeshError::Tagging(format!(
                        "axis edge {} -> {} leaves r = 0",
                        e.a, e.b
                    )))
                }
                (false, true) => {
                    return Err(MeshError::Tagging(format!(
                        "edge {} -> {} lies on r = 0 but is tagged {}",
                        e.a, e.b, e.em
                    )))
                }
                _ => {}
            }
            if e.em == EmTag::Axis {
                on_axis_edge[e.a] = true;
                on_axis_edge[e.b] = true;
            }
        }
        for (i, p) in nodes.iter().enumerate() {
            if p[0] == 0.0 && !on_axis_edge[i] {
                return Err(MeshError::Tagging(format!(
                    "node {i} sits on r = 0 but not on an axis edge"
                )));
            }
        }
        Ok(Self {
            nodes,
            triangles,
            boundary,
            edge_owner,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// Index of the triangle that owns boundary edge `edge`.
    pub fn edge_owner(&self, edge: usize) -> usize {
        self.edge_owner[edge]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [i, j, k] = self.triangles[t];
        [self.nodes[i], self.nodes[j], self.nodes[k]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.triangle_points(t);
        signed_area(p0, p1, p2)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// Nodes lying on an axis edge.
    pub fn axis_nodes(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_nodes()];
        for e in self.boundary.iter().filter(|e| e.em == EmTag::Axis) {
            mask[e.a] = true;
            mask[e.b] = true;
        }
        mask
    }

    /// Port indices `k` of every `PortJ(k)` tag present, sorted.
    pub fn port_indices(&self) -> Vec<usize> {
        let mut ks: Vec<usize> = self
            .boundary
            .iter()
            .filter_map(|e| match e.em {
                EmTag::PortJ(k) => Some(k),
                _ => None,
            })
            .collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// Connected runs of the edges carrying `tag`, each listed head to tail
    /// in counter-clockwise order.
    ///
    /// A missing tag yields no runs. Port tags must form a single run.
    pub fn boundary_runs(&self, tag: BoundaryTag) -> Result<Vec<Vec<usize>>, MeshError> {
        let selected: Vec<usize> = (0..self.boundary.len())
            .filter(|&i| self.boundary[i].has_tag(tag))
            .collect();
        let mut by_start: HashMap<usize, usize> = HashMap::new();
        let mut ends: HashMap<usize, usize> = HashMap::new();
        for &i in &selected {
            let e = &self.boundary[i];
            by_start.insert(e.a, i);
            ends.insert(e.b, i);
        }
        let mut used = vec![false; self.boundary.len()];
        let mut runs = Vec::new();
        // Open runs start at a node that no selected edge ends at.
        let mut heads: Vec<usize> = selected
            .iter()
            .copied()
            .filter(|&i| !ends.contains_key(&self.boundary[i].a))
            .collect();
        // Whatever is left over belongs to closed loops.
        heads.extend(selected.iter().copied());
        for head in heads {
            if used[head] {
                continue;
            }
            let mut run = Vec::new();
            let mut cur = head;
            loop {
                used[cur] = true;
                run.push(cur);
                match by_start.get(&self.boundary[cur].b) {
                    Some(&next) if !used[next] => cur = next,
                    _ => break,
                }
            }
            runs.push(run);
        }
        let is_port = matches!(tag, BoundaryTag::Em(EmTag::PortJ(_)) | BoundaryTag::Em(EmTag::PortE));
        if is_port && runs.len() > 1 {
            return Err(MeshError::DisconnectedPort {
                tag: tag.to_string(),
                components: runs.len(),
            });
        }
        Ok(runs)
    }

    /// Copy of the mesh with every node moved to its current position
    /// `p + u(p, t)`. Fails if a triangle inverts.
    pub fn push_forward(
        &self,
        field: &DisplacementField,
        t: f64,
    ) -> Result<MeridionalMesh, crate::error::Error> {
        let nodes: Vec<Point> = self
            .nodes
            .iter()
            .map(|&p| {
                let d = field.sample(p, t);
                [p[0] + d.ur, p[1] + d.uz]
            })
            .collect();
        for (ti, tri) in self.triangles.iter().enumerate() {
            let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if area <= 0.0 {
                let [p0, p1, p2] = self.triangle_points(ti);
                let c = [(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0];
                return Err(KinematicsError::DegenerateMotion {
                    r: c[0],
                    z: c[1],
                    t,
                    det_f: area / self.triangle_area(ti),
                    radial_factor: f64::NAN,
                }
                .into());
            }
        }
        Ok(MeridionalMesh {
            nodes,
            triangles: self.triangles.clone(),
            boundary: self.boundary.clone(),
            edge_owner: self.edge_owner.clone(),
        })
    }

    /// Count of boundary edges per EM tag, for reporting.
    pub fn em_tag_counts(&self) -> BTreeMap<EmTag, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.boundary {
            *counts.entry(e.em).or_insert(0) += 1;
        }
        counts
    }

    pub fn thermal_tag_counts(&self) -> BTreeMap<ThermalTag, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.boundary {
            *counts.entry(e.thermal).or_insert(0) += 1;
        }
        counts
    }

    /// Serializes to the `axisim-mesh v1` text format.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "axisim-mesh v1");
        let _ = writeln!(s, "{}", self.nodes.len());
        for p in &self.nodes {
            let _ = writeln!(s, "{:.17e} {:.17e}", p[0], p[1]);
        }
        let _ = writeln!(s, "{}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "{}", self.boundary.len());
        for e in &self.boundary {
            let _ = writeln!(s, "{} {} {} {}", e.a, e.b, e.em, e.thermal);
        }
        s
    }

    /// Parses the `axisim-mesh v1` text format and validates the result.
    pub fn from_text(text: &str) -> Result<Self, MeshError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| MeshError::Parse {
                line: 0,
                message: format!("unexpected end of file, expected {what}"),
            })
        };
        let (ln, header) = next("header")?;
        if header != "axisim-mesh v1" {
            return Err(MeshError::Parse {
                line: ln,
                message: format!("expected header `axisim-mesh v1`, found `{header}`"),
            });
        }
        fn count(ln: usize, s: &str) -> Result<usize, MeshError> {
            s.parse().map_err(|_| MeshError::Parse {
                line: ln,
                message: format!("expected a count, found `{s}`"),
            })
        }
        fn fields(ln: usize, s: &str, n: usize) -> Result<Vec<&str>, MeshError> {
            let f: Vec<&str> = s.split_whitespace().collect();
            if f.len() != n {
                return Err(MeshError::Parse {
                    line: ln,
                    message: format!("expected {n} fields, found {}", f.len()),
                });
            }
            Ok(f)
        }
        fn num<T: FromStr>(ln: usize, s: &str) -> Result<T, MeshError> {
            s.parse().map_err(|_| MeshError::Parse {
                line: ln,
                message: format!("cannot parse `{s}`"),
            })
        }

        let (ln, s) = next("node count")?;
        let n_nodes = count(ln, s)?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let (ln, s) = next("node")?;
            let f = fields(ln, s, 2)?;
            nodes.push([num(ln, f[0])?, num(ln, f[1])?]);
        }
        let (ln, s) = next("triangle count")?;
        let n_tri = count(ln, s)?;
        let mut triangles = Vec::with_capacity(n_tri);
        for _ in 0..n_tri {
            let (ln, s) = next("triangle")?;
            let f = fields(ln, s, 3)?;
            triangles.push([num(ln, f[0])?, num(ln, f[1])?, num(ln, f[2])?]);
        }
        let (ln, s) = next("boundary count")?;
        let n_b = count(ln, s)?;
        let mut boundary = Vec::with_capacity(n_b);
        for _ in 0..n_b {
            let (ln, s) = next("boundary edge")?;
            let f = fields(ln, s, 4)?;
            let em = f[2]
                .parse()
                .map_err(|message| MeshError::Parse { line: ln, message })?;
            let thermal = f[3]
                .parse()
                .map_err(|message| MeshError::Parse { line: ln, message })?;
            boundary.push(BoundaryEdge {
                a: num(ln, f[0])?,
                b: num(ln, f[1])?,
                em,
                thermal,
            });
        }
        if let Some((ln, s)) = lines.next() {
            return Err(MeshError::Parse {
                line: ln,
                message: format!("trailing content `{s}`"),
            });
        }
        MeridionalMesh::new(nodes, triangles, boundary)
    }
}

/// Structured triangulation of the rectangle `[0, R] x [0, L]`.
///
/// Nodes are numbered row by row (`j * (nr + 1) + i`), each cell is split
/// along its lower-left to upper-right diagonal. The left side is the axis,
/// the top is port 1, the bottom is the ground port and the right side is
/// insulated. All non-axis edges are convection-radiation edges thermally.
pub fn generate_rectangle_mesh(
    radius: f64,
    length: f64,
    nr: usize,
    nz: usize,
) -> Result<MeridionalMesh, MeshError> {
    if !(radius > 0.0 && radius.is_finite()) || !(length > 0.0 && length.is_finite()) {
        return Err(MeshError::InvalidArgument(format!(
            "rectangle needs positive dimensions, got R = {radius}, L = {length}"
        )));
    }
    if nr == 0 || nz == 0 {
        return Err(MeshError::InvalidArgument(format!(
            "rectangle needs positive cell counts, got nr = {nr}, nz = {nz}"
        )));
    }
    let id = |i: usize, j: usize| j * (nr + 1) + i;
    let mut nodes = Vec::with_capacity((nr + 1) * (nz + 1));
    for j in 0..=nz {
        for i in 0..=nr {
            // Exact end values, no accumulated rounding on the outer edges.
            let r = if i == nr { radius } else { radius * i as f64 / nr as f64 };
            let z = if j == nz { length } else { length * j as f64 / nz as f64 };
            nodes.push([r, z]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nr * nz);
    for j in 0..nz {
        for i in 0..nr {
            let (n00, n10, n11, n01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([n00, n10, n11]);
            triangles.push([n00, n11, n01]);
        }
    }
    let mut boundary = Vec::with_capacity(2 * (nr + nz));
    let edge = |a, b, em| BoundaryEdge {
        a,
        b,
        em,
        thermal: if em == EmTag::Axis {
            ThermalTag::None
        } else {
            ThermalTag::ConvRad
        },
    };
    for i in 0..nr {
        boundary.push(edge(id(i, 0), id(i + 1, 0), EmTag::PortE));
    }
    for j in 0..nz {
        boundary.push(edge(id(nr, j), id(nr, j + 1), EmTag::Insulated));
    }
    for i in (0..nr).rev() {
        boundary.push(edge(id(i + 1, nz), id(i, nz), EmTag::PortJ(1)));
    }
    for j in (0..nz).rev() {
        boundary.push(edge(id(0, j + 1), id(0, j), EmTag::Axis));
    }
    MeridionalMesh::new(nodes, triangles, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn em(t: EmTag) -> BoundaryTag {
        BoundaryTag::Em(t)
    }

    #[test]
    fn bar_coarse_counts() {
        let m = generate_rectangle_mesh(0.02875, 0.165, 2, 2).unwrap();
        assert_eq!(m.n_nodes(), 9);
        assert_eq!(m.n_triangles(), 8);
        let mut runs = 0;
        for tag in [EmTag::Axis, EmTag::PortJ(1), EmTag::PortE, EmTag::Insulated] {
            runs += m.boundary_runs(em(tag)).unwrap().len();
        }
        assert_eq!(runs, 4);
    }

    #[test]
    fn smallest_grid() {
        let m = generate_rectangle_mesh(1.0, 1.0, 1, 1).unwrap();
        assert_eq!(m.n_nodes(), 4);
        assert_eq!(m.n_triangles(), 2);
        for tag in [EmTag::Axis, EmTag::PortJ(1), EmTag::PortE, EmTag::Insulated] {
            let runs = m.boundary_runs(em(tag)).unwrap();
            assert_eq!(runs.len(), 1);
            assert_eq!(runs[0].len(), 1);
        }
    }

    #[test]
    fn perimeter_edge_count() {
        let m = generate_rectangle_mesh(1.0, 2.0, 3, 5).unwrap();
        assert_eq!(m.boundary_edges().len(), 16);
    }

    #[test]
    fn bad_arguments() {
        assert!(matches!(
            generate_rectangle_mesh(0.0, 1.0, 2, 2),
            Err(MeshError::InvalidArgument(_))
        ));
        assert!(matches!(
            generate_rectangle_mesh(1.0, -1.0, 2, 2),
            Err(MeshError::InvalidArgument(_))
        ));
        assert!(matches!(
            generate_rectangle_mesh(1.0, 1.0, 0, 2),
            Err(MeshError::InvalidArgument(_))
        ));
    }

    #[test]
    fn insulated_run_goes_up_the_outer_radius() {
        let (r, l) = (0.5, 2.0);
        let m = generate_rectangle_mesh(r, l, 3, 4).unwrap();
        let runs = m.boundary_runs(em(EmTag::Insulated)).unwrap();
        assert_eq!(runs.len(), 1);
        let run = &runs[0];
        let first = m.boundary_edges()[run[0]];
        let last = m.boundary_edges()[*run.last().unwrap()];
        assert_eq!(m.nodes()[first.a], [r, 0.0]);
        assert_eq!(m.nodes()[last.b], [r, l]);
        for w in run.windows(2) {
            assert_eq!(m.boundary_edges()[w[0]].b, m.boundary_edges()[w[1]].a);
        }
        for &e in run {
            let e = m.boundary_edges()[e];
            assert_eq!(m.nodes()[e.a][0], r);
            assert_eq!(m.nodes()[e.b][0], r);
        }
    }

    #[test]
    fn port_run_lies_on_top() {
        let m = generate_rectangle_mesh(1.0, 3.0, 4, 2).unwrap();
        let runs = m.boundary_runs(em(EmTag::PortJ(1))).unwrap();
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[0].len(), 4);
        for &e in &runs[0] {
            let e = m.boundary_edges()[e];
            assert_eq!(m.nodes()[e.a][1], 3.0);
            assert_eq!(m.nodes()[e.b][1], 3.0);
        }
        assert!(m.boundary_runs(em(EmTag::PortJ(7))).unwrap().is_empty());
    }

    #[test]
    fn disconnected_port_is_rejected() {
        let m = generate_rectangle_mesh(1.0, 1.0, 3, 1).unwrap();
        // Retag the middle top edge so port 1 splits in two pieces.
        let mut boundary = m.boundary_edges().to_vec();
        let top: Vec<usize> = (0..boundary.len())
            .filter(|&i| boundary[i].em == EmTag::PortJ(1))
            .collect();
        boundary[top[1]].em = EmTag::Insulated;
        let split = MeridionalMesh::new(m.nodes().to_vec(), m.triangles().to_vec(), boundary).unwrap();
        let err = split.boundary_runs(em(EmTag::PortJ(1))).unwrap_err();
        assert!(matches!(err, MeshError::DisconnectedPort { components: 2, .. }));
        // Insulated pieces may be disconnected.
        assert_eq!(split.boundary_runs(em(EmTag::Insulated)).unwrap().len(), 2);
    }

    #[test]
    fn area_sums_to_rectangle() {
        let m = generate_rectangle_mesh(0.02875, 0.165, 7, 13).unwrap();
        let a = m.total_area();
        assert!((a - 0.02875 * 0.165).abs() <= 1e-15 * a.max(1.0));
    }

    #[test]
    fn boundary_nodes_have_two_edges_and_normals_point_out() {
        let m = generate_rectangle_mesh(1.0, 2.0, 4, 6).unwrap();
        let mut degree = vec![0; m.n_nodes()];
        for (i, e) in m.boundary_edges().iter().enumerate() {
            degree[e.a] += 1;
            degree[e.b] += 1;
            let (pa, pb) = (m.nodes()[e.a], m.nodes()[e.b]);
            let t = [pb[0] - pa[0], pb[1] - pa[1]];
            let normal = [t[1], -t[0]];
            let [p0, p1, p2] = m.triangle_points(m.edge_owner(i));
            let c = [(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0];
            let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
            let away = [mid[0] - c[0], mid[1] - c[1]];
            assert!(normal[0] * away[0] + normal[1] * away[1] > 0.0);
        }
        for (n, d) in degree.iter().enumerate() {
            assert!(*d == 0 || *d == 2, "node {n} has {d} boundary edges");
        }
    }

    #[test]
    fn clockwise_boundary_edge_is_rejected() {
        let m = generate_rectangle_mesh(1.0, 1.0, 2, 2).unwrap();
        let mut boundary = m.boundary_edges().to_vec();
        let e = &mut boundary[0];
        std::mem::swap(&mut e.a, &mut e.b);
        assert!(matches!(
            MeridionalMesh::new(m.nodes().to_vec(), m.triangles().to_vec(), boundary),
            Err(MeshError::Tagging(_))
        ));
    }

    #[test]
    fn axis_nodes_need_axis_edges() {
        let m = generate_rectangle_mesh(1.0, 1.0, 2, 2).unwrap();
        let mut boundary = m.boundary_edges().to_vec();
        for e in boundary.iter_mut().filter(|e| e.em == EmTag::Axis) {
            e.em = EmTag::Insulated;
        }
        assert!(MeridionalMesh::new(m.nodes().to_vec(), m.triangles().to_vec(), boundary).is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = generate_rectangle_mesh(0.3, 0.7, 3, 2).unwrap();
        let back = MeridionalMesh::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn text_errors_carry_line_numbers() {
        let bad = "axisim-mesh v1\n2\n0 0\nx 1\n";
        match MeridionalMesh::from_text(bad) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(MeridionalMesh::from_text("axisim-mesh v2\n").is_err());
    }

    #[test]
    fn tag_parsing() {
        assert_eq!("portJ:3".parse::<EmTag>().unwrap(), EmTag::PortJ(3));
        assert!("portJ:0".parse::<EmTag>().is_err());
        assert!("port".parse::<EmTag>().is_err());
        assert_eq!("none".parse::<ThermalTag>().unwrap(), ThermalTag::None);
    }
}
