//! Multi-index squares, their isometry frames, and the materialized tree.

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::address::Address;
use super::template::{alpha, Frame, Rect, Template};
use crate::error::{Error, Result};
use crate::exact::{int, Point, PointRepr, Rational};

/// Which part of a square's boundary the approximating curve follows when
/// the square is not refined any further.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathKind {
    /// Only the side `[A_w, B_w]`.
    Short,
    /// The other three sides, from `A_w` around to `B_w`.
    Long,
}

impl PathKind {
    pub fn of_frame(f: &Frame) -> PathKind {
        if f.det() > 0 {
            PathKind::Short
        } else {
            PathKind::Long
        }
    }

    /// Vertices of the path in template coordinates.
    pub fn template_path(self) -> Vec<Point> {
        match self {
            PathKind::Short => vec![Point::from_ints(0, 0), Point::from_ints(1, 0)],
            PathKind::Long => vec![
                Point::from_ints(0, 0),
                Point::from_ints(0, 1),
                Point::from_ints(1, 1),
                Point::from_ints(1, 0),
            ],
        }
    }
}

/// Exact placement of one square `Q_w`.
///
/// The square is the image of the unit template square under
/// `P -> corner + side * frame * P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareNode {
    pub address: Address,
    /// Image of the template origin. Equal to `entry`.
    pub corner: Point,
    pub side: Rational,
    pub frame: Frame,
    pub entry: Point,
    pub exit: Point,
}

impl SquareNode {
    pub fn root() -> Self {
        Self {
            address: Address::root(),
            corner: Point::origin(),
            side: int(1),
            frame: Frame::IDENTITY,
            entry: Point::origin(),
            exit: Point::from_ints(1, 0),
        }
    }

    pub fn depth(&self) -> usize {
        self.address.depth()
    }

    pub fn kind(&self) -> PathKind {
        PathKind::of_frame(&self.frame)
    }

    /// Maps template coordinates into the plane.
    pub fn map(&self, p: &Point) -> Point {
        let f = self.frame.apply(p);
        Point::new(
            &self.corner.x + &self.side * &f.x,
            &self.corner.y + &self.side * &f.y,
        )
    }

    /// Inverse of [`SquareNode::map`].
    pub fn unmap(&self, p: &Point) -> Point {
        let d = p.sub(&self.corner);
        let d = Point::new(&d.x / &self.side, &d.y / &self.side);
        self.frame.transpose().apply(&d)
    }

    pub fn bounds(&self) -> Rect {
        Rect::from_corners(
            &self.map(&Point::from_ints(0, 0)),
            &self.map(&Point::from_ints(1, 1)),
        )
    }

    /// Child `j`, refining with the template of the next gap parameter.
    pub fn child(&self, template: &Template, j: u8) -> SquareNode {
        let corner = self.map(&template.entries[j as usize]);
        let exit = self.map(&template.exits[j as usize]);
        SquareNode {
            address: self.address.child(j),
            entry: corner.clone(),
            corner,
            side: &self.side * &template.side,
            frame: self.frame.compose(&Frame::for_digit(j)),
            exit,
        }
    }

    /// Connector `[B_{wj}, A_{w(j+1)}]` in plane coordinates.
    pub fn connector(&self, template: &Template, j: usize) -> (Point, Point) {
        let (a, b) = &template.connectors[j];
        (self.map(a), self.map(b))
    }

    /// The curve's path through this square when it is a leaf.
    pub fn leaf_path(&self) -> Vec<Point> {
        self.kind()
            .template_path()
            .iter()
            .map(|p| self.map(p))
            .collect()
    }
}

/// Templates for refinement steps `1..=n`, cached.
#[derive(Clone, Debug)]
pub struct Templates(Vec<Template>);

impl Templates {
    pub fn new(n: usize) -> Self {
        Self(
            (1..=n.max(1))
                .map(|k| Template::new(alpha(k)).expect("alpha_k in (0,1)"))
                .collect(),
        )
    }

    /// Template used to refine a square of depth `d` into depth `d + 1`.
    pub fn for_depth(&self, d: usize) -> std::borrow::Cow<'_, Template> {
        match self.0.get(d) {
            Some(t) => std::borrow::Cow::Borrowed(t),
            None => std::borrow::Cow::Owned(Template::new(alpha(d + 1)).expect("alpha_k in (0,1)")),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Replays the isometry chain of `address` from the unit square.
pub fn locate(templates: &Templates, address: &Address) -> SquareNode {
    let mut node = SquareNode::root();
    for &j in address.digits() {
        let t = templates.for_depth(node.depth());
        node = node.child(&t, j);
    }
    node
}

pub const DEFAULT_MAX_TREE_DEPTH: usize = 10;

/// Fully materialized square tree, one vector per depth in arc order.
#[derive(Clone, Debug)]
pub struct ArcTree {
    pub templates: Templates,
    pub levels: Vec<Vec<SquareNode>>,
}

impl ArcTree {
    pub fn build(max_depth: usize) -> Result<Self> {
        Self::build_with_limit(max_depth, DEFAULT_MAX_TREE_DEPTH)
    }

    pub fn build_with_limit(max_depth: usize, depth_limit: usize) -> Result<Self> {
        if max_depth == 0 {
            return Err(crate::error::domain("tree depth must be at least 1"));
        }
        if max_depth > depth_limit {
            return Err(Error::Resource(format!(
                "depth {max_depth} needs {} nodes; configured limit is depth {depth_limit}",
                (4u128.pow(max_depth as u32 + 1) - 1) / 3
            )));
        }
        let templates = Templates::new(max_depth);
        let mut levels = vec![vec![SquareNode::root()]];
        for d in 0..max_depth {
            let t = templates.for_depth(d);
            let next: Vec<SquareNode> = levels[d]
                .par_iter()
                .flat_map_iter(|n| (0..4u8).map(|j| n.child(&t, j)).collect::<Vec<_>>())
                .collect();
            levels.push(next);
        }
        Ok(Self { templates, levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn node(&self, address: &Address) -> Option<&SquareNode> {
        self.levels
            .get(address.depth())?
            .get(address.index() as usize)
    }

    pub fn leaves(&self) -> &[SquareNode] {
        self.levels.last().expect("root level always present")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<NodeRepr> = self.levels.iter().flatten().map(NodeRepr::from).collect();
        serde_json::json!({ "depth": self.depth(), "nodes": nodes })
    }
}

/// JSON form of a node; rationals as `"num/den"` strings.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct NodeRepr {
    pub address: String,
    pub corner: PointRepr,
    pub side: String,
    pub frame: [[i8; 2]; 2],
    pub entry: PointRepr,
    pub exit: PointRepr,
}

impl From<&SquareNode> for NodeRepr {
    fn from(n: &SquareNode) -> Self {
        Self {
            address: n.address.to_string(),
            corner: (&n.corner).into(),
            side: crate::exact::to_fraction_string(&n.side),
            frame: n.frame.0,
            entry: (&n.entry).into(),
            exit: (&n.exit).into(),
        }
    }
}

/// True when both anchors are distinct corners of the node's square.
pub fn anchors_are_corners(n: &SquareNode) -> bool {
    let b = n.bounds();
    let is_corner =
        |p: &Point| (p.x == b.min.x || p.x == b.max.x) && (p.y == b.min.y || p.y == b.max.y);
    n.entry != n.exit && is_corner(&n.entry) && is_corner(&n.exit) && !n.side.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::template::side_len;
    use crate::exact::ratio;

    fn addr(s: &str) -> Address {
        s.parse().unwrap()
    }

    #[test]
    fn depth_one_nodes() {
        let tree = ArcTree::build(1).unwrap();
        assert_eq!(tree.leaves().len(), 4);
        for n in tree.leaves() {
            assert_eq!(n.side, ratio(3, 8));
        }
        let q2 = tree.node(&addr("2")).unwrap();
        assert_eq!(q2.entry, Point::new(ratio(5, 8), ratio(5, 8)));
        assert_eq!(q2.exit, Point::new(int(1), ratio(5, 8)));
    }

    #[test]
    fn depth_two_labels() {
        let tree = ArcTree::build(2).unwrap();
        assert_eq!(tree.node(&addr("33")).unwrap().exit, Point::from_ints(1, 0));
        assert_eq!(
            tree.node(&addr("20")).unwrap().entry,
            tree.node(&addr("2")).unwrap().entry
        );
        assert_eq!(
            tree.node(&addr("03")).unwrap().exit,
            tree.node(&addr("0")).unwrap().exit
        );
        // Q_01 sits to the right of Q_00 along the bottom edge, Q_03 above it.
        let q00 = tree.node(&addr("00")).unwrap().bounds();
        let q01 = tree.node(&addr("01")).unwrap().bounds();
        let q03 = tree.node(&addr("03")).unwrap().bounds();
        assert!(q01.min.x > q00.max.x && q01.min.y == q00.min.y);
        assert!(q03.min.y > q00.max.y && q03.min.x == q00.min.x);
        // Q_30 is at the top-right of Q_3, Q_33 at the bottom-right.
        let q3 = tree.node(&addr("3")).unwrap().bounds();
        let q30 = tree.node(&addr("30")).unwrap().bounds();
        let q33 = tree.node(&addr("33")).unwrap().bounds();
        assert_eq!((&q30.max.x, &q30.max.y), (&q3.max.x, &q3.max.y));
        assert_eq!((&q33.max.x, &q33.min.y), (&q3.max.x, &q3.min.y));
    }

    #[test]
    fn structural_invariants_to_depth_four() {
        let tree = ArcTree::build(4).unwrap();
        for d in 0..tree.depth() {
            for parent in &tree.levels[d] {
                let pb = parent.bounds();
                for j in 0..4u8 {
                    let c = tree.node(&parent.address.child(j)).unwrap();
                    assert!(pb.contains_rect(&c.bounds()));
                    assert!(c.frame.is_orthogonal());
                    assert_eq!(c.side, side_len(d + 1));
                    assert!(anchors_are_corners(c));
                }
                assert_eq!(
                    tree.node(&parent.address.child(0)).unwrap().entry,
                    parent.entry
                );
                assert_eq!(
                    tree.node(&parent.address.child(3)).unwrap().exit,
                    parent.exit
                );
            }
        }
    }

    #[test]
    fn locate_agrees_with_tree() {
        let tree = ArcTree::build(3).unwrap();
        let templates = Templates::new(1);
        for n in tree.leaves() {
            assert_eq!(&locate(&templates, &n.address), n);
        }
    }

    #[test]
    fn unmap_inverts_map() {
        let tree = ArcTree::build(2).unwrap();
        let p = Point::new(ratio(1, 3), ratio(2, 7));
        for n in tree.leaves() {
            assert_eq!(n.unmap(&n.map(&p)), p);
        }
    }

    #[test]
    fn kind_tracks_parity_of_reflections() {
        let tree = ArcTree::build(3).unwrap();
        for n in tree.leaves() {
            let flips = n
                .address
                .digits()
                .iter()
                .filter(|&&d| d == 0 || d == 3)
                .count();
            let expect = if flips % 2 == 0 {
                PathKind::Short
            } else {
                PathKind::Long
            };
            assert_eq!(n.kind(), expect);
        }
    }

    #[test]
    fn depth_limit_is_enforced() {
        assert!(matches!(
            ArcTree::build_with_limit(5, 4),
            Err(Error::Resource(_))
        ));
        assert!(ArcTree::build(0).is_err());
    }
}
