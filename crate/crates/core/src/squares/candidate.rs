use crate::curves::PlaneCurve;
use crate::geom::{cross, wrap_angle, Vec2};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Counterclockwise,
    Clockwise,
}

/// A (generalized) inscribed square: four curve parameters whose images are
/// the vertices of a square, listed in cyclic vertex order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SquareCandidate {
    pub params: [f64; 4],
    #[serde(serialize_with = "serialize_points")]
    pub vertices: [Vec2; 4],
    pub residual_norm: f64,
    pub sidelength: f64,
    pub orientation: Orientation,
    /// Parameters increase cyclically along the vertex order, so the labeling
    /// follows the curve's own orientation.
    pub cyclic_order: bool,
    /// The residual Jacobian is rank deficient at the solution; the square
    /// sits in a continuum (e.g. any square of a circle).
    pub rank_deficient: bool,
}

fn serialize_points<S: serde::Serializer>(pts: &[Vec2; 4], ser: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = ser.serialize_seq(Some(4))?;
    for p in pts {
        seq.serialize_element(&[p.x, p.y])?;
    }
    seq.end()
}

/// Labelings of a square that keep it a square: 4 rotations × 2 reflections.
const DIHEDRAL: [[usize; 4]; 8] = [
    [0, 1, 2, 3],
    [1, 2, 3, 0],
    [2, 3, 0, 1],
    [3, 0, 1, 2],
    [0, 3, 2, 1],
    [3, 2, 1, 0],
    [2, 1, 0, 3],
    [1, 0, 3, 2],
];

impl SquareCandidate {
    /// Build a canonical candidate from parameters whose images solve the
    /// square system with diagonals `(0, 2)` and `(1, 3)`.
    ///
    /// The labeling is rotated (and reflected if needed) so that parameters
    /// increase cyclically starting from the smallest one. When no such
    /// labeling exists the counterclockwise labeling starting at the smallest
    /// parameter is used and `cyclic_order` is false.
    pub fn from_params<C: PlaneCurve + ?Sized>(curve: &C, params: [f64; 4], residual_norm: f64) -> Self {
        let params = params.map(wrap_angle);
        let points = params.map(|s| curve.point(s));
        Self::from_parts(params, points, residual_norm)
    }

    pub fn from_parts(params: [f64; 4], points: [Vec2; 4], residual_norm: f64) -> Self {
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&a, &b| params[a].total_cmp(&params[b]));
        let cyclic = order[2] == (order[0] + 2) % 4;
        let labeling: [usize; 4] = if cyclic {
            order
        } else {
            let start = order[0];
            let fwd = [start, (start + 1) % 4, (start + 2) % 4, (start + 3) % 4];
            let turn = cross(&(points[fwd[1]] - points[fwd[0]]), &(points[fwd[2]] - points[fwd[1]]));
            if turn >= 0.0 {
                fwd
            } else {
                [start, (start + 3) % 4, (start + 2) % 4, (start + 1) % 4]
            }
        };
        let params = labeling.map(|i| params[i]);
        let vertices = labeling.map(|i| points[i]);
        let turn = cross(&(vertices[1] - vertices[0]), &(vertices[2] - vertices[1]));
        Self {
            params,
            vertices,
            residual_norm,
            sidelength: (vertices[1] - vertices[0]).norm(),
            orientation: if turn >= 0.0 {
                Orientation::Counterclockwise
            } else {
                Orientation::Clockwise
            },
            cyclic_order: cyclic,
            rank_deficient: false,
        }
    }

    pub fn center(&self) -> Vec2 {
        self.vertices.iter().sum::<Vec2>() / 4.0
    }

    pub fn sides(&self) -> [f64; 4] {
        std::array::from_fn(|i| (self.vertices[(i + 1) % 4] - self.vertices[i]).norm())
    }

    pub fn diagonals(&self) -> [f64; 2] {
        [
            (self.vertices[2] - self.vertices[0]).norm(),
            (self.vertices[3] - self.vertices[1]).norm(),
        ]
    }

    /// All four sides agree and both diagonals agree within `rel` relative
    /// tolerance, and the diagonals are √2 times the sides.
    pub fn is_square_within(&self, rel: f64) -> bool {
        let sides = self.sides();
        let diag = self.diagonals();
        let scale = sides.iter().copied().fold(0.0, f64::max).max(1e-300);
        let side_spread = sides.iter().map(|s| (s - sides[0]).abs()).fold(0.0, f64::max);
        side_spread <= rel * scale
            && (diag[0] - diag[1]).abs() <= rel * scale
            && (diag[0] - std::f64::consts::SQRT_2 * sides[0]).abs() <= rel * scale
    }

    /// Largest vertex distance after the best relabeling, i.e. the distance
    /// between the two squares as unlabeled point sets.
    pub fn vertex_distance(&self, other: &SquareCandidate) -> f64 {
        DIHEDRAL
            .iter()
            .map(|perm| {
                (0..4)
                    .map(|i| (self.vertices[i] - other.vertices[perm[i]]).norm())
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Merge candidates describing the same geometric square (within `tol`),
/// keeping the one with the smallest residual, and sort by first parameter.
pub fn dedup_squares(mut squares: Vec<SquareCandidate>, tol: f64) -> Vec<SquareCandidate> {
    squares.sort_by(|a, b| a.residual_norm.total_cmp(&b.residual_norm));
    let mut kept: Vec<SquareCandidate> = Vec::new();
    for sq in squares {
        if !kept.iter().any(|k| k.vertex_distance(&sq) <= tol) {
            kept.push(sq);
        }
    }
    kept.sort_by(|a, b| {
        a.params[0]
            .total_cmp(&b.params[0])
            .then(a.params[1].total_cmp(&b.params[1]))
    });
    kept
}
