use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::expanded::{ExpandedState19, EXPANDED_DIM};
use super::ReprError;
use crate::weights::{FileKind, Section, WeightFile};

/// `R x R` grid of `F`-dimensional feature vectors; node `(i, j)` sits at
/// coordinates `(i / (R-1), j / (R-1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    resolution: usize,
    features: usize,
    nodes: Vec<f64>,
}

impl Plane {
    pub fn new(resolution: usize, features: usize, nodes: Vec<f64>) -> Result<Self, ReprError> {
        if resolution < 2 {
            return Err(ReprError::Config(format!("plane resolution {resolution} < 2")));
        }
        if nodes.len() != resolution * resolution * features {
            return Err(ReprError::Dimension { expected: resolution * resolution * features, got: nodes.len() });
        }
        Ok(Plane { resolution, features, nodes })
    }

    pub fn constant(resolution: usize, features: usize, value: f64) -> Self {
        Plane { resolution, features, nodes: vec![value; resolution * resolution * features] }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn node(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.resolution + j) * self.features;
        &self.nodes[start..start + self.features]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

/// Bilinear interpolation of the four grid nodes around `(u, v)`; both
/// coordinates are clamped to `[0, 1]` first, `u` indexing the first grid axis.
pub fn bilinear_sample(plane: &Plane, u: f64, v: f64) -> Vec<f64> {
    let mut out = vec![0.0; plane.features];
    bilinear_sample_into(plane, u, v, &mut out);
    out
}

fn bilinear_sample_into(plane: &Plane, u: f64, v: f64, out: &mut [f64]) {
    let last = (plane.resolution - 1) as f64;
    let locate = |c: f64| {
        let x = if c.is_nan() { 0.0 } else { c.clamp(0.0, 1.0) } * last;
        let i0 = (x.floor() as usize).min(plane.resolution - 2);
        (i0, x - i0 as f64)
    };
    let (i0, fu) = locate(u);
    let (j0, fv) = locate(v);
    let n00 = plane.node(i0, j0);
    let n10 = plane.node(i0 + 1, j0);
    let n01 = plane.node(i0, j0 + 1);
    let n11 = plane.node(i0 + 1, j0 + 1);
    let (w00, w10, w01, w11) = ((1.0 - fu) * (1.0 - fv), fu * (1.0 - fv), (1.0 - fu) * fv, fu * fv);
    for f in 0..out.len() {
        out[f] = w00 * n00[f] + w10 * n10[f] + w01 * n01[f] + w11 * n11[f];
    }
}

/// Which entries of the 19-D state form each continuous group.
pub const TIME_GROUP: [usize; 3] = [0, 5, 6];
pub const QUEUE_GROUP: [usize; 4] = [7, 8, 9, 10];
pub const DELTA_GROUP: [usize; 4] = [11, 12, 13, 14];
pub const GREEN_GROUP: [usize; 4] = [15, 16, 17, 18];
pub const PHASE_GROUP: [usize; 4] = [1, 2, 3, 4];

/// Dimensions of the continuous groups, in output order.
pub const GROUP_DIMS: [usize; 4] = [3, 4, 4, 4];

pub const KPLANES_FEATURES: usize = 16;
pub const KPLANES_RESOLUTION: usize = 8;
pub const KPLANES_DIM: usize = GROUP_DIMS.len() * KPLANES_FEATURES + PHASE_GROUP.len();

/// All index pairs `(i, j)` with `i < j < d`, in lexicographic order.
pub fn feature_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|i| ((i + 1)..d).map(move |j| (i, j))).collect()
}

/// Fixed, seeded plane grids for the factorized feature transform.
#[derive(Debug, Clone, PartialEq)]
pub struct KPlanesParams {
    seed: u64,
    resolution: usize,
    features: usize,
    /// `planes[g]` holds one plane per pair of group `g`, in [`feature_pairs`] order.
    planes: Vec<Vec<Plane>>,
}

impl KPlanesParams {
    pub fn new(seed: u64) -> Self {
        Self::with_shape(seed, KPLANES_RESOLUTION, KPLANES_FEATURES)
    }

    /// Grids filled from U(0.5, 1.5), drawn as `f32` so they survive the
    /// weight file unchanged.
    pub fn with_shape(seed: u64, resolution: usize, features: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let planes = GROUP_DIMS
            .iter()
            .map(|&d| {
                feature_pairs(d)
                    .iter()
                    .map(|_| {
                        let nodes = (0..resolution * resolution * features)
                            .map(|_| rng.random_range(0.5f32..1.5f32) as f64)
                            .collect();
                        Plane { resolution, features, nodes }
                    })
                    .collect()
            })
            .collect();
        KPlanesParams { seed, resolution, features, planes }
    }

    /// Every node of every plane set to `value`.
    pub fn constant(resolution: usize, features: usize, value: f64) -> Self {
        let planes = GROUP_DIMS
            .iter()
            .map(|&d| feature_pairs(d).iter().map(|_| Plane::constant(resolution, features, value)).collect())
            .collect();
        KPlanesParams { seed: 0, resolution, features, planes }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn plane_count(&self) -> usize {
        self.planes.iter().map(Vec::len).sum()
    }

    pub fn output_dim(&self) -> usize {
        GROUP_DIMS.len() * self.features + PHASE_GROUP.len()
    }

    pub fn planes(&self, group: usize) -> &[Plane] {
        &self.planes[group]
    }

    /// Sample every pair plane of each group, multiply the samples
    /// element-wise within the group, and concatenate the group features
    /// followed by the untouched phase one-hot.
    pub fn transform(&self, s: &ExpandedState19) -> Vec<f64> {
        let v = s.to_array();
        self.transform_array(&v)
    }

    pub fn transform_array(&self, v: &[f64; EXPANDED_DIM]) -> Vec<f64> {
        let groups: [Vec<f64>; 4] = [
            TIME_GROUP.iter().map(|&i| v[i]).collect(),
            QUEUE_GROUP.iter().map(|&i| v[i]).collect(),
            // queue changes live in [-1, 1]; the grids are indexed on [0, 1]
            DELTA_GROUP.iter().map(|&i| (v[i] + 1.0) / 2.0).collect(),
            GREEN_GROUP.iter().map(|&i| v[i]).collect(),
        ];
        let mut out = Vec::with_capacity(self.output_dim());
        let mut sample = vec![0.0; self.features];
        for (g, values) in groups.iter().enumerate() {
            let mut acc = vec![1.0; self.features];
            for ((i, j), plane) in feature_pairs(values.len()).into_iter().zip(&self.planes[g]) {
                bilinear_sample_into(plane, values[i], values[j], &mut sample);
                acc.iter_mut().zip(&sample).for_each(|(a, s)| *a *= s);
            }
            out.extend(acc);
        }
        out.extend(PHASE_GROUP.iter().map(|&i| v[i]));
        out
    }

    pub fn to_weight_file(&self) -> WeightFile {
        let mut f = WeightFile::new(FileKind::Planes, self.seed, "kplanes");
        f.sections.push(Section {
            name: "planes".into(),
            dims: vec![self.resolution as u32, self.features as u32],
            meta: GROUP_DIMS.iter().map(|&d| d as u32).collect(),
            values: self.planes.iter().flatten().flat_map(|p| p.nodes.iter().map(|&x| x as f32)).collect(),
        });
        f
    }

    pub fn from_weight_file(f: &WeightFile) -> Result<Self, ReprError> {
        let s = f.section("planes").ok_or_else(|| ReprError::Config("missing planes section".into()))?;
        let (resolution, features) = match s.dims.as_slice() {
            [r, f] => (*r as usize, *f as usize),
            _ => return Err(ReprError::Config("planes section needs dims [R, F]".into())),
        };
        if s.meta.iter().map(|&d| d as usize).ne(GROUP_DIMS) {
            return Err(ReprError::Config(format!("unexpected group dims {:?}", s.meta)));
        }
        let per_plane = resolution * resolution * features;
        let total: usize = GROUP_DIMS.iter().map(|&d| feature_pairs(d).len()).sum::<usize>() * per_plane;
        if s.values.len() != total {
            return Err(ReprError::Dimension { expected: total, got: s.values.len() });
        }
        let mut chunks = s.values.chunks_exact(per_plane);
        let mut planes = Vec::new();
        for &d in &GROUP_DIMS {
            let mut group = Vec::new();
            for _ in feature_pairs(d) {
                let nodes = chunks.next().expect("length checked").iter().map(|&x| x as f64).collect();
                group.push(Plane::new(resolution, features, nodes)?);
            }
            planes.push(group);
        }
        Ok(KPlanesParams { seed: f.seed, resolution, features, planes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar_plane(rows: &[&[f64]]) -> Plane {
        let r = rows.len();
        Plane::new(r, 1, rows.iter().flat_map(|row| row.iter().copied()).collect()).unwrap()
    }

    #[test]
    fn centre_of_2x2_is_corner_average() {
        let p = scalar_plane(&[&[0.0, 1.0], &[2.0, 3.0]]);
        assert_eq!(bilinear_sample(&p, 0.5, 0.5), vec![1.5]);
    }

    #[test]
    fn corners_are_exact() {
        let p = scalar_plane(&[&[0.3, 1.7], &[2.9, 3.1]]);
        assert_eq!(bilinear_sample(&p, 0.0, 0.0), vec![0.3]);
        assert_eq!(bilinear_sample(&p, 1.0, 1.0), vec![3.1]);
        assert_eq!(bilinear_sample(&p, 1.0, 0.0), vec![2.9]);
        assert_eq!(bilinear_sample(&p, -4.0, 9.0), vec![1.7]);
    }

    #[test]
    fn quarter_point_on_3x3() {
        let p = scalar_plane(&[&[1.0, 5.0, 9.0], &[3.0, 0.0, 0.0], &[7.0, 0.0, 0.0]]);
        // u = 0.25 falls halfway between rows 0 and 1 along the first axis
        assert_eq!(bilinear_sample(&p, 0.25, 0.0), vec![2.0]);
    }

    #[test]
    fn output_shape() {
        let kp = KPlanesParams::new(3);
        assert_eq!(kp.plane_count(), 21);
        assert_eq!(feature_pairs(3).len(), 3);
        assert_eq!(feature_pairs(4).len(), 6);
        let s = ExpandedState19::from_array(&[0.2; 19]);
        assert_eq!(kp.transform(&s).len(), 68);
        assert_eq!(KPLANES_DIM, 68);
    }

    #[test]
    fn constant_grids_give_ones_and_phase() {
        let kp = KPlanesParams::constant(8, 16, 1.0);
        let mut v = [0.37; 19];
        v[1..5].copy_from_slice(&[0.0, 0.0, 1.0, 0.0]);
        let out = kp.transform_array(&v);
        assert!(out[..64].iter().all(|&x| x == 1.0));
        assert_eq!(&out[64..], &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn seeded_grids_reproducible_and_in_range() {
        let a = KPlanesParams::new(9);
        assert_eq!(a, KPlanesParams::new(9));
        assert_ne!(a, KPlanesParams::new(10));
        for g in 0..4 {
            for p in a.planes(g) {
                assert!(p.nodes().iter().all(|&x| (0.5..1.5).contains(&x)));
            }
        }
    }

    #[test]
    fn weight_file_round_trip_is_exact() {
        let a = KPlanesParams::new(21);
        let f = a.to_weight_file();
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        let back = KPlanesParams::from_weight_file(&WeightFile::read_from(buf.as_slice()).unwrap()).unwrap();
        assert_eq!(back, a);
    }

    proptest! {
        #[test]
        fn transform_is_finite_pure_and_positive(v in proptest::array::uniform19(-1.0f64..1.0), seed in 0u64..4) {
            let kp = KPlanesParams::new(seed);
            let before = kp.clone();
            let out = kp.transform_array(&v);
            prop_assert_eq!(out.len(), 68);
            prop_assert!(out[..64].iter().all(|x| x.is_finite() && *x > 0.0));
            prop_assert_eq!(&out, &kp.transform_array(&v));
            prop_assert_eq!(kp, before);
        }

        #[test]
        fn swapping_group_values_keeps_shape(v in proptest::array::uniform19(0.0f64..1.0)) {
            let kp = KPlanesParams::new(1);
            let mut w = v;
            w.swap(7, 9);
            prop_assert_eq!(kp.transform_array(&w).len(), kp.transform_array(&v).len());
        }
    }
}
