//! Implicit partial rotations of direction vectors.
//!
//! A rotation here is an identity matrix with `l/2` planar 2x2 rotation
//! blocks placed on randomly chosen coordinate pairs, all sharing one angle
//! `beta`. The matrix is never materialized: applying it touches only the
//! `l` selected coordinates, costing `2l` multiplications regardless of the
//! vector dimension.

use rand::Rng;

use crate::error::{Error, Result};

/// One implicit rotation: an angle plus the coordinate pairs it acts on.
///
/// Trig terms are kept in f64 so that repeated application preserves vector
/// norms well inside the f32 tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationPlan {
    beta_deg: i32,
    pairs: Vec<(usize, usize)>,
    cos_beta: f64,
    sin_beta: f64,
}

impl RotationPlan {
    /// Builds a plan from an angle and explicit disjoint coordinate pairs.
    pub fn new(beta_deg: i32, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if beta_deg == 0 {
            return Err(Error::InvalidConfig("rotation angle must be nonzero".into()));
        }
        if !(-180..=180).contains(&beta_deg) {
            return Err(Error::InvalidConfig(format!(
                "rotation angle {beta_deg} outside [-180, 180]"
            )));
        }
        if pairs.is_empty() {
            return Err(Error::InvalidConfig("rotation plan needs at least one pair".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in &pairs {
            if !seen.insert(a) || !seen.insert(b) {
                return Err(Error::InvalidConfig(format!(
                    "rotation pair indices repeat (pair {a},{b})"
                )));
            }
        }
        let radians = f64::from(beta_deg).to_radians();
        Ok(Self {
            beta_deg,
            pairs,
            cos_beta: radians.cos(),
            sin_beta: radians.sin(),
        })
    }

    pub fn beta_deg(&self) -> i32 {
        self.beta_deg
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Largest coordinate index this plan touches.
    fn max_index(&self) -> usize {
        self.pairs.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0)
    }
}

/// The candidate neighborhood for one hill-climbing iteration: one plan per
/// angle in `{-theta..-1, 1..theta}`, each with freshly sampled coordinates.
#[derive(Debug, Clone)]
pub struct RotationSet {
    plans: Vec<RotationPlan>,
}

impl RotationSet {
    pub fn plans(&self) -> &[RotationPlan] {
        &self.plans
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }
}

/// Builds the full candidate set: `2 * theta` plans, one per nonzero integer
/// angle in `[-theta, theta]`, each selecting its own `l` distinct
/// coordinates out of `m` (paired in sampled order).
pub fn generate_rotation_set<R: Rng + ?Sized>(
    m: usize,
    l: usize,
    theta: u32,
    rng: &mut R,
) -> Result<RotationSet> {
    if l % 2 != 0 || l < 2 {
        return Err(Error::InvalidConfig(format!(
            "selected dimension count l={l} must be even and >= 2"
        )));
    }
    if l > m {
        return Err(Error::InvalidConfig(format!(
            "selected dimension count l={l} exceeds vector dimension m={m}"
        )));
    }
    if !(1..=180).contains(&theta) {
        return Err(Error::InvalidConfig(format!(
            "rotation range theta={theta} outside [1, 180]"
        )));
    }
    let mut plans = Vec::with_capacity(2 * theta as usize);
    let theta = theta as i32;
    for beta in -theta..=theta {
        if beta == 0 {
            continue;
        }
        let picked: Vec<usize> = rand::seq::index::sample(rng, m, l).into_iter().collect();
        let pairs = picked.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        plans.push(RotationPlan::new(beta, pairs)?);
    }
    Ok(RotationSet { plans })
}

/// Permutes the plan order; the plans themselves are unchanged.
pub fn shuffle_set<R: Rng + ?Sized>(mut set: RotationSet, rng: &mut R) -> RotationSet {
    use rand::seq::SliceRandom;
    set.plans.shuffle(rng);
    set
}

/// Applies the plan to a vector, rotating each selected pair by `beta` and
/// leaving every other coordinate untouched bit-for-bit.
pub fn apply_rotation(plan: &RotationPlan, v: &[f32]) -> Result<Vec<f32>> {
    if plan.max_index() >= v.len() {
        return Err(Error::Shape(format!(
            "rotation pair index {} out of range for vector of length {}",
            plan.max_index(),
            v.len()
        )));
    }
    let mut out = v.to_vec();
    for &(a, b) in &plan.pairs {
        let va = f64::from(v[a]);
        let vb = f64::from(v[b]);
        out[a] = (plan.cos_beta * va + plan.sin_beta * vb) as f32;
        out[b] = (-plan.sin_beta * va + plan.cos_beta * vb) as f32;
    }
    Ok(out)
}

fn norm_sq(v: &[f32]) -> f64 {
    v.iter().map(|&x| f64::from(x) * f64::from(x)).sum()
}

/// Cosine of the angle between two nonzero vectors, accumulated in f64 and
/// clamped to [-1, 1] against round-off at the boundary.
pub fn cosine_similarity(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "cosine similarity on lengths {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let na = norm_sq(a);
    let nb = norm_sq(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidConfig(
            "cosine similarity undefined for a zero vector".into(),
        ));
    }
    let dot: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum();
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Angle between two nonzero vectors, in degrees within [0, 180].
pub fn included_angle_deg(a: &[f32], b: &[f32]) -> Result<f64> {
    Ok(cosine_similarity(a, b)?.acos().to_degrees())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Dense oracle: materialize the full m x m rotation matrix and multiply.
    fn dense_apply(plan: &RotationPlan, v: &[f32]) -> Vec<f32> {
        let m = v.len();
        let mut mat = vec![0.0f64; m * m];
        for i in 0..m {
            mat[i * m + i] = 1.0;
        }
        for &(a, b) in plan.pairs() {
            mat[a * m + a] = plan.cos_beta;
            mat[a * m + b] = plan.sin_beta;
            mat[b * m + a] = -plan.sin_beta;
            mat[b * m + b] = plan.cos_beta;
        }
        (0..m)
            .map(|i| {
                let row: f64 = (0..m).map(|j| mat[i * m + j] * f64::from(v[j])).sum();
                row as f32
            })
            .collect()
    }

    #[test]
    fn set_has_one_plan_per_nonzero_angle() {
        let set = generate_rotation_set(4, 2, 2, &mut rng(7)).unwrap();
        assert_eq!(set.len(), 4);
        let mut angles: Vec<i32> = set.plans().iter().map(|p| p.beta_deg()).collect();
        angles.sort_unstable();
        assert_eq!(angles, vec![-2, -1, 1, 2]);
        for plan in set.plans() {
            assert_eq!(plan.pairs().len(), 1);
            let (a, b) = plan.pairs()[0];
            assert_ne!(a, b);
            assert!(a < 4 && b < 4);
        }
    }

    #[test]
    fn full_range_yields_360_plans() {
        let set = generate_rotation_set(64, 10, 180, &mut rng(1)).unwrap();
        assert_eq!(set.len(), 360);
    }

    #[test]
    fn generation_is_deterministic_for_a_seed() {
        let a = generate_rotation_set(32, 6, 15, &mut rng(99)).unwrap();
        let b = generate_rotation_set(32, 6, 15, &mut rng(99)).unwrap();
        assert_eq!(a.plans(), b.plans());
    }

    #[test]
    fn generation_rejects_bad_parameters() {
        assert!(generate_rotation_set(8, 3, 10, &mut rng(0)).is_err());
        assert!(generate_rotation_set(8, 10, 10, &mut rng(0)).is_err());
        assert!(generate_rotation_set(8, 2, 0, &mut rng(0)).is_err());
        assert!(generate_rotation_set(8, 2, 181, &mut rng(0)).is_err());
    }

    #[test]
    fn quarter_turn_of_basis_pair() {
        let plan = RotationPlan::new(90, vec![(0, 1)]).unwrap();
        let out = apply_rotation(&plan, &[1.0, 0.0, 5.0]).unwrap();
        assert!((out[0]).abs() < 1e-6);
        assert!((out[1] + 1.0).abs() < 1e-6);
        assert_eq!(out[2].to_bits(), 5.0f32.to_bits());
    }

    #[test]
    fn half_turn_negates_the_pair() {
        let plan = RotationPlan::new(180, vec![(0, 1)]).unwrap();
        let out = apply_rotation(&plan, &[3.0, 4.0]).unwrap();
        assert!((out[0] + 3.0).abs() < 1e-6);
        assert!((out[1] + 4.0).abs() < 1e-6);
    }

    #[test]
    fn implicit_matches_dense_oracle() {
        let mut r = rng(42);
        for _ in 0..20 {
            let v: Vec<f32> = (0..64).map(|_| r.random_range(-1.0..1.0)).collect();
            let set = generate_rotation_set(64, 8, 180, &mut r).unwrap();
            let plan = &set.plans()[r.random_range(0..set.len())];
            let fast = apply_rotation(plan, &v).unwrap();
            let slow = dense_apply(plan, &v);
            for (f, s) in fast.iter().zip(&slow) {
                assert!((f - s).abs() < 1e-6, "implicit {f} vs dense {s}");
            }
        }
    }

    #[test]
    fn apply_rejects_out_of_range_index() {
        let plan = RotationPlan::new(45, vec![(0, 5)]).unwrap();
        assert!(apply_rotation(&plan, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn plan_rejects_repeated_indices() {
        assert!(RotationPlan::new(30, vec![(0, 1), (1, 2)]).is_err());
        assert!(RotationPlan::new(0, vec![(0, 1)]).is_err());
    }

    #[test]
    fn trig_terms_square_to_one() {
        for beta in [-180, -91, -1, 1, 37, 90, 179, 180] {
            let plan = RotationPlan::new(beta, vec![(0, 1)]).unwrap();
            let s = plan.cos_beta * plan.cos_beta + plan.sin_beta * plan.sin_beta;
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_of_identical_and_orthogonal() {
        let a = [0.3f32, -0.7, 0.2];
        assert!((cosine_similarity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let e0 = [1.0f32, 0.0];
        let e1 = [0.0f32, 1.0];
        assert!(cosine_similarity(&e0, &e1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cosine_rejects_zero_vectors_and_length_mismatch() {
        assert!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert!(cosine_similarity(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn rotation_similarity_stays_above_partial_bound() {
        // With uniform-magnitude coordinates the selected-energy fraction is
        // exactly l/m, so similarity >= 1 - 2l/m even at a 180-degree turn.
        let m = 3072;
        let l = 10;
        let mut r = rng(5);
        for _ in 0..50 {
            let v: Vec<f32> = (0..m)
                .map(|_| if r.random::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let set = generate_rotation_set(m, l, 180, &mut r).unwrap();
            let plan = &set.plans()[r.random_range(0..set.len())];
            let rotated = apply_rotation(plan, &v).unwrap();
            let sim = cosine_similarity(&v, &rotated).unwrap();
            assert!(sim >= 1.0 - 2.0 * (l as f64) / (m as f64) - 1e-6, "sim {sim}");
            assert!(sim >= 0.993, "sim {sim}");
        }
    }

    #[test]
    fn included_angle_basics() {
        let a = [0.4f32, 0.1, -0.3];
        assert!(included_angle_deg(&a, &a).unwrap() < 1e-5);
        let ninety = included_angle_deg(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((ninety - 90.0).abs() < 1e-9);
    }

    #[test]
    fn included_angle_matches_f64_oracle() {
        let mut r = rng(11);
        for _ in 0..25 {
            let a: Vec<f32> = (0..16).map(|_| r.random_range(-1.0..1.0)).collect();
            let b: Vec<f32> = (0..16).map(|_| r.random_range(-1.0..1.0)).collect();
            if norm_sq(&a) == 0.0 || norm_sq(&b) == 0.0 {
                continue;
            }
            let dot: f64 = a.iter().zip(&b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum();
            let expect = (dot / (norm_sq(&a).sqrt() * norm_sq(&b).sqrt()))
                .clamp(-1.0, 1.0)
                .acos()
                .to_degrees();
            let got = included_angle_deg(&a, &b).unwrap();
            assert!((got - expect).abs() < 1e-6);
        }
    }

    #[test]
    fn shuffle_preserves_the_multiset_of_plans() {
        let mut r = rng(3);
        let set = generate_rotation_set(16, 4, 30, &mut r).unwrap();
        let before = set.plans().to_vec();
        let shuffled = shuffle_set(set, &mut r);
        assert_eq!(shuffled.len(), before.len());
        let key = |p: &RotationPlan| (p.beta_deg(), p.pairs().to_vec());
        let mut k1: Vec<_> = before.iter().map(key).collect();
        let mut k2: Vec<_> = shuffled.plans().iter().map(key).collect();
        k1.sort();
        k2.sort();
        assert_eq!(k1, k2);
    }

    #[test]
    fn shuffle_is_deterministic_and_fixes_singletons() {
        let single = RotationSet {
            plans: vec![RotationPlan::new(10, vec![(0, 1)]).unwrap()],
        };
        let single = shuffle_set(single, &mut rng(0));
        assert_eq!(single.plans()[0].beta_deg(), 10);

        let mut r1 = rng(77);
        let mut r2 = rng(77);
        let a = shuffle_set(generate_rotation_set(16, 4, 20, &mut r1).unwrap(), &mut r1);
        let b = shuffle_set(generate_rotation_set(16, 4, 20, &mut r2).unwrap(), &mut r2);
        assert_eq!(a.plans(), b.plans());
    }
}
