//! Additive per-component cluster sums.
//!
//! Every closed form for leaders, merged leaders and between-cluster
//! dissimilarities is a function of these sums, and the sums of a disjoint
//! union are the sums of its parts.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign};

use crate::model::{Schema, SymbolicObject};

/// Sums over the members of a cluster at one component.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComponentSums {
    /// `Σ w`
    pub w: f64,
    /// `Σ w` over members with `p > 0`.
    pub w_pos: f64,
    /// `Σ w p`
    pub p: f64,
    /// `Σ w p²`
    pub q: f64,
    /// `Σ w / p` over members with `p > 0`.
    pub h: f64,
    /// `Σ w / p²` over members with `p > 0`.
    pub g: f64,
}

impl ComponentSums {
    /// Contribution of one member with weight `w` and probability `p`.
    pub fn of(p: f64, w: f64) -> Self {
        if w == 0.0 {
            return ComponentSums::default();
        }
        let mut s = ComponentSums {
            w,
            p: w * p,
            q: w * p * p,
            ..ComponentSums::default()
        };
        if p > 0.0 {
            s.w_pos = w;
            s.h = w / p;
            s.g = w / (p * p);
        }
        s
    }
}

impl Add for ComponentSums {
    type Output = ComponentSums;

    fn add(self, o: ComponentSums) -> ComponentSums {
        ComponentSums {
            w: self.w + o.w,
            w_pos: self.w_pos + o.w_pos,
            p: self.p + o.p,
            q: self.q + o.q,
            h: self.h + o.h,
            g: self.g + o.g,
        }
    }
}

impl AddAssign for ComponentSums {
    fn add_assign(&mut self, o: ComponentSums) {
        *self = *self + o;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAggregates {
    /// `vars[i][j]` holds the sums for component `j` of variable `i`.
    pub vars: Vec<Vec<ComponentSums>>,
    pub count: usize,
}

impl ClusterAggregates {
    pub fn empty(schema: &Schema) -> Self {
        ClusterAggregates {
            vars: schema
                .variables()
                .iter()
                .map(|v| vec![ComponentSums::default(); v.arity()])
                .collect(),
            count: 0,
        }
    }

    pub fn of_object(x: &SymbolicObject) -> Self {
        ClusterAggregates {
            vars: x
                .vars
                .iter()
                .map(|v| {
                    if v.is_active() {
                        v.p.iter()
                            .zip(&v.w)
                            .map(|(&p, &w)| ComponentSums::of(p, w))
                            .collect()
                    } else {
                        vec![ComponentSums::default(); v.arity()]
                    }
                })
                .collect(),
            count: 1,
        }
    }

    pub fn push(&mut self, x: &SymbolicObject) {
        for (sums, v) in self.vars.iter_mut().zip(&x.vars) {
            if !v.is_active() {
                continue;
            }
            for (s, (&p, &w)) in sums.iter_mut().zip(v.p.iter().zip(&v.w)) {
                *s += ComponentSums::of(p, w);
            }
        }
        self.count += 1;
    }

    /// Aggregates of the disjoint union.
    pub fn merge(&self, other: &ClusterAggregates) -> ClusterAggregates {
        ClusterAggregates {
            vars: self
                .vars
                .iter()
                .zip(&other.vars)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| x + y).collect())
                .collect(),
            count: self.count + other.count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

/// Aggregates of a set of units, accumulated in slice order.
pub fn compute_aggregates<'a, I>(schema: &Schema, members: I) -> ClusterAggregates
where
    I: IntoIterator<Item = &'a SymbolicObject>,
{
    let mut agg = ClusterAggregates::empty(schema);
    for x in members {
        agg.push(x);
    }
    agg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModalValue;

    fn unit(p: f64, w: f64) -> SymbolicObject {
        SymbolicObject::new(
            "x",
            vec![ModalValue::from_distribution(
                vec![p, 1.0 - p],
                1.0,
                vec![w, w],
            )],
        )
    }

    #[test]
    fn two_member_sums() {
        let s = Schema::uniform(&[2]).unwrap();
        let c = [unit(0.2, 1.0), unit(0.4, 1.0)];
        let a = compute_aggregates(&s, &c);
        let first = a.vars[0][0];
        assert_eq!(first.w, 2.0);
        assert!((first.p - 0.6).abs() < 1e-15);
        assert!((first.q - 0.2).abs() < 1e-15);
        assert!((first.h - 7.5).abs() < 1e-12);
        assert!((first.g - 31.25).abs() < 1e-12);
        assert_eq!(a.count, 2);
    }

    #[test]
    fn empty_cluster_is_all_zero() {
        let s = Schema::uniform(&[3, 2]).unwrap();
        let a = compute_aggregates(&s, core::iter::empty());
        assert!(a.is_empty());
        assert!(a
            .vars
            .iter()
            .flatten()
            .all(|c| *c == ComponentSums::default()));
    }

    #[test]
    fn zero_probability_skips_inverse_sums() {
        let c = ComponentSums::of(0.0, 3.0);
        assert_eq!(c.w, 3.0);
        assert_eq!(c.w_pos, 0.0);
        assert_eq!(c.h, 0.0);
        assert_eq!(c.g, 0.0);
    }

    #[test]
    fn inactive_variable_contributes_nothing() {
        let x = SymbolicObject::new("x", vec![ModalValue::count_weighted(vec![0.0, 0.0])]);
        let a = ClusterAggregates::of_object(&x);
        assert_eq!(a.vars[0][0], ComponentSums::default());
    }
}
