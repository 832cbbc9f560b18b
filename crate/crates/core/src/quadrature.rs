//! Tensor-product Gauss-Legendre rules over source domains.
//!
//! Boxes use a plain tensor rule. Balls use radial Gauss-Legendre (with the
//! `r^2` Jacobian in the weights), Gauss-Legendre in `cos(theta)` and an
//! equal-weight azimuthal rule with `2 * order` points.

use std::f64::consts::{PI, TAU};

use crate::domain::Domain;
use crate::error::{invalid, FieldError, Result};
use crate::geometry::Vec3;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and positive weights approximating `int_D d^3x'`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
    order: usize,
    domain: Domain,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec3, f64)> {
        self.nodes.iter().zip(self.weights.iter().copied())
    }
}

pub fn build_rule(domain: &Domain, order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(invalid("quadrature order must be at least 1"));
    }
    domain.validate()?;
    let (x, w) = gauss_legendre(order);
    let (nodes, weights) = match domain {
        Domain::Box { min, max } => {
            let half = 0.5 * (max - min);
            let mid = 0.5 * (max + min);
            let jac = half.product();
            let mut nodes = Vec::with_capacity(order.pow(3));
            let mut weights = Vec::with_capacity(order.pow(3));
            for i in 0..order {
                for j in 0..order {
                    for k in 0..order {
                        nodes.push(Vec3::new(
                            mid.x + half.x * x[i],
                            mid.y + half.y * x[j],
                            mid.z + half.z * x[k],
                        ));
                        weights.push(jac * w[i] * w[j] * w[k]);
                    }
                }
            }
            (nodes, weights)
        }
        Domain::Ball { center, radius } => {
            // Two radial points are the minimum that integrate the r^2 Jacobian exactly.
            let n_r = order.max(2);
            let (xr, wr_unit) = gauss_legendre(n_r);
            let n_phi = 2 * order;
            let dphi = TAU / n_phi as f64;
            let mut nodes = Vec::with_capacity(n_r * order * n_phi);
            let mut weights = Vec::with_capacity(n_r * order * n_phi);
            for i in 0..n_r {
                let r = 0.5 * radius * (xr[i] + 1.0);
                let wr = 0.5 * radius * wr_unit[i] * r * r;
                for j in 0..order {
                    let mu = x[j];
                    let s = (1.0 - mu * mu).sqrt();
                    for k in 0..n_phi {
                        let phi = (k as f64 + 0.5) * dphi;
                        nodes.push(center + r * Vec3::new(s * phi.cos(), s * phi.sin(), mu));
                        weights.push(wr * w[j] * dphi);
                    }
                }
            }
            (nodes, weights)
        }
    };
    Ok(QuadratureRule {
        nodes,
        weights,
        order,
        domain: *domain,
    })
}

/// `sum_i w_i f(x_i)`, failing on the first non-finite integrand value.
pub fn integrate_vector<F>(f: F, rule: &QuadratureRule) -> Result<Vec3>
where
    F: Fn(&Vec3) -> Vec3,
{
    let mut acc = Vec3::zeros();
    for (index, (node, w)) in rule.iter().enumerate() {
        let v = f(node);
        if !v.iter().all(|c| c.is_finite()) {
            return Err(FieldError::NonFiniteIntegrand {
                index,
                node: [node.x, node.y, node.z],
            });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Result of an order-refinement ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct Refined {
    pub value: Vec3,
    /// Max-norm difference between the last two orders.
    pub err_estimate: f64,
    pub order: usize,
    /// `(order, err_estimate)` for every step after the first.
    pub history: Vec<(usize, f64)>,
}

/// Pre-built rules for orders `base, base + 2, ..., max`.
#[derive(Debug, Clone)]
pub struct RefinementLadder {
    rules: Vec<QuadratureRule>,
    tol: Option<f64>,
}

impl RefinementLadder {
    /// `tol`, when set, stops the ladder early once the error estimate drops
    /// below `tol` times the max-norm of the current value.
    pub fn new(domain: &Domain, base_order: usize, max_order: usize, tol: Option<f64>) -> Result<Self> {
        if base_order == 0 {
            return Err(invalid("base order must be at least 1"));
        }
        if base_order >= max_order {
            return Err(invalid(format!(
                "base order {base_order} must be below max order {max_order}"
            )));
        }
        let mut orders: Vec<usize> = (base_order..=max_order).step_by(2).collect();
        if *orders.last().unwrap() != max_order {
            orders.push(max_order);
        }
        let rules = orders
            .into_iter()
            .map(|o| build_rule(domain, o))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rules, tol })
    }

    pub fn rules(&self) -> &[QuadratureRule] {
        &self.rules
    }

    /// Runs `eval` up the ladder. Fails when the estimate grows for three
    /// consecutive steps while still above round-off level.
    pub fn run<F>(&self, mut eval: F) -> Result<Refined>
    where
        F: FnMut(&QuadratureRule) -> Result<Vec3>,
    {
        let mut prev = eval(&self.rules[0])?;
        let mut history = Vec::with_capacity(self.rules.len());
        let mut last_err = f64::INFINITY;
        let mut stalls = 0;
        for rule in &self.rules[1..] {
            let value = eval(rule)?;
            let err = (value - prev).amax();
            history.push((rule.order(), err));
            let scale = value.amax();
            let noise = 64.0 * f64::EPSILON * scale;
            if err >= last_err && err > noise {
                stalls += 1;
                if stalls >= 3 {
                    return Err(FieldError::NonConvergence {
                        order: rule.order(),
                        err_estimate: err,
                    });
                }
            } else {
                stalls = 0;
            }
            last_err = err;
            prev = value;
            if let Some(tol) = self.tol {
                if err <= tol * scale {
                    break;
                }
            }
        }
        let (order, err_estimate) = *history.last().expect("ladder has at least two rules");
        Ok(Refined {
            value: prev,
            err_estimate,
            order,
            history,
        })
    }
}

/// Integrates `f` at orders `base, base + 2, ..., max` and reports the last
/// value with `|last - previous|` as its error estimate.
pub fn refine_estimate<F>(f: F, domain: &Domain, base_order: usize, max_order: usize) -> Result<Refined>
where
    F: Fn(&Vec3) -> Vec3,
{
    RefinementLadder::new(domain, base_order, max_order, None)?.run(|rule| integrate_vector(&f, rule))
}
