//! Effective resistance on finite networks, computed through all six
//! equivalent formulations with mutual cross-checks, plus metric-axiom
//! verification.

use crate::error::{Error, Result};
use crate::network::Network;
use crate::solver::{
    dirichlet_solve, dissipation, drop_current, energy_kernel_element, energy_of, solve_dipole,
    Potential,
};

/// All six formulations of the resistance between one pair, with their
/// consensus and spread.
#[derive(Debug, Clone)]
pub struct ResistanceReport {
    pub x: usize,
    pub y: usize,
    /// v(x) - v(y) for the dipole solution.
    pub potential_drop: f64,
    /// E(v) for the dipole solution.
    pub dipole_energy: f64,
    /// Dissipation of the induced minimal current flow.
    pub min_dissipation: f64,
    /// 1 / min{ E(u) : u(x) = 1, u(y) = 0 }.
    pub reciprocal_min_energy: f64,
    /// Best constant k with |u(x)-u(y)|^2 <= k E(u): E(v_x - v_y).
    pub best_constant: f64,
    /// sup |u(x)-u(y)|^2 over the unit energy ball, evaluated at its
    /// maximizer.
    pub sup_form: f64,
    pub consensus: f64,
    pub spread: f64,
}

impl ResistanceReport {
    pub fn values(&self) -> [f64; 6] {
        [
            self.potential_drop,
            self.dipole_energy,
            self.min_dissipation,
            self.reciprocal_min_energy,
            self.best_constant,
            self.sup_form,
        ]
    }
}

/// Effective resistance R(x, y) = v(x) - v(y) for the dipole solution,
/// cross-checked against its energy.
pub fn effective_resistance(net: &Network, x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Ok(0.0);
    }
    let v = solve_dipole(net, x, y)?;
    let drop = v.value(x) - v.value(y);
    let e = energy_of(net, &v);
    if (drop - e).abs() > 1e-10 * drop.abs().max(1e-30) {
        return Err(Error::Solve(format!(
            "potential drop {drop} and dipole energy {e} disagree"
        )));
    }
    Ok(drop)
}

/// Compute all six formulations independently.
pub fn resistance_report(net: &Network, x: usize, y: usize) -> Result<ResistanceReport> {
    if x == y {
        return Err(Error::Precondition("resistance report requires x != y".into()));
    }
    let v = solve_dipole(net, x, y)?;
    let potential_drop = v.value(x) - v.value(y);
    let dipole_energy = energy_of(net, &v);
    let min_dissipation = {
        let flow = drop_current(net, &v);
        dissipation(net, &flow, &flow)
    };
    let reciprocal_min_energy = {
        let u = dirichlet_solve(net, &[(x, 1.0), (y, 0.0)])?;
        1.0 / energy_of(net, &u)
    };
    // the energy kernel gives the best constant and the maximizer of the
    // sup form: both rest on w = v_x - v_y, solved against the base vertex
    let vx = energy_kernel_element(net, x)?;
    let vy = energy_kernel_element(net, y)?;
    let w = Potential::from_values(
        vx.values
            .iter()
            .zip(&vy.values)
            .map(|(&a, &b)| a - b)
            .collect(),
    );
    let best_constant = energy_of(net, &w);
    let sup_form = {
        let diff = w.value(x) - w.value(y);
        diff * diff / energy_of(net, &w)
    };

    let values = [
        potential_drop,
        dipole_energy,
        min_dissipation,
        reciprocal_min_energy,
        best_constant,
        sup_form,
    ];
    let consensus = values.iter().sum::<f64>() / 6.0;
    let spread = values.iter().cloned().fold(f64::MIN, f64::max)
        - values.iter().cloned().fold(f64::MAX, f64::min);
    Ok(ResistanceReport {
        x,
        y,
        potential_drop,
        dipole_energy,
        min_dissipation,
        reciprocal_min_energy,
        best_constant,
        sup_form,
        consensus,
        spread,
    })
}

/// One metric-axiom failure with its witness.
#[derive(Debug, Clone)]
pub struct MetricViolation {
    pub axiom: &'static str,
    pub witness: String,
    pub magnitude: f64,
}

/// Report from checking symmetry, positivity, and the triangle inequality
/// over sampled vertex triples.
#[derive(Debug, Clone)]
pub struct MetricReport {
    pub pairs_checked: usize,
    pub triples_checked: usize,
    pub violations: Vec<MetricViolation>,
}

impl MetricReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verify the metric axioms of R over every pair and triple drawn from the
/// sample vertices. Triangle slack is absolute.
pub fn check_metric_axioms(net: &Network, sample: &[usize], slack: f64) -> Result<MetricReport> {
    let mut violations = Vec::new();
    let m = sample.len();
    let mut r = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                r[i][j] = effective_resistance(net, sample[i], sample[j])?;
            }
        }
    }
    let mut pairs = 0;
    for i in 0..m {
        for j in i + 1..m {
            pairs += 1;
            let (rij, rji) = (r[i][j], r[j][i]);
            if (rij - rji).abs() > slack.max(1e-12 * rij.abs()) {
                violations.push(MetricViolation {
                    axiom: "symmetry",
                    witness: format!("{} {}", net.id(sample[i]), net.id(sample[j])),
                    magnitude: (rij - rji).abs(),
                });
            }
            if rij <= 0.0 {
                violations.push(MetricViolation {
                    axiom: "positivity",
                    witness: format!("{} {}", net.id(sample[i]), net.id(sample[j])),
                    magnitude: rij,
                });
            }
        }
    }
    let mut triples = 0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                if i == j || j == k || i == k {
                    continue;
                }
                triples += 1;
                let excess = r[i][k] - r[i][j] - r[j][k];
                if excess > slack {
                    violations.push(MetricViolation {
                        axiom: "triangle",
                        witness: format!(
                            "{} {} {}",
                            net.id(sample[i]),
                            net.id(sample[j]),
                            net.id(sample[k])
                        ),
                        magnitude: excess,
                    });
                }
            }
        }
    }
    Ok(MetricReport {
        pairs_checked: pairs,
        triples_checked: triples,
        violations,
    })
}
