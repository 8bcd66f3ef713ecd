//! Weighted MaxSAT: a DIMACS WCNF parser, the satisfied-weight objective,
//! and a brute-force reference optimizer for small instances.
//!
//! The objective maximizes the total weight of satisfied clauses directly;
//! no sign flip is applied.

use serde::{Deserialize, Serialize};

use crate::error::WcnfError;
use crate::scalar::Real;
use crate::space::SearchSpace;

/// One weighted clause: a positive weight and a nonempty literal list.
/// Positive literal `v` means variable `v` is true; negative means false.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub weight: f64,
    pub literals: Vec<i64>,
}

/// A parsed WCNF formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WcnfInstance {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
    /// Hard-clause weight marker from the header, when present.
    pub top: Option<f64>,
}

impl WcnfInstance {
    /// Binary search space with one categorical dimension per variable
    /// (level 1 = true).
    pub fn space<T: Real>(&self) -> SearchSpace<T> {
        SearchSpace::categorical(vec![2; self.num_vars])
            .expect("wcnf space construction cannot fail for nonempty instances")
    }

    /// Total weight across all clauses: an upper bound on any assignment.
    pub fn total_weight(&self) -> f64 {
        self.clauses.iter().map(|c| c.weight).sum()
    }
}

/// Parse DIMACS WCNF text: `c` comments, a single `p wcnf nvars nclauses
/// [top]` header, then one `weight lit … 0` line per clause.
pub fn parse_wcnf(text: &str) -> Result<WcnfInstance, WcnfError> {
    let mut instance: Option<WcnfInstance> = None;
    let mut declared = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens[0] == "p" {
            if instance.is_some() {
                return Err(WcnfError::DuplicateHeader { line });
            }
            if tokens.len() < 4 || tokens.len() > 5 || tokens[1] != "wcnf" {
                return Err(WcnfError::BadHeader { line });
            }
            let num_vars: usize = tokens[2]
                .parse()
                .map_err(|_| WcnfError::BadHeader { line })?;
            declared = tokens[3]
                .parse()
                .map_err(|_| WcnfError::BadHeader { line })?;
            let top = match tokens.get(4) {
                Some(t) => Some(
                    t.parse::<f64>()
                        .ok()
                        .filter(|w| *w > 0.0)
                        .ok_or(WcnfError::BadHeader { line })?,
                ),
                None => None,
            };
            instance = Some(WcnfInstance {
                num_vars,
                clauses: Vec::new(),
                top,
            });
            continue;
        }

        let inst = instance
            .as_mut()
            .ok_or(WcnfError::ClauseBeforeHeader { line })?;
        let weight: f64 = tokens[0]
            .parse()
            .ok()
            .filter(|w: &f64| *w > 0.0 && w.is_finite())
            .ok_or_else(|| WcnfError::BadWeight {
                line,
                token: tokens[0].to_string(),
            })?;
        if tokens.last() != Some(&"0") {
            return Err(WcnfError::MissingTerminator { line });
        }
        let body = &tokens[1..tokens.len() - 1];
        if body.is_empty() {
            return Err(WcnfError::EmptyClause { line });
        }
        let mut literals = Vec::with_capacity(body.len());
        for tok in body {
            let lit: i64 = tok
                .parse()
                .ok()
                .filter(|l| *l != 0)
                .ok_or_else(|| WcnfError::BadLiteral {
                    line,
                    token: tok.to_string(),
                })?;
            if lit.unsigned_abs() as usize > inst.num_vars {
                return Err(WcnfError::LiteralOutOfRange {
                    line,
                    literal: lit,
                    num_vars: inst.num_vars,
                });
            }
            literals.push(lit);
        }
        inst.clauses.push(Clause { weight, literals });
    }
    let instance = instance.ok_or(WcnfError::MissingHeader)?;
    if instance.clauses.len() != declared {
        return Err(WcnfError::ClauseCountMismatch {
            declared,
            found: instance.clauses.len(),
        });
    }
    Ok(instance)
}

/// Render an instance back to DIMACS WCNF text. Weights print in shortest
/// round-trip form, so `parse_wcnf(serialize_wcnf(i)) == i`.
pub fn serialize_wcnf(instance: &WcnfInstance) -> String {
    let mut out = String::new();
    match instance.top {
        Some(top) => out.push_str(&format!(
            "p wcnf {} {} {}\n",
            instance.num_vars,
            instance.clauses.len(),
            top
        )),
        None => out.push_str(&format!(
            "p wcnf {} {}\n",
            instance.num_vars,
            instance.clauses.len()
        )),
    }
    for clause in &instance.clauses {
        out.push_str(&format!("{}", clause.weight));
        for lit in &clause.literals {
            out.push_str(&format!(" {lit}"));
        }
        out.push_str(" 0\n");
    }
    out
}

/// Total weight of clauses satisfied by `assignment` (maximization scale).
///
/// Panics if the assignment length disagrees with the instance.
pub fn maxsat_value<T: Real>(instance: &WcnfInstance, assignment: &[bool]) -> T {
    assert_eq!(
        assignment.len(),
        instance.num_vars,
        "assignment length must match the variable count"
    );
    let mut total = T::zero();
    for clause in &instance.clauses {
        let satisfied = clause.literals.iter().any(|&lit| {
            let var = (lit.unsigned_abs() - 1) as usize;
            if lit > 0 {
                assignment[var]
            } else {
                !assignment[var]
            }
        });
        if satisfied {
            total = total + T::of(clause.weight);
        }
    }
    total
}

/// Exhaustive optimum over all 2^n assignments. Intended for small
/// instances; panics above 25 variables.
pub fn brute_force_optimum(instance: &WcnfInstance) -> (Vec<bool>, f64) {
    assert!(
        instance.num_vars <= 25,
        "brute force is limited to 25 variables"
    );
    let n = instance.num_vars;
    let mut best_mask = 0u64;
    let mut best = f64::NEG_INFINITY;
    for mask in 0..(1u64 << n) {
        let assignment: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let v: f64 = maxsat_value(instance, &assignment);
        if v > best {
            best = v;
            best_mask = mask;
        }
    }
    let assignment = (0..n).map(|i| best_mask >> i & 1 == 1).collect();
    (assignment, best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    const TOY: &str = "c toy instance\np wcnf 2 2\n3 1 2 0\n5 -1 0\n";

    #[test]
    fn toy_instance_hand_values() {
        let inst = parse_wcnf(TOY).unwrap();
        assert_eq!(inst.num_vars, 2);
        assert_eq!(inst.clauses.len(), 2);
        assert_eq!(inst.top, None);
        // x1 false, x2 true satisfies both clauses.
        assert_eq!(maxsat_value::<f64>(&inst, &[false, true]), 8.0);
        // All-false: first clause unsatisfied, contributes nothing.
        assert_eq!(maxsat_value::<f64>(&inst, &[false, false]), 5.0);
        assert_eq!(maxsat_value::<f64>(&inst, &[true, true]), 3.0);
        let (best, v) = brute_force_optimum(&inst);
        assert_eq!(v, 8.0);
        assert_eq!(best, vec![false, true]);
    }

    #[test]
    fn header_with_top_weight() {
        let text = "p wcnf 3 2 10\n10 1 2 3 0\n2 -2 0\n";
        let inst = parse_wcnf(text).unwrap();
        assert_eq!(inst.top, Some(10.0));
        assert_eq!(inst.total_weight(), 12.0);
        assert_eq!(inst.space::<f64>().d_h(), 3);
    }

    #[test]
    fn parser_rejects_malformed_input_with_line_numbers() {
        let cases: Vec<(&str, WcnfError)> = vec![
            (
                "p cnf 2 1\n1 1 0\n",
                WcnfError::BadHeader { line: 1 },
            ),
            (
                "1 1 0\np wcnf 2 1\n",
                WcnfError::ClauseBeforeHeader { line: 1 },
            ),
            (
                "p wcnf 2 1\np wcnf 2 1\n1 1 0\n",
                WcnfError::DuplicateHeader { line: 2 },
            ),
            (
                "p wcnf 2 2\n1 1 0\n-3 2 0\n",
                WcnfError::BadWeight {
                    line: 3,
                    token: "-3".into(),
                },
            ),
            (
                "p wcnf 2 1\n1 1 x 0\n",
                WcnfError::BadLiteral {
                    line: 2,
                    token: "x".into(),
                },
            ),
            (
                "p wcnf 2 1\n1 1 0 2 0\n",
                WcnfError::BadLiteral {
                    line: 2,
                    token: "0".into(),
                },
            ),
            (
                "p wcnf 2 1\n1 3 0\n",
                WcnfError::LiteralOutOfRange {
                    line: 2,
                    literal: 3,
                    num_vars: 2,
                },
            ),
            (
                "p wcnf 2 1\n1 1 2\n",
                WcnfError::MissingTerminator { line: 2 },
            ),
            ("p wcnf 2 1\n1 0\n", WcnfError::EmptyClause { line: 2 }),
            ("c nothing here\n", WcnfError::MissingHeader),
            (
                "p wcnf 2 3\n1 1 0\n",
                WcnfError::ClauseCountMismatch {
                    declared: 3,
                    found: 1,
                },
            ),
        ];
        for (text, expected) in cases {
            match parse_wcnf(text) {
                Err(e) => assert_eq!(e, expected, "input: {text:?}"),
                Ok(_) => panic!("expected {expected:?} for {text:?}"),
            }
        }
    }

    #[test]
    fn serialize_round_trips_exactly() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for _ in 0..50 {
            let n = rng.gen_range(1..=8);
            let m = rng.gen_range(1..=12);
            let clauses = (0..m)
                .map(|_| {
                    let len = rng.gen_range(1..=3.min(n));
                    let literals = (0..len)
                        .map(|_| {
                            let v = rng.gen_range(1..=n) as i64;
                            if rng.gen::<bool>() {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect();
                    Clause {
                        weight: rng.gen_range(1..100) as f64 / 4.0,
                        literals,
                    }
                })
                .collect();
            let inst = WcnfInstance {
                num_vars: n,
                clauses,
                top: if rng.gen::<bool>() { Some(1000.0) } else { None },
            };
            let text = serialize_wcnf(&inst);
            assert_eq!(parse_wcnf(&text).unwrap(), inst, "round trip failed:\n{text}");
        }
    }

    #[test]
    fn shipped_instances_parse_and_have_slack() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/wcnf");
        for name in ["toy", "mix6", "mix7", "mix8", "mix9"] {
            let text = std::fs::read_to_string(format!("{dir}/{name}.wcnf"))
                .unwrap_or_else(|e| panic!("missing shipped instance {name}: {e}"));
            let inst = parse_wcnf(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            let (_, best) = brute_force_optimum(&inst);
            assert!(best > 0.0, "{name} must have a satisfiable clause");
            // Conflicting clauses keep the optimum strictly below the total
            // weight, so the search problem is not vacuous.
            if name != "toy" {
                assert!(
                    best < inst.total_weight(),
                    "{name}: optimum {best} should not satisfy everything"
                );
            }
        }
    }

    #[test]
    fn brute_force_matches_exhaustive_recheck() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..10 {
            let n = rng.gen_range(2..=6);
            let m = rng.gen_range(2..=10);
            let clauses: Vec<Clause> = (0..m)
                .map(|_| {
                    let len = rng.gen_range(1..=n);
                    Clause {
                        weight: rng.gen_range(1..=9) as f64,
                        literals: (0..len)
                            .map(|_| {
                                let v = rng.gen_range(1..=n) as i64;
                                if rng.gen::<bool>() {
                                    v
                                } else {
                                    -v
                                }
                            })
                            .collect(),
                    }
                })
                .collect();
            let inst = WcnfInstance {
                num_vars: n,
                clauses,
                top: None,
            };
            let (best_assignment, best) = brute_force_optimum(&inst);
            assert_eq!(maxsat_value::<f64>(&inst, &best_assignment), best);
            for mask in 0..(1u32 << n) {
                let a: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
                assert!(maxsat_value::<f64>(&inst, &a) <= best);
            }
        }
    }
}
