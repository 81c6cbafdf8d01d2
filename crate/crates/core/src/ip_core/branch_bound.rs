use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::lp_core::simplex::{self, LinearProgram, Status};

struct Node {
    lower: Vec<BigInt>,
    upper: Vec<Option<BigInt>>,
}

/// Integer optimum of `max obj·z, rows·z = rhs, z >= 0` restricted to
/// `z <= root_upper`. Returns `(obj·z*, z*)`.
pub(crate) fn branch_and_bound(
    rows: &[Vec<BigInt>],
    rhs: &[BigInt],
    obj: &[BigInt],
    root_upper: Vec<Option<BigInt>>,
    budget: u64,
) -> Result<Option<(BigInt, Vec<BigInt>)>> {
    let n = obj.len();
    let mut stack = vec![Node {
        lower: vec![BigInt::from(0); n],
        upper: root_upper,
    }];
    let mut incumbent: Option<(BigInt, Vec<BigInt>)> = None;
    let mut nodes = 0u64;
    while let Some(node) = stack.pop() {
        nodes += 1;
        if nodes > budget {
            return Err(Error::NodeBudget(budget));
        }
        let out = simplex::solve(&LinearProgram {
            rows: rows.to_vec(),
            rhs: rhs.to_vec(),
            objective: obj.to_vec(),
            lower: node.lower.clone(),
            upper: node.upper.clone(),
        });
        match out.status {
            Status::Infeasible => continue,
            Status::Unbounded => return Err(Error::Unbounded),
            Status::Optimal => {}
        }
        let den = &out.denominator;
        let scaled: BigInt = obj.iter().zip(&out.numerators).map(|(c, x)| c * x).sum();
        let bound = scaled.div_floor(den);
        if incumbent.as_ref().is_some_and(|(v, _)| bound <= *v) {
            continue;
        }
        // most fractional: minimize |2·frac − den|, lowest index on ties
        let mut pick: Option<(usize, BigInt)> = None;
        for (j, x) in out.numerators.iter().enumerate() {
            let frac = x.mod_floor(den);
            if frac == BigInt::from(0) {
                continue;
            }
            let score = (BigInt::from(2) * frac - den).abs();
            if pick.as_ref().map_or(true, |(_, s)| score < *s) {
                pick = Some((j, score));
            }
        }
        match pick {
            None => {
                let z: Vec<BigInt> = out.numerators.iter().map(|x| x / den).collect();
                incumbent = Some((bound, z));
            }
            Some((j, _)) => {
                let fl = out.numerators[j].div_floor(den);
                let mut down = Node {
                    lower: node.lower.clone(),
                    upper: node.upper.clone(),
                };
                down.upper[j] = Some(fl.clone());
                let mut up = node;
                up.lower[j] = fl + 1;
                if up.upper[j].as_ref().map_or(true, |u| *u >= up.lower[j]) {
                    stack.push(down);
                    stack.push(up);
                } else {
                    stack.push(down);
                }
            }
        }
    }
    Ok(incumbent)
}
