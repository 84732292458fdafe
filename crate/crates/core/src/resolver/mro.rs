//! C3 linearization of class hierarchies.

use std::collections::HashMap;
use std::fmt::Display;
use std::hash::Hash;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MroError {
    #[error("cannot linearize {class}: no consistent order for {}", remaining.join(", "))]
    Inconsistent { class: String, remaining: Vec<String> },
    #[error("inheritance cycle through {class}")]
    Cycle { class: String },
}

/// Linearization of `class`, starting with `class` itself. `bases` returns
/// the direct bases of a class in declaration order.
pub fn c3_linearize<N, F>(class: &N, mut bases: F) -> Result<Vec<N>, MroError>
where
    N: Clone + Eq + Hash + Display,
    F: FnMut(&N) -> Vec<N>,
{
    let mut memo = HashMap::new();
    let mut stack = Vec::new();
    linearize(class, &mut bases, &mut memo, &mut stack)
}

fn linearize<N, F>(
    class: &N,
    bases: &mut F,
    memo: &mut HashMap<N, Vec<N>>,
    stack: &mut Vec<N>,
) -> Result<Vec<N>, MroError>
where
    N: Clone + Eq + Hash + Display,
    F: FnMut(&N) -> Vec<N>,
{
    if let Some(done) = memo.get(class) {
        return Ok(done.clone());
    }
    if stack.contains(class) {
        return Err(MroError::Cycle {
            class: class.to_string(),
        });
    }
    stack.push(class.clone());
    let direct = bases(class);
    let mut sequences = Vec::with_capacity(direct.len() + 1);
    for base in &direct {
        sequences.push(linearize(base, bases, memo, stack)?);
    }
    sequences.push(direct);
    stack.pop();

    let mut result = vec![class.clone()];
    merge(&mut sequences, &mut result).map_err(|remaining| MroError::Inconsistent {
        class: class.to_string(),
        remaining: remaining.iter().map(ToString::to_string).collect(),
    })?;
    memo.insert(class.clone(), result.clone());
    Ok(result)
}

/// Repeatedly takes the first head that appears in no tail. On failure
/// returns the heads that were left.
fn merge<N: Clone + Eq>(sequences: &mut [Vec<N>], out: &mut Vec<N>) -> Result<(), Vec<N>> {
    let mut starts = vec![0usize; sequences.len()];
    loop {
        let heads: Vec<&N> = sequences
            .iter()
            .zip(&starts)
            .filter_map(|(seq, &s)| seq.get(s))
            .collect();
        if heads.is_empty() {
            return Ok(());
        }
        let in_tail = |cand: &N| {
            sequences
                .iter()
                .zip(&starts)
                .any(|(seq, &s)| seq.get(s + 1..).is_some_and(|t| t.contains(cand)))
        };
        let Some(next) = heads.iter().find(|h| !in_tail(h)).map(|h| (*h).clone()) else {
            let mut remaining: Vec<N> = Vec::new();
            for h in heads {
                if !remaining.contains(h) {
                    remaining.push(h.clone());
                }
            }
            return Err(remaining);
        };
        for (seq, s) in sequences.iter().zip(starts.iter_mut()) {
            if seq.get(*s) == Some(&next) {
                *s += 1;
            }
        }
        out.push(next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(pairs: &[(&'static str, &[&'static str])]) -> impl FnMut(&String) -> Vec<String> {
        let map: HashMap<String, Vec<String>> = pairs
            .iter()
            .map(|(c, bs)| (c.to_string(), bs.iter().map(|b| b.to_string()).collect()))
            .collect();
        move |c: &String| map.get(c).cloned().unwrap_or_default()
    }

    #[test]
    fn diamond() {
        let bases = table(&[("D", &["B", "C"]), ("B", &["A"]), ("C", &["A"])]);
        let mro = c3_linearize(&"D".to_string(), bases).unwrap();
        assert_eq!(mro, ["D", "B", "C", "A"]);
    }

    #[test]
    fn inconsistent_order_names_classes() {
        // X(A, B) and Y(B, A) cannot both hold in Z(X, Y).
        let bases = table(&[("X", &["A", "B"]), ("Y", &["B", "A"]), ("Z", &["X", "Y"])]);
        let err = c3_linearize(&"Z".to_string(), bases).unwrap_err();
        match err {
            MroError::Inconsistent { class, remaining } => {
                assert_eq!(class, "Z");
                assert!(remaining.contains(&"A".to_string()));
                assert!(remaining.contains(&"B".to_string()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cycle_is_reported() {
        let bases = table(&[("A", &["B"]), ("B", &["A"])]);
        assert!(matches!(
            c3_linearize(&"A".to_string(), bases),
            Err(MroError::Cycle { .. })
        ));
    }
}
