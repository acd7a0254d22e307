use std::path::Path;
use std::sync::Arc;

use rand::RngCore;

use super::{Adversary, DistributionHandle, RoundSetup};
use crate::domain::{Outcome, OutcomeDistribution, Transcript};
use crate::{Error, Result};

/// Replays a per-round table of contexts and outcome distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedAdversary {
    rows: Vec<(Vec<f64>, Arc<OutcomeDistribution>)>,
}

impl ScriptedAdversary {
    pub fn new(rows: Vec<(Vec<f64>, OutcomeDistribution)>) -> Self {
        Self {
            rows: rows.into_iter().map(|(x, d)| (x, Arc::new(d))).collect(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read script {}: {e}", path.display())))?;
        parse_script(&text)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl Adversary for ScriptedAdversary {
    fn next_round(&mut self, t: usize, _prefix: &Transcript, _rng: &mut dyn RngCore) -> Result<RoundSetup> {
        let (context, dist) = self.rows.get(t.wrapping_sub(1)).ok_or_else(|| {
            Error::config(format!("script has {} rows but round {t} was requested", self.rows.len()))
        })?;
        Ok(RoundSetup {
            context: context.clone(),
            handle: DistributionHandle::exact(dist.clone()),
        })
    }
}

/// Parses the columnar script format:
///
/// ```text
/// # comments and blank lines are ignored
/// context 2 dim 2
/// 0.1 0.7   0.2 0.4 0.5   0.9 0.1 0.5
/// ```
///
/// Each row holds the context values followed by one `(y_1 .. y_d, prob)`
/// group per support point.
pub fn parse_script(text: &str) -> Result<ScriptedAdversary> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::config("script is empty"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (context_dim, dim) = match fields.as_slice() {
        ["context", c, "dim", d] => (parse_count(c)?, parse_count(d)?),
        _ => {
            return Err(Error::config(
                "script header must read `context <count> dim <count>`",
            ))
        }
    };
    if dim == 0 {
        return Err(Error::config("script outcome dimension must be positive"));
    }
    let mut rows = Vec::new();
    for (n, line) in lines {
        let values = line
            .split_whitespace()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::config(format!("script line {n}: `{v}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() < context_dim + dim + 1 || (values.len() - context_dim) % (dim + 1) != 0 {
            return Err(Error::config(format!(
                "script line {n}: expected {context_dim} context values followed by groups of {} numbers",
                dim + 1
            )));
        }
        let (context, groups) = values.split_at(context_dim);
        let mut support = Vec::new();
        let mut probs = Vec::new();
        for g in groups.chunks_exact(dim + 1) {
            support.push(Outcome::new(g[..dim].to_vec())?);
            probs.push(g[dim]);
        }
        let dist = OutcomeDistribution::new(support, probs)
            .map_err(|e| Error::config(format!("script line {n}: {e}")))?;
        rows.push((context.to_vec(), dist));
    }
    Ok(ScriptedAdversary::new(rows))
}

fn parse_count(v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::config(format!("`{v}` is not a count")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SCRIPT: &str = "# two rounds\ncontext 1 dim 2\n0.5  0.2 0.4 0.5  0.9 0.1 0.5\n\n0.7  1 1 1\n";

    #[test]
    fn replays_row_t() {
        let mut adv = parse_script(SCRIPT).unwrap();
        assert_eq!(adv.len(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r1 = adv.next_round(1, &Transcript::default(), &mut rng).unwrap();
        assert_eq!(r1.context, vec![0.5]);
        assert_eq!(r1.handle.distribution().probs(), &[0.5, 0.5]);
        let r2 = adv.next_round(2, &Transcript::default(), &mut rng).unwrap();
        assert_eq!(r2.handle.distribution().support()[0].coords(), &[1.0, 1.0]);
        assert!(adv.next_round(3, &Transcript::default(), &mut rng).is_err());
    }

    #[test]
    fn loads_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("script.txt");
        std::fs::write(&path, SCRIPT).unwrap();
        assert_eq!(ScriptedAdversary::load(&path).unwrap(), parse_script(SCRIPT).unwrap());
    }

    #[test]
    fn rejects_malformed_scripts() {
        assert!(parse_script("").is_err());
        assert!(parse_script("dim 2\n").is_err());
        assert!(parse_script("context 0 dim 1\n0.5 0.5 0.5\n").is_err());
        assert!(parse_script("context 0 dim 1\n0.5 0.9\n").is_err());
        assert!(parse_script("context 0 dim 1\n1.5 1\n").is_err());
        assert!(parse_script("context 0 dim 1\nx 1\n").is_err());
    }
}
