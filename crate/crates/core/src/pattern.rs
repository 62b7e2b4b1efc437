//! Trade patterns: the set of active producer-to-market links.

use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// A directed link from a producing country to a consuming market.
/// Domestic sales are the `producer == market` case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    pub producer: usize,
    pub market: usize,
}

impl Link {
    pub fn new(producer: usize, market: usize) -> Link {
        Link { producer, market }
    }

    pub fn is_cross_border(&self) -> bool {
        self.producer != self.market
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.producer, self.market)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("link {link} references a country outside 0..{n}")]
    OutOfRange { link: Link, n: usize },
    #[error("flow matrix is not square: {rows} rows, row {bad} has {len} entries")]
    NotSquare { rows: usize, bad: usize, len: usize },
}

/// The set of active trade links over `n` countries; the equilibrium
/// network, with domestic links included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradePattern {
    n: usize,
    links: BTreeSet<Link>,
}

impl TradePattern {
    pub fn new<I>(n: usize, links: I) -> Result<TradePattern, PatternError>
    where
        I: IntoIterator<Item = Link>,
    {
        let mut set = BTreeSet::new();
        for link in links {
            if link.producer >= n || link.market >= n {
                return Err(PatternError::OutOfRange { link, n });
            }
            set.insert(link);
        }
        Ok(TradePattern { n, links: set })
    }

    pub fn empty(n: usize) -> TradePattern {
        TradePattern {
            n,
            links: BTreeSet::new(),
        }
    }

    /// Links carrying flow above `tol` in a flow matrix `q[market][producer]`.
    pub fn from_flows(flows: &[Vec<f64>], tol: f64) -> Result<TradePattern, PatternError> {
        let n = flows.len();
        for (i, row) in flows.iter().enumerate() {
            if row.len() != n {
                return Err(PatternError::NotSquare {
                    rows: n,
                    bad: i,
                    len: row.len(),
                });
            }
        }
        let mut links = BTreeSet::new();
        for (market, row) in flows.iter().enumerate() {
            for (producer, &q) in row.iter().enumerate() {
                if q > tol {
                    links.insert(Link { producer, market });
                }
            }
        }
        Ok(TradePattern { n, links })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of active links, the `m` of the link-equation system.
    pub fn m(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn contains(&self, link: Link) -> bool {
        self.links.contains(&link)
    }

    /// Links in (producer, market) order.
    pub fn links(&self) -> impl Iterator<Item = Link> + '_ {
        self.links.iter().copied()
    }

    pub fn markets_of(&self, producer: usize) -> Vec<usize> {
        self.links
            .iter()
            .filter(|l| l.producer == producer)
            .map(|l| l.market)
            .collect()
    }

    pub fn producers_for(&self, market: usize) -> Vec<usize> {
        self.links
            .iter()
            .filter(|l| l.market == market)
            .map(|l| l.producer)
            .collect()
    }

    /// Stable identifier: the sorted link list hashed to a hex string.
    /// Equal patterns always produce equal identifiers.
    pub fn id(&self) -> String {
        // FNV-1a over the sorted (producer, market) pairs
        let mut hash: u64 = 0xcbf29ce484222325;
        let mut mix = |byte: u8| {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        };
        for link in &self.links {
            for b in (link.producer as u64).to_le_bytes() {
                mix(b);
            }
            for b in (link.market as u64).to_le_bytes() {
                mix(b);
            }
        }
        format!("{hash:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_flows_picks_positive_entries() {
        let flows = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.5, 2.0, 0.0],
            vec![0.0, 1e-12, 0.3],
        ];
        let p = TradePattern::from_flows(&flows, 1e-9).unwrap();
        assert_eq!(p.m(), 4);
        assert!(p.contains(Link::new(0, 1)));
        assert!(!p.contains(Link::new(1, 2)));
    }

    #[test]
    fn rejects_non_square() {
        let flows = vec![vec![1.0, 0.0], vec![0.0]];
        assert!(matches!(
            TradePattern::from_flows(&flows, 1e-9),
            Err(PatternError::NotSquare { .. })
        ));
    }

    #[test]
    fn id_is_stable_and_discriminating() {
        let a = TradePattern::new(3, [Link::new(0, 0), Link::new(1, 2)]).unwrap();
        let b = TradePattern::new(3, [Link::new(1, 2), Link::new(0, 0)]).unwrap();
        let c = TradePattern::new(3, [Link::new(0, 0)]).unwrap();
        assert_eq!(a.id(), b.id());
        assert_ne!(a.id(), c.id());
    }
}
