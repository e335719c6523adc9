//! Merge sequences: the ordered record of cluster merges that encodes a
//! dendrogram.

use crate::error::{Error, Result};
use crate::union_find::UnionFind;

/// One merge event. For single linkage `a`/`b` are the two points whose edge
/// caused the merge; for average linkage they are the smallest original point
/// id of each merging cluster. `distance` is the linkage height (squared
/// scale for average linkage) and `size` the resulting cluster size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub step: u32,
    pub a: u32,
    pub b: u32,
    pub distance: f64,
    pub size: u32,
}

/// Ordered list of merge events over `n` points. Complete iff `n - 1` merges
/// were recorded (a single cluster remains).
#[derive(Debug, Clone, PartialEq)]
pub struct MergeSequence {
    n: usize,
    merges: Vec<Merge>,
    complete: bool,
}

impl MergeSequence {
    pub fn new(n: usize, merges: Vec<Merge>) -> Self {
        assert!(merges.len() < n.max(1), "at most n-1 merges");
        let complete = merges.len() + 1 == n;
        Self {
            n,
            merges,
            complete,
        }
    }

    #[inline]
    pub fn point_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.merges.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.merges.is_empty()
    }

    /// True iff the sequence reaches a single cluster.
    #[inline]
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn distances(&self) -> impl Iterator<Item = f64> + '_ {
        self.merges.iter().map(|m| m.distance)
    }

    /// Replays the first `steps` merges into a fresh union-find.
    pub fn replay(&self, steps: usize) -> UnionFind {
        let mut uf = UnionFind::new(self.n);
        for m in &self.merges[..steps] {
            uf.union(m.a, m.b);
        }
        uf
    }
}

/// Incrementally records merges against a union-find.
#[derive(Debug)]
pub struct MergeRecorder {
    uf: UnionFind,
    merges: Vec<Merge>,
}

impl MergeRecorder {
    pub fn new(n: usize) -> Self {
        Self {
            uf: UnionFind::new(n),
            merges: Vec::with_capacity(n.saturating_sub(1)),
        }
    }

    #[inline]
    pub fn clusters(&self) -> usize {
        self.uf.clusters()
    }

    pub fn uf(&mut self) -> &mut UnionFind {
        &mut self.uf
    }

    /// Merges the clusters of `a` and `b` if distinct, recording the event.
    /// Returns the new root on success.
    pub fn merge(&mut self, a: u32, b: u32, distance: f64) -> Option<u32> {
        let root = self.uf.union(a, b)?;
        let step = self.merges.len() as u32;
        self.merges.push(Merge {
            step,
            a,
            b,
            distance,
            size: self.uf.size_of(root),
        });
        Some(root)
    }

    pub fn finish(self) -> MergeSequence {
        MergeSequence::new(self.uf.len(), self.merges)
    }
}

/// Errors if the sequence is not complete.
pub fn require_complete(hc: &MergeSequence) -> Result<()> {
    if hc.is_complete() {
        Ok(())
    } else {
        Err(Error::IncompleteDendrogram {
            clusters: hc.point_count() - hc.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recorder_tracks_completeness() {
        let mut rec = MergeRecorder::new(3);
        rec.merge(0, 1, 1.0);
        assert!(rec.merge(0, 1, 1.0).is_none());
        let hc = rec.finish();
        assert!(!hc.is_complete());
        assert_eq!(hc.len(), 1);

        let mut rec = MergeRecorder::new(3);
        rec.merge(0, 1, 1.0);
        rec.merge(2, 1, 2.0);
        let hc = rec.finish();
        assert!(hc.is_complete());
        assert_eq!(hc.merges()[1].size, 3);
    }

    #[test]
    fn single_point_sequence_is_complete() {
        let hc = MergeSequence::new(1, vec![]);
        assert!(hc.is_complete());
    }
}
