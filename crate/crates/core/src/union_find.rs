//! Union-find over point ids, tracking cluster sizes and minimum member ids.

/// Disjoint-set clustering state. `find` gives the current cluster id of a
/// point; each successful `union` reduces the cluster count by exactly one.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
    size: Vec<u32>,
    min_id: Vec<u32>,
    clusters: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            size: vec![1; n],
            min_id: (0..n as u32).collect(),
            clusters: n,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Current cluster id (root) of `x`, with path compression.
    pub fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != cur {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    pub fn same(&mut self, a: u32, b: u32) -> bool {
        self.find(a) == self.find(b)
    }

    /// Merges the clusters of `a` and `b`. Returns the new root, or `None`
    /// if they already share a cluster.
    pub fn union(&mut self, a: u32, b: u32) -> Option<u32> {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if self.rank[ra as usize] < self.rank[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        if self.rank[ra as usize] == self.rank[rb as usize] {
            self.rank[ra as usize] += 1;
        }
        self.size[ra as usize] += self.size[rb as usize];
        self.min_id[ra as usize] = self.min_id[ra as usize].min(self.min_id[rb as usize]);
        self.clusters -= 1;
        Some(ra)
    }

    /// Size of the cluster containing `x`.
    pub fn size_of(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.size[r as usize]
    }

    /// Smallest original point id in the cluster containing `x`.
    pub fn min_id_of(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.min_id[r as usize]
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_decrements_cluster_count_once() {
        let mut uf = UnionFind::new(4);
        assert_eq!(uf.clusters(), 4);
        assert!(uf.union(0, 1).is_some());
        assert_eq!(uf.clusters(), 3);
        assert!(uf.union(1, 0).is_none());
        assert_eq!(uf.clusters(), 3);
        assert_eq!(uf.size_of(0), 2);
    }

    #[test]
    fn find_is_idempotent_and_min_id_tracks() {
        let mut uf = UnionFind::new(6);
        uf.union(5, 3);
        uf.union(3, 4);
        let r = uf.find(4);
        assert_eq!(uf.find(r), r);
        assert_eq!(uf.min_id_of(5), 3);
        assert_eq!(uf.size_of(4), 3);
    }
}
