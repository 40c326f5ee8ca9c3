use std::collections::VecDeque;

use super::Position;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub to: usize,
    /// Link length in meters; zero for abstract links.
    pub distance: f64,
}

/// Undirected D2D connectivity graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    adj: Vec<Vec<Edge>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n] }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(i, j, 0.0);
            }
        }
        g
    }

    pub fn add_edge(&mut self, i: usize, j: usize, distance: f64) {
        if i == j || self.has_edge(i, j) {
            return;
        }
        self.adj[i].push(Edge { to: j, distance });
        self.adj[j].push(Edge { to: i, distance });
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[Edge] {
        &self.adj[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].iter().any(|e| e.to == j)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Breadth-first predecessors from `src`; `pred[src] = Some(src)`.
    pub fn bfs(&self, src: usize) -> Vec<Option<usize>> {
        let mut pred = vec![None; self.len()];
        pred[src] = Some(src);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for e in &self.adj[u] {
                if pred[e.to].is_none() {
                    pred[e.to] = Some(u);
                    queue.push_back(e.to);
                }
            }
        }
        pred
    }

    /// Shortest-hop path from `src` to `dst`, both inclusive.
    pub fn path(&self, src: usize, dst: usize) -> Option<Vec<usize>> {
        let pred = self.bfs(src);
        pred[dst]?;
        let mut path = vec![dst];
        let mut cur = dst;
        while cur != src {
            cur = pred[cur]?;
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }

    pub fn edge_distance(&self, i: usize, j: usize) -> Option<f64> {
        self.adj[i].iter().find(|e| e.to == j).map(|e| e.distance)
    }

    /// Connected-component label for every node (labels are the smallest
    /// node id of the component).
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.len()];
        for s in 0..self.len() {
            if label[s] != usize::MAX {
                continue;
            }
            for (v, p) in self.bfs(s).into_iter().enumerate() {
                if p.is_some() {
                    label[v] = s;
                }
            }
        }
        label
    }
}

/// Edge between every pair closer than or exactly `r_d` meters apart.
pub fn d2d_graph(positions: &[Position], r_d: f64) -> Graph {
    let mut g = Graph::empty(positions.len());
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let dist = (positions[i][0] - positions[j][0]).hypot(positions[i][1] - positions[j][1]);
            if dist <= r_d {
                g.add_edge(i, j, dist);
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_paths_and_components() {
        let mut g = Graph::empty(5);
        g.add_edge(0, 1, 1.0);
        g.add_edge(1, 2, 1.0);
        g.add_edge(3, 4, 1.0);
        assert_eq!(g.path(0, 2), Some(vec![0, 1, 2]));
        assert_eq!(g.path(0, 3), None);
        assert_eq!(g.components(), vec![0, 0, 0, 3, 3]);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn radius_extremes() {
        let p = [[0.0, 0.0], [1.0, 1.0], [3.0, 0.5]];
        assert_eq!(d2d_graph(&p, 0.0).edge_count(), 0);
        assert_eq!(d2d_graph(&p, 10.0), {
            let mut g = Graph::empty(3);
            g.add_edge(0, 1, 2f64.sqrt());
            g.add_edge(0, 2, 3.0f64.hypot(0.5));
            g.add_edge(1, 2, 2.0f64.hypot(0.5));
            g
        });
    }
}
