//! End-to-end preprocessing: augmentation, positivization, rough and min
//! balancing, hierarchy; plus queries mapped back to the input costs.

use serde::Serialize;

use crate::balance::{rough_balance, RoughStats};
use crate::error::{Error, Result};
use crate::graph::{make_strongly_connected, positivize, Cost, Graph, Partition};
use crate::hierarchy::{build_hierarchy, ComponentHierarchy};
use crate::min_balance::{min_balance, MinBalanceConfig, MinBalanceStats};
use crate::oracles::Xi;
use crate::sssp::{Engine, ShortestPaths};

#[derive(Clone, Debug, Default, Serialize)]
pub struct PipelineStats {
    pub augmented_arcs: usize,
    pub classes: usize,
    pub rough: RoughStats,
    pub min_balance: MinBalanceStats,
    pub contractions: usize,
}

/// Preprocessed graph. Every arc (u, v, c) of the augmented input satisfies
/// `reduced cost = scale * c + phi(class u) - phi(class v)`.
#[derive(Clone, Debug)]
pub struct Preprocessed {
    pub rho: u32,
    /// Input plus the arcs added for strong connectivity.
    pub augmented: Graph,
    /// Cost of the arcs added for strong connectivity.
    pub big_m: Cost,
    pub classes: Partition,
    /// Contracted graph under the final reduced costs.
    pub reduced: Graph,
    /// Numerators over `scale`, one per class.
    pub phi: Vec<Cost>,
    pub scale: Cost,
    /// Present for rho = 0 only.
    pub hierarchy: Option<ComponentHierarchy>,
    pub stats: PipelineStats,
}

impl Preprocessed {
    pub fn node_count(&self) -> usize {
        self.classes.len()
    }

    /// Reduced costs of the augmented graph, numerators over `scale`.
    pub fn augmented_costs(&self) -> Result<Vec<Cost>> {
        self.augmented
            .arcs()
            .iter()
            .map(|a| {
                self.scale
                    .checked_mul(a.cost)
                    .and_then(|x| x.checked_add(self.potential(a.tail)))
                    .and_then(|x| x.checked_sub(self.potential(a.head)))
                    .ok_or(Error::Overflow("reduced cost"))
            })
            .collect()
    }

    pub fn xi(&self) -> Xi {
        Xi::from_rho(self.rho)
    }

    /// Potential of an input node, numerator over `scale`.
    pub fn potential(&self, v: usize) -> Cost {
        self.phi[self.classes.class_of(v)]
    }

    pub fn engine(&self) -> Result<Engine<'_>> {
        let h = self
            .hierarchy
            .as_ref()
            .ok_or(Error::UnsupportedRho(self.rho))?;
        Engine::new(&self.reduced, h)
    }

    /// Maps a query on the contracted graph to distances in the input graph;
    /// None marks unreachable targets.
    pub fn map_distances(&self, sp: &ShortestPaths, s: usize) -> Result<Vec<Option<Cost>>> {
        let cs = self.classes.class_of(s);
        if sp.source != cs {
            return Err(Error::HierarchyMismatch(
                "query source does not match".into(),
            ));
        }
        (0..self.node_count())
            .map(|t| {
                let ct = self.classes.class_of(t);
                let num = sp.dist[ct]
                    .checked_sub(self.phi[cs])
                    .and_then(|x| x.checked_add(self.phi[ct]))
                    .ok_or(Error::Overflow("distance mapping"))?;
                if num % self.scale != 0 {
                    return Err(Error::HierarchyMismatch(format!(
                        "distance to {t} is not integral"
                    )));
                }
                let d = num / self.scale;
                Ok((d < self.big_m).then_some(d))
            })
            .collect()
    }

    pub fn distances_from(&self, s: usize) -> Result<Vec<Option<Cost>>> {
        self.query(&self.engine()?, s)
    }

    pub fn query(&self, engine: &Engine<'_>, s: usize) -> Result<Vec<Option<Cost>>> {
        if s >= self.node_count() {
            return Err(Error::NodeOutOfRange {
                node: s,
                n: self.node_count(),
            });
        }
        let sp = engine.run(self.classes.class_of(s))?;
        self.map_distances(&sp, s)
    }

    /// All-pairs distances, one row per source handed to `sink`.
    pub fn apsp_with<E: From<Error>>(
        &self,
        mut sink: impl FnMut(usize, Vec<Option<Cost>>) -> std::result::Result<(), E>,
    ) -> std::result::Result<(), E> {
        let engine = self.engine()?;
        for s in 0..self.node_count() {
            sink(s, self.query(&engine, s)?)?;
        }
        Ok(())
    }

    pub fn apsp(&self) -> Result<Vec<Vec<Option<Cost>>>> {
        let mut rows = Vec::with_capacity(self.node_count());
        self.apsp_with(|_, row| {
            rows.push(row);
            Ok::<_, Error>(())
        })?;
        Ok(rows)
    }
}

fn stage(name: &'static str) -> impl Fn(Error) -> Error {
    move |e| Error::Stage {
        stage: name,
        source: Box::new(e),
    }
}

/// Runs the full preprocessing. The hierarchy is built only for rho = 0.
pub fn preprocess(g: &Graph, cfg: &MinBalanceConfig) -> Result<Preprocessed> {
    let aug = make_strongly_connected(g).map_err(stage("augmentation"))?;
    let pos = positivize(&aug.graph).map_err(stage("positivization"))?;
    let k = pos.graph.node_count();
    let mut stats = PipelineStats {
        augmented_arcs: aug.added.len(),
        classes: k,
        ..Default::default()
    };
    let rho_scale: Cost = 1 << cfg.rho;

    let (reduced, phi, scale, hierarchy) = if k == 1 {
        let h = (cfg.rho == 0)
            .then(|| ComponentHierarchy::new(1, vec![]))
            .transpose()?;
        (pos.graph.clone(), vec![0], pos.potential.scale, h)
    } else {
        let rb = rough_balance(&pos.graph).map_err(stage("rough balance"))?;
        let g3 = rb
            .potential
            .apply(&pos.graph)
            .map_err(stage("rough balance"))?;
        let mb = min_balance(&g3, cfg).map_err(stage("min balance"))?;
        let g4 = mb.potential.apply(&g3).map_err(stage("min balance"))?;
        let s2 = rb.potential.scale;
        let phi = (0..k)
            .map(|v| {
                s2.checked_mul(pos.potential.values[v])
                    .and_then(|x| x.checked_add(rb.potential.values[v]))
                    .and_then(|x| x.checked_mul(rho_scale))
                    .and_then(|x| x.checked_add(mb.potential.values[v]))
                    .ok_or(Error::Overflow("composed potential"))
            })
            .collect::<Result<Vec<_>>>()?;
        let scale = pos
            .potential
            .scale
            .checked_mul(s2)
            .and_then(|x| x.checked_mul(rho_scale))
            .ok_or(Error::Overflow("composed scale"))?;
        let h = if cfg.rho == 0 {
            Some(build_hierarchy(&mb.trace, 0).map_err(stage("hierarchy"))?)
        } else {
            None
        };
        stats.rough = rb.stats;
        stats.contractions = mb.trace.events().len();
        stats.min_balance = mb.stats;
        (g4, phi, scale, h)
    };
    Ok(Preprocessed {
        rho: cfg.rho,
        augmented: aug.graph,
        big_m: aug.big_m,
        classes: pos.classes,
        reduced,
        phi,
        scale,
        hierarchy,
        stats,
    })
}
