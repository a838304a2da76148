use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::ClassDataset;
use super::tree::{grow, DecisionTree, Gini, GrowParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::Class;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, d: usize) -> Option<usize> {
        match self {
            MaxFeatures::Sqrt => Some(((d as f64).sqrt().floor() as usize).max(1)),
            MaxFeatures::All => None,
            MaxFeatures::Count(m) => Some(m.clamp(1, d.max(1))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            min_samples_leaf: 5,
            min_samples_split: 7,
            max_features: MaxFeatures::Sqrt,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

/// Random-forest surrogate of the minimum-quality constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ConstraintModel<T: Scalar> {
    pub params: ForestParams,
    pub n_features: usize,
    pub trees: Vec<DecisionTree<T, [u32; 3]>>,
}

/// Index of the largest count; ties go to the worse (higher) class.
fn pessimistic_argmax<C: PartialOrd + Copy>(counts: &[C; 3]) -> usize {
    let mut best = 0;
    for k in 1..3 {
        if counts[k] >= counts[best] {
            best = k;
        }
    }
    best
}

impl<T: Scalar> ConstraintModel<T> {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    fn check(&self, x: &[T]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::Prediction(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.n_features
            )));
        }
        Ok(())
    }

    /// Class voted by each tree, in tree order.
    pub fn tree_predictions(&self, x: &[T]) -> Result<Vec<Class>> {
        self.check(x)?;
        Ok(self
            .trees
            .iter()
            .map(|t| Class::from_index(pessimistic_argmax(t.leaf(x))))
            .collect())
    }

    /// Plurality vote over the trees; ties are broken toward the higher class.
    pub fn predict_class(&self, x: &[T]) -> Result<Class> {
        self.check(x)?;
        let mut votes = [0usize; 3];
        for t in &self.trees {
            votes[pessimistic_argmax(t.leaf(x))] += 1;
        }
        Ok(Class::from_index(pessimistic_argmax(&votes)))
    }

    pub fn predict_batch(&self, rows: &[Vec<T>]) -> Result<Vec<Class>> {
        rows.iter().map(|r| self.predict_class(r)).collect()
    }
}

/// Bootstrap-trained forest with a random feature subset per split. Each
/// tree draws from its own ChaCha stream, so the result depends only on the
/// seed and not on thread scheduling.
pub fn train_constraint_classifier<T: Scalar>(
    data: &ClassDataset<T>,
    params: &ForestParams,
) -> Result<ConstraintModel<T>> {
    if data.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let present = data.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::Training("training data contains a single class".into()));
    }
    if params.n_trees == 0 {
        return Err(Error::Training("forest needs at least one tree".into()));
    }
    let d = data.n_features();
    let y: Vec<usize> = data.y.iter().map(|c| c.index()).collect();
    let grow_params = GrowParams {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split.max(2),
        min_samples_leaf: params.min_samples_leaf.max(1),
        max_features: params.max_features.resolve(d),
        min_gain: T::zero(),
    };
    let n = data.len();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(t as u64);
            let sample: Vec<usize> = if params.bootstrap {
                use rand::Rng;
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow(&data.x, &y, sample, &Gini, &grow_params, &mut rng)
        })
        .collect();
    Ok(ConstraintModel {
        params: params.clone(),
        n_features: d,
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::Dataset;
    use rand::{Rng, SeedableRng};

    fn rule_data(n: usize, seed: u64) -> ClassDataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let row: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
            y.push(if row[2] < 0.3 {
                Class::Cut
            } else if row[2] < 0.5 {
                Class::NotSteady
            } else {
                Class::Steady
            });
            x.push(row);
        }
        Dataset::new(x, y).unwrap()
    }

    fn leaf_model(leaves: &[[u32; 3]]) -> ConstraintModel<f64> {
        use crate::surrogate::tree::Node;
        ConstraintModel {
            params: ForestParams::default(),
            n_features: 1,
            trees: leaves
                .iter()
                .map(|&value| DecisionTree {
                    nodes: vec![Node::Leaf { value }],
                })
                .collect(),
        }
    }

    #[test]
    fn separable_rule_is_learned() {
        let train = rule_data(400, 1);
        let test = rule_data(200, 2);
        let params = ForestParams {
            n_trees: 30,
            max_features: MaxFeatures::All,
            ..ForestParams::default()
        };
        let m = train_constraint_classifier(&train, &params).unwrap();
        let pred = m.predict_batch(&test.x).unwrap();
        let acc = pred.iter().zip(&test.y).filter(|(a, b)| a == b).count() as f64 / 200.0;
        assert!(acc >= 0.97, "accuracy {acc}");
    }

    #[test]
    fn pure_one_feature_rule_is_exact() {
        let x: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64]).collect();
        let y: Vec<Class> = (0..60)
            .map(|i| if i < 30 { Class::Steady } else { Class::Cut })
            .collect();
        let data = Dataset::new(x, y).unwrap();
        let m = train_constraint_classifier(
            &data,
            &ForestParams {
                n_trees: 10,
                bootstrap: false,
                ..ForestParams::default()
            },
        )
        .unwrap();
        assert_eq!(m.predict_batch(&data.x).unwrap(), data.y);
    }

    #[test]
    fn same_seed_same_model() {
        let data = rule_data(200, 3);
        let p = ForestParams {
            n_trees: 12,
            seed: 9,
            ..ForestParams::default()
        };
        let a = train_constraint_classifier(&data, &p).unwrap();
        let b = train_constraint_classifier(&data, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_class_is_rejected() {
        let data = Dataset::new(vec![vec![0.0], vec![1.0]], vec![Class::Steady; 2]).unwrap();
        assert!(matches!(
            train_constraint_classifier(&data, &ForestParams::default()),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn votes_and_ties() {
        let m = leaf_model(&[[3, 0, 0]; 4]);
        assert_eq!(m.predict_class(&[0.0]).unwrap(), Class::Steady);
        let mut leaves = vec![[5, 0, 1]; 5];
        leaves.extend(vec![[0, 1, 5]; 5]);
        assert_eq!(leaf_model(&leaves).predict_class(&[0.0]).unwrap(), Class::Cut);
        // per-tree tie inside a leaf also goes to the worse class
        assert_eq!(
            leaf_model(&[[2, 2, 0]]).predict_class(&[0.0]).unwrap(),
            Class::NotSteady
        );
        assert!(m.predict_class(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn vote_is_invariant_to_tree_order() {
        let data = rule_data(150, 4);
        let mut m = train_constraint_classifier(
            &data,
            &ForestParams {
                n_trees: 15,
                ..ForestParams::default()
            },
        )
        .unwrap();
        let probe = rule_data(50, 5);
        let before = m.predict_batch(&probe.x).unwrap();
        m.trees.reverse();
        assert_eq!(m.predict_batch(&probe.x).unwrap(), before);
    }

    #[test]
    fn vote_matches_brute_force_count() {
        let data = rule_data(150, 6);
        let m = train_constraint_classifier(
            &data,
            &ForestParams {
                n_trees: 11,
                ..ForestParams::default()
            },
        )
        .unwrap();
        for row in &rule_data(100, 7).x {
            let per_tree = m.tree_predictions(row).unwrap();
            let count = |c: Class| per_tree.iter().filter(|&&p| p == c).count();
            let top = Class::ALL.iter().map(|&c| count(c)).max().unwrap();
            let expected = *Class::ALL.iter().rev().find(|&&c| count(c) == top).unwrap();
            assert_eq!(m.predict_class(row).unwrap(), expected);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let d = rule_data(200, 8);
        let x: Vec<Vec<f32>> = d.x.iter().map(|r| r.iter().map(|&v| v as f32).collect()).collect();
        let data = Dataset::new(x, d.y.clone()).unwrap();
        let m = train_constraint_classifier(
            &data,
            &ForestParams {
                n_trees: 10,
                ..ForestParams::default()
            },
        )
        .unwrap();
        let pred = m.predict_batch(&data.x).unwrap();
        let acc = pred.iter().zip(&data.y).filter(|(a, b)| a == b).count();
        assert!(acc > 180);
    }
}
