use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gradient::loss_and_gradient;
use super::network::AuctionNetParams;
use super::{AuctionConfig, BidTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: AuctionNetParams,
    /// Soft minibatch revenue before each update.
    pub history: Vec<f64>,
}

/// Plain minibatch SGD on the negated soft revenue, starting from the
/// identity transform (i.e. from SPA with zero reserve).
///
/// Each epoch walks a fresh permutation of the dataset in `batch_size`
/// chunks; a trailing partial chunk is dropped.
pub fn train(config: &AuctionConfig, dataset: &BidTable) -> Result<TrainOutcome> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::InvalidInput("training dataset is empty".into()));
    }
    if dataset.bidders() != config.bidders {
        return Err(Error::InvalidInput(format!(
            "dataset has {} bidders, configuration expects {}",
            dataset.bidders(),
            config.bidders
        )));
    }
    if dataset.len() < config.batch_size {
        return Err(Error::InvalidInput(format!(
            "dataset of {} samples is smaller than batch_size {}",
            dataset.len(),
            config.batch_size
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = AuctionNetParams::identity(config.bidders, config.groups, config.per_group);
    let mut history = Vec::with_capacity(config.iterations);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let batches_per_epoch = dataset.len() / config.batch_size;
    let mut cursor = batches_per_epoch;
    let mut batch_values = Vec::with_capacity(config.batch_size * config.bidders);

    for _ in 0..config.iterations {
        if cursor == batches_per_epoch {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        batch_values.clear();
        for &i in &order[cursor * config.batch_size..(cursor + 1) * config.batch_size] {
            batch_values.extend_from_slice(dataset.row(i));
        }
        cursor += 1;
        let batch = BidTable::new(config.bidders, std::mem::take(&mut batch_values))?;
        let (loss, grad) = loss_and_gradient(&params, &batch, config.kappa);
        history.push(-loss);
        params.descend(&grad.log_w, &grad.beta, config.lr);
        batch_values = batch.into_values();
    }
    Ok(TrainOutcome { params, history })
}
