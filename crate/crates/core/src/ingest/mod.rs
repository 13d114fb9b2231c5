//! Campaign data ingestion, the baseline two-model learner, cross-validation
//! and score-file interchange.

pub mod cv;
pub mod dataset;
pub mod learner;
pub mod scorefile;
pub mod synthetic;

pub use cv::{cross_validate, holdout_split, ScoredRow, ScoredRows};
pub use dataset::{
    load_campaign_csv, read_campaign_csv, write_campaign_csv, CampaignDataset, CampaignSchema,
};
pub use learner::{train_two_model, CalibrationOrder, LearnerKind, ScoreModel, ScoreModelSpec};
pub use scorefile::{
    read_score_file, read_scores, write_score_file, write_scores, ScoreFile, ScoreRow,
};
pub use synthetic::{synthetic_campaign, SyntheticCampaign, SyntheticSpec};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed hash of a row id. Rows are ranked by this key wherever a random
/// subset is needed, which makes subsets independent of row order.
pub(crate) fn row_key(seed: u64, salt: u64, id: &str) -> u64 {
    let mut h = splitmix64(seed ^ splitmix64(salt));
    for b in id.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(h)
}
