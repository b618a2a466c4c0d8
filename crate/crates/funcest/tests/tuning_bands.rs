//! Replicated band-width selection on the short-range Gaussian cell: both
//! procedures should land in documented ranges, with the data-split choice
//! above the oracle one.

use funcest::experiments::{run_tuning_cell, TuningCellConfig, TuningProcedure};
use funcest::process::InnovationDistribution;
use funcest::testing::mean;

#[test]
fn block_and_oracle_selection_in_expected_ranges() {
    let mut cfg = TuningCellConfig::benchmark_cell(2.0, InnovationDistribution::Gaussian, 100);
    cfg.replicates = 50;
    let cell = run_tuning_cell(&cfg, &[TuningProcedure::Oracle, TuningProcedure::Block], 9_090);
    assert_eq!(cell.failures, 0);

    let oracle = mean(&cell.lambda_stars(TuningProcedure::Oracle));
    let block = mean(&cell.lambda_stars(TuningProcedure::Block));
    assert!(
        (0.09..=0.17).contains(&oracle),
        "oracle mean lambda* = {oracle:.4}, expected within [0.09, 0.17]"
    );
    assert!(
        (0.10..=0.30).contains(&block),
        "block mean lambda* = {block:.4}, expected within [0.10, 0.30]"
    );
    // The data-split choice is biased upward relative to the oracle.
    assert!(block > oracle);
}
