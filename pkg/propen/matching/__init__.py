from .matched_dataset import (
    MatchConfig,
    MatchedDataset,
    build_matched_dataset,
    match_variance,
    matched_seed_indices,
    require_matches,
    matches_of,
)
