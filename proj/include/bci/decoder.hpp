#pragma once

#include <array>
#include <vector>

#include "bci/paradigm.hpp"

namespace bci {

struct StoppingState {
    std::array<double, kNumGroups> cumulative_group_scores{};
    int trials_seen = 0;
    std::vector<int> prediction_history;  // one cumulative prediction per trial
    int max_trials = 16;
    int min_trials = 2;
};

enum class BlockStatus { CONTINUE, STOP };

struct BlockDecision {
    BlockStatus status = BlockStatus::CONTINUE;
    int predicted_item = -1;  // valid when status == STOP
    int trials_used = 0;
};

// Argmax over items of the summed pair scores; ties break to the lowest
// item index.
int predict_character(const std::array<double, kNumGroups>& group_scores,
                      const FlashCode& code);

// Adds one completed trial's 12 per-group scores and appends the cumulative
// prediction. Rejected once the block has stopped.
void accumulate_trial(StoppingState& state,
                      const std::array<double, kNumGroups>& trial_scores,
                      const FlashCode& code);

// STOP when the last two cumulative predictions agree, or at the trial cap.
BlockDecision stopping_step(const StoppingState& state);

}  // namespace bci
