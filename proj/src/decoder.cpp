#include "bci/decoder.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bci {

int predict_character(const std::array<double, kNumGroups>& group_scores,
                      const FlashCode& code) {
    for (double s : group_scores) {
        if (!std::isfinite(s)) throw std::invalid_argument("non-finite group score");
    }
    int best = 0;
    double best_sum = -std::numeric_limits<double>::infinity();
    for (int item = 0; item < kNumItems; ++item) {
        const auto& pair = code.item_to_pair[static_cast<std::size_t>(item)];
        const double sum =
            group_scores[static_cast<std::size_t>(pair.first)] +
            group_scores[static_cast<std::size_t>(pair.second)];
        if (sum > best_sum) {
            best_sum = sum;
            best = item;
        }
    }
    return best;
}

void accumulate_trial(StoppingState& state,
                      const std::array<double, kNumGroups>& trial_scores,
                      const FlashCode& code) {
    if (stopping_step(state).status == BlockStatus::STOP) {
        throw std::logic_error("accumulate_trial called after the block stopped");
    }
    for (std::size_t g = 0; g < kNumGroups; ++g) {
        state.cumulative_group_scores[g] += trial_scores[g];
    }
    state.trials_seen += 1;
    state.prediction_history.push_back(
        predict_character(state.cumulative_group_scores, code));
}

BlockDecision stopping_step(const StoppingState& state) {
    BlockDecision decision;
    decision.trials_used = state.trials_seen;
    if (state.trials_seen == 0) return decision;

    const int last = state.prediction_history.back();
    const bool agreed =
        state.trials_seen >= 2 && state.trials_seen >= state.min_trials &&
        state.prediction_history[static_cast<std::size_t>(state.trials_seen) - 2] ==
            last;
    if (agreed || state.trials_seen >= state.max_trials) {
        decision.status = BlockStatus::STOP;
        decision.predicted_item = last;
    }
    return decision;
}

}  // namespace bci
