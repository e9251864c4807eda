#include "bci/session.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "bci/analysis.hpp"
#include "bci/decoder.hpp"
#include "bci/rng.hpp"

namespace bci {

namespace {

constexpr std::int64_t kEdgePadSamples = 256;  // 1 s lead-in / tail
constexpr std::uint64_t kTargetSeed = 0xB1C15EEDULL;

// Independent seed streams derived from the subject seed.
constexpr std::uint64_t kStreamOfflineNoise = 1;
constexpr std::uint64_t kStreamOnlineNoise = 2;
constexpr std::uint64_t kStreamOfflineSchedule = 3;
constexpr std::uint64_t kStreamOnlineSchedule = 4;
constexpr std::uint64_t kStreamOfflineTargets = 5;

std::int64_t seconds_to_samples(double s) {
    return std::llround(s * kSampleRateHz);
}

void append_block(std::vector<FlashEvent>& events, const FlashCode& code,
                  int block_index, int target, int trials,
                  std::int64_t block_start, Rng& rng) {
    for (int t = 0; t < trials; ++t) {
        const auto order = schedule_trial(rng);
        for (int j = 0; j < kNumGroups; ++j) {
            FlashEvent ev;
            ev.onset_sample = block_start + flash_onset_offset(t * kNumGroups + j);
            ev.group_id = order[static_cast<std::size_t>(j)];
            ev.block_index = block_index;
            ev.trial_index = t;
            ev.is_target = code.item_in_group(target, ev.group_id);
            events.push_back(ev);
        }
    }
}

}  // namespace

void ProtocolConfig::validate() const {
    if (soa_ms <= 0.0 || trial_s <= 0.0) {
        throw std::invalid_argument("protocol timing must be positive");
    }
    if (std::abs(trial_s - kNumGroups * soa_ms / 1000.0) > 1e-9) {
        throw std::invalid_argument("trial_s must equal 12 * soa_ms / 1000");
    }
    if (offline.runs < 1 || offline.blocks_per_run < 1 ||
        offline.trials_per_block < 1 || online.blocks < 1) {
        throw std::invalid_argument("protocol counts must be positive");
    }
    if (online.min_trials < 2 || online.max_trials < online.min_trials) {
        throw std::invalid_argument("online trial bounds must satisfy 2 <= min <= max");
    }
    if (!copy_targets.empty()) {
        if (static_cast<int>(copy_targets.size()) != online.blocks) {
            throw std::invalid_argument("copy_targets length must match block count");
        }
        for (int t : copy_targets) {
            if (t < 0 || t >= kNumItems) {
                throw std::invalid_argument("copy target outside the 42-item layout");
            }
        }
    }
}

std::vector<int> default_copy_targets(int blocks) {
    Rng rng(kTargetSeed);
    std::vector<int> targets(static_cast<std::size_t>(blocks));
    for (int& t : targets) t = static_cast<int>(rng.next_below(kNumItems));
    return targets;
}

Schedule make_offline_schedule(const FlashCode& code,
                               const ProtocolConfig& config,
                               std::uint64_t seed) {
    config.validate();
    Rng order_rng(mix_seed(seed, kStreamOfflineSchedule));
    Rng target_rng(mix_seed(seed, kStreamOfflineTargets));

    Schedule schedule;
    std::int64_t cursor = kEdgePadSamples;
    const std::int64_t block_span = flash_onset_offset(
        config.offline.trials_per_block * kNumGroups);
    const std::int64_t gap = seconds_to_samples(config.offline.inter_block_gap_s);

    int block_index = 0;
    for (int run = 0; run < config.offline.runs; ++run) {
        // Each run spells a fresh set of distinct targets.
        std::vector<int> pool(kNumItems);
        for (int i = 0; i < kNumItems; ++i) pool[static_cast<std::size_t>(i)] = i;
        target_rng.shuffle(pool.begin(), pool.end());
        for (int b = 0; b < config.offline.blocks_per_run; ++b) {
            const int target = pool[static_cast<std::size_t>(b)];
            schedule.block_targets.push_back(target);
            append_block(schedule.events, code, block_index, target,
                         config.offline.trials_per_block, cursor, order_rng);
            cursor += block_span + gap;
            ++block_index;
        }
    }
    schedule.n_samples = cursor + kEdgePadSamples;
    return schedule;
}

Schedule make_online_schedule(const FlashCode& code,
                              const ProtocolConfig& config, std::uint64_t seed,
                              int trials_per_block) {
    config.validate();
    if (trials_per_block == 0) trials_per_block = config.online.max_trials;
    Rng order_rng(mix_seed(seed, kStreamOnlineSchedule));

    Schedule schedule;
    schedule.block_targets = config.copy_targets.empty()
                                 ? default_copy_targets(config.online.blocks)
                                 : config.copy_targets;
    std::int64_t cursor = kEdgePadSamples;
    const std::int64_t block_span =
        flash_onset_offset(trials_per_block * kNumGroups);
    const std::int64_t gap = seconds_to_samples(config.online.feedback_s);
    for (int b = 0; b < config.online.blocks; ++b) {
        append_block(schedule.events, code, b,
                     schedule.block_targets[static_cast<std::size_t>(b)],
                     trials_per_block, cursor, order_rng);
        cursor += block_span + gap;
    }
    schedule.n_samples = cursor + kEdgePadSamples;
    return schedule;
}

EpochFeatures extract_features(const ContinuousRecording& recording) {
    if (recording.channels != kChannelNames) {
        throw std::invalid_argument("recording does not carry the 16-channel montage");
    }
    const FilterChain acquisition = acquisition_chain(recording.sample_rate_hz);
    const FilterChain analysis = analysis_chain(recording.sample_rate_hz);

    std::vector<std::vector<double>> conditioned;
    conditioned.reserve(recording.data.size());
    for (std::size_t ch = 0; ch < recording.data.size(); ++ch) {
        conditioned.push_back(
            analysis(acquisition(recording.channel_as_double(static_cast<int>(ch)))));
    }

    std::vector<Epoch> epochs =
        extract_epochs(conditioned, recording.events, recording.sample_rate_hz);

    EpochFeatures out;
    out.events = recording.events;
    out.X.resize(static_cast<Eigen::Index>(epochs.size()), kFeatureDim + 1);
    out.y.resize(static_cast<Eigen::Index>(epochs.size()));
    for (std::size_t e = 0; e < epochs.size(); ++e) {
        baseline_correct(epochs[e]);
        const FeatureVector fv = features(epochs[e]);
        for (int k = 0; k < kFeatureDim; ++k) {
            out.X(static_cast<Eigen::Index>(e), k) =
                fv.values[static_cast<std::size_t>(k)];
        }
        out.X(static_cast<Eigen::Index>(e), kFeatureDim) = 1.0;
        out.y(static_cast<Eigen::Index>(e)) = fv.label;
    }
    return out;
}

OfflineResult run_offline(const SubjectProfile& profile,
                          const ProtocolConfig& config, const FlashCode& code) {
    const Schedule schedule =
        make_offline_schedule(code, config, profile.seed);
    SubjectProfile noise_profile = profile;
    noise_profile.seed = mix_seed(profile.seed, kStreamOfflineNoise);
    const ContinuousRecording recording =
        synthesize_recording(noise_profile, schedule.events,
                             schedule.block_targets, code, schedule.n_samples);
    OfflineResult result;
    result.training = extract_features(recording);
    result.model = train(result.training.X, result.training.y);
    return result;
}

ContinuousRecording make_online_recording(const SubjectProfile& profile,
                                          const ProtocolConfig& config,
                                          const FlashCode& code) {
    const Schedule schedule = make_online_schedule(code, config, profile.seed);
    SubjectProfile noise_profile = profile;
    noise_profile.seed = mix_seed(profile.seed, kStreamOnlineNoise);
    return synthesize_recording(noise_profile, schedule.events,
                                schedule.block_targets, code,
                                schedule.n_samples);
}

SessionResult decode_online(const BldaModel& model,
                            const ContinuousRecording& recording,
                            const ProtocolConfig& config,
                            const FlashCode& code) {
    config.validate();
    const EpochFeatures feats = extract_features(recording);
    const Eigen::VectorXd scores = feats.X * model.weights;

    // scores_by[block][trial][group]
    std::map<int, std::map<int, std::array<double, kNumGroups>>> by_block;
    for (std::size_t e = 0; e < feats.events.size(); ++e) {
        const FlashEvent& ev = feats.events[e];
        by_block[ev.block_index][ev.trial_index]
                [static_cast<std::size_t>(ev.group_id)] =
                    scores(static_cast<Eigen::Index>(e));
    }

    SessionResult result;
    result.paradigm_id = config.paradigm_id;
    double clock_s = 0.0;
    for (const auto& [block_index, trials] : by_block) {
        StoppingState state;
        state.max_trials = config.online.max_trials;
        state.min_trials = config.online.min_trials;
        BlockDecision decision;
        for (const auto& [trial_index, group_scores] : trials) {
            accumulate_trial(state, group_scores, code);
            decision = stopping_step(state);
            if (decision.status == BlockStatus::STOP) break;
        }
        if (decision.status != BlockStatus::STOP) {
            // Fewer scheduled trials than the cap: force the final prediction.
            decision.status = BlockStatus::STOP;
            decision.predicted_item = state.prediction_history.back();
            decision.trials_used = state.trials_seen;
        }

        BlockResult block;
        block.target =
            recording.block_targets.at(static_cast<std::size_t>(block_index));
        block.predicted = decision.predicted_item;
        block.trials_used = decision.trials_used;
        block.start_time_s = clock_s;
        clock_s += decision.trials_used * config.trial_s + config.online.feedback_s;
        result.blocks.push_back(block);

        result.trials_total += decision.trials_used;
        if (block.predicted == block.target) ++result.correct;
    }
    result.accuracy_pct =
        100.0 * result.correct / static_cast<double>(result.blocks.size());
    result.bit_rate = bit_rate(
        static_cast<double>(result.correct) /
            static_cast<double>(result.blocks.size()),
        kNumItems, static_cast<double>(result.trials_total), config.trial_s,
        static_cast<int>(result.blocks.size()));
    return result;
}

SessionResult run_online(const BldaModel& model, const SubjectProfile& profile,
                         const ProtocolConfig& config, const FlashCode& code) {
    const ContinuousRecording recording =
        make_online_recording(profile, config, code);
    SessionResult result = decode_online(model, recording, config, code);
    result.seed = profile.seed;
    return result;
}

SessionTimeline session_timeline(const SessionResult& result,
                                 const ProtocolConfig& config) {
    SessionTimeline timeline;
    for (const BlockResult& b : result.blocks) {
        const double s = b.trials_used * config.trial_s + config.online.feedback_s;
        timeline.block_s.push_back(s);
        timeline.total_s += s;
        timeline.flashing_s += b.trials_used * config.trial_s;
    }
    return timeline;
}

}  // namespace bci
