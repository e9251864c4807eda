#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "bci/blda.hpp"
#include "bci/dsp.hpp"
#include "bci/paradigm.hpp"
#include "bci/synth.hpp"

namespace bci {

struct OfflineProtocol {
    int runs = 3;
    int blocks_per_run = 5;
    int trials_per_block = 16;
    double inter_run_break_s = 180.0;  // break between runs (amplifier paused)
    double inter_block_gap_s = 1.0;
};

struct OnlineProtocol {
    int blocks = 42;
    double feedback_s = 4.0;
    int min_trials = 2;
    int max_trials = 16;
};

struct ProtocolConfig {
    double soa_ms = 200.0;
    double trial_s = 2.4;
    OfflineProtocol offline;
    OnlineProtocol online;
    ParadigmId paradigm_id = ParadigmId::MS_P;
    std::vector<int> copy_targets;  // empty -> default 42-target sequence

    void validate() const;
};

// Fixed pseudo-random copy-spelling sequence for the online run.
std::vector<int> default_copy_targets(int blocks = 42);

struct Schedule {
    std::vector<FlashEvent> events;
    std::vector<int> block_targets;
    std::int64_t n_samples = 0;
};

Schedule make_offline_schedule(const FlashCode& code,
                               const ProtocolConfig& config,
                               std::uint64_t seed);
Schedule make_online_schedule(const FlashCode& code,
                              const ProtocolConfig& config, std::uint64_t seed,
                              int trials_per_block = 0 /* 0 -> max_trials */);

// Acquisition chain + analysis band pass + epoching + baseline + features.
// Returns one feature row (with trailing bias 1) per event, in event order.
struct EpochFeatures {
    Eigen::MatrixXd X;  // n_events x 481
    Eigen::VectorXd y;  // +-1
    std::vector<FlashEvent> events;
};

EpochFeatures extract_features(const ContinuousRecording& recording);

struct OfflineResult {
    EpochFeatures training;
    BldaModel model;
};

// Three offline runs of five 16-trial blocks: 2880 labeled epochs, then
// BLDA training. Deterministic for a fixed (profile, config).
OfflineResult run_offline(const SubjectProfile& profile,
                          const ProtocolConfig& config, const FlashCode& code);

struct BlockResult {
    int target = 0;
    int predicted = 0;
    int trials_used = 0;
    double start_time_s = 0.0;
};

struct SessionResult {
    std::vector<BlockResult> blocks;
    double accuracy_pct = 0.0;
    int correct = 0;
    int trials_total = 0;
    double bit_rate = 0.0;  // bits/min over flashing time
    ParadigmId paradigm_id = ParadigmId::MS_P;
    std::uint64_t seed = 0;
};

// Scores flashes with the frozen model and applies the dynamic stopping
// policy block by block.
SessionResult run_online(const BldaModel& model, const SubjectProfile& profile,
                         const ProtocolConfig& config, const FlashCode& code);

// Decode an already-synthesized (or loaded) online recording.
SessionResult decode_online(const BldaModel& model,
                            const ContinuousRecording& recording,
                            const ProtocolConfig& config, const FlashCode& code);

struct SessionTimeline {
    std::vector<double> block_s;  // trials_used * trial_s + feedback_s
    double flashing_s = 0.0;      // trials_total * trial_s
    double total_s = 0.0;
};

SessionTimeline session_timeline(const SessionResult& result,
                                 const ProtocolConfig& config);

// Synthesizes the recording run_online would consume (all blocks scheduled
// at the trial cap). Exposed for the CLI's synth/online subcommands.
ContinuousRecording make_online_recording(const SubjectProfile& profile,
                                          const ProtocolConfig& config,
                                          const FlashCode& code);

}  // namespace bci
