#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bci/paradigm.hpp"

namespace bci {

extern const std::vector<std::string> kChannelNames;  // 16, montage order

int channel_index(const std::string& name);

struct ErpComponent {
    std::string name;        // N200, P300 or N400
    double latency_ms = 0.0;
    double width_ms = 0.0;   // full width at half maximum
    double amplitude_uV = 0.0;
    std::map<std::string, double> channel_gain;  // missing channels -> 0
};

struct SubjectProfile {
    std::vector<ErpComponent> erp_components;
    double nontarget_gain = 0.0;   // in [0, 1)
    double noise_rms_uV = 0.0;
    double alpha_base_uV = 0.0;
    double alpha_drift_rate = 0.0;  // relative amplitude gain per session
    // Session fraction window the drift ramp covers; the cohort runner uses
    // this to continue the fatigue clock across counterbalanced conditions.
    double drift_from = 0.0;
    double drift_to = 1.0;
    std::uint64_t seed = 0;
};

// Defaults calibrated so the simulated cohort lands near the 80-90 %
// online-accuracy regime.
SubjectProfile default_profile(std::uint64_t seed);

struct ContinuousRecording {
    double sample_rate_hz = kSampleRateHz;
    std::vector<std::string> channels = kChannelNames;
    std::vector<std::vector<float>> data;  // [channel][sample], uV
    std::vector<FlashEvent> events;
    std::vector<int> block_targets;

    std::size_t n_samples() const { return data.empty() ? 0 : data[0].size(); }
    std::vector<double> channel_as_double(int ch) const;
};

// Summed ERP bump templates for one channel, sampled at 256 Hz from flash
// onset; `gain` scales every component (1 for targets, nontarget_gain
// otherwise).
std::vector<double> erp_template(const SubjectProfile& profile,
                                 const std::string& channel, int n_samples,
                                 double gain = 1.0);

// Background pink noise + drifting 10 Hz alpha on posterior channels + ERP
// bumps on every flash. Deterministic for a fixed profile and schedule.
//
// Pink noise model (documented so RMS checks are reproducible): unit white
// Gaussian noise through the one-pole filter y[n] = 0.9*y[n-1] + x[n],
// scaled by noise_rms_uV * sqrt(1 - 0.9^2).
ContinuousRecording synthesize_recording(const SubjectProfile& profile,
                                         const std::vector<FlashEvent>& events,
                                         const std::vector<int>& block_targets,
                                         const FlashCode& code,
                                         std::int64_t n_samples);

// P300 peak amplitude over noise RMS; +inf when noise_rms is zero.
double target_snr(const SubjectProfile& profile);

}  // namespace bci
