#include "bci/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "bci/rng.hpp"

namespace bci {

const std::vector<std::string> kChannelNames = {
    "F3", "Fz", "F4", "FC1", "FC2", "C3", "Cz", "C4",
    "P7", "P3", "Pz", "P4", "P8", "O1", "Oz", "O2"};

int channel_index(const std::string& name) {
    for (std::size_t i = 0; i < kChannelNames.size(); ++i) {
        if (kChannelNames[i] == name) return static_cast<int>(i);
    }
    throw std::invalid_argument("unknown channel: " + name);
}

namespace {

constexpr double kPinkPole = 0.9;
constexpr double kAlphaHz = 10.0;
// Phase-diffusion step (rad/sample) of the alpha oscillator. Real alpha is
// only coherent over roughly half a second; a Wiener phase walk with this
// step decorrelates over ~128 samples, so the rhythm is not phase-locked to
// the stimulus train.
constexpr double kAlphaPhaseStep = 0.088;
constexpr int kTemplateLen = 256;  // 1 s of bump support per flash
constexpr double kFwhmToSigma = 2.355;

const std::map<std::string, double> kAlphaGain = {
    {"P7", 0.5}, {"P3", 0.7}, {"Pz", 1.0}, {"P4", 0.7},
    {"P8", 0.5}, {"O1", 0.9}, {"Oz", 1.0}, {"O2", 0.9}};

double map_gain(const std::map<std::string, double>& gains,
                const std::string& channel) {
    const auto it = gains.find(channel);
    return it == gains.end() ? 0.0 : it->second;
}

}  // namespace

SubjectProfile default_profile(std::uint64_t seed) {
    SubjectProfile p;
    p.erp_components = {
        {"N200", 200.0, 100.0, -3.0,
         {{"P7", 0.6}, {"P3", 0.8}, {"Pz", 0.9}, {"P4", 0.8}, {"P8", 0.6},
          {"O1", 1.0}, {"Oz", 1.0}, {"O2", 1.0}, {"Cz", 0.3}}},
        {"P300", 350.0, 300.0, 6.0,
         {{"Fz", 0.5}, {"F3", 0.3}, {"F4", 0.3}, {"FC1", 0.6}, {"FC2", 0.6},
          {"C3", 0.7}, {"Cz", 1.0}, {"C4", 0.7}, {"P7", 0.4}, {"P3", 0.8},
          {"Pz", 1.0}, {"P4", 0.8}, {"P8", 0.4}, {"O1", 0.4}, {"Oz", 0.5},
          {"O2", 0.4}}},
        {"N400", 450.0, 150.0, -3.0,
         {{"F3", 0.8}, {"Fz", 1.0}, {"F4", 0.8}, {"FC1", 0.9}, {"FC2", 0.9},
          {"C3", 0.6}, {"Cz", 0.7}, {"C4", 0.6}}}};
    p.nontarget_gain = 0.1;
    p.noise_rms_uV = 6.0;
    p.alpha_base_uV = 2.0;
    p.alpha_drift_rate = 0.0;
    p.seed = seed;
    return p;
}

std::vector<double> ContinuousRecording::channel_as_double(int ch) const {
    const auto& src = data.at(static_cast<std::size_t>(ch));
    return std::vector<double>(src.begin(), src.end());
}

std::vector<double> erp_template(const SubjectProfile& profile,
                                 const std::string& channel, int n_samples,
                                 double gain) {
    std::vector<double> tmpl(static_cast<std::size_t>(n_samples), 0.0);
    for (const ErpComponent& comp : profile.erp_components) {
        if (comp.width_ms <= 0.0) {
            throw std::invalid_argument("ERP component width must be positive");
        }
        const double g = comp.amplitude_uV * map_gain(comp.channel_gain, channel);
        if (g == 0.0) continue;
        const double sigma_ms = comp.width_ms / kFwhmToSigma;
        for (int i = 0; i < n_samples; ++i) {
            const double t_ms = 1000.0 * i / kSampleRateHz;
            const double d = (t_ms - comp.latency_ms) / sigma_ms;
            tmpl[static_cast<std::size_t>(i)] += gain * g * std::exp(-0.5 * d * d);
        }
    }
    return tmpl;
}

ContinuousRecording synthesize_recording(const SubjectProfile& profile,
                                         const std::vector<FlashEvent>& events,
                                         const std::vector<int>& block_targets,
                                         const FlashCode& code,
                                         std::int64_t n_samples) {
    if (events.empty()) throw std::invalid_argument("empty flash schedule");
    if (profile.noise_rms_uV < 0.0) {
        throw std::invalid_argument("noise RMS must be nonnegative");
    }
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (i > 0 && events[i].onset_sample <= events[i - 1].onset_sample) {
            throw std::invalid_argument("flash onsets must be strictly increasing");
        }
        if (events[i].onset_sample < 0 ||
            events[i].onset_sample + kTemplateLen > n_samples) {
            throw std::invalid_argument(
                "schedule overruns the recording capacity at event " +
                std::to_string(i));
        }
        if (events[i].block_index < 0 ||
            events[i].block_index >= static_cast<int>(block_targets.size())) {
            throw std::invalid_argument("event references an unknown block");
        }
    }

    ContinuousRecording rec;
    rec.events = events;
    rec.block_targets = block_targets;
    rec.data.assign(kChannelNames.size(),
                    std::vector<float>(static_cast<std::size_t>(n_samples)));

    Rng rng(profile.seed);
    const double alpha_phase =
        2.0 * std::numbers::pi * rng.next_unit();

    // Alpha waveform with the linear fatigue ramp, shared across channels.
    std::vector<double> alpha;
    if (profile.alpha_base_uV != 0.0) {
        alpha.resize(static_cast<std::size_t>(n_samples));
        const double span = profile.drift_to - profile.drift_from;
        const double step = 2.0 * std::numbers::pi * kAlphaHz / kSampleRateHz;
        double phase = alpha_phase;
        for (std::int64_t i = 0; i < n_samples; ++i) {
            const double frac = n_samples > 1
                                    ? static_cast<double>(i) / (n_samples - 1)
                                    : 0.0;
            const double envelope =
                1.0 + profile.alpha_drift_rate *
                          (profile.drift_from + span * frac);
            alpha[static_cast<std::size_t>(i)] = envelope * std::sin(phase);
            phase += step + kAlphaPhaseStep * rng.next_gaussian();
        }
    }

    const double pink_scale =
        profile.noise_rms_uV * std::sqrt(1.0 - kPinkPole * kPinkPole);

    for (std::size_t ch = 0; ch < kChannelNames.size(); ++ch) {
        const std::string& name = kChannelNames[ch];
        std::vector<double> buf(static_cast<std::size_t>(n_samples), 0.0);

        if (profile.noise_rms_uV > 0.0) {
            double y = 0.0;
            for (std::int64_t i = 0; i < n_samples; ++i) {
                y = kPinkPole * y + rng.next_gaussian();
                buf[static_cast<std::size_t>(i)] = pink_scale * y;
            }
        }

        if (!alpha.empty()) {
            const double g = profile.alpha_base_uV * map_gain(kAlphaGain, name);
            if (g != 0.0) {
                for (std::int64_t i = 0; i < n_samples; ++i) {
                    buf[static_cast<std::size_t>(i)] +=
                        g * alpha[static_cast<std::size_t>(i)];
                }
            }
        }

        const std::vector<double> tmpl_target =
            erp_template(profile, name, kTemplateLen, 1.0);
        const bool silent = std::all_of(tmpl_target.begin(), tmpl_target.end(),
                                        [](double v) { return v == 0.0; });
        if (!silent) {
            std::vector<double> tmpl_nontarget(tmpl_target.size());
            for (std::size_t i = 0; i < tmpl_target.size(); ++i) {
                tmpl_nontarget[i] = profile.nontarget_gain * tmpl_target[i];
            }
            for (const FlashEvent& ev : events) {
                const int target =
                    block_targets[static_cast<std::size_t>(ev.block_index)];
                const auto& tmpl = code.item_in_group(target, ev.group_id)
                                       ? tmpl_target
                                       : tmpl_nontarget;
                double* dst =
                    buf.data() + static_cast<std::size_t>(ev.onset_sample);
                for (int i = 0; i < kTemplateLen; ++i) {
                    dst[i] += tmpl[static_cast<std::size_t>(i)];
                }
            }
        }

        auto& out = rec.data[ch];
        for (std::int64_t i = 0; i < n_samples; ++i) {
            out[static_cast<std::size_t>(i)] =
                static_cast<float>(buf[static_cast<std::size_t>(i)]);
        }
    }
    return rec;
}

double target_snr(const SubjectProfile& profile) {
    double p300 = 0.0;
    for (const ErpComponent& comp : profile.erp_components) {
        if (comp.name == "P300") p300 = std::abs(comp.amplitude_uV);
    }
    if (profile.noise_rms_uV == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return p300 / profile.noise_rms_uV;
}

}  // namespace bci
