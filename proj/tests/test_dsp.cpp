#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "bci/dsp.hpp"
#include "bci/rng.hpp"

using namespace bci;

namespace {

// Analytic band-pass Butterworth magnitude at the prewarped analog
// frequency, the independent oracle for the bilinear design.
double analytic_bandpass_gain(int order, double lo, double hi, double fs,
                              double f) {
    const double wl = 2.0 * fs * std::tan(std::numbers::pi * lo / fs);
    const double wh = 2.0 * fs * std::tan(std::numbers::pi * hi / fs);
    const double w0 = std::sqrt(wl * wh);
    const double bw = wh - wl;
    const double w = 2.0 * fs * std::tan(std::numbers::pi * f / fs);
    const double x = (w * w - w0 * w0) / (bw * w);
    return 1.0 / std::sqrt(1.0 + std::pow(x, 2 * order));
}

std::vector<double> sine(double f, double fs, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::sin(2.0 * std::numbers::pi * f * i / fs);
    }
    return x;
}

Epoch epoch_of_constant(double value) {
    Epoch ep;
    ep.data.assign(kNumChannels, std::vector<double>(kEpochLen, value));
    return ep;
}

}  // namespace

TEST_CASE("bandpass magnitude matches the analytic Butterworth response") {
    const FilterCoefficients c = design_bandpass();
    for (double f : {2.0, 5.0, 15.0, 25.0, 29.0}) {
        const double expected = analytic_bandpass_gain(3, 1.0, 30.0, 256.0, f);
        CHECK(std::abs(magnitude_response(c, f) - expected) <
              0.01 * std::max(expected, 1e-6));
    }
}

TEST_CASE("bandpass kills DC and hits -3 dB at the band edges") {
    const FilterCoefficients c = design_bandpass();
    CHECK(magnitude_response(c, 0.0) < 1e-12);
    for (double edge : {1.0, 30.0}) {
        const double db = 20.0 * std::log10(magnitude_response(c, edge));
        CHECK(std::abs(db - (-20.0 * std::log10(std::sqrt(2.0)))) < 0.2);
    }
    CHECK(is_stable(c));
}

TEST_CASE("band outside Nyquist is rejected") {
    CHECK_THROWS_AS(design_bandpass(3, 1.0, 200.0, 256.0), std::invalid_argument);
    CHECK_THROWS_AS(design_bandpass(3, 30.0, 1.0, 256.0), std::invalid_argument);
    CHECK_THROWS_AS(design_bandpass(3, 0.0, 30.0, 256.0), std::invalid_argument);
}

TEST_CASE("apply_filter is linear and causal") {
    const FilterCoefficients c = design_bandpass();
    SUBCASE("zero in, zero out") {
        const std::vector<double> z(1000, 0.0);
        for (double v : apply_filter(c, z)) CHECK(v == 0.0);
    }
    SUBCASE("homogeneity") {
        Rng rng(3);
        std::vector<double> x(2000);
        for (double& v : x) v = rng.next_gaussian();
        // power-of-two scaling commutes with rounding: bit exact
        std::vector<double> x2 = x;
        for (double& v : x2) v *= 2.0;
        const auto y = apply_filter(c, x);
        const auto y2 = apply_filter(c, x2);
        double scale = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            CHECK(y2[i] == 2.0 * y[i]);
            scale = std::max(scale, std::abs(y[i]));
        }
        // general scaling drifts through the slow 1 Hz poles; hold it to
        // 1e-10 of the signal scale over the whole window
        std::vector<double> ax = x;
        for (double& v : ax) v *= 3.5;
        const auto ay = apply_filter(c, ax);
        for (std::size_t i = 0; i < y.size(); ++i) {
            CHECK(std::abs(ay[i] - 3.5 * y[i]) <= 1e-10 * 3.5 * scale);
        }
    }
    SUBCASE("unstable coefficients rejected") {
        FilterCoefficients bad;
        bad.b = {1.0};
        bad.a = {1.0, -1.5};
        bad.sample_rate_hz = 256.0;
        CHECK_THROWS_AS(apply_filter(bad, {1.0, 2.0}), std::invalid_argument);
    }
}

TEST_CASE("acquisition notch suppresses 50 Hz to below 1 percent") {
    const FilterCoefficients notch = design_notch(50.0, 256.0);
    auto x = sine(50.0, 256.0, 4096);
    const auto y = apply_filter(notch, x);
    double peak = 0.0;
    for (std::size_t i = 2048; i < y.size(); ++i) {
        peak = std::max(peak, std::abs(y[i]));
    }
    CHECK(peak < 0.01);
    CHECK(magnitude_response(notch, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("epoch extraction and counts") {
    const FlashCode code = build_flash_code();
    std::vector<std::vector<double>> data(
        kNumChannels, std::vector<double>(4096, 0.0));

    SUBCASE("one trial yields 12 epochs with exactly 2 targets") {
        std::vector<FlashEvent> events;
        const int target = 17;
        for (int g = 0; g < kNumGroups; ++g) {
            FlashEvent ev;
            ev.onset_sample = 256 + flash_onset_offset(g);
            ev.group_id = g;
            ev.is_target = code.item_in_group(target, g);
            events.push_back(ev);
        }
        const auto epochs = extract_epochs(data, events);
        CHECK(epochs.size() == 12);
        int targets = 0;
        for (const Epoch& ep : epochs) {
            CHECK(ep.data.size() == kNumChannels);
            CHECK(ep.data[0].size() == kEpochLen);
            if (ep.is_target) ++targets;
        }
        CHECK(targets == 2);
    }
    SUBCASE("event at sample 0 is rejected (no prestimulus room)") {
        std::vector<FlashEvent> events(1);
        events[0].onset_sample = 0;
        CHECK_THROWS_AS(extract_epochs(data, events), std::out_of_range);
    }
    SUBCASE("event overrunning the end is rejected") {
        std::vector<FlashEvent> events(1);
        events[0].onset_sample = 4000;
        CHECK_THROWS_AS(extract_epochs(data, events), std::out_of_range);
    }
}

TEST_CASE("baseline correction") {
    SUBCASE("constant channel becomes zero") {
        Epoch ep = epoch_of_constant(7.0);
        baseline_correct(ep);
        for (const auto& ch : ep.data) {
            for (double v : ch) CHECK(std::abs(v) < 1e-12);
        }
    }
    SUBCASE("prestimulus mean is zero afterwards, ramp shape preserved") {
        Epoch ep = epoch_of_constant(0.0);
        for (int i = 0; i < kEpochLen; ++i) ep.data[0][i] = 0.25 * i;
        baseline_correct(ep);
        double pre = 0.0;
        for (int i = 0; i < kEpochPre; ++i) pre += ep.data[0][i];
        CHECK(std::abs(pre / kEpochPre) < 1e-10);
        for (int i = 1; i < kEpochLen; ++i) {
            CHECK(ep.data[0][i] - ep.data[0][i - 1] == doctest::Approx(0.25));
        }
    }
    SUBCASE("idempotent on centered prestimulus") {
        Epoch ep = epoch_of_constant(0.0);
        for (int i = 0; i < kEpochPre; ++i) {
            ep.data[0][i] = (i % 2 == 0) ? 1.0 : -1.0;
        }
        ep.data[0][kEpochPre] = -1.0;  // make the 26-sample mean exactly 0
        for (int i = kEpochPre; i < kEpochLen; ++i) ep.data[0][i] = 5.0;
        const double before = ep.data[0][100];
        baseline_correct(ep);
        CHECK(ep.data[0][100] == doctest::Approx(before).epsilon(1e-12));
    }
}

TEST_CASE("feature extraction decimates every 7th poststimulus sample") {
    SUBCASE("length is 480") {
        const Epoch ep = epoch_of_constant(1.0);
        CHECK(features(ep).values.size() == kFeatureDim);
    }
    SUBCASE("impulse at poststimulus sample 7 maps to feature index 1") {
        Epoch ep = epoch_of_constant(0.0);
        ep.data[0][kEpochPre + 7] = 1.0;
        const FeatureVector fv = features(ep);
        for (int k = 0; k < kSamplesPerChannel; ++k) {
            CHECK(fv.values[k] == (k == 1 ? 1.0 : 0.0));
        }
    }
    SUBCASE("decimated sequence equals the original on the 256/7 Hz grid") {
        Epoch ep = epoch_of_constant(0.0);
        for (int i = 0; i < kEpochLen; ++i) ep.data[5][i] = std::sqrt(2.0) * i;
        const FeatureVector fv = features(ep);
        for (int k = 0; k < kSamplesPerChannel; ++k) {
            CHECK(fv.values[5 * kSamplesPerChannel + k] ==
                  ep.data[5][kEpochPre + 7 * k]);
        }
    }
    SUBCASE("wrong epoch length rejected") {
        Epoch ep;
        ep.data.assign(kNumChannels, std::vector<double>(100, 0.0));
        CHECK_THROWS_AS(features(ep), std::invalid_argument);
    }
}

TEST_CASE("Welch band power") {
    SUBCASE("10 Hz sine concentrates in the alpha band") {
        const auto x = sine(10.0, 256.0, 256 * 30);
        const double alpha = band_power(x, 256.0, kAlphaLoHz, kAlphaHiHz);
        const double theta = band_power(x, 256.0, kThetaLoHz, kThetaHiHz);
        CHECK(alpha >= 20.0 * theta);
    }
    SUBCASE("zero signal has zero power") {
        const std::vector<double> z(4096, 0.0);
        CHECK(band_power(z, 256.0, kAlphaLoHz, kAlphaHiHz) == 0.0);
    }
    SUBCASE("integrated PSD of white noise approximates its variance") {
        Rng rng(11);
        std::vector<double> x(256 * 120);
        double var = 0.0;
        for (double& v : x) {
            v = rng.next_gaussian();
            var += v * v;
        }
        var /= static_cast<double>(x.size());
        const auto psd = welch_psd(x, 256.0, 512);
        double total = 0.0;
        for (double p : psd) total += p * 256.0 / 512.0;
        CHECK(std::abs(total - var) < 0.1 * var);
    }
    SUBCASE("too-short signal rejected") {
        const std::vector<double> x(100, 0.0);
        CHECK_THROWS_AS(band_power(x, 256.0, 8.0, 13.0), std::invalid_argument);
    }
}

TEST_CASE("full chain is linear") {
    Rng rng(5);
    std::vector<std::vector<double>> xa(kNumChannels,
                                        std::vector<double>(2048));
    std::vector<std::vector<double>> xb = xa;
    for (auto& ch : xa) {
        for (double& v : ch) v = rng.next_gaussian();
    }
    for (auto& ch : xb) {
        for (double& v : ch) v = rng.next_gaussian();
    }
    const double a = 1.7, b = -0.4;

    const FilterChain chain = analysis_chain();
    auto run = [&](const std::vector<std::vector<double>>& data) {
        std::vector<std::vector<double>> filtered;
        for (const auto& ch : data) filtered.push_back(chain(ch));
        std::vector<FlashEvent> events(1);
        events[0].onset_sample = 512;
        auto epochs = extract_epochs(filtered, events);
        baseline_correct(epochs[0]);
        return features(epochs[0]).values;
    };

    std::vector<std::vector<double>> combo(kNumChannels,
                                           std::vector<double>(2048));
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        for (std::size_t i = 0; i < 2048; ++i) {
            combo[c][i] = a * xa[c][i] + b * xb[c][i];
        }
    }
    const auto fa = run(xa);
    const auto fb = run(xb);
    const auto fc = run(combo);
    for (std::size_t i = 0; i < fc.size(); ++i) {
        const double expected = a * fa[i] + b * fb[i];
        CHECK(std::abs(fc[i] - expected) <= 1e-9 * std::max(1.0, std::abs(expected)));
    }
}

TEST_CASE("all shipped designs are stable") {
    for (const auto& chain : {acquisition_chain(), analysis_chain()}) {
        for (const auto& stage : chain.stages) CHECK(is_stable(stage));
    }
}
