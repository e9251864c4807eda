#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "bci/paradigm.hpp"

namespace bci {

// Discrete IIR filter, denominator normalized so a[0] = 1.
struct FilterCoefficients {
    std::vector<double> b;  // numerator
    std::vector<double> a;  // denominator
    int order = 0;
    double band_lo_hz = 0.0;
    double band_hi_hz = 0.0;
    double sample_rate_hz = 0.0;
};

// Butterworth designs via the bilinear transform with frequency prewarping.
FilterCoefficients design_bandpass(int order = 3, double lo_hz = 1.0,
                                   double hi_hz = 30.0, double fs = 256.0);
FilterCoefficients design_lowpass(int order, double cut_hz, double fs);
FilterCoefficients design_highpass(int order, double cut_hz, double fs);

// Second-order notch: unit-circle zeros at f0, poles at radius r.
FilterCoefficients design_notch(double f0_hz, double fs, double pole_radius = 0.975);

// |H(e^{j 2 pi f / fs})| from the coefficients.
double magnitude_response(const FilterCoefficients& c, double f_hz);

bool is_stable(const FilterCoefficients& c);

// Causal direct-form-II-transposed filtering, zero initial state.
std::vector<double> apply_filter(const FilterCoefficients& c,
                                 const std::vector<double>& x);

// Epoch layout at 256 Hz: 26 prestimulus + 205 poststimulus samples.
constexpr int kEpochPre = 26;
constexpr int kEpochPost = 205;
constexpr int kEpochLen = kEpochPre + kEpochPost;
constexpr int kDecimation = 7;
constexpr int kSamplesPerChannel = 30;  // indices 0,7,...,203 of the post part
constexpr int kNumChannels = 16;
constexpr int kFeatureDim = kNumChannels * kSamplesPerChannel;  // 480

struct Epoch {
    std::vector<std::vector<double>> data;  // [channel][sample], kEpochLen long
    std::int64_t onset_sample = 0;
    bool is_target = false;
    int block_index = 0;
    int trial_index = 0;
    int group_id = 0;
};

struct FeatureVector {
    std::vector<double> values;  // exactly kFeatureDim
    int label = 0;               // +1 target, -1 nontarget
};

std::vector<Epoch> extract_epochs(const std::vector<std::vector<double>>& data,
                                  const std::vector<FlashEvent>& events,
                                  double fs = 256.0, double pre_ms = 100.0,
                                  double post_ms = 800.0);

// Subtracts the prestimulus mean per channel.
void baseline_correct(Epoch& epoch, int n_pre = kEpochPre);

// Every-7th-sample decimation of the poststimulus window, channels
// concatenated in montage order.
FeatureVector features(const Epoch& epoch);

// Welch mean PSD (uV^2/Hz) over [band_lo, band_hi]. Hann windows of
// nominally 2 s (rounded down to a power of two samples), 50% overlap.
double band_power(const std::vector<double>& x, double fs, double band_lo_hz,
                  double band_hi_hz);

std::vector<double> welch_psd(const std::vector<double>& x, double fs,
                              int window_len);

constexpr double kThetaLoHz = 4.0, kThetaHiHz = 7.5;
constexpr double kAlphaLoHz = 8.0, kAlphaHiHz = 13.0;

// The recorder chain from acquisition: 0.5 Hz high pass, 30 Hz low pass,
// 50 Hz notch. The analysis chain is the order-3 1-30 Hz band pass.
struct FilterChain {
    std::vector<FilterCoefficients> stages;
    std::vector<double> operator()(const std::vector<double>& x) const;
};

FilterChain acquisition_chain(double fs = 256.0);
FilterChain analysis_chain(double fs = 256.0);

}  // namespace bci
