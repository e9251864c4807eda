#include "bci/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace bci {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Left-half-plane poles of the analog Butterworth prototype.
std::vector<cd> prototype_poles(int order) {
    std::vector<cd> poles;
    poles.reserve(static_cast<std::size_t>(order));
    for (int k = 0; k < order; ++k) {
        const double theta = kPi * (2.0 * k + order + 1.0) / (2.0 * order);
        poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    return poles;
}

// Polynomial (in z^-1) with the given roots; leading coefficient 1.
std::vector<double> poly_from_roots(const std::vector<cd>& roots) {
    std::vector<cd> p{1.0};
    for (const cd& r : roots) {
        std::vector<cd> q(p.size() + 1, cd{0.0});
        for (std::size_t i = 0; i < p.size(); ++i) {
            q[i] += p[i];
            q[i + 1] -= p[i] * r;
        }
        p = std::move(q);
    }
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i].real();
    return out;
}

// Binomial expansion of (1 + s*z^-1)^n for s = +-1; exact integer coefficients.
std::vector<double> binomial_poly(int n, double s) {
    std::vector<double> c(static_cast<std::size_t>(n) + 1);
    double binom = 1.0;
    double sk = 1.0;
    for (int k = 0; k <= n; ++k) {
        c[static_cast<std::size_t>(k)] = binom * sk;
        binom = binom * (n - k) / (k + 1.0);
        sk *= s;
    }
    return c;
}

std::vector<double> convolve(const std::vector<double>& a,
                             const std::vector<double>& b) {
    std::vector<double> c(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    }
    return c;
}

cd bilinear_pole(const cd& s, double fs) {
    return (2.0 * fs + s) / (2.0 * fs - s);
}

cd evaluate(const std::vector<double>& coeffs, const cd& zinv) {
    cd acc{0.0};
    for (std::size_t i = coeffs.size(); i-- > 0;) {
        acc = acc * zinv + coeffs[i];
    }
    return acc;
}

cd response_at(const FilterCoefficients& c, double f_hz) {
    const cd zinv = std::exp(cd{0.0, -2.0 * kPi * f_hz / c.sample_rate_hz});
    return evaluate(c.b, zinv) / evaluate(c.a, zinv);
}

void normalize_gain(FilterCoefficients& c, double ref_hz) {
    const double g = std::abs(response_at(c, ref_hz));
    for (double& v : c.b) v /= g;
}

void check_band(double lo, double hi, double fs) {
    if (!(lo > 0.0) || !(hi > lo) || !(hi < fs / 2.0)) {
        throw std::invalid_argument("filter band must satisfy 0 < lo < hi < fs/2");
    }
}

double prewarp(double f_hz, double fs) {
    return 2.0 * fs * std::tan(kPi * f_hz / fs);
}

}  // namespace

FilterCoefficients design_bandpass(int order, double lo_hz, double hi_hz,
                                   double fs) {
    check_band(lo_hz, hi_hz, fs);
    const double wl = prewarp(lo_hz, fs);
    const double wh = prewarp(hi_hz, fs);
    const double w0 = std::sqrt(wl * wh);
    const double bw = wh - wl;

    // LP->BP: each prototype pole p yields the roots of s^2 - bw*p*s + w0^2.
    std::vector<cd> zpoles;
    for (const cd& p : prototype_poles(order)) {
        const cd bp = bw * p;
        const cd disc = std::sqrt(bp * bp - 4.0 * w0 * w0);
        zpoles.push_back(bilinear_pole((bp + disc) / 2.0, fs));
        zpoles.push_back(bilinear_pole((bp - disc) / 2.0, fs));
    }

    FilterCoefficients c;
    c.order = order;
    c.band_lo_hz = lo_hz;
    c.band_hi_hz = hi_hz;
    c.sample_rate_hz = fs;
    c.a = poly_from_roots(zpoles);
    // Zeros: order at z=1 and order at z=-1 -> (1 - z^-2)^order, exact.
    c.b = convolve(binomial_poly(order, -1.0), binomial_poly(order, 1.0));
    const double f_center = fs / kPi * std::atan(w0 / (2.0 * fs));
    normalize_gain(c, f_center);
    return c;
}

FilterCoefficients design_lowpass(int order, double cut_hz, double fs) {
    check_band(cut_hz / 2.0, cut_hz, fs);
    const double wc = prewarp(cut_hz, fs);
    std::vector<cd> zpoles;
    for (const cd& p : prototype_poles(order)) {
        zpoles.push_back(bilinear_pole(wc * p, fs));
    }
    FilterCoefficients c;
    c.order = order;
    c.band_lo_hz = 0.0;
    c.band_hi_hz = cut_hz;
    c.sample_rate_hz = fs;
    c.a = poly_from_roots(zpoles);
    c.b = binomial_poly(order, 1.0);  // zeros at z=-1
    normalize_gain(c, 0.0);
    return c;
}

FilterCoefficients design_highpass(int order, double cut_hz, double fs) {
    check_band(cut_hz / 2.0, cut_hz, fs);
    const double wc = prewarp(cut_hz, fs);
    std::vector<cd> zpoles;
    for (const cd& p : prototype_poles(order)) {
        zpoles.push_back(bilinear_pole(wc / p, fs));
    }
    FilterCoefficients c;
    c.order = order;
    c.band_lo_hz = cut_hz;
    c.band_hi_hz = fs / 2.0;
    c.sample_rate_hz = fs;
    c.a = poly_from_roots(zpoles);
    c.b = binomial_poly(order, -1.0);  // zeros at z=1
    normalize_gain(c, fs / 2.0);
    return c;
}

FilterCoefficients design_notch(double f0_hz, double fs, double pole_radius) {
    if (!(f0_hz > 0.0) || !(f0_hz < fs / 2.0)) {
        throw std::invalid_argument("notch frequency outside (0, fs/2)");
    }
    if (!(pole_radius > 0.0) || !(pole_radius < 1.0)) {
        throw std::invalid_argument("notch pole radius outside (0, 1)");
    }
    const double w0 = 2.0 * kPi * f0_hz / fs;
    const double c0 = std::cos(w0);
    FilterCoefficients c;
    c.order = 2;
    c.band_lo_hz = f0_hz;
    c.band_hi_hz = f0_hz;
    c.sample_rate_hz = fs;
    const double k =
        (1.0 - 2.0 * pole_radius * c0 + pole_radius * pole_radius) /
        (2.0 - 2.0 * c0);
    c.b = {k, -2.0 * k * c0, k};
    c.a = {1.0, -2.0 * pole_radius * c0, pole_radius * pole_radius};
    return c;
}

double magnitude_response(const FilterCoefficients& c, double f_hz) {
    return std::abs(response_at(c, f_hz));
}

bool is_stable(const FilterCoefficients& c) {
    const std::size_t n = c.a.size();
    if (n < 2) return true;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n - 1));
    for (std::size_t i = 1; i < n; ++i) {
        companion(0, static_cast<Eigen::Index>(i - 1)) = -c.a[i] / c.a[0];
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) =
            1.0;
    }
    const auto roots = companion.eigenvalues();
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        if (std::abs(roots[i]) >= 1.0) return false;
    }
    return true;
}

std::vector<double> apply_filter(const FilterCoefficients& c,
                                 const std::vector<double>& x) {
    if (c.a.empty() || c.a[0] != 1.0) {
        throw std::invalid_argument("denominator must be normalized (a[0] = 1)");
    }
    if (!is_stable(c)) {
        throw std::invalid_argument("unstable filter coefficients");
    }
    const std::size_t nb = c.b.size();
    const std::size_t na = c.a.size();
    const std::size_t ns = std::max(nb, na);
    std::vector<double> state(ns, 0.0);  // direct form II transposed
    std::vector<double> y(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double xn = x[n];
        const double yn = (nb > 0 ? c.b[0] * xn : 0.0) + state[0];
        for (std::size_t i = 1; i < ns; ++i) {
            const double bterm = i < nb ? c.b[i] * xn : 0.0;
            const double aterm = i < na ? c.a[i] * yn : 0.0;
            state[i - 1] = bterm - aterm + state[i];
        }
        y[n] = yn;
    }
    return y;
}

std::vector<Epoch> extract_epochs(const std::vector<std::vector<double>>& data,
                                  const std::vector<FlashEvent>& events,
                                  double fs, double pre_ms, double post_ms) {
    const int n_pre = static_cast<int>(std::lround(pre_ms * fs / 1000.0));
    const int n_post = static_cast<int>(std::lround(post_ms * fs / 1000.0));
    if (data.empty()) throw std::invalid_argument("empty recording");
    const std::int64_t n_samples = static_cast<std::int64_t>(data[0].size());

    std::vector<Epoch> epochs;
    epochs.reserve(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
        const FlashEvent& ev = events[e];
        const std::int64_t start = ev.onset_sample - n_pre;
        if (start < 0 || ev.onset_sample + n_post > n_samples) {
            throw std::out_of_range("event " + std::to_string(e) +
                                    " window outside the recording");
        }
        Epoch ep;
        ep.onset_sample = ev.onset_sample;
        ep.is_target = ev.is_target;
        ep.block_index = ev.block_index;
        ep.trial_index = ev.trial_index;
        ep.group_id = ev.group_id;
        ep.data.reserve(data.size());
        for (const auto& channel : data) {
            ep.data.emplace_back(channel.begin() + start,
                                 channel.begin() + start + n_pre + n_post);
        }
        epochs.push_back(std::move(ep));
    }
    return epochs;
}

void baseline_correct(Epoch& epoch, int n_pre) {
    for (auto& channel : epoch.data) {
        if (static_cast<int>(channel.size()) < n_pre) {
            throw std::invalid_argument("epoch shorter than prestimulus window");
        }
        double mean = 0.0;
        for (int i = 0; i < n_pre; ++i) mean += channel[static_cast<std::size_t>(i)];
        mean /= n_pre;
        for (double& v : channel) v -= mean;
    }
}

FeatureVector features(const Epoch& epoch) {
    if (epoch.data.size() != kNumChannels) {
        throw std::invalid_argument("epoch must have 16 channels");
    }
    FeatureVector fv;
    fv.values.reserve(kFeatureDim);
    for (const auto& channel : epoch.data) {
        if (static_cast<int>(channel.size()) != kEpochLen) {
            throw std::invalid_argument("epoch must be 231 samples long");
        }
        for (int k = 0; k < kSamplesPerChannel; ++k) {
            fv.values.push_back(
                channel[static_cast<std::size_t>(kEpochPre + k * kDecimation)]);
        }
    }
    fv.label = epoch.is_target ? 1 : -1;
    return fv;
}

namespace {

// Iterative radix-2 FFT, in place.
void fft(std::vector<cd>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const cd wlen{std::cos(ang), std::sin(ang)};
        for (std::size_t i = 0; i < n; i += len) {
            cd w{1.0};
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cd u = a[i + j];
                const cd v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

int default_window_len(double fs) {
    const int nominal = static_cast<int>(std::lround(2.0 * fs));
    int p = 1;
    while (p * 2 <= nominal) p *= 2;
    return p;
}

}  // namespace

std::vector<double> welch_psd(const std::vector<double>& x, double fs,
                              int window_len) {
    if (window_len < 8 || (window_len & (window_len - 1)) != 0) {
        throw std::invalid_argument("Welch window length must be a power of two");
    }
    if (static_cast<int>(x.size()) < window_len) {
        throw std::invalid_argument("signal shorter than one Welch window");
    }
    const std::size_t nw = static_cast<std::size_t>(window_len);
    std::vector<double> window(nw);
    double u = 0.0;
    for (std::size_t i = 0; i < nw; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                          static_cast<double>(nw)));
        u += window[i] * window[i];
    }

    const std::size_t hop = nw / 2;
    const std::size_t n_segments = (x.size() - nw) / hop + 1;
    std::vector<double> psd(nw / 2 + 1, 0.0);
    std::vector<cd> buf(nw);
    for (std::size_t s = 0; s < n_segments; ++s) {
        const std::size_t off = s * hop;
        for (std::size_t i = 0; i < nw; ++i) buf[i] = x[off + i] * window[i];
        fft(buf);
        for (std::size_t k = 0; k <= nw / 2; ++k) {
            psd[k] += std::norm(buf[k]);
        }
    }
    const double scale = 1.0 / (fs * u * static_cast<double>(n_segments));
    for (std::size_t k = 0; k <= nw / 2; ++k) {
        psd[k] *= scale;
        if (k != 0 && k != nw / 2) psd[k] *= 2.0;  // one-sided
    }
    return psd;
}

double band_power(const std::vector<double>& x, double fs, double band_lo_hz,
                  double band_hi_hz) {
    const int nw = default_window_len(fs);
    const std::vector<double> psd = welch_psd(x, fs, nw);
    const double df = fs / nw;
    double sum = 0.0;
    int count = 0;
    for (std::size_t k = 0; k < psd.size(); ++k) {
        const double f = static_cast<double>(k) * df;
        if (f >= band_lo_hz && f <= band_hi_hz) {
            sum += psd[k];
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("band contains no PSD bins");
    return sum / count;
}

std::vector<double> FilterChain::operator()(const std::vector<double>& x) const {
    std::vector<double> y = x;
    for (const auto& stage : stages) y = apply_filter(stage, y);
    return y;
}

FilterChain acquisition_chain(double fs) {
    FilterChain chain;
    chain.stages.push_back(design_highpass(2, 0.5, fs));
    chain.stages.push_back(design_lowpass(4, 30.0, fs));
    chain.stages.push_back(design_notch(50.0, fs));
    return chain;
}

FilterChain analysis_chain(double fs) {
    FilterChain chain;
    chain.stages.push_back(design_bandpass(3, 1.0, 30.0, fs));
    return chain;
}

}  // namespace bci
