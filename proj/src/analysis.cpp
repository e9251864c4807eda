#include "bci/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bci {

namespace {

// Regularized incomplete beta I_x(a, b), continued fraction (Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                            std::lgamma(b) + a * std::log(x) +
                            b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) /
           static_cast<double>(v.size());
}

std::vector<double> average_ranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

StatResult correlation_result(const std::vector<double>& x,
                              const std::vector<double>& y, TestId id) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 3) {
        throw std::invalid_argument("correlation needs equal lengths >= 3");
    }
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw std::invalid_argument("correlation undefined for zero variance");
    }
    double r = sxy / std::sqrt(sxx * syy);
    r = std::clamp(r, -1.0, 1.0);

    StatResult res;
    res.statistic = r;
    res.n = static_cast<int>(n);
    res.test_id = id;
    const double df = static_cast<double>(n) - 2.0;
    if (std::abs(r) >= 1.0) {
        res.p_value = 0.0;
    } else {
        const double t = r * std::sqrt(df / (1.0 - r * r));
        res.p_value = t_test_p_value(t, df);
    }
    return res;
}

double log2_safe(double v) { return std::log2(v); }

}  // namespace

double t_test_p_value(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

double feedback_accuracy(const SessionResult& result) {
    if (result.blocks.empty()) throw std::invalid_argument("empty session");
    int correct = 0;
    for (const BlockResult& b : result.blocks) {
        if (b.predicted == b.target) ++correct;
    }
    return 100.0 * correct / static_cast<double>(result.blocks.size());
}

double bit_rate(double accuracy_fraction, int n_items, double trials_total,
                double trial_s) {
    return bit_rate(accuracy_fraction, n_items, trials_total, trial_s, 42);
}

double bit_rate(double accuracy_fraction, int n_items, double trials_total,
                double trial_s, int n_selections) {
    if (accuracy_fraction < 0.0 || accuracy_fraction > 1.0) {
        throw std::invalid_argument("accuracy fraction outside [0, 1]");
    }
    if (trials_total <= 0.0 || n_items < 2 || n_selections < 1) {
        throw std::invalid_argument("invalid bit rate arguments");
    }
    const double p = accuracy_fraction;
    const double n = static_cast<double>(n_items);
    double bits = log2_safe(n);
    if (p > 0.0) bits += p * log2_safe(p);
    if (p < 1.0) bits += (1.0 - p) * log2_safe((1.0 - p) / (n - 1.0));
    const double seconds_per_selection =
        trials_total / static_cast<double>(n_selections) * trial_s;
    return bits * 60.0 / seconds_per_selection;
}

namespace {

HalfSummary summarize_characters(const std::vector<double>& accuracy_pct,
                                 const std::vector<double>& rate,
                                 const std::vector<double>& trials,
                                 double trial_s) {
    HalfSummary s;
    s.accuracy_pct = mean_of(accuracy_pct);
    s.mean_trials = mean_of(trials);
    s.bit_rate = bit_rate(s.accuracy_pct / 100.0, kNumItems,
                          s.mean_trials, trial_s, 1);
    for (double a : accuracy_pct) {
        if (a < 80.0) ++s.below_accuracy_threshold;
    }
    for (double r : rate) {
        if (r < 30.0) ++s.below_bit_rate_threshold;
    }
    return s;
}

HalvesReport halves_from_characters(const std::vector<double>& accuracy_pct,
                                    const std::vector<double>& rate,
                                    const std::vector<double>& trials,
                                    double trial_s) {
    const std::size_t n = accuracy_pct.size();
    if (n < 2 || n % 2 != 0) {
        throw std::invalid_argument("halves comparison needs an even block count");
    }
    const std::size_t half = n / 2;
    HalvesReport report;
    report.first = summarize_characters(
        {accuracy_pct.begin(), accuracy_pct.begin() + half},
        {rate.begin(), rate.begin() + half},
        {trials.begin(), trials.begin() + half}, trial_s);
    report.last = summarize_characters(
        {accuracy_pct.begin() + half, accuracy_pct.end()},
        {rate.begin() + half, rate.end()},
        {trials.begin() + half, trials.end()}, trial_s);
    return report;
}

}  // namespace

HalvesReport halves_comparison(const SessionResult& result) {
    std::vector<double> acc, rate, trials;
    for (const BlockResult& b : result.blocks) {
        const double a = b.predicted == b.target ? 100.0 : 0.0;
        acc.push_back(a);
        trials.push_back(static_cast<double>(b.trials_used));
        rate.push_back(bit_rate(a / 100.0, kNumItems,
                                static_cast<double>(b.trials_used), 2.4, 1));
    }
    return halves_from_characters(acc, rate, trials, 2.4);
}

CohortHalves cohort_halves(const std::vector<SessionResult>& results) {
    if (results.empty()) throw std::invalid_argument("empty cohort");
    const std::size_t n_blocks = results.front().blocks.size();
    for (const SessionResult& r : results) {
        if (r.blocks.size() != n_blocks) {
            throw std::invalid_argument("cohort sessions have unequal block counts");
        }
    }
    CohortHalves out;
    std::vector<double> trials(n_blocks, 0.0);
    for (std::size_t k = 0; k < n_blocks; ++k) {
        int correct = 0;
        double t = 0.0;
        for (const SessionResult& r : results) {
            if (r.blocks[k].predicted == r.blocks[k].target) ++correct;
            t += r.blocks[k].trials_used;
        }
        const double acc = 100.0 * correct / static_cast<double>(results.size());
        trials[k] = t / static_cast<double>(results.size());
        out.accuracy_pct.push_back(acc);
        out.bit_rate.push_back(
            bit_rate(acc / 100.0, kNumItems, trials[k], 2.4, 1));
    }
    out.halves =
        halves_from_characters(out.accuracy_pct, out.bit_rate, trials, 2.4);
    return out;
}

BandPowerReport fatigue_report(const ContinuousRecording& recording) {
    if (recording.channels != kChannelNames) {
        throw std::invalid_argument("recording does not carry the 16-channel montage");
    }
    const int n_blocks = static_cast<int>(recording.block_targets.size());
    if (n_blocks < 2 || recording.events.empty()) {
        throw std::invalid_argument("recording does not span a full session");
    }
    const int half = n_blocks / 2;

    auto span_of = [&](int block_lo, int block_hi) {
        std::int64_t lo = -1, hi = -1;
        for (const FlashEvent& ev : recording.events) {
            if (ev.block_index >= block_lo && ev.block_index < block_hi) {
                if (lo < 0) lo = ev.onset_sample;
                hi = ev.onset_sample + kEpochPost;
            }
        }
        if (lo < 0) throw std::invalid_argument("recording is missing blocks");
        hi = std::min<std::int64_t>(hi, static_cast<std::int64_t>(recording.n_samples()));
        return std::pair<std::int64_t, std::int64_t>(lo, hi);
    };

    const int fz = channel_index("Fz");
    const int pz = channel_index("Pz");
    auto band_of = [&](int ch, std::pair<std::int64_t, std::int64_t> span,
                       double lo_hz, double hi_hz) {
        const auto& data = recording.data[static_cast<std::size_t>(ch)];
        std::vector<double> x(data.begin() + span.first, data.begin() + span.second);
        return band_power(x, recording.sample_rate_hz, lo_hz, hi_hz);
    };

    const auto first_span = span_of(0, half);
    const auto last_span = span_of(n_blocks - half, n_blocks);
    BandPowerReport report;
    report.theta_fz_first = band_of(fz, first_span, kThetaLoHz, kThetaHiHz);
    report.theta_fz_last = band_of(fz, last_span, kThetaLoHz, kThetaHiHz);
    report.alpha_pz_first = band_of(pz, first_span, kAlphaLoHz, kAlphaHiHz);
    report.alpha_pz_last = band_of(pz, last_span, kAlphaLoHz, kAlphaHiHz);
    return report;
}

CohortFatigue fatigue_cohort_test(const std::vector<BandPowerReport>& reports) {
    std::vector<double> alpha_first, alpha_last, theta_first, theta_last;
    for (const BandPowerReport& r : reports) {
        alpha_first.push_back(r.alpha_pz_first);
        alpha_last.push_back(r.alpha_pz_last);
        theta_first.push_back(r.theta_fz_first);
        theta_last.push_back(r.theta_fz_last);
    }
    CohortFatigue out;
    out.alpha_test = paired_t_test(alpha_first, alpha_last);
    out.theta_test = paired_t_test(theta_first, theta_last);
    return out;
}

StatResult paired_t_test(const std::vector<double>& a,
                         const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("paired t-test needs equal lengths");
    }
    const std::size_t n = a.size();
    if (n < 2) throw std::invalid_argument("paired t-test needs n >= 2");
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    const double md = mean_of(d);
    double ss = 0.0;
    for (double v : d) ss += (v - md) * (v - md);
    const double sd = std::sqrt(ss / (static_cast<double>(n) - 1.0));

    StatResult res;
    res.n = static_cast<int>(n);
    res.test_id = TestId::PAIRED_T;
    if (sd == 0.0) {
        if (md != 0.0) {
            throw std::invalid_argument(
                "paired t-test undefined: zero difference variance");
        }
        res.statistic = 0.0;
        res.p_value = 1.0;
        return res;
    }
    res.statistic = md / (sd / std::sqrt(static_cast<double>(n)));
    res.p_value = t_test_p_value(res.statistic, static_cast<double>(n) - 1.0);
    return res;
}

StatResult ks_normality(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 4) throw std::invalid_argument("KS test needs n >= 4");
    const double m = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / (static_cast<double>(n) - 1.0));
    if (sd == 0.0) {
        throw std::invalid_argument("KS test undefined for a constant sample");
    }

    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    double d_stat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = normal_cdf((sorted[i] - m) / sd);
        const double upper = static_cast<double>(i + 1) / static_cast<double>(n);
        const double lower = static_cast<double>(i) / static_cast<double>(n);
        d_stat = std::max({d_stat, upper - f, f - lower});
    }

    const double sqn = std::sqrt(static_cast<double>(n));
    const double lambda = (sqn + 0.12 + 0.11 / sqn) * d_stat;
    double p = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        p += 2.0 * sign * term;
        sign = -sign;
        if (term < 1e-12) break;
    }
    StatResult res;
    res.statistic = d_stat;
    res.p_value = std::clamp(p, 0.0, 1.0);
    res.n = static_cast<int>(n);
    res.test_id = TestId::KS_NORMAL;
    return res;
}

StatResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    return correlation_result(x, y, TestId::PEARSON);
}

StatResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
    StatResult res =
        correlation_result(average_ranks(x), average_ranks(y), TestId::PEARSON);
    res.test_id = TestId::SPEARMAN;
    return res;
}

}  // namespace bci
