#pragma once

#include <vector>

#include "bci/session.hpp"
#include "bci/synth.hpp"

namespace bci {

enum class TestId { PAIRED_T, KS_NORMAL, PEARSON, SPEARMAN };

struct StatResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int n = 0;
    TestId test_id = TestId::PAIRED_T;
};

double feedback_accuracy(const SessionResult& result);  // percent

// Wolpaw bits/selection times selections per minute, over flashing time
// only (the 4 s feedback interval is excluded; this reproduces the reported
// per-subject rates).
double bit_rate(double accuracy_fraction, int n_items, double trials_total,
                double trial_s = 2.4);
double bit_rate(double accuracy_fraction, int n_items, double trials_total,
                double trial_s, int n_selections);

struct HalfSummary {
    double accuracy_pct = 0.0;
    double mean_trials = 0.0;
    double bit_rate = 0.0;
    int below_accuracy_threshold = 0;  // characters below 80 %
    int below_bit_rate_threshold = 0;  // characters below 30 bits/min
};

struct HalvesReport {
    HalfSummary first;  // blocks 1..21
    HalfSummary last;   // blocks 22..42
};

HalvesReport halves_comparison(const SessionResult& result);

// Cohort view: per-character accuracy (percent) and bit rate across
// subjects, in chronological block order.
struct CohortHalves {
    std::vector<double> accuracy_pct;  // length 42
    std::vector<double> bit_rate;      // length 42
    HalvesReport halves;
};

CohortHalves cohort_halves(const std::vector<SessionResult>& results);

struct BandPowerReport {
    double theta_fz_first = 0.0;
    double theta_fz_last = 0.0;
    double alpha_pz_first = 0.0;
    double alpha_pz_last = 0.0;
};

// Welch band power at Fz (theta) and Pz (alpha) over the first-21-block vs
// last-21-block spans of an online recording.
BandPowerReport fatigue_report(const ContinuousRecording& recording);

struct CohortFatigue {
    StatResult alpha_test;  // paired t, first vs last
    StatResult theta_test;
};

CohortFatigue fatigue_cohort_test(const std::vector<BandPowerReport>& reports);

StatResult paired_t_test(const std::vector<double>& a,
                         const std::vector<double>& b);

// One-sample KS against a normal with the sample mean and sd; asymptotic
// p-value, no small-sample correction.
StatResult ks_normality(const std::vector<double>& x);

StatResult pearson(const std::vector<double>& x, const std::vector<double>& y);
StatResult spearman(const std::vector<double>& x, const std::vector<double>& y);

// Two-sided p for a t statistic with df degrees of freedom.
double t_test_p_value(double t, double df);

}  // namespace bci
