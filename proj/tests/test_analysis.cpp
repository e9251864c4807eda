#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "bci/analysis.hpp"
#include "bci/rng.hpp"
#include "bci/table2.hpp"

using namespace bci;

namespace {

SessionResult result_with_pattern(const std::vector<bool>& correct,
                                  int trials_per_block = 2) {
    SessionResult r;
    for (std::size_t k = 0; k < correct.size(); ++k) {
        BlockResult b;
        b.target = static_cast<int>(k % 42);
        b.predicted = correct[k] ? b.target : (b.target + 1) % 42;
        b.trials_used = trials_per_block;
        r.blocks.push_back(b);
    }
    return r;
}

}  // namespace

TEST_CASE("feedback accuracy") {
    std::vector<bool> pattern(42, true);
    CHECK(feedback_accuracy(result_with_pattern(pattern)) ==
          doctest::Approx(100.0));
    for (int k = 0; k < 5; ++k) pattern[static_cast<std::size_t>(k)] = false;
    CHECK(feedback_accuracy(result_with_pattern(pattern)) ==
          doctest::Approx(100.0 * 37.0 / 42.0));  // 88.1 as reported
    CHECK(feedback_accuracy(result_with_pattern(std::vector<bool>(42, false))) ==
          doctest::Approx(0.0));
    CHECK_THROWS_AS(feedback_accuracy(SessionResult{}), std::invalid_argument);
}

TEST_CASE("bit rate anchors") {
    CHECK(bit_rate(1.0, 42, 94.0) == doctest::Approx(60.2).epsilon(0.002));
    CHECK(bit_rate(0.881, 42, 112.0) == doctest::Approx(39.6).epsilon(0.003));
    CHECK(bit_rate(1.0, 42, 84.0) ==
          doctest::Approx(std::log2(42.0) * 60.0 / 4.8).epsilon(1e-9));
    CHECK_THROWS_AS(bit_rate(1.2, 42, 84.0), std::invalid_argument);
    CHECK_THROWS_AS(bit_rate(0.5, 42, 0.0), std::invalid_argument);
}

TEST_CASE("bit rate monotonicity") {
    for (double p = 0.1; p < 0.94; p += 0.05) {
        CHECK(bit_rate(p + 0.05, 42, 100.0) > bit_rate(p, 42, 100.0));
    }
    for (double trials = 84.0; trials < 600.0; trials += 50.0) {
        CHECK(bit_rate(0.8, 42, trials + 50.0) < bit_rate(0.8, 42, trials));
    }
}

TEST_CASE("published accuracy/trials rows reproduce the published bit rates") {
    const auto checks = check_table2();
    REQUIRE(checks.size() == 36);
    for (const Table2Check& c : checks) {
        INFO(c.row.subject, " ", to_string(c.row.paradigm));
        CHECK(std::abs(c.residual) <= 0.15);
    }
}

TEST_CASE("halves comparison") {
    SUBCASE("all-correct session") {
        const auto r = result_with_pattern(std::vector<bool>(42, true));
        const HalvesReport h = halves_comparison(r);
        CHECK(h.first.accuracy_pct == doctest::Approx(100.0));
        CHECK(h.last.accuracy_pct == doctest::Approx(100.0));
        CHECK(h.first.below_accuracy_threshold == 0);
        CHECK(h.last.below_bit_rate_threshold == 0);
    }
    SUBCASE("halves recombine to the full-session accuracy") {
        std::vector<bool> pattern(42, true);
        for (int k : {0, 3, 8, 25, 30, 40}) {
            pattern[static_cast<std::size_t>(k)] = false;
        }
        const auto r = result_with_pattern(pattern);
        const HalvesReport h = halves_comparison(r);
        const double recombined =
            0.5 * (h.first.accuracy_pct + h.last.accuracy_pct);
        CHECK(recombined == doctest::Approx(feedback_accuracy(r)).epsilon(1e-12));
    }
    SUBCASE("errors in the last half lower only the last summary") {
        std::vector<bool> pattern(42, true);
        for (int k = 21; k < 42; k += 3) {
            pattern[static_cast<std::size_t>(k)] = false;
        }
        const HalvesReport h = halves_comparison(result_with_pattern(pattern));
        CHECK(h.first.accuracy_pct == doctest::Approx(100.0));
        CHECK(h.last.accuracy_pct < h.first.accuracy_pct);
        CHECK(h.last.below_accuracy_threshold == 7);
    }
}

TEST_CASE("cohort halves averages per character across subjects") {
    std::vector<SessionResult> cohort;
    std::vector<bool> all_good(42, true);
    std::vector<bool> late_bad(42, true);
    for (int k = 21; k < 42; ++k) late_bad[static_cast<std::size_t>(k)] = false;
    cohort.push_back(result_with_pattern(all_good));
    cohort.push_back(result_with_pattern(late_bad));

    const CohortHalves ch = cohort_halves(cohort);
    REQUIRE(ch.accuracy_pct.size() == 42);
    CHECK(ch.accuracy_pct[0] == doctest::Approx(100.0));
    CHECK(ch.accuracy_pct[41] == doctest::Approx(50.0));
    CHECK(ch.halves.first.accuracy_pct > ch.halves.last.accuracy_pct);
}

TEST_CASE("paired t-test") {
    SUBCASE("identical samples") {
        const std::vector<double> a = {1.0, 2.0, 3.0};
        const StatResult r = paired_t_test(a, a);
        CHECK(r.statistic == doctest::Approx(0.0));
        CHECK(r.p_value == doctest::Approx(1.0));
    }
    SUBCASE("d = [1,2,3,4] hand oracle") {
        const StatResult r =
            paired_t_test({1.0, 2.0, 3.0, 4.0}, {0.0, 0.0, 0.0, 0.0});
        CHECK(r.statistic == doctest::Approx(3.872983).epsilon(1e-6));
        CHECK(std::abs(r.p_value - 0.0305) < 1e-3);
    }
    SUBCASE("published accuracy columns do not differ between paradigms") {
        std::map<std::string, std::pair<double, double>> by_subject;
        for (const Table2Row& row : table2_rows()) {
            if (row.paradigm == ParadigmId::MS_P) {
                by_subject[row.subject].first = row.accuracy_pct;
            } else {
                by_subject[row.subject].second = row.accuracy_pct;
            }
        }
        REQUIRE(by_subject.size() == 18);
        std::vector<double> ms, ls;
        for (const auto& [subject, pair] : by_subject) {
            ms.push_back(pair.first);
            ls.push_back(pair.second);
        }
        CHECK(paired_t_test(ms, ls).p_value > 0.05);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(paired_t_test({1.0}, {1.0, 2.0}),
                        std::invalid_argument);
        CHECK_THROWS_AS(paired_t_test({1.0, 1.0}, {0.0, 0.0}),
                        std::invalid_argument);  // constant nonzero difference
    }
}

TEST_CASE("KS normality") {
    SUBCASE("seeded normal sample passes") {
        Rng rng(1234);
        std::vector<double> x(500);
        for (double& v : x) v = rng.next_gaussian();
        const StatResult r = ks_normality(x);
        CHECK(r.p_value > 0.05);
        CHECK(r.statistic >= 0.0);
        CHECK(r.statistic <= 1.0);
    }
    SUBCASE("seeded uniform sample fails") {
        Rng rng(4321);
        std::vector<double> x(500);
        for (double& v : x) v = rng.next_unit();
        CHECK(ks_normality(x).p_value < 0.05);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(ks_normality({1.0, 2.0, 3.0}), std::invalid_argument);
        CHECK_THROWS_AS(ks_normality({5.0, 5.0, 5.0, 5.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("Pearson and Spearman") {
    SUBCASE("perfect linear relation") {
        const std::vector<double> x = {1, 2, 3, 4, 5, 6};
        std::vector<double> y;
        for (double v : x) y.push_back(2.0 * v + 1.0);
        CHECK(pearson(x, y).statistic == doctest::Approx(1.0));
        CHECK(spearman(x, y).statistic == doctest::Approx(1.0));
        CHECK(pearson(x, y).p_value == doctest::Approx(0.0));
    }
    SUBCASE("monotone nonlinear decreasing") {
        const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8};
        std::vector<double> y;
        for (double v : x) y.push_back(std::exp(-v));
        CHECK(spearman(x, y).statistic == doctest::Approx(-1.0));
        CHECK(std::abs(pearson(x, y).statistic) < 1.0);
        CHECK(pearson(x, y).statistic < 0.0);
    }
    SUBCASE("one adjacent swap in n = 10 gives rho = 0.9879") {
        std::vector<double> x, y;
        for (int i = 1; i <= 10; ++i) {
            x.push_back(i);
            y.push_back(i);
        }
        std::swap(y[4], y[5]);
        const StatResult r = spearman(x, y);
        CHECK(r.statistic ==
              doctest::Approx(1.0 - 6.0 * 2.0 / 990.0).epsilon(1e-6));
        CHECK(std::abs(r.statistic - 0.9879) < 1e-4);
        CHECK(r.test_id == TestId::SPEARMAN);
    }
    SUBCASE("ties get average ranks") {
        const std::vector<double> x = {1, 2, 2, 3};
        const std::vector<double> y = {10, 20, 20, 30};
        CHECK(spearman(x, y).statistic == doctest::Approx(1.0));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(pearson({1, 2}, {3, 4}), std::invalid_argument);
        CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), std::invalid_argument);
    }
}

TEST_CASE("t-distribution p-values against table anchors") {
    // two-sided p for classic critical values
    CHECK(t_test_p_value(2.776, 4.0) == doctest::Approx(0.05).epsilon(2e-3));
    CHECK(t_test_p_value(2.228, 10.0) == doctest::Approx(0.05).epsilon(2e-3));
    CHECK(t_test_p_value(1.96, 1e6) == doctest::Approx(0.05).epsilon(2e-3));
    CHECK(t_test_p_value(0.0, 5.0) == doctest::Approx(1.0));
}
