#include "bci/table2.hpp"

#include "bci/analysis.hpp"

namespace bci {

const std::vector<Table2Row>& table2_rows() {
    static const std::vector<Table2Row> rows = [] {
        struct Raw {
            const char* subject;
            double acc_ms, acc_ls;
            int trials_ms, trials_ls;
            double rate_ms, rate_ls;
        };
        static constexpr Raw kRaw[] = {
            {"S1", 88.1, 76.2, 112, 127, 39.6, 27.5},
            {"S2", 81.0, 92.9, 104, 105, 37.1, 46.4},
            {"S3", 81.0, 85.7, 110, 103, 35.1, 41.1},
            {"S4", 59.5, 88.1, 121, 120, 19.5, 37.0},
            {"S5", 61.9, 71.4, 131, 136, 19.2, 23.1},
            {"S6", 64.3, 47.6, 133, 138, 20.0, 12.1},
            {"S7", 78.6, 83.3, 110, 119, 33.4, 33.9},
            {"S8", 100.0, 97.6, 94, 91, 60.2, 58.9},
            {"S9", 90.5, 97.6, 95, 95, 49.0, 56.4},
            {"S10", 85.7, 100.0, 104, 99, 40.7, 57.2},
            {"S11", 81.0, 69.0, 107, 121, 36.0, 24.6},
            {"S12", 90.5, 92.9, 95, 102, 49.0, 47.8},
            {"S13", 92.9, 81.0, 100, 112, 48.7, 34.4},
            {"S14", 83.2, 92.9, 98, 99, 41.1, 49.2},
            {"S15", 81.0, 85.7, 125, 119, 30.9, 35.6},
            {"S16", 95.2, 100.0, 107, 91, 47.7, 62.2},
            {"S17", 71.4, 61.9, 115, 128, 27.4, 19.6},
            {"S18", 90.5, 78.6, 105, 103, 44.3, 35.6},
        };
        std::vector<Table2Row> v;
        for (const Raw& r : kRaw) {
            v.push_back({r.subject, ParadigmId::MS_P, r.acc_ms, r.trials_ms,
                         r.rate_ms});
            v.push_back({r.subject, ParadigmId::LS_P, r.acc_ls, r.trials_ls,
                         r.rate_ls});
        }
        return v;
    }();
    return rows;
}

std::vector<Table2Check> check_table2() {
    std::vector<Table2Check> checks;
    for (const Table2Row& row : table2_rows()) {
        Table2Check c;
        c.row = row;
        c.computed_bit_rate = bit_rate(row.accuracy_pct / 100.0, kNumItems,
                                       static_cast<double>(row.trials));
        c.residual = c.computed_bit_rate - row.reported_bit_rate;
        checks.push_back(c);
    }
    return checks;
}

}  // namespace bci
