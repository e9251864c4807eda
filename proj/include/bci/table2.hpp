#pragma once

#include <string>
#include <vector>

#include "bci/paradigm.hpp"

namespace bci {

// Published per-subject online results: feedback accuracy, trials used for
// the 42 targets and the reported bit rate. Used to verify the bit-rate
// reconstruction.
struct Table2Row {
    std::string subject;
    ParadigmId paradigm;
    double accuracy_pct;
    int trials;
    double reported_bit_rate;
};

const std::vector<Table2Row>& table2_rows();  // 36 rows

struct Table2Check {
    Table2Row row;
    double computed_bit_rate;
    double residual;  // computed - reported
};

std::vector<Table2Check> check_table2();

}  // namespace bci
