#pragma once

// Bridges TaskInstance records to the naive reference oracle.

#include <string>

#include "ehrbench/taskgen.hpp"
#include "naive_oracle.hpp"

namespace naive {

/// Naive answer line for a Data-Driven instance, rendered like the production contract.
inline std::string answer_line(const ehrbench::TaskInstance& inst) {
    using namespace ehrbench;
    const std::string task(to_string(inst.task));
    const bool eicu = inst.flavor == Flavor::Eicu;
    const auto tsv = render_tsv(inst.table);
    const auto& p = inst.params;
    std::string value;
    switch (inst.task) {
        case TaskId::DU1:
        case TaskId::DU2: {
            const char* op = p.filter.op == CompareOp::Gt ? "gt" : "lt";
            return filter_ids(task, tsv, p.filter.equals, p.filter.numeric_column, op, p.filter.threshold);
        }
        case TaskId::DR1:
        case TaskId::DR2:
        case TaskId::DR3:
            value = observations(task, tsv, eicu ? "Temperature" : "Pain severity", p.patient_id, eicu ? 1 : 0);
            break;
        default:
            value = eicu ? eicu_money(task, tsv, p.patient_id) : synthea_money(task, tsv, p.patient_id);
            break;
    }
    return eicu ? value : task + ": " + value;
}

}  // namespace naive
