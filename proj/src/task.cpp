#include "ehrbench/task.hpp"

namespace ehrbench {

TaskInfo info(TaskId task) {
    using S = Scenario;
    using L = Level;
    using C = Category;
    using M = MetricKind;
    switch (task) {
        case TaskId::DU1:
        case TaskId::DU2: return {S::DataDriven, L::Understanding, C::InformationRetrieval, M::Accuracy};
        case TaskId::DR1:
        case TaskId::DR2:
        case TaskId::DR3: return {S::DataDriven, L::Reasoning, C::DataAggregation, M::Accuracy};
        case TaskId::DR4:
        case TaskId::DR5: return {S::DataDriven, L::Reasoning, C::ArithmeticComputation, M::Accuracy};
        case TaskId::KU1: return {S::KnowledgeDriven, L::Understanding, C::ClinicalIdentification, M::Auc};
        case TaskId::KR1:
        case TaskId::KR2: return {S::KnowledgeDriven, L::Reasoning, C::DiagnosticAssessment, M::Auc};
        case TaskId::KR3: return {S::KnowledgeDriven, L::Reasoning, C::TreatmentPlanning, M::Auc};
    }
    return {};
}

std::string_view to_string(TaskId task) {
    static constexpr std::array<std::string_view, 11> kNames = {"D-U1", "D-U2", "D-R1", "D-R2", "D-R3", "D-R4",
                                                                "D-R5", "K-U1", "K-R1", "K-R2", "K-R3"};
    return kNames[static_cast<std::size_t>(task)];
}

std::optional<TaskId> parse_task(std::string_view text) {
    for (auto t : kAllTasks)
        if (to_string(t) == text) return t;
    return std::nullopt;
}

std::string_view to_string(Flavor flavor) { return flavor == Flavor::Synthea ? "synthea" : "eicu"; }

std::optional<Flavor> parse_flavor(std::string_view text) {
    if (text == "synthea") return Flavor::Synthea;
    if (text == "eicu") return Flavor::Eicu;
    return std::nullopt;
}

std::string_view to_string(Category c) {
    switch (c) {
        case Category::InformationRetrieval: return "Information retrieval";
        case Category::DataAggregation: return "Data aggregation";
        case Category::ArithmeticComputation: return "Arithmetic computation";
        case Category::ClinicalIdentification: return "Clinical identification";
        case Category::DiagnosticAssessment: return "Diagnostic assessment";
        case Category::TreatmentPlanning: return "Treatment planning";
    }
    return "";
}

std::string_view to_string(MetricKind m) { return m == MetricKind::Accuracy ? "ACC" : "AUC"; }

}  // namespace ehrbench

namespace ehrbench {

std::string to_string(const Bits10& bits) {
    std::string out;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (i) out += ',';
        out += bits[i] ? '1' : '0';
    }
    return out;
}

}  // namespace ehrbench
