#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ehrbench {

enum class TaskId { DU1, DU2, DR1, DR2, DR3, DR4, DR5, KU1, KR1, KR2, KR3 };

inline constexpr std::array<TaskId, 11> kAllTasks = {TaskId::DU1, TaskId::DU2, TaskId::DR1, TaskId::DR2,
                                                     TaskId::DR3, TaskId::DR4, TaskId::DR5, TaskId::KU1,
                                                     TaskId::KR1, TaskId::KR2, TaskId::KR3};

enum class Flavor { Synthea, Eicu };

inline constexpr std::array<Flavor, 2> kAllFlavors = {Flavor::Synthea, Flavor::Eicu};

enum class Scenario { DataDriven, KnowledgeDriven };
enum class Level { Understanding, Reasoning };
enum class Category {
    InformationRetrieval,
    DataAggregation,
    ArithmeticComputation,
    ClinicalIdentification,
    DiagnosticAssessment,
    TreatmentPlanning,
};
enum class MetricKind { Accuracy, Auc };

struct TaskInfo {
    Scenario scenario;
    Level level;
    Category category;
    MetricKind metric;
};

TaskInfo info(TaskId task);

/// "D-U1" ... "K-R3".
std::string_view to_string(TaskId task);
std::optional<TaskId> parse_task(std::string_view text);

/// "synthea" / "eicu".
std::string_view to_string(Flavor flavor);
std::optional<Flavor> parse_flavor(std::string_view text);

std::string_view to_string(Category c);
std::string_view to_string(MetricKind m);

inline bool is_data_driven(TaskId t) { return info(t).scenario == Scenario::DataDriven; }

}  // namespace ehrbench

namespace ehrbench {

/// Ten-position binary label vector (eICU K-R2 diseases, K-R3 drugs).
using Bits10 = std::array<std::uint8_t, 10>;

std::string to_string(const Bits10& bits);

}  // namespace ehrbench
