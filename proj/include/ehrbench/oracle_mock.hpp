#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ehrbench/backend.hpp"
#include "ehrbench/executor.hpp"
#include "ehrbench/taskgen.hpp"

namespace ehrbench {

/// Raw executor result a correct program would produce for this gold
/// (ID lists as a Python list of unpadded numbers, booleans as True/False).
std::string gold_result(const GoldAnswer& gold);

struct OracleMockOptions {
    /// Share of answer requests that get an unusable reply, chosen by request hash.
    double error_rate = 0.0;
    /// Rules consulted before the built-in ones.
    std::vector<MockBackend::Rule> first;
};

/// Scripted backend that knows the gold answers of `instances`. Bare prompts in any
/// format get the gold answer line; EHRMaster stage prompts get fixed plan, alignment
/// and code replies, and direct prompts get the gold ("Label: x" for label contracts).
std::shared_ptr<MockBackend> oracle_mock(std::vector<TaskInstance> instances, OracleMockOptions options = {});

/// Executor stub that returns each instance's gold_result, keyed by request id prefix.
std::shared_ptr<FunctionExecutor> gold_executor(const std::vector<TaskInstance>& instances);

}  // namespace ehrbench
