#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ehrbench/backend.hpp"
#include "ehrbench/formats.hpp"
#include "ehrbench/taskgen.hpp"

namespace ehrbench {

inline constexpr std::string_view kDefaultSystemText = "You are a helpful assistant for structured clinical data.";

/// Fields of every ChatRequest that do not come from the instance.
struct PromptSettings {
    std::string system_text{kDefaultSystemText};
    Decoding decoding;
    std::string model_name;
};

class PoolTooSmall : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Demonstration instances per (task, flavor), stored in seed-shuffled order.
struct ExemplarPool {
    std::uint64_t pool_seed = 0;
    std::map<std::pair<TaskId, Flavor>, std::vector<TaskInstance>> entries;

    const std::vector<TaskInstance>& of(TaskId task, Flavor flavor) const;
};

inline constexpr std::size_t kPoolPerTask = 8;

/// Pool-domain instances for every task and flavor, none sharing a table hash with `eval_hashes`.
ExemplarPool build_pool(std::uint64_t pool_seed, const std::set<std::string>& eval_hashes,
                        std::size_t per_task = kPoolPerTask);

/// k = 0 gives the bare prompt. Otherwise k "Example i:" blocks, each a bare prompt
/// followed by "Answer:" and the rendered gold, then the query prompt. The
/// demonstrations are the first k pool entries whose table differs from the query's.
/// Throws std::invalid_argument for k outside {0,1,3,5} and PoolTooSmall.
ChatRequest assemble(const TaskInstance& instance, int k, const ExemplarPool& pool, InputFormat format,
                     const PromptSettings& settings = {});

/// The demonstrations assemble() would pick.
std::vector<const TaskInstance*> select_demonstrations(const TaskInstance& instance, int k, const ExemplarPool& pool);

}  // namespace ehrbench
