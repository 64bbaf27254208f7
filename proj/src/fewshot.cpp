#include "ehrbench/fewshot.hpp"

#include "ehrbench/rng.hpp"

namespace ehrbench {

const std::vector<TaskInstance>& ExemplarPool::of(TaskId task, Flavor flavor) const {
    static const std::vector<TaskInstance> none;
    auto it = entries.find({task, flavor});
    return it == entries.end() ? none : it->second;
}

ExemplarPool build_pool(std::uint64_t pool_seed, const std::set<std::string>& eval_hashes, std::size_t per_task) {
    ExemplarPool pool;
    pool.pool_seed = pool_seed;
    for (auto flavor : kAllFlavors)
        for (auto task : kAllTasks) {
            auto items = synthesize(task, flavor, pool_seed, per_task, SeedDomain::Pool, eval_hashes);
            Rng rng(derive_seed(pool_seed, {static_cast<std::uint64_t>(task), static_cast<std::uint64_t>(flavor), 7}));
            rng.shuffle(items);
            pool.entries[{task, flavor}] = std::move(items);
        }
    return pool;
}

std::vector<const TaskInstance*> select_demonstrations(const TaskInstance& instance, int k, const ExemplarPool& pool) {
    if (k != 0 && k != 1 && k != 3 && k != 5) throw std::invalid_argument("k must be 0, 1, 3 or 5");
    std::vector<const TaskInstance*> out;
    if (k == 0) return out;
    const auto query_hash = table_hash(instance.table);
    for (const auto& demo : pool.of(instance.task, instance.flavor)) {
        if (static_cast<int>(out.size()) == k) break;
        if (table_hash(demo.table) == query_hash) continue;
        out.push_back(&demo);
    }
    if (static_cast<int>(out.size()) < k)
        throw PoolTooSmall("pool for " + std::string(to_string(instance.task)) + "/" +
                           std::string(to_string(instance.flavor)) + " has fewer than " + std::to_string(k) +
                           " usable exemplars");
    return out;
}

ChatRequest assemble(const TaskInstance& instance, int k, const ExemplarPool& pool, InputFormat format,
                     const PromptSettings& settings) {
    ChatRequest req;
    req.system_text = settings.system_text;
    req.decoding = settings.decoding;
    req.model_name = settings.model_name;
    const auto demos = select_demonstrations(instance, k, pool);
    std::string user;
    int i = 0;
    for (const auto* demo : demos) {
        user += "Example " + std::to_string(++i) + ":\n" + bare_prompt(*demo, format) + "\nAnswer:\n" +
                render_answer(demo->contract, demo->gold) + "\n\n";
    }
    if (!demos.empty()) user += "Now answer the following.\n\n";
    user += bare_prompt(instance, format);
    req.user_text = std::move(user);
    return req;
}

}  // namespace ehrbench
