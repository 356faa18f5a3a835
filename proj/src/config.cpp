#include "codesum/config.hpp"

#include "codesum/hash.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace codesum {

using nlohmann::json;
using Type = ConfigKey::Type;

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"dataset.name", Type::string, "dataset name used in cache paths"},
        {"dataset.kind", Type::string, "corpus layout: poj104 or flat"},
        {"dataset.path", Type::path, "corpus root directory"},
        {"dataset.pairs", Type::path, "labelled pair file (JSONL); sampled when absent"},
        {"dataset.sampling.n_pos", Type::integer, "clone pairs to sample"},
        {"dataset.sampling.n_neg", Type::integer, "non-clone pairs to sample"},
        {"dataset.sampling.seed", Type::integer, "pair sampling seed"},
        {"dataset.max_problems", Type::integer, "keep the first N problems"},
        {"dataset.max_per_problem", Type::integer, "keep the first N programs per problem"},
        {"llm.provider", Type::string, "fixture or openai"},
        {"llm.provider_id", Type::string, "provider identity for the summary cache"},
        {"llm.model", Type::string, "chat model name"},
        {"llm.endpoint", Type::string, "chat API base URL"},
        {"llm.fixture", Type::path, "fixture JSONL for the offline provider"},
        {"llm.template", Type::path, "prompt template file with one {code} placeholder"},
        {"llm.language", Type::string, "summary language: en or zh"},
        {"llm.temperature", Type::real, "sampling temperature"},
        {"llm.max_tokens", Type::integer, "completion token budget"},
        {"llm.parallelism", Type::integer, "concurrent provider requests"},
        {"llm.failure_cap", Type::real, "tolerated fraction of failed fragments"},
        {"llm.context_limit", Type::integer, "provider context window in tokens"},
        {"embedding.provider", Type::string, "deterministic or openai"},
        {"embedding.model", Type::string, "embedding model name"},
        {"embedding.endpoint", Type::string, "embedding API base URL"},
        {"embedding.dim", Type::integer, "embedding dimension"},
        {"embedding.seed", Type::integer, "deterministic embedder seed"},
        {"embedding.batch_size", Type::integer, "texts per embedding request"},
        {"embedding.parallelism", Type::integer, "concurrent embedding requests"},
        {"tasks.clone.enabled", Type::boolean, "run clone detection"},
        {"tasks.clone.grid", Type::real_list, "comma-separated thresholds"},
        {"tasks.clone.averaging", Type::string, "weighted or binary"},
        {"tasks.cluster.enabled", Type::boolean, "run clustering"},
        {"tasks.cluster.k", Type::integer, "number of clusters"},
        {"tasks.cluster.seed", Type::integer, "k-means seed"},
        {"tasks.cluster.restarts", Type::integer, "k-means restarts"},
        {"tasks.cluster.max_iter", Type::integer, "Lloyd iterations per restart"},
        {"tasks.cluster.tol", Type::real, "centroid shift tolerance"},
        {"tasks.viz.enabled", Type::boolean, "run the 2-D projection"},
        {"tasks.viz.perplexity", Type::real, "t-SNE perplexity"},
        {"tasks.viz.learning_rate", Type::real, "t-SNE learning rate"},
        {"tasks.viz.iterations", Type::integer, "t-SNE iterations"},
        {"tasks.viz.seed", Type::integer, "t-SNE seed"},
        {"tasks.viz.early_exaggeration", Type::real, "early exaggeration factor"},
        {"tasks.viz.exaggeration_iters", Type::integer, "iterations with exaggeration"},
        {"stopwords.enabled", Type::boolean, "remove stop words before embedding"},
        {"stopwords.list", Type::path, "stop list file"},
        {"cache_root", Type::path, "summary cache root"},
        {"output_dir", Type::path, "output directory"},
    };
    return keys;
}

namespace {

const ConfigKey* find_key(const std::string& key) {
    for (const auto& k : config_keys()) {
        if (key == k.key) {
            return &k;
        }
    }
    return nullptr;
}

json::json_pointer pointer_for(const std::string& dotted) {
    std::string p;
    std::stringstream ss(dotted);
    std::string part;
    while (std::getline(ss, part, '.')) {
        p += '/';
        p += part;
    }
    return json::json_pointer(p);
}

long long parse_integer(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError(fmt::format("{}: '{}' is not an integer", key, v));
    }
    return out;
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) {
            return d;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
}

void collect_leaves(const json& node, const std::string& prefix, std::vector<std::string>& out) {
    if (node.is_object()) {
        for (const auto& [k, v] : node.items()) {
            collect_leaves(v, prefix.empty() ? k : prefix + "." + k, out);
        }
    } else {
        out.push_back(prefix);
    }
}

template <typename T>
T get_or(const json& tree, const char* dotted, T fallback) {
    const auto ptr = pointer_for(dotted);
    if (!tree.contains(ptr) || tree.at(ptr).is_null()) {
        return fallback;
    }
    try {
        return tree.at(ptr).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(fmt::format("{}: wrong type", dotted));
    }
}

template <typename T>
std::optional<T> get_opt(const json& tree, const char* dotted) {
    const auto ptr = pointer_for(dotted);
    if (!tree.contains(ptr) || tree.at(ptr).is_null()) {
        return std::nullopt;
    }
    try {
        return tree.at(ptr).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(fmt::format("{}: wrong type", dotted));
    }
}

std::size_t get_count(const json& tree, const char* dotted, std::size_t fallback) {
    const auto v = get_or<long long>(tree, dotted, static_cast<long long>(fallback));
    if (v < 0) {
        throw ConfigError(fmt::format("{} must be non-negative", dotted));
    }
    return static_cast<std::size_t>(v);
}

std::optional<std::size_t> get_opt_count(const json& tree, const char* dotted) {
    const auto v = get_opt<long long>(tree, dotted);
    if (!v) {
        return std::nullopt;
    }
    if (*v < 0) {
        throw ConfigError(fmt::format("{} must be non-negative", dotted));
    }
    return static_cast<std::size_t>(*v);
}

std::optional<std::filesystem::path> get_opt_path(const json& tree, const char* dotted) {
    auto s = get_opt<std::string>(tree, dotted);
    if (!s || s->empty()) {
        return std::nullopt;
    }
    return std::filesystem::path(*s);
}

bool task_enabled(const json& tree, const char* task) {
    const auto ptr = pointer_for(std::string("tasks.") + task);
    if (!tree.contains(ptr)) {
        return false;
    }
    const auto& node = tree.at(ptr);
    if (!node.is_object()) {
        throw ConfigError(fmt::format("tasks.{} must be an object", task));
    }
    return node.value("enabled", true);
}

void require_exists(const std::filesystem::path& p, const char* what) {
    if (!std::filesystem::exists(p)) {
        throw ConfigError(fmt::format("{} '{}' does not exist", what, p.string()));
    }
}

}  // namespace

void apply_override(json& tree, const std::string& key, const std::string& value) {
    const ConfigKey* k = find_key(key);
    if (!k) {
        throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
    const auto ptr = pointer_for(key);
    switch (k->type) {
    case Type::string:
    case Type::path:
        tree[ptr] = value;
        break;
    case Type::integer:
        tree[ptr] = parse_integer(key, value);
        break;
    case Type::real:
        tree[ptr] = parse_real(key, value);
        break;
    case Type::boolean:
        if (value == "true" || value == "1" || value == "on") {
            tree[ptr] = true;
        } else if (value == "false" || value == "0" || value == "off") {
            tree[ptr] = false;
        } else {
            throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, value));
        }
        break;
    case Type::real_list: {
        json list = json::array();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            list.push_back(parse_real(key, item));
        }
        tree[ptr] = std::move(list);
        break;
    }
    }
}

json load_config_tree(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
    }
    json tree;
    try {
        tree = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config '{}' is not valid JSON: {}", path.string(), e.what()));
    }
    if (!tree.is_object()) {
        throw ConfigError("config root must be a JSON object");
    }
    const auto base = path.parent_path();
    for (const auto& k : config_keys()) {
        if (k.type != Type::path) {
            continue;
        }
        const auto ptr = pointer_for(k.key);
        if (tree.contains(ptr) && tree.at(ptr).is_string()) {
            const std::filesystem::path p = tree.at(ptr).get<std::string>();
            if (!p.empty() && p.is_relative()) {
                tree[ptr] = (base / p).lexically_normal().string();
            }
        }
    }
    return tree;
}

PipelineConfig parse_config(const json& tree) {
    if (!tree.is_object()) {
        throw ConfigError("config root must be a JSON object");
    }
    std::vector<std::string> leaves;
    collect_leaves(tree, "", leaves);
    for (const auto& leaf : leaves) {
        if (!find_key(leaf)) {
            throw ConfigError(fmt::format("unknown config key '{}'", leaf));
        }
    }

    PipelineConfig c;
    auto& d = c.dataset;
    d.path = get_or<std::string>(tree, "dataset.path", "");
    if (d.path.empty()) {
        throw ConfigError("dataset.path is required");
    }
    d.name = get_or<std::string>(tree, "dataset.name", "");
    if (d.name.empty()) {
        auto trimmed = d.path.lexically_normal();
        if (!trimmed.has_filename()) {
            trimmed = trimmed.parent_path();
        }
        d.name = trimmed.filename().string();
    }
    const auto kind = get_or<std::string>(tree, "dataset.kind", "poj104");
    if (kind == "poj104") {
        d.layout = CorpusLayout::poj104;
    } else if (kind == "flat") {
        d.layout = CorpusLayout::flat;
    } else {
        throw ConfigError(fmt::format("dataset.kind must be poj104 or flat, got '{}'", kind));
    }
    d.pairs = get_opt_path(tree, "dataset.pairs");
    d.n_pos = get_count(tree, "dataset.sampling.n_pos", 0);
    d.n_neg = get_count(tree, "dataset.sampling.n_neg", 0);
    d.seed = get_or<std::uint64_t>(tree, "dataset.sampling.seed", 0);
    d.max_problems = get_opt_count(tree, "dataset.max_problems");
    d.max_per_problem = get_opt_count(tree, "dataset.max_per_problem");

    auto& l = c.llm;
    l.provider = get_or<std::string>(tree, "llm.provider", "fixture");
    if (l.provider != "fixture" && l.provider != "openai") {
        throw ConfigError(fmt::format("llm.provider must be fixture or openai, got '{}'", l.provider));
    }
    l.model = get_or<std::string>(tree, "llm.model", l.provider == "openai" ? "gpt-3.5-turbo" : "");
    l.endpoint = get_or<std::string>(tree, "llm.endpoint", "");
    l.provider_id = get_or<std::string>(tree, "llm.provider_id", "");
    if (l.provider_id.empty()) {
        l.provider_id = l.provider == "fixture" ? "fixture" : l.provider + ":" + l.model;
    }
    l.fixture = get_opt_path(tree, "llm.fixture");
    l.template_path = get_opt_path(tree, "llm.template");
    l.language = get_or<std::string>(tree, "llm.language", "en");
    l.temperature = get_or<double>(tree, "llm.temperature", 0.0);
    l.max_tokens = static_cast<int>(get_count(tree, "llm.max_tokens", 256));
    l.parallelism = get_count(tree, "llm.parallelism", 4);
    l.failure_cap = get_or<double>(tree, "llm.failure_cap", 0.01);
    l.context_limit = get_opt_count(tree, "llm.context_limit");
    if (l.provider == "fixture" && !l.fixture) {
        throw ConfigError("llm.fixture is required for the fixture provider");
    }
    if (l.max_tokens < 1 || l.parallelism < 1) {
        throw ConfigError("llm.max_tokens and llm.parallelism must be at least 1");
    }
    if (!(l.failure_cap >= 0.0 && l.failure_cap <= 1.0)) {
        throw ConfigError("llm.failure_cap must lie in [0, 1]");
    }

    auto& e = c.embedding;
    e.provider = get_or<std::string>(tree, "embedding.provider", "deterministic");
    if (e.provider != "deterministic" && e.provider != "openai") {
        throw ConfigError(fmt::format("embedding.provider must be deterministic or openai, got '{}'", e.provider));
    }
    e.model = get_or<std::string>(tree, "embedding.model", "");
    e.endpoint = get_or<std::string>(tree, "embedding.endpoint", "");
    e.dim = get_count(tree, "embedding.dim", 384);
    e.seed = get_or<std::uint64_t>(tree, "embedding.seed", 1);
    e.batch_size = get_count(tree, "embedding.batch_size", 64);
    e.parallelism = get_count(tree, "embedding.parallelism", 1);
    if (e.dim < 1 || e.batch_size < 1 || e.parallelism < 1) {
        throw ConfigError("embedding.dim, batch_size and parallelism must be at least 1");
    }
    if (e.provider == "openai" && e.model.empty()) {
        throw ConfigError("embedding.model is required for the openai embedding provider");
    }

    if (task_enabled(tree, "clone")) {
        CloneTaskConfig t;
        if (auto grid = get_opt<std::vector<double>>(tree, "tasks.clone.grid")) {
            try {
                t.thresholds = ThresholdConfig(std::move(*grid));
            } catch (const std::exception& ex) {
                throw ConfigError(fmt::format("tasks.clone.grid: {}", ex.what()));
            }
        }
        try {
            t.averaging = parse_averaging(get_or<std::string>(tree, "tasks.clone.averaging", "weighted"));
        } catch (const std::exception& ex) {
            throw ConfigError(fmt::format("tasks.clone.averaging: {}", ex.what()));
        }
        c.clone = std::move(t);
    }
    if (task_enabled(tree, "cluster")) {
        ClusterTaskConfig t;
        t.k = get_opt_count(tree, "tasks.cluster.k");
        t.seed = get_or<std::uint64_t>(tree, "tasks.cluster.seed", 0);
        t.restarts = static_cast<int>(get_count(tree, "tasks.cluster.restarts", 10));
        t.max_iter = static_cast<int>(get_count(tree, "tasks.cluster.max_iter", 300));
        t.tol = get_or<double>(tree, "tasks.cluster.tol", 1e-4);
        if ((t.k && *t.k < 1) || t.restarts < 1 || t.max_iter < 1 || t.tol < 0.0) {
            throw ConfigError("tasks.cluster: k, restarts and max_iter must be >= 1 and tol >= 0");
        }
        c.cluster = t;
    }
    if (task_enabled(tree, "viz")) {
        TsneConfig t;
        t.perplexity = get_or<double>(tree, "tasks.viz.perplexity", t.perplexity);
        t.learning_rate = get_or<double>(tree, "tasks.viz.learning_rate", t.learning_rate);
        t.iterations = static_cast<int>(get_count(tree, "tasks.viz.iterations", t.iterations));
        t.seed = get_or<std::uint64_t>(tree, "tasks.viz.seed", t.seed);
        t.early_exaggeration = get_or<double>(tree, "tasks.viz.early_exaggeration", t.early_exaggeration);
        t.exaggeration_iters =
            static_cast<int>(get_count(tree, "tasks.viz.exaggeration_iters", t.exaggeration_iters));
        t.momentum_switch_iter = t.exaggeration_iters;
        c.viz = t;
    }

    c.stopwords.enabled = get_or<bool>(tree, "stopwords.enabled", false);
    c.stopwords.list = get_opt_path(tree, "stopwords.list");
    if (c.stopwords.enabled && !c.stopwords.list) {
        throw ConfigError("stopwords.list is required when stop-word removal is enabled");
    }
    c.cache_root = get_or<std::string>(tree, "cache_root", "cache");
    c.output_dir = get_or<std::string>(tree, "output_dir", "out");
    return c;
}

void PipelineConfig::validate(bool require_task) const {
    require_exists(dataset.path, "dataset.path");
    if (dataset.pairs) {
        require_exists(*dataset.pairs, "dataset.pairs");
    }
    if (llm.fixture) {
        require_exists(*llm.fixture, "llm.fixture");
    }
    if (llm.template_path) {
        require_exists(*llm.template_path, "llm.template");
    }
    if (stopwords.enabled && stopwords.list) {
        require_exists(*stopwords.list, "stopwords.list");
    }
    if (require_task && !any_task()) {
        throw ConfigError("no task enabled: configure at least one of tasks.clone, tasks.cluster, tasks.viz");
    }
}

json to_json(const PipelineConfig& c) {
    auto opt_path = [](const std::optional<std::filesystem::path>& p) -> json {
        return p ? json(p->generic_string()) : json(nullptr);
    };
    auto opt_count = [](const std::optional<std::size_t>& v) -> json { return v ? json(*v) : json(nullptr); };

    json tree;
    tree["dataset"] = {
        {"name", c.dataset.name},
        {"kind", c.dataset.layout == CorpusLayout::poj104 ? "poj104" : "flat"},
        {"path", c.dataset.path.generic_string()},
        {"pairs", opt_path(c.dataset.pairs)},
        {"sampling", {{"n_pos", c.dataset.n_pos}, {"n_neg", c.dataset.n_neg}, {"seed", c.dataset.seed}}},
        {"max_problems", opt_count(c.dataset.max_problems)},
        {"max_per_problem", opt_count(c.dataset.max_per_problem)},
    };
    tree["llm"] = {
        {"provider", c.llm.provider},
        {"provider_id", c.llm.provider_id},
        {"model", c.llm.model},
        {"endpoint", c.llm.endpoint},
        {"fixture", opt_path(c.llm.fixture)},
        {"template", opt_path(c.llm.template_path)},
        {"language", c.llm.language},
        {"temperature", c.llm.temperature},
        {"max_tokens", c.llm.max_tokens},
        {"parallelism", c.llm.parallelism},
        {"failure_cap", c.llm.failure_cap},
        {"context_limit", opt_count(c.llm.context_limit)},
    };
    tree["embedding"] = {
        {"provider", c.embedding.provider}, {"model", c.embedding.model},
        {"endpoint", c.embedding.endpoint}, {"dim", c.embedding.dim},
        {"seed", c.embedding.seed},         {"batch_size", c.embedding.batch_size},
        {"parallelism", c.embedding.parallelism},
    };
    json tasks = json::object();
    if (c.clone) {
        tasks["clone"] = {{"grid", c.clone->thresholds.grid()}, {"averaging", to_string(c.clone->averaging)}};
    }
    if (c.cluster) {
        tasks["cluster"] = {{"k", opt_count(c.cluster->k)},
                            {"seed", c.cluster->seed},
                            {"restarts", c.cluster->restarts},
                            {"max_iter", c.cluster->max_iter},
                            {"tol", c.cluster->tol}};
    }
    if (c.viz) {
        tasks["viz"] = {{"perplexity", c.viz->perplexity},
                        {"learning_rate", c.viz->learning_rate},
                        {"iterations", c.viz->iterations},
                        {"seed", c.viz->seed},
                        {"early_exaggeration", c.viz->early_exaggeration},
                        {"exaggeration_iters", c.viz->exaggeration_iters}};
    }
    tree["tasks"] = std::move(tasks);
    tree["stopwords"] = {{"enabled", c.stopwords.enabled}, {"list", opt_path(c.stopwords.list)}};
    tree["cache_root"] = c.cache_root.generic_string();
    tree["output_dir"] = c.output_dir.generic_string();
    return tree;
}

std::string config_hash(const PipelineConfig& config) {
    json tree = to_json(config);
    tree.erase("cache_root");
    tree.erase("output_dir");
    tree["llm"].erase("parallelism");
    tree["embedding"].erase("parallelism");
    tree["embedding"].erase("batch_size");
    return sha256_hex(tree.dump());
}

}  // namespace codesum
