#include "codesum/pipeline.hpp"

#include "codesum/hash.hpp"
#include "codesum/log.hpp"
#include "codesum/metrics.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace codesum {

using nlohmann::json;

namespace {

std::string env_for(const char* prefix, const std::string& provider) {
    std::string name = prefix;
    for (char c : provider) {
        name.push_back(std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c)) : '_');
    }
    const char* v = std::getenv(name.c_str());
    return v ? std::string(v) : std::string();
}

std::string resolve_endpoint(const std::string& configured, const std::string& provider) {
    if (auto env = env_for("CODESUM_BASE_URL_", provider); !env.empty()) {
        return env;
    }
    return configured.empty() ? std::string("https://api.openai.com/v1") : configured;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    }
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(fmt::format("cannot read '{}'", path.string()));
    }
    return json::parse(in);
}

json report_json(const EvalReport& r) {
    return {{"accuracy", r.accuracy},
            {"precision", r.precision},
            {"recall", r.recall},
            {"f1", r.f1},
            {"precision_degenerate", r.precision_degenerate},
            {"recall_degenerate", r.recall_degenerate}};
}

std::string texts_digest(const std::vector<std::string>& ids, const std::vector<std::string>& texts) {
    std::string joined;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        joined += ids[i];
        joined.push_back('\0');
        joined += texts[i];
        joined.push_back('\0');
    }
    return sha256_hex(joined);
}

}  // namespace

std::shared_ptr<ChatProvider> make_chat_provider(const LlmConfig& config) {
    if (config.provider == "fixture") {
        if (!config.fixture) {
            throw ConfigError("llm.fixture is required for the fixture provider");
        }
        return FixtureChatProvider::from_file(*config.fixture, config.provider_id, config.context_limit);
    }
    HttpChatConfig http;
    http.id = config.provider_id;
    http.base_url = resolve_endpoint(config.endpoint, config.provider);
    http.api_key = env_for("CODESUM_API_KEY_", config.provider);
    http.context_limit = config.context_limit;
    return std::make_shared<HttpChatProvider>(std::move(http));
}

std::shared_ptr<EmbedProvider> make_embed_provider(const EmbeddingConfig& config) {
    if (config.provider == "deterministic") {
        return std::make_shared<DeterministicEmbedder>(config.dim, config.seed);
    }
    HttpEmbedConfig http;
    http.id = config.provider + ":" + config.model;
    http.base_url = resolve_endpoint(config.endpoint, config.provider);
    http.api_key = env_for("CODESUM_API_KEY_", config.provider);
    http.model = config.model;
    http.dim = config.dim;
    return std::make_shared<HttpEmbedProvider>(std::move(http));
}

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<ChatProvider> chat, std::shared_ptr<EmbedProvider> embedder)
    : config_(std::move(config)), hash_(config_hash(config_)), chat_(std::move(chat)), embedder_(std::move(embedder)) {
    std::filesystem::create_directories(config_.output_dir);
}

std::filesystem::path Pipeline::out(const std::string& name) const { return config_.output_dir / name; }

const Corpus& Pipeline::corpus() {
    if (!corpus_) {
        CorpusLoadOptions options{config_.dataset.max_problems, config_.dataset.max_per_problem};
        corpus_ = load_corpus_dir(config_.dataset.path, config_.dataset.layout, options);
        log::info(fmt::format("loaded {} fragments from {}", corpus_->size(), config_.dataset.path.string()));
    }
    return *corpus_;
}

void Pipeline::write_summarize_manifest(const SummarySet& set) const {
    json failed = json::array();
    for (const auto& e : set.entries) {
        if (!e.summary) {
            failed.push_back({{"id", e.fragment_id}, {"error", e.failure}});
        }
    }
    write_json(out("summarize_manifest.json"),
               {{"config_hash", hash_},
                {"dataset", config_.dataset.name},
                {"provider", config_.llm.provider_id},
                {"language", config_.llm.language},
                {"fragments", set.stats.fragments},
                {"skipped_files", corpus_ ? corpus_->skipped() : 0},
                {"calls", set.stats.calls},
                {"attempts", set.stats.attempts},
                {"hits", set.stats.hits},
                {"failures", set.stats.failures},
                {"failed", std::move(failed)}});
}

const SummarySet& Pipeline::summarize() {
    if (summaries_) {
        return *summaries_;
    }
    const auto& fragments = corpus();
    if (!chat_) {
        chat_ = make_chat_provider(config_.llm);
    }
    const auto language = PromptLanguage::parse(config_.llm.language);
    const auto tmpl = config_.llm.template_path ? PromptTemplate::from_file(*config_.llm.template_path, language)
                                                : PromptTemplate::default_for(language);
    auto store = SummaryStore::open(
        SummaryStore::path_for(config_.cache_root, config_.dataset.name, chat_->id(), language.code()));

    SummarizeOptions options;
    options.model = config_.llm.model;
    options.max_output_tokens = config_.llm.max_tokens;
    options.temperature = config_.llm.temperature;
    options.parallelism = config_.llm.parallelism;
    options.failure_cap = config_.llm.failure_cap;
    try {
        summaries_ = summarize_corpus(fragments, tmpl, *chat_, store, options);
    } catch (const FailureCapExceeded& e) {
        write_summarize_manifest(e.set());
        throw;
    }
    write_summarize_manifest(*summaries_);
    log::info(fmt::format("summaries: {} calls, {} cache hits, {} failures", summaries_->stats.calls,
                          summaries_->stats.hits, summaries_->stats.failures));
    return *summaries_;
}

const EmbeddingSet& Pipeline::embed() {
    if (embeddings_) {
        return *embeddings_;
    }
    const auto& set = summarize();
    std::optional<StopList> stoplist;
    if (config_.stopwords.enabled) {
        stoplist = load_stoplist(*config_.stopwords.list);
    }

    std::vector<std::string> ids;
    std::vector<std::string> texts;
    json dropped = json::array();
    for (const auto& entry : set.entries) {
        if (!entry.summary) {
            continue;
        }
        if (!stoplist) {
            ids.push_back(entry.fragment_id);
            texts.push_back(entry.summary->text);
            continue;
        }
        try {
            texts.push_back(remove_stop_words(*entry.summary, *stoplist).text);
            ids.push_back(entry.fragment_id);
        } catch (const ExtractionFailed& e) {
            dropped.push_back({{"id", entry.fragment_id}, {"error", e.what()}});
        }
    }
    if (ids.empty()) {
        throw EmbedError("no summaries to embed");
    }

    if (!embedder_) {
        embedder_ = make_embed_provider(config_.embedding);
    }
    const auto dir = out("embeddings");
    const auto source_path = dir / "source.json";
    const std::string digest = texts_digest(ids, texts);
    if (std::filesystem::exists(source_path) && std::filesystem::exists(dir / "embeddings.meta.json")) {
        try {
            const auto source = read_json(source_path);
            auto cached = read_embeddings(dir);
            if (source.value("texts_sha256", "") == digest && cached.provider_id() == embedder_->id() &&
                cached.fragment_ids() == ids) {
                log::info("reusing embeddings from " + dir.string());
                embeddings_ = std::move(cached);
                return *embeddings_;
            }
        } catch (const std::exception& e) {
            log::warn(fmt::format("ignoring unreadable embeddings in {}: {}", dir.string(), e.what()));
        }
    }

    const auto computed = embed_batch(texts, ids, *embedder_,
                                      EmbedOptions{config_.embedding.batch_size, config_.embedding.parallelism});
    std::filesystem::create_directories(dir);
    write_embeddings(computed, dir);
    // Downstream stages always see the stored float32 values, cold or warm.
    embeddings_ = read_embeddings(dir);
    write_json(source_path, {{"config_hash", hash_},
                             {"texts_sha256", digest},
                             {"stopwords_removed", stoplist.has_value()},
                             {"dropped", std::move(dropped)}});
    return *embeddings_;
}

CloneResult Pipeline::clone() {
    const CloneTaskConfig task = config_.clone.value_or(CloneTaskConfig{});
    const auto& fragments = corpus();
    PairDataset pairs;
    if (config_.dataset.pairs) {
        pairs = load_pair_jsonl(*config_.dataset.pairs);
    } else {
        if (config_.dataset.n_pos + config_.dataset.n_neg == 0) {
            throw ConfigError("clone detection needs dataset.pairs or dataset.sampling.n_pos/n_neg");
        }
        pairs = sample_balanced_pairs(fragments, config_.dataset.n_pos, config_.dataset.n_neg, config_.dataset.seed);
    }
    check_pairs_resolve(pairs, fragments);
    write_pair_jsonl(pairs, out("pairs.jsonl"));

    const auto& embeddings = embed();
    CloneResult result;
    PairDataset usable;
    usable.source_corpus = pairs.source_corpus;
    usable.seed = pairs.seed;
    for (auto& p : pairs.pairs) {
        if (embeddings.index_of(p.id_a) && embeddings.index_of(p.id_b)) {
            usable.pairs.push_back(std::move(p));
        } else {
            ++result.pairs_dropped;
        }
    }
    if (result.pairs_dropped > 0) {
        log::warn(fmt::format("dropped {} pairs whose fragments have no summary", result.pairs_dropped));
    }
    if (usable.pairs.empty()) {
        throw CloneEvalError("no evaluable pairs");
    }
    result.pairs_used = usable.pairs.size();

    const auto sims = pair_similarities(usable, embeddings);
    result.rows = sweep_similarities(sims, usable, task.thresholds);
    double best_f1 = -1.0;
    for (const auto& row : result.rows) {
        if (row.report(task.averaging).f1 > best_f1) {
            best_f1 = row.report(task.averaging).f1;
            result.best_threshold = row.threshold;
        }
    }

    write_text(out("clone_sweep_weighted.csv"), sweep_csv(result.rows, Averaging::weighted));
    write_text(out("clone_sweep_binary.csv"), sweep_csv(result.rows, Averaging::binary));

    std::vector<ClonePrediction> predictions;
    predictions.reserve(usable.pairs.size());
    for (std::size_t i = 0; i < usable.pairs.size(); ++i) {
        predictions.push_back(ClonePrediction{usable.pairs[i].id_a, usable.pairs[i].id_b, sims[i],
                                              sims[i] >= result.best_threshold, result.best_threshold});
    }
    write_predictions_jsonl(predictions, out("clone_predictions.jsonl"));

    json rows = json::array();
    for (const auto& row : result.rows) {
        const auto& c = row.binary.counts;
        rows.push_back({{"threshold", row.threshold},
                        {"counts", {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}}},
                        {"weighted", report_json(row.weighted)},
                        {"binary", report_json(row.binary)}});
    }
    write_json(out("clone_report.json"), {{"config_hash", hash_},
                                          {"averaging", to_string(task.averaging)},
                                          {"pairs_used", result.pairs_used},
                                          {"pairs_dropped", result.pairs_dropped},
                                          {"positives", usable.positives()},
                                          {"negatives", usable.negatives()},
                                          {"best_threshold", result.best_threshold},
                                          {"rows", std::move(rows)}});
    return result;
}

ClusterOutcome Pipeline::cluster() {
    const ClusterTaskConfig task = config_.cluster.value_or(ClusterTaskConfig{});
    const auto& fragments = corpus();
    const auto& embeddings = embed();

    std::vector<long long> truth;
    bool labeled = true;
    for (const auto& id : embeddings.fragment_ids()) {
        const auto& label = fragments[*fragments.index_of(id)].label;
        if (!label) {
            labeled = false;
            break;
        }
        truth.push_back(*label);
    }

    ClusterOutcome outcome;
    if (task.k) {
        outcome.k = *task.k;
    } else if (labeled) {
        outcome.k = std::set<long long>(truth.begin(), truth.end()).size();
    } else {
        throw ConfigError("tasks.cluster.k is required for an unlabelled corpus");
    }
    if (outcome.k > embeddings.size()) {
        throw ConfigError(fmt::format("tasks.cluster.k = {} exceeds the {} embedded fragments", outcome.k,
                                      embeddings.size()));
    }

    KMeansOptions options;
    options.k = outcome.k;
    options.seed = task.seed;
    options.restarts = task.restarts;
    options.max_iter = task.max_iter;
    options.tol = task.tol;
    outcome.clustering = kmeans(embeddings, options);
    write_clustering(outcome.clustering, embeddings.fragment_ids(), out("cluster_assignments.jsonl"),
                     out("centroids.f32"));

    json report = {{"config_hash", hash_},
                   {"k", outcome.k},
                   {"n", embeddings.size()},
                   {"inertia", outcome.clustering.inertia},
                   {"iterations", outcome.clustering.iterations},
                   {"seed", outcome.clustering.seed},
                   {"ari", nullptr}};
    if (labeled && embeddings.size() >= 2) {
        std::vector<long long> pred(outcome.clustering.assignments.begin(), outcome.clustering.assignments.end());
        outcome.ari = adjusted_rand_index(truth, pred);
        report["ari"] = *outcome.ari;
    }
    write_json(out("cluster_report.json"), report);
    return outcome;
}

Projection2D Pipeline::viz() {
    const TsneConfig task = config_.viz.value_or(TsneConfig{});
    const auto& fragments = corpus();
    const auto& embeddings = embed();
    auto projection = tsne(embeddings, task);

    std::vector<long long> labels;
    for (const auto& id : projection.fragment_ids) {
        const auto& label = fragments[*fragments.index_of(id)].label;
        if (!label) {
            labels.clear();
            break;
        }
        labels.push_back(*label);
    }
    if (labels.size() == projection.fragment_ids.size()) {
        projection.labels = std::move(labels);
    }
    export_projection(projection, out("projection.csv"));
    export_projection_json(projection, out("projection.json"));
    write_json(out("viz_report.json"), {{"config_hash", hash_},
                                        {"n", projection.fragment_ids.size()},
                                        {"perplexity", task.perplexity},
                                        {"iterations", task.iterations},
                                        {"initial_kl", projection.initial_kl},
                                        {"post_exaggeration_kl", projection.post_exaggeration_kl},
                                        {"final_kl", projection.final_kl}});
    return projection;
}

void Pipeline::run() {
    config_.validate(true);
    summarize();
    embed();
    if (config_.clone) {
        clone();
    }
    if (config_.cluster) {
        cluster();
    }
    if (config_.viz) {
        viz();
    }
    write_text(out("report.txt"), render_report(config_.output_dir));
}

std::string render_report(const std::filesystem::path& output_dir) {
    std::ostringstream os;
    bool any = false;
    const auto manifest_path = output_dir / "summarize_manifest.json";
    if (std::filesystem::exists(manifest_path)) {
        const auto m = read_json(manifest_path);
        os << fmt::format("config {}\n", m.at("config_hash").get<std::string>());
        os << fmt::format("summaries: {} fragments, {} provider calls, {} cache hits, {} failures\n",
                          m.at("fragments").get<std::size_t>(), m.at("calls").get<std::size_t>(),
                          m.at("hits").get<std::size_t>(), m.at("failures").get<std::size_t>());
        any = true;
    }
    const auto clone_path = output_dir / "clone_report.json";
    if (std::filesystem::exists(clone_path)) {
        const auto r = read_json(clone_path);
        const std::string averaging = r.at("averaging").get<std::string>();
        os << fmt::format("\nclone detection ({} averaging, {} pairs, {} dropped)\n", averaging,
                          r.at("pairs_used").get<std::size_t>(), r.at("pairs_dropped").get<std::size_t>());
        os << fmt::format("{:>6} {:>9} {:>9} {:>9} {:>9}\n", "T", "Acc%", "P%", "R%", "F1%");
        for (const auto& row : r.at("rows")) {
            const auto& m = row.at(averaging);
            os << fmt::format("{:>6.2f} {:>9.2f} {:>9.2f} {:>9.2f} {:>9.2f}\n", row.at("threshold").get<double>(),
                              100.0 * m.at("accuracy").get<double>(), 100.0 * m.at("precision").get<double>(),
                              100.0 * m.at("recall").get<double>(), 100.0 * m.at("f1").get<double>());
        }
        os << fmt::format("best threshold {:.2f}\n", r.at("best_threshold").get<double>());
        any = true;
    }
    const auto cluster_path = output_dir / "cluster_report.json";
    if (std::filesystem::exists(cluster_path)) {
        const auto r = read_json(cluster_path);
        os << fmt::format("\nclustering: k = {}, n = {}, inertia {:.6f}", r.at("k").get<std::size_t>(),
                          r.at("n").get<std::size_t>(), r.at("inertia").get<double>());
        if (!r.at("ari").is_null()) {
            os << fmt::format(", ARI {:.4f}", r.at("ari").get<double>());
        }
        os << '\n';
        any = true;
    }
    const auto viz_path = output_dir / "viz_report.json";
    if (std::filesystem::exists(viz_path)) {
        const auto r = read_json(viz_path);
        os << fmt::format("\nprojection: n = {}, KL {:.4f} -> {:.4f}\n", r.at("n").get<std::size_t>(),
                          r.at("initial_kl").get<double>(), r.at("final_kl").get<double>());
        any = true;
    }
    if (!any) {
        throw std::runtime_error(fmt::format("no reports found in '{}'", output_dir.string()));
    }
    return os.str();
}

}  // namespace codesum
