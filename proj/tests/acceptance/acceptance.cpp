// Acceptance suite: one PASS/FAIL/SKIP line per criterion, nonzero exit on any FAIL.

#include "codesum/cloneval.hpp"
#include "codesum/cluster.hpp"
#include "codesum/config.hpp"
#include "codesum/embed.hpp"
#include "codesum/hash.hpp"
#include "codesum/llm.hpp"
#include "codesum/log.hpp"
#include "codesum/metrics.hpp"
#include "codesum/pipeline.hpp"
#include "codesum/rng.hpp"
#include "codesum/store.hpp"
#include "codesum/viz.hpp"

#include "support.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>

using namespace codesum;

namespace {

enum class Status { pass, fail, skip };

struct Verdict {
    Status status;
    std::string detail;
};

Verdict pass(std::string d) { return {Status::pass, std::move(d)}; }
Verdict fail(std::string d) { return {Status::fail, std::move(d)}; }
Verdict skip(std::string d) { return {Status::skip, std::move(d)}; }

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---- metrics ----

double comb2(double n) { return n * (n - 1.0) / 2.0; }

double ari_oracle(const std::vector<long long>& a, const std::vector<long long>& b) {
    std::map<std::pair<long long, long long>, double> cells;
    std::map<long long, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cells[{a[i], b[i]}] += 1;
        rows[a[i]] += 1;
        cols[b[i]] += 1;
    }
    double index = 0, sa = 0, sb = 0;
    for (auto& [k, n] : cells) {
        index += comb2(n);
    }
    for (auto& [k, n] : rows) {
        sa += comb2(n);
    }
    for (auto& [k, n] : cols) {
        sb += comb2(n);
    }
    const double expected = sa * sb / comb2(static_cast<double>(a.size()));
    const double max_index = (sa + sb) / 2.0;
    return max_index == expected ? 1.0 : (index - expected) / (max_index - expected);
}

Verdict ac1() {
    const auto start = Clock::now();
    SplitMix64 rng(101);
    double worst = 0.0;
    int tables = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng.below(400);
        std::vector<Outcome> outcomes(n);
        for (auto& o : outcomes) {
            o = {rng.below(2) == 1, rng.below(3) == 0};
        }
        // Brute-force tally per class.
        double pos_pred = 0, pos_true = 0, pos_hit = 0, neg_pred = 0, neg_true = 0, neg_hit = 0;
        for (const auto& o : outcomes) {
            pos_pred += o.predicted;
            pos_true += o.truth;
            pos_hit += o.predicted && o.truth;
            neg_pred += !o.predicted;
            neg_true += !o.truth;
            neg_hit += !o.predicted && !o.truth;
        }
        auto safe = [](double a, double b) { return b == 0 ? 0.0 : a / b; };
        auto harm = [](double p, double r) { return p + r == 0 ? 0.0 : 2 * p * r / (p + r); };
        const double p1 = safe(pos_hit, pos_pred), r1 = safe(pos_hit, pos_true);
        const double p0 = safe(neg_hit, neg_pred), r0 = safe(neg_hit, neg_true);
        const double w1 = pos_true / n, w0 = neg_true / n;
        const double acc = (pos_hit + neg_hit) / n;

        const auto counts = confusion(outcomes);
        const auto b = classification_report(counts, Averaging::binary);
        const auto w = classification_report(counts, Averaging::weighted);
        for (const auto& [got, want] : std::vector<std::pair<double, double>>{
                 {b.accuracy, acc},
                 {b.precision, p1},
                 {b.recall, r1},
                 {b.f1, harm(p1, r1)},
                 {w.precision, w1 * p1 + w0 * p0},
                 {w.recall, w1 * r1 + w0 * r0},
                 {w.f1, w1 * harm(p1, r1) + w0 * harm(p0, r0)}}) {
            worst = std::max(worst, std::abs(got - want));
        }
        ++tables;
    }
    int partitions = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + rng.below(49);
        std::vector<long long> a(n), b(n);
        const auto ka = 1 + rng.below(6), kb = 1 + rng.below(6);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = static_cast<long long>(rng.below(ka));
            b[i] = static_cast<long long>(rng.below(kb));
        }
        worst = std::max(worst, std::abs(adjusted_rand_index(a, b) - ari_oracle(a, b)));
        ++partitions;
    }
    const double secs = seconds_since(start);
    const auto d = fmt::format("{} tables, {} partitions, max error {:.1e}, {:.2f} s", tables, partitions, worst, secs);
    return worst <= 1e-12 && secs < 5.0 ? pass(d) : fail(d);
}

Verdict ac2() {
    struct Row {
        int precision, recall, f1;  // hundredths of a percent
    };
    // Table rows whose precision equals recall.
    const Row rows[] = {{9183, 9183, 9182}, {9072, 9072, 9072}};
    std::string d;
    bool ok = true;
    for (const auto& r : rows) {
        const double f1 = 100.0 * f1_score(r.precision / 10000.0, r.recall / 10000.0);
        const auto got = static_cast<long>(std::lround(f1 * 100.0));
        const bool row_ok = std::labs(got - r.f1) <= 1;
        ok = ok && row_ok;
        d += fmt::format("{}P=R={:.2f}: F1 {:.2f} vs printed {:.2f}", d.empty() ? "" : "; ", r.precision / 100.0,
                         f1, r.f1 / 100.0);
    }
    return ok ? pass(d) : fail(d);
}

Verdict ac3() {
    testing::TempDir dir;
    std::vector<CodeFragment> fragments;
    FixtureChatProvider provider;
    for (int i = 0; i < 100; ++i) {
        CodeFragment f;
        f.id = fmt::format("{}/{:03}.c", i % 10, i);
        f.label = i % 10;
        f.text = fmt::format("int task_{}(int x) {{ return x * {}; }}\n", i, i % 10 + 2);
        fragments.push_back(f);
        provider.add_match(fmt::format("task_{}(", i), fmt::format("Multiplies the input by {}.", i % 10 + 2));
    }
    const Corpus corpus("ac3", fragments);
    PairDataset pairs;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (std::size_t j = i + 1; j < corpus.size(); ++j) {
            pairs.pairs.push_back({corpus[i].id, corpus[j].id, corpus[i].label == corpus[j].label});
        }
    }
    const auto tmpl = PromptTemplate::english_default();
    const auto store_path = SummaryStore::path_for(dir.path(), "ac3", provider.id(), "en");
    SummarizeOptions options;
    options.parallelism = 4;

    auto run = [&]() {
        auto store = SummaryStore::open(store_path);
        const auto set = summarize_corpus(corpus, tmpl, provider, store, options);
        std::vector<std::string> ids, texts;
        for (const auto& e : set.entries) {
            ids.push_back(e.fragment_id);
            texts.push_back(e.summary->text);
        }
        DeterministicEmbedder embedder(256, 1);
        const auto embeddings = embed_batch(texts, ids, embedder);
        return sweep_thresholds(pairs, embeddings, ThresholdConfig()).size();
    };
    run();
    const auto cold = provider.calls();
    provider.reset_calls();
    run();
    const auto warm = provider.calls();
    const auto d = fmt::format("{} pairs, {} calls cold, {} calls warm", pairs.pairs.size(), cold, warm);
    return pairs.pairs.size() == 4950 && cold == 100 && warm == 0 ? pass(d) : fail(d);
}

double brute_force_inertia(const Matrix& pts, std::size_t k) {
    const std::size_t n = pts.rows(), dim = pts.cols();
    std::vector<std::size_t> label(n, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        std::vector<double> count(k, 0), sum(k * dim, 0);
        for (std::size_t i = 0; i < n; ++i) {
            count[label[i]] += 1;
            for (std::size_t d = 0; d < dim; ++d) {
                sum[label[i] * dim + d] += pts(i, d);
            }
        }
        if (std::find(count.begin(), count.end(), 0.0) == count.end()) {
            double total = 0;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t d = 0; d < dim; ++d) {
                    const double diff = pts(i, d) - sum[label[i] * dim + d] / count[label[i]];
                    total += diff * diff;
                }
            }
            best = std::min(best, total);
        }
        std::size_t pos = 0;
        while (pos < n && ++label[pos] == k) {
            label[pos++] = 0;
        }
        if (pos == n) {
            return best;
        }
    }
}

Verdict ac4() {
    const auto start = Clock::now();
    SplitMix64 rng(404);
    int optimal = 0, beaten = 0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 2 + rng.below(7);
        const std::size_t k = 1 + rng.below(std::min<std::size_t>(3, n));
        const std::size_t dim = 1 + rng.below(4);
        Matrix pts(n, dim);
        for (double& v : pts.data()) {
            v = 3.0 * rng.normal();
        }
        const double best = brute_force_inertia(pts, k);
        const auto r = kmeans(pts.view(), {k, rng.next(), 300, 1e-4, 10});
        if (std::abs(r.inertia - best) <= 1e-9) {
            ++optimal;
        } else if (r.inertia < best) {
            ++beaten;
        }
    }
    const double secs = seconds_since(start);
    const auto d = fmt::format("{}/20 optimal, {} below optimum, {:.2f} s", optimal, beaten, secs);
    return optimal >= 18 && beaten == 0 && secs < 10.0 ? pass(d) : fail(d);
}

Verdict ac5() {
    const auto start = Clock::now();
    SplitMix64 rng(505);
    auto gaussian = [&](std::size_t n, std::size_t dim) {
        Matrix m(n, dim);
        for (double& v : m.data()) {
            v = rng.normal();
        }
        return m;
    };

    double worst_perp = 0.0;
    const auto pts = gaussian(40, 6);
    for (double perp : {3.0, 5.0, 10.0}) {
        const auto p = conditional_affinities(pts.view(), perp);
        for (std::size_t i = 0; i < p.rows(); ++i) {
            double h = 0.0;
            for (double v : p.row(i)) {
                h -= v > 0 ? v * std::log2(v) : 0.0;
            }
            worst_perp = std::max(worst_perp, std::abs(std::exp2(h) - perp) / perp);
        }
    }

    const auto small = gaussian(8, 4);
    const auto pj = joint_affinities(conditional_affinities(small.view(), 2.0));
    const auto y = gaussian(8, 2);
    Matrix grad;
    tsne_objective(pj, y, &grad);
    double err2 = 0, norm2 = 0;
    for (std::size_t q = 0; q < y.data().size(); ++q) {
        Matrix a = y, b = y;
        a.data()[q] += 1e-6;
        b.data()[q] -= 1e-6;
        const double fd = (tsne_objective(pj, a) - tsne_objective(pj, b)) / 2e-6;
        err2 += (fd - grad.data()[q]) * (fd - grad.data()[q]);
        norm2 += fd * fd;
    }
    const double grad_err = std::sqrt(err2 / norm2);

    int decreased = 0, fixtures = 0;
    for (std::size_t n : {20u, 40u, 60u}) {
        TsneConfig c;
        c.perplexity = 5.0;
        c.iterations = 500;
        c.seed = n;
        const auto proj = tsne(gaussian(n, 8).view(), c);
        decreased += proj.final_kl < proj.initial_kl;
        ++fixtures;
    }
    const double secs = seconds_since(start);
    const auto d = fmt::format("perplexity error {:.1e}, gradient rel. error {:.1e}, KL decreased {}/{}, {:.2f} s",
                               worst_perp, grad_err, decreased, fixtures, secs);
    return worst_perp < 1e-3 && grad_err < 1e-4 && decreased == fixtures && secs < 60.0 ? pass(d) : fail(d);
}

Verdict ac6() {
    SplitMix64 rng(606);
    const ThresholdConfig grid;
    int violations = 0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 5 + rng.below(30), dim = 2 + rng.below(8);
        Matrix m(n, dim);
        for (double& v : m.data()) {
            v = rng.normal() + 1.0;
        }
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) {
            ids.push_back(std::to_string(i));
        }
        const EmbeddingSet e("fixture", ids, m);
        PairDataset d;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                d.pairs.push_back({ids[i], ids[j], rng.below(2) == 1});
            }
        }
        const auto rows = sweep_thresholds(d, e, grid);
        for (std::size_t k = 1; k < rows.size(); ++k) {
            const auto& a = rows[k - 1].binary;
            const auto& b = rows[k].binary;
            if (b.recall > a.recall || b.counts.tp + b.counts.fp > a.counts.tp + a.counts.fp) {
                ++violations;
            }
        }
    }
    const auto d = fmt::format("50 fixtures, {} violations", violations);
    return violations == 0 ? pass(d) : fail(d);
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file()) {
            files[std::filesystem::relative(entry.path(), dir).generic_string()] = testing::read_file(entry.path());
        }
    }
    return files;
}

Verdict ac7() {
    testing::TempDir dir;
    auto run_into = [&](const std::string& name) {
        auto tree = load_config_tree(testing::data_dir() / "golden/config.json");
        tree["cache_root"] = (dir / (name + "-cache")).string();
        tree["output_dir"] = (dir / (name + "-out")).string();
        Pipeline p(parse_config(tree));
        p.run();
        return dir / (name + "-out");
    };
    const auto first = run_into("a");
    const auto second = run_into("b");
    const auto clone = nlohmann::json::parse(testing::read_file(first / "clone_report.json"));
    const auto cluster = nlohmann::json::parse(testing::read_file(first / "cluster_report.json"));
    double f1_at_050 = -1;
    for (const auto& row : clone["rows"]) {
        if (row["threshold"] == 0.5) {
            f1_at_050 = row["weighted"]["f1"];
        }
    }
    const double ari = cluster["ari"];
    const bool identical = snapshot(first) == snapshot(second);
    const auto d = fmt::format("F1@0.50 {:.2f}%, ARI {:.4f} at K={}, reports {}", 100 * f1_at_050, ari,
                               cluster["k"].get<int>(), identical ? "byte-identical" : "DIFFER");
    return f1_at_050 == 1.0 && ari == 1.0 && cluster["k"] == 3 && identical ? pass(d) : fail(d);
}

// Best-effort replay of recorded summaries against a live embedding endpoint.
Verdict ac8() {
    const char* endpoint = std::getenv("CODESUM_REPLAY_ENDPOINT");
    const char* recorded = std::getenv("CODESUM_REPLAY_SUMMARIES");
    if (!endpoint || !recorded || !std::filesystem::exists(recorded)) {
        return skip("set CODESUM_REPLAY_ENDPOINT and CODESUM_REPLAY_SUMMARIES to run");
    }
    const std::filesystem::path root = recorded;
    const auto store = SummaryStore::open(root / "summaries.jsonl");
    const auto pairs = load_pair_jsonl(root / "pairs.jsonl");
    std::map<std::string, std::string> by_id;
    for (const auto& r : store.records()) {
        by_id[r.fragment_id] = r.summary;
    }
    std::vector<std::string> ids, texts;
    for (const auto& [id, text] : by_id) {
        ids.push_back(id);
        texts.push_back(text);
    }
    const char* model = std::getenv("CODESUM_REPLAY_MODEL");
    const char* key = std::getenv("CODESUM_REPLAY_API_KEY");
    const char* dim = std::getenv("CODESUM_REPLAY_DIM");
    HttpEmbedConfig config;
    config.model = model ? model : "all-MiniLM-L12-v2";
    config.id = "replay:" + config.model;
    config.base_url = endpoint;
    config.api_key = key ? key : "";
    config.dim = dim ? std::stoul(dim) : 384;
    HttpEmbedProvider provider(config);
    const auto embeddings = embed_batch(texts, ids, provider, {32, 1});

    PairDataset usable;
    for (const auto& p : pairs.pairs) {
        if (embeddings.index_of(p.id_a) && embeddings.index_of(p.id_b)) {
            usable.pairs.push_back(p);
        }
    }
    if (usable.pairs.empty()) {
        return fail(fmt::format("no recorded pair has summaries for both fragments ({} records read)", by_id.size()));
    }
    const auto rows = sweep_thresholds(usable, embeddings, ThresholdConfig());
    std::size_t best = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (rows[k].weighted.f1 > rows[best].weighted.f1) {
            best = k;
        }
    }
    const double f1 = 100.0 * rows[best].weighted.f1;
    const bool interior = best > 0 && best + 1 < rows.size();
    const bool full = usable.pairs.size() >= 10000;
    const bool close = !full || std::abs(f1 - 91.82) <= 5.0;
    const auto d = fmt::format("{} pairs, peak F1 {:.2f}% at T={:.2f}{}", usable.pairs.size(), f1,
                               rows[best].threshold, full ? "" : " (subsample, F1 band not applied)");
    return interior && close ? pass(d) : fail(d);
}

Verdict ac9() {
    testing::TempDir dir;
    const auto start = Clock::now();
    std::vector<SummaryRecord> written;
    {
        auto store = SummaryStore::open(dir / "s.jsonl");
        for (int i = 0; i < 10000; ++i) {
            SummaryRecord r;
            r.key = {sha256_hex(fmt::format("fragment {}", i)), "fixture", i % 3 == 0 ? "zh" : "en",
                     sha256_hex("template")};
            r.fragment_id = fmt::format("{}/{}.c", i % 104, i);
            r.summary = i % 3 == 0 ? fmt::format("计算第{}个数。", i) : fmt::format("Computes value {}.", i);
            r.stopwords_removed = i % 5 == 0;
            r.created_at = "2024-05-06T07:08:09Z";
            store.put(r);
            written.push_back(r);
        }
        store.flush();
    }
    std::sort(written.begin(), written.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
    const auto reloaded = SummaryStore::open(dir / "s.jsonl").records();
    const bool equal = reloaded == written;

    // Corrupt one line in the middle and truncate the last one.
    auto content = testing::read_file(dir / "s.jsonl");
    const auto mid = content.find('\n', content.size() / 2) + 1;
    content.replace(mid, 10, "##########");
    content.resize(content.size() - 20);
    testing::write_file(dir / "s.jsonl", content);
    auto damaged = SummaryStore::open(dir / "s.jsonl");
    const bool resilient = damaged.size() == 9998 && damaged.corrupt_lines() == 2;
    damaged.put(written.front());
    const bool appendable = SummaryStore::open(dir / "s.jsonl").size() == 9998;

    const double secs = seconds_since(start);
    const auto d = fmt::format("10000 records {}, damaged file kept {} with {} corrupt lines, {:.2f} s",
                               equal ? "round-tripped" : "DIFFER", damaged.size(), damaged.corrupt_lines(), secs);
    return equal && resilient && appendable && secs < 5.0 ? pass(d) : fail(d);
}

}  // namespace

int main() {
    log::set_level(log::Level::error);
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"AC1 metric oracle", ac1},
        {"AC2 precision = recall rows", ac2},
        {"AC3 one call per fragment", ac3},
        {"AC4 k-means vs brute force", ac4},
        {"AC5 t-SNE numerics", ac5},
        {"AC6 sweep monotonicity", ac6},
        {"AC7 golden run", ac7},
        {"AC8 recorded-summary replay", ac8},
        {"AC9 store durability", ac9},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = fail(std::string("exception: ") + e.what());
        }
        // The replay criterion is advisory: it reports but never gates.
        const bool advisory = name.rfind("AC8", 0) == 0;
        if (v.status == Status::fail && !advisory) {
            ++failures;
        }
        const char* tag = v.status == Status::pass ? "PASS" : v.status == Status::skip ? "SKIP" : "FAIL";
        std::cout << fmt::format("{} {:<30} {}\n", tag, name, v.detail);
    }
    std::cout << (failures == 0 ? "all gating criteria passed\n" : fmt::format("{} criteria failed\n", failures));
    return failures == 0 ? 0 : 1;
}
