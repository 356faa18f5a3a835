#include "codesum/dataset.hpp"

#include "codesum/log.hpp"
#include "codesum/rng.hpp"
#include "codesum/text.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <unordered_set>

namespace codesum {

namespace fs = std::filesystem;
using json = nlohmann::json;

Corpus::Corpus(std::string name, std::vector<CodeFragment> fragments)
    : name_(std::move(name)), fragments_(std::move(fragments)) {
    index_.reserve(fragments_.size());
    for (std::size_t i = 0; i < fragments_.size(); ++i) {
        if (fragments_[i].text.empty()) {
            throw DatasetError(fmt::format("fragment '{}' has empty text", fragments_[i].id));
        }
        if (!index_.emplace(fragments_[i].id, i).second) {
            throw DatasetError(fmt::format("duplicate fragment id '{}'", fragments_[i].id));
        }
    }
}

std::optional<std::size_t> Corpus::index_of(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

bool Corpus::labeled() const {
    return !fragments_.empty() &&
           std::all_of(fragments_.begin(), fragments_.end(), [](const auto& f) { return f.label.has_value(); });
}

namespace {

SourceLanguage language_from_extension(const fs::path& p, SourceLanguage fallback) {
    const auto ext = text::ascii_lower(p.extension().string());
    if (ext == ".c" || ext == ".h" || ext == ".cpp" || ext == ".cc" || ext == ".cxx" || ext == ".hpp") {
        return SourceLanguage::c;
    }
    if (ext == ".java") {
        return SourceLanguage::java;
    }
    return fallback;
}

std::optional<int> parse_int(std::string_view s) {
    int value = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        return std::nullopt;
    }
    return value;
}

std::vector<fs::path> sorted_regular_files(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

struct PendingFile {
    fs::path path;
    std::string id;
    std::optional<int> label;
    SourceLanguage language;
};

std::optional<std::string> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        return std::nullopt;
    }
    return data;
}

}  // namespace

Corpus load_corpus_dir(const fs::path& root, CorpusLayout layout, const CorpusLoadOptions& options) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw DatasetError(fmt::format("corpus root '{}' is not a directory", root.string()));
    }

    std::vector<PendingFile> pending;
    if (layout == CorpusLayout::poj104) {
        std::vector<std::pair<int, fs::path>> problems;
        for (const auto& entry : fs::directory_iterator(root)) {
            if (!entry.is_directory()) {
                continue;
            }
            const auto name = entry.path().filename().string();
            const auto label = parse_int(name);
            if (!label) {
                log::warn(fmt::format("skipping non-numeric problem directory '{}'", name));
                continue;
            }
            problems.emplace_back(*label, entry.path());
        }
        std::sort(problems.begin(), problems.end());
        if (options.max_problems && problems.size() > *options.max_problems) {
            problems.resize(*options.max_problems);
        }
        for (const auto& [label, dir] : problems) {
            auto files = sorted_regular_files(dir);
            if (options.max_per_problem && files.size() > *options.max_per_problem) {
                files.resize(*options.max_per_problem);
            }
            for (auto& file : files) {
                const auto id = dir.filename().string() + "/" + file.filename().string();
                pending.push_back({file, id, label, language_from_extension(file, SourceLanguage::c)});
            }
        }
    } else {
        for (auto& file : sorted_regular_files(root)) {
            pending.push_back({file, file.filename().string(), std::nullopt,
                               language_from_extension(file, SourceLanguage::other)});
        }
    }

    std::vector<std::optional<std::string>> contents(pending.size());
    const auto count = static_cast<long long>(pending.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < count; ++i) {
        contents[i] = read_file(pending[i].path);
    }

    std::vector<CodeFragment> fragments;
    fragments.reserve(pending.size());
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < pending.size(); ++i) {
        if (!contents[i]) {
            log::warn(fmt::format("cannot read '{}', skipped", pending[i].path.string()));
            ++skipped;
            continue;
        }
        if (contents[i]->empty()) {
            log::warn(fmt::format("empty file '{}', skipped", pending[i].path.string()));
            ++skipped;
            continue;
        }
        fragments.push_back({std::move(pending[i].id), pending[i].label, text::sanitize_utf8(*contents[i]),
                             pending[i].language, std::move(pending[i].path)});
    }
    if (fragments.empty()) {
        throw DatasetError(fmt::format("corpus '{}' is empty ({} file(s) skipped)", root.string(), skipped));
    }
    if (skipped > 0) {
        log::warn(fmt::format("{} file(s) skipped while loading '{}'", skipped, root.string()));
    }

    auto name = fs::weakly_canonical(root).filename().string();
    Corpus corpus(std::move(name), std::move(fragments));
    corpus.set_skipped(skipped);
    return corpus;
}

void write_corpus_manifest(const Corpus& corpus, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DatasetError(fmt::format("cannot write manifest '{}'", path.string()));
    }
    for (const auto& f : corpus) {
        json record = {{"id", f.id}, {"label", nullptr}, {"path", f.source_path.generic_string()}};
        if (f.label) {
            record["label"] = *f.label;
        }
        out << record.dump() << '\n';
    }
}

std::size_t PairDataset::positives() const {
    return static_cast<std::size_t>(
        std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.truth; }));
}

PairDataset load_pair_jsonl(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DatasetError(fmt::format("cannot open pair file '{}'", path.string()));
    }
    PairDataset result;
    result.source_corpus = path.stem().string();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error&) {
            throw DatasetError(fmt::format("malformed JSON at line {}", line_no));
        }
        if (!record.is_object() || !record.contains("id1") || !record.contains("id2") ||
            !record.contains("label") || !record["id1"].is_string() || !record["id2"].is_string()) {
            throw DatasetError(fmt::format("missing id1/id2/label at line {}", line_no));
        }
        const auto& label = record["label"];
        bool truth = false;
        if (label.is_boolean()) {
            truth = label.get<bool>();
        } else if (label.is_number_integer() && (label.get<long long>() == 0 || label.get<long long>() == 1)) {
            truth = label.get<long long>() == 1;
        } else {
            throw DatasetError(fmt::format("invalid label at line {}", line_no));
        }
        LabeledPair pair{record["id1"].get<std::string>(), record["id2"].get<std::string>(), truth};
        if (pair.id_a == pair.id_b) {
            throw DatasetError(fmt::format("self pair '{}' at line {}", pair.id_a, line_no));
        }
        result.pairs.push_back(std::move(pair));
    }
    return result;
}

void write_pair_jsonl(const PairDataset& pairs, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DatasetError(fmt::format("cannot write pair file '{}'", path.string()));
    }
    for (const auto& p : pairs.pairs) {
        out << json{{"id1", p.id_a}, {"id2", p.id_b}, {"label", p.truth ? 1 : 0}}.dump() << '\n';
    }
    if (!out) {
        throw DatasetError(fmt::format("write failed for '{}'", path.string()));
    }
}

void check_pairs_resolve(const PairDataset& pairs, const Corpus& corpus) {
    for (const auto& p : pairs.pairs) {
        for (const auto* id : {&p.id_a, &p.id_b}) {
            if (!corpus.contains(*id)) {
                throw DatasetError(fmt::format("pair references unknown fragment id '{}'", *id));
            }
        }
    }
}

namespace {

std::uint64_t choose2(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

struct LabelGroups {
    std::vector<std::vector<std::size_t>> members;  // fragment indices, corpus order
    std::vector<std::size_t> labeled;                // all labeled fragment indices
    std::vector<std::size_t> group_of;               // fragment index -> group, npos if unlabeled
};

LabelGroups group_by_label(const Corpus& corpus) {
    std::map<int, std::vector<std::size_t>> by_label;
    LabelGroups g;
    g.group_of.assign(corpus.size(), static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (corpus[i].label) {
            by_label[*corpus[i].label].push_back(i);
            g.labeled.push_back(i);
        }
    }
    for (auto& [label, members] : by_label) {
        for (auto idx : members) {
            g.group_of[idx] = g.members.size();
        }
        g.members.push_back(std::move(members));
    }
    return g;
}

std::uint64_t pair_key(std::size_t a, std::size_t b) {
    if (a > b) {
        std::swap(a, b);
    }
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

LabeledPair make_pair(const Corpus& corpus, std::size_t a, std::size_t b, bool truth) {
    const auto& ia = corpus[a].id;
    const auto& ib = corpus[b].id;
    return ia < ib ? LabeledPair{ia, ib, truth} : LabeledPair{ib, ia, truth};
}

// Takes `n` of the candidates uniformly via a partial Fisher-Yates shuffle.
std::vector<std::pair<std::size_t, std::size_t>> take_shuffled(
    std::vector<std::pair<std::size_t, std::size_t>> candidates, std::size_t n, SplitMix64& rng) {
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = i + rng.below(candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(n);
    return candidates;
}

}  // namespace

PairCapacity pair_capacity(const Corpus& corpus) {
    const auto groups = group_by_label(corpus);
    PairCapacity cap;
    for (const auto& m : groups.members) {
        cap.positive += choose2(m.size());
    }
    cap.negative = choose2(groups.labeled.size()) - cap.positive;
    return cap;
}

PairDataset sample_balanced_pairs(const Corpus& corpus, std::size_t n_pos, std::size_t n_neg,
                                  std::uint64_t seed) {
    if (corpus.size() >= (std::size_t{1} << 32)) {
        throw DatasetError("corpus too large for pair sampling");
    }
    const auto groups = group_by_label(corpus);
    if (groups.labeled.empty() && (n_pos > 0 || n_neg > 0)) {
        throw DatasetError("pair sampling requires a labeled corpus");
    }
    const auto cap = pair_capacity(corpus);
    if (n_pos > cap.positive) {
        throw DatasetError(fmt::format("insufficient same-label pairs: requested {}, achievable maximum {}",
                                       n_pos, cap.positive));
    }
    if (n_neg > cap.negative) {
        throw DatasetError(fmt::format("insufficient cross-label pairs: requested {}, achievable maximum {}",
                                       n_neg, cap.negative));
    }

    SplitMix64 root(seed);
    auto pos_rng = root.split();
    auto neg_rng = root.split();

    PairDataset result;
    result.source_corpus = corpus.name();
    result.seed = seed;
    result.pairs.reserve(n_pos + n_neg);

    // Positives.
    if (n_pos * 2 > cap.positive) {
        std::vector<std::pair<std::size_t, std::size_t>> all;
        all.reserve(cap.positive);
        for (const auto& m : groups.members) {
            for (std::size_t i = 0; i < m.size(); ++i) {
                for (std::size_t j = i + 1; j < m.size(); ++j) {
                    all.emplace_back(m[i], m[j]);
                }
            }
        }
        for (const auto& [a, b] : take_shuffled(std::move(all), n_pos, pos_rng)) {
            result.pairs.push_back(make_pair(corpus, a, b, true));
        }
    } else {
        std::vector<std::uint64_t> prefix;  // cumulative positive pair counts per group
        std::uint64_t running = 0;
        for (const auto& m : groups.members) {
            running += choose2(m.size());
            prefix.push_back(running);
        }
        std::unordered_set<std::uint64_t> seen;
        while (seen.size() < n_pos) {
            std::uint64_t r = pos_rng.below(cap.positive);
            const auto g = static_cast<std::size_t>(std::upper_bound(prefix.begin(), prefix.end(), r) - prefix.begin());
            r -= g == 0 ? 0 : prefix[g - 1];
            const auto& m = groups.members[g];
            // Unrank r into the (i < j) pair of group g, row-major over i.
            std::size_t i = 0;
            while (r >= m.size() - 1 - i) {
                r -= m.size() - 1 - i;
                ++i;
            }
            const std::size_t j = i + 1 + static_cast<std::size_t>(r);
            if (seen.insert(pair_key(m[i], m[j])).second) {
                result.pairs.push_back(make_pair(corpus, m[i], m[j], true));
            }
        }
    }

    // Negatives.
    if (n_neg * 2 > cap.negative) {
        std::vector<std::pair<std::size_t, std::size_t>> all;
        all.reserve(cap.negative);
        const auto& l = groups.labeled;
        for (std::size_t i = 0; i < l.size(); ++i) {
            for (std::size_t j = i + 1; j < l.size(); ++j) {
                if (groups.group_of[l[i]] != groups.group_of[l[j]]) {
                    all.emplace_back(l[i], l[j]);
                }
            }
        }
        for (const auto& [a, b] : take_shuffled(std::move(all), n_neg, neg_rng)) {
            result.pairs.push_back(make_pair(corpus, a, b, false));
        }
    } else {
        std::unordered_set<std::uint64_t> seen;
        const auto& l = groups.labeled;
        while (seen.size() < n_neg) {
            const auto a = l[neg_rng.below(l.size())];
            const auto b = l[neg_rng.below(l.size())];
            if (groups.group_of[a] == groups.group_of[b]) {
                continue;
            }
            if (seen.insert(pair_key(a, b)).second) {
                result.pairs.push_back(make_pair(corpus, a, b, false));
            }
        }
    }
    return result;
}

}  // namespace codesum
