#include "codesum/embed.hpp"

#include "codesum/http.hpp"
#include "codesum/rng.hpp"
#include "codesum/text.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_set>

namespace codesum {

namespace fs = std::filesystem;
using json = nlohmann::json;

EmbeddingSet::EmbeddingSet(std::string provider_id, std::vector<std::string> fragment_ids, Matrix vectors)
    : provider_id_(std::move(provider_id)), ids_(std::move(fragment_ids)), vectors_(std::move(vectors)) {
    if (ids_.size() != vectors_.rows()) {
        throw EmbedError(fmt::format("{} ids for {} embedding rows", ids_.size(), vectors_.rows()));
    }
    index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!index_.emplace(ids_[i], i).second) {
            throw EmbedError(fmt::format("duplicate fragment id '{}' in embedding set", ids_[i]));
        }
        auto row = vectors_.row(i);
        double norm2 = 0.0;
        for (double v : row) {
            norm2 += v * v;
        }
        const double norm = std::sqrt(norm2);
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw EmbedError(fmt::format("embedding of '{}' has zero or non-finite norm", ids_[i]));
        }
        for (double& v : row) {
            v /= norm;
        }
    }
}

EmbeddingSet EmbeddingSet::empty(std::string provider_id, std::size_t dim) {
    return EmbeddingSet(std::move(provider_id), {}, Matrix(0, dim));
}

std::optional<std::size_t> EmbeddingSet::index_of(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<std::string> embed_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    const auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    };
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto c = static_cast<unsigned char>(s[pos]);
        if (c < 0x80) {
            if (std::isalnum(c)) {
                current.push_back(static_cast<char>(std::tolower(c)));
            } else {
                flush();
            }
            ++pos;
            continue;
        }
        const auto len = text::codepoint_length(s, pos);
        const auto cp = text::decode_codepoint(s, pos);
        if (text::is_cjk_ideograph(cp)) {
            flush();
            tokens.emplace_back(s.substr(pos, len));
        } else if (text::is_cjk_punctuation(cp)) {
            flush();
        } else {
            current.append(s.substr(pos, len));
        }
        pos += len;
    }
    flush();
    return tokens;
}

std::size_t token_bucket(std::string_view token, std::size_t dim, std::uint64_t seed) {
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
    for (char c : token) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return static_cast<std::size_t>(SplitMix64::mix(h ^ SplitMix64::mix(seed)) % dim);
}

std::vector<double> deterministic_embed(std::string_view s, std::size_t dim, std::uint64_t seed) {
    if (dim < 2) {
        throw EmbedError("deterministic embedding needs dim >= 2");
    }
    std::vector<double> v(dim, 0.0);
    const auto tokens = embed_tokens(s);
    if (tokens.empty()) {
        v[SplitMix64::mix(seed) % dim] = 1.0;
        return v;
    }
    for (const auto& t : tokens) {
        v[token_bucket(t, dim, seed)] += 1.0;
    }
    double norm2 = 0.0;
    for (double x : v) {
        norm2 += x * x;
    }
    const double norm = std::sqrt(norm2);
    for (double& x : v) {
        x /= norm;
    }
    return v;
}

DeterministicEmbedder::DeterministicEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim_ < 2) {
        throw EmbedError("deterministic embedder needs dim >= 2");
    }
}

std::string DeterministicEmbedder::id() const { return fmt::format("deterministic-d{}-s{}", dim_, seed_); }

std::vector<std::vector<double>> DeterministicEmbedder::embed(std::span<const std::string> texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        out.push_back(deterministic_embed(t, dim_, seed_));
    }
    return out;
}

HttpEmbedProvider::HttpEmbedProvider(HttpEmbedConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty() || config_.dim == 0) {
        throw EmbedError("HTTP embedding provider needs a base URL and a dimension");
    }
}

std::vector<std::vector<double>> HttpEmbedProvider::decode_response(const std::string& body, std::size_t expected) {
    std::vector<std::vector<double>> out(expected);
    try {
        const auto j = json::parse(body);
        if (j.contains("data")) {
            const auto& data = j["data"];
            if (data.size() != expected) {
                throw EmbedError(fmt::format("expected {} embeddings, got {}", expected, data.size()));
            }
            for (std::size_t k = 0; k < data.size(); ++k) {
                const auto idx = data[k].contains("index") ? data[k]["index"].get<std::size_t>() : k;
                if (idx >= expected || !out[idx].empty()) {
                    throw EmbedError(fmt::format("bad or repeated embedding index {}", idx));
                }
                out[idx] = data[k].at("embedding").get<std::vector<double>>();
            }
        } else if (j.contains("embeddings")) {
            out = j["embeddings"].get<std::vector<std::vector<double>>>();
            if (out.size() != expected) {
                throw EmbedError(fmt::format("expected {} embeddings, got {}", expected, out.size()));
            }
        } else {
            throw EmbedError("embedding response has neither 'data' nor 'embeddings'");
        }
    } catch (const json::exception& e) {
        throw EmbedError(fmt::format("malformed embedding response: {}", e.what()));
    }
    return out;
}

std::vector<std::vector<double>> HttpEmbedProvider::embed(std::span<const std::string> texts) {
    json body = {{"model", config_.model}, {"input", json(std::vector<std::string>(texts.begin(), texts.end()))}};
    std::map<std::string, std::string> headers;
    if (!config_.api_key.empty()) {
        headers["Authorization"] = "Bearer " + config_.api_key;
    }
    http::Response response;
    try {
        response = http::post_json(http::parse_base_url(config_.base_url), "/embeddings",
                                   body.dump(-1, ' ', false, json::error_handler_t::replace), headers,
                                   config_.timeout);
    } catch (const http::TransportError& e) {
        throw EmbedError(e.what());
    }
    if (response.status == 413) {
        throw PayloadTooLarge(fmt::format("HTTP 413 for a batch of {}", texts.size()));
    }
    if (response.status != 200) {
        throw EmbedError(fmt::format("embedding endpoint returned HTTP {}: {}", response.status, response.body));
    }
    return decode_response(response.body, texts.size());
}

namespace {

void embed_range(EmbedProvider& provider, std::span<const std::string> texts, std::size_t start, Matrix& out) {
    std::vector<std::vector<double>> vectors;
    try {
        vectors = provider.embed(texts);
    } catch (const PayloadTooLarge&) {
        if (texts.size() <= 1) {
            throw EmbedError("embedding provider rejects even a single-item batch as too large");
        }
        const auto half = texts.size() / 2;
        embed_range(provider, texts.first(half), start, out);
        embed_range(provider, texts.subspan(half), start + half, out);
        return;
    }
    if (vectors.size() != texts.size()) {
        throw EmbedError(fmt::format("provider returned {} vectors for {} texts", vectors.size(), texts.size()));
    }
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        if (vectors[k].size() != out.cols()) {
            throw EmbedError(fmt::format("dimension mismatch: provider '{}' declared {} but returned {}",
                                         provider.id(), out.cols(), vectors[k].size()));
        }
        std::copy(vectors[k].begin(), vectors[k].end(), out.row(start + k).begin());
    }
}

}  // namespace

EmbeddingSet embed_batch(std::span<const std::string> texts, std::span<const std::string> ids,
                         EmbedProvider& provider, const EmbedOptions& options) {
    if (texts.size() != ids.size()) {
        throw EmbedError("texts and ids differ in length");
    }
    if (options.batch_size == 0 || options.parallelism == 0) {
        throw EmbedError("batch_size and parallelism must be positive");
    }
    const std::size_t n = texts.size();
    if (n == 0) {
        return EmbeddingSet::empty(provider.id(), provider.dim());
    }
    Matrix out(n, provider.dim());
    const std::size_t batches = (n + options.batch_size - 1) / options.batch_size;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (;;) {
            const auto b = next.fetch_add(1);
            if (b >= batches) {
                return;
            }
            {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (failure) {
                    return;
                }
            }
            const auto start = b * options.batch_size;
            const auto len = std::min(options.batch_size, n - start);
            try {
                embed_range(provider, texts.subspan(start, len), start, out);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    const auto threads = std::min(options.parallelism, batches);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return EmbeddingSet(provider.id(), std::vector<std::string>(ids.begin(), ids.end()), std::move(out));
}

void write_f32(const fs::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw EmbedError(fmt::format("cannot write '{}'", path.string()));
    }
    std::vector<char> buf(m.data().size() * 4);
    for (std::size_t k = 0; k < m.data().size(); ++k) {
        auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(m.data()[k]));
        for (int b = 0; b < 4; ++b) {
            buf[k * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw EmbedError(fmt::format("write to '{}' failed", path.string()));
    }
}

Matrix read_f32(const fs::path& path, std::size_t rows, std::size_t cols) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw EmbedError(fmt::format("cannot read '{}'", path.string()));
    }
    std::vector<unsigned char> buf(rows * cols * 4);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size() || in.peek() != std::char_traits<char>::eof()) {
        throw EmbedError(fmt::format("'{}' does not hold a {}x{} float32 matrix", path.string(), rows, cols));
    }
    Matrix m(rows, cols);
    for (std::size_t k = 0; k < rows * cols; ++k) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) {
            bits |= static_cast<std::uint32_t>(buf[k * 4 + b]) << (8 * b);
        }
        m.data()[k] = static_cast<double>(std::bit_cast<float>(bits));
    }
    return m;
}

void write_embeddings(const EmbeddingSet& set, const fs::path& dir) {
    fs::create_directories(dir);
    write_f32(dir / "embeddings.f32", set.vectors());
    json meta = {{"dim", set.dim()}, {"n", set.size()}, {"provider_id", set.provider_id()},
                 {"fragment_ids", set.fragment_ids()}};
    std::ofstream out(dir / "embeddings.meta.json", std::ios::binary | std::ios::trunc);
    out << meta.dump(2) << '\n';
    if (!out) {
        throw EmbedError(fmt::format("cannot write embedding metadata in '{}'", dir.string()));
    }
}

EmbeddingSet read_embeddings(const fs::path& dir) {
    std::ifstream in(dir / "embeddings.meta.json", std::ios::binary);
    if (!in) {
        throw EmbedError(fmt::format("no embeddings.meta.json in '{}'", dir.string()));
    }
    json meta;
    try {
        meta = json::parse(in);
    } catch (const json::exception& e) {
        throw EmbedError(fmt::format("malformed embeddings.meta.json: {}", e.what()));
    }
    const auto n = meta.at("n").get<std::size_t>();
    const auto dim = meta.at("dim").get<std::size_t>();
    auto ids = meta.at("fragment_ids").get<std::vector<std::string>>();
    if (ids.size() != n) {
        throw EmbedError("embeddings.meta.json: n does not match fragment_ids");
    }
    return EmbeddingSet(meta.at("provider_id").get<std::string>(), std::move(ids),
                        read_f32(dir / "embeddings.f32", n, dim));
}

}  // namespace codesum
