#pragma once

#include "codesum/matrix.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace codesum {

class EmbedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The provider rejected a request as too large; the caller may retry with a smaller batch.
class PayloadTooLarge : public EmbedError {
public:
    using EmbedError::EmbedError;
};

/// n unit-norm vectors aligned with n distinct fragment ids.
class EmbeddingSet {
public:
    EmbeddingSet() = default;
    // Rows are L2-normalised here; a zero row is rejected.
    EmbeddingSet(std::string provider_id, std::vector<std::string> fragment_ids, Matrix vectors);
    static EmbeddingSet empty(std::string provider_id, std::size_t dim);

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return vectors_.cols(); }
    const std::string& provider_id() const { return provider_id_; }
    const std::vector<std::string>& fragment_ids() const { return ids_; }
    const Matrix& vectors() const { return vectors_; }
    std::span<const double> row(std::size_t i) const { return vectors_.row(i); }
    std::optional<std::size_t> index_of(const std::string& id) const;

private:
    std::string provider_id_;
    std::vector<std::string> ids_;
    Matrix vectors_;
    std::unordered_map<std::string, std::size_t> index_;
};

class EmbedProvider {
public:
    virtual ~EmbedProvider() = default;
    virtual std::string id() const = 0;
    virtual std::size_t dim() const = 0;
    // One vector per input text, in input order. Must be safe to call concurrently.
    virtual std::vector<std::vector<double>> embed(std::span<const std::string> texts) = 0;
};

/// Seeded bag-of-tokens vector: lowercase ASCII alphanumeric runs and single
/// CJK ideographs are tokens; each is hashed to an index in [0, dim) and the
/// count vector is L2-normalised. Token-free text maps to the unit vector at
/// the seed's own hash.
std::vector<double> deterministic_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

// Tokens as seen by deterministic_embed.
std::vector<std::string> embed_tokens(std::string_view text);
std::size_t token_bucket(std::string_view token, std::size_t dim, std::uint64_t seed);

class DeterministicEmbedder final : public EmbedProvider {
public:
    DeterministicEmbedder(std::size_t dim, std::uint64_t seed);
    std::string id() const override;
    std::size_t dim() const override { return dim_; }
    std::vector<std::vector<double>> embed(std::span<const std::string> texts) override;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

struct HttpEmbedConfig {
    std::string id;
    std::string base_url;
    std::string api_key;
    std::string model;
    std::size_t dim = 0;
    std::chrono::seconds timeout{60};
};

/// POST {base}/embeddings with {"model", "input": [...]}; accepts either
/// {"data": [{"embedding": [...], "index": i}]} or {"embeddings": [[...]]}.
class HttpEmbedProvider final : public EmbedProvider {
public:
    explicit HttpEmbedProvider(HttpEmbedConfig config);
    std::string id() const override { return config_.id; }
    std::size_t dim() const override { return config_.dim; }
    std::vector<std::vector<double>> embed(std::span<const std::string> texts) override;

    static std::vector<std::vector<double>> decode_response(const std::string& body, std::size_t expected);

private:
    HttpEmbedConfig config_;
};

struct EmbedOptions {
    std::size_t batch_size = 64;
    std::size_t parallelism = 1;
};

/// Embeds texts[i] as row i (id ids[i]). Batches that fail with
/// PayloadTooLarge are halved and retried down to single items. A dimension
/// mismatch or any item failure fails the whole call.
EmbeddingSet embed_batch(std::span<const std::string> texts, std::span<const std::string> ids,
                         EmbedProvider& provider, const EmbedOptions& options = {});

// embeddings.f32 (little-endian, row-major) + embeddings.meta.json in `dir`.
void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& dir);
EmbeddingSet read_embeddings(const std::filesystem::path& dir);

// Raw little-endian float32 matrix I/O.
void write_f32(const std::filesystem::path& path, const Matrix& m);
Matrix read_f32(const std::filesystem::path& path, std::size_t rows, std::size_t cols);

}  // namespace codesum
