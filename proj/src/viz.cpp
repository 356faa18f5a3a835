#include "codesum/viz.hpp"

#include "codesum/rng.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace codesum {

void TsneConfig::validate(std::size_t n) const {
    if (n < 8) {
        throw VizError(fmt::format("t-SNE needs at least 8 points, got {}", n));
    }
    if (!(perplexity > 1.0)) {
        throw VizError("perplexity must exceed 1");
    }
    if (!(perplexity < static_cast<double>(n - 1) / 3.0)) {
        throw VizError(fmt::format("perplexity {} must be below (n-1)/3 = {:.3f}", perplexity,
                                   static_cast<double>(n - 1) / 3.0));
    }
    if (!(learning_rate > 0.0)) {
        throw VizError("learning rate must be positive");
    }
    if (iterations < 250) {
        throw VizError("t-SNE needs at least 250 iterations");
    }
    if (!(early_exaggeration >= 1.0) || exaggeration_iters < 0 || exaggeration_iters > iterations) {
        throw VizError("invalid early exaggeration settings");
    }
}

Matrix conditional_affinities(ConstMatrixView points, double perplexity, const kernels::BandwidthSearch& search) {
    const std::size_t n = points.rows;
    Matrix p(n, n);
    std::vector<double> beta(n);
    kernels::parallel::conditional_affinities(points, perplexity, search, p.data(), beta);
    return p;
}

Matrix joint_affinities(const Matrix& conditional) {
    const std::size_t n = conditional.rows();
    Matrix p(n, n);
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            p(i, j) = (conditional(i, j) + conditional(j, i)) * scale;
        }
    }
    return p;
}

double tsne_objective(const Matrix& p, const Matrix& y, Matrix* gradient) {
    Matrix scratch;
    Matrix& grad = gradient ? *gradient : scratch;
    grad = Matrix(y.rows(), y.cols());
    return kernels::parallel::tsne_gradient(p.data(), y.view(), 1.0, grad.data());
}

namespace {

bool all_rows_identical(ConstMatrixView points) {
    const auto first = points.row(0);
    for (std::size_t i = 1; i < points.rows; ++i) {
        const auto r = points.row(i);
        for (std::size_t k = 0; k < points.cols; ++k) {
            if (r[k] != first[k]) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

Projection2D tsne(ConstMatrixView points, const TsneConfig& config) {
    const std::size_t n = points.rows;
    config.validate(n);
    if (all_rows_identical(points)) {
        throw VizError("zero variance input");
    }

    const Matrix p = joint_affinities(conditional_affinities(points, config.perplexity, config.bandwidth));

    SplitMix64 rng(config.seed);
    Matrix y(n, 2);
    for (double& v : y.data()) {
        v = 1e-4 * rng.normal();
    }
    Matrix update(n, 2, 0.0);
    Matrix gains(n, 2, 1.0);
    Matrix grad(n, 2);

    Projection2D out;
    out.kl_history.reserve(static_cast<std::size_t>(config.iterations));
    for (int iter = 0; iter < config.iterations; ++iter) {
        const double exaggeration = iter < config.exaggeration_iters ? config.early_exaggeration : 1.0;
        const double momentum = iter < config.momentum_switch_iter ? config.initial_momentum : config.final_momentum;
        const double kl = kernels::parallel::tsne_gradient(p.data(), y.view(), exaggeration, grad.data());
        if (iter == 0) {
            out.initial_kl = kl;
        }
        if (iter == config.exaggeration_iters) {
            out.post_exaggeration_kl = kl;
        }
        out.kl_history.push_back(kl);

        for (std::size_t q = 0; q < y.data().size(); ++q) {
            const double g = grad.data()[q];
            double& gain = gains.data()[q];
            double& u = update.data()[q];
            gain = (g > 0.0) != (u > 0.0) ? gain + 0.2 : gain * 0.8;
            gain = std::max(gain, 0.01);
            u = momentum * u - config.learning_rate * gain * g;
            y.data()[q] += u;
        }
        for (std::size_t d = 0; d < 2; ++d) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                mean += y(i, d);
            }
            mean /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                y(i, d) -= mean;
            }
        }
    }
    out.final_kl = tsne_objective(p, y);
    if (config.exaggeration_iters >= config.iterations) {
        out.post_exaggeration_kl = out.final_kl;
    }
    if (!std::isfinite(out.final_kl)) {
        throw VizError("t-SNE diverged (non-finite KL)");
    }
    out.coords = std::move(y);
    return out;
}

Projection2D tsne(const EmbeddingSet& embeddings, const TsneConfig& config) {
    auto projection = tsne(embeddings.vectors().view(), config);
    projection.fragment_ids = embeddings.fragment_ids();
    return projection;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

void check_shape(const Projection2D& p) {
    if (p.coords.cols() != 2 || p.coords.rows() != p.fragment_ids.size() ||
        (p.labels && p.labels->size() != p.fragment_ids.size())) {
        throw VizError("projection ids, labels and coordinates disagree in length");
    }
}

}  // namespace

void export_projection(const Projection2D& projection, const std::filesystem::path& path) {
    check_shape(projection);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw VizError(fmt::format("cannot write '{}'", path.string()));
    }
    out << (projection.labels ? "id,x,y,label\n" : "id,x,y\n");
    for (std::size_t i = 0; i < projection.fragment_ids.size(); ++i) {
        out << csv_field(projection.fragment_ids[i]) << ','
            << fmt::format("{:.17g},{:.17g}", projection.coords(i, 0), projection.coords(i, 1));
        if (projection.labels) {
            out << ',' << (*projection.labels)[i];
        }
        out << '\n';
    }
    if (!out) {
        throw VizError(fmt::format("write to '{}' failed", path.string()));
    }
}

void export_projection_json(const Projection2D& projection, const std::filesystem::path& path) {
    check_shape(projection);
    nlohmann::json points = nlohmann::json::array();
    for (std::size_t i = 0; i < projection.fragment_ids.size(); ++i) {
        nlohmann::json pt = {{"id", projection.fragment_ids[i]},
                             {"x", projection.coords(i, 0)},
                             {"y", projection.coords(i, 1)},
                             {"label", nullptr}};
        if (projection.labels) {
            pt["label"] = (*projection.labels)[i];
        }
        points.push_back(std::move(pt));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << nlohmann::json{{"points", std::move(points)}}.dump(2) << '\n';
    if (!out) {
        throw VizError(fmt::format("cannot write '{}'", path.string()));
    }
}

Projection2D read_projection_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw VizError(fmt::format("cannot read '{}'", path.string()));
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw VizError("projection CSV is empty");
    }
    const auto header = parse_csv_line(line);
    const bool labeled = header.size() == 4;
    if (header.size() < 3 || header[0] != "id" || header[1] != "x" || header[2] != "y") {
        throw VizError("unexpected projection CSV header");
    }
    Projection2D p;
    std::vector<double> xy;
    std::vector<long long> labels;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = parse_csv_line(line);
        if (f.size() != header.size()) {
            throw VizError(fmt::format("bad projection row '{}'", line));
        }
        p.fragment_ids.push_back(f[0]);
        xy.push_back(std::stod(f[1]));
        xy.push_back(std::stod(f[2]));
        if (labeled) {
            labels.push_back(std::stoll(f[3]));
        }
    }
    p.coords = Matrix(p.fragment_ids.size(), 2, std::move(xy));
    if (labeled) {
        p.labels = std::move(labels);
    }
    return p;
}

}  // namespace codesum
