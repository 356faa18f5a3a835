#include "codesum/kernels.hpp"
#include "codesum/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace codesum;
namespace k = codesum::kernels;

namespace {

Matrix random_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& v : m.data()) {
        v = rng.normal();
    }
    return m;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("pair cosines agree bit for bit") {
    SplitMix64 rng(1);
    const auto rows = random_matrix(rng, 200, 16);
    std::vector<k::IndexPair> pairs;
    for (int i = 0; i < 5000; ++i) {
        pairs.push_back({static_cast<std::uint32_t>(rng.below(200)), static_cast<std::uint32_t>(rng.below(200))});
    }
    std::vector<double> a(pairs.size()), b(pairs.size());
    k::serial::pair_cosines(rows.view(), pairs, a);
    k::parallel::pair_cosines(rows.view(), pairs, b);
    CHECK(a == b);
    for (double v : a) {
        CHECK(std::abs(v) <= 1.0);
    }
}

TEST_CASE("nearest-centroid assignment agrees and breaks ties low") {
    SplitMix64 rng(2);
    const auto pts = random_matrix(rng, 500, 8);
    const auto cents = random_matrix(rng, 7, 8);
    std::vector<std::size_t> sa(500), pa(500);
    std::vector<double> sd(500), pd(500);
    k::serial::assign_nearest(pts.view(), cents.view(), sa, sd);
    k::parallel::assign_nearest(pts.view(), cents.view(), pa, pd);
    CHECK(sa == pa);
    CHECK(sd == pd);

    const Matrix tie_pts(1, 1, std::vector<double>{0.0});
    const Matrix tie_cents(2, 1, std::vector<double>{1.0, -1.0});
    std::vector<std::size_t> asg(1);
    std::vector<double> d2(1);
    k::parallel::assign_nearest(tie_pts.view(), tie_cents.view(), asg, d2);
    CHECK(asg[0] == 0);
    CHECK(d2[0] == 1.0);
}

TEST_CASE("affinities agree") {
    SplitMix64 rng(3);
    const auto pts = random_matrix(rng, 120, 5);
    std::vector<double> sp(120 * 120), pp(120 * 120), sb(120), pb(120);
    k::serial::conditional_affinities(pts.view(), 10.0, {}, sp, sb);
    k::parallel::conditional_affinities(pts.view(), 10.0, {}, pp, pb);
    CHECK(sp == pp);
    CHECK(sb == pb);
    for (double beta : sb) {
        CHECK(beta > 0.0);
    }
}

TEST_CASE("t-SNE gradient agrees") {
    SplitMix64 rng(4);
    const std::size_t n = 90;
    std::vector<double> p(n * n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) {
                p[i * n + j] = p[j * n + i] = rng.uniform() + 0.01;
            }
        }
    }
    for (double v : p) {
        total += v;
    }
    for (double& v : p) {
        v /= total;
    }
    const auto y = random_matrix(rng, n, 2);
    std::vector<double> sg(n * 2), pg(n * 2);
    for (double ex : {1.0, 12.0}) {
        const double skl = k::serial::tsne_gradient(p, y.view(), ex, sg);
        const double pkl = k::parallel::tsne_gradient(p, y.view(), ex, pg);
        CHECK(skl == pkl);
        CHECK(sg == pg);
        CHECK(skl > 0.0);
    }
    CHECK(k::max_threads() >= 1);
}

}  // TEST_SUITE
