#include "nearq/error.hpp"
#include "nearq/topology.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace nearq;

namespace {

oracle::Dense to_dense(const MixingMatrix &w) {
    oracle::Dense d(w.size(), std::vector<double>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j) d[i][j] = w(i, j);
    return d;
}

std::vector<TopologySpec> all_kinds() {
    return {{TopologyKind::cycle, 0}, {TopologyKind::complete, 0}, {TopologyKind::star, 0}, {TopologyKind::path, 0}};
}

}    // namespace

TEST_CASE("cycle on four nodes") {
    Graph g = build_topology(TopologySpec::parse("cycle"), 4);
    CHECK(g.edges().size() == 4);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 2));
    CHECK(g.has_edge(2, 3));
    CHECK(g.has_edge(3, 0));
    CHECK_FALSE(g.has_edge(0, 2));
}

TEST_CASE("4-cyclic graph on ten nodes is 4-regular") {
    Graph g = build_topology(TopologySpec::parse("k_cyclic(4)"), 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(g.degree(i) == 4);
    CHECK(g.edges().size() == 20);
    CHECK(g.connected());
    CHECK(TopologySpec::parse("4-cyclic").to_string() == TopologySpec::parse("k_cyclic(4)").to_string());
}

TEST_CASE("complete graph on three nodes") {
    Graph g = build_topology(TopologySpec::parse("complete"), 3);
    CHECK(g.edges().size() == 3);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(0, 2));
    CHECK(g.has_edge(1, 2));
}

TEST_CASE("graph construction rejects bad input") {
    CHECK_THROWS_AS(Graph(3, {{0, 0}}), ConfigError);
    CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}}), ConfigError);
    CHECK_THROWS_AS(Graph(3, {{0, 3}}), ConfigError);
    CHECK_THROWS_AS(build_topology(TopologySpec::parse("k_cyclic(3)"), 10), ConfigError);
    CHECK_THROWS_AS(TopologySpec::parse("torus"), ConfigError);
    CHECK_THROWS_AS(metropolis_weights(Graph(4, {{0, 1}, {2, 3}})), ConfigError);
}

TEST_CASE("disconnected graph is detected") {
    CHECK_FALSE(Graph(4, {{0, 1}, {2, 3}}).connected());
    CHECK(Graph(4, {{0, 1}, {1, 2}, {2, 3}}).connected());
}

TEST_CASE("Metropolis weights on small graphs") {
    SUBCASE("cycle of three: every entry 1/3") {
        MixingMatrix w = metropolis_weights(build_topology(TopologySpec::parse("cycle"), 3));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK(w(i, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("path of two: all 1/2") {
        MixingMatrix w = metropolis_weights(build_topology(TopologySpec::parse("path"), 2));
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) CHECK(w(i, j) == 0.5);
    }
    SUBCASE("cycle of four: edges and diagonal 1/3") {
        MixingMatrix w = metropolis_weights(build_topology(TopologySpec::parse("cycle"), 4));
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(w(i, i) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
            CHECK(w(i, (i + 1) % 4) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
            CHECK(w(i, (i + 2) % 4) == 0.0);
        }
    }
}

TEST_CASE("spectral beta examples") {
    CHECK(spectral_beta(Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0)) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(spectral_beta(Eigen::MatrixXd::Identity(2, 2)) == doctest::Approx(1.0));
    CHECK(metropolis_weights(build_topology(TopologySpec::parse("cycle"), 4)).beta() ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("mix examples") {
    MixingMatrix avg(Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0));
    auto x = mix(avg, std::vector<double>{0, 1, 2}, 1);
    for (double v : x) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));

    MixingMatrix id(Eigen::MatrixXd::Identity(3, 3));
    std::vector<double> z{0.25, -7, 3.5, 1, 2, 3};
    CHECK(mix(id, z, 2) == z);

    MixingMatrix c4 = metropolis_weights(build_topology(TopologySpec::parse("cycle"), 4));
    auto y = mix(c4, std::vector<double>{3, 0, 0, 0}, 1);
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(y[2] == 0.0);
    CHECK(y[3] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mixing matrix validation") {
    Eigen::MatrixXd asym(2, 2);
    asym << 0.6, 0.4, 0.3, 0.7;
    CHECK_THROWS_AS(MixingMatrix{asym}, ConfigError);
    Eigen::MatrixXd neg(2, 2);
    neg << 1.5, -0.5, -0.5, 1.5;
    CHECK_THROWS_AS(MixingMatrix{neg}, ConfigError);
    Eigen::MatrixXd sub(2, 2);
    sub << 0.5, 0.25, 0.25, 0.5;
    CHECK_THROWS_AS(MixingMatrix{sub}, ConfigError);
}

TEST_CASE("properties over all graph families") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    for (std::size_t n = 3; n <= 12; ++n) {
        std::vector<TopologySpec> kinds = all_kinds();
        if (n > 4) kinds.push_back({TopologyKind::k_cyclic, 4});
        for (const auto &kind : kinds) {
            CAPTURE(n);
            CAPTURE(kind.to_string());
            MixingMatrix w = metropolis_weights(build_topology(kind, n));
            for (std::size_t i = 0; i < n; ++i) {
                double row = 0.0, col = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    CHECK(w(i, j) == w(j, i));
                    CHECK(w(i, j) >= 0.0);
                    row += w(i, j);
                    col += w(j, i);
                }
                CHECK(std::abs(row - 1.0) <= 1e-12);
                CHECK(std::abs(col - 1.0) <= 1e-12);
            }
            CHECK(w.beta() < 1.0);
            if (n <= 8) CHECK(std::abs(w.beta() - oracle::second_largest_magnitude(to_dense(w))) <= 1e-10);

            const std::size_t p = 3;
            std::vector<double> x(n * p);
            for (auto &v : x) v = normal(rng);
            std::vector<double> mean(p, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t c = 0; c < p; ++c) mean[c] += x[i * p + c] / static_cast<double>(n);
            auto spread = [&](const std::vector<double> &v) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t c = 0; c < p; ++c) s += (v[i * p + c] - mean[c]) * (v[i * p + c] - mean[c]);
                return std::sqrt(s);
            };
            const double s0 = spread(x);
            std::vector<double> cur = x;
            for (int t = 1; t <= 10; ++t) {
                cur = mix(w, cur, p);
                std::vector<double> m(p, 0.0);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t c = 0; c < p; ++c) m[c] += cur[i * p + c] / static_cast<double>(n);
                for (std::size_t c = 0; c < p; ++c) CHECK(std::abs(m[c] - mean[c]) <= 1e-12);
                CHECK(spread(cur) <= std::pow(w.beta(), t) * s0 + 1e-12);
            }
        }
    }
}

TEST_CASE("edge list and csv are deterministic text") {
    Graph g = build_topology(TopologySpec::parse("cycle"), 3);
    CHECK(g.to_edge_list() == "3 3\n0 1\n0 2\n1 2\n");
    MixingMatrix w = metropolis_weights(g);
    CHECK(w.to_csv() == metropolis_weights(g).to_csv());
    CHECK(w.directed_links() == 6);
}
