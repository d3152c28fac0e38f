#include "nearq/topology.hpp"

#include "nearq/error.hpp"
#include "nearq/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <set>

namespace nearq {

TopologySpec TopologySpec::parse(std::string_view text) {
    if (text == "cycle") return {TopologyKind::cycle, 0};
    if (text == "complete") return {TopologyKind::complete, 0};
    if (text == "star") return {TopologyKind::star, 0};
    if (text == "path") return {TopologyKind::path, 0};

    std::string_view digits;
    if (text.starts_with("k_cyclic(") && text.ends_with(")")) {
        digits = text.substr(9, text.size() - 10);
    } else if (text.ends_with("-cyclic")) {
        digits = text.substr(0, text.size() - 7);
    } else {
        throw ConfigError("unknown topology '" + std::string(text) + "'");
    }
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw ConfigError("bad k in topology '" + std::string(text) + "'");
    return {TopologyKind::k_cyclic, static_cast<std::size_t>(std::stoul(std::string(digits)))};
}

std::string TopologySpec::to_string() const {
    switch (kind) {
    case TopologyKind::cycle: return "cycle";
    case TopologyKind::complete: return "complete";
    case TopologyKind::star: return "star";
    case TopologyKind::path: return "path";
    case TopologyKind::k_cyclic: return "k_cyclic(" + std::to_string(k) + ")";
    }
    return "?";
}

Graph::Graph(std::size_t n, std::vector<Edge> edges) : n_(n), adjacency_(n) {
    std::set<Edge> unique;
    for (auto [a, b] : edges) {
        if (a >= n || b >= n) throw ConfigError("edge endpoint out of range");
        if (a == b) throw ConfigError("self-loops are not allowed");
        if (a > b) std::swap(a, b);
        if (!unique.insert({a, b}).second) throw ConfigError("duplicate edge");
    }
    edges_.assign(unique.begin(), unique.end());
    for (auto [a, b] : edges_) {
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }
    for (auto &adj : adjacency_) std::sort(adj.begin(), adj.end());
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
    const auto &adj = adjacency_.at(i);
    return std::binary_search(adj.begin(), adj.end(), j);
}

bool Graph::connected() const {
    if (n_ == 0) return false;
    std::vector<bool> seen(n_, false);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = true;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        auto v = frontier.front();
        frontier.pop();
        for (auto u : adjacency_[v]) {
            if (!seen[u]) {
                seen[u] = true;
                ++reached;
                frontier.push(u);
            }
        }
    }
    return reached == n_;
}

std::string Graph::to_edge_list() const {
    std::string out = std::to_string(n_) + " " + std::to_string(edges_.size()) + "\n";
    for (auto [a, b] : edges_) out += std::to_string(a) + " " + std::to_string(b) + "\n";
    return out;
}

Graph build_topology(const TopologySpec &spec, std::size_t n) {
    if (n < 2) throw ConfigError("topology needs at least 2 nodes");
    std::vector<Graph::Edge> edges;
    switch (spec.kind) {
    case TopologyKind::cycle:
        if (n == 2) {
            edges.emplace_back(0, 1);
        } else {
            for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
        }
        break;
    case TopologyKind::k_cyclic: {
        if (spec.k == 0 || spec.k % 2 != 0 || spec.k >= n)
            throw ConfigError("k_cyclic requires even k with 0 < k < n (got k=" + std::to_string(spec.k) +
                              ", n=" + std::to_string(n) + ")");
        std::set<Graph::Edge> unique;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t s = 1; s <= spec.k / 2; ++s) {
                auto j = (i + s) % n;
                unique.insert({std::min(i, j), std::max(i, j)});
            }
        }
        edges.assign(unique.begin(), unique.end());
        break;
    }
    case TopologyKind::complete:
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
        break;
    case TopologyKind::star:
        for (std::size_t i = 1; i < n; ++i) edges.emplace_back(0, i);
        break;
    case TopologyKind::path:
        for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
        break;
    }
    return Graph(n, std::move(edges));
}

MixingMatrix::MixingMatrix(Eigen::MatrixXd dense) : dense_(std::move(dense)) {
    const auto n = static_cast<std::size_t>(dense_.rows());
    if (n == 0 || dense_.cols() != dense_.rows()) throw DimensionError("mixing matrix must be square and non-empty");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(dense_(i, i) > 0.0)) throw ConfigError("mixing matrix diagonal must be positive");
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double w = dense_(i, j);
            if (w < 0.0) throw ConfigError("mixing matrix entries must be nonnegative");
            if (w != dense_(j, i)) throw ConfigError("mixing matrix must be symmetric");
            row_sum += w;
        }
        if (std::abs(row_sum - 1.0) > 1e-12) throw ConfigError("mixing matrix rows must sum to 1");
    }
    rows_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (dense_(i, j) != 0.0) {
                rows_[i].push_back({j, dense_(i, j)});
                if (i != j) ++directed_links_;
            }
        }
    }
    beta_ = spectral_beta(dense_);
}

std::string MixingMatrix::to_csv() const {
    std::string out;
    const auto n = size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j) out.push_back(',');
            out += text_io::format_double(dense_(i, j));
        }
        out.push_back('\n');
    }
    return out;
}

MixingMatrix metropolis_weights(const Graph &g) {
    if (!g.connected()) throw ConfigError("consensus matrix requires a connected graph");
    const auto n = g.size();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (auto [a, b] : g.edges()) {
        const double weight = 1.0 / (1.0 + static_cast<double>(std::max(g.degree(a), g.degree(b))));
        w(a, b) = weight;
        w(b, a) = weight;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        for (auto j : g.neighbors(i)) off += w(i, j);
        w(i, i) = 1.0 - off;
    }
    return MixingMatrix(std::move(w));
}

double spectral_beta(const Eigen::MatrixXd &w) {
    if (w.rows() < 2) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
    std::vector<double> mags;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) mags.push_back(std::abs(solver.eigenvalues()(i)));
    std::sort(mags.begin(), mags.end(), std::greater<>());
    return mags[1];
}

void mix_into(const MixingMatrix &w, std::span<const double> x, std::span<double> out, std::size_t p) {
    const auto n = w.size();
    if (x.size() != n * p || out.size() != n * p)
        throw DimensionError("mix: expected " + std::to_string(n * p) + " entries, got " + std::to_string(x.size()));
    for (std::size_t i = 0; i < n; ++i) {
        double *dst = out.data() + i * p;
        std::fill(dst, dst + p, 0.0);
        for (const auto &[j, weight] : w.row(i)) {
            const double *src = x.data() + j * p;
            for (std::size_t c = 0; c < p; ++c) dst[c] += weight * src[c];
        }
    }
}

std::vector<double> mix(const MixingMatrix &w, std::span<const double> x, std::size_t p) {
    std::vector<double> out(x.size());
    mix_into(w, x, out, p);
    return out;
}

}    // namespace nearq
