#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nearq {

enum class TopologyKind { cycle, k_cyclic, complete, star, path };

struct TopologySpec {
    TopologyKind kind = TopologyKind::cycle;
    std::size_t k = 0;    // only meaningful for k_cyclic

    /// Parses "cycle", "complete", "star", "path", "k_cyclic(4)" / "4-cyclic".
    static TopologySpec parse(std::string_view text);
    std::string to_string() const;
};

/// Undirected simple graph. Edges are stored once, as (i, j) with i < j, sorted.
class Graph {
public:
    using Edge = std::pair<std::size_t, std::size_t>;

    Graph(std::size_t n, std::vector<Edge> edges);

    std::size_t size() const noexcept { return n_; }
    const std::vector<Edge> &edges() const noexcept { return edges_; }
    const std::vector<std::size_t> &neighbors(std::size_t i) const { return adjacency_.at(i); }
    std::size_t degree(std::size_t i) const { return adjacency_.at(i).size(); }
    bool has_edge(std::size_t i, std::size_t j) const;
    bool connected() const;

    /// "n m" header line followed by one "i j" line per edge.
    std::string to_edge_list() const;

private:
    std::size_t n_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> adjacency_;
};

Graph build_topology(const TopologySpec &spec, std::size_t n);

/// Symmetric doubly-stochastic consensus matrix together with its sparsity
/// pattern and second-largest eigenvalue magnitude.
class MixingMatrix {
public:
    struct Entry {
        std::size_t col;
        double weight;
    };

    /// Validates symmetry, stochasticity and positive diagonal, then computes beta.
    explicit MixingMatrix(Eigen::MatrixXd dense);

    std::size_t size() const noexcept { return static_cast<std::size_t>(dense_.rows()); }
    const Eigen::MatrixXd &dense() const noexcept { return dense_; }
    double operator()(std::size_t i, std::size_t j) const { return dense_(i, j); }
    double beta() const noexcept { return beta_; }

    /// Nonzero entries of row i in ascending column order (diagonal included).
    const std::vector<Entry> &row(std::size_t i) const { return rows_.at(i); }

    /// Directed links (i -> j, i != j, W[i][j] > 0).
    std::size_t directed_links() const noexcept { return directed_links_; }

    std::string to_csv() const;

private:
    Eigen::MatrixXd dense_;
    std::vector<std::vector<Entry>> rows_;
    std::size_t directed_links_ = 0;
    double beta_ = 0.0;
};

MixingMatrix metropolis_weights(const Graph &g);

/// Second-largest eigenvalue magnitude of a symmetric matrix (spectrum sorted by |lambda|).
double spectral_beta(const Eigen::MatrixXd &w);
inline double spectral_beta(const MixingMatrix &w) { return w.beta(); }

/// (W kron I_p) x, computed row-wise over the sparsity pattern.
std::vector<double> mix(const MixingMatrix &w, std::span<const double> x, std::size_t p);
void mix_into(const MixingMatrix &w, std::span<const double> x, std::span<double> out, std::size_t p);

}    // namespace nearq
